//! Adaptive-cruise-control truck platooning case study: two-state gap
//! dynamics, LQR design, faulty-ranging-sensor simulation, and Monte Carlo
//! validation of the closed-form accountability results.
//!
//! The host truck regulates the gap error `Δx - L` and relative speed `Δv`
//! toward the origin under the constant-time-gap spacing policy
//! `L = v_h * t_gap`. A faulty sensor reports the gap `e_d` metres too long,
//! so the regulator settles `e_d` short of the desired distance: the final
//! control error observes as `N(-e_d, σ²)` instead of `N(0, σ²)`.

use nalgebra::{Matrix2, Matrix3, RowVector2, Vector2, Vector3};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotest::{TestOutcome, accountability_gaussian};
use crate::rng::{stream, substream};

/// Simulation state norm beyond which the trajectory is declared divergent.
const DIVERGENCE_NORM: f64 = 1e6;

/// Default initial condition: 5 m gap surplus, closing at 2 m/s. Recorded in
/// scenario files so emitted figures stay reproducible.
pub const DEFAULT_INITIAL_STATE: [f64; 2] = [5.0, -2.0];

/// Two-state gap dynamics with LQR weights and the sensor fault model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatoonModel {
    /// Desired constant time gap (s).
    pub t_gap: f64,
    /// Leading vehicle speed (m/s); constant in this model.
    pub lead_speed: f64,
    /// State weight on the gap error.
    pub weight_gap: f64,
    /// State weight on the relative speed.
    pub weight_speed: f64,
    /// Observation noise standard deviation (m).
    pub noise_sigma: f64,
    /// Faulty-sensor range offset `e_d` (m).
    pub sensor_bias: f64,
}

impl Default for PlatoonModel {
    fn default() -> Self {
        Self {
            t_gap: 1.5,
            lead_speed: 20.0,
            weight_gap: 1.0,
            weight_speed: 1.0,
            noise_sigma: 2.0,
            sensor_bias: 2.0,
        }
    }
}

impl PlatoonModel {
    pub fn validate(&self) -> Result<()> {
        if self.t_gap <= 0.0 || self.t_gap.is_nan() {
            return Err(Error::Parameter {
                name: "t_gap",
                value: self.t_gap,
                constraint: "time gap must be strictly positive",
            });
        }
        if self.noise_sigma <= 0.0 || self.noise_sigma.is_nan() {
            return Err(Error::Parameter {
                name: "noise_sigma",
                value: self.noise_sigma,
                constraint: "must be strictly positive",
            });
        }
        if self.weight_gap < 0.0 || self.weight_speed < 0.0 {
            return Err(Error::Parameter {
                name: "weight",
                value: self.weight_gap.min(self.weight_speed),
                constraint: "state weights must be nonnegative",
            });
        }
        if self.weight_gap + self.weight_speed <= 0.0 {
            return Err(Error::Parameter {
                name: "weights",
                value: 0.0,
                constraint: "at least one state weight must be positive",
            });
        }
        if self.sensor_bias < 0.0 {
            return Err(Error::Parameter {
                name: "sensor_bias",
                value: self.sensor_bias,
                constraint: "must be nonnegative",
            });
        }
        Ok(())
    }

    /// Desired following distance under the constant-time-gap policy.
    pub fn desired_distance(&self) -> f64 {
        self.lead_speed * self.t_gap
    }

    pub fn a_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, 0.0, 0.0)
    }

    pub fn b_vector(&self) -> Vector2<f64> {
        Vector2::new(-self.t_gap, -1.0)
    }

    pub fn q_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.weight_gap, 0.0, 0.0, self.weight_speed)
    }

    /// Control weight; fixed to one in this model.
    pub fn r_weight(&self) -> f64 {
        1.0
    }
}

/// Which sensor the supplier actually shipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorType {
    /// Type 0: reports the gap `e_d` metres longer than it is.
    Faulty,
    /// Type 1: reports the true gap.
    Normal,
}

impl SensorType {
    pub fn from_type_index(theta: u8) -> Result<Self> {
        match theta {
            0 => Ok(Self::Faulty),
            1 => Ok(Self::Normal),
            other => Err(Error::Parameter {
                name: "theta",
                value: other as f64,
                constraint: "sensor type must be 0 (faulty) or 1 (normal)",
            }),
        }
    }

    fn bias(self, e_d: f64) -> f64 {
        match self {
            Self::Faulty => e_d,
            Self::Normal => 0.0,
        }
    }
}

/// Solution of the continuous-time LQR problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrSolution {
    riccati: Matrix2<f64>,
    gain: RowVector2<f64>,
}

impl LqrSolution {
    /// The stabilizing Riccati solution `P` (symmetric positive definite).
    pub fn riccati(&self) -> &Matrix2<f64> {
        &self.riccati
    }

    /// State feedback gain `K` with `u = -K x`.
    pub fn gain(&self) -> &RowVector2<f64> {
        &self.gain
    }

    /// Max-abs residual of `PA + A'P + Q - P B R^{-1} B' P`.
    pub fn residual_norm(
        &self,
        a: &Matrix2<f64>,
        b: &Vector2<f64>,
        q: &Matrix2<f64>,
        r: f64,
    ) -> f64 {
        let p = &self.riccati;
        let res = p * a + a.transpose() * p + q - p * b * b.transpose() * p / r;
        res.amax()
    }

    pub fn closed_loop(&self, a: &Matrix2<f64>, b: &Vector2<f64>) -> Matrix2<f64> {
        a - b * self.gain
    }

    /// Closed-loop eigenvalues as `(re, im)` pairs, from the 2x2
    /// trace/determinant form.
    pub fn closed_loop_eigenvalues(&self, a: &Matrix2<f64>, b: &Vector2<f64>) -> [(f64, f64); 2] {
        let m = self.closed_loop(a, b);
        let tr = m.trace();
        let det = m.determinant();
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            [((tr + s) / 2.0, 0.0), ((tr - s) / 2.0, 0.0)]
        } else {
            let s = (-disc).sqrt() / 2.0;
            [(tr / 2.0, s), (tr / 2.0, -s)]
        }
    }
}

/// Solve the continuous-time algebraic Riccati equation for a two-state
/// single-input system by Newton-Kleinman iteration.
///
/// The initial stabilizing gain comes from Ackermann pole placement at
/// `{-1, -2}`; each Newton step solves the 3-unknown symmetric Lyapunov
/// system exactly. Acceptance is the residual bound, not the iteration
/// count.
pub fn solve_care(
    a: &Matrix2<f64>,
    b: &Vector2<f64>,
    q: &Matrix2<f64>,
    r: f64,
) -> Result<LqrSolution> {
    if r <= 0.0 || r.is_nan() {
        return Err(Error::Parameter {
            name: "r",
            value: r,
            constraint: "control weight must be strictly positive",
        });
    }
    // Ackermann: K0 = [0 1] C^{-1} p(A) with p(s) = (s+1)(s+2).
    let ctrb = Matrix2::from_columns(&[*b, a * b]);
    let ctrb_inv = ctrb
        .try_inverse()
        .ok_or(Error::Solver { residual: f64::NAN })?;
    let p_of_a = a * a + a * 3.0 + Matrix2::identity() * 2.0;
    let mut gain: RowVector2<f64> = (ctrb_inv * p_of_a).row(1).into_owned();

    let mut riccati = Matrix2::zeros();
    for _ in 0..200 {
        let m = a - b * gain;
        // Right-hand side of M'P + PM = -(Q + K'RK).
        let w = q + gain.transpose() * gain * r;
        let p = solve_lyapunov_2x2(&m, &w)?;
        let next: RowVector2<f64> = (b.transpose() * p) / r;
        let step = (next - gain).amax();
        riccati = p;
        gain = next;
        if step <= 1e-13 * (1.0 + gain.amax()) {
            break;
        }
    }

    let solution = LqrSolution { riccati, gain };
    let residual = solution.residual_norm(a, b, q, r);
    if residual > 1e-9 || residual.is_nan() {
        return Err(Error::Solver { residual });
    }
    let eigs = solution.closed_loop_eigenvalues(a, b);
    if eigs.iter().any(|&(re, _)| re >= 0.0) {
        return Err(Error::Solver { residual: f64::NAN });
    }
    Ok(solution)
}

/// Solve `M'P + PM = -W` for symmetric `P` (three unknowns).
fn solve_lyapunov_2x2(m: &Matrix2<f64>, w: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let (m11, m12, m21, m22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    #[rustfmt::skip]
    let sys = Matrix3::new(
        2.0 * m11, 2.0 * m21, 0.0,
        m12,       m11 + m22, m21,
        0.0,       2.0 * m12, 2.0 * m22,
    );
    let rhs = Vector3::new(-w[(0, 0)], -w[(0, 1)], -w[(1, 1)]);
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or(Error::Solver { residual: f64::NAN })?;
    Ok(Matrix2::new(sol[0], sol[1], sol[1], sol[2]))
}

/// LQR design for a platoon model.
///
/// The gap weight must be positive: with `weight_gap = 0` the gap error is
/// invisible to the cost and the exact closed loop keeps an eigenvalue at
/// the origin, so no strictly stabilizing design exists.
pub fn solve_lqr(model: &PlatoonModel) -> Result<LqrSolution> {
    model.validate()?;
    if model.weight_gap == 0.0 {
        return Err(Error::Parameter {
            name: "weight_gap",
            value: 0.0,
            constraint: "a stabilizing regulator needs a positive gap weight",
        });
    }
    solve_care(
        &model.a_matrix(),
        &model.b_vector(),
        &model.q_matrix(),
        model.r_weight(),
    )
}

/// A simulated closed-loop run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    /// Final true control error `Δx(T) - L` (noise free).
    pub final_gap_error: f64,
    /// Final observed control error `y(T) = Δx(T) - L + w`.
    pub observation: f64,
}

/// Simulate the closed-loop ACC system with the given sensor type from the
/// default initial state.
///
/// The controller consumes the sensor-reported gap, so a faulty sensor
/// shifts the regulated equilibrium to `Δx - L = -e_d`. Observation noise
/// enters only the measurement channel (the plant itself is deterministic).
pub fn simulate_acc(
    model: &PlatoonModel,
    sensor: SensorType,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    simulate_acc_from(model, sensor, DEFAULT_INITIAL_STATE, horizon, dt, seed)
}

/// [`simulate_acc`] from an explicit initial state `[gap error, rel speed]`.
pub fn simulate_acc_from(
    model: &PlatoonModel,
    sensor: SensorType,
    initial_state: [f64; 2],
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    model.validate()?;
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::Parameter {
            name: "dt",
            value: dt,
            constraint: "step size must be strictly positive",
        });
    }
    if horizon < 10.0 * dt {
        return Err(Error::Parameter {
            name: "horizon",
            value: horizon,
            constraint: "horizon must cover at least ten steps",
        });
    }
    let lqr = solve_lqr(model)?;
    let a = model.a_matrix();
    let b = model.b_vector();
    let closed = lqr.closed_loop(&a, &b);
    // Constant forcing from the sensor offset: the controller sees
    // x + [bias, 0], so xdot = (A - BK) x - B * k1 * bias.
    let bias = sensor.bias(model.sensor_bias);
    let forcing = -b * (lqr.gain()[0] * bias);

    let steps = (horizon / dt).round() as usize;
    let mut x = Vector2::new(initial_state[0], initial_state[1]);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push([x[0], x[1]]);
    let deriv = |x: &Vector2<f64>| closed * x + forcing;
    for step in 0..steps {
        let k1 = deriv(&x);
        let k2 = deriv(&(x + k1 * (dt / 2.0)));
        let k3 = deriv(&(x + k2 * (dt / 2.0)));
        let k4 = deriv(&(x + k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let t = (step + 1) as f64 * dt;
        if x.amax() > DIVERGENCE_NORM {
            return Err(Error::Divergence {
                time: t,
                norm: x.amax(),
            });
        }
        times.push(t);
        states.push([x[0], x[1]]);
    }

    let mut rng = substream(seed, &[stream::SIMULATION, sensor as u64]);
    let noise = Normal::new(0.0, model.noise_sigma)
        .expect("validated sigma")
        .sample(&mut rng);
    Ok(Trajectory {
        final_gap_error: x[0],
        observation: x[0] + noise,
        times,
        states,
    })
}

/// Parameters of the Gaussian accountability test for the sensor supplier.
///
/// The detectability index is always recomputed from the stored fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianScenario {
    pub sensor_bias: f64,
    pub noise_sigma: f64,
    pub n_tests: u64,
    pub reputation_ratio: f64,
}

impl GaussianScenario {
    pub fn new(
        sensor_bias: f64,
        noise_sigma: f64,
        n_tests: u64,
        reputation_ratio: f64,
    ) -> Result<Self> {
        let sc = Self {
            sensor_bias,
            noise_sigma,
            n_tests,
            reputation_ratio,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensor_bias < 0.0 || !self.sensor_bias.is_finite() {
            return Err(Error::Parameter {
                name: "sensor_bias",
                value: self.sensor_bias,
                constraint: "must be nonnegative",
            });
        }
        if self.noise_sigma <= 0.0 || self.noise_sigma.is_nan() {
            return Err(Error::Parameter {
                name: "noise_sigma",
                value: self.noise_sigma,
                constraint: "must be strictly positive",
            });
        }
        if self.n_tests == 0 {
            return Err(Error::Parameter {
                name: "n_tests",
                value: 0.0,
                constraint: "need at least one test",
            });
        }
        if self.reputation_ratio <= 0.0 || !self.reputation_ratio.is_finite() {
            return Err(Error::Parameter {
                name: "reputation_ratio",
                value: self.reputation_ratio,
                constraint: "must be positive and finite",
            });
        }
        Ok(())
    }

    /// Detectability index `d = sqrt(N) * e_d / sigma`.
    pub fn detectability(&self) -> f64 {
        (self.n_tests as f64).sqrt() * self.sensor_bias / self.noise_sigma
    }

    /// Closed-form accountability outcome for this scenario.
    pub fn closed_form_outcome(&self) -> Result<TestOutcome> {
        accountability_gaussian(self.detectability(), self.reputation_ratio)
    }

    fn with_n(&self, n_tests: u64) -> Self {
        Self { n_tests, ..*self }
    }

    fn with_tau(&self, reputation_ratio: f64) -> Self {
        Self {
            reputation_ratio,
            ..*self
        }
    }
}

/// Closed-form testing threshold on the gap-shortfall scale:
/// `eta = e_d / 2 + sigma^2 ln(tau) / (N e_d)`.
pub fn closed_form_threshold(sc: &GaussianScenario) -> Result<f64> {
    sc.validate()?;
    if sc.sensor_bias == 0.0 {
        return Err(Error::Degenerate(
            "the testing threshold is undefined when both sensor types behave identically (e_d = 0)"
                .into(),
        ));
    }
    Ok(sc.sensor_bias / 2.0
        + sc.noise_sigma * sc.noise_sigma * sc.reputation_ratio.ln()
            / (sc.n_tests as f64 * sc.sensor_bias))
}

/// The same threshold on the simulated control-error scale.
///
/// Simulated control errors settle at `-e_d` under a faulty sensor and `0`
/// under a normal one, so the shortfall threshold shifts down by `e_d`:
/// the batch mean `S` establishes the fault when `S < eta - e_d`.
pub fn decision_threshold_error_scale(sc: &GaussianScenario) -> Result<f64> {
    Ok(closed_form_threshold(sc)? - sc.sensor_bias)
}

/// Monte Carlo estimate of `(P_A, P_U)` with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub p_a_hat: f64,
    pub p_a_se: f64,
    pub p_u_hat: f64,
    pub p_u_se: f64,
    pub trials: u64,
}

fn binomial_se(p_hat: f64, trials: u64) -> f64 {
    (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
}

fn validate_trials(trials: u64) -> Result<()> {
    if !(1000..=100_000_000).contains(&trials) {
        return Err(Error::Parameter {
            name: "trials",
            value: trials as f64,
            constraint: "Monte Carlo trials must lie in 1000..=100000000",
        });
    }
    Ok(())
}

/// Fast-path Monte Carlo: draw observation batches analytically from the two
/// Gaussian hypotheses and apply the threshold decision rule.
///
/// Trials use independent `(seed, hypothesis, trial)` substreams, so the
/// estimate does not depend on evaluation order.
pub fn monte_carlo_accountability(
    sc: &GaussianScenario,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    sc.validate()?;
    validate_trials(trials)?;
    let threshold = if sc.sensor_bias > 0.0 {
        decision_threshold_error_scale(sc)?
    } else {
        return Err(Error::Degenerate(
            "Monte Carlo accountability is undefined at e_d = 0".into(),
        ));
    };
    let hit_rate = |hypothesis_mean: f64, tag: u64| -> f64 {
        let normal = Normal::new(hypothesis_mean, sc.noise_sigma).expect("validated sigma");
        let mut hits = 0u64;
        for trial in 0..trials {
            let mut rng = substream(seed, &[stream::MONTE_CARLO, tag, trial]);
            let mut sum = 0.0;
            for _ in 0..sc.n_tests {
                sum += normal.sample(&mut rng);
            }
            if sum / (sc.n_tests as f64) < threshold {
                hits += 1;
            }
        }
        hits as f64 / trials as f64
    };
    // Tag 0: faulty sensor (mean -e_d); tag 1: normal sensor (mean 0).
    let p_a_hat = hit_rate(-sc.sensor_bias, 0);
    let p_u_hat = hit_rate(0.0, 1);
    Ok(MonteCarloEstimate {
        p_a_hat,
        p_a_se: binomial_se(p_a_hat, trials),
        p_u_hat,
        p_u_se: binomial_se(p_u_hat, trials),
        trials,
    })
}

/// Slow-path Monte Carlo: observations come from the closed-loop simulation
/// instead of the analytic hypothesis distributions.
///
/// The plant is deterministic (noise enters only the measurement), so each
/// hypothesis is simulated once and trials draw repeated noisy observations
/// of its settled final state.
pub fn monte_carlo_accountability_simulated(
    model: &PlatoonModel,
    n_tests: u64,
    reputation_ratio: f64,
    trials: u64,
    seed: u64,
    horizon: f64,
    dt: f64,
) -> Result<MonteCarloEstimate> {
    let sc = GaussianScenario::new(
        model.sensor_bias,
        model.noise_sigma,
        n_tests,
        reputation_ratio,
    )?;
    validate_trials(trials)?;
    let threshold = decision_threshold_error_scale(&sc)?;
    let mut rates = [0.0_f64; 2];
    for (tag, sensor) in [(0u64, SensorType::Faulty), (1u64, SensorType::Normal)] {
        let trajectory = simulate_acc(model, sensor, horizon, dt, seed)?;
        let settled = trajectory.final_gap_error;
        let normal = Normal::new(0.0, model.noise_sigma).expect("validated sigma");
        let mut hits = 0u64;
        for trial in 0..trials {
            let mut rng = substream(seed, &[stream::MONTE_CARLO, tag, trial]);
            let mut sum = 0.0;
            for _ in 0..n_tests {
                sum += settled + normal.sample(&mut rng);
            }
            if sum / (n_tests as f64) < threshold {
                hits += 1;
            }
        }
        rates[tag as usize] = hits as f64 / trials as f64;
    }
    Ok(MonteCarloEstimate {
        p_a_hat: rates[0],
        p_a_se: binomial_se(rates[0], trials),
        p_u_hat: rates[1],
        p_u_se: binomial_se(rates[1], trials),
        trials,
    })
}

/// Closed-form `(P_A, P_U)` across a grid of test counts.
pub fn accountability_vs_n(
    sc: &GaussianScenario,
    n_grid: &[u64],
) -> Result<Vec<(u64, TestOutcome)>> {
    if n_grid.is_empty() {
        return Err(Error::Parameter {
            name: "n_grid",
            value: 0.0,
            constraint: "grid must be nonempty",
        });
    }
    n_grid
        .iter()
        .map(|&n| Ok((n, sc.with_n(n).closed_form_outcome()?)))
        .collect()
}

/// Closed-form `(P_A, P_U)` across a grid of reputation ratios.
pub fn accountability_vs_tau(
    sc: &GaussianScenario,
    tau_grid: &[f64],
) -> Result<Vec<(f64, TestOutcome)>> {
    if tau_grid.is_empty() {
        return Err(Error::Parameter {
            name: "tau_grid",
            value: 0.0,
            constraint: "grid must be nonempty",
        });
    }
    tau_grid
        .iter()
        .map(|&tau| Ok((tau, sc.with_tau(tau).closed_form_outcome()?)))
        .collect()
}
