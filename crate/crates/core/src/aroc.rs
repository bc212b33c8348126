//! Accountability receiver operating characteristic (AROC) curves, area
//! under the curve, Shapiro bounds, and the curve property checks.
//!
//! Curve points are parameterized by the likelihood-ratio threshold `tau`
//! taken in the misinformation-over-truthful direction, so the slope of the
//! curve at a point equals that point's `tau`. The closed-form Gaussian
//! accountability in [`crate::hypotest::accountability_gaussian`] expresses
//! the same family through the reciprocal reputation ratio; the two meet at
//! `tau = 1`.

use crate::error::{Error, Result};
use crate::hypotest::TestOutcome;
use crate::stats::{gaussian_cdf, gaussian_q, gaussian_q_inv};

/// Log-spaced threshold grid bounds. Wide enough to cover the practical
/// range of both probabilities without floating-point overflow.
const TAU_GRID_MIN: f64 = 1e-6;
const TAU_GRID_MAX: f64 = 1e6;

/// Increments below this are floating-point noise and are skipped by the
/// finite-difference property checks.
const MIN_INCREMENT: f64 = 1e-12;
/// Points with either coordinate this close to 1 are saturated; chords into
/// the saturated corner carry no usable slope information.
const SATURATION: f64 = 1.0 - 1e-9;

/// One point of an AROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArocPoint {
    /// Likelihood-ratio threshold that produced this point; equals the curve
    /// slope here. The analytic endpoints carry `inf` and `0`.
    pub tau: f64,
    pub p_u: f64,
    pub p_a: f64,
}

/// An AROC curve: operating points ordered by nondecreasing `P_U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArocCurve {
    points: Vec<ArocPoint>,
    detectability: Option<f64>,
}

impl ArocCurve {
    /// Build a curve from raw points. Points must already be sorted by
    /// nondecreasing `P_U` and lie inside the unit square.
    pub fn from_points(points: Vec<ArocPoint>, detectability: Option<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter {
                name: "points",
                value: points.len() as f64,
                constraint: "a curve needs at least two points",
            });
        }
        for pair in points.windows(2) {
            if pair[1].p_u < pair[0].p_u {
                return Err(Error::Parameter {
                    name: "p_u",
                    value: pair[1].p_u,
                    constraint: "points must be sorted by nondecreasing P_U",
                });
            }
        }
        for p in &points {
            if !(0.0..=1.0).contains(&p.p_u) || !(0.0..=1.0).contains(&p.p_a) {
                return Err(Error::Parameter {
                    name: "point",
                    value: p.p_a,
                    constraint: "curve coordinates must lie in [0, 1]",
                });
            }
        }
        Ok(Self {
            points,
            detectability,
        })
    }

    pub fn points(&self) -> &[ArocPoint] {
        &self.points
    }

    /// Detectability index when the curve is Gaussian-analytic.
    pub fn detectability(&self) -> Option<f64> {
        self.detectability
    }

    /// Serialize as CSV with the header `tau,p_u,p_a`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,p_u,p_a\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::emit::fmt_float(p.tau),
                crate::emit::fmt_float(p.p_u),
                crate::emit::fmt_float(p.p_a)
            ));
        }
        out
    }
}

/// Analytic Gaussian AROC curve at detectability index `d`.
///
/// `grid_size` thresholds are placed log-uniformly on `[1e-6, 1e6]` and the
/// exact limit points `(0, 0)` (tau = inf) and `(1, 1)` (tau = 0) are
/// appended. At `d = 0` the hypotheses coincide and the curve degenerates to
/// points on the chance diagonal.
pub fn aroc_curve_gaussian(d: f64, grid_size: usize) -> Result<ArocCurve> {
    if d < 0.0 || !d.is_finite() {
        return Err(Error::Parameter {
            name: "d",
            value: d,
            constraint: "detectability index must be nonnegative",
        });
    }
    if !(3..=1_000_000).contains(&grid_size) {
        return Err(Error::Parameter {
            name: "grid_size",
            value: grid_size as f64,
            constraint: "grid size must lie in 3..=1000000",
        });
    }
    let mut points = Vec::with_capacity(grid_size + 2);
    points.push(ArocPoint {
        tau: f64::INFINITY,
        p_u: 0.0,
        p_a: 0.0,
    });
    let log_min = TAU_GRID_MIN.ln();
    let log_max = TAU_GRID_MAX.ln();
    for i in 0..grid_size {
        // Descending tau gives ascending P_U.
        let frac = i as f64 / (grid_size - 1) as f64;
        let tau = (log_max + frac * (log_min - log_max)).exp();
        let (p_u, p_a) = gaussian_operating_point(d, tau);
        points.push(ArocPoint { tau, p_u, p_a });
    }
    points.push(ArocPoint {
        tau: 0.0,
        p_u: 1.0,
        p_a: 1.0,
    });
    // Guard against any non-monotonicity from the tail evaluations.
    for pair in points.windows(2) {
        debug_assert!(pair[1].p_u >= pair[0].p_u);
    }
    ArocCurve::from_points(points, Some(d))
}

/// Operating point of the Gaussian test at slope-threshold `tau`:
/// `P_A = Phi(d/2 - ln(tau)/d)`, `P_U = Phi(-d/2 - ln(tau)/d)`.
fn gaussian_operating_point(d: f64, tau: f64) -> (f64, f64) {
    if d == 0.0 {
        // Identical hypotheses: every threshold sits on the diagonal.
        return match tau.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => (0.0, 0.0),
            Some(std::cmp::Ordering::Equal) => (0.5, 0.5),
            _ => (1.0, 1.0),
        };
    }
    let u = tau.ln() / d;
    (gaussian_cdf(-d / 2.0 - u), gaussian_cdf(d / 2.0 - u))
}

/// `P_U` as a function of `P_A` on the analytic Gaussian curve:
/// `P_U = Q(d - Q^{-1}(1 - P_A))`.
pub fn gaussian_p_u_at(d: f64, p_a: f64) -> Result<f64> {
    if !(0.0 < p_a && p_a < 1.0) {
        return Err(Error::Parameter {
            name: "p_a",
            value: p_a,
            constraint: "must lie strictly inside (0, 1)",
        });
    }
    Ok(gaussian_q(d - gaussian_q_inv(1.0 - p_a)?))
}

/// Probability of error of a test run at `tau = 1` under equally likely
/// hypotheses: `P_e = P_U / 2 + (1 - P_A) / 2`.
pub fn error_prob_equal_priors(outcome: &TestOutcome) -> Result<f64> {
    if outcome.decision_threshold != 1.0 {
        return Err(Error::Parameter {
            name: "decision_threshold",
            value: outcome.decision_threshold,
            constraint: "the equal-priors error formula requires tau = 1",
        });
    }
    Ok(outcome.wronged / 2.0 + (1.0 - outcome.accountability) / 2.0)
}

/// Error probability of the Gaussian test at `tau = 1`: `P_e = Q(d/2)`.
pub fn gaussian_error_prob(d: f64) -> f64 {
    gaussian_q(d / 2.0)
}

/// Trapezoidal area under the curve.
pub fn auc_numeric(curve: &ArocCurve) -> Result<f64> {
    let pts = curve.points();
    if pts.len() < 3 {
        return Err(Error::Parameter {
            name: "points",
            value: pts.len() as f64,
            constraint: "AUC needs at least three points",
        });
    }
    let mut area = 0.0;
    for pair in pts.windows(2) {
        let width = pair[1].p_u - pair[0].p_u;
        if width < 0.0 {
            return Err(Error::Parameter {
                name: "p_u",
                value: pair[1].p_u,
                constraint: "points must be sorted by nondecreasing P_U",
            });
        }
        area += width * (pair[1].p_a + pair[0].p_a) / 2.0;
    }
    Ok(area)
}

/// Shapiro bounds on the AUC from the error probability at `tau = 1`:
/// `1 - P_e <= AUC <= 1 - 2 P_e^2`.
pub fn auc_bounds(p_e: f64) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&p_e) {
        return Err(Error::Parameter {
            name: "p_e",
            value: p_e,
            constraint: "a proper test has error probability in [0, 0.5]",
        });
    }
    Ok((1.0 - p_e, 1.0 - 2.0 * p_e * p_e))
}

/// Shapiro bounds for the Gaussian test at detectability `d`.
pub fn auc_bounds_gaussian(d: f64) -> Result<(f64, f64)> {
    auc_bounds(gaussian_error_prob(d))
}

/// Classification of a supplier / system against accountability floors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FloorFlags {
    /// `P_A <= eta`: the investigation cannot confidently hold the supplier
    /// accountable.
    pub unaccountable: bool,
    /// `P_A <= epsilon`: the system as a whole is close to opaque.
    pub nontransparent: bool,
}

/// Compare an achieved accountability against the `eta` and `epsilon`
/// floors. Both comparisons are inclusive.
pub fn accountability_floors(p_a: f64, eta_floor: f64, epsilon_floor: f64) -> Result<FloorFlags> {
    for (name, value) in [
        ("p_a", p_a),
        ("eta_floor", eta_floor),
        ("epsilon_floor", epsilon_floor),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Parameter {
                name,
                value,
                constraint: "must lie in [0, 1]",
            });
        }
    }
    Ok(FloorFlags {
        unaccountable: p_a <= eta_floor,
        nontransparent: p_a <= epsilon_floor,
    })
}

/// Tolerances for [`validate_aroc_properties`]. Analytic curves use the
/// defaults; Monte Carlo curves need the looser concavity tolerance.
#[derive(Debug, Clone, Copy)]
pub struct PropertyTolerances {
    pub slope_relative: f64,
    pub concavity: f64,
}

impl Default for PropertyTolerances {
    fn default() -> Self {
        Self {
            slope_relative: 0.05,
            concavity: 1e-9,
        }
    }
}

impl PropertyTolerances {
    /// Looser concavity tolerance for empirical (Monte Carlo) curves.
    pub fn empirical() -> Self {
        Self {
            concavity: 1e-3,
            ..Self::default()
        }
    }
}

/// Outcome of the four curve property checks.
#[derive(Debug, Clone)]
pub struct PropertyReport {
    /// `(0, 0)` and `(1, 1)` are both present.
    pub endpoints_present: bool,
    /// Worst relative deviation of chord slopes from the threshold at the
    /// chord's (geometric-mean) tau.
    pub slope_max_relative_error: f64,
    pub slope_ok: bool,
    /// Number of chords that carried enough signal to check.
    pub slope_chords_checked: usize,
    /// Largest increase between consecutive chord slopes (concave curves
    /// only ever decrease, up to tolerance).
    pub concavity_max_violation: f64,
    pub concavity_ok: bool,
    /// `P_A >= P_U` at every point.
    pub dominance_ok: bool,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.endpoints_present && self.slope_ok && self.concavity_ok && self.dominance_ok
    }
}

/// Check the curve properties: endpoints, slope-equals-threshold, concavity,
/// and `P_A >= P_U`. Failures are reported, never thrown.
pub fn validate_aroc_properties(curve: &ArocCurve) -> PropertyReport {
    validate_aroc_properties_with(curve, PropertyTolerances::default())
}

pub fn validate_aroc_properties_with(curve: &ArocCurve, tol: PropertyTolerances) -> PropertyReport {
    let pts = curve.points();
    let endpoints_present = pts.iter().any(|p| p.p_u == 0.0 && p.p_a == 0.0)
        && pts.iter().any(|p| p.p_u == 1.0 && p.p_a == 1.0);

    // Chord slopes with enough signal to be meaningful.
    let mut slopes = Vec::new();
    for pair in pts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (dpu, dpa) = (b.p_u - a.p_u, b.p_a - a.p_a);
        if dpu < MIN_INCREMENT || dpa < MIN_INCREMENT {
            continue;
        }
        if b.p_u > SATURATION || b.p_a > SATURATION {
            continue;
        }
        slopes.push((a.tau, b.tau, dpa / dpu));
    }

    let mut slope_max_relative_error = 0.0_f64;
    let mut slope_chords_checked = 0;
    for &(tau_a, tau_b, slope) in &slopes {
        if !tau_a.is_finite() || tau_b == 0.0 {
            continue; // chords touching the analytic endpoints
        }
        let tau_mid = (tau_a * tau_b).sqrt();
        slope_max_relative_error = slope_max_relative_error.max((slope - tau_mid).abs() / tau_mid);
        slope_chords_checked += 1;
    }

    let mut concavity_max_violation = f64::NEG_INFINITY;
    for pair in slopes.windows(2) {
        concavity_max_violation = concavity_max_violation.max(pair[1].2 - pair[0].2);
    }

    let dominance_ok = pts.iter().all(|p| p.p_a >= p.p_u);

    PropertyReport {
        endpoints_present,
        slope_max_relative_error,
        slope_ok: slope_chords_checked > 0 && slope_max_relative_error <= tol.slope_relative
            || slope_chords_checked == 0,
        slope_chords_checked,
        concavity_max_violation,
        concavity_ok: concavity_max_violation <= tol.concavity,
        dominance_ok,
    }
}
