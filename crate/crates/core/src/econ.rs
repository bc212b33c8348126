//! Economic layer: supplier penalty contracts under incentive compatibility
//! and individual rationality, cyber-insurance premium and coverage design
//! under risk aversion, and the accountability-investment trade-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotest::accountability_gaussian;
use crate::platoon::GaussianScenario;

/// A penalty contract over the binary type/message space.
///
/// Indexing is `[theta][m]`: profit and penalty of a supplier of true type
/// `theta` who reports `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractInstance {
    /// Supplier profit `J_S[theta][m]`.
    pub profits: [[f64; 2]; 2],
    /// Penalty `C_S[theta][m]` charged when held accountable.
    pub penalties: [[f64; 2]; 2],
    /// Purchase probability `alpha(m)` per message.
    pub purchase: [f64; 2],
    /// Accountability `P_A^m` of the investigation per message.
    pub accountability: [f64; 2],
}

impl ContractInstance {
    pub fn validate(&self) -> Result<()> {
        for row in &self.penalties {
            for &c in row {
                if c < 0.0 || !c.is_finite() {
                    return Err(Error::Parameter {
                        name: "penalty",
                        value: c,
                        constraint: "penalties must be nonnegative",
                    });
                }
            }
        }
        for (name, values) in [
            ("purchase", &self.purchase),
            ("accountability", &self.accountability),
        ] {
            for &v in values.iter() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Parameter {
                        name,
                        value: v,
                        constraint: "must lie in [0, 1]",
                    });
                }
            }
        }
        Ok(())
    }

    fn with_penalty_pair(&self, theta: usize, truth_penalty: f64, lie_penalty: f64) -> Self {
        let mut next = *self;
        next.penalties[theta][theta] = truth_penalty;
        next.penalties[theta][1 - theta] = lie_penalty;
        next
    }
}

/// Expected supplier utility `alpha(m) * (J_S[theta][m] - C_S[theta][m] * P_A^m)`.
pub fn supplier_utility(contract: &ContractInstance, theta: usize, m: usize) -> f64 {
    assert!(theta < 2 && m < 2, "binary type space");
    contract.purchase[m]
        * (contract.profits[theta][m] - contract.penalties[theta][m] * contract.accountability[m])
}

/// Which pairs the individual-rationality check covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IrMode {
    /// Only the misreporting pairs `(theta, m != theta)`, matching the
    /// constraint set used for the feasibility analysis.
    #[default]
    OffDiagonal,
    /// Every `(theta, m)` pair.
    AllPairs,
}

/// Per-constraint feasibility report for a penalty contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcIrReport {
    /// Truth-telling beats misreporting for each true type.
    pub incentive_compatible: [bool; 2],
    /// Participation utility is nonnegative for the checked pairs, per type.
    pub individually_rational: [bool; 2],
    /// Penalty ordering `C_S[theta][theta] < C_S[theta][m != theta]`.
    pub penalty_ordering: [bool; 2],
}

impl IcIrReport {
    pub fn feasible(&self) -> bool {
        self.incentive_compatible.iter().all(|&b| b)
            && self.individually_rational.iter().all(|&b| b)
            && self.penalty_ordering.iter().all(|&b| b)
    }
}

/// Check incentive compatibility, individual rationality, and the penalty
/// ordering for a full contract.
pub fn check_ic_ir(contract: &ContractInstance) -> Result<IcIrReport> {
    check_ic_ir_with(contract, IrMode::OffDiagonal)
}

pub fn check_ic_ir_with(contract: &ContractInstance, mode: IrMode) -> Result<IcIrReport> {
    contract.validate()?;
    let u = |theta: usize, m: usize| supplier_utility(contract, theta, m);
    let incentive_compatible = [u(0, 0) >= u(0, 1), u(1, 1) >= u(1, 0)];
    let individually_rational = match mode {
        IrMode::OffDiagonal => [u(0, 1) >= 0.0, u(1, 0) >= 0.0],
        IrMode::AllPairs => [
            u(0, 0) >= 0.0 && u(0, 1) >= 0.0,
            u(1, 0) >= 0.0 && u(1, 1) >= 0.0,
        ],
    };
    let penalty_ordering = [
        contract.penalties[0][0] < contract.penalties[0][1],
        contract.penalties[1][1] < contract.penalties[1][0],
    ];
    Ok(IcIrReport {
        incentive_compatible,
        individually_rational,
        penalty_ordering,
    })
}

/// Feasibility scan of one type's penalty pair on a grid.
#[derive(Debug, Clone)]
pub struct PenaltyRegion {
    /// `(truth penalty, misreport penalty, feasible)` per grid point,
    /// scanned truth-major then lie-minor.
    pub points: Vec<(f64, f64, bool)>,
    pub any_feasible: bool,
}

impl PenaltyRegion {
    /// CSV with the header `c_truth,c_lie,feasible`.
    pub fn to_csv(&self) -> String {
        let rows = self.points.iter().map(|&(t, l, ok)| {
            format!(
                "{},{},{}",
                crate::emit::fmt_float(t),
                crate::emit::fmt_float(l),
                ok as u8
            )
        });
        crate::emit::csv_document("c_truth,c_lie,feasible", rows)
    }
}

/// Scan the `(C_S[theta][theta], C_S[theta][m != theta])` plane over
/// `[0, truth_max] x [0, lie_max]` at the given resolution, marking the pairs
/// for which the full contract (with the other type's penalties fixed from
/// the template) satisfies all constraints. An empty region is reported,
/// not an error.
pub fn feasible_penalty_region(
    template: &ContractInstance,
    theta: usize,
    truth_max: f64,
    lie_max: f64,
    resolution: f64,
) -> Result<PenaltyRegion> {
    template.validate()?;
    if theta > 1 {
        return Err(Error::Parameter {
            name: "theta",
            value: theta as f64,
            constraint: "type must be 0 or 1",
        });
    }
    for (name, value) in [("truth_max", truth_max), ("lie_max", lie_max)] {
        if value <= 0.0 || !value.is_finite() {
            return Err(Error::Parameter {
                name,
                value,
                constraint: "grid bounds must be positive",
            });
        }
    }
    if resolution <= 0.0 || resolution.is_nan() || resolution > truth_max.min(lie_max) {
        return Err(Error::Parameter {
            name: "resolution",
            value: resolution,
            constraint: "resolution must be positive and no larger than the bounds",
        });
    }
    let steps = |max: f64| (max / resolution).floor() as usize + 1;
    let cell_count = steps(truth_max).saturating_mul(steps(lie_max));
    if cell_count > 4_000_000 {
        return Err(Error::Parameter {
            name: "resolution",
            value: resolution,
            constraint: "the scan is capped at 4e6 grid cells",
        });
    }
    let mut points = Vec::with_capacity(steps(truth_max) * steps(lie_max));
    let mut any_feasible = false;
    for i in 0..steps(truth_max) {
        let c_truth = i as f64 * resolution;
        for j in 0..steps(lie_max) {
            let c_lie = j as f64 * resolution;
            let candidate = template.with_penalty_pair(theta, c_truth, c_lie);
            let ok = check_ic_ir(&candidate)?.feasible();
            any_feasible |= ok;
            points.push((c_truth, c_lie, ok));
        }
    }
    Ok(PenaltyRegion {
        points,
        any_feasible,
    })
}

/// Buyer-side economics of one procurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuyerEconomics {
    /// Procurement cost `C_B(m)`.
    pub procurement_cost: f64,
    /// Performance gap `ΔU_B` between anticipated and delivered performance.
    pub performance_gap: f64,
    /// Accountability `P_A^m` of the investigation.
    pub accountability: f64,
}

impl BuyerEconomics {
    pub fn new(procurement_cost: f64, performance_gap: f64, accountability: f64) -> Result<Self> {
        let be = Self {
            procurement_cost,
            performance_gap,
            accountability,
        };
        be.validate()?;
        Ok(be)
    }

    pub fn validate(&self) -> Result<()> {
        if self.performance_gap < 0.0 || !self.performance_gap.is_finite() {
            return Err(Error::Parameter {
                name: "performance_gap",
                value: self.performance_gap,
                constraint: "must be nonnegative",
            });
        }
        if !(0.0..=1.0).contains(&self.accountability) {
            return Err(Error::Parameter {
                name: "accountability",
                value: self.accountability,
                constraint: "must lie in [0, 1]",
            });
        }
        Ok(())
    }
}

/// Unbiased expected loss `L_B = (1 - P_A^m) * ΔU_B`.
pub fn expected_loss(be: &BuyerEconomics) -> f64 {
    (1.0 - be.accountability) * be.performance_gap
}

/// The buyer's attitude toward the uncertain loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskModel {
    Neutral,
    /// Constant absolute risk aversion with coefficient `beta`.
    Cara {
        beta: f64,
    },
    /// Prospect theory with loss aversion `lambda`, diminishing sensitivity
    /// `beta`, and probability weighting `zeta`.
    Prospect {
        lambda: f64,
        beta: f64,
        zeta: f64,
    },
}

impl RiskModel {
    pub fn cara(beta: f64) -> Result<Self> {
        let rm = Self::Cara { beta };
        rm.validate()?;
        Ok(rm)
    }

    pub fn prospect(lambda: f64, beta: f64, zeta: f64) -> Result<Self> {
        let rm = Self::Prospect { lambda, beta, zeta };
        rm.validate()?;
        Ok(rm)
    }

    /// Prospect theory with the standard behavioural-science calibration
    /// `lambda = 2.25`, `beta = 0.88`, `zeta = 0.69`.
    pub fn prospect_standard() -> Self {
        Self::Prospect {
            lambda: 2.25,
            beta: 0.88,
            zeta: 0.69,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Neutral => Ok(()),
            Self::Cara { beta } => {
                if beta == 0.0 || beta > 1.0 || !beta.is_finite() {
                    return Err(Error::Parameter {
                        name: "beta",
                        value: beta,
                        constraint: "CARA coefficient must be nonzero and at most 1",
                    });
                }
                Ok(())
            }
            Self::Prospect { lambda, beta, zeta } => {
                if lambda <= 1.0 || lambda.is_nan() {
                    return Err(Error::Parameter {
                        name: "lambda",
                        value: lambda,
                        constraint: "loss aversion requires lambda > 1",
                    });
                }
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(Error::Parameter {
                        name: "beta",
                        value: beta,
                        constraint: "diminishing sensitivity requires beta in (0, 1]",
                    });
                }
                if !(zeta > 0.0 && zeta <= 1.0) {
                    return Err(Error::Parameter {
                        name: "zeta",
                        value: zeta,
                        constraint: "probability weighting requires zeta in (0, 1]",
                    });
                }
                Ok(())
            }
        }
    }
}

/// Whether the prospect-theory loss applies the probability weighting
/// `w(1 - P_A)` or the raw probability. Premium design uses the unweighted
/// form; feasibility and coverage analysis use the weighted form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilityWeighting {
    #[default]
    Weighted,
    Unweighted,
}

/// Prospect-theory probability weighting `w(p) = p^zeta / (p^zeta + (1-p)^zeta)`.
pub fn probability_weight(p: f64, zeta: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return p;
    }
    let num = p.powf(zeta);
    num / (num + (1.0 - p).powf(zeta))
}

/// Biased expected loss `Phi(L_B)` under the weighted convention.
pub fn biased_loss(be: &BuyerEconomics, rm: &RiskModel) -> Result<f64> {
    biased_loss_with(be, rm, ProbabilityWeighting::Weighted)
}

/// Biased expected loss with an explicit weighting convention.
///
/// - neutral: `(1 - P_A) * ΔU`
/// - CARA: `(1 - P_A) * e^(beta ΔU) / beta`
/// - prospect: `w(1 - P_A) * lambda * ΔU^beta` (loss branch magnitude,
///   reflected over the origin), or `(1 - P_A) * lambda * ΔU^beta` unweighted.
pub fn biased_loss_with(
    be: &BuyerEconomics,
    rm: &RiskModel,
    weighting: ProbabilityWeighting,
) -> Result<f64> {
    be.validate()?;
    rm.validate()?;
    let miss = 1.0 - be.accountability;
    Ok(match *rm {
        RiskModel::Neutral => miss * be.performance_gap,
        RiskModel::Cara { beta } => miss * (beta * be.performance_gap).exp() / beta,
        RiskModel::Prospect { lambda, beta, zeta } => {
            let magnitude = lambda * be.performance_gap.powf(beta);
            match weighting {
                ProbabilityWeighting::Weighted => probability_weight(miss, zeta) * magnitude,
                ProbabilityWeighting::Unweighted => miss * magnitude,
            }
        }
    })
}

/// An insurance contract: premium and coverage fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsurancePolicy {
    pub premium: f64,
    pub coverage: f64,
}

impl InsurancePolicy {
    pub fn new(premium: f64, coverage: f64) -> Result<Self> {
        let policy = Self { premium, coverage };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.premium < 0.0 || !self.premium.is_finite() {
            return Err(Error::Parameter {
                name: "premium",
                value: self.premium,
                constraint: "must be nonnegative",
            });
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return Err(Error::Parameter {
                name: "coverage",
                value: self.coverage,
                constraint: "must lie in (0, 1]",
            });
        }
        Ok(())
    }
}

/// Which side of the participation interval a policy violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingSide {
    /// `C_I / r < L_B`: the insurer would lose money.
    InsurerRationality,
    /// `C_I / r > Phi(L_B)`: the buyer would rather stay uninsured.
    BuyerRationality,
}

/// Feasibility of an insurance policy: both participation constraints hold
/// when `L_B <= C_I / r <= Phi(L_B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsuranceFeasibility {
    pub feasible: bool,
    /// Premium-to-coverage ratio `C_I / r`.
    pub ratio: f64,
    /// Lower admissible value: the unbiased expected loss.
    pub lower: f64,
    /// Upper admissible value: the biased expected loss.
    pub upper: f64,
    pub violated: Option<BindingSide>,
}

/// Check the two-sided participation condition for a policy.
pub fn insurance_feasible(
    policy: &InsurancePolicy,
    be: &BuyerEconomics,
    rm: &RiskModel,
) -> Result<InsuranceFeasibility> {
    policy.validate()?;
    let lower = expected_loss(be);
    let upper = biased_loss(be, rm)?;
    let ratio = policy.premium / policy.coverage;
    let violated = if ratio < lower {
        Some(BindingSide::InsurerRationality)
    } else if ratio > upper {
        Some(BindingSide::BuyerRationality)
    } else {
        None
    };
    Ok(InsuranceFeasibility {
        feasible: violated.is_none(),
        ratio,
        lower,
        upper,
        violated,
    })
}

/// Maximum-premium policy: full coverage with the premium at the buyer's
/// biased loss, using the reflected (unweighted) prospect form.
pub fn max_premium_full_coverage(be: &BuyerEconomics, rm: &RiskModel) -> Result<(f64, f64)> {
    if matches!(rm, RiskModel::Neutral) {
        return Err(Error::Parameter {
            name: "risk_model",
            value: 0.0,
            constraint: "the maximum-premium policy targets a risk-averse buyer",
        });
    }
    let premium = biased_loss_with(be, rm, ProbabilityWeighting::Unweighted)?;
    Ok((1.0, premium))
}

/// Admissible coverage interval at a given premium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverageBounds {
    /// `r in [lo, hi]` intersected with (0, 1]. The buyer's optimum sits at
    /// `hi`, the insurer's at `lo`.
    Interval { lo: f64, hi: f64 },
    /// The premium exceeds what the buyer would ever accept.
    Empty,
    /// No residual risk: the investigation is perfect or the gap is zero.
    NoRisk,
}

/// Coverage interval `C_I / Phi(L_B) <= r <= min(C_I / L_B, 1)`.
pub fn coverage_bounds(
    premium: f64,
    be: &BuyerEconomics,
    rm: &RiskModel,
) -> Result<CoverageBounds> {
    if premium <= 0.0 || !premium.is_finite() {
        return Err(Error::Parameter {
            name: "premium",
            value: premium,
            constraint: "must be strictly positive",
        });
    }
    let unbiased = expected_loss(be);
    if unbiased == 0.0 {
        return Ok(CoverageBounds::NoRisk);
    }
    let biased = biased_loss(be, rm)?;
    let lo = premium / biased;
    let hi = (premium / unbiased).min(1.0);
    if lo > hi {
        return Ok(CoverageBounds::Empty);
    }
    Ok(CoverageBounds::Interval { lo, hi })
}

/// Insurer profit `J_I = C_I - r * L_B`.
pub fn insurer_profit(policy: &InsurancePolicy, be: &BuyerEconomics) -> f64 {
    policy.premium - policy.coverage * expected_loss(be)
}

/// Payoff curve of the trade-off between accountability investment and
/// insurance, with the minimizing test count.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCountCurve {
    /// `(N, J_B(N))` for `N in 0..=n_max`.
    pub payoffs: Vec<(u64, f64)>,
    pub optimal_n: u64,
    pub optimal_payoff: f64,
}

impl TestCountCurve {
    /// CSV with the header `n,payoff`.
    pub fn to_csv(&self) -> String {
        let rows = self
            .payoffs
            .iter()
            .map(|&(n, j)| format!("{n},{}", crate::emit::fmt_float(j)));
        crate::emit::csv_document("n,payoff", rows)
    }
}

/// Exhaustively minimize the buyer payoff
/// `J_B(N) = C_B + (1 - P_A(N)) * phi(ΔU) + N * c_n`
/// over `N in {0, ..., n_max}` under full coverage at the maximum premium,
/// with a CARA buyer.
///
/// `N = 0` means no investigation at all: the supplier is never held
/// accountable and the buyer carries the whole biased loss. Ties break to
/// the smaller (cheaper) test count.
pub fn optimal_test_count(
    cost_per_test: f64,
    scenario: &GaussianScenario,
    be: &BuyerEconomics,
    rm: &RiskModel,
    n_max: u64,
) -> Result<TestCountCurve> {
    if cost_per_test < 0.0 || !cost_per_test.is_finite() {
        return Err(Error::Parameter {
            name: "cost_per_test",
            value: cost_per_test,
            constraint: "must be nonnegative",
        });
    }
    if n_max == 0 || n_max > 1_000_000 {
        return Err(Error::Parameter {
            name: "n_max",
            value: n_max as f64,
            constraint: "candidate test counts must lie in 1..=1000000",
        });
    }
    let RiskModel::Cara { beta } = *rm else {
        return Err(Error::Parameter {
            name: "risk_model",
            value: 0.0,
            constraint: "the trade-off analysis assumes a CARA buyer",
        });
    };
    be.validate()?;
    scenario.validate()?;
    let phi = (beta * be.performance_gap).exp() / beta;
    let mut payoffs = Vec::with_capacity(n_max as usize + 1);
    let mut best: Option<(u64, f64)> = None;
    for n in 0..=n_max {
        let p_a = if n == 0 {
            0.0
        } else {
            let d = (n as f64).sqrt() * scenario.sensor_bias / scenario.noise_sigma;
            accountability_gaussian(d, scenario.reputation_ratio)?.accountability
        };
        let payoff = be.procurement_cost + (1.0 - p_a) * phi + n as f64 * cost_per_test;
        payoffs.push((n, payoff));
        if best.is_none_or(|(_, b)| payoff < b) {
            best = Some((n, payoff));
        }
    }
    let (optimal_n, optimal_payoff) = best.expect("non-empty grid");
    Ok(TestCountCurve {
        payoffs,
        optimal_n,
        optimal_payoff,
    })
}
