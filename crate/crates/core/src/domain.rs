//! Shared domain types: supplier profiles, observation models, reputation
//! priors, and reproducible sampling.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, substream};

/// Tolerance used when checking that probability vectors sum to one.
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// A supplier's private type, reported message, and the buyer's purchase rule.
///
/// The message space equals the type space: a supplier describes its product
/// as one of the admissible types, truthfully or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplierProfile {
    type_space: Vec<u32>,
    true_type: u32,
    message: u32,
    purchase_prob: BTreeMap<u32, f64>,
}

impl SupplierProfile {
    /// Binary type space `{0, 1}`, the default used throughout the case studies.
    pub fn binary(true_type: u32, message: u32, alpha0: f64, alpha1: f64) -> Result<Self> {
        Self::new(
            vec![0, 1],
            true_type,
            message,
            BTreeMap::from([(0, alpha0), (1, alpha1)]),
        )
    }

    pub fn new(
        type_space: Vec<u32>,
        true_type: u32,
        message: u32,
        purchase_prob: BTreeMap<u32, f64>,
    ) -> Result<Self> {
        if type_space.is_empty() {
            return Err(Error::InvalidModel("type space is empty".into()));
        }
        for (label, value) in [("true_type", true_type), ("message", message)] {
            if !type_space.contains(&value) {
                return Err(Error::InvalidModel(format!(
                    "{label} {value} is not a member of the type space"
                )));
            }
        }
        for (&m, &alpha) in &purchase_prob {
            if !type_space.contains(&m) {
                return Err(Error::InvalidModel(format!(
                    "purchase rule defined for unknown message {m}"
                )));
            }
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Parameter {
                    name: "alpha(m)",
                    value: alpha,
                    constraint: "purchase probabilities must lie in [0, 1]",
                });
            }
        }
        Ok(Self {
            type_space,
            true_type,
            message,
            purchase_prob,
        })
    }

    pub fn type_space(&self) -> &[u32] {
        &self.type_space
    }

    pub fn true_type(&self) -> u32 {
        self.true_type
    }

    pub fn message(&self) -> u32 {
        self.message
    }

    /// Probability that the buyer purchases after receiving message `m`.
    /// Messages without an explicit rule purchase with probability zero.
    pub fn purchase_prob(&self, m: u32) -> f64 {
        self.purchase_prob.get(&m).copied().unwrap_or(0.0)
    }

    /// True when the reported message matches the private type.
    pub fn is_truthful(&self) -> bool {
        self.true_type == self.message
    }
}

/// A named performance distribution for one hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationModel {
    Gaussian { mean: f64, variance: f64 },
    Bernoulli { success_prob: f64 },
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl ObservationModel {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if variance <= 0.0 || variance.is_nan() {
            return Err(Error::Parameter {
                name: "variance",
                value: variance,
                constraint: "must be strictly positive",
            });
        }
        if !mean.is_finite() {
            return Err(Error::Parameter {
                name: "mean",
                value: mean,
                constraint: "must be finite",
            });
        }
        Ok(Self::Gaussian { mean, variance })
    }

    pub fn bernoulli(success_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&success_prob) {
            return Err(Error::Parameter {
                name: "success_prob",
                value: success_prob,
                constraint: "must lie in [0, 1]",
            });
        }
        Ok(Self::Bernoulli { success_prob })
    }

    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidModel(
                "discrete model needs matching, non-empty value and probability lists".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(
                "discrete observation values must be finite".into(),
            ));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(
                "discrete observation values must be distinct".into(),
            ));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidModel(
                "discrete probabilities must be nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "discrete probabilities sum to {sum}, expected 1 within {PROB_SUM_TOLERANCE:e}"
            )));
        }
        Ok(Self::Discrete { values, probs })
    }

    /// Validate an instance that was deserialized rather than built through
    /// the checked constructors.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { mean, variance } => Self::gaussian(*mean, *variance).map(|_| ()),
            Self::Bernoulli { success_prob } => Self::bernoulli(*success_prob).map(|_| ()),
            Self::Discrete { values, probs } => {
                Self::discrete(values.clone(), probs.clone()).map(|_| ())
            }
        }
    }

    /// Density (or mass) at `y`. Observations outside a finite support have
    /// density zero; only the caller knows whether that is an error.
    pub fn density(&self, y: f64) -> f64 {
        match self {
            Self::Gaussian { mean, variance } => {
                let z = (y - mean) / variance.sqrt();
                crate::stats::gaussian_pdf(z) / variance.sqrt()
            }
            Self::Bernoulli { success_prob } => {
                if y == 1.0 {
                    *success_prob
                } else if y == 0.0 {
                    1.0 - success_prob
                } else {
                    0.0
                }
            }
            Self::Discrete { values, probs } => values
                .iter()
                .position(|&v| v == y)
                .map_or(0.0, |i| probs[i]),
        }
    }

    /// The finite observation alphabet, when one exists.
    pub fn finite_support(&self) -> Option<Vec<f64>> {
        match self {
            Self::Gaussian { .. } => None,
            Self::Bernoulli { .. } => Some(vec![0.0, 1.0]),
            Self::Discrete { values, .. } => Some(values.clone()),
        }
    }

    /// Point masses aligned with [`Self::finite_support`].
    pub fn finite_masses(&self) -> Option<Vec<f64>> {
        match self {
            Self::Gaussian { .. } => None,
            Self::Bernoulli { success_prob } => Some(vec![1.0 - success_prob, *success_prob]),
            Self::Discrete { probs, .. } => Some(probs.clone()),
        }
    }

    /// True when both models describe the same observation space.
    pub fn same_space(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Gaussian { .. }, Self::Gaussian { .. }) => true,
            (Self::Bernoulli { .. }, Self::Bernoulli { .. }) => true,
            (Self::Discrete { values: a, .. }, Self::Discrete { values: b, .. }) => a == b,
            _ => false,
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::Gaussian { mean, variance } => {
                let normal = Normal::new(*mean, variance.sqrt()).expect("validated variance");
                normal.sample(rng)
            }
            Self::Bernoulli { success_prob } => {
                if rng.random::<f64>() < *success_prob {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Discrete { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("validated non-empty")
            }
        }
    }
}

/// Prior over hypotheses: the supplier's reputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Reputation {
    prior: Vec<f64>,
}

impl Reputation {
    pub fn new(prior: Vec<f64>) -> Result<Self> {
        if prior.len() < 2 {
            return Err(Error::InvalidModel(
                "a reputation prior needs at least two hypotheses".into(),
            ));
        }
        if prior.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidModel(
                "reputation prior entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = prior.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "reputation prior sums to {sum}, expected 1 within {PROB_SUM_TOLERANCE:e}"
            )));
        }
        Ok(Self { prior })
    }

    /// Two-hypothesis prior `(pi_0, pi_1)`.
    pub fn binary(pi0: f64, pi1: f64) -> Result<Self> {
        Self::new(vec![pi0, pi1])
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.prior.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<Vec<f64>> for Reputation {
    type Error = Error;

    fn try_from(prior: Vec<f64>) -> Result<Self> {
        Self::new(prior)
    }
}

impl From<Reputation> for Vec<f64> {
    fn from(rep: Reputation) -> Self {
        rep.prior
    }
}

/// An ordered batch of observations together with the seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    values: Vec<f64>,
    seed: u64,
}

impl SampleBatch {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter {
                name: "values",
                value: bad,
                constraint: "observations must be finite",
            });
        }
        Ok(Self { values, seed })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Bayesian LRT threshold for a two-hypothesis prior: `tau = pi_0 / pi_1`.
pub fn bayes_threshold(rep: &Reputation) -> Result<f64> {
    let prior = rep.prior();
    if prior.len() != 2 {
        return Err(Error::DegeneratePrior(format!(
            "threshold needs exactly two hypotheses, got {}",
            prior.len()
        )));
    }
    if prior[1] <= 0.0 || prior[0] <= 0.0 {
        return Err(Error::DegeneratePrior(format!(
            "both prior entries must be strictly positive, got ({}, {})",
            prior[0], prior[1]
        )));
    }
    Ok(prior[0] / prior[1])
}

/// Draw `n` i.i.d. observations from `model`.
///
/// Each observation uses its own counter-derived substream of `(seed, index)`,
/// so the batch is a pure function of `(model, n, seed)` and identical under
/// any evaluation order or parallel split.
pub fn sample(model: &ObservationModel, n: usize, seed: u64) -> Result<SampleBatch> {
    model.validate()?;
    if n == 0 {
        return Err(Error::Parameter {
            name: "n",
            value: 0.0,
            constraint: "must draw at least one observation",
        });
    }
    let values = (0..n)
        .map(|i| {
            let mut rng = substream(seed, &[stream::SAMPLE, i as u64]);
            model.draw(&mut rng)
        })
        .collect();
    SampleBatch::new(values, seed)
}
