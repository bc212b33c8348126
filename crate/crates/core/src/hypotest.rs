//! Accountability tests: Bayesian likelihood-ratio testing, closed-form
//! Gaussian accountability, the Neyman-Pearson binomial test, M-ary MAP
//! decisions, and decentralized fusion of per-supplier verdicts.

use serde::{Deserialize, Serialize};

use crate::domain::{ObservationModel, Reputation, SampleBatch};
use crate::error::{Error, Result};
use crate::stats::{binomial_cdf, binomial_quantile, gaussian_cdf};

/// Cap on `alphabet^k` for exact M-ary error enumeration.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// A binary hypothesis pair over a common observation space.
///
/// Which of the two hypotheses means "misinformation" is scenario specific;
/// the labels carry that meaning so downstream reports stay readable.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisPair {
    h0: ObservationModel,
    h1: ObservationModel,
    h0_label: String,
    h1_label: String,
}

impl HypothesisPair {
    pub fn new(h0: ObservationModel, h1: ObservationModel) -> Result<Self> {
        h0.validate()?;
        h1.validate()?;
        if !h0.same_space(&h1) {
            return Err(Error::MismatchedSpaces(format!("{h0:?} vs {h1:?}")));
        }
        Ok(Self {
            h0,
            h1,
            h0_label: "H0".into(),
            h1_label: "H1".into(),
        })
    }

    pub fn with_labels(mut self, h0_label: &str, h1_label: &str) -> Self {
        self.h0_label = h0_label.into();
        self.h1_label = h1_label.into();
        self
    }

    pub fn h0(&self) -> &ObservationModel {
        &self.h0
    }

    pub fn h1(&self) -> &ObservationModel {
        &self.h1
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.h0_label, &self.h1_label)
    }
}

/// Outcome of an accountability test design.
///
/// `accountability` is always the probability of correctly establishing the
/// misinformation hypothesis, whatever that hypothesis is labelled in the
/// scenario at hand; `wronged` is the matching false-alarm probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub accountability: f64,
    pub wronged: f64,
    pub decision_threshold: f64,
}

impl TestOutcome {
    pub fn new(accountability: f64, wronged: f64, decision_threshold: f64) -> Result<Self> {
        for (name, value) in [("accountability", accountability), ("wronged", wronged)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Parameter {
                    name,
                    value,
                    constraint: "probabilities must lie in [0, 1]",
                });
            }
        }
        Ok(Self {
            accountability,
            wronged,
            decision_threshold,
        })
    }
}

/// Binary decision of a likelihood-ratio test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    H0,
    H1,
}

/// Neyman-Pearson test configuration: false-alarm bound and trial count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpConfig {
    pub false_alarm_bound: f64,
    pub n_trials: u64,
}

impl NpConfig {
    /// Largest supported trial count; the exact binomial table is computed
    /// in full.
    pub const MAX_TRIALS: u64 = 1_000_000;

    pub fn new(false_alarm_bound: f64, n_trials: u64) -> Result<Self> {
        if !(false_alarm_bound > 0.0 && false_alarm_bound < 1.0) {
            return Err(Error::Parameter {
                name: "false_alarm_bound",
                value: false_alarm_bound,
                constraint: "must lie strictly inside (0, 1)",
            });
        }
        if n_trials == 0 || n_trials > Self::MAX_TRIALS {
            return Err(Error::Parameter {
                name: "n_trials",
                value: n_trials as f64,
                constraint: "trial count must lie in 1..=1000000",
            });
        }
        Ok(Self {
            false_alarm_bound,
            n_trials,
        })
    }
}

/// Result of designing the Neyman-Pearson binomial test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpTestDesign {
    /// Hold the supplier accountable when the success count is strictly
    /// below this threshold.
    pub threshold: u64,
    /// False-alarm probability actually achieved, `Pr[S < threshold | H0]`.
    pub achieved_false_alarm: f64,
}

/// A vector of per-supplier accountability bits with its decimal encoding.
///
/// The first bit is the most significant: `(1, 0)` encodes hypothesis index 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisVector {
    bits: Vec<u8>,
    index: u64,
}

impl HypothesisVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.len() > 63 {
            return Err(Error::Parameter {
                name: "bits",
                value: bits.len() as f64,
                constraint: "need between 1 and 63 accountability bits",
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Parameter {
                name: "bits",
                value: f64::NAN,
                constraint: "accountability bits must be 0 or 1",
            });
        }
        let index = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Ok(Self { bits, index })
    }

    /// Reconstruct the bit vector of length `n` from its decimal index.
    pub fn from_index(index: u64, n: usize) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::Parameter {
                name: "n",
                value: n as f64,
                constraint: "need between 1 and 63 suppliers",
            });
        }
        if index >= (1u64 << n) {
            return Err(Error::Parameter {
                name: "index",
                value: index as f64,
                constraint: "index must be below 2^n",
            });
        }
        let bits = (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect();
        Self::new(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

/// Likelihood ratio of a batch: `prod_j f(y_j | H1) / f(y_j | H0)`.
///
/// Accumulated in log space and exponentiated at the end so long batches do
/// not overflow.
pub fn likelihood_ratio(pair: &HypothesisPair, batch: &SampleBatch) -> Result<f64> {
    Ok(log_likelihood_ratio(pair, batch)?.exp())
}

/// Log of the likelihood ratio. Zero numerator density yields `-inf`
/// (a legitimate ratio of zero); zero denominator density is a support error.
pub fn log_likelihood_ratio(pair: &HypothesisPair, batch: &SampleBatch) -> Result<f64> {
    let mut log_ratio = 0.0;
    for &y in batch.values() {
        let denom = pair.h0.density(y);
        if denom <= 0.0 {
            return Err(Error::Support { value: y });
        }
        let numer = pair.h1.density(y);
        log_ratio += numer.ln() - denom.ln();
    }
    Ok(log_ratio)
}

/// Threshold test on a likelihood ratio. Ties decide H1.
pub fn lrt_decide(ratio: f64, tau: f64) -> Result<Decision> {
    if tau <= 0.0 || tau.is_nan() {
        return Err(Error::Parameter {
            name: "tau",
            value: tau,
            constraint: "threshold must be strictly positive",
        });
    }
    if ratio < 0.0 || ratio.is_nan() {
        return Err(Error::Parameter {
            name: "ratio",
            value: ratio,
            constraint: "likelihood ratio must be nonnegative",
        });
    }
    Ok(if ratio >= tau {
        Decision::H1
    } else {
        Decision::H0
    })
}

/// Closed-form Gaussian accountability at detectability index `d` and
/// reputation ratio `tau`:
///
/// `P_A = 1 - Q(d/2 + ln(tau)/d)` and `P_U = Q(d/2 - ln(tau)/d)`.
///
/// Both probabilities are nondecreasing in `tau`: a worse reputation makes
/// the investigator more willing to hold the supplier accountable, rightly
/// or wrongly. At `d = 0` the hypotheses coincide; only `tau = 1` remains
/// meaningful and the test degenerates to a fair coin.
pub fn accountability_gaussian(d: f64, tau: f64) -> Result<TestOutcome> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::Parameter {
            name: "tau",
            value: tau,
            constraint: "threshold must be positive and finite",
        });
    }
    if d < 0.0 || !d.is_finite() {
        return Err(Error::Parameter {
            name: "d",
            value: d,
            constraint: "detectability index must be nonnegative",
        });
    }
    if d == 0.0 {
        if tau == 1.0 {
            return TestOutcome::new(0.5, 0.5, tau);
        }
        return Err(Error::Degenerate(
            "accountability is undefined at d = 0 unless tau = 1".into(),
        ));
    }
    let shift = tau.ln() / d;
    // Phi keeps full relative precision in both tails; 1 - Q would not.
    let p_a = gaussian_cdf(d / 2.0 + shift);
    let p_u = gaussian_cdf(shift - d / 2.0);
    TestOutcome::new(p_a, p_u, tau)
}

/// Design the Neyman-Pearson test for Bernoulli trials: hold the supplier
/// accountable when the success count `S` falls strictly below the
/// `alpha`-quantile of `Binomial(N, mu0)`.
pub fn np_binomial_test(mu0: f64, cfg: &NpConfig) -> Result<NpTestDesign> {
    if !(mu0 > 0.0 && mu0 < 1.0) {
        return Err(Error::Parameter {
            name: "mu0",
            value: mu0,
            constraint: "null success probability must lie strictly inside (0, 1)",
        });
    }
    let threshold = binomial_quantile(cfg.n_trials, mu0, cfg.false_alarm_bound)?;
    let achieved_false_alarm = binomial_cdf(cfg.n_trials, threshold as i64 - 1, mu0)?;
    Ok(NpTestDesign {
        threshold,
        achieved_false_alarm,
    })
}

/// Apply the Neyman-Pearson decision: accountable iff `S < threshold`.
pub fn np_binomial_decide(success_count: u64, design: &NpTestDesign) -> bool {
    success_count < design.threshold
}

fn require_finite_models(models: &[ObservationModel]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if models.len() < 2 {
        return Err(Error::Parameter {
            name: "models",
            value: models.len() as f64,
            constraint: "need at least two hypotheses",
        });
    }
    models
        .iter()
        .map(|m| {
            m.validate()?;
            match (m.finite_support(), m.finite_masses()) {
                (Some(s), Some(p)) => Ok((s, p)),
                _ => Err(Error::UnsupportedModel(
                    "M-ary decisions need Bernoulli or finite-discrete models",
                )),
            }
        })
        .collect()
}

/// MAP decision over `M` hypotheses given a batch of observations:
/// `argmax_t prior(t) * prod_j f(y_j | H_t)`, ties to the smallest index.
///
/// All hypotheses must share one finite observation alphabet, every batch
/// value must belong to it, and at least one hypothesis must give the batch
/// positive posterior mass.
pub fn map_decide_mary(
    models: &[ObservationModel],
    prior: &Reputation,
    batch: &SampleBatch,
) -> Result<usize> {
    let finite = require_finite_models(models)?;
    if prior.len() != models.len() {
        return Err(Error::Parameter {
            name: "prior",
            value: prior.len() as f64,
            constraint: "prior length must match the number of hypotheses",
        });
    }
    let alphabet = &finite[0].0;
    if finite.iter().any(|(s, _)| s != alphabet) {
        return Err(Error::MismatchedSpaces(
            "all hypotheses must share one observation alphabet".into(),
        ));
    }
    if let Some(&bad) = batch.values().iter().find(|y| !alphabet.contains(y)) {
        return Err(Error::Support { value: bad });
    }
    let mut best: Option<(usize, f64)> = None;
    for (t, ((support, masses), &pi)) in finite.iter().zip(prior.prior()).enumerate() {
        let mut score = if pi > 0.0 { pi.ln() } else { f64::NEG_INFINITY };
        for &y in batch.values() {
            let mass = support
                .iter()
                .position(|&v| v == y)
                .map_or(0.0, |i| masses[i]);
            score += if mass > 0.0 {
                mass.ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        if score > f64::NEG_INFINITY && best.is_none_or(|(_, b)| score > b) {
            best = Some((t, score));
        }
    }
    // Impossible under every hypothesis with positive prior mass.
    best.map(|(t, _)| t).ok_or(Error::Support {
        value: batch.values()[0],
    })
}

/// Exact error probability of the MAP decision over `k` i.i.d. observations:
/// `P_e = sum_t Pr[decide != t | H_t] * prior(t)`, enumerated over every
/// observation tuple of a shared finite alphabet.
pub fn mary_error_prob(models: &[ObservationModel], prior: &Reputation, k: usize) -> Result<f64> {
    let finite = require_finite_models(models)?;
    if prior.len() != models.len() {
        return Err(Error::Parameter {
            name: "prior",
            value: prior.len() as f64,
            constraint: "prior length must match the number of hypotheses",
        });
    }
    if k == 0 {
        return Err(Error::EmptyBatch);
    }
    let alphabet = &finite[0].0;
    if finite.iter().any(|(s, _)| s != alphabet) {
        return Err(Error::MismatchedSpaces(
            "all hypotheses must share one observation alphabet".into(),
        ));
    }
    let tuples = (alphabet.len() as u128).pow(k as u32);
    if tuples > ENUMERATION_CAP as u128 {
        return Err(Error::EnumerationCap {
            tuples,
            cap: ENUMERATION_CAP,
        });
    }

    let priors = prior.prior();
    let mut p_error = 0.0;
    let mut symbol_idx = vec![0usize; k];
    loop {
        // Likelihood of this tuple under each hypothesis.
        let likelihoods: Vec<f64> = finite
            .iter()
            .map(|(_, masses)| symbol_idx.iter().map(|&i| masses[i]).product::<f64>())
            .collect();
        // MAP decision with ties to the smallest index.
        let mut decide = 0usize;
        let mut best = f64::NEG_INFINITY;
        for (t, &like) in likelihoods.iter().enumerate() {
            let weighted = priors[t] * like;
            if weighted > best {
                best = weighted;
                decide = t;
            }
        }
        for (t, &like) in likelihoods.iter().enumerate() {
            if t != decide {
                p_error += priors[t] * like;
            }
        }
        // Advance the odometer.
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(p_error.clamp(0.0, 1.0));
            }
            pos -= 1;
            symbol_idx[pos] += 1;
            if symbol_idx[pos] < alphabet.len() {
                break;
            }
            symbol_idx[pos] = 0;
        }
    }
}

/// Decentralized fusion: the fused hypothesis index is the decimal encoding
/// of the per-supplier accountability bits.
pub fn decentralized_fuse(bits: &HypothesisVector) -> u64 {
    bits.index()
}

/// Closed-form Bernoulli likelihood ratio
/// `((1-mu1)/(1-mu0))^N * (mu1(1-mu0) / (mu0(1-mu1)))^S` for `f(.|H1)/f(.|H0)`.
/// Exposed for cross-checking the generic log-space path.
pub fn bernoulli_lr_closed_form(mu0: f64, mu1: f64, n: u64, successes: u64) -> f64 {
    let base = ((1.0 - mu1) / (1.0 - mu0)).powi(n as i32);
    let odds = (mu1 * (1.0 - mu0)) / (mu0 * (1.0 - mu1));
    base * odds.powi(successes as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample;

    fn gaussian(mean: f64, var: f64) -> ObservationModel {
        ObservationModel::gaussian(mean, var).unwrap()
    }

    #[test]
    fn identical_models_give_unit_ratio() {
        let pair = HypothesisPair::new(gaussian(1.0, 2.0), gaussian(1.0, 2.0)).unwrap();
        let batch = SampleBatch::new(vec![0.3, -2.0, 5.5], 0).unwrap();
        assert!((likelihood_ratio(&pair, &batch).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_sample_balances_gaussian_pair() {
        let pair = HypothesisPair::new(gaussian(0.0, 1.0), gaussian(1.0, 1.0)).unwrap();
        let batch = SampleBatch::new(vec![0.5], 0).unwrap();
        assert!((likelihood_ratio(&pair, &batch).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_ratio_matches_closed_form() {
        let (mu0, mu1) = (0.9, 0.6);
        let pair = HypothesisPair::new(
            ObservationModel::bernoulli(mu0).unwrap(),
            ObservationModel::bernoulli(mu1).unwrap(),
        )
        .unwrap();
        let values = vec![1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let successes = values.iter().filter(|&&v| v == 1.0).count() as u64;
        let batch = SampleBatch::new(values, 0).unwrap();
        let generic = likelihood_ratio(&pair, &batch).unwrap();
        let closed = bernoulli_lr_closed_form(mu0, mu1, 10, successes);
        assert!((generic / closed - 1.0).abs() < 1e-12);
        // Frozen from direct evaluation of the closed form.
        assert!((closed - 3.745_770_461_819_842_6).abs() < 1e-10);
    }

    #[test]
    fn log_space_matches_direct_product_on_long_batches() {
        let pair = HypothesisPair::new(gaussian(0.0, 4.0), gaussian(1.5, 4.0)).unwrap();
        let batch = sample(pair.h1(), 100, 99).unwrap();
        let log_ratio = log_likelihood_ratio(&pair, &batch).unwrap();
        let direct: f64 = batch
            .values()
            .iter()
            .map(|&y| pair.h1().density(y) / pair.h0().density(y))
            .product();
        assert!(
            (log_ratio.exp() / direct - 1.0).abs() < 1e-9,
            "log-space {} vs direct {direct}",
            log_ratio.exp()
        );
    }

    #[test]
    fn support_error_on_zero_null_density() {
        let pair = HypothesisPair::new(
            ObservationModel::bernoulli(0.5).unwrap(),
            ObservationModel::bernoulli(0.7).unwrap(),
        )
        .unwrap();
        let batch = SampleBatch::new(vec![0.25], 0).unwrap();
        assert!(matches!(
            likelihood_ratio(&pair, &batch),
            Err(Error::Support { .. })
        ));
    }

    #[test]
    fn mismatched_spaces_rejected() {
        assert!(
            HypothesisPair::new(
                gaussian(0.0, 1.0),
                ObservationModel::bernoulli(0.5).unwrap()
            )
            .is_err()
        );
        assert!(
            HypothesisPair::new(
                ObservationModel::discrete(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap(),
                ObservationModel::discrete(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap(),
            )
            .is_err()
        );
    }

    #[test]
    fn lrt_decision_rule_and_tie_break() {
        assert_eq!(lrt_decide(2.0, 1.0).unwrap(), Decision::H1);
        assert_eq!(lrt_decide(0.5, 1.0).unwrap(), Decision::H0);
        assert_eq!(lrt_decide(1.0, 1.0).unwrap(), Decision::H1);
        assert!(lrt_decide(1.0, 0.0).is_err());
        assert!(lrt_decide(-0.5, 1.0).is_err());
    }

    #[test]
    fn gaussian_accountability_frozen_values() {
        // d = sqrt(30), tau = 1; frozen from independent CDF evaluation.
        let out = accountability_gaussian(30.0_f64.sqrt(), 1.0).unwrap();
        assert!((out.accountability - 0.996_915_050_339_727_9).abs() < 1e-12);
        assert!((out.wronged - 0.003_084_949_660_272_083_6).abs() < 1e-12);

        let out = accountability_gaussian(2.0, 1.0).unwrap();
        assert!((out.accountability - 0.841_344_746_068_542_9).abs() < 1e-12);
    }

    #[test]
    fn tau_one_is_symmetric_for_any_d() {
        for &d in &[0.3, 1.0, 2.0, 5.0, 9.0] {
            let out = accountability_gaussian(d, 1.0).unwrap();
            assert!((out.accountability + out.wronged - 1.0).abs() < 1e-12);
            let q = crate::stats::gaussian_q(d / 2.0);
            assert!((out.accountability - (1.0 - q)).abs() < 1e-12);
        }
    }

    #[test]
    fn accountability_monotone_in_tau_and_d() {
        let taus = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];
        let mut prev: Option<TestOutcome> = None;
        for &tau in &taus {
            let out = accountability_gaussian(2.0, tau).unwrap();
            if let Some(p) = prev {
                assert!(out.accountability >= p.accountability);
                assert!(out.wronged >= p.wronged);
            }
            prev = Some(out);
        }
        // At tau = 1, P_A strictly increases and P_U strictly decreases in d.
        let mut prev_pa = 0.0;
        let mut prev_pu = 1.0;
        for d in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let out = accountability_gaussian(d, 1.0).unwrap();
            assert!(out.accountability > prev_pa);
            assert!(out.wronged < prev_pu);
            prev_pa = out.accountability;
            prev_pu = out.wronged;
        }
    }

    #[test]
    fn degenerate_index_rules() {
        assert!(accountability_gaussian(0.0, 2.0).is_err());
        let coin = accountability_gaussian(0.0, 1.0).unwrap();
        assert_eq!((coin.accountability, coin.wronged), (0.5, 0.5));
        assert!(accountability_gaussian(-1.0, 1.0).is_err());
    }

    #[test]
    fn np_binomial_design_matches_enumeration() {
        // Frozen from exact Binomial(20, 0.9) enumeration: F(15) ~ 0.0432 < 0.05 <= F(16).
        let cfg = NpConfig::new(0.05, 20).unwrap();
        let design = np_binomial_test(0.9, &cfg).unwrap();
        assert_eq!(design.threshold, 16);
        assert!((design.achieved_false_alarm - 0.043_174_495_284_463_34).abs() < 1e-12);
        assert!(design.achieved_false_alarm <= 0.05);
        assert!(np_binomial_decide(12, &design));
        assert!(!np_binomial_decide(16, &design));
    }

    #[test]
    fn np_quantile_saturates_at_n() {
        let cfg = NpConfig::new(0.999, 20).unwrap();
        let design = np_binomial_test(0.9, &cfg).unwrap();
        assert_eq!(design.threshold, 20);
    }

    #[test]
    fn np_is_most_powerful_over_threshold_sweep() {
        // Desk check of the Neyman-Pearson lemma on the sufficient statistic:
        // among all rules "S < t", the quantile threshold maximizes detection
        // subject to the false-alarm bound.
        let (n, mu0, alpha) = (25u64, 0.9, 0.05);
        let cfg = NpConfig::new(alpha, n).unwrap();
        let design = np_binomial_test(mu0, &cfg).unwrap();
        for mu1 in [0.4, 0.55, 0.7] {
            let mut best_detection = -1.0;
            let mut best_t = 0;
            for t in 0..=(n + 1) {
                let fa = binomial_cdf(n, t as i64 - 1, mu0).unwrap();
                let det = binomial_cdf(n, t as i64 - 1, mu1).unwrap();
                if fa <= alpha && det > best_detection {
                    best_detection = det;
                    best_t = t;
                }
            }
            assert_eq!(design.threshold, best_t, "sweep disagrees at mu1 = {mu1}");
        }
    }

    #[test]
    fn map_reduces_to_lrt_under_uniform_prior() {
        let m0 = ObservationModel::bernoulli(0.9).unwrap();
        let m1 = ObservationModel::bernoulli(0.4).unwrap();
        let prior = Reputation::binary(0.5, 0.5).unwrap();
        let pair = HypothesisPair::new(m0.clone(), m1.clone()).unwrap();
        for seed in 0..20 {
            let batch = sample(&m1, 6, seed).unwrap();
            let map = map_decide_mary(&[m0.clone(), m1.clone()], &prior, &batch).unwrap();
            let lrt = lrt_decide(likelihood_ratio(&pair, &batch).unwrap(), 1.0).unwrap();
            let expected = match lrt {
                Decision::H0 => 0,
                Decision::H1 => 1,
            };
            assert_eq!(map, expected, "seed {seed}");
        }
    }

    #[test]
    fn map_prior_domination() {
        let models = vec![
            ObservationModel::bernoulli(0.2).unwrap(),
            ObservationModel::bernoulli(0.5).unwrap(),
            ObservationModel::bernoulli(0.8).unwrap(),
        ];
        let prior = Reputation::new(vec![0.0, 1.0, 0.0]).unwrap();
        let batch = SampleBatch::new(vec![1.0, 1.0, 1.0, 1.0], 0).unwrap();
        assert_eq!(map_decide_mary(&models, &prior, &batch).unwrap(), 1);
    }

    #[test]
    fn map_rejects_out_of_alphabet_and_impossible_batches() {
        let models = vec![
            ObservationModel::bernoulli(0.3).unwrap(),
            ObservationModel::bernoulli(0.7).unwrap(),
        ];
        let prior = Reputation::binary(0.5, 0.5).unwrap();
        let outside = SampleBatch::new(vec![0.25], 0).unwrap();
        assert!(matches!(
            map_decide_mary(&models, &prior, &outside),
            Err(Error::Support { .. })
        ));

        // A symbol both hypotheses assign zero mass cannot be decided.
        let values = vec![0.0, 1.0];
        let degenerate = vec![
            ObservationModel::discrete(values.clone(), vec![1.0, 0.0]).unwrap(),
            ObservationModel::discrete(values, vec![1.0, 0.0]).unwrap(),
        ];
        let impossible = SampleBatch::new(vec![1.0], 0).unwrap();
        assert!(matches!(
            map_decide_mary(&degenerate, &prior, &impossible),
            Err(Error::Support { .. })
        ));

        // Mismatched alphabets are rejected up front.
        let mixed = vec![
            ObservationModel::discrete(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap(),
            ObservationModel::discrete(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap(),
        ];
        let batch = SampleBatch::new(vec![0.0], 0).unwrap();
        assert!(matches!(
            map_decide_mary(&mixed, &prior, &batch),
            Err(Error::MismatchedSpaces(_))
        ));
    }

    #[test]
    fn map_matches_brute_force_posterior_on_four_symbol_alphabet() {
        let values = vec![0.0, 1.0, 2.0, 3.0];
        let models = vec![
            ObservationModel::discrete(values.clone(), vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
            ObservationModel::discrete(values.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            ObservationModel::discrete(values.clone(), vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
        ];
        let prior = Reputation::new(vec![0.5, 0.3, 0.2]).unwrap();
        for seed in 0..10 {
            let batch = sample(&models[1], 4, seed).unwrap();
            // Brute-force posterior: direct product, no logs.
            let mut best = (0usize, -1.0);
            for (t, m) in models.iter().enumerate() {
                let like: f64 = batch.values().iter().map(|&y| m.density(y)).product();
                let post = prior.prior()[t] * like;
                if post > best.1 {
                    best = (t, post);
                }
            }
            assert_eq!(
                map_decide_mary(&models, &prior, &batch).unwrap(),
                best.0,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn mary_error_identical_models_is_prior_complement() {
        let m = ObservationModel::bernoulli(0.7).unwrap();
        let prior = Reputation::new(vec![0.2, 0.5, 0.3]).unwrap();
        let pe = mary_error_prob(&[m.clone(), m.clone(), m.clone()], &prior, 1).unwrap();
        assert!((pe - 0.5).abs() < 1e-12, "P_e = {pe}");
    }

    #[test]
    fn mary_error_disjoint_supports_is_zero() {
        let values = vec![0.0, 1.0, 2.0, 3.0];
        let models = vec![
            ObservationModel::discrete(values.clone(), vec![0.5, 0.5, 0.0, 0.0]).unwrap(),
            ObservationModel::discrete(values.clone(), vec![0.0, 0.0, 0.5, 0.5]).unwrap(),
        ];
        let prior = Reputation::binary(0.3, 0.7).unwrap();
        let pe = mary_error_prob(&models, &prior, 2).unwrap();
        assert!(pe.abs() < 1e-15);
    }

    #[test]
    fn mary_error_matches_eight_outcome_brute_force() {
        // Two Bernoulli hypotheses, three trials: all 2^3 outcomes by hand.
        let (mu0, mu1) = (0.9, 0.6);
        let models = vec![
            ObservationModel::bernoulli(mu0).unwrap(),
            ObservationModel::bernoulli(mu1).unwrap(),
        ];
        let prior = Reputation::binary(0.5, 0.5).unwrap();
        let mut expected = 0.0;
        for outcome in 0u32..8 {
            let ys: Vec<f64> = (0..3).map(|i| ((outcome >> i) & 1) as f64).collect();
            let like = |mu: f64| -> f64 {
                ys.iter()
                    .map(|&y| if y == 1.0 { mu } else { 1.0 - mu })
                    .product()
            };
            let (l0, l1) = (like(mu0), like(mu1));
            let decide = if 0.5 * l0 >= 0.5 * l1 { 0 } else { 1 };
            if decide != 0 {
                expected += 0.5 * l0;
            }
            if decide != 1 {
                expected += 0.5 * l1;
            }
        }
        let got = mary_error_prob(&models, &prior, 3).unwrap();
        assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
        // Frozen from the same enumeration run independently.
        assert!((got - 0.243_5).abs() < 1e-12);
    }

    #[test]
    fn mary_error_respects_enumeration_cap() {
        let values: Vec<f64> = (0..10).map(f64::from).collect();
        let probs = vec![0.1; 10];
        let models = vec![
            ObservationModel::discrete(values.clone(), probs.clone()).unwrap(),
            ObservationModel::discrete(values, probs).unwrap(),
        ];
        let prior = Reputation::binary(0.5, 0.5).unwrap();
        assert!(matches!(
            mary_error_prob(&models, &prior, 7),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn hypothesis_vector_encoding_follows_msb_first_convention() {
        let rows = [
            (vec![0, 0], 0),
            (vec![0, 1], 1),
            (vec![1, 0], 2),
            (vec![1, 1], 3),
            (vec![1, 0, 1], 5),
        ];
        for (bits, index) in rows {
            let hv = HypothesisVector::new(bits.clone()).unwrap();
            assert_eq!(hv.index(), index, "bits {bits:?}");
            assert_eq!(decentralized_fuse(&hv), index);
            assert_eq!(HypothesisVector::from_index(index, bits.len()).unwrap(), hv);
        }
        assert!(HypothesisVector::new(vec![0, 2]).is_err());
        assert!(HypothesisVector::new(vec![]).is_err());
    }

    #[test]
    fn pmf_table_used_by_design_sums_to_one() {
        let pmf = crate::stats::binomial_pmf_table(40, 0.35).unwrap();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
