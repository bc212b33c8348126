//! Scalar statistics kernels: Gaussian tail functions, exact binomial
//! distribution, and a one-sample Kolmogorov-Smirnov test.

use crate::error::{Error, Result};

/// Standard normal density.
pub fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Gaussian Q function, `Q(x) = Pr[Z > x]`, via the complementary error
/// function: `Q(x) = erfc(x / sqrt(2)) / 2`.
///
/// Relative accuracy follows `erfc` (about 1 ulp), which keeps deep tail
/// values meaningful; absolute accuracy is well below 1e-12 on |x| <= 8.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal CDF, `Phi(x) = 1 - Q(x)`, evaluated as `Q(-x)` so that
/// both tails keep full relative precision.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of the Gaussian Q function on (0, 1).
///
/// Bisection brackets the root, then Newton steps polish it; the iteration
/// stops when `|Q(x) - p|` is below 1e-15 relative or the step stalls.
pub fn gaussian_q_inv(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p == 0.0 || p == 1.0 || p.is_nan() {
        return Err(Error::Parameter {
            name: "p",
            value: p,
            constraint: "must lie strictly inside (0, 1)",
        });
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gaussian_q(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let err = gaussian_q(x) - p;
        let step = err / gaussian_pdf(x);
        if !step.is_finite() {
            break;
        }
        x += step;
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    Ok(x)
}

/// Probability mass of `Binomial(n, p)` at every point `0..=n`.
///
/// Uses the multiplicative recurrence from `(1-p)^n`, which is exact enough
/// for the test sizes used here (n well below 10^4).
pub fn binomial_pmf_table(n: u64, p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter {
            name: "p",
            value: p,
            constraint: "must lie in [0, 1]",
        });
    }
    let n_us = usize::try_from(n).expect("trial count fits in usize");
    let mut pmf = vec![0.0; n_us + 1];
    if p == 1.0 {
        pmf[n_us] = 1.0;
        return Ok(pmf);
    }
    let q = 1.0 - p;
    pmf[0] = q.powi(n_us as i32);
    let ratio = p / q;
    for k in 0..n_us {
        pmf[k + 1] = pmf[k] * ratio * ((n - k as u64) as f64) / ((k + 1) as f64);
    }
    Ok(pmf)
}

/// CDF of `Binomial(n, p)` at integer `x`; `F(x) = Pr[S <= x]`.
pub fn binomial_cdf(n: u64, x: i64, p: f64) -> Result<f64> {
    if x < 0 {
        return Ok(0.0);
    }
    let pmf = binomial_pmf_table(n, p)?;
    let upto = (x as u64).min(n) as usize;
    Ok(pmf[..=upto].iter().sum::<f64>().min(1.0))
}

/// Lower quantile of `Binomial(n, p)`: the smallest integer `x` with
/// `F(x) >= alpha`.
pub fn binomial_quantile(n: u64, p: f64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter {
            name: "alpha",
            value: alpha,
            constraint: "must lie in (0, 1]",
        });
    }
    let pmf = binomial_pmf_table(n, p)?;
    let mut acc = 0.0;
    for (k, mass) in pmf.iter().enumerate() {
        acc += mass;
        if acc >= alpha {
            return Ok(k as u64);
        }
    }
    Ok(n)
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    Ok(d)
}

/// Asymptotic two-sided KS p-value for statistic `d` at sample size `n`,
/// from the Kolmogorov series `2 * sum (-1)^(k-1) exp(-2 k^2 t^2)` with
/// `t = sqrt(n) * d`.
pub fn ks_p_value(n: usize, d: f64) -> f64 {
    let t = (n as f64).sqrt() * d;
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: Phi via Simpson quadrature of the normal density.
    /// Kept free of erfc so the two routes stay separate.
    pub(crate) fn phi_quadrature(x: f64) -> f64 {
        let steps = 20_000;
        let (a, b) = (0.0, x.abs());
        let h = (b - a) / steps as f64;
        let mut acc = gaussian_pdf(a) + gaussian_pdf(b);
        for i in 1..steps {
            let xi = a + i as f64 * h;
            acc += gaussian_pdf(xi) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let half = acc * h / 3.0;
        if x >= 0.0 { 0.5 + half } else { 0.5 - half }
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(gaussian_q(0.0), 0.5);
        assert_eq!(gaussian_cdf(0.0), 0.5);
    }

    #[test]
    fn q_matches_quadrature_oracle() {
        for &x in &[0.25, 0.5, 1.0, 2.0, 2.738_612_787_525_831, 5.0, 8.0] {
            let oracle = 1.0 - phi_quadrature(x);
            assert!(
                (gaussian_q(x) - oracle).abs() < 1e-12,
                "Q({x}) = {} vs oracle {oracle}",
                gaussian_q(x)
            );
        }
    }

    #[test]
    fn q_known_values() {
        // Frozen from independent high-precision evaluation.
        assert!((gaussian_q(1.0) - 0.158_655_253_931_457_07).abs() < 1e-15);
        assert!((gaussian_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
    }

    #[test]
    fn q_inv_round_trips() {
        for &p in &[1e-12, 1e-6, 0.01, 0.1, 0.5, 0.9, 0.999_999] {
            let x = gaussian_q_inv(p).unwrap();
            assert!(
                (gaussian_q(x) - p).abs() <= 1e-12 * p.max(1e-3),
                "round trip failed at p = {p}"
            );
        }
        assert!((gaussian_q_inv(0.1).unwrap() - 1.281_551_565_544_600_4).abs() < 1e-9);
    }

    #[test]
    fn q_inv_rejects_boundary() {
        assert!(gaussian_q_inv(0.0).is_err());
        assert!(gaussian_q_inv(1.0).is_err());
        assert!(gaussian_q_inv(-0.1).is_err());
    }

    #[test]
    fn binomial_cdf_matches_enumeration() {
        // Frozen from exact rational enumeration of Binomial(20, 0.9).
        let cases = [
            (15, 0.043_174_495_284_463_34),
            (16, 0.132_953_323_434_335),
            (17, 0.323_073_194_810_533_87),
        ];
        for (x, expected) in cases {
            let got = binomial_cdf(20, x, 0.9).unwrap();
            assert!((got - expected).abs() < 1e-12, "F({x}) = {got}");
        }
        assert_eq!(binomial_cdf(20, -1, 0.9).unwrap(), 0.0);
        assert!((binomial_cdf(20, 20, 0.9).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_quantile_is_smallest_crossing() {
        assert_eq!(binomial_quantile(20, 0.9, 0.05).unwrap(), 16);
        assert_eq!(binomial_quantile(20, 0.9, 0.9999).unwrap(), 20);
        assert_eq!(binomial_quantile(10, 0.0, 0.5).unwrap(), 0);
    }

    #[test]
    fn binomial_degenerate_p() {
        let pmf = binomial_pmf_table(5, 1.0).unwrap();
        assert_eq!(pmf[5], 1.0);
        assert_eq!(pmf[..5].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn ks_detects_gross_mismatch_and_accepts_exact_fit() {
        // Uniform grid against the uniform CDF: D_n = 1/(2n) after centring.
        let samples: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.005 + 1e-12);
        assert!(ks_p_value(100, d) > 0.99);

        // Same grid against a badly shifted CDF.
        let d_bad = ks_statistic(&samples, |x| (x - 0.4).clamp(0.0, 1.0)).unwrap();
        assert!(ks_p_value(100, d_bad) < 0.01);
    }

    #[test]
    fn ks_critical_value_at_one_percent() {
        // sqrt(n) * D at the 1% level is about 1.6276.
        assert!(ks_p_value(10_000, 1.6276 / 100.0) > 0.0099);
        assert!(ks_p_value(10_000, 1.63 / 100.0) < 0.0101);
    }
}
