//! Replication summaries: means with Student-t intervals, Welch tests and
//! population scaling.

pub mod special;

use serde::{Deserialize, Serialize};

pub use special::{inc_beta, ln_gamma, student_t_cdf, student_t_quantile, student_t_two_sided};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence_level: f64,
}

impl SampleSummary {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    /// Multiplies every location and spread statistic by `factor`.
    pub fn scaled(&self, factor: f64) -> SampleSummary {
        let (a, b) = (self.ci_low * factor, self.ci_high * factor);
        SampleSummary {
            mean: self.mean * factor,
            sd: self.sd * factor.abs(),
            ci_low: a.min(b),
            ci_high: a.max(b),
            ..*self
        }
    }
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Mean with a two-sided Student-t confidence interval at `level`.
pub fn mean_ci(samples: &[f64], level: f64) -> Result<SampleSummary> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::domain(format!("a confidence interval needs at least 2 samples, got {n}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let (mean, var) = mean_and_var(samples);
    let sd = var.sqrt();
    let q = student_t_quantile(0.5 * (1.0 + level), (n - 1) as f64);
    let half = q * sd / (n as f64).sqrt();
    Ok(SampleSummary {
        n,
        mean,
        sd,
        ci_low: mean - half,
        ci_high: mean + half,
        confidence_level: level,
    })
}

/// Two-sided Welch unequal-variance t-test p-value.
///
/// Two constant samples with the same value give `p = 1`; constant samples
/// with different values have no defined test statistic.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::domain("Welch test needs at least 2 samples per group"));
    }
    let (ma, va) = mean_and_var(a);
    let (mb, vb) = mean_and_var(b);
    let sa = va / a.len() as f64;
    let sb = vb / b.len() as f64;
    let se2 = sa + sb;
    if se2 == 0.0 {
        return if ma == mb {
            Ok(1.0)
        } else {
            Err(Error::domain("both samples are constant with different values"))
        };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() - 1) as f64 + sb * sb / (b.len() - 1) as f64);
    Ok(student_t_two_sided(t, df))
}

/// Multiplies every value by `scale_factor` (sample to national scale).
pub fn scale_results(series: &[f64], scale_factor: f64) -> Result<Vec<f64>> {
    if !(scale_factor > 0.0 && scale_factor.is_finite()) {
        return Err(Error::domain(format!("scale factor must be positive, got {scale_factor}")));
    }
    Ok(series.iter().map(|x| x * scale_factor).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_sample_has_zero_width() {
        let s = mean_ci(&[5.0, 5.0, 5.0, 5.0], 0.95).unwrap();
        assert_eq!((s.mean, s.ci_low, s.ci_high), (5.0, 5.0, 5.0));
    }

    #[test]
    fn three_point_interval() {
        let s = mean_ci(&[1.0, 2.0, 3.0], 0.95).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_abs_diff_eq!(s.sd, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.ci_low, -0.484_138, epsilon = 1e-5);
        assert_abs_diff_eq!(s.ci_high, 4.484_138, epsilon = 1e-5);
    }

    #[test]
    fn mean_ci_domain() {
        assert!(mean_ci(&[1.0], 0.95).is_err());
        assert!(mean_ci(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn welch_examples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [11.0, 12.0, 13.0, 14.0, 15.0];
        assert_abs_diff_eq!(welch_t_test(&a, &a).unwrap(), 1.0, epsilon = 1e-15);
        let p = welch_t_test(&a, &b).unwrap();
        assert!(p < 0.001);
        assert_eq!(p, welch_t_test(&b, &a).unwrap());
        assert_eq!(welch_t_test(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), 1.0);
        assert!(welch_t_test(&[2.0, 2.0], &[3.0, 3.0]).is_err());
        assert!(welch_t_test(&[2.0], &[3.0, 3.0]).is_err());
    }

    #[test]
    fn scaling() {
        assert_eq!(scale_results(&[600.0], 100.0).unwrap(), vec![60_000.0]);
        assert_eq!(scale_results(&[1.7e6], 100.0).unwrap(), vec![1.7e8]);
        assert_eq!(scale_results(&[3.25, -1.0], 1.0).unwrap(), vec![3.25, -1.0]);
        assert!(scale_results(&[1.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn scaling_commutes_with_summary(xs in prop::collection::vec(-1e3f64..1e3, 2..40), c in 0.01f64..1e3) {
            let direct = mean_ci(&scale_results(&xs, c).unwrap(), 0.95).unwrap();
            let after = mean_ci(&xs, 0.95).unwrap().scaled(c);
            let tol = 1e-9 * (1.0 + direct.mean.abs() + direct.sd);
            prop_assert!((direct.mean - after.mean).abs() <= tol);
            prop_assert!((direct.ci_low - after.ci_low).abs() <= tol);
            prop_assert!((direct.ci_high - after.ci_high).abs() <= tol);
        }

        #[test]
        fn interval_contains_mean(xs in prop::collection::vec(-1e3f64..1e3, 2..40)) {
            let s = mean_ci(&xs, 0.9).unwrap();
            prop_assert!(s.ci_low <= s.mean && s.mean <= s.ci_high);
        }
    }
}
