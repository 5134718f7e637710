//! Fitting of derived parameters from summary statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ByPhase, HazardRate, Phase, TransitionParams};

const BISECTION_TOLERANCE: f64 = 1e-9;
const BISECTION_MAX_ITER: usize = 200;

/// Annual death hazard implied by a 5-year survival fraction, `-ln(s5) / 5`.
pub fn lambda_from_survival(s5: f64) -> Result<HazardRate> {
    if !(s5 > 0.0 && s5 <= 1.0) {
        return Err(Error::domain(format!("5-year survival must lie in (0, 1], got {s5}")));
    }
    HazardRate::per_year(-s5.ln() / 5.0)
}

/// Probability of having healed within `horizon` cycles when the per-cycle
/// healing probability in cycle `t` is `k (1 - exp(-lambda t))`, `t = 1..=horizon`.
pub fn cumulative_healing(lambda: f64, k: f64, horizon: u32) -> f64 {
    let log_stay: f64 = (1..=horizon)
        .map(|t| {
            let p = k * -(-lambda * f64::from(t)).exp_m1();
            (-p).ln_1p()
        })
        .sum();
    -log_stay.exp_m1()
}

/// Healing exponent (per cycle) whose cumulative healing over 260 cycles
/// equals `dfs5`.
pub fn fit_healing_lambda(dfs5: f64, k: f64) -> Result<HazardRate> {
    fit_healing_lambda_over(dfs5, k, 260)
}

/// Bisection on `lambda` so that `cumulative_healing(lambda, k, horizon)` hits
/// `target` within 1e-9.
pub fn fit_healing_lambda_over(target: f64, k: f64, horizon: u32) -> Result<HazardRate> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::domain(format!("DFS target must lie in [0, 1), got {target}")));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::domain(format!("healing ceiling k must lie in (0, 1], got {k}")));
    }
    if horizon == 0 {
        return Err(Error::domain("healing horizon must be positive"));
    }
    if target == 0.0 {
        return HazardRate::per_cycle(0.0);
    }
    let supremum = 1.0 - (1.0 - k).powf(f64::from(horizon));
    if target >= supremum {
        return Err(Error::Calibration(format!(
            "DFS target {target} is unreachable with k = {k} over {horizon} cycles (supremum {supremum})"
        )));
    }

    let residual = |lambda: f64| cumulative_healing(lambda, k, horizon) - target;
    let mut lo = 0.0;
    let mut hi = 1e-3;
    let mut expansions = 0;
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 1000 {
            return Err(Error::Calibration(format!("could not bracket healing rate for DFS {target}")));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= BISECTION_TOLERANCE {
            return HazardRate::per_cycle(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Calibration(format!(
        "healing-rate bisection for DFS {target} did not converge in {BISECTION_MAX_ITER} iterations"
    )))
}

/// Fills in the healing exponents of `params` from its DFS targets.
pub fn calibrate(mut params: TransitionParams) -> Result<TransitionParams> {
    params.validate()?;
    let fit = |phase: Phase| -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (slot, &dfs) in out.iter_mut().zip(params.dfs5[phase].iter()) {
            *slot = fit_healing_lambda_over(dfs, params.healing_k, params.healing_horizon_cycles)?.value();
        }
        Ok(out)
    };
    let lambdas = ByPhase::new(fit(Phase::Normal)?, fit(Phase::Lockdown)?);
    params.healing_lambda = Some(lambdas);
    Ok(params)
}

/// Yearly counts of women living with the disease.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceSeries {
    points: Vec<(i32, u64)>,
}

impl PrevalenceSeries {
    pub fn new(mut points: Vec<(i32, u64)>) -> Result<Self> {
        points.sort_by_key(|p| p.0);
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("prevalence series has duplicate years"));
        }
        Ok(PrevalenceSeries { points })
    }

    pub fn points(&self) -> &[(i32, u64)] {
        &self.points
    }
}

/// What the linear trend is regressed against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendAxis {
    /// Calendar year.
    #[default]
    Year,
    /// Observation order, as consecutive years ending at the last observed
    /// year. Gaps between observed years are ignored.
    Sequential,
}

/// Ordinary least-squares line through the series, evaluated at each target
/// year and rounded to the nearest integer.
pub fn project_prevalence(series: &PrevalenceSeries, target_years: &[i32], axis: TrendAxis) -> Result<Vec<i64>> {
    let pts = series.points();
    if pts.len() < 2 {
        return Err(Error::domain("trend fitting needs at least two points"));
    }
    let last = pts[pts.len() - 1].0;
    let n = pts.len();
    let xs: Vec<f64> = match axis {
        TrendAxis::Year => pts.iter().map(|p| f64::from(p.0)).collect(),
        TrendAxis::Sequential => (0..n).map(|i| f64::from(last) - (n - 1 - i) as f64).collect(),
    };
    let ys: Vec<f64> = pts.iter().map(|p| p.1 as f64).collect();
    let x_mean = xs.iter().sum::<f64>() / n as f64;
    let y_mean = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    Ok(target_years
        .iter()
        .map(|&year| (y_mean + slope * (f64::from(year) - x_mean)).round() as i64)
        .collect())
}

/// Mammography screening summary for one year.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningStats {
    pub mammograms_performed: u64,
    pub positivity_rate: f64,
    pub attendance_rate: f64,
    pub detected_cases: u64,
}

impl ScreeningStats {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("positivity_rate", self.positivity_rate), ("attendance_rate", self.attendance_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::domain(format!("{name} must lie in [0, 1], got {r}")));
            }
        }
        if self.detected_cases > self.mammograms_performed {
            return Err(Error::domain("detected cases exceed mammograms performed"));
        }
        Ok(())
    }
}

/// Expected positives among women who skip screening: the attending count
/// scaled up to the non-attending share, times the positivity rate.
pub fn estimate_undiagnosed(stats: &ScreeningStats) -> Result<u64> {
    stats.validate()?;
    let a = stats.attendance_rate;
    if a == 0.0 {
        return Err(Error::domain("attendance rate must be positive"));
    }
    let non_attending = stats.mammograms_performed as f64 / a * (1.0 - a);
    Ok((non_attending * stats.positivity_rate).round() as u64)
}

/// Annual probability that an existing case is diagnosed:
/// positives over positives, false negatives and missed screenings.
pub fn diagnosis_rate(l_pos: u64, l_fneg: u64, l_nm: u64) -> Result<f64> {
    let denom = l_pos + l_fneg + l_nm;
    if denom == 0 {
        return Err(Error::domain("diagnosis rate denominator is zero"));
    }
    Ok(l_pos as f64 / denom as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{defaults, rate_to_probability};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn survival_to_lambda() {
        assert_abs_diff_eq!(lambda_from_survival(0.44).unwrap().value(), 0.16420, epsilon = 1e-5);
        assert_abs_diff_eq!(lambda_from_survival(0.23).unwrap().value(), 0.29394, epsilon = 1e-5);
        assert_eq!(lambda_from_survival(1.0).unwrap().value(), 0.0);
        assert!(lambda_from_survival(0.0).is_err());
        assert!(lambda_from_survival(1.1).is_err());
    }

    #[test]
    fn survival_inverse() {
        for s in defaults::SURVIVAL5 {
            let l = lambda_from_survival(s).unwrap().value();
            assert_abs_diff_eq!(1.0 - rate_to_probability(l, 5.0).unwrap(), s, epsilon = 1e-12);
        }
    }

    /// Direct forward product, kept separate from `cumulative_healing`.
    fn forward_product(lambda: f64, k: f64, horizon: u32) -> f64 {
        let mut stay = 1.0;
        for t in 1..=horizon {
            stay *= 1.0 - k * (1.0 - (-lambda * t as f64).exp());
        }
        1.0 - stay
    }

    #[test]
    fn healing_fit_hits_target() {
        for dfs in defaults::DFS5_NORMAL.iter().chain(defaults::DFS5_LOCKDOWN.iter()) {
            let lambda = fit_healing_lambda(*dfs, 1.0 / 3.0).unwrap().value();
            assert!(lambda > 0.0);
            assert_abs_diff_eq!(forward_product(lambda, 1.0 / 3.0, 260), *dfs, epsilon = 1e-9);
        }
    }

    #[test]
    fn healing_fit_edge_cases() {
        assert_eq!(fit_healing_lambda(0.0, 0.2).unwrap().value(), 0.0);
        let a = fit_healing_lambda(0.52, 1.0 / 3.0).unwrap().value();
        let b = fit_healing_lambda(0.873, 1.0 / 3.0).unwrap().value();
        assert!(a < b);
        // (1 - 0.001)^260 = 0.7710..., so the supremum is about 0.229
        assert!(matches!(fit_healing_lambda(0.5, 0.001), Err(Error::Calibration(_))));
        assert!(fit_healing_lambda(1.0, 0.5).is_err());
        assert!(fit_healing_lambda(0.5, 0.0).is_err());
    }

    #[test]
    fn calibrate_fills_healing_rates() {
        let lt = crate::model::LifeTable::new([(25, 0.001)]).unwrap();
        let p = calibrate(defaults::transition_params(lt)).unwrap();
        let h = p.healing_lambda.unwrap();
        for i in 0..3 {
            assert!(h.normal[i] > h.normal[i + 1]);
            assert!(h.normal[i] > h.lockdown[i]);
        }
    }

    fn observed_prevalence() -> PrevalenceSeries {
        PrevalenceSeries::new(vec![
            (2010, 143_911),
            (2011, 151_831),
            (2012, 158_534),
            (2013, 166_031),
            (2014, 174_005),
            (2016, 227_784),
            (2017, 242_838),
        ])
        .unwrap()
    }

    #[test]
    fn prevalence_projection() {
        let s = observed_prevalence();
        let seq = project_prevalence(&s, &[2018, 2019], TrendAxis::Sequential).unwrap();
        assert_eq!(seq, vec![247_013, 263_590]);
        // Regressing on calendar year honours the 2015 gap.
        let yr = project_prevalence(&s, &[2018, 2019], TrendAxis::Year).unwrap();
        assert_eq!(yr, vec![249_260, 263_802]);
    }

    #[test]
    fn prevalence_trivial_lines() {
        let s = PrevalenceSeries::new(vec![(2010, 100), (2011, 200)]).unwrap();
        assert_eq!(project_prevalence(&s, &[2012], TrendAxis::Year).unwrap(), vec![300]);
        let s = PrevalenceSeries::new(vec![(2010, 100), (2011, 100)]).unwrap();
        assert_eq!(project_prevalence(&s, &[2020], TrendAxis::Year).unwrap(), vec![100]);
        let s = PrevalenceSeries::new(vec![(2010, 100)]).unwrap();
        assert!(project_prevalence(&s, &[2020], TrendAxis::Year).is_err());
    }

    proptest! {
        #[test]
        fn prevalence_invariant_to_point_order(seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut pts = observed_prevalence().points().to_vec();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            pts.shuffle(&mut rng);
            let s = PrevalenceSeries::new(pts).unwrap();
            for axis in [TrendAxis::Year, TrendAxis::Sequential] {
                prop_assert_eq!(
                    project_prevalence(&s, &[2018, 2019], axis).unwrap(),
                    project_prevalence(&observed_prevalence(), &[2018, 2019], axis).unwrap()
                );
            }
        }
    }

    #[test]
    fn undiagnosed_estimate() {
        // Attending positives equal to the 2019 prevalence (263,590 at 2%
        // positivity) scaled to the 29% who did not attend.
        let stats = ScreeningStats {
            mammograms_performed: 13_179_500,
            positivity_rate: 0.02,
            attendance_rate: 0.71,
            detected_cases: 263_590,
        };
        let est = estimate_undiagnosed(&stats).unwrap() as f64;
        assert!((est - 108_427.0).abs() / 108_427.0 < 0.01, "{est}");

        let full = ScreeningStats { attendance_rate: 1.0, ..stats };
        assert_eq!(estimate_undiagnosed(&full).unwrap(), 0);
        let none = ScreeningStats { positivity_rate: 0.0, ..stats };
        assert_eq!(estimate_undiagnosed(&none).unwrap(), 0);
        let zero = ScreeningStats { attendance_rate: 0.0, ..stats };
        assert!(estimate_undiagnosed(&zero).is_err());
    }

    #[test]
    fn diagnosis_rate_examples() {
        assert_abs_diff_eq!(diagnosis_rate(10, 10, 80).unwrap(), 0.10, epsilon = 1e-15);
        assert_eq!(diagnosis_rate(7, 0, 0).unwrap(), 1.0);
        assert!(diagnosis_rate(0, 0, 0).is_err());
    }

    #[test]
    fn lockdown_dfs_is_about_nineteen_percent_lower() {
        for (n, l) in defaults::DFS5_NORMAL.iter().zip(defaults::DFS5_LOCKDOWN) {
            assert!((0.81 * n - l).abs() <= 2.5e-3, "{n} -> {l}");
        }
    }
}
