use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Markov cycles in one simulated year (one cycle = one week).
pub const CYCLES_PER_YEAR: u32 = 52;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    PerYear,
    PerCycle,
}

/// A constant event rate together with the time unit it is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardRate {
    value: f64,
    unit: TimeUnit,
}

impl HazardRate {
    pub fn new(value: f64, unit: TimeUnit) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::domain(format!(
                "hazard rate must be finite and nonnegative, got {value}"
            )));
        }
        Ok(HazardRate { value, unit })
    }

    pub fn per_year(value: f64) -> Result<Self> {
        HazardRate::new(value, TimeUnit::PerYear)
    }

    pub fn per_cycle(value: f64) -> Result<Self> {
        HazardRate::new(value, TimeUnit::PerCycle)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn unit(&self) -> TimeUnit {
        self.unit
    }

    pub fn to_per_cycle(self) -> HazardRate {
        match self.unit {
            TimeUnit::PerCycle => self,
            TimeUnit::PerYear => HazardRate {
                value: self.value / f64::from(CYCLES_PER_YEAR),
                unit: TimeUnit::PerCycle,
            },
        }
    }

    pub fn to_per_year(self) -> HazardRate {
        match self.unit {
            TimeUnit::PerYear => self,
            TimeUnit::PerCycle => HazardRate {
                value: self.value * f64::from(CYCLES_PER_YEAR),
                unit: TimeUnit::PerYear,
            },
        }
    }

    /// Probability of at least one event within `t` units of this rate's time unit.
    pub fn probability_within(&self, t: f64) -> Result<f64> {
        rate_to_probability(self.value, t)
    }
}

/// Probability that an event occurring at constant `rate` happens within
/// time `t`: `1 - exp(-rate * t)`.
pub fn rate_to_probability(rate: f64, t: f64) -> Result<f64> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!("rate must be nonnegative, got {rate}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("duration must be nonnegative, got {t}")));
    }
    Ok(-(-rate * t).exp_m1())
}

/// Per-cycle probability equivalent to an annual probability when compounded
/// over [`CYCLES_PER_YEAR`] cycles.
pub fn annual_to_cycle_probability(p_annual: f64) -> Result<f64> {
    check_probability(p_annual, "annual probability")?;
    if p_annual == 1.0 {
        return Ok(1.0);
    }
    // 1 - (1-p)^(1/52), evaluated without cancellation for small p.
    Ok(-((-p_annual).ln_1p() / f64::from(CYCLES_PER_YEAR)).exp_m1())
}

pub(crate) fn check_probability(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must lie in [0, 1], got {p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn rate_to_probability_examples() {
        assert_abs_diff_eq!(rate_to_probability(0.1, 1.0).unwrap(), 0.095_162_58, epsilon = 1e-8);
        assert_eq!(rate_to_probability(0.0, 5.0).unwrap(), 0.0);
        // stage III five-year death probability: 1 - 0.44
        assert_abs_diff_eq!(rate_to_probability(0.1642, 5.0).unwrap(), 0.5600, epsilon = 1e-4);
    }

    #[test]
    fn rate_to_probability_rejects_negative_inputs() {
        assert!(matches!(rate_to_probability(-0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(rate_to_probability(0.1, -1.0), Err(Error::Domain(_))));
        assert!(rate_to_probability(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn annual_to_cycle_examples() {
        // 1 - 0.876^(1/52)
        assert_abs_diff_eq!(annual_to_cycle_probability(0.124).unwrap(), 0.002_542_708, epsilon = 1e-9);
        assert_abs_diff_eq!(annual_to_cycle_probability(0.116).unwrap(), 0.002_368_311, epsilon = 1e-9);
        assert_eq!(annual_to_cycle_probability(0.0).unwrap(), 0.0);
        assert_eq!(annual_to_cycle_probability(1.0).unwrap(), 1.0);
        assert!(annual_to_cycle_probability(1.5).is_err());
        assert!(annual_to_cycle_probability(-0.01).is_err());
    }

    #[test]
    fn hazard_unit_conversion() {
        let h = HazardRate::per_year(0.52).unwrap();
        let c = h.to_per_cycle();
        assert_eq!(c.unit(), TimeUnit::PerCycle);
        assert_abs_diff_eq!(c.value(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(c.to_per_year().value(), 0.52, epsilon = 1e-15);
        assert!(HazardRate::per_year(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn annual_round_trip(p in 0.0f64..1.0) {
            let c = annual_to_cycle_probability(p).unwrap();
            let back = 1.0 - (1.0 - c).powi(52);
            prop_assert!((back - p).abs() < 1e-12);
        }

        #[test]
        fn rate_to_probability_in_unit_interval(r in 0.0f64..50.0, t in 0.0f64..50.0) {
            let p = rate_to_probability(r, t).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn rate_to_probability_strictly_increasing(r in 1e-4f64..2.0, t in 1e-4f64..2.0, d in 1e-3f64..1.0) {
            let p = rate_to_probability(r, t).unwrap();
            prop_assert!(rate_to_probability(r + d, t).unwrap() > p);
            prop_assert!(rate_to_probability(r, t + d).unwrap() > p);
        }
    }
}
