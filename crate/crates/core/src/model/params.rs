use std::collections::BTreeMap;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use super::hazard::{annual_to_cycle_probability, check_probability, CYCLES_PER_YEAR};
use super::state::Stage;
use crate::error::{Error, Result};

/// Youngest age represented in the model.
pub const MIN_AGE: u32 = 25;

/// Which parameter set is in force during a cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Normal,
    Lockdown,
}

impl Phase {
    pub fn from_lockdown(lockdown_active: bool) -> Phase {
        if lockdown_active {
            Phase::Lockdown
        } else {
            Phase::Normal
        }
    }
}

/// A value with one variant per [`Phase`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ByPhase<T> {
    pub normal: T,
    pub lockdown: T,
}

impl<T> ByPhase<T> {
    pub fn new(normal: T, lockdown: T) -> Self {
        ByPhase { normal, lockdown }
    }

    pub fn get(&self, phase: Phase) -> &T {
        match phase {
            Phase::Normal => &self.normal,
            Phase::Lockdown => &self.lockdown,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> ByPhase<U> {
        ByPhase {
            normal: f(&self.normal),
            lockdown: f(&self.lockdown),
        }
    }
}

impl<T> Index<Phase> for ByPhase<T> {
    type Output = T;

    fn index(&self, phase: Phase) -> &T {
        self.get(phase)
    }
}

/// Per-cycle cancer onset probability by decade of age.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceTable {
    bands: Vec<(u32, f64)>,
}

impl IncidenceTable {
    /// `bands` pairs a decade start (20, 30, ...) with a per-cycle probability.
    pub fn new(mut bands: Vec<(u32, f64)>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::config("incidence table is empty"));
        }
        bands.sort_by_key(|b| b.0);
        for w in bands.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::config(format!("duplicate incidence decade {}", w[0].0)));
            }
        }
        for &(decade, p) in &bands {
            check_probability(p, &format!("incidence probability for decade {decade}"))
                .map_err(|e| Error::config(e.to_string()))?;
        }
        if bands[0].0 > MIN_AGE {
            return Err(Error::config(format!(
                "incidence table must cover age {MIN_AGE}; first decade is {}",
                bands[0].0
            )));
        }
        Ok(IncidenceTable { bands })
    }

    pub fn bands(&self) -> &[(u32, f64)] {
        &self.bands
    }

    /// Probability for the greatest decade at or below `age`; ages past the
    /// last decade use the last decade's value.
    pub fn probability(&self, age: u32) -> Result<f64> {
        if age < MIN_AGE {
            return Err(Error::domain(format!("age {age} is below the modelled minimum {MIN_AGE}")));
        }
        let idx = self.bands.partition_point(|&(decade, _)| decade <= age);
        // idx >= 1 because the first decade is <= MIN_AGE.
        Ok(self.bands[idx - 1].1)
    }
}

/// Annual probability of non-cancer death by single year of age.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifeTable {
    rows: BTreeMap<u32, f64>,
}

impl LifeTable {
    pub fn new(rows: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (age, q) in rows {
            check_probability(q, &format!("life-table death probability at age {age}"))
                .map_err(|e| Error::config(e.to_string()))?;
            if map.insert(age, q).is_some() {
                return Err(Error::config(format!("duplicate life-table row for age {age}")));
            }
        }
        if map.is_empty() {
            return Err(Error::config("life table has no rows"));
        }
        Ok(LifeTable { rows: map })
    }

    pub fn annual_probability(&self, age: u32) -> Result<f64> {
        self.rows
            .get(&age)
            .copied()
            .ok_or_else(|| Error::config(format!("life table has no row for age {age}")))
    }

    pub fn max_age(&self) -> u32 {
        *self.rows.keys().next_back().expect("nonempty")
    }

    pub fn rows(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.rows.iter().map(|(&a, &q)| (a, q))
    }

    /// Whether every age in `lo..=hi` has a row.
    pub fn covers(&self, lo: u32, hi: u32) -> bool {
        (lo..=hi).all(|a| self.rows.contains_key(&a))
    }
}

/// Per-cycle non-cancer death probability at `age` from an annual life table.
pub fn background_mortality_probability(age: u32, life_table: &LifeTable) -> Result<f64> {
    if age < MIN_AGE {
        return Err(Error::domain(format!("age {age} is below the modelled minimum {MIN_AGE}")));
    }
    annual_to_cycle_probability(life_table.annual_probability(age)?)
}

/// Every parameter the transition model needs.
///
/// Death hazards are annual rates. Healing rates are per-cycle exponents and
/// are only present once the parameters have been calibrated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionParams {
    pub incidence: IncidenceTable,
    pub life_table: LifeTable,
    pub progression_k: f64,
    pub progression_lambda_diagnosed: [f64; 4],
    pub progression_lambda_undiagnosed: [f64; 4],
    pub healing_k: f64,
    /// Cycles over which cumulative healing is matched to 5-year DFS.
    pub healing_horizon_cycles: u32,
    pub dfs5: ByPhase<[f64; 4]>,
    pub healing_lambda: Option<ByPhase<[f64; 4]>>,
    pub death_lambda_diagnosed: ByPhase<[f64; 4]>,
    pub death_lambda_undiagnosed: [f64; 4],
    pub annual_diagnosis_prob: ByPhase<f64>,
}

impl TransitionParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64, name: &str| -> Result<()> {
            check_probability(p, name).map_err(|e| Error::config(e.to_string()))
        };
        let rates = |xs: &[f64], name: &str| -> Result<()> {
            for (i, &x) in xs.iter().enumerate() {
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::config(format!("{name}[{i}] must be nonnegative, got {x}")));
                }
            }
            Ok(())
        };
        prob(self.progression_k, "progression k")?;
        prob(self.healing_k, "healing k")?;
        if self.healing_k == 0.0 {
            return Err(Error::config("healing k must be positive"));
        }
        if self.healing_horizon_cycles == 0 {
            return Err(Error::config("healing horizon must be at least one cycle"));
        }
        rates(&self.progression_lambda_diagnosed, "progression lambda (diagnosed)")?;
        rates(&self.progression_lambda_undiagnosed, "progression lambda (undiagnosed)")?;
        for phase in [Phase::Normal, Phase::Lockdown] {
            for (i, &d) in self.dfs5[phase].iter().enumerate() {
                prob(d, &format!("{phase:?} DFS[{i}]"))?;
            }
            rates(&self.death_lambda_diagnosed[phase], "death lambda (diagnosed)")?;
            prob(self.annual_diagnosis_prob[phase], "annual diagnosis probability")?;
            if let Some(h) = &self.healing_lambda {
                rates(&h[phase], "healing lambda")?;
            }
        }
        rates(&self.death_lambda_undiagnosed, "death lambda (undiagnosed)")?;
        Ok(())
    }

    pub fn is_calibrated(&self) -> bool {
        self.healing_lambda.is_some()
    }

    pub fn incidence_probability(&self, age: u32) -> Result<f64> {
        self.incidence.probability(age)
    }

    pub fn background_mortality_probability(&self, age: u32) -> Result<f64> {
        background_mortality_probability(age, &self.life_table)
    }

    /// `k (1 - exp(-lambda t))` with the stage's progression rate; `t` is
    /// cycles spent in the current state.
    pub fn progression_probability(&self, stage: Stage, diagnosed: bool, t_in_state: u32) -> Result<f64> {
        if stage.next().is_none() {
            return Err(Error::domain("stage 4 has no successor stage"));
        }
        let lambda = if diagnosed {
            self.progression_lambda_diagnosed[stage.index()]
        } else {
            self.progression_lambda_undiagnosed[stage.index()]
        };
        Ok(saturating_probability(self.progression_k, lambda, t_in_state))
    }

    pub fn diagnosis_probability(&self, lockdown_active: bool) -> f64 {
        let annual = self.annual_diagnosis_prob[Phase::from_lockdown(lockdown_active)];
        annual_to_cycle_probability(annual).expect("validated annual probability")
    }

    pub fn healing_probability(&self, stage: Stage, lockdown_active: bool, t_in_state: u32) -> Result<f64> {
        let lambdas = self
            .healing_lambda
            .as_ref()
            .ok_or_else(|| Error::config("healing rates have not been calibrated"))?;
        let lambda = lambdas[Phase::from_lockdown(lockdown_active)][stage.index()];
        Ok(saturating_probability(self.healing_k, lambda, t_in_state))
    }

    /// Per-cycle cancer death probability, `1 - exp(-lambda / 52)` for the
    /// annual hazard selected by stage, diagnosis status and phase.
    pub fn cancer_death_probability(&self, stage: Stage, diagnosed: bool, lockdown_active: bool) -> f64 {
        let annual = if diagnosed {
            self.death_lambda_diagnosed[Phase::from_lockdown(lockdown_active)][stage.index()]
        } else {
            self.death_lambda_undiagnosed[stage.index()]
        };
        -(-annual / f64::from(CYCLES_PER_YEAR)).exp_m1()
    }
}

/// `k (1 - exp(-lambda t))`.
pub fn saturating_probability(k: f64, lambda: f64, t: u32) -> f64 {
    k * -(-lambda * f64::from(t)).exp_m1()
}

/// Lockdown toggle plus the half-open cycle window `[start, end)` during
/// which lockdown parameters apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub covid_enabled: bool,
    pub lockdown_start: u32,
    pub lockdown_end: u32,
}

impl ScenarioConfig {
    pub fn new(covid_enabled: bool, lockdown_start: u32, lockdown_end: u32, total_cycles: u32) -> Result<Self> {
        if lockdown_start >= lockdown_end || lockdown_end > total_cycles {
            return Err(Error::config(format!(
                "lockdown window [{lockdown_start}, {lockdown_end}) must satisfy 0 <= start < end <= {total_cycles}"
            )));
        }
        Ok(ScenarioConfig {
            covid_enabled,
            lockdown_start,
            lockdown_end,
        })
    }

    pub fn with_covid(self, covid_enabled: bool) -> Self {
        ScenarioConfig { covid_enabled, ..self }
    }

    pub fn is_lockdown(&self, cycle: u32) -> bool {
        self.covid_enabled && (self.lockdown_start..self.lockdown_end).contains(&cycle)
    }

    pub fn phase(&self, cycle: u32) -> Phase {
        Phase::from_lockdown(self.is_lockdown(cycle))
    }
}
