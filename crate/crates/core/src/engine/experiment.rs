use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{max_reachable_age, run_replication, CostLedger, CostParams, SimulationConfig, TransitionModel};
use crate::error::{Error, Result};
use crate::model::{ScenarioConfig, TransitionParams};
use crate::population::{build_initial_cohort, AgeBandTable, InitialDiseaseTable, Person};
use crate::stats::{mean_ci, welch_t_test, SampleSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    NoCovid,
    Covid,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::NoCovid => "nocovid",
            Scenario::Covid => "covid",
        }
    }

    pub fn is_covid(self) -> bool {
        self == Scenario::Covid
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nocovid" => Ok(Scenario::NoCovid),
            "covid" => Ok(Scenario::Covid),
            _ => Err(Error::config(format!("unknown scenario {s:?}"))),
        }
    }
}

/// Yearly outputs tracked per replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DirectCost,
    IndirectDeathCost,
    IndirectOtherCost,
    TotalCost,
    CancerDeaths,
    Diagnoses,
    BackgroundDeaths,
    Onsets,
    Healings,
}

impl Metric {
    pub const COUNT: usize = 9;
    pub const ALL: [Metric; Metric::COUNT] = [
        Metric::DirectCost,
        Metric::IndirectDeathCost,
        Metric::IndirectOtherCost,
        Metric::TotalCost,
        Metric::CancerDeaths,
        Metric::Diagnoses,
        Metric::BackgroundDeaths,
        Metric::Onsets,
        Metric::Healings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::DirectCost => "direct_cost",
            Metric::IndirectDeathCost => "indirect_death_cost",
            Metric::IndirectOtherCost => "indirect_other_cost",
            Metric::TotalCost => "total_cost",
            Metric::CancerDeaths => "cancer_deaths",
            Metric::Diagnoses => "diagnoses",
            Metric::BackgroundDeaths => "background_deaths",
            Metric::Onsets => "onsets",
            Metric::Healings => "healings",
        }
    }

    pub fn is_cost(self) -> bool {
        matches!(
            self,
            Metric::DirectCost | Metric::IndirectDeathCost | Metric::IndirectOtherCost | Metric::TotalCost
        )
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown metric {s:?}")))
    }
}

/// National-scale totals for one calendar year.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YearValues {
    pub year: i32,
    pub values: [f64; Metric::COUNT],
}

impl YearValues {
    pub fn get(&self, metric: Metric) -> f64 {
        self.values[metric.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub index: u32,
    pub seed: u64,
    pub years: Vec<YearValues>,
}

impl ReplicationRecord {
    pub fn total(&self, metric: Metric) -> f64 {
        self.years.iter().map(|y| y.get(metric)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRuns {
    pub scenario: Scenario,
    /// Ordered by replication index.
    pub replications: Vec<ReplicationRecord>,
}

/// Everything needed to run a paired experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: SimulationConfig,
    /// Must be calibrated.
    pub params: TransitionParams,
    pub costs: CostParams,
    pub lockdown_window: (u32, u32),
    pub ages: AgeBandTable,
    pub disease: InitialDiseaseTable,
    pub scenarios: Vec<Scenario>,
}

impl Experiment {
    /// The shared starting cohort, drawn from the base seed.
    pub fn cohort(&self) -> Result<Vec<Person>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.base_seed);
        rng.set_stream(u64::MAX);
        build_initial_cohort(&self.ages, &self.disease, self.config.population_fraction, &mut rng)
    }

    pub fn scenario_config(&self, scenario: Scenario) -> Result<ScenarioConfig> {
        let (start, end) = self.lockdown_window;
        ScenarioConfig::new(scenario.is_covid(), start, end, self.config.total_cycles)
    }

    /// Replication `i` uses `base_seed + i` in every scenario under common
    /// random numbers; otherwise each scenario gets its own block of seeds.
    pub fn seed_for(&self, scenario: Scenario, replication: u32) -> u64 {
        let base = self.config.base_seed.wrapping_add(u64::from(replication));
        if self.config.common_random_numbers {
            base
        } else {
            let block = match scenario {
                Scenario::NoCovid => 0,
                Scenario::Covid => 1,
            };
            base.wrapping_add(block * u64::from(self.config.replications))
        }
    }

    pub fn compile_model(&self, cohort: &[Person]) -> Result<TransitionModel> {
        let max_age = max_reachable_age(cohort, self.config.total_cycles);
        TransitionModel::compile(&self.params, max_age, self.config.total_cycles)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: SimulationConfig,
    pub cohort_size: usize,
    pub years: Vec<i32>,
    pub runs: Vec<ScenarioRuns>,
}

/// Paired difference `covid - nocovid` for one metric and period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSummary {
    pub summary: SampleSummary,
    /// Welch two-sample p-value; `None` when the test is undefined.
    pub p_value: Option<f64>,
}

impl ExperimentResult {
    pub fn runs(&self, scenario: Scenario) -> Option<&ScenarioRuns> {
        self.runs.iter().find(|r| r.scenario == scenario)
    }

    /// Per-replication values for a metric in `year`, or summed over the
    /// whole horizon when `year` is `None`.
    pub fn samples(&self, scenario: Scenario, metric: Metric, year: Option<i32>) -> Vec<f64> {
        let Some(runs) = self.runs(scenario) else {
            return Vec::new();
        };
        runs.replications
            .iter()
            .map(|r| match year {
                Some(y) => r.years.iter().find(|v| v.year == y).map_or(0.0, |v| v.get(metric)),
                None => r.total(metric),
            })
            .collect()
    }

    pub fn summary(&self, scenario: Scenario, metric: Metric, year: Option<i32>, level: f64) -> Result<SampleSummary> {
        mean_ci(&self.samples(scenario, metric, year), level)
    }

    pub fn difference(&self, metric: Metric, year: Option<i32>, level: f64) -> Result<DifferenceSummary> {
        let covid = self.samples(Scenario::Covid, metric, year);
        let nocovid = self.samples(Scenario::NoCovid, metric, year);
        if covid.is_empty() || nocovid.is_empty() {
            return Err(Error::domain("differences need both scenarios"));
        }
        let diffs: Vec<f64> = covid.iter().zip(&nocovid).map(|(a, b)| a - b).collect();
        Ok(DifferenceSummary {
            summary: mean_ci(&diffs, level)?,
            p_value: welch_t_test(&covid, &nocovid).ok(),
        })
    }
}

fn yearly_values(ledger: &CostLedger, config: &SimulationConfig) -> Vec<YearValues> {
    let per_year = config.cycles_per_year as usize;
    let scale = config.scale_factor();
    ledger
        .tallies
        .chunks(per_year)
        .zip(ledger.costs.chunks(per_year))
        .enumerate()
        .map(|(k, (tallies, costs))| {
            let mut v = [0.0; Metric::COUNT];
            let sum = |f: &dyn Fn(usize) -> f64| (0..tallies.len()).map(f).sum::<f64>();
            v[Metric::DirectCost.index()] = sum(&|i| costs[i].direct) * scale;
            v[Metric::IndirectDeathCost.index()] = sum(&|i| costs[i].indirect_death) * scale;
            v[Metric::IndirectOtherCost.index()] = sum(&|i| costs[i].indirect_other) * scale;
            v[Metric::TotalCost.index()] = v[Metric::DirectCost.index()]
                + v[Metric::IndirectDeathCost.index()]
                + v[Metric::IndirectOtherCost.index()];
            let count = |f: &dyn Fn(usize) -> u32| (0..tallies.len()).map(|i| u64::from(f(i))).sum::<u64>() as f64 * scale;
            v[Metric::CancerDeaths.index()] = count(&|i| tallies[i].cancer_deaths);
            v[Metric::Diagnoses.index()] = count(&|i| tallies[i].diagnoses);
            v[Metric::BackgroundDeaths.index()] = count(&|i| tallies[i].background_deaths);
            v[Metric::Onsets.index()] = count(&|i| tallies[i].onsets);
            v[Metric::Healings.index()] = count(&|i| tallies[i].healings);
            YearValues {
                year: config.start_year + k as i32,
                values: v,
            }
        })
        .collect()
}

/// Runs every replication of every requested scenario.
///
/// Jobs execute in parallel; results are keyed by replication index, so the
/// output is independent of scheduling.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentResult> {
    exp.config.validate()?;
    exp.costs.validate()?;
    if !exp.params.is_calibrated() {
        return Err(Error::config("transition parameters must be calibrated before running"));
    }
    let mut scenarios = exp.scenarios.clone();
    scenarios.sort();
    scenarios.dedup();
    if scenarios.is_empty() {
        return Err(Error::config("no scenario selected"));
    }
    let cohort = exp.cohort()?;
    let model = exp.compile_model(&cohort)?;
    let configs = scenarios
        .iter()
        .map(|&s| exp.scenario_config(s))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, u32)> = (0..scenarios.len())
        .flat_map(|s| (0..exp.config.replications).map(move |r| (s, r)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(s, r)| {
            let seed = exp.seed_for(scenarios[s], r);
            let ledger = run_replication(&cohort, &model, &exp.costs, &exp.config, &configs[s], seed)?;
            Ok(ReplicationRecord {
                index: r,
                seed,
                years: yearly_values(&ledger, &exp.config),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let per = exp.config.replications as usize;
    let runs = scenarios
        .iter()
        .enumerate()
        .map(|(i, &scenario)| ScenarioRuns {
            scenario,
            replications: records[i * per..(i + 1) * per].to_vec(),
        })
        .collect();
    Ok(ExperimentResult {
        config: exp.config.clone(),
        cohort_size: cohort.len(),
        years: (0..exp.config.years()).map(|k| exp.config.start_year + k as i32).collect(),
        runs,
    })
}
