//! Per-cycle stochastic update, replications and paired scenario experiments.

mod experiment;
mod ledger;
mod transition;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use experiment::{
    run_experiment, DifferenceSummary, Experiment, ExperimentResult, Metric, ReplicationRecord, Scenario, ScenarioRuns,
    YearValues,
};
pub use ledger::{CostLedger, CycleCosts, CycleTally};
pub use transition::{step_person, Event, LedgerDelta, StepOutcome, TransitionModel};

use crate::error::{Error, Result};
use crate::model::{HealthState, ScenarioConfig, CYCLES_PER_YEAR};
use crate::population::{is_birthday_cycle, Person};

/// Persons per parallel work item inside a replication.
const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub total_cycles: u32,
    pub cycles_per_year: u32,
    pub start_year: i32,
    pub replications: u32,
    pub population_fraction: f64,
    pub base_seed: u64,
    pub common_random_numbers: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            total_cycles: 364,
            cycles_per_year: CYCLES_PER_YEAR,
            start_year: 2019,
            replications: 100,
            population_fraction: 0.01,
            base_seed: 2019,
            common_random_numbers: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycles_per_year != CYCLES_PER_YEAR {
            return Err(Error::config(format!(
                "simulation.cycles_per_year must be {CYCLES_PER_YEAR} (weekly cycles), got {}",
                self.cycles_per_year
            )));
        }
        if self.total_cycles == 0 || !self.total_cycles.is_multiple_of(self.cycles_per_year) {
            return Err(Error::config(format!(
                "simulation.total_cycles must be a positive multiple of {}, got {}",
                self.cycles_per_year, self.total_cycles
            )));
        }
        if self.replications == 0 {
            return Err(Error::config("simulation.replications must be at least 1"));
        }
        if !(self.population_fraction > 0.0 && self.population_fraction <= 1.0) {
            return Err(Error::config(format!(
                "simulation.population_fraction must lie in (0, 1], got {}",
                self.population_fraction
            )));
        }
        Ok(())
    }

    pub fn years(&self) -> u32 {
        self.total_cycles / self.cycles_per_year
    }

    /// Multiplier from sample scale to national scale.
    pub fn scale_factor(&self) -> f64 {
        1.0 / self.population_fraction
    }
}

/// Yearly cost parameters in PLN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub direct_yearly: [f64; 4],
    pub indirect_death: f64,
    pub indirect_other_yearly: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            direct_yearly: [1881.0, 3185.0, 5573.0, 7869.0],
            indirect_death: 123_564.0,
            indirect_other_yearly: 13_159.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .direct_yearly
            .iter()
            .chain([&self.indirect_death, &self.indirect_other_yearly]);
        for &c in all {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::config(format!("costs must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// Oldest age any cohort member can reach over the run.
pub fn max_reachable_age(cohort: &[Person], total_cycles: u32) -> u32 {
    let oldest = cohort.iter().map(|p| p.age).max().unwrap_or(crate::model::MIN_AGE);
    oldest + total_cycles.saturating_sub(1) / CYCLES_PER_YEAR
}

/// Random stream for one person: the replication seed selects the key and
/// the person's index selects the stream, so each person sees the same draws
/// in both arms of a common-random-numbers pair.
fn person_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn simulate_person(
    mut person: Person,
    model: &TransitionModel,
    phases: &[crate::model::Phase],
    rng: &mut ChaCha8Rng,
    tallies: &mut [CycleTally],
) {
    let deceased = HealthState::Deceased.index();
    for (cycle, &phase) in phases.iter().enumerate() {
        let alive = person.state.is_alive();
        if alive && is_birthday_cycle(cycle as u32) {
            person.age += 1;
        }
        if !alive {
            for t in &mut tallies[cycle..] {
                t.occupancy[deceased] += 1;
            }
            return;
        }
        let tally = &mut tallies[cycle];
        tally.occupancy[person.state.index()] += 1;
        let u: f64 = rng.random();
        let (event, to) = model.transition(&person, phase, u);
        tally.record(event);
        transition::apply(&mut person, to);
    }
}

/// Runs one replication of `scenario` over the whole horizon.
///
/// The result depends only on `(cohort, model, scenario, seed)`; persons are
/// processed in parallel chunks but tallies are integer sums, so the thread
/// count never changes the output.
pub fn run_replication(
    cohort: &[Person],
    model: &TransitionModel,
    costs: &CostParams,
    config: &SimulationConfig,
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<CostLedger> {
    let needed = max_reachable_age(cohort, config.total_cycles);
    if needed > model.max_age() {
        return Err(Error::config(format!(
            "cohort reaches age {needed} but transition tables stop at {}",
            model.max_age()
        )));
    }
    if let Some(p) = cohort.iter().find(|p| p.age < crate::model::MIN_AGE) {
        return Err(Error::config(format!("cohort contains a person aged {}", p.age)));
    }
    let cycles = config.total_cycles as usize;
    let phases: Vec<_> = (0..config.total_cycles).map(|c| scenario.phase(c)).collect();
    let tallies = cohort
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk_idx, chunk)| {
            let mut local = vec![CycleTally::default(); cycles];
            for (offset, person) in chunk.iter().enumerate() {
                let mut rng = person_rng(seed, chunk_idx * CHUNK + offset);
                simulate_person(*person, model, &phases, &mut rng, &mut local);
            }
            local
        })
        .reduce(
            || vec![CycleTally::default(); cycles],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    Ok(CostLedger::from_tallies(tallies, costs))
}

#[cfg(test)]
mod tests;
