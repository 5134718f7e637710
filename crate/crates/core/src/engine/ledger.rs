use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::transition::Event;
use super::CostParams;
use crate::model::{HealthState, Stage};

/// Integer event counts for one cycle of one replication.
///
/// `occupancy` is the state distribution at the start of the cycle, so it
/// always sums to the cohort size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTally {
    pub occupancy: [u32; HealthState::COUNT],
    pub onsets: u32,
    pub background_deaths: u32,
    pub cancer_deaths: u32,
    pub progressions: u32,
    pub diagnoses: u32,
    pub healings: u32,
}

impl CycleTally {
    #[inline]
    pub(crate) fn record(&mut self, event: Event) {
        match event {
            Event::Stay => {}
            Event::Onset => self.onsets += 1,
            Event::BackgroundDeath => self.background_deaths += 1,
            Event::CancerDeath => self.cancer_deaths += 1,
            Event::Progression => self.progressions += 1,
            Event::Diagnosis => self.diagnoses += 1,
            Event::Healing => self.healings += 1,
        }
    }

    pub fn population(&self) -> u64 {
        self.occupancy.iter().map(|&n| u64::from(n)).sum()
    }

    pub fn living(&self) -> u64 {
        self.population() - u64::from(self.occupancy[HealthState::Deceased.index()])
    }

    pub fn deaths(&self) -> u32 {
        self.background_deaths + self.cancer_deaths
    }

    pub fn occupancy_of(&self, state: HealthState) -> u32 {
        self.occupancy[state.index()]
    }
}

impl AddAssign<&CycleTally> for CycleTally {
    fn add_assign(&mut self, rhs: &CycleTally) {
        for (a, b) in self.occupancy.iter_mut().zip(rhs.occupancy) {
            *a += b;
        }
        self.onsets += rhs.onsets;
        self.background_deaths += rhs.background_deaths;
        self.cancer_deaths += rhs.cancer_deaths;
        self.progressions += rhs.progressions;
        self.diagnoses += rhs.diagnoses;
        self.healings += rhs.healings;
    }
}

/// Costs for one cycle, computed from that cycle's tally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleCosts {
    pub direct: f64,
    pub indirect_death: f64,
    pub indirect_other: f64,
}

impl CycleCosts {
    pub fn from_tally(tally: &CycleTally, costs: &CostParams) -> Self {
        let mut direct = 0.0;
        let mut diagnosed = 0u64;
        for stage in Stage::ALL {
            let n = tally.occupancy_of(HealthState::Diagnosed(stage));
            direct += f64::from(n) * costs.direct_per_cycle(stage);
            diagnosed += u64::from(n);
        }
        CycleCosts {
            direct,
            indirect_death: f64::from(tally.cancer_deaths) * costs.indirect_death,
            indirect_other: diagnosed as f64 * costs.indirect_other_per_cycle(),
        }
    }

    pub fn total(&self) -> f64 {
        self.direct + self.indirect_death + self.indirect_other
    }
}

/// Per-cycle ledger of one replication at sample scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub tallies: Vec<CycleTally>,
    pub costs: Vec<CycleCosts>,
}

impl CostLedger {
    pub fn from_tallies(tallies: Vec<CycleTally>, params: &CostParams) -> Self {
        let costs = tallies.iter().map(|t| CycleCosts::from_tally(t, params)).collect();
        CostLedger { tallies, costs }
    }

    pub fn cycles(&self) -> usize {
        self.tallies.len()
    }

    /// Running totals of costs, cancer deaths and diagnoses up to and
    /// including each cycle.
    pub fn cumulative(&self) -> Vec<(CycleCosts, u64, u64)> {
        let mut acc = (CycleCosts::default(), 0u64, 0u64);
        self.tallies
            .iter()
            .zip(&self.costs)
            .map(|(t, c)| {
                acc.0.direct += c.direct;
                acc.0.indirect_death += c.indirect_death;
                acc.0.indirect_other += c.indirect_other;
                acc.1 += u64::from(t.cancer_deaths);
                acc.2 += u64::from(t.diagnoses);
                acc
            })
            .collect()
    }
}
