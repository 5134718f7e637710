use serde::{Deserialize, Serialize};

use super::CostParams;
use crate::error::{Error, Result};
use crate::model::{HealthState, Phase, Stage, TransitionParams, CYCLES_PER_YEAR, MIN_AGE};
use crate::population::Person;

/// What happened to a person in one cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    Stay,
    Onset,
    BackgroundDeath,
    CancerDeath,
    Progression,
    Diagnosis,
    Healing,
}

#[derive(Clone, Debug)]
struct StageTables {
    death: f64,
    /// Indexed by cycles in state; all zeros at stage 4.
    progression: Vec<f64>,
}

#[derive(Clone, Debug)]
struct PhaseTables {
    undiagnosed: [StageTables; 4],
    diagnosed: [StageTables; 4],
    /// Indexed by stage, then cycles in state.
    healing: [Vec<f64>; 4],
    diagnosis: f64,
}

/// Transition probabilities tabulated over every age and time-in-state a run
/// can reach, validated once so the per-cycle update never fails.
#[derive(Clone, Debug)]
pub struct TransitionModel {
    max_age: u32,
    max_t: u32,
    onset: Vec<f64>,
    background: Vec<f64>,
    phases: [PhaseTables; 2],
}

impl TransitionModel {
    /// Tabulates `params` for ages `25..=max_age` and times-in-state `0..=max_t`.
    pub fn compile(params: &TransitionParams, max_age: u32, max_t: u32) -> Result<Self> {
        params.validate()?;
        if max_age < MIN_AGE {
            return Err(Error::config(format!("maximum age {max_age} is below {MIN_AGE}")));
        }
        let mut onset = Vec::with_capacity((max_age - MIN_AGE + 1) as usize);
        let mut background = Vec::with_capacity(onset.capacity());
        for age in MIN_AGE..=max_age {
            onset.push(params.incidence_probability(age)?);
            background.push(params.background_mortality_probability(age)?);
        }
        let phase_tables = |phase: Phase| -> Result<PhaseTables> {
            let lockdown = phase == Phase::Lockdown;
            let stage_tables = |diagnosed: bool| -> Result<[StageTables; 4]> {
                let mut out: Vec<StageTables> = Vec::with_capacity(4);
                for stage in Stage::ALL {
                    let progression = (0..=max_t)
                        .map(|t| match stage.next() {
                            Some(_) => params.progression_probability(stage, diagnosed, t),
                            None => Ok(0.0),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    out.push(StageTables {
                        death: params.cancer_death_probability(stage, diagnosed, lockdown),
                        progression,
                    });
                }
                Ok(out.try_into().expect("four stages"))
            };
            let mut healing: Vec<Vec<f64>> = Vec::with_capacity(4);
            for stage in Stage::ALL {
                healing.push(
                    (0..=max_t)
                        .map(|t| params.healing_probability(stage, lockdown, t))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            Ok(PhaseTables {
                undiagnosed: stage_tables(false)?,
                diagnosed: stage_tables(true)?,
                healing: healing.try_into().expect("four stages"),
                diagnosis: params.diagnosis_probability(lockdown),
            })
        };
        let model = TransitionModel {
            max_age,
            max_t,
            onset,
            background,
            phases: [phase_tables(Phase::Normal)?, phase_tables(Phase::Lockdown)?],
        };
        let worst = model.max_segment_sum();
        if worst > 1.0 {
            return Err(Error::Model(format!(
                "event probabilities for one state sum to {worst} > 1"
            )));
        }
        Ok(model)
    }

    pub fn max_age(&self) -> u32 {
        self.max_age
    }

    pub fn max_t(&self) -> u32 {
        self.max_t
    }

    fn tables(&self, phase: Phase) -> &PhaseTables {
        &self.phases[phase as usize]
    }

    /// Ordered `(probability, event, destination)` segments for a living
    /// person; the remainder of `[0, 1)` means staying put.
    pub fn segments(&self, person: &Person, phase: Phase) -> Vec<(f64, Event, HealthState)> {
        let age = (person.age.clamp(MIN_AGE, self.max_age) - MIN_AGE) as usize;
        let t = person.cycles_in_state.min(self.max_t) as usize;
        let tables = self.tables(phase);
        match person.state {
            HealthState::Healthy => vec![
                (self.onset[age], Event::Onset, HealthState::Undiagnosed(Stage::I)),
                (self.background[age], Event::BackgroundDeath, HealthState::Deceased),
            ],
            HealthState::Undiagnosed(s) => {
                let st = &tables.undiagnosed[s.index()];
                let mut v = vec![(st.death, Event::CancerDeath, HealthState::Deceased)];
                if let Some(next) = s.next() {
                    v.push((st.progression[t], Event::Progression, HealthState::Undiagnosed(next)));
                }
                v.push((tables.diagnosis, Event::Diagnosis, HealthState::Diagnosed(s)));
                v
            }
            HealthState::Diagnosed(s) => {
                let st = &tables.diagnosed[s.index()];
                let mut v = vec![(st.death, Event::CancerDeath, HealthState::Deceased)];
                if let Some(next) = s.next() {
                    v.push((st.progression[t], Event::Progression, HealthState::Diagnosed(next)));
                }
                v.push((tables.healing[s.index()][t], Event::Healing, HealthState::Healthy));
                v
            }
            HealthState::Deceased => Vec::new(),
        }
    }

    /// Largest per-state event-probability sum over all tabulated inputs.
    pub fn max_segment_sum(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (o, b) in self.onset.iter().zip(&self.background) {
            worst = worst.max(o + b);
        }
        for tables in &self.phases {
            for t in 0..=self.max_t as usize {
                for s in 0..4 {
                    let u = &tables.undiagnosed[s];
                    worst = worst.max(u.death + u.progression[t] + tables.diagnosis);
                    let d = &tables.diagnosed[s];
                    worst = worst.max(d.death + d.progression[t] + tables.healing[s][t]);
                }
            }
        }
        worst
    }

    /// Selects the event for uniform draw `u` and returns it with the new
    /// state. The person must be alive and within the tabulated age range.
    #[inline]
    pub(crate) fn transition(&self, person: &Person, phase: Phase, u: f64) -> (Event, HealthState) {
        let t = person.cycles_in_state.min(self.max_t) as usize;
        let tables = self.tables(phase);
        match person.state {
            HealthState::Healthy => {
                let age = (person.age - MIN_AGE) as usize;
                let onset = self.onset[age];
                if u < onset {
                    (Event::Onset, HealthState::Undiagnosed(Stage::I))
                } else if u < onset + self.background[age] {
                    (Event::BackgroundDeath, HealthState::Deceased)
                } else {
                    (Event::Stay, person.state)
                }
            }
            HealthState::Undiagnosed(s) => {
                let st = &tables.undiagnosed[s.index()];
                let c1 = st.death;
                let c2 = c1 + st.progression[t];
                if u < c1 {
                    (Event::CancerDeath, HealthState::Deceased)
                } else if u < c2 {
                    // progression is zero at stage 4, so `next` exists here
                    (Event::Progression, HealthState::Undiagnosed(s.next().unwrap_or(s)))
                } else if u < c2 + tables.diagnosis {
                    (Event::Diagnosis, HealthState::Diagnosed(s))
                } else {
                    (Event::Stay, person.state)
                }
            }
            HealthState::Diagnosed(s) => {
                let st = &tables.diagnosed[s.index()];
                let c1 = st.death;
                let c2 = c1 + st.progression[t];
                if u < c1 {
                    (Event::CancerDeath, HealthState::Deceased)
                } else if u < c2 {
                    (Event::Progression, HealthState::Diagnosed(s.next().unwrap_or(s)))
                } else if u < c2 + tables.healing[s.index()][t] {
                    (Event::Healing, HealthState::Healthy)
                } else {
                    (Event::Stay, person.state)
                }
            }
            HealthState::Deceased => (Event::Stay, HealthState::Deceased),
        }
    }
}

/// Costs and counts attributable to one person-cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LedgerDelta {
    pub direct: f64,
    pub indirect_death: f64,
    pub indirect_other: f64,
    pub cancer_deaths: u32,
    pub diagnoses: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub event: Event,
    pub from: HealthState,
    pub to: HealthState,
    pub delta: LedgerDelta,
}

/// Advances one living person by one cycle using the uniform draw `u`.
///
/// Treatment costs are charged for the state occupied at the start of the
/// cycle. `cycles_in_state` resets on a state change and increments otherwise.
pub fn step_person(
    person: &mut Person,
    model: &TransitionModel,
    costs: &CostParams,
    lockdown_active: bool,
    u: f64,
) -> Result<StepOutcome> {
    if !person.state.is_alive() {
        return Err(Error::domain("cannot step a deceased person"));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain(format!("uniform draw must lie in [0, 1), got {u}")));
    }
    if person.age < MIN_AGE || person.age > model.max_age() {
        return Err(Error::domain(format!(
            "age {} outside the tabulated range {MIN_AGE}..={}",
            person.age,
            model.max_age()
        )));
    }
    let phase = Phase::from_lockdown(lockdown_active);
    let sum: f64 = model.segments(person, phase).iter().map(|s| s.0).sum();
    if sum > 1.0 {
        return Err(Error::Model(format!("event probabilities for {} sum to {sum}", person.state)));
    }
    let from = person.state;
    let (event, to) = model.transition(person, phase, u);
    apply(person, to);

    let mut delta = LedgerDelta::default();
    if let HealthState::Diagnosed(s) = from {
        delta.direct = costs.direct_per_cycle(s);
        delta.indirect_other = costs.indirect_other_per_cycle();
    }
    match event {
        Event::CancerDeath => {
            delta.indirect_death = costs.indirect_death;
            delta.cancer_deaths = 1;
        }
        Event::Diagnosis => delta.diagnoses = 1,
        _ => {}
    }
    Ok(StepOutcome { event, from, to, delta })
}

#[inline]
pub(crate) fn apply(person: &mut Person, to: HealthState) {
    if to == person.state {
        person.cycles_in_state += 1;
    } else {
        person.state = to;
        person.cycles_in_state = 0;
    }
}

impl CostParams {
    pub fn direct_per_cycle(&self, stage: Stage) -> f64 {
        self.direct_yearly[stage.index()] / f64::from(CYCLES_PER_YEAR)
    }

    pub fn indirect_other_per_cycle(&self) -> f64 {
        self.indirect_other_yearly / f64::from(CYCLES_PER_YEAR)
    }
}
