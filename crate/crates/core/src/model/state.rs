use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AJCC cancer stage, 1 through 4. Stage 0 is not modelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Stage(u8);

impl Stage {
    pub const I: Stage = Stage(1);
    pub const II: Stage = Stage(2);
    pub const III: Stage = Stage(3);
    pub const IV: Stage = Stage(4);
    pub const ALL: [Stage; 4] = [Stage::I, Stage::II, Stage::III, Stage::IV];

    pub fn new(stage: u8) -> Result<Self> {
        if (1..=4).contains(&stage) {
            Ok(Stage(stage))
        } else {
            Err(Error::domain(format!("stage must be in 1..=4, got {stage}")))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    /// Zero-based index into per-stage arrays.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    /// The next stage, or `None` from stage 4.
    pub fn next(self) -> Option<Stage> {
        (self.0 < 4).then(|| Stage(self.0 + 1))
    }
}

impl TryFrom<u8> for Stage {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Stage::new(value)
    }
}

impl From<Stage> for u8 {
    fn from(stage: Stage) -> u8 {
        stage.0
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The ten states of the disease model.
///
/// Healthy women develop undiagnosed stage-1 cancer. Undiagnosed cancer may
/// progress, be diagnosed or kill. Diagnosed cancer may progress, heal back to
/// healthy or kill. `Deceased` is absorbing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HealthState {
    Healthy,
    Undiagnosed(Stage),
    Diagnosed(Stage),
    Deceased,
}

impl HealthState {
    pub const COUNT: usize = 10;

    pub const ALL: [HealthState; HealthState::COUNT] = [
        HealthState::Healthy,
        HealthState::Undiagnosed(Stage::I),
        HealthState::Undiagnosed(Stage::II),
        HealthState::Undiagnosed(Stage::III),
        HealthState::Undiagnosed(Stage::IV),
        HealthState::Diagnosed(Stage::I),
        HealthState::Diagnosed(Stage::II),
        HealthState::Diagnosed(Stage::III),
        HealthState::Diagnosed(Stage::IV),
        HealthState::Deceased,
    ];

    /// Dense index in `0..10`, matching the order of [`HealthState::ALL`].
    pub fn index(self) -> usize {
        match self {
            HealthState::Healthy => 0,
            HealthState::Undiagnosed(s) => 1 + s.index(),
            HealthState::Diagnosed(s) => 5 + s.index(),
            HealthState::Deceased => 9,
        }
    }

    pub fn from_index(index: usize) -> Option<HealthState> {
        HealthState::ALL.get(index).copied()
    }

    pub fn is_alive(self) -> bool {
        self != HealthState::Deceased
    }

    pub fn has_cancer(self) -> bool {
        matches!(self, HealthState::Undiagnosed(_) | HealthState::Diagnosed(_))
    }

    pub fn stage(self) -> Option<Stage> {
        match self {
            HealthState::Undiagnosed(s) | HealthState::Diagnosed(s) => Some(s),
            _ => None,
        }
    }

    /// Column-friendly name, e.g. `undiagnosed_2`.
    pub fn label(self) -> String {
        match self {
            HealthState::Healthy => "healthy".to_string(),
            HealthState::Undiagnosed(s) => format!("undiagnosed_{s}"),
            HealthState::Diagnosed(s) => format!("diagnosed_{s}"),
            HealthState::Deceased => "deceased".to_string(),
        }
    }

    /// States reachable in one cycle, excluding staying put.
    pub fn successors(self) -> Vec<HealthState> {
        match self {
            HealthState::Healthy => vec![HealthState::Undiagnosed(Stage::I), HealthState::Deceased],
            HealthState::Undiagnosed(s) => {
                let mut out = vec![HealthState::Deceased];
                out.extend(s.next().map(HealthState::Undiagnosed));
                out.push(HealthState::Diagnosed(s));
                out
            }
            HealthState::Diagnosed(s) => {
                let mut out = vec![HealthState::Deceased];
                out.extend(s.next().map(HealthState::Diagnosed));
                out.push(HealthState::Healthy);
                out
            }
            HealthState::Deceased => Vec::new(),
        }
    }
}

impl fmt::Display for HealthState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
