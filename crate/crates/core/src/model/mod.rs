//! The ten-state disease model and its per-cycle transition probabilities.

mod hazard;
mod params;
mod state;

pub use hazard::{annual_to_cycle_probability, rate_to_probability, HazardRate, TimeUnit, CYCLES_PER_YEAR};
pub use params::{
    background_mortality_probability, saturating_probability, ByPhase, IncidenceTable, LifeTable, Phase,
    ScenarioConfig, TransitionParams, MIN_AGE,
};
pub use state::{HealthState, Stage};

/// Default parameter values for the Polish 2019 setting.
pub mod defaults {
    use super::*;

    pub const INCIDENCE_PER_CYCLE: [(u32, f64); 7] = [
        (20, 0.000002),
        (30, 0.00001),
        (40, 0.000029),
        (50, 0.000046),
        (60, 0.000067),
        (70, 0.000079),
        (80, 0.000058),
    ];
    pub const PROGRESSION_K: f64 = 0.0009;
    pub const PROGRESSION_LAMBDA_DIAGNOSED: [f64; 4] = [10.0, 15.0, 20.0, 25.0];
    pub const PROGRESSION_LAMBDA_UNDIAGNOSED: [f64; 4] = [20.0, 25.0, 30.0, 35.0];
    pub const HEALING_K: f64 = 1.0 / 3.0;
    pub const HEALING_HORIZON_CYCLES: u32 = 260;
    pub const DFS5_NORMAL: [f64; 4] = [0.987, 0.873, 0.52, 0.037];
    pub const DFS5_LOCKDOWN: [f64; 4] = [0.801, 0.708, 0.422, 0.03];
    pub const SURVIVAL5: [f64; 4] = [0.975, 0.856, 0.44, 0.23];
    pub const DEATH_LAMBDA_DIAGNOSED_NORMAL: [f64; 4] = [0.0061, 0.0302, 0.1642, 0.2939];
    pub const DEATH_LAMBDA_DIAGNOSED_LOCKDOWN: [f64; 4] = [0.0056, 0.0344, 0.1903, 0.3715];
    pub const DEATH_LAMBDA_UNDIAGNOSED: [f64; 4] = [0.0061, 0.0349, 0.1989, 0.3932];
    pub const ANNUAL_DIAGNOSIS_NORMAL: f64 = 0.124;
    pub const ANNUAL_DIAGNOSIS_LOCKDOWN: f64 = 0.116;
    pub const LOCKDOWN_WINDOW: (u32, u32) = (61, 113);

    /// Uncalibrated parameters with the default constants.
    pub fn transition_params(life_table: LifeTable) -> TransitionParams {
        TransitionParams {
            incidence: IncidenceTable::new(INCIDENCE_PER_CYCLE.to_vec()).expect("valid incidence table"),
            life_table,
            progression_k: PROGRESSION_K,
            progression_lambda_diagnosed: PROGRESSION_LAMBDA_DIAGNOSED,
            progression_lambda_undiagnosed: PROGRESSION_LAMBDA_UNDIAGNOSED,
            healing_k: HEALING_K,
            healing_horizon_cycles: HEALING_HORIZON_CYCLES,
            dfs5: ByPhase::new(DFS5_NORMAL, DFS5_LOCKDOWN),
            healing_lambda: None,
            death_lambda_diagnosed: ByPhase::new(DEATH_LAMBDA_DIAGNOSED_NORMAL, DEATH_LAMBDA_DIAGNOSED_LOCKDOWN),
            death_lambda_undiagnosed: DEATH_LAMBDA_UNDIAGNOSED,
            annual_diagnosis_prob: ByPhase::new(ANNUAL_DIAGNOSIS_NORMAL, ANNUAL_DIAGNOSIS_LOCKDOWN),
        }
    }
}
