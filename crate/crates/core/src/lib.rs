//! Weekly Markov-cohort Monte Carlo microsimulation of breast-cancer
//! progression, diagnosis, treatment and cost, with paired lockdown /
//! no-lockdown scenario experiments.
//!
//! The pipeline is: [`io::load_config`] reads parameters and input tables,
//! [`calibration::calibrate`] fits healing rates, [`engine::run_experiment`]
//! runs the replications and [`io::emit_reports`] writes the results.

pub mod calibration;
pub mod engine;
pub mod error;
pub mod io;
pub mod model;
pub mod population;
pub mod stats;

pub use error::{Error, Result};
