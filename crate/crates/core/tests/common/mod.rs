// Shared helpers for the integration tests; each test crate uses a subset.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().unwrap()
}

pub fn default_config() -> PathBuf {
    data_dir().join("default.toml")
}

/// The default configuration with input paths made absolute, so it can be
/// edited and written anywhere.
pub fn default_text() -> String {
    let dir = data_dir();
    std::fs::read_to_string(default_config())
        .unwrap()
        .replace("\"life_table_2019.csv\"", &format!("{:?}", dir.join("life_table_2019.csv")))
        .replace("\"age_distribution_2019.csv\"", &format!("{:?}", dir.join("age_distribution_2019.csv")))
        .replace("\"initial_disease_2019.csv\"", &format!("{:?}", dir.join("initial_disease_2019.csv")))
}

pub fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Default configuration shrunk to a quick run.
pub fn small_text(fraction: f64, replications: u32) -> String {
    default_text()
        .replace("population_fraction = 0.01", &format!("population_fraction = {fraction}"))
        .replace("replications = 100", &format!("replications = {replications}"))
}
