//! Initial cohort construction and ageing.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HealthState, Stage, CYCLES_PER_YEAR, MIN_AGE};

/// Oldest age drawn for the open-ended top band.
pub const OPEN_BAND_MAX_AGE: u32 = 99;

/// An inclusive age range such as `25-29`, or an open range such as `85+`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgeBand {
    pub lo: u32,
    /// `None` for an open-ended band.
    pub hi: Option<u32>,
}

impl AgeBand {
    /// Upper age used when drawing ages uniformly within the band.
    pub fn sampling_max(&self) -> u32 {
        self.hi.unwrap_or(OPEN_BAND_MAX_AGE.max(self.lo))
    }
}

impl FromStr for AgeBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("invalid age band {s:?}; expected e.g. \"25-29\" or \"85+\""));
        if let Some(lo) = s.strip_suffix('+') {
            let lo = lo.trim().parse().map_err(|_| bad())?;
            return Ok(AgeBand { lo, hi: None });
        }
        let (lo, hi) = s.split_once('-').ok_or_else(bad)?;
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        Ok(AgeBand { lo, hi: Some(hi) })
    }
}

impl fmt::Display for AgeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "{}-{}", self.lo, hi),
            None => write!(f, "{}+", self.lo),
        }
    }
}

/// Women per age band; the bands tile every age from 25 upwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeBandTable {
    rows: Vec<(AgeBand, u64)>,
}

impl AgeBandTable {
    pub fn new(mut rows: Vec<(AgeBand, u64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::config("age table has no rows"));
        }
        rows.sort_by_key(|r| r.0.lo);
        if rows[0].0.lo != MIN_AGE {
            return Err(Error::config(format!("age table must start at {MIN_AGE}, starts at {}", rows[0].0.lo)));
        }
        for w in rows.windows(2) {
            match w[0].0.hi {
                Some(hi) if hi + 1 == w[1].0.lo => {}
                _ => {
                    return Err(Error::config(format!(
                        "age bands {} and {} are not contiguous",
                        w[0].0, w[1].0
                    )))
                }
            }
        }
        if rows[rows.len() - 1].0.hi.is_some() {
            return Err(Error::config("the last age band must be open-ended (e.g. \"85+\")"));
        }
        Ok(AgeBandTable { rows })
    }

    pub fn rows(&self) -> &[(AgeBand, u64)] {
        &self.rows
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.1).sum()
    }
}

/// Diseased women per band, stage and diagnosis status.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiseaseRow {
    pub band: AgeBand,
    pub diagnosed: [u64; 4],
    pub undiagnosed: [u64; 4],
}

impl DiseaseRow {
    pub fn total(&self) -> u64 {
        self.diagnosed.iter().chain(&self.undiagnosed).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialDiseaseTable {
    rows: Vec<DiseaseRow>,
}

impl InitialDiseaseTable {
    /// Undiagnosed stage-I counts must equal diagnosed stage-I counts in every band.
    pub fn new(rows: Vec<DiseaseRow>) -> Result<Self> {
        for row in &rows {
            if row.undiagnosed[0] != row.diagnosed[0] {
                return Err(Error::config(format!(
                    "band {}: undiagnosed stage-I count {} differs from diagnosed stage-I count {}",
                    row.band, row.undiagnosed[0], row.diagnosed[0]
                )));
            }
        }
        Ok(InitialDiseaseTable { rows })
    }

    pub fn rows(&self) -> &[DiseaseRow] {
        &self.rows
    }

    pub fn row(&self, band: AgeBand) -> Option<&DiseaseRow> {
        self.rows.iter().find(|r| r.band == band)
    }

    /// Every disease band must exist in the age table and fit within its population.
    pub fn check_against(&self, ages: &AgeBandTable) -> Result<()> {
        for row in &self.rows {
            let pop = ages
                .rows()
                .iter()
                .find(|(b, _)| *b == row.band)
                .map(|r| r.1)
                .ok_or_else(|| Error::config(format!("disease band {} is not in the age table", row.band)))?;
            if row.total() > pop {
                return Err(Error::config(format!(
                    "band {}: {} diseased women exceed the band population {pop}",
                    row.band,
                    row.total()
                )));
            }
        }
        Ok(())
    }
}

/// One simulated woman.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub age: u32,
    pub state: HealthState,
    /// Cycles since entering `state`; zero right after any change.
    pub cycles_in_state: u32,
}

impl Person {
    pub fn new(age: u32, state: HealthState) -> Self {
        Person {
            age,
            state,
            cycles_in_state: 0,
        }
    }
}

/// `round(count * fraction)` with halves rounded up.
pub fn scaled_count(count: u64, fraction: f64) -> u64 {
    // The epsilon keeps exact halves such as 450 * 0.01 from landing on 4.4999...
    (count as f64 * fraction + 0.5 + 1e-9).floor() as u64
}

/// Builds the starting cohort: per band, `round(count * fraction)` women of
/// whom the scaled disease cells are diseased and the rest healthy. Ages are
/// uniform within the band.
pub fn build_initial_cohort<R: Rng + ?Sized>(
    ages: &AgeBandTable,
    disease: &InitialDiseaseTable,
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<Person>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config(format!("population fraction must lie in (0, 1], got {fraction}")));
    }
    disease.check_against(ages)?;
    let mut cohort = Vec::new();
    for &(band, count) in ages.rows() {
        let size = scaled_count(count, fraction);
        let mut cells: Vec<(HealthState, u64)> = Vec::with_capacity(8);
        if let Some(row) = disease.row(band) {
            for stage in Stage::ALL {
                cells.push((HealthState::Diagnosed(stage), scaled_count(row.diagnosed[stage.index()], fraction)));
            }
            for stage in Stage::ALL {
                cells.push((HealthState::Undiagnosed(stage), scaled_count(row.undiagnosed[stage.index()], fraction)));
            }
        }
        let diseased: u64 = cells.iter().map(|c| c.1).sum();
        if diseased > size {
            return Err(Error::config(format!(
                "band {band}: {diseased} scaled diseased persons exceed the scaled band size {size}"
            )));
        }
        cells.push((HealthState::Healthy, size - diseased));
        let hi = band.sampling_max();
        for (state, n) in cells {
            for _ in 0..n {
                cohort.push(Person::new(rng.random_range(band.lo..=hi), state));
            }
        }
    }
    Ok(cohort)
}

/// Whether ages advance at the start of `cycle_index`.
pub fn is_birthday_cycle(cycle_index: u32) -> bool {
    cycle_index > 0 && cycle_index.is_multiple_of(CYCLES_PER_YEAR)
}

/// Every living person ages by one year when `cycle_index` is a positive
/// multiple of 52.
pub fn advance_ages(cohort: &mut [Person], cycle_index: u32) {
    if !is_birthday_cycle(cycle_index) {
        return;
    }
    for p in cohort.iter_mut().filter(|p| p.state.is_alive()) {
        p.age += 1;
    }
}
