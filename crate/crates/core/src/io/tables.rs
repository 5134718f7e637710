//! CSV ingestion for the life table, age table and initial disease table.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::LifeTable;
use crate::population::{AgeBand, AgeBandTable, DiseaseRow, InitialDiseaseTable};

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file))
}

fn check_header(path: &Path, reader: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> Result<()> {
    let headers = reader
        .headers()
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?
        .clone();
    let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if got.len() < expected.len() || got.iter().zip(expected).any(|(g, e)| g != e) {
        return Err(Error::config(format!(
            "{}: header must start with {:?}, found {:?}",
            path.display(),
            expected,
            got
        )));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record
        .get(idx)
        .ok_or_else(|| Error::config(format!("{}:{line}: missing column `{name}`", path.display())))?;
    let cleaned: String = raw.chars().filter(|c| *c != ',' && *c != '_' && !c.is_whitespace()).collect();
    cleaned
        .parse()
        .map_err(|_| Error::config(format!("{}:{line}: column `{name}` has invalid value {raw:?}", path.display())))
}

/// Two columns: `age`, `death_probability` (annual).
pub fn read_life_table(path: &Path) -> Result<LifeTable> {
    let mut reader = open(path)?;
    check_header(path, &mut reader, &["age", "death_probability"])?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        rows.push((
            field::<u32>(path, &record, 0, "age")?,
            field::<f64>(path, &record, 1, "death_probability")?,
        ));
    }
    LifeTable::new(rows).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

/// Columns: `age` (band label), `women`, optionally `percent` (ignored).
pub fn read_age_table(path: &Path) -> Result<AgeBandTable> {
    let mut reader = open(path)?;
    check_header(path, &mut reader, &["age", "women"])?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let band: AgeBand = field(path, &record, 0, "age")?;
        rows.push((band, field::<u64>(path, &record, 1, "women")?));
    }
    AgeBandTable::new(rows).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

pub const DISEASE_COLUMNS: [&str; 9] = [
    "age",
    "diagnosed_1",
    "diagnosed_2",
    "diagnosed_3",
    "diagnosed_4",
    "undiagnosed_1",
    "undiagnosed_2",
    "undiagnosed_3",
    "undiagnosed_4",
];

/// Columns: `age`, `diagnosed_1..4`, `undiagnosed_1..4`.
pub fn read_disease_table(path: &Path) -> Result<InitialDiseaseTable> {
    let mut reader = open(path)?;
    check_header(path, &mut reader, &DISEASE_COLUMNS)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let band: AgeBand = field(path, &record, 0, "age")?;
        let mut diagnosed = [0u64; 4];
        let mut undiagnosed = [0u64; 4];
        for i in 0..4 {
            diagnosed[i] = field(path, &record, 1 + i, DISEASE_COLUMNS[1 + i])?;
            undiagnosed[i] = field(path, &record, 5 + i, DISEASE_COLUMNS[5 + i])?;
        }
        rows.push(DiseaseRow {
            band,
            diagnosed,
            undiagnosed,
        });
    }
    InitialDiseaseTable::new(rows).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}
