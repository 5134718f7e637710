//! The TOML run configuration.
//!
//! See `docs/config.md` for the schema. Input table paths are resolved
//! relative to the configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::tables::{read_age_table, read_disease_table, read_life_table};
use crate::calibration::{
    self, estimate_undiagnosed, lambda_from_survival, project_prevalence, PrevalenceSeries, ScreeningStats, TrendAxis,
};
use crate::engine::{CostParams, Experiment, Scenario, SimulationConfig};
use crate::error::{Error, Result};
use crate::model::{ByPhase, IncidenceTable, Phase, Stage, TransitionParams};
use crate::population::{AgeBandTable, InitialDiseaseTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub simulation: SimulationConfig,
    pub scenario: ScenarioSection,
    pub inputs: InputsSection,
    pub incidence: IncidenceSection,
    pub progression: ProgressionSection,
    pub healing: HealingSection,
    pub death: DeathSection,
    pub diagnosis: DiagnosisSection,
    pub costs: CostParams,
    #[serde(default)]
    pub calibration: Option<CalibrationSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub lockdown_start: u32,
    pub lockdown_end: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsSection {
    pub life_table: PathBuf,
    pub age_table: PathBuf,
    pub disease_table: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceSection {
    pub bands: Vec<(u32, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgressionSection {
    pub k: f64,
    pub lambda_diagnosed: [f64; 4],
    pub lambda_undiagnosed: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HealingSection {
    pub k: f64,
    #[serde(default = "default_horizon")]
    pub horizon_cycles: u32,
    pub dfs5_normal: [f64; 4],
    pub dfs5_lockdown: [f64; 4],
}

fn default_horizon() -> u32 {
    260
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeathSection {
    pub lambda_diagnosed_normal: [f64; 4],
    pub lambda_diagnosed_lockdown: [f64; 4],
    pub lambda_undiagnosed: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosisSection {
    pub annual_normal: f64,
    pub annual_lockdown: f64,
}

/// Source statistics that are reported alongside the fitted parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default)]
    pub prevalence: Vec<(i32, u64)>,
    #[serde(default)]
    pub projection_years: Vec<i32>,
    #[serde(default)]
    pub trend_axis: TrendAxis,
    #[serde(default)]
    pub survival5: Option<[f64; 4]>,
    #[serde(default)]
    pub screening: Option<ScreeningStats>,
}

/// A fully validated configuration with its input tables loaded.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub text: String,
    pub file: ConfigFile,
    pub params: TransitionParams,
    pub ages: AgeBandTable,
    pub disease: InitialDiseaseTable,
}

fn check_unit(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(format!("{field} = {v} must lie in [0, 1]")))
    }
}

fn check_nonneg(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{field} = {v} must be finite and nonnegative")))
    }
}

fn check_each(field: &str, vs: &[f64], check: fn(&str, f64) -> Result<()>) -> Result<()> {
    for (i, &v) in vs.iter().enumerate() {
        check(&format!("{field}[{i}]"), v)?;
    }
    Ok(())
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    /// Range checks on every field, reported by dotted field name.
    pub fn validate(&self) -> Result<()> {
        self.simulation.validate()?;
        let total = self.simulation.total_cycles;
        let (s, e) = (self.scenario.lockdown_start, self.scenario.lockdown_end);
        if s >= e || e > total {
            return Err(Error::config(format!(
                "scenario.lockdown_start = {s}, scenario.lockdown_end = {e}: need start < end <= {total}"
            )));
        }
        for (i, (decade, p)) in self.incidence.bands.iter().enumerate() {
            check_unit(&format!("incidence.bands[{i}] (decade {decade})"), *p)?;
        }
        check_unit("progression.k", self.progression.k)?;
        check_each("progression.lambda_diagnosed", &self.progression.lambda_diagnosed, check_nonneg)?;
        check_each("progression.lambda_undiagnosed", &self.progression.lambda_undiagnosed, check_nonneg)?;
        check_unit("healing.k", self.healing.k)?;
        if self.healing.k == 0.0 {
            return Err(Error::config("healing.k must be positive"));
        }
        if self.healing.horizon_cycles == 0 {
            return Err(Error::config("healing.horizon_cycles must be positive"));
        }
        check_each("healing.dfs5_normal", &self.healing.dfs5_normal, check_unit)?;
        check_each("healing.dfs5_lockdown", &self.healing.dfs5_lockdown, check_unit)?;
        check_each("death.lambda_diagnosed_normal", &self.death.lambda_diagnosed_normal, check_nonneg)?;
        check_each("death.lambda_diagnosed_lockdown", &self.death.lambda_diagnosed_lockdown, check_nonneg)?;
        check_each("death.lambda_undiagnosed", &self.death.lambda_undiagnosed, check_nonneg)?;
        check_unit("diagnosis.annual_normal", self.diagnosis.annual_normal)?;
        check_unit("diagnosis.annual_lockdown", self.diagnosis.annual_lockdown)?;
        for (i, &c) in self.costs.direct_yearly.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::config(format!("costs.direct_yearly[{i}] = {c} must be positive")));
            }
        }
        for (name, c) in [
            ("costs.indirect_death", self.costs.indirect_death),
            ("costs.indirect_other_yearly", self.costs.indirect_other_yearly),
        ] {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::config(format!("{name} = {c} must be positive")));
            }
        }
        if let Some(cal) = &self.calibration {
            if let Some(s5) = &cal.survival5 {
                for (i, &v) in s5.iter().enumerate() {
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(Error::config(format!("calibration.survival5[{i}] = {v} must lie in (0, 1]")));
                    }
                }
            }
            if let Some(scr) = &cal.screening {
                check_unit("calibration.screening.positivity_rate", scr.positivity_rate)?;
                check_unit("calibration.screening.attendance_rate", scr.attendance_rate)?;
            }
        }
        Ok(())
    }

    fn transition_params(&self, life_table: crate::model::LifeTable) -> Result<TransitionParams> {
        let params = TransitionParams {
            incidence: IncidenceTable::new(self.incidence.bands.clone())
                .map_err(|e| Error::config(format!("incidence.bands: {e}")))?,
            life_table,
            progression_k: self.progression.k,
            progression_lambda_diagnosed: self.progression.lambda_diagnosed,
            progression_lambda_undiagnosed: self.progression.lambda_undiagnosed,
            healing_k: self.healing.k,
            healing_horizon_cycles: self.healing.horizon_cycles,
            dfs5: ByPhase::new(self.healing.dfs5_normal, self.healing.dfs5_lockdown),
            healing_lambda: None,
            death_lambda_diagnosed: ByPhase::new(
                self.death.lambda_diagnosed_normal,
                self.death.lambda_diagnosed_lockdown,
            ),
            death_lambda_undiagnosed: self.death.lambda_undiagnosed,
            annual_diagnosis_prob: ByPhase::new(self.diagnosis.annual_normal, self.diagnosis.annual_lockdown),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Reads, parses and validates a configuration and its input tables.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::config(format!("configuration file {} not found", path.display())),
        _ => Error::io(path, e),
    })?;
    let file = ConfigFile::parse(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    file.validate()
        .map_err(|e| Error::config(format!("{}: {}", path.display(), strip_prefix(&e))))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let life_table = read_life_table(&resolve(&file.inputs.life_table))?;
    let ages = read_age_table(&resolve(&file.inputs.age_table))?;
    let disease = read_disease_table(&resolve(&file.inputs.disease_table))?;
    disease.check_against(&ages)?;
    let params = file.transition_params(life_table)?;
    Ok(LoadedConfig {
        path: path.to_path_buf(),
        text,
        file,
        params,
        ages,
        disease,
    })
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) | Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}

impl LoadedConfig {
    /// Calibrates the transition parameters and assembles an experiment.
    pub fn experiment(&self, scenarios: Vec<Scenario>) -> Result<Experiment> {
        Ok(Experiment {
            config: self.file.simulation.clone(),
            params: calibration::calibrate(self.params.clone())?,
            costs: self.file.costs.clone(),
            lockdown_window: (self.file.scenario.lockdown_start, self.file.scenario.lockdown_end),
            ages: self.ages.clone(),
            disease: self.disease.clone(),
            scenarios,
        })
    }

    /// Every fitted and derived parameter, for inspection.
    pub fn calibration_dump(&self, params: &TransitionParams) -> Result<Vec<ParamRow>> {
        let mut rows = Vec::new();
        let mut push = |name: &str, stage: Option<Stage>, phase: Option<Phase>, value: f64| {
            rows.push(ParamRow {
                parameter: name.to_string(),
                stage: stage.map(|s| s.number()),
                phase,
                value,
            })
        };
        let phases = [Phase::Normal, Phase::Lockdown];
        for phase in phases {
            let lockdown = phase == Phase::Lockdown;
            push("diagnosis_annual", None, Some(phase), params.annual_diagnosis_prob[phase]);
            push("diagnosis_per_cycle", None, Some(phase), params.diagnosis_probability(lockdown));
            for stage in Stage::ALL {
                let i = stage.index();
                push("dfs5", Some(stage), Some(phase), params.dfs5[phase][i]);
                if let Some(h) = &params.healing_lambda {
                    push("healing_lambda_per_cycle", Some(stage), Some(phase), h[phase][i]);
                }
                push("death_lambda_diagnosed_per_year", Some(stage), Some(phase), params.death_lambda_diagnosed[phase][i]);
                push(
                    "death_diagnosed_per_cycle",
                    Some(stage),
                    Some(phase),
                    params.cancer_death_probability(stage, true, lockdown),
                );
            }
        }
        for stage in Stage::ALL {
            let i = stage.index();
            push("death_lambda_undiagnosed_per_year", Some(stage), None, params.death_lambda_undiagnosed[i]);
            push("death_undiagnosed_per_cycle", Some(stage), None, params.cancer_death_probability(stage, false, false));
            push("progression_lambda_diagnosed", Some(stage), None, params.progression_lambda_diagnosed[i]);
            push("progression_lambda_undiagnosed", Some(stage), None, params.progression_lambda_undiagnosed[i]);
        }
        push("progression_k", None, None, params.progression_k);
        push("healing_k", None, None, params.healing_k);
        push("healing_horizon_cycles", None, None, f64::from(params.healing_horizon_cycles));
        for &(decade, p) in params.incidence.bands() {
            rows.push(ParamRow {
                parameter: format!("incidence_per_cycle_age_{decade}"),
                stage: None,
                phase: None,
                value: p,
            });
        }
        if let Some(cal) = &self.file.calibration {
            if let Some(s5) = &cal.survival5 {
                for stage in Stage::ALL {
                    rows.push(ParamRow {
                        parameter: "lambda_from_survival_per_year".into(),
                        stage: Some(stage.number()),
                        phase: None,
                        value: lambda_from_survival(s5[stage.index()])?.value(),
                    });
                }
            }
            if cal.prevalence.len() >= 2 && !cal.projection_years.is_empty() {
                let series = PrevalenceSeries::new(cal.prevalence.clone())?;
                let projected = project_prevalence(&series, &cal.projection_years, cal.trend_axis)?;
                for (year, n) in cal.projection_years.iter().zip(projected) {
                    rows.push(ParamRow {
                        parameter: format!("projected_prevalence_{year}"),
                        stage: None,
                        phase: None,
                        value: n as f64,
                    });
                }
            }
            if let Some(scr) = &cal.screening {
                rows.push(ParamRow {
                    parameter: "estimated_undiagnosed".into(),
                    stage: None,
                    phase: None,
                    value: estimate_undiagnosed(scr)? as f64,
                });
            }
        }
        Ok(rows)
    }
}

/// One line of the calibrated-parameter dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub parameter: String,
    pub stage: Option<u8>,
    pub phase: Option<Phase>,
    pub value: f64,
}

pub fn write_param_rows<W: std::io::Write>(rows: &[ParamRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("<params>", std::io::Error::other(e));
    w.write_record(["parameter", "stage", "phase", "value"]).map_err(io)?;
    for r in rows {
        let phase = match r.phase {
            Some(Phase::Normal) => "normal",
            Some(Phase::Lockdown) => "lockdown",
            None => "",
        };
        w.write_record([
            r.parameter.clone(),
            r.stage.map(|s| s.to_string()).unwrap_or_default(),
            phase.to_string(),
            format!("{:.16e}", r.value),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<params>", e))?;
    Ok(())
}
