//! Run configuration: a TOML schema that ties the compiled-in presets and
//! field-level overrides together for the command-line tools.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{CiLoop, Controller, ControllerKind, FeedforwardBank, PidConfig};
use crate::error::{Error, Result};
use crate::plant::PlantModel;
use crate::presets;
use crate::sim::Scenario;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioRef,
    pub plant: PlantRef,
    pub controller: ControllerSpec,
    /// Index weights for comparisons; defaults to the reconstructed
    /// benchmark weights when absent.
    pub weights: Option<[f64; 8]>,
}

/// Scenario source: a named preset or a TOML file, plus grid overrides.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioRef {
    pub preset: Option<String>,
    pub file: Option<String>,
    pub ts: Option<f64>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantRef {
    pub preset: String,
}

impl Default for PlantRef {
    fn default() -> Self {
        PlantRef { preset: "pid2018-surrogate".into() }
    }
}

/// Which feedforward bank a C2/C3 controller carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FfChoice {
    /// Synthesized from the plant's own disturbance and channel models.
    #[default]
    Synthesized,
    /// The published filter coefficients ("paper-ff").
    Paper,
}

impl std::str::FromStr for FfChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "synthesized" => Ok(FfChoice::Synthesized),
            "paper" | "paper-ff" => Ok(FfChoice::Paper),
            other => Err(Error::Config(format!("unknown feedforward bank '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PidOverride {
    pub kp: Option<f64>,
    pub ti: Option<f64>,
    pub td: Option<f64>,
    pub n_filter: Option<f64>,
}

impl PidOverride {
    fn apply(&self, base: &mut PidConfig) {
        if let Some(v) = self.kp {
            base.kp = v;
        }
        if let Some(v) = self.ti {
            base.ti = v;
        }
        if let Some(v) = self.td {
            base.td = v;
        }
        if let Some(v) = self.n_filter {
            base.n_filter = v;
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CiOverride {
    pub delta: Option<f64>,
    pub w: Option<f64>,
}

impl CiOverride {
    pub(crate) fn apply(&self, base: &mut CiLoop) {
        if let Some(v) = self.delta {
            base.cfg.delta = v;
        }
        if let Some(v) = self.w {
            base.cfg.w = v;
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    pub ff: FfChoice,
    pub enable_f12: bool,
    pub pid1: PidOverride,
    pub pid2: PidOverride,
    pub ci1: CiOverride,
    pub ci2: CiOverride,
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let scenario: Scenario =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    scenario.validate()?;
    Ok(scenario)
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<Scenario> {
        let mut scenario = match (&self.preset, &self.file) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "scenario preset and file are mutually exclusive".into(),
                ))
            }
            (None, Some(file)) => load_scenario_file(Path::new(file))?,
            (Some(name), None) => match name.as_str() {
                "pid2018-default" => presets::scenario_default(),
                other => return Err(Error::Config(format!("unknown scenario preset '{other}'"))),
            },
            (None, None) => presets::scenario_default(),
        };
        if let Some(ts) = self.ts {
            scenario.ts = ts;
        }
        if let Some(horizon) = self.horizon {
            scenario.horizon = horizon;
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

impl PlantRef {
    pub fn resolve(&self) -> Result<PlantModel> {
        match self.preset.as_str() {
            "pid2018-surrogate" => Ok(presets::plant_surrogate()),
            other => Err(Error::Config(format!("unknown plant preset '{other}'"))),
        }
    }
}

impl ControllerSpec {
    fn bank(&self, model: &PlantModel, ts: f64) -> Result<FeedforwardBank> {
        let mut bank = match self.ff {
            FfChoice::Synthesized => presets::ff_bank_default(model, ts)?,
            FfChoice::Paper => presets::ff_bank_paper(ts, presets::F22Reading::Minus),
        };
        bank.enable_f12 = self.enable_f12;
        Ok(bank)
    }

    pub fn build(&self, model: &PlantModel, ts: f64) -> Result<Controller> {
        let (mut pid1, mut pid2) = presets::pid_c1_default(ts, &model.limits);
        self.pid1.apply(&mut pid1);
        self.pid2.apply(&mut pid2);
        let ff = match self.kind {
            ControllerKind::C1 => None,
            _ => Some(self.bank(model, ts)?),
        };
        let ci = match self.kind {
            ControllerKind::C3 => {
                let (mut ci1, mut ci2) = presets::ci_default(ts);
                self.ci1.apply(&mut ci1);
                self.ci2.apply(&mut ci2);
                Some((ci1, ci2))
            }
            _ => None,
        };
        Controller::compose(self.kind, pid1, pid2, ff, ci)
    }
}

impl RunConfig {
    pub fn weights(&self) -> Result<crate::metrics::IndexWeights> {
        match self.weights {
            Some(w) => crate::metrics::IndexWeights::new(w),
            None => Ok(crate::metrics::IndexWeights::reconstructed()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_builds() {
        let cfg = RunConfig::default();
        let scenario = cfg.scenario.resolve().unwrap();
        let model = cfg.plant.resolve().unwrap();
        let controller = cfg.controller.build(&model, scenario.ts).unwrap();
        assert_eq!(controller.kind(), ControllerKind::C1);
    }

    #[test]
    fn toml_round_trip_with_overrides() {
        let text = r#"
            [scenario]
            horizon = 1500.0

            [controller]
            kind = "C3"
            ff = "paper"
            [controller.pid2]
            kp = 2.5
            [controller.ci2]
            w = 0.25
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.controller.kind, ControllerKind::C3);
        assert_eq!(cfg.controller.ff, FfChoice::Paper);
        let scenario = cfg.scenario.resolve().unwrap();
        assert_eq!(scenario.horizon, 1500.0);
        let model = cfg.plant.resolve().unwrap();
        cfg.controller.build(&model, scenario.ts).unwrap();
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err = toml::from_str::<RunConfig>("[controler]\nkind = \"C1\"\n").unwrap_err();
        assert!(err.to_string().contains("controler"));
    }

    #[test]
    fn unknown_presets_are_rejected() {
        let cfg: RunConfig = toml::from_str("[plant]\npreset = \"nope\"\n").unwrap();
        assert!(cfg.plant.resolve().is_err());
        let cfg: RunConfig = toml::from_str("[scenario]\npreset = \"nope\"\n").unwrap();
        assert!(cfg.scenario.resolve().is_err());
    }

    #[test]
    fn scenario_file_round_trip() {
        let scenario = presets::scenario_default();
        let text = toml::to_string(&scenario).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.toml");
        std::fs::write(&path, text).unwrap();
        let loaded = load_scenario_file(&path).unwrap();
        assert_eq!(loaded, scenario);
    }
}
