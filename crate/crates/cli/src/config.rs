//! JSON run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use piezobeam::{load_materials, table1, Layup, Material};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::sci;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error(transparent)]
    Material(#[from] piezobeam::MaterialError),
    #[error(transparent)]
    Section(#[from] piezobeam::SectionError),
}

fn field_error(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Span length: fixed, or calibrated so that one mode hits a target frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Fixed(#[serde(serialize_with = "sci")] f64),
    Calibrate {
        #[serde(serialize_with = "sci")]
        calibrate: f64,
        #[serde(default = "default_calibration_mode")]
        mode: usize,
    },
}

fn default_calibration_mode() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FemConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_n_elems")]
    pub n_elems: usize,
    #[serde(default)]
    pub include_rho1: bool,
    /// Mesh sequence for `fem-report`.
    #[serde(default = "default_meshes")]
    pub meshes: Vec<usize>,
}

fn default_n_elems() -> usize {
    64
}

fn default_meshes() -> Vec<usize> {
    vec![16, 32, 64, 128, 256]
}

impl Default for FemConfig {
    fn default() -> Self {
        FemConfig {
            enabled: false,
            n_elems: default_n_elems(),
            include_rho1: false,
            meshes: default_meshes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVary {
    /// `h2` held at its configured value, `h1 = ratio * h2`.
    H1FixedH2,
    /// `h1 + h2` held at its configured value.
    FixedTotal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_ratio_min", serialize_with = "sci")]
    pub ratio_min: f64,
    #[serde(default = "default_ratio_max", serialize_with = "sci")]
    pub ratio_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_vary")]
    pub vary: SweepVary,
}

fn default_ratio_min() -> f64 {
    0.2
}

fn default_ratio_max() -> f64 {
    1.4
}

fn default_steps() -> usize {
    13
}

fn default_vary() -> SweepVary {
    SweepVary::H1FixedH2
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            ratio_min: default_ratio_min(),
            ratio_max: default_ratio_max(),
            steps: default_steps(),
            vary: default_vary(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

/// Which frequency the `compare` command reports against the reference list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareModel {
    ClosedForm,
    SixthOrder,
    Fem,
}

/// Denominator of the error column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorBase {
    /// `|f_model - f_ref| / f_model`
    Model,
    /// `|f_model - f_ref| / f_ref`
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default)]
    pub reference_hz: Vec<f64>,
    #[serde(default = "default_compare_model")]
    pub model: CompareModel,
    #[serde(default = "default_error_base")]
    pub relative_to: ErrorBase,
}

fn default_compare_model() -> CompareModel {
    CompareModel::ClosedForm
}

fn default_error_base() -> ErrorBase {
    ErrorBase::Model
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            reference_hz: Vec::new(),
            model: default_compare_model(),
            relative_to: default_error_base(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Material database; the built-in PZT-5A / glass table when absent.
    /// Relative paths resolve against the config file's directory.
    #[serde(default)]
    pub material_file: Option<PathBuf>,
    pub piezo: String,
    pub substrate: String,
    #[serde(serialize_with = "sci")]
    pub h1: f64,
    #[serde(serialize_with = "sci")]
    pub h2: f64,
    #[serde(alias = "L")]
    pub length: LengthSpec,
    pub modes: Vec<usize>,
    #[serde(default)]
    pub fem: FemConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [("h1", self.h1), ("h2", self.h2)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(field_error(
                    field,
                    format!("thickness must be positive, got {value:e}"),
                ));
            }
        }
        match self.length {
            LengthSpec::Fixed(l) if !(l > 0.0 && l.is_finite()) => {
                return Err(field_error(
                    "length",
                    format!("must be positive, got {l:e}"),
                ));
            }
            LengthSpec::Calibrate { calibrate, mode } => {
                if !(calibrate > 0.0 && calibrate.is_finite()) {
                    return Err(field_error(
                        "length.calibrate",
                        format!("target frequency must be positive, got {calibrate:e}"),
                    ));
                }
                if mode == 0 {
                    return Err(field_error("length.mode", "mode numbers start at 1"));
                }
            }
            _ => {}
        }
        if self.modes.is_empty() {
            return Err(field_error("modes", "at least one mode is required"));
        }
        if let Some(i) = self.modes.iter().position(|&m| m == 0) {
            return Err(field_error(
                format!("modes[{i}]"),
                "mode numbers start at 1",
            ));
        }
        if self.fem.n_elems < 2 {
            return Err(field_error(
                "fem.n_elems",
                format!("needs at least 2 elements, got {}", self.fem.n_elems),
            ));
        }
        if self.fem.meshes.is_empty() || self.fem.meshes.iter().any(|&n| n < 2) {
            return Err(field_error(
                "fem.meshes",
                "needs at least one mesh, each with 2 or more elements",
            ));
        }
        if self.fem.meshes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(field_error("fem.meshes", "must be strictly ascending"));
        }
        let s = &self.sweep;
        if !(s.ratio_min > 0.0 && s.ratio_min.is_finite() && s.ratio_max.is_finite()) {
            return Err(field_error(
                "sweep.ratio_min",
                "must be positive and finite",
            ));
        }
        if s.ratio_min >= s.ratio_max {
            return Err(field_error(
                "sweep.ratio_max",
                format!("must exceed ratio_min ({} >= {})", s.ratio_min, s.ratio_max),
            ));
        }
        if s.steps < 2 {
            return Err(field_error(
                "sweep.steps",
                format!("needs at least 2 points, got {}", s.steps),
            ));
        }
        if let Some(i) = self
            .compare
            .reference_hz
            .iter()
            .position(|f| !(*f > 0.0 && f.is_finite()))
        {
            return Err(field_error(
                format!("compare.reference_hz[{i}]"),
                "must be positive",
            ));
        }
        Ok(())
    }

    pub fn materials(&self) -> Result<BTreeMap<String, Material>, ConfigError> {
        match &self.material_file {
            None => Ok(table1()),
            Some(path) => {
                let resolved = match &self.base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Ok(load_materials(resolved)?)
            }
        }
    }

    /// Builds the layup for thicknesses `h1`, `h2` and span `length`.
    pub fn layup_with(&self, h1: f64, h2: f64, length: f64) -> Result<Layup, ConfigError> {
        let db = self.materials()?;
        let pick = |field: &str, name: &str| {
            db.get(name).ok_or_else(|| {
                let known: Vec<&str> = db.keys().map(String::as_str).collect();
                field_error(
                    field,
                    format!("unknown material `{name}` (known: {})", known.join(", ")),
                )
            })
        };
        let piezo = pick("piezo", &self.piezo)?;
        let substrate = pick("substrate", &self.substrate)?;
        Ok(Layup::from_materials(piezo, substrate, h1, h2, length)?)
    }

    /// Thicknesses at one sweep ratio `h1 / h2`.
    pub fn sweep_thicknesses(&self, ratio: f64) -> (f64, f64) {
        match self.sweep.vary {
            SweepVary::H1FixedH2 => (ratio * self.h2, self.h2),
            SweepVary::FixedTotal => {
                let h2 = (self.h1 + self.h2) / (1.0 + ratio);
                (ratio * h2, h2)
            }
        }
    }

    /// Uniform ratio grid including both ends.
    pub fn sweep_ratios(&self) -> Vec<f64> {
        let s = &self.sweep;
        let step = (s.ratio_max - s.ratio_min) / (s.steps - 1) as f64;
        (0..s.steps)
            .map(|i| {
                if i + 1 == s.steps {
                    s.ratio_max
                } else {
                    s.ratio_min + step * i as f64
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"piezo": "PZT-5A", "substrate": "glass", "h1": 200e-6, "h2": 500e-6,
                           "length": 6e-3, "modes": [1, 3, 5]}"#;

    fn with(patch: &str) -> Result<RunConfig, ConfigError> {
        let mut value: serde_json::Value = serde_json::from_str(BASE).unwrap();
        let patch: serde_json::Value = serde_json::from_str(patch).unwrap();
        for (k, v) in patch.as_object().unwrap() {
            value[k] = v.clone();
        }
        RunConfig::from_json(&value.to_string())
    }

    #[test]
    fn defaults() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.length, LengthSpec::Fixed(6e-3));
        assert_eq!(c.sweep.steps, 13);
        assert_eq!(c.sweep.vary, SweepVary::H1FixedH2);
        assert!(!c.fem.enabled);
        assert_eq!(c.compare.relative_to, ErrorBase::Model);
        assert_eq!(c.sweep_ratios().len(), 13);
        assert_eq!(*c.sweep_ratios().last().unwrap(), 1.4);
    }

    #[test]
    fn calibrate_length_form() {
        let c = with(r#"{"length": {"calibrate": 45200}}"#).unwrap();
        assert_eq!(
            c.length,
            LengthSpec::Calibrate {
                calibrate: 45200.0,
                mode: 1
            }
        );
        let c = with(r#"{"L": {"calibrate": 45200, "mode": 3}}"#);
        assert!(c.is_err(), "both length and L present");
    }

    #[test]
    fn field_level_errors() {
        let cases = [
            (r#"{"modes": []}"#, "modes"),
            (r#"{"modes": [1, 0]}"#, "modes[1]"),
            (r#"{"h1": -1}"#, "h1"),
            (r#"{"length": {"calibrate": 0}}"#, "length.calibrate"),
            (
                r#"{"sweep": {"ratio_min": 1.4, "ratio_max": 0.2}}"#,
                "sweep.ratio_max",
            ),
            (r#"{"sweep": {"steps": 1}}"#, "sweep.steps"),
            (r#"{"fem": {"n_elems": 1}}"#, "fem.n_elems"),
            (r#"{"fem": {"meshes": [32, 16]}}"#, "fem.meshes"),
        ];
        for (patch, field) in cases {
            let err = with(patch).unwrap_err();
            assert!(
                err.to_string().contains(&format!("`{field}`")),
                "{patch}: {err}"
            );
        }
    }

    #[test]
    fn unknown_material_lists_known_names() {
        let c = with(r#"{"substrate": "silicon"}"#).unwrap();
        let err = c.layup_with(1e-4, 1e-4, 1e-2).unwrap_err().to_string();
        assert!(err.contains("silicon") && err.contains("glass"), "{err}");
    }

    #[test]
    fn sweep_thickness_modes() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.sweep_thicknesses(1.0), (500e-6, 500e-6));
        let c = with(r#"{"sweep": {"vary": "fixed_total"}}"#).unwrap();
        let (h1, h2) = c.sweep_thicknesses(0.4);
        assert!((h1 + h2 - 700e-6).abs() < 1e-15);
        assert!((h1 / h2 - 0.4).abs() < 1e-12);
    }
}
