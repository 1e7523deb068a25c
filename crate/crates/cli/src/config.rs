//! Run configuration: one JSON document, optionally recovered from the
//! header of an earlier output, with `--set` overrides applied on top.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use sivstrain_core::devicemodel::BeamSurrogate;
use sivstrain_core::fitkit::{ElasticModuli, HrPair};
use sivstrain_core::phononkinetics::RateModel;
use sivstrain_core::spincoupling::{AcDirection, MechanicalMode};
use sivstrain_core::{transform_field, transform_strain, Frame, LevelModel, MagneticField, Orientation, StrainTensor};

use crate::{CliError, CliResult};

/// Prefix of the header line carrying the resolved configuration.
pub const CONFIG_LINE: &str = "# config: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Frame of a vector or tensor given in the config; `defect` means the
/// configured orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFrame {
    #[default]
    Crystal,
    Defect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub tesla: [f64; 3],
    pub frame: InputFrame,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            tesla: [0.0; 3],
            frame: InputFrame::Crystal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrainConfig {
    pub frame: InputFrame,
    /// `(xx, yy, zz, yz, zx, xy)`.
    pub components: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Ground-state orbital splitting produced by pure `E_gx` strain, GHz.
    #[default]
    DeltaGs,
    /// Actuator voltage through the trajectory file or the beam surrogate.
    Voltage,
    /// Multiple of the configured strain tensor.
    StrainScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            variable: SweepVariable::DeltaGs,
            start: 46.0,
            stop: 460.0,
            steps: 50,
        }
    }
}

impl SweepConfig {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        if self.steps == 0 {
            return Err(CliError::compute("invalid-parameter", "sweep.steps must be at least 1"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::compute("invalid-parameter", "sweep bounds must be finite"));
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / n)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStage {
    #[default]
    All,
    TPar,
    D,
    TPerp,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub stage: FitStage,
    pub axial_orientation: Orientation,
    pub transverse_orientation: Orientation,
    /// Gaussian jitter added to every line, GHz. Applied to loaded and
    /// generated spectra alike.
    pub noise_ghz: f64,
    /// Points per generated sweep when no spectra files are given.
    pub steps: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            stage: FitStage::All,
            axial_orientation: Orientation::Ppp,
            transverse_orientation: Orientation::Mpp,
            noise_ghz: 0.0,
            steps: 21,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    /// Spin splitting used for the T1 channels, GHz.
    pub omega_s: f64,
    /// `c` in `d_flip / d = min(c / Delta_gs, 1)`, GHz.
    pub flip_scale: f64,
    pub d_spin_over_d: f64,
    pub dephasing_floor: f64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig {
            omega_s: 4.0,
            flip_scale: 37.7,
            d_spin_over_d: 0.085,
            dephasing_floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingConfig {
    pub mode: MechanicalMode,
    /// Spin dephasing rate, GHz.
    pub gamma_spin: f64,
    /// Fixed `d_spin` (GHz/strain) in place of the computed one.
    pub d_spin_override: Option<f64>,
    pub ac_direction: AcDirection,
    /// Free text copied to the output metadata.
    pub note: String,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig {
            mode: MechanicalMode {
                frequency: 5.0,
                quality_factor: 1e3,
                eps_zpf: 8e-9,
                n_th: 0.0,
            },
            gamma_spin: 1e-7,
            d_spin_override: None,
            ac_direction: AcDirection::Egx,
            note: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    pub trajectory: Option<PathBuf>,
    pub axial_spectra: Option<PathBuf>,
    pub transverse_spectra: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: LevelModel,
    pub rate: RateModel,
    pub field: FieldConfig,
    pub orientation: Orientation,
    pub strain: StrainConfig,
    pub sweep: SweepConfig,
    pub beam: BeamSurrogate,
    pub moduli: ElasticModuli,
    pub hr: HrPair,
    pub fit: FitConfig,
    pub rates: RatesConfig,
    pub coupling: CouplingConfig,
    pub io: IoConfig,
    pub seed: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: LevelModel::default(),
            rate: RateModel::default(),
            field: FieldConfig::default(),
            orientation: Orientation::Mpp,
            strain: StrainConfig::default(),
            sweep: SweepConfig::default(),
            beam: BeamSurrogate::default(),
            moduli: ElasticModuli::default(),
            hr: HrPair::default(),
            fit: FitConfig::default(),
            rates: RatesConfig::default(),
            coupling: CouplingConfig::default(),
            io: IoConfig::default(),
            seed: 0,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn defect_frame(&self) -> Frame {
        Frame::Defect(self.orientation)
    }

    fn input_frame(&self, frame: InputFrame) -> Frame {
        match frame {
            InputFrame::Crystal => Frame::Crystal,
            InputFrame::Defect => self.defect_frame(),
        }
    }

    /// The configured field in the defect frame.
    pub fn defect_field(&self) -> CliResult<MagneticField> {
        let [x, y, z] = self.field.tesla;
        let f = MagneticField::new(Vector3::new(x, y, z), self.input_frame(self.field.frame))?;
        Ok(transform_field(&f, self.defect_frame()))
    }

    /// The configured strain in the defect frame.
    pub fn defect_strain(&self) -> CliResult<StrainTensor> {
        let e = StrainTensor::new(self.strain.components, self.input_frame(self.strain.frame))?;
        Ok(transform_strain(&e, self.defect_frame()))
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> CliResult<()> {
        self.model.validate()?;
        self.rate.validate()?;
        self.beam.validate()?;
        self.moduli.validate()?;
        self.defect_field()?;
        self.defect_strain()?;
        self.sweep.points()?;
        Ok(())
    }

    /// Canonical single-line JSON used in output headers.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.io.trajectory,
            &mut self.io.axial_spectra,
            &mut self.io.transverse_spectra,
        ]
        .into_iter()
        .flatten()
        {
            if p.as_os_str() != "-" && p.is_relative() {
                *p = absolute(&base.join(&*p));
            }
        }
    }
}

fn absolute(p: &Path) -> PathBuf {
    let joined = if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir()
            .map(|d| d.join(p))
            .unwrap_or_else(|_| p.to_path_buf())
    };
    // lexical normalization only; the file may not exist yet
    let mut out = PathBuf::new();
    for c in joined.components() {
        match c {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    out
}

/// Pulls the config document out of a plain JSON file, a JSON output
/// (`config_echo`), or a CSV output (`# config:` header line).
pub fn extract_document(text: &str) -> CliResult<Value> {
    if text.trim_start().starts_with('{') {
        let mut v: Value = serde_json::from_str(text).map_err(|e| CliError::usage("config-parse", e.to_string()))?;
        if let Some(echo) = v.get_mut("config_echo") {
            return Ok(echo.take());
        }
        return Ok(v);
    }
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(CONFIG_LINE) {
            return serde_json::from_str(rest).map_err(|e| CliError::usage("config-parse", e.to_string()));
        }
        if !line.starts_with('#') {
            break;
        }
    }
    Err(CliError::usage(
        "config-parse",
        "expected a JSON document or an output file with an embedded config",
    ))
}

/// Applies `key.path=value`; the value is parsed as JSON and falls back to a
/// plain string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::usage("usage", format!("--set expects key=value, got `{assignment}`")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::usage("usage", format!("empty segment in `{key}`")));
        }
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        let map = node.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            map.insert((*part).to_owned(), value);
            return Ok(());
        }
        node = map.entry(*part).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Loads and resolves the run configuration. Relative input paths are
/// taken relative to the config file's directory.
pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<RunConfig> {
    let (mut doc, base) = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::from_io(&e, &p.display().to_string()))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (extract_document(&text)?, base)
        }
        None => (Value::Object(Default::default()), PathBuf::new()),
    };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let mut cfg: RunConfig = serde_json::from_value(doc).map_err(|e| CliError::usage("config-parse", e.to_string()))?;
    cfg.resolve_paths(&absolute(&base));
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_echo() {
        let cfg = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&cfg.echo()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.echo(), cfg.echo());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"modle": {}}"#).unwrap_err();
        assert!(err.to_string().contains("modle"));
        assert!(serde_json::from_str::<RunConfig>(r#"{"rate": {"temp": 4}}"#).is_err());
    }

    #[test]
    fn overrides_create_nested_keys() {
        let mut doc = serde_json::json!({});
        apply_override(&mut doc, "rate.temperature=0.1").unwrap();
        apply_override(&mut doc, r#"orientation="[111]""#).unwrap();
        let cfg: RunConfig = serde_json::from_value(doc).unwrap();
        assert_eq!(cfg.rate.temperature, 0.1);
        assert_eq!(cfg.orientation, Orientation::Ppp);
    }

    #[test]
    fn embedded_config_is_found_in_csv_headers() {
        let text = format!("# sivstrain spectrum 0.1.0\n{CONFIG_LINE}{{\"seed\":7}}\nlabel\n");
        assert_eq!(extract_document(&text).unwrap()["seed"], 7);
        let json = r#"{"command":"fit","config_echo":{"seed":3}}"#;
        assert_eq!(extract_document(json).unwrap()["seed"], 3);
    }

    #[test]
    fn sweep_points_include_both_ends() {
        let s = SweepConfig {
            start: 1.0,
            stop: 2.0,
            steps: 3,
            ..Default::default()
        };
        assert_eq!(s.points().unwrap(), vec![1.0, 1.5, 2.0]);
    }
}
