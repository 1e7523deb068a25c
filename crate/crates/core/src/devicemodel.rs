//! Actuator voltage to defect-site strain: a quadratic uniaxial-beam
//! surrogate, piecewise-linear ingestion of externally computed strain
//! trajectories, and the spectra loader.
//!
//! CSV inputs are UTF-8 with `.` decimals and `#` comment lines. Strain
//! trajectories use the header `control_v,exx,eyy,ezz,eyz,ezx,exy` (crystal
//! frame). Spectra use `control_v,line_A,line_B,line_C,line_D` or
//! `control_v,line_C1,line_C2,line_C3,line_C4`, optionally followed by the
//! six strain columns (defect frame).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitkit::{SpectraRow, SpectraSeries};
use crate::levels::LineLabel;
use crate::tensorframes::{Frame, StrainTensor};

pub const STRAIN_COLUMNS: [&str; 6] = ["exx", "eyy", "ezz", "eyz", "ezx", "exy"];
const ZERO_FIELD_LINES: [(&str, LineLabel); 4] = [
    ("line_A", LineLabel::A),
    ("line_B", LineLabel::B),
    ("line_C", LineLabel::C),
    ("line_D", LineLabel::D),
];
const QUADRUPLET_LINES: [(&str, LineLabel); 4] = [
    ("line_C1", LineLabel::C1),
    ("line_C2", LineLabel::C2),
    ("line_C3", LineLabel::C3),
    ("line_C4", LineLabel::C4),
];

/// Calibration stand-in for the actuator: `e = k V^2 (n n^T - nu (I - n n^T))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSurrogate {
    /// Strain per volt squared.
    pub gain: f64,
    /// Crystal-frame load direction; normalized on use.
    pub load_axis: Vector3<f64>,
    pub poisson: f64,
}

impl Default for BeamSurrogate {
    fn default() -> Self {
        BeamSurrogate {
            gain: 2.5e-9,
            load_axis: Vector3::new(1.0, 1.0, 0.0),
            poisson: 0.1,
        }
    }
}

impl BeamSurrogate {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain.is_finite() && self.gain >= 0.0) {
            return Err(Error::invalid("gain", format!("must be >= 0, got {}", self.gain)));
        }
        if !(0.0..0.5).contains(&self.poisson) {
            return Err(Error::invalid(
                "poisson",
                format!("must lie in [0, 0.5), got {}", self.poisson),
            ));
        }
        let n = self.load_axis.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid("load_axis", "must be a nonzero finite vector"));
        }
        Ok(())
    }
}

/// Crystal-frame strain produced by the surrogate at `volts`.
pub fn surrogate_strain(volts: f64, beam: &BeamSurrogate) -> Result<StrainTensor> {
    if !volts.is_finite() {
        return Err(Error::NonFinite("voltage"));
    }
    beam.validate()?;
    let n = beam.load_axis.normalize();
    let nn = n * n.transpose();
    let shape = nn - (Matrix3::identity() - nn) * beam.poisson;
    StrainTensor::from_matrix(&(shape * (beam.gain * volts * volts)), Frame::Crystal)
}

/// Crystal-frame strain at a sequence of control voltages.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainTrajectory {
    controls: Vec<f64>,
    strains: Vec<StrainTensor>,
}

impl StrainTrajectory {
    pub fn new(rows: Vec<(f64, StrainTensor)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Underdetermined { rows: 0, needed: 1 });
        }
        let mut controls = Vec::with_capacity(rows.len());
        let mut strains = Vec::with_capacity(rows.len());
        for (i, (v, e)) in rows.into_iter().enumerate() {
            if e.frame() != Frame::Crystal {
                return Err(Error::FrameMismatch {
                    expected: Frame::Crystal.to_string(),
                    found: e.frame(),
                });
            }
            if let Some(&prev) = controls.last() {
                if v <= prev {
                    return Err(Error::NonMonotonic {
                        row: i + 1,
                        value: v,
                        previous: prev,
                    });
                }
            }
            controls.push(v);
            strains.push(e);
        }
        Ok(StrainTrajectory { controls, strains })
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn controls(&self) -> &[f64] {
        &self.controls
    }

    pub fn strains(&self) -> &[StrainTensor] {
        &self.strains
    }

    pub fn range(&self) -> (f64, f64) {
        (self.controls[0], *self.controls.last().unwrap())
    }
}

/// Linear interpolation between the bracketing knots; outside the sampled
/// range is an error.
pub fn strain_at(traj: &StrainTrajectory, volts: f64) -> Result<StrainTensor> {
    let (low, high) = traj.range();
    if !(volts >= low && volts <= high) {
        return Err(Error::OutOfRange {
            value: volts,
            low,
            high,
        });
    }
    let c = &traj.controls;
    let hi = c.partition_point(|&x| x < volts);
    if c[hi] == volts {
        return Ok(traj.strains[hi]);
    }
    let lo = hi - 1;
    let t = (volts - c[lo]) / (c[hi] - c[lo]);
    traj.strains[lo].lincomb(1.0 - t, &traj.strains[hi], t)
}

/// Opens `path` for reading; `-` selects standard input.
pub fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdin()))
    } else {
        Ok(Box::new(File::open(path)?))
    }
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn header_names<R: Read>(reader: &mut csv::Reader<R>) -> Result<Vec<String>> {
    Ok(reader.headers()?.iter().map(str::to_owned).collect())
}

fn require_exact(found: &[String], expected: &[&str]) -> Result<()> {
    for name in expected {
        if !found.iter().any(|f| f == name) {
            return Err(Error::MissingColumn((*name).to_owned()));
        }
    }
    if found.len() != expected.len() || found.iter().zip(expected).any(|(f, e)| f != e) {
        return Err(Error::Schema {
            row: 1,
            reason: format!("header must be `{}`, got `{}`", expected.join(","), found.join(",")),
        });
    }
    Ok(())
}

fn parse_cell(record: &csv::StringRecord, col: usize, name: &str) -> Result<f64> {
    let row = record.position().map_or(0, |p| p.line());
    let raw = record.get(col).ok_or_else(|| Error::Schema {
        row,
        reason: format!("missing value for `{name}`"),
    })?;
    let v: f64 = raw.parse().map_err(|_| Error::Schema {
        row,
        reason: format!("`{name}` is not a number: `{raw}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Schema {
            row,
            reason: format!("`{name}` is not finite"),
        });
    }
    Ok(v)
}

fn parse_strain(record: &csv::StringRecord, first: usize, frame: Frame) -> Result<StrainTensor> {
    let mut c = [0.0; 6];
    for (k, name) in STRAIN_COLUMNS.iter().enumerate() {
        c[k] = parse_cell(record, first + k, name)?;
    }
    let row = record.position().map_or(0, |p| p.line());
    StrainTensor::new(c, frame).map_err(|e| Error::Schema {
        row,
        reason: e.to_string(),
    })
}

fn check_increasing(record: &csv::StringRecord, value: f64, previous: Option<f64>) -> Result<()> {
    if let Some(prev) = previous {
        if value <= prev {
            return Err(Error::NonMonotonic {
                row: record.position().map_or(0, |p| p.line()) as usize,
                value,
                previous: prev,
            });
        }
    }
    Ok(())
}

pub fn read_strain_trajectory<R: Read>(input: R) -> Result<StrainTrajectory> {
    let mut reader = csv_reader(input);
    let header = header_names(&mut reader)?;
    let mut expected = vec!["control_v"];
    expected.extend(STRAIN_COLUMNS);
    require_exact(&header, &expected)?;

    let mut rows = Vec::new();
    let mut previous = None;
    for record in reader.records() {
        let record = record?;
        let v = parse_cell(&record, 0, "control_v")?;
        check_increasing(&record, v, previous)?;
        previous = Some(v);
        rows.push((v, parse_strain(&record, 1, Frame::Crystal)?));
    }
    StrainTrajectory::new(rows)
}

pub fn load_strain_trajectory(path: &Path) -> Result<StrainTrajectory> {
    read_strain_trajectory(open_input(path)?)
}

/// Reads a spectra table; strain columns, when present, are tagged with
/// `strain_frame`.
pub fn read_spectra<R: Read>(input: R, strain_frame: Frame) -> Result<SpectraSeries> {
    let mut reader = csv_reader(input);
    let header = header_names(&mut reader)?;
    let lines = if header.iter().any(|h| h == "line_C1") {
        &QUADRUPLET_LINES
    } else {
        &ZERO_FIELD_LINES
    };
    let mut expected: Vec<&str> = vec!["control_v"];
    expected.extend(lines.iter().map(|(n, _)| *n));
    let with_strain = header.len() > expected.len();
    if with_strain {
        expected.extend(STRAIN_COLUMNS);
    }
    require_exact(&header, &expected)?;

    let mut rows = Vec::new();
    let mut previous = None;
    for record in reader.records() {
        let record = record?;
        let control = parse_cell(&record, 0, "control_v")?;
        check_increasing(&record, control, previous)?;
        previous = Some(control);
        let mut values = BTreeMap::new();
        for (k, (name, label)) in lines.iter().enumerate() {
            values.insert(*label, parse_cell(&record, 1 + k, name)?);
        }
        let strain = if with_strain {
            Some(parse_strain(&record, 1 + lines.len(), strain_frame)?)
        } else {
            None
        };
        rows.push(SpectraRow {
            control,
            lines: values,
            strain,
        });
    }
    SpectraSeries::new(rows)
}

pub fn load_spectra(path: &Path, strain_frame: Frame) -> Result<SpectraSeries> {
    read_spectra(open_input(path)?, strain_frame)
}
