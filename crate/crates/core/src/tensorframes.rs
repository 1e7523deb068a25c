//! Strain and magnetic-field tensors and their transformation between the
//! cubic crystal frame `X:[100], Y:[010], Z:[001]` and the internal frame of
//! each of the four `<111>` defect orientations.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest strain component accepted by [`StrainTensor::new`]. The linear
/// strain Hamiltonian is only meaningful for small deformations.
pub const STRAIN_BOUND: f64 = 1e-2;

/// Tolerance on `|z . n|` below which a defect counts as transverse to a load.
pub const TRANSVERSE_TOLERANCE: f64 = 1e-6;

/// The four defect symmetry axes with a positive `[001]` component.
///
/// Each one is the image of `[111]` under `k` quarter turns about `[001]`,
/// which is also how the in-plane `x`/`y` axes of the non-`[111]` triads are
/// fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Orientation {
    /// `[111]`
    Ppp,
    /// `[-111]`
    Mpp,
    /// `[-1-11]`
    Mmp,
    /// `[1-11]`
    Pmp,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [Orientation::Ppp, Orientation::Mpp, Orientation::Mmp, Orientation::Pmp];

    /// Number of quarter turns about `[001]` taking `[111]` onto this axis.
    fn quarter_turns(self) -> u8 {
        match self {
            Orientation::Ppp => 0,
            Orientation::Mpp => 1,
            Orientation::Mmp => 2,
            Orientation::Pmp => 3,
        }
    }

    /// Unnormalized Miller direction.
    pub fn miller(self) -> [i8; 3] {
        match self {
            Orientation::Ppp => [1, 1, 1],
            Orientation::Mpp => [-1, 1, 1],
            Orientation::Mmp => [-1, -1, 1],
            Orientation::Pmp => [1, -1, 1],
        }
    }

    pub fn axis(self) -> Vector3<f64> {
        let [a, b, c] = self.miller();
        Vector3::new(a as f64, b as f64, c as f64).normalize()
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.miller();
        write!(f, "[{a}{b}{c}]")
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        Orientation::ALL
            .into_iter()
            .find(|o| {
                let [a, b, c] = o.miller();
                trimmed == format!("{a}{b}{c}")
            })
            .ok_or_else(|| {
                Error::invalid(
                    "orientation",
                    format!("`{s}` is not one of [111], [-111], [-1-11], [1-11]"),
                )
            })
    }
}

impl TryFrom<String> for Orientation {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<Orientation> for String {
    fn from(value: Orientation) -> Self {
        value.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Crystal,
    Defect(Orientation),
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Crystal => write!(f, "crystal frame"),
            Frame::Defect(o) => write!(f, "{o} defect frame"),
        }
    }
}

/// Internal axes of one defect orientation, expressed in the crystal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectAxes {
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub z: Vector3<f64>,
}

impl DefectAxes {
    /// Rotation whose columns are `x`, `y`, `z`. Crystal-frame vectors map to
    /// defect-frame components through its transpose.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.x, self.y, self.z])
    }
}

/// Returns the orthonormal triad of `orientation`.
///
/// For `[111]` the axes lie along `[-1-12]`, `[-110]` and `[111]`. The `x`
/// vector points along `[11-2]` so that the triad is right-handed, which is
/// the sense produced by `R_z(45 deg) R_y(54.7 deg)` acting on the cube axes. The other
/// three are its images under quarter turns about `[001]`. All vectors come
/// from exact integer directions, never from rounded angles.
pub fn defect_axes(orientation: Orientation) -> DefectAxes {
    let x0 = Vector3::new(1.0, 1.0, -2.0) / 6f64.sqrt();
    let y0 = Vector3::new(-1.0, 1.0, 0.0) / 2f64.sqrt();
    let z0 = Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
    let quarter = |v: Vector3<f64>| Vector3::new(-v.y, v.x, v.z);
    let (mut x, mut y, mut z) = (x0, y0, z0);
    for _ in 0..orientation.quarter_turns() {
        x = quarter(x);
        y = quarter(y);
        z = quarter(z);
    }
    DefectAxes { x, y, z }
}

/// Symmetric rank-2 strain tensor stored as Voigt-ordered components
/// `(xx, yy, zz, yz, zx, xy)`. Shear entries are tensor components, not
/// engineering strains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainTensor {
    components: [f64; 6],
    frame: Frame,
}

const COMPONENT_NAMES: [&str; 6] = ["xx", "yy", "zz", "yz", "zx", "xy"];

impl StrainTensor {
    pub fn new(components: [f64; 6], frame: Frame) -> Result<Self> {
        for (value, name) in components.iter().zip(COMPONENT_NAMES) {
            if !value.is_finite() {
                return Err(Error::NonFinite("strain tensor"));
            }
            if value.abs() >= STRAIN_BOUND {
                return Err(Error::StrainOutOfRange {
                    component: name,
                    value: *value,
                    bound: STRAIN_BOUND,
                });
            }
        }
        Ok(StrainTensor { components, frame })
    }

    pub fn zero(frame: Frame) -> Self {
        StrainTensor {
            components: [0.0; 6],
            frame,
        }
    }

    /// Builds a tensor from the symmetric part of `m`.
    pub fn from_matrix(m: &Matrix3<f64>, frame: Frame) -> Result<Self> {
        let s = (m + m.transpose()) * 0.5;
        Self::new(
            [s[(0, 0)], s[(1, 1)], s[(2, 2)], s[(1, 2)], s[(2, 0)], s[(0, 1)]],
            frame,
        )
    }

    fn from_matrix_unchecked(m: &Matrix3<f64>, frame: Frame) -> Self {
        StrainTensor {
            components: [m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(1, 2)], m[(2, 0)], m[(0, 1)]],
            frame,
        }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let [xx, yy, zz, yz, zx, xy] = self.components;
        Matrix3::new(xx, xy, zx, xy, yy, yz, zx, yz, zz)
    }

    pub fn components(&self) -> [f64; 6] {
        self.components
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn xx(&self) -> f64 {
        self.components[0]
    }
    pub fn yy(&self) -> f64 {
        self.components[1]
    }
    pub fn zz(&self) -> f64 {
        self.components[2]
    }
    pub fn yz(&self) -> f64 {
        self.components[3]
    }
    pub fn zx(&self) -> f64 {
        self.components[4]
    }
    pub fn xy(&self) -> f64 {
        self.components[5]
    }

    pub fn trace(&self) -> f64 {
        self.xx() + self.yy() + self.zz()
    }

    /// Componentwise `a * self + b * other`; both tensors must share a frame.
    pub fn lincomb(&self, a: f64, other: &StrainTensor, b: f64) -> Result<Self> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch {
                expected: self.frame.to_string(),
                found: other.frame,
            });
        }
        let mut c = [0.0; 6];
        for (i, v) in c.iter_mut().enumerate() {
            *v = a * self.components[i] + b * other.components[i];
        }
        Self::new(c, self.frame)
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.components.map(|c| c * k), self.frame)
    }

    pub(crate) fn require_defect(&self) -> Result<Orientation> {
        match self.frame {
            Frame::Defect(o) => Ok(o),
            Frame::Crystal => Err(Error::FrameMismatch {
                expected: "a defect frame".into(),
                found: self.frame,
            }),
        }
    }
}

/// Re-expresses `strain` in frame `to` by the tensor sandwich `R^T e R`.
pub fn transform_strain(strain: &StrainTensor, to: Frame) -> StrainTensor {
    if strain.frame == to {
        return *strain;
    }
    let crystal = match strain.frame {
        Frame::Crystal => strain.to_matrix(),
        Frame::Defect(o) => {
            let r = defect_axes(o).rotation();
            r * strain.to_matrix() * r.transpose()
        }
    };
    let out = match to {
        Frame::Crystal => crystal,
        Frame::Defect(o) => {
            let r = defect_axes(o).rotation();
            r.transpose() * crystal * r
        }
    };
    StrainTensor::from_matrix_unchecked(&out, to)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadClass {
    Axial,
    Transverse,
}

/// Classifies a defect against a uniaxial load direction (normalized here).
pub fn classify_orientation(orientation: Orientation, load_axis: &Vector3<f64>) -> LoadClass {
    let n = load_axis.normalize();
    if orientation.axis().dot(&n).abs() < TRANSVERSE_TOLERANCE {
        LoadClass::Transverse
    } else {
        LoadClass::Axial
    }
}

/// Static magnetic field in Tesla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticField {
    pub vector: Vector3<f64>,
    pub frame: Frame,
}

impl MagneticField {
    pub fn new(vector: Vector3<f64>, frame: Frame) -> Result<Self> {
        if vector.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("magnetic field"));
        }
        Ok(MagneticField { vector, frame })
    }

    pub fn zero(frame: Frame) -> Self {
        MagneticField {
            vector: Vector3::zeros(),
            frame,
        }
    }

    /// Field of magnitude `tesla` along the crystal `[001]` axis.
    pub fn along_001(tesla: f64) -> Self {
        MagneticField {
            vector: Vector3::new(0.0, 0.0, tesla),
            frame: Frame::Crystal,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vector.iter().all(|c| *c == 0.0)
    }

    /// Magnitude of the component perpendicular to the frame `z` axis.
    pub fn transverse(&self) -> f64 {
        self.vector.x.hypot(self.vector.y)
    }

    pub(crate) fn require_defect(&self) -> Result<Orientation> {
        match self.frame {
            Frame::Defect(o) => Ok(o),
            Frame::Crystal => Err(Error::FrameMismatch {
                expected: "a defect frame".into(),
                found: self.frame,
            }),
        }
    }
}

pub fn transform_field(field: &MagneticField, to: Frame) -> MagneticField {
    if field.frame == to {
        return *field;
    }
    let crystal = match field.frame {
        Frame::Crystal => field.vector,
        Frame::Defect(o) => defect_axes(o).rotation() * field.vector,
    };
    let vector = match to {
        Frame::Crystal => crystal,
        Frame::Defect(o) => defect_axes(o).rotation().transpose() * crystal,
    };
    MagneticField { vector, frame: to }
}
