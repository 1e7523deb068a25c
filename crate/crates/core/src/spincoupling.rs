//! Spin-qubit figures of merit built on the ground-state eigensystem:
//! resonant and dispersive strain susceptibilities, the spin-flip orbital
//! factor, the microwave g-factor, and spin-phonon coupling estimates.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{spin_x_operator, Hamiltonian, LevelModel, Manifold, ManifoldEigensystem, SymmetryStrain};
use crate::tensorframes::{MagneticField, StrainTensor};

/// Smallest qubit splitting treated as resolved, GHz.
pub const RESOLVED_SPLITTING: f64 = 1e-6;

/// Symmetry row of the AC strain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcDirection {
    #[default]
    Egx,
    Egy,
}

impl AcDirection {
    /// Hamiltonian of one GHz of strain energy along this row.
    pub fn operator(self) -> Hamiltonian {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let orbital = match self {
            AcDirection::Egx => Matrix2::new(-one, zero, zero, one),
            AcDirection::Egy => Matrix2::new(zero, one, one, zero),
        };
        Hamiltonian::from_fn(|i, j| if i % 2 == j % 2 { orbital[(i / 2, j / 2)] } else { zero })
    }
}

/// The ground-state eigensystem with its two lowest states taken as the
/// spin qubit.
#[derive(Debug, Clone)]
pub struct QubitPair {
    pub system: ManifoldEigensystem,
    /// `E_1 - E_0`, GHz.
    pub omega_s: f64,
}

impl QubitPair {
    pub fn from_symmetry(model: &LevelModel, gs_strain: &SymmetryStrain, field: &MagneticField) -> Result<Self> {
        let system = model.eigensystem(Manifold::Ground, gs_strain, field)?;
        let omega_s = system.energies[1] - system.energies[0];
        if omega_s <= RESOLVED_SPLITTING {
            return Err(Error::Degenerate(format!(
                "qubit splitting {omega_s:e} GHz is not resolved"
            )));
        }
        Ok(QubitPair { system, omega_s })
    }

    pub fn from_strain(model: &LevelModel, strain: &StrainTensor, field: &MagneticField) -> Result<Self> {
        let s = model.project(Manifold::Ground, strain)?;
        Self::from_symmetry(model, &s, field)
    }

    /// Transition matrix element of the AC strain between the qubit states,
    /// scaled by `d` (GHz/strain).
    pub fn d_spin(&self, d: f64, ac: AcDirection) -> f64 {
        self.system.matrix_element(&ac.operator(), 1, 0).norm() * d
    }

    /// Difference of the diagonal AC-strain elements of the two qubit
    /// states, scaled by `d`; the slope of `omega_s` with strain.
    pub fn t_spin(&self, d: f64, ac: AcDirection) -> f64 {
        let v = ac.operator();
        (self.system.matrix_element(&v, 1, 1).re - self.system.matrix_element(&v, 0, 0).re) * d
    }

    /// Twice the qubit matrix element of the transverse spin operator.
    pub fn g_factor(&self) -> f64 {
        2.0 * self.system.matrix_element(&spin_x_operator(), 0, 1).norm()
    }

    /// E_g coupling between the upper qubit state and the lowest upper-branch
    /// state of opposite spin, relative to the same coupling to the
    /// upper-branch state of equal spin.
    pub fn d_flip_ratio(&self) -> Result<f64> {
        let e = &self.system.energies;
        if e.windows(2).any(|w| w[1] - w[0] <= RESOLVED_SPLITTING) {
            return Err(Error::Degenerate("ground-state levels are not all resolved".into()));
        }
        let eg = |a: usize, b: usize| {
            let x = self.system.matrix_element(&AcDirection::Egx.operator(), a, b).norm();
            let y = self.system.matrix_element(&AcDirection::Egy.operator(), a, b).norm();
            x.hypot(y)
        };
        let conserving = eg(1, 3);
        if conserving == 0.0 {
            return Err(Error::Degenerate("spin-conserving orbital coupling vanishes".into()));
        }
        Ok(eg(1, 2) / conserving)
    }
}

/// First-order resonant spin-strain susceptibility `2 gamma_s B_x / lambda * d`.
pub fn d_spin_perturbative(b_x: f64, lambda_so: f64, d: f64, gamma_s: f64) -> Result<f64> {
    if !(lambda_so.is_finite() && lambda_so > 0.0) {
        return Err(Error::invalid("lambda_so", format!("must be > 0, got {lambda_so}")));
    }
    Ok(2.0 * gamma_s * b_x / lambda_so * d)
}

/// Resonant spin-strain susceptibility from the exact qubit eigenstates, GHz/strain.
pub fn d_spin_exact(model: &LevelModel, strain: &StrainTensor, field: &MagneticField) -> Result<f64> {
    Ok(QubitPair::from_strain(model, strain, field)?.d_spin(model.sus_gs.d, AcDirection::Egx))
}

/// Dispersive spin-strain susceptibility, GHz/strain.
pub fn t_spin(model: &LevelModel, strain: &StrainTensor, field: &MagneticField) -> Result<f64> {
    Ok(QubitPair::from_strain(model, strain, field)?.t_spin(model.sus_gs.d, AcDirection::Egx))
}

/// Spin-flip to spin-conserving orbital coupling ratio. Without a
/// transverse field the spin is a good quantum number and the ratio is zero.
pub fn d_flip_exact(model: &LevelModel, strain: &StrainTensor, field: &MagneticField) -> Result<f64> {
    if field.transverse() == 0.0 {
        model.project(Manifold::Ground, strain)?;
        return Ok(0.0);
    }
    let s = model.project(Manifold::Ground, strain)?;
    let system = model.eigensystem(Manifold::Ground, &s, field)?;
    let omega_s = system.energies[1] - system.energies[0];
    QubitPair { system, omega_s }.d_flip_ratio()
}

/// Microwave g-factor of the qubit for a static field `b_z` (T) along the
/// defect axis, in the frame of `strain`.
pub fn microwave_g_factor(model: &LevelModel, strain: &StrainTensor, b_z: f64) -> Result<f64> {
    let field = MagneticField::new(Vector3::new(0.0, 0.0, b_z), strain.frame())?;
    Ok(QubitPair::from_strain(model, strain, &field)?.g_factor())
}

/// One mechanical mode and its thermal bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicalMode {
    /// GHz.
    pub frequency: f64,
    pub quality_factor: f64,
    /// Zero-point strain at the defect, projected onto `E_gx`.
    pub eps_zpf: f64,
    pub n_th: f64,
}

impl MechanicalMode {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::invalid(
                "mode frequency",
                format!("must be > 0, got {}", self.frequency),
            ));
        }
        if !(self.quality_factor.is_finite() && self.quality_factor > 0.0) {
            return Err(Error::invalid(
                "quality factor",
                format!("must be > 0, got {}", self.quality_factor),
            ));
        }
        if !(self.eps_zpf.is_finite() && self.eps_zpf >= 0.0) {
            return Err(Error::invalid("eps_zpf", format!("must be >= 0, got {}", self.eps_zpf)));
        }
        if !(self.n_th.is_finite() && self.n_th >= 0.0) {
            return Err(Error::invalid("n_th", format!("must be >= 0, got {}", self.n_th)));
        }
        Ok(())
    }

    /// Energy decay rate `omega_m / Q_m`, GHz.
    pub fn kappa(&self) -> f64 {
        self.frequency / self.quality_factor
    }
}

/// Single-phonon coupling rate `d_spin * eps_zpf`, GHz.
pub fn spin_phonon_g(d_spin: f64, mode: &MechanicalMode) -> Result<f64> {
    mode.validate()?;
    Ok(d_spin * mode.eps_zpf)
}

/// `C = 4 g^2 / (kappa gamma_spin (n_th + 1))`.
pub fn cooperativity(g: f64, mode: &MechanicalMode, gamma_spin: f64) -> Result<f64> {
    mode.validate()?;
    if !(gamma_spin.is_finite() && gamma_spin > 0.0) {
        return Err(Error::invalid("gamma_spin", format!("must be > 0, got {gamma_spin}")));
    }
    Ok(4.0 * g * g / (mode.kappa() * gamma_spin * (mode.n_th + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorframes::{transform_field, Frame, Orientation};

    const DEFECT: Frame = Frame::Defect(Orientation::Mpp);

    fn field() -> MagneticField {
        transform_field(&MagneticField::along_001(0.17), DEFECT)
    }

    fn pair(delta: f64, field: &MagneticField) -> QubitPair {
        let m = LevelModel::default();
        let s = SymmetryStrain::with_splitting(delta, m.lambda_so_gs).unwrap();
        QubitPair::from_symmetry(&m, &s, field).unwrap()
    }

    #[test]
    fn perturbative_examples() {
        let d = 1.3e6;
        let r = d_spin_perturbative(0.1388, 46.0, d, 14.0).unwrap() / d;
        assert!((r - 0.0845).abs() < 1e-3);
        assert_eq!(d_spin_perturbative(0.0, 46.0, d, 14.0).unwrap(), 0.0);
        let a = d_spin_perturbative(0.05, 46.0, d, 14.0).unwrap();
        let b = d_spin_perturbative(0.1, 46.0, d, 14.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-9);
        assert!(d_spin_perturbative(0.1, 0.0, d, 14.0).is_err());
    }

    #[test]
    fn exact_d_spin_at_zero_strain() {
        let m = LevelModel::default();
        let r = d_spin_exact(&m, &StrainTensor::zero(DEFECT), &field()).unwrap() / m.sus_gs.d;
        assert!((r - 0.085).abs() < 0.002, "{r}");
    }

    #[test]
    fn d_spin_rolls_off_with_static_strain() {
        let d = LevelModel::default().sus_gs.d;
        let b = field();
        assert!(pair(2000.0, &b).d_spin(d, AcDirection::Egx) / d < 0.01);
        let zero = pair(46.0, &b).d_spin(d, AcDirection::Egx);
        for delta in [50.0, 100.0, 300.0, 1000.0] {
            assert!(pair(delta, &b).d_spin(d, AcDirection::Egx) < zero);
        }
    }

    #[test]
    fn zero_field_pair_is_degenerate() {
        let m = LevelModel::default();
        let r = d_spin_exact(&m, &StrainTensor::zero(DEFECT), &MagneticField::zero(DEFECT));
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn t_spin_vanishes_at_zero_strain() {
        let d = LevelModel::default().sus_gs.d;
        assert!(pair(46.0, &field()).t_spin(d, AcDirection::Egx).abs() / d < 1e-12);
    }

    #[test]
    fn d_flip_zero_without_transverse_field() {
        let m = LevelModel::default();
        let axial = MagneticField::new(Vector3::new(0.0, 0.0, 0.1), DEFECT).unwrap();
        assert_eq!(d_flip_exact(&m, &StrainTensor::zero(DEFECT), &axial).unwrap(), 0.0);
        assert_eq!(
            d_flip_exact(&m, &StrainTensor::zero(DEFECT), &MagneticField::zero(DEFECT)).unwrap(),
            0.0
        );
    }

    #[test]
    fn g_factor_limits() {
        let b = MagneticField::new(Vector3::new(0.0, 0.0, 0.0981), DEFECT).unwrap();
        assert!(pair(46.0, &b).g_factor() < 0.1);
        assert!(pair(2000.0, &b).g_factor() >= 1.98);
    }

    #[test]
    fn coupling_examples() {
        let mode = MechanicalMode {
            frequency: 5.0,
            quality_factor: 1e3,
            eps_zpf: 8e-9,
            n_th: 0.0,
        };
        let g = spin_phonon_g(1e5, &mode).unwrap();
        assert!((g - 8e-4).abs() < 1e-15);
        let c = cooperativity(g, &mode, 1e-7).unwrap();
        assert!((c - 5120.0).abs() < 1e-6);
        assert_eq!(cooperativity(0.0, &mode, 1e-7).unwrap(), 0.0);
        let zero = MechanicalMode { eps_zpf: 0.0, ..mode };
        assert_eq!(spin_phonon_g(1e5, &zero).unwrap(), 0.0);
        assert!(cooperativity(g, &mode, 0.0).is_err());
    }
}
