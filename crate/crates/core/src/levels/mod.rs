//! Ground- and excited-state manifold Hamiltonians (strain, spin-orbit and
//! Zeeman terms), their diagonalization, and the optical and spin lines that
//! follow from them.
//!
//! Every Hamiltonian is written in the product basis
//! `{e_x dn, e_x up, e_y dn, e_y up}` with energies in GHz (`h = 1`).
//! Susceptibilities are in GHz per unit strain, so `1 PHz/strain = 1e6`.

mod eigen;

use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use eigen::{apply_phase_convention, diagonalize_manifold, Hamiltonian, ManifoldEigensystem};

use crate::error::{Error, Result};
use crate::tensorframes::{MagneticField, StrainTensor};

/// Symmetry-adapted strain energies of one manifold, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymmetryStrain {
    pub a1g: f64,
    pub egx: f64,
    pub egy: f64,
}

impl SymmetryStrain {
    pub fn new(a1g: f64, egx: f64, egy: f64) -> Self {
        SymmetryStrain { a1g, egx, egy }
    }

    /// Magnitude of the E_g doublet, `sqrt(egx^2 + egy^2)`.
    pub fn eg(&self) -> f64 {
        self.egx.hypot(self.egy)
    }

    /// Pure `E_gx` strain giving branch splitting `delta` at spin-orbit
    /// coupling `lambda_so`.
    pub fn with_splitting(delta: f64, lambda_so: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= lambda_so) {
            return Err(Error::invalid(
                "splitting",
                format!("{delta} GHz is below the zero-strain value {lambda_so} GHz"),
            ));
        }
        Ok(SymmetryStrain::new(
            0.0,
            0.5 * (delta * delta - lambda_so * lambda_so).sqrt(),
            0.0,
        ))
    }
}

/// Strain-response coefficients of one manifold, GHz/strain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Susceptibilities {
    pub t_perp: f64,
    pub t_par: f64,
    pub d: f64,
    pub f: f64,
}

/// Which shear component accompanies which E_g row.
///
/// The group-theory form pairs `f` with `e_zx` in `E_gx` and with `e_yz` in
/// `E_gy`. The splitting formulas used for fitting swap the two shears; that
/// variant is kept selectable because the two forms disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShearPairing {
    #[default]
    GroupTheory,
    SwappedShear,
}

impl ShearPairing {
    pub fn project(self, strain: &StrainTensor, sus: &Susceptibilities) -> Result<SymmetryStrain> {
        strain.require_defect()?;
        let (shear_x, shear_y) = match self {
            ShearPairing::GroupTheory => (strain.zx(), strain.yz()),
            ShearPairing::SwappedShear => (strain.yz(), strain.zx()),
        };
        Ok(SymmetryStrain {
            a1g: sus.t_perp * (strain.xx() + strain.yy()) + sus.t_par * strain.zz(),
            egx: sus.d * (strain.xx() - strain.yy()) + sus.f * shear_x,
            egy: -2.0 * sus.d * strain.xy() + sus.f * shear_y,
        })
    }
}

/// Projects a defect-frame strain tensor onto the A_1g and E_g energies.
pub fn project_strain(strain: &StrainTensor, sus: &Susceptibilities) -> Result<SymmetryStrain> {
    ShearPairing::GroupTheory.project(strain, sus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Ground,
    Excited,
}

/// Full parameter set for one defect.
///
/// Only differences of the A_1g coefficients between the two manifolds are
/// observable in the mean ZPL, so the defaults carry the measured differences
/// on the excited-state record and zero on the ground-state record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelModel {
    pub lambda_so_gs: f64,
    pub lambda_so_es: f64,
    pub sus_gs: Susceptibilities,
    pub sus_es: Susceptibilities,
    /// Spin gyromagnetic ratio, GHz/T.
    pub gamma_s: f64,
    /// Unquenched orbital gyromagnetic ratio, GHz/T.
    pub gamma_l: f64,
    pub orbital_quench: f64,
    /// Zero-strain mean ZPL frequency, GHz.
    pub zpl0: f64,
    pub shear_pairing: ShearPairing,
}

impl Default for LevelModel {
    fn default() -> Self {
        LevelModel {
            lambda_so_gs: 46.0,
            lambda_so_es: 255.0,
            sus_gs: Susceptibilities {
                t_perp: 0.0,
                t_par: 0.0,
                d: 1.3e6,
                f: -2.5e5,
            },
            sus_es: Susceptibilities {
                t_perp: 7.8e4,
                t_par: -1.7e6,
                d: 1.8e6,
                f: -7.2e5,
            },
            gamma_s: 14.0,
            gamma_l: 14.0,
            orbital_quench: 0.1,
            zpl0: 406_780.0,
            shear_pairing: ShearPairing::GroupTheory,
        }
    }
}

impl LevelModel {
    pub fn validate(&self) -> Result<()> {
        let values = [
            self.lambda_so_gs,
            self.lambda_so_es,
            self.gamma_s,
            self.gamma_l,
            self.orbital_quench,
            self.zpl0,
        ];
        let sus = [self.sus_gs, self.sus_es]
            .into_iter()
            .flat_map(|s| [s.t_perp, s.t_par, s.d, s.f]);
        if values.into_iter().chain(sus).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("level model"));
        }
        if !(self.lambda_so_gs > 0.0 && self.lambda_so_es > self.lambda_so_gs) {
            return Err(Error::invalid(
                "level model",
                format!(
                    "need lambda_so_es > lambda_so_gs > 0, got {} and {}",
                    self.lambda_so_es, self.lambda_so_gs
                ),
            ));
        }
        Ok(())
    }

    pub fn lambda_so(&self, manifold: Manifold) -> f64 {
        match manifold {
            Manifold::Ground => self.lambda_so_gs,
            Manifold::Excited => self.lambda_so_es,
        }
    }

    pub fn susceptibilities(&self, manifold: Manifold) -> &Susceptibilities {
        match manifold {
            Manifold::Ground => &self.sus_gs,
            Manifold::Excited => &self.sus_es,
        }
    }

    /// Quenched orbital gyromagnetic ratio, GHz/T.
    pub fn gamma_l_effective(&self) -> f64 {
        self.gamma_l * self.orbital_quench
    }

    pub fn project(&self, manifold: Manifold, strain: &StrainTensor) -> Result<SymmetryStrain> {
        self.shear_pairing.project(strain, self.susceptibilities(manifold))
    }

    /// Strain + spin-orbit + Zeeman Hamiltonian of one manifold.
    pub fn hamiltonian(
        &self,
        manifold: Manifold,
        strain: &SymmetryStrain,
        field: &MagneticField,
    ) -> Result<Hamiltonian> {
        Ok(strain_hamiltonian(strain) + so_hamiltonian(self.lambda_so(manifold)) + zeeman_hamiltonian(field, self)?)
    }

    pub fn eigensystem(
        &self,
        manifold: Manifold,
        strain: &SymmetryStrain,
        field: &MagneticField,
    ) -> Result<ManifoldEigensystem> {
        diagonalize_manifold(&self.hamiltonian(manifold, strain, field)?)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

fn identity2() -> Matrix2<Complex64> {
    Matrix2::identity()
}

/// Orbital `sigma_y` in `{e_x, e_y}`; its `+1` eigenvector carries `l_z = +1`.
fn orbital_lz() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

/// Spin Pauli matrices in the `{dn, up}` ordering.
pub(crate) fn spin_x() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

fn spin_y() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0))
}

fn spin_z() -> Matrix2<Complex64> {
    Matrix2::new(c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
}

/// Spin `sigma_x` acting on the full manifold.
pub fn spin_x_operator() -> Hamiltonian {
    kron(&identity2(), &spin_x())
}

/// `[[a1g - egx, egy], [egy, a1g + egx]] (x) I_2`.
pub fn strain_hamiltonian(s: &SymmetryStrain) -> Hamiltonian {
    let orbital = Matrix2::new(
        c(s.a1g - s.egx, 0.0),
        c(s.egy, 0.0),
        c(s.egy, 0.0),
        c(s.a1g + s.egx, 0.0),
    );
    kron(&orbital, &identity2())
}

/// Spin-orbit term `-lambda L_z S_z`, i.e. `-i lambda/2` on `<e_x dn|H|e_y dn>`
/// and `+i lambda/2` on `<e_x up|H|e_y up>`.
pub fn so_hamiltonian(lambda_so: f64) -> Hamiltonian {
    kron(&orbital_lz(), &spin_z()) * c(-0.5 * lambda_so, 0.0)
}

/// Spin Zeeman `gamma_s (B . sigma)` plus orbital Zeeman
/// `quench * gamma_l * B_z * L_z`; the field must be in the defect frame.
pub fn zeeman_hamiltonian(field: &MagneticField, model: &LevelModel) -> Result<Hamiltonian> {
    field.require_defect()?;
    let b = field.vector;
    let spin = spin_x() * c(b.x, 0.0) + spin_y() * c(b.y, 0.0) + spin_z() * c(b.z, 0.0);
    Ok(kron(&identity2(), &spin) * c(model.gamma_s, 0.0)
        + kron(&orbital_lz(), &identity2()) * c(model.gamma_l_effective() * b.z, 0.0))
}

/// Closed-form branch splitting `sqrt(lambda^2 + 4 (egx^2 + egy^2))`.
pub fn orbital_splitting(s: &SymmetryStrain, lambda_so: f64) -> f64 {
    (lambda_so * lambda_so + 4.0 * (s.egx * s.egx + s.egy * s.egy)).sqrt()
}

/// Columns are the spin-orbit eigenstates
/// `{e_- dn, e_+ up, e_+ dn, e_- up}` with `e_+ = -(e_x + i e_y)/sqrt 2` and
/// `e_- = (e_x - i e_y)/sqrt 2`, expressed in the product basis.
pub fn so_basis() -> Hamiltonian {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e_plus = [c(-r, 0.0), c(0.0, -r)];
    let e_minus = [c(r, 0.0), c(0.0, -r)];
    let product = |orb: [Complex64; 2], up: bool| {
        let mut v = [c(0.0, 0.0); 4];
        let spin = usize::from(up);
        v[spin] = orb[0];
        v[2 + spin] = orb[1];
        v
    };
    let cols = [
        product(e_minus, false),
        product(e_plus, true),
        product(e_plus, false),
        product(e_minus, true),
    ];
    Matrix4::from_fn(|i, j| cols[j][i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LineLabel {
    A,
    B,
    C,
    D,
    C1,
    C2,
    C3,
    C4,
    SpinGS,
    SpinES,
}

impl LineLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            LineLabel::A => "A",
            LineLabel::B => "B",
            LineLabel::C => "C",
            LineLabel::D => "D",
            LineLabel::C1 => "C1",
            LineLabel::C2 => "C2",
            LineLabel::C3 => "C3",
            LineLabel::C4 => "C4",
            LineLabel::SpinGS => "spin_gs",
            LineLabel::SpinES => "spin_es",
        }
    }

    pub fn is_optical(self) -> bool {
        !matches!(self, LineLabel::SpinGS | LineLabel::SpinES)
    }
}

impl fmt::Display for LineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One optical or spin transition.
///
/// For optical lines `lower` indexes the ground-state eigenstate and `upper`
/// the excited-state one. For spin lines both index the same manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub label: LineLabel,
    /// GHz; absolute for optical lines.
    pub frequency: f64,
    pub lower: usize,
    pub upper: usize,
}

/// Both manifolds diagonalized at one operating point.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub ground: ManifoldEigensystem,
    pub excited: ManifoldEigensystem,
    pub ground_strain: SymmetryStrain,
    pub excited_strain: SymmetryStrain,
}

impl OperatingPoint {
    pub fn solve(model: &LevelModel, strain: &StrainTensor, field: &MagneticField) -> Result<Self> {
        model.validate()?;
        let o = strain.require_defect()?;
        let fo = field.require_defect()?;
        if o != fo {
            return Err(Error::FrameMismatch {
                expected: strain.frame().to_string(),
                found: field.frame,
            });
        }
        let ground_strain = model.project(Manifold::Ground, strain)?;
        let excited_strain = model.project(Manifold::Excited, strain)?;
        Ok(OperatingPoint {
            ground: model.eigensystem(Manifold::Ground, &ground_strain, field)?,
            excited: model.eigensystem(Manifold::Excited, &excited_strain, field)?,
            ground_strain,
            excited_strain,
        })
    }
}

/// Optical (and, in a field, spin) lines at one operating point.
///
/// At zero field the four lines `A, B, C, D` are returned, from the highest
/// frequency down. In a field the C line splits into `C1 < C2 <= C3 < C4`
/// (sorted by frequency on every call) and the lower-branch spin lines of both
/// manifolds are appended.
pub fn optical_spectrum(model: &LevelModel, strain: &StrainTensor, field: &MagneticField) -> Result<Vec<SpectrumLine>> {
    let op = OperatingPoint::solve(model, strain, field)?;
    let g = &op.ground.energies;
    let e = &op.excited.energies;
    let optical = |label, gs: usize, es: usize| SpectrumLine {
        label,
        frequency: model.zpl0 + e[es] - g[gs],
        lower: gs,
        upper: es,
    };

    if field.is_zero() {
        return Ok(vec![
            optical(LineLabel::A, 0, 2),
            optical(LineLabel::B, 2, 2),
            optical(LineLabel::C, 0, 0),
            optical(LineLabel::D, 2, 0),
        ]);
    }

    let mut quad = [
        optical(LineLabel::C1, 0, 0),
        optical(LineLabel::C1, 0, 1),
        optical(LineLabel::C1, 1, 0),
        optical(LineLabel::C1, 1, 1),
    ];
    quad.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    let labels = [LineLabel::C1, LineLabel::C2, LineLabel::C3, LineLabel::C4];
    let mut lines: Vec<SpectrumLine> = quad
        .into_iter()
        .zip(labels)
        .map(|(line, label)| SpectrumLine { label, ..line })
        .collect();
    lines.push(SpectrumLine {
        label: LineLabel::SpinGS,
        frequency: g[1] - g[0],
        lower: 0,
        upper: 1,
    });
    lines.push(SpectrumLine {
        label: LineLabel::SpinES,
        frequency: e[1] - e[0],
        lower: 0,
        upper: 1,
    });
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorframes::{Frame, Orientation};
    use nalgebra::Vector3;

    const DEFECT: Frame = Frame::Defect(Orientation::Mpp);

    fn strain(c: [f64; 6]) -> StrainTensor {
        StrainTensor::new(c, DEFECT).unwrap()
    }

    fn field(x: f64, y: f64, z: f64) -> MagneticField {
        MagneticField::new(Vector3::new(x, y, z), DEFECT).unwrap()
    }

    fn energies(h: &Hamiltonian) -> [f64; 4] {
        diagonalize_manifold(h).unwrap().energies
    }

    #[test]
    fn projection_examples() {
        let sus = Susceptibilities {
            t_perp: 0.0,
            t_par: -1.7e6,
            d: 1.3e6,
            f: 0.0,
        };
        let zero = project_strain(&StrainTensor::zero(DEFECT), &sus).unwrap();
        assert_eq!(zero, SymmetryStrain::default());

        let s = project_strain(&strain([1e-5, -1e-5, 0.0, 0.0, 0.0, 0.0]), &sus).unwrap();
        assert!((s.egx - 26.0).abs() < 1e-9);

        let s = project_strain(&strain([0.0, 0.0, 8.8e-5, 0.0, 0.0, 0.0]), &sus).unwrap();
        assert!((s.a1g + 149.6).abs() < 1e-9);
    }

    #[test]
    fn projection_pairs_shears_per_convention() {
        let sus = Susceptibilities {
            t_perp: 0.0,
            t_par: 0.0,
            d: 0.0,
            f: 2.0,
        };
        let e = strain([0.0, 0.0, 0.0, 3e-4, 5e-4, 0.0]);
        let a = ShearPairing::GroupTheory.project(&e, &sus).unwrap();
        assert!((a.egx - 1e-3).abs() < 1e-18 && (a.egy - 6e-4).abs() < 1e-18);
        let b = ShearPairing::SwappedShear.project(&e, &sus).unwrap();
        assert!((b.egx - 6e-4).abs() < 1e-18 && (b.egy - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn projection_rejects_crystal_frame() {
        let e = StrainTensor::zero(Frame::Crystal);
        assert!(matches!(
            project_strain(&e, &Susceptibilities::default()),
            Err(Error::FrameMismatch { .. })
        ));
    }

    #[test]
    fn strain_hamiltonian_structure() {
        assert_eq!(strain_hamiltonian(&SymmetryStrain::default()), Hamiltonian::zeros());
        let h = strain_hamiltonian(&SymmetryStrain::new(7.0, 0.0, 0.0));
        assert_eq!(h, Hamiltonian::identity() * c(7.0, 0.0));
        let e = energies(&strain_hamiltonian(&SymmetryStrain::new(0.0, 5.0, 0.0)));
        let want = [-5.0, -5.0, 5.0, 5.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_orbit_entries_and_spectrum() {
        let h = so_hamiltonian(46.0);
        assert_eq!(h[(0, 2)], c(0.0, -23.0));
        assert_eq!(h[(1, 3)], c(0.0, 23.0));
        assert_eq!(h[(2, 0)], c(0.0, 23.0));
        assert_eq!(h[(3, 1)], c(0.0, -23.0));
        let e = energies(&h);
        for (a, b) in e.iter().zip([-23.0, -23.0, 23.0, 23.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(so_hamiltonian(0.0), Hamiltonian::zeros());
        let e = energies(&so_hamiltonian(255.0));
        assert!((e[2] - e[0] - 255.0).abs() < 1e-10);
    }

    #[test]
    fn so_basis_is_unitary_and_diagonalizes_spin_orbit() {
        let u = so_basis();
        assert!((u.adjoint() * u - Hamiltonian::identity()).norm() < 1e-15);
        let d = u.adjoint() * so_hamiltonian(46.0) * u;
        let want = [-23.0, -23.0, 23.0, 23.0];
        for i in 0..4 {
            for j in 0..4 {
                let w = if i == j { want[i] } else { 0.0 };
                assert!((d[(i, j)] - c(w, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn zeeman_requires_defect_frame() {
        let b = MagneticField::along_001(0.1);
        assert!(zeeman_hamiltonian(&b, &LevelModel::default()).is_err());
        assert_eq!(
            zeeman_hamiltonian(&field(0.0, 0.0, 0.0), &LevelModel::default()).unwrap(),
            Hamiltonian::zeros()
        );
    }

    #[test]
    fn axial_field_splits_qubit_by_spin_plus_orbital_zeeman() {
        let m = LevelModel::default();
        let bz = 0.0981;
        let sys = m
            .eigensystem(Manifold::Ground, &SymmetryStrain::default(), &field(0.0, 0.0, bz))
            .unwrap();
        let ws = sys.energies[1] - sys.energies[0];
        assert!((ws - 2.0 * (m.gamma_s + m.gamma_l_effective()) * bz).abs() < 1e-10);
    }

    #[test]
    fn transverse_field_alone_does_not_split_to_first_order() {
        let m = LevelModel::default();
        let sys = m
            .eigensystem(Manifold::Ground, &SymmetryStrain::default(), &field(1e-3, 0.0, 0.0))
            .unwrap();
        // second order only: (gamma_s Bx)^2 / lambda
        assert!((sys.energies[1] - sys.energies[0]).abs() < 1e-9);
    }

    #[test]
    fn closed_form_splitting_examples() {
        assert!((orbital_splitting(&SymmetryStrain::new(40.0, 0.0, 0.0), 46.0) - 46.0).abs() < 1e-12);
        let s = SymmetryStrain::new(0.0, 100.0, 0.0);
        assert!((orbital_splitting(&s, 46.0) - 205.22).abs() < 5e-3);
        let sys = diagonalize_manifold(&(strain_hamiltonian(&s) + so_hamiltonian(46.0))).unwrap();
        assert!((sys.branch_splitting() - orbital_splitting(&s, 46.0)).abs() < 1e-6);
        let s = SymmetryStrain::new(0.0, 0.0, 230.0);
        assert!((orbital_splitting(&s, 46.0) - 462.294).abs() < 1e-3);
    }

    #[test]
    fn zero_field_spectrum_ordering() {
        let m = LevelModel::default();
        let lines = optical_spectrum(&m, &StrainTensor::zero(DEFECT), &MagneticField::zero(DEFECT)).unwrap();
        let f: Vec<f64> = lines.iter().map(|l| l.frequency).collect();
        assert_eq!(
            lines.iter().map(|l| l.label).collect::<Vec<_>>(),
            [LineLabel::A, LineLabel::B, LineLabel::C, LineLabel::D]
        );
        assert!((f[0] - f[3] - (46.0 + 255.0)).abs() < 1e-9);
        assert!((f[1] - f[2] - 209.0).abs() < 1e-9);
        assert!((f[2] - (m.zpl0 - 0.5 * 209.0)).abs() < 1e-9);
    }

    #[test]
    fn mean_zpl_follows_difference_susceptibilities() {
        let m = LevelModel::default();
        let e = strain([2e-5, -1e-5, 3e-5, 1e-6, -2e-6, 4e-6]);
        let lines = optical_spectrum(&m, &e, &MagneticField::zero(DEFECT)).unwrap();
        let mean = lines.iter().map(|l| l.frequency).sum::<f64>() / 4.0;
        let dt_par = m.sus_es.t_par - m.sus_gs.t_par;
        let dt_perp = m.sus_es.t_perp - m.sus_gs.t_perp;
        let want = m.zpl0 + dt_par * e.zz() + dt_perp * (e.xx() + e.yy());
        assert!((mean - want).abs() < 1e-8);
    }

    #[test]
    fn field_spectrum_has_quadruplet_and_spin_lines() {
        let m = LevelModel::default();
        let lines = optical_spectrum(&m, &StrainTensor::zero(DEFECT), &field(0.1388, 0.0, 0.0981)).unwrap();
        assert_eq!(lines.len(), 6);
        assert!(lines[..4].windows(2).all(|w| w[0].frequency <= w[1].frequency));
        assert_eq!(lines[4].label, LineLabel::SpinGS);
        assert_eq!(lines[5].label, LineLabel::SpinES);
    }

    #[test]
    fn mismatched_frames_are_rejected() {
        let m = LevelModel::default();
        let other = MagneticField::zero(Frame::Defect(Orientation::Ppp));
        assert!(optical_spectrum(&m, &StrainTensor::zero(DEFECT), &other).is_err());
    }

    #[test]
    fn model_validation() {
        let mut m = LevelModel::default();
        assert!(m.validate().is_ok());
        m.lambda_so_es = 40.0;
        assert!(m.validate().is_err());
    }
}
