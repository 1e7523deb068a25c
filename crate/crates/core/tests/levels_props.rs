use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

use sivstrain_core::levels::{
    diagonalize_manifold, orbital_splitting, so_basis, so_hamiltonian, strain_hamiltonian, zeeman_hamiltonian,
    Hamiltonian,
};
use sivstrain_core::{
    project_strain, transform_strain, Frame, LevelModel, MagneticField, Manifold, Orientation, StrainTensor,
    Susceptibilities, SymmetryStrain,
};

const DEFECT: Frame = Frame::Defect(Orientation::Ppp);

fn frob(h: &Hamiltonian) -> f64 {
    h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn orientation() -> impl Strategy<Value = Orientation> {
    prop::sample::select(Orientation::ALL.to_vec())
}

fn strain_components() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-5e-4..5e-4f64)
}

fn symmetry_strain() -> impl Strategy<Value = SymmetryStrain> {
    (-500.0..500.0f64, -500.0..500.0f64, -500.0..500.0f64).prop_map(|(a, x, y)| SymmetryStrain::new(a, x, y))
}

fn field() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn closed_form_matches_eigensolver(s in symmetry_strain(), lambda in 1.0..400.0f64) {
        let sys = diagonalize_manifold(&(strain_hamiltonian(&s) + so_hamiltonian(lambda))).unwrap();
        prop_assert!((sys.branch_splitting() - orbital_splitting(&s, lambda)).abs() < 1e-6);
    }

    #[test]
    fn eigenpairs_with_field_are_accurate(s in symmetry_strain(), b in field()) {
        let m = LevelModel::default();
        let f = MagneticField::new(b, DEFECT).unwrap();
        for manifold in [Manifold::Ground, Manifold::Excited] {
            let h = m.hamiltonian(manifold, &s, &f).unwrap();
            let sys = diagonalize_manifold(&h).unwrap();
            let norm = frob(&h);
            for i in 0..4 {
                let v = sys.state(i);
                let r = h * v - v * Complex64::new(sys.energies[i], 0.0);
                prop_assert!(r.norm() < 1e-8 * norm);
            }
            let gram = sys.states.adjoint() * sys.states;
            prop_assert!(frob(&(gram - Hamiltonian::identity())) < 1e-10);
        }
    }

    #[test]
    fn a1g_shift_is_common_mode(s in symmetry_strain(), b in field(), delta in -300.0..300.0f64) {
        let m = LevelModel::default();
        let f = MagneticField::new(b, DEFECT).unwrap();
        let base = m.eigensystem(Manifold::Ground, &s, &f).unwrap();
        let shifted = SymmetryStrain::new(s.a1g + delta, s.egx, s.egy);
        let moved = m.eigensystem(Manifold::Ground, &shifted, &f).unwrap();
        for i in 0..4 {
            prop_assert!((moved.energies[i] - base.energies[i] - delta).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_field_levels_are_spin_degenerate(s in symmetry_strain(), lambda in 1.0..400.0f64) {
        let sys = diagonalize_manifold(&(strain_hamiltonian(&s) + so_hamiltonian(lambda))).unwrap();
        prop_assert!((sys.energies[1] - sys.energies[0]).abs() < 1e-9);
        prop_assert!((sys.energies[3] - sys.energies[2]).abs() < 1e-9);
    }

    #[test]
    fn spin_orbit_basis_reproduces_reference_matrix(
        egx in -300.0..300.0f64,
        bx in -1.0..1.0f64,
        bz in -1.0..1.0f64,
        lambda in 10.0..300.0f64,
    ) {
        let m = LevelModel::default();
        let f = MagneticField::new(Vector3::new(bx, 0.0, bz), DEFECT).unwrap();
        let h = strain_hamiltonian(&SymmetryStrain::new(0.0, egx, 0.0))
            + so_hamiltonian(lambda)
            + zeeman_hamiltonian(&f, &m).unwrap();
        let u = so_basis();
        let got = u.adjoint() * h * u;

        let (gs, gl) = (m.gamma_s, m.gamma_l_effective());
        let l2 = lambda / 2.0;
        let want = [
            [-l2 - gl * bz - gs * bz, 0.0, egx, gs * bx],
            [0.0, -l2 + gl * bz + gs * bz, gs * bx, egx],
            [egx, gs * bx, l2 + gl * bz - gs * bz, 0.0],
            [gs * bx, egx, 0.0, l2 - gl * bz + gs * bz],
        ];
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((got[(i, j)] - Complex64::new(want[i][j], 0.0)).norm() < 1e-10,
                    "entry ({}, {}): {} vs {}", i, j, got[(i, j)], want[i][j]);
            }
        }
    }

    #[test]
    fn projection_is_linear(c in strain_components(), k in -10.0..10.0f64) {
        let sus = LevelModel::default().sus_es;
        let e = StrainTensor::new(c, DEFECT).unwrap();
        let a = project_strain(&e, &sus).unwrap();
        let b = project_strain(&e.scaled(k).unwrap(), &sus).unwrap();
        let tol = 1e-9 * (1.0 + a.a1g.abs() + a.egx.abs() + a.egy.abs()) * (1.0 + k.abs());
        prop_assert!((b.a1g - k * a.a1g).abs() < tol);
        prop_assert!((b.egx - k * a.egx).abs() < tol);
        prop_assert!((b.egy - k * a.egy).abs() < tol);
    }

    #[test]
    fn frame_round_trip_and_invariants(c in strain_components(), o in orientation(), p in orientation()) {
        let e = StrainTensor::new(c, Frame::Crystal).unwrap();
        let local = transform_strain(&e, Frame::Defect(o));
        let other = transform_strain(&local, Frame::Defect(p));
        let back = transform_strain(&other, Frame::Crystal);
        for (x, y) in back.components().iter().zip(e.components()) {
            prop_assert!((x - y).abs() < 1e-18);
        }
        prop_assert!((local.trace() - e.trace()).abs() < 1e-18);
        prop_assert!((local.to_matrix().norm() - e.to_matrix().norm()).abs() < 1e-18);
    }

    #[test]
    fn observable_splittings_ignore_egx_egy_rotation(eg in 0.0..500.0f64, phi in 0.0..std::f64::consts::TAU) {
        let s = SymmetryStrain::new(0.0, eg * phi.cos(), eg * phi.sin());
        let sys = diagonalize_manifold(&(strain_hamiltonian(&s) + so_hamiltonian(46.0))).unwrap();
        prop_assert!((sys.branch_splitting() - (46.0f64.powi(2) + 4.0 * eg * eg).sqrt()).abs() < 1e-6);
    }
}

#[test]
fn susceptibilities_default_has_positive_d() {
    let m = LevelModel::default();
    assert!(m.sus_gs.d > 0.0 && m.sus_es.d > 0.0);
    assert_eq!(Susceptibilities::default().d, 0.0);
}
