use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector3;

use sivstrain_core::fitkit::synthetic::{consistent_hr, fixture_pair};
use sivstrain_core::fitkit::{fit_d, full_extraction, ElasticModuli};
use sivstrain_core::levels::{diagonalize_manifold, optical_spectrum};
use sivstrain_core::spincoupling::{AcDirection, QubitPair};
use sivstrain_core::{Frame, LevelModel, MagneticField, Manifold, Orientation, StrainTensor, SymmetryStrain};

const FRAME: Frame = Frame::Defect(Orientation::Mpp);

fn levels(c: &mut Criterion) {
    let m = LevelModel::default();
    let field = MagneticField::new(Vector3::new(-0.1388, 0.0, 0.0981), FRAME).unwrap();
    let s = SymmetryStrain::new(10.0, 120.0, -35.0);
    let h = m.hamiltonian(Manifold::Ground, &s, &field).unwrap();
    c.bench_function("diagonalize_manifold", |b| {
        b.iter(|| diagonalize_manifold(black_box(&h)).unwrap())
    });

    let strain = StrainTensor::new([4e-5, -4e-5, 1e-5, 2e-6, 0.0, 3e-6], FRAME).unwrap();
    c.bench_function("optical_spectrum_in_field", |b| {
        b.iter(|| optical_spectrum(&m, black_box(&strain), &field).unwrap())
    });
}

fn fits(c: &mut Criterion) {
    let truth = LevelModel::default();
    let moduli = ElasticModuli::default();
    let hr = consistent_hr(&truth, &moduli).unwrap();
    let (axial, transverse) = fixture_pair(&truth, 21).unwrap();
    c.bench_function("fit_d_ground_21_rows", |b| {
        b.iter(|| fit_d(black_box(&transverse), Manifold::Ground, 46.0).unwrap())
    });
    c.bench_function("full_extraction_21_rows", |b| {
        b.iter(|| full_extraction(black_box(&axial), &transverse, &hr, &moduli, &truth).unwrap())
    });
}

fn coupling(c: &mut Criterion) {
    let m = LevelModel::default();
    let field = MagneticField::new(Vector3::new(-0.1388, 0.0, 0.0981), FRAME).unwrap();
    let s = SymmetryStrain::with_splitting(200.0, m.lambda_so_gs).unwrap();
    c.bench_function("qubit_pair_d_spin_t_spin", |b| {
        b.iter(|| {
            let pair = QubitPair::from_symmetry(&m, black_box(&s), &field).unwrap();
            (
                pair.d_spin(m.sus_gs.d, AcDirection::Egx),
                pair.t_spin(m.sus_gs.d, AcDirection::Egx),
            )
        })
    });
}

criterion_group!(benches, levels, fits, coupling);
criterion_main!(benches);
