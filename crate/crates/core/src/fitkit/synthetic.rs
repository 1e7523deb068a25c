//! Synthetic sweeps for round-trip checks and shipped example data.
//!
//! The axial sweep loads a `[111]` emitter mostly along its own axis with a
//! small fixed admixture of the other components; the transverse sweep runs
//! the beam surrogate against a `[-111]` emitter. Both are synthetic.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{hr_b_for, ElasticModuli, HrPair, SpectraRow, SpectraSeries};
use crate::devicemodel::{surrogate_strain, BeamSurrogate, StrainTrajectory};
use crate::error::{Error, Result};
use crate::levels::{optical_spectrum, LevelModel};
use crate::tensorframes::{transform_field, transform_strain, Frame, MagneticField, Orientation, StrainTensor};

pub const AXIAL_ORIENTATION: Orientation = Orientation::Ppp;
pub const TRANSVERSE_ORIENTATION: Orientation = Orientation::Mpp;
/// Largest `e_zz` reached by the axial sweep.
pub const AXIAL_MAX_EZZ: f64 = 8.8e-5;
pub const AXIAL_MAX_VOLTS: f64 = 200.0;
pub const TRANSVERSE_MAX_VOLTS: f64 = 280.0;

/// Defect-frame axial strain per unit `e_zz`, as `(xx, yy, zz, yz, zx, xy)`.
pub const AXIAL_SHAPE: [f64; 6] = [0.04, -0.04, 1.0, 0.3, 0.0, 0.0];

fn controls(steps: usize, v_max: f64) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::invalid("steps", "need at least two sweep points"));
    }
    Ok((0..steps).map(|i| v_max * i as f64 / (steps - 1) as f64).collect())
}

/// Axial sweep with `e_zz = max_ezz (V / V_max)^2`, in the crystal frame.
pub fn axial_trajectory(steps: usize, max_ezz: f64) -> Result<StrainTrajectory> {
    let frame = Frame::Defect(AXIAL_ORIENTATION);
    let rows = controls(steps, AXIAL_MAX_VOLTS)?
        .into_iter()
        .map(|v| {
            let s = max_ezz * (v / AXIAL_MAX_VOLTS).powi(2);
            let local = StrainTensor::new(AXIAL_SHAPE.map(|c| c * s), frame)?;
            Ok((v, transform_strain(&local, Frame::Crystal)))
        })
        .collect::<Result<Vec<_>>>()?;
    StrainTrajectory::new(rows)
}

/// Beam-surrogate sweep from 0 to `v_max`, in the crystal frame.
pub fn transverse_trajectory(beam: &BeamSurrogate, steps: usize, v_max: f64) -> Result<StrainTrajectory> {
    let rows = controls(steps, v_max)?
        .into_iter()
        .map(|v| Ok((v, surrogate_strain(v, beam)?)))
        .collect::<Result<Vec<_>>>()?;
    StrainTrajectory::new(rows)
}

/// Model spectra along a trajectory as seen by one orientation, with the
/// defect-frame strain attached to each row.
pub fn spectra_along(
    model: &LevelModel,
    traj: &StrainTrajectory,
    orientation: Orientation,
    field: &MagneticField,
) -> Result<SpectraSeries> {
    let frame = Frame::Defect(orientation);
    let field = transform_field(field, frame);
    let rows = traj
        .controls()
        .iter()
        .zip(traj.strains())
        .map(|(&control, strain)| {
            let local = transform_strain(strain, frame);
            let lines: BTreeMap<_, _> = optical_spectrum(model, &local, &field)?
                .into_iter()
                .filter(|l| l.label.is_optical())
                .map(|l| (l.label, l.frequency))
                .collect();
            Ok(SpectraRow {
                control,
                lines,
                strain: Some(local),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SpectraSeries::new(rows)
}

/// Adds independent Gaussian jitter of `sigma` GHz to every line.
pub fn add_line_noise(series: &SpectraSeries, sigma: f64, seed: u64) -> Result<SpectraSeries> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("noise sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = series
        .rows()
        .iter()
        .map(|row| {
            let mut row = row.clone();
            for v in row.lines.values_mut() {
                *v += normal.sample(&mut rng);
            }
            row
        })
        .collect();
    SpectraSeries::new(rows)
}

/// Hughes-Runciman `B` pair under which the closure maps `model`'s `d` onto
/// its `f` for both manifolds.
pub fn consistent_hr(model: &LevelModel, moduli: &ElasticModuli) -> Result<HrPair> {
    Ok(HrPair::from_b(
        hr_b_for(model.sus_gs.d, model.sus_gs.f, moduli)?,
        hr_b_for(model.sus_es.d, model.sus_es.f, moduli)?,
    ))
}

/// Zero-field axial and transverse series for `model`.
pub fn fixture_pair(model: &LevelModel, steps: usize) -> Result<(SpectraSeries, SpectraSeries)> {
    let zero = MagneticField::zero(Frame::Crystal);
    let axial = spectra_along(
        model,
        &axial_trajectory(steps, AXIAL_MAX_EZZ)?,
        AXIAL_ORIENTATION,
        &zero,
    )?;
    let transverse = spectra_along(
        model,
        &transverse_trajectory(&BeamSurrogate::default(), steps, TRANSVERSE_MAX_VOLTS)?,
        TRANSVERSE_ORIENTATION,
        &zero,
    )?;
    Ok((axial, transverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitkit::full_extraction;
    use crate::levels::Manifold;

    #[test]
    fn noiseless_round_trip_is_a_fixed_point() {
        let truth = LevelModel::default();
        let moduli = ElasticModuli::default();
        let (axial, transverse) = fixture_pair(&truth, 21).unwrap();
        let out = full_extraction(
            &axial,
            &transverse,
            &consistent_hr(&truth, &moduli).unwrap(),
            &moduli,
            &truth,
        )
        .unwrap();
        let m = out.model;
        for (got, want) in [
            (m.sus_es.t_par, truth.sus_es.t_par),
            (m.sus_es.t_perp, truth.sus_es.t_perp),
            (m.sus_gs.d, truth.sus_gs.d),
            (m.sus_es.d, truth.sus_es.d),
            (m.sus_gs.f, truth.sus_gs.f),
            (m.sus_es.f, truth.sus_es.f),
        ] {
            assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
        }
        let (a2, t2) = fixture_pair(&m, 21).unwrap();
        for (s1, s2) in [(&axial, &a2), (&transverse, &t2)] {
            for (r1, r2) in s1.rows().iter().zip(s2.rows()) {
                for (l, v) in &r1.lines {
                    assert!((v - r2.lines[l]).abs() < 1e-3);
                }
            }
        }
    }

    #[test]
    fn transverse_fixture_has_no_axial_or_shear_strain_without_poisson() {
        let beam = BeamSurrogate {
            poisson: 0.0,
            ..BeamSurrogate::default()
        };
        let traj = transverse_trajectory(&beam, 5, 100.0).unwrap();
        let frame = Frame::Defect(TRANSVERSE_ORIENTATION);
        for e in traj.strains() {
            let local = transform_strain(e, frame);
            assert!(local.zz().abs() < 1e-20);
            assert!(local.yz().abs() < 1e-20 && local.zx().abs() < 1e-20);
        }
    }

    #[test]
    fn noise_is_seeded() {
        let (axial, _) = fixture_pair(&LevelModel::default(), 5).unwrap();
        let a = add_line_noise(&axial, 0.5, 7).unwrap();
        let b = add_line_noise(&axial, 0.5, 7).unwrap();
        let c = add_line_noise(&axial, 0.5, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.rows()[0].splitting(Manifold::Ground).is_ok());
    }
}
