//! Strain, spin-orbit and Zeeman level model of the negatively charged
//! silicon-vacancy center in diamond, with susceptibility fitting,
//! phonon-limited rates and spin-strain coupling estimates.

pub mod devicemodel;
pub mod error;
pub mod fitkit;
pub mod levels;
pub mod phononkinetics;
pub mod spincoupling;
pub mod tensorframes;

pub use error::{Error, Result};
pub use levels::{
    diagonalize_manifold, optical_spectrum, orbital_splitting, project_strain, LevelModel, LineLabel, Manifold,
    ManifoldEigensystem, OperatingPoint, ShearPairing, SpectrumLine, Susceptibilities, SymmetryStrain,
};
pub use tensorframes::{
    classify_orientation, defect_axes, transform_field, transform_strain, Frame, LoadClass, MagneticField, Orientation,
    StrainTensor,
};
