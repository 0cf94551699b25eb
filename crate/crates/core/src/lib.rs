//! Azimuthal eigenmodes of broadband THz-optical parametric scattering.
//!
//! The generic modules work with any [`Real`] scalar; the aliases at the
//! crate root fix it to `f64`.

pub mod coupling;
pub mod decomp;
pub mod error;
pub mod format;
pub mod oracle;
pub mod physics;
pub mod scalar;
pub mod scan;
pub mod scatter;
pub mod specfun;
pub mod verify;

pub use coupling::{ChiVariant, Parity};
pub use decomp::Side;
pub use error::{Error, Result};
pub use physics::{ExperimentConfig, GainModel};
pub use scalar::Real;

pub type CouplingMatrix = coupling::CouplingMatrix<f64>;
pub type ModeDecomposition = decomp::ModeDecomposition<f64>;
pub type ScaledInfeldRow = specfun::ScaledInfeldRow<f64>;
pub type GainSpectrum = scatter::GainSpectrum<f64>;
pub type AngularIntensity = scatter::AngularIntensity<f64>;
pub type ScatteringKernels = scatter::ScatteringKernels<f64>;
