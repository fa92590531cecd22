//! Non-Hermitian Creutz ladder: Hamiltonians, spectra, degeneracy
//! classification, skin-effect metrics and wave-packet dynamics.
//!
//! Everything is generic over the real scalar ([`scalar::Real`], `f32` or
//! `f64`); the aliases below fix it to `f64`.

pub mod degeneracy;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod linalg;
pub mod localization;
pub mod model;
pub mod scalar;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};

pub type Complex64 = scalar::C<f64>;
pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Params = model::ModelParams<f64>;
pub type Derived = model::DerivedParams<f64>;
pub type Spectrum = spectral::SpectrumResult<f64>;
pub type Report = degeneracy::DegeneracyReport<f64>;
pub type Gauge = gauge::GaugeReport<f64>;
pub type Trace = dynamics::WavepacketTrace<f64>;
pub type Grid = sweep::GridSpec<f64>;
pub type Row = sweep::GridRow<f64>;
