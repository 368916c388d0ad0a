//! Simulation of lensless ghost imaging with thermal light.
//!
//! The crate is split the way the measurement is:
//!
//! - [`optics`]: grids, masks, Fresnel propagation and the mutual-coherence
//!   kernel linking the object arm and the reference arm.
//! - [`ensemble`]: Monte Carlo over delta-correlated thermal source
//!   realizations, estimating the normalized intensity-fluctuation
//!   correlation `Δg²(x2)` between a bucket detector and a scanning point
//!   detector.
//! - [`analytic`]: the same `Δg²(x2)` by quadrature of the coherence kernel
//!   (the reference the Monte Carlo is checked against), plus the pointlike
//!   `N + |T|²` visibility model.
//! - [`coincidence`]: temporal HBT simulation (thermal intensity trace,
//!   photon thinning, start-stop histogram, `g²(τ)` estimation).
//! - [`metrics`]: peak finding, widths and visibility of reconstructed
//!   profiles.
//!
//! Numerical code is generic over [`Real`] (`f32`/`f64`); the aliases at the
//! crate root fix it to `f64`, which is what the accuracy targets assume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod coincidence;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod optics;
pub mod profile;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type Grid = optics::TransverseGrid<f64>;
pub type Field = optics::ComplexField<f64>;
pub type Mask = optics::TransmissionMask<f64>;
pub type Source = optics::SourceSpec<f64>;
pub type Profile = optics::SourceProfile<f64>;
pub type Geometry = optics::OpticalGeometry<f64>;
pub type Ensemble = ensemble::EnsembleConfig<f64>;
pub type Correlation = profile::CorrelationProfile<f64>;
