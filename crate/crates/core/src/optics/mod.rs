//! Deterministic wave-optics kernels: grids, fields, masks, Fresnel
//! propagation and the two-arm mutual-coherence kernel.

pub mod field;
pub mod grid;
pub mod kernel;
pub mod mask;
pub mod propagate;
pub mod source;

pub use field::ComplexField;
pub use grid::TransverseGrid;
pub use kernel::{mutual_coherence_kernel, CoherenceKernel, KERNEL_TOLERANCE};
pub use mask::{apply_mask, MaskFeature, TransmissionMask};
pub use propagate::{
    check_sampling, fresnel_propagate, fresnel_propagate_with, max_sampling_step, FresnelPropagator, PropagationMethod,
};
pub use source::{OpticalGeometry, SourceProfile, SourceSpec};

use crate::error::Result;
use crate::scalar::Real;

/// Builds a [`TransverseGrid`]; see [`TransverseGrid::new`].
pub fn make_grid<T: Real>(x_min: T, x_max: T, n_points: usize) -> Result<TransverseGrid<T>> {
    TransverseGrid::new(x_min, x_max, n_points)
}
