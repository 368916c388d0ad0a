//! Deterministic evaluation of the ghost-image correlation.
//!
//! Under Gaussian field statistics `⟨ΔI1(x1) ΔI2(x2)⟩ = |K(x1, x2)|²` and
//! `⟨I_k(x)⟩` is the arm's own kernel on its diagonal, so
//!
//! ```text
//!            ∫ |T(x1)|² |K12(x1, x2)|² dx1
//! Δg²(x2) = ---------------------------------
//!           ∫ |T(x1)|² K11(x1, x1) dx1 · K22(x2, x2)
//! ```
//!
//! which is exactly the expectation of the Monte Carlo estimator in
//! [`crate::ensemble`] with a full bucket and a point detector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optics::grid::trapezoid_weight;
use crate::optics::{CoherenceKernel, OpticalGeometry, SourceProfile, SourceSpec, TransmissionMask, TransverseGrid};
use crate::profile::{CorrelationProfile, ErrorEstimate, Normalization};
use crate::scalar::Real;

/// Relative tolerance for recognising commensurate `x1`/`x2` lattices.
const LATTICE_TOLERANCE: f64 = 1e-9;

/// Mask samples that transmit, with their trapezoid weights times `|T|²`.
fn transmitting_samples<T: Real>(mask: &TransmissionMask<T>) -> Vec<(usize, T)> {
    let n = mask.grid().len();
    mask.samples()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.norm_sqr() > T::zero())
        .map(|(i, t)| (i, t.norm_sqr() * T::of(trapezoid_weight(i, 0, n - 1))))
        .collect()
}

/// `Δg²(x2)` on `x2_grid` by quadrature of the coherence kernel.
pub fn delta_g2_analytic<T: Real>(
    mask: &TransmissionMask<T>,
    source: &SourceSpec<T>,
    geom: &OpticalGeometry<T>,
    x2_grid: &TransverseGrid<T>,
) -> Result<CorrelationProfile<T>> {
    let a = source.profile.characteristic_half_width();
    let resolution = source.wavelength * geom.z1 / (T::of(4.0) * a);
    let dx1 = mask.grid().dx();
    if !(dx1 < resolution) {
        return Err(invalid(format!(
            "mask step {dx1:e} m does not resolve the coherence kernel (needs < {resolution:e} m)"
        )));
    }
    let weights = transmitting_samples(mask);
    if weights.is_empty() {
        return Err(Error::DegenerateStatistics("mask transmits no light".into()));
    }

    let cross = CoherenceKernel::new(source, geom);
    let arm1 = CoherenceKernel::new(source, &OpticalGeometry { z1: geom.z1, z2: geom.z1 });
    let arm2 = CoherenceKernel::new(source, &OpticalGeometry { z1: geom.z2, z2: geom.z2 });
    let grid1 = mask.grid();

    let bucket_mean =
        weights.iter().map(|&(i, w)| w * arm1.evaluate(grid1.coord(i), grid1.coord(i)).re).sum::<T>() * dx1;

    let numerators = match lattice_step(grid1, x2_grid, &cross) {
        Some(k) => numerators_on_lattice(&cross, grid1, x2_grid, &weights, k),
        None => x2_grid
            .coords()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|x2| weights.iter().map(|&(i, w)| w * cross.norm_sqr(grid1.coord(i), x2)).sum::<T>() * dx1)
            .collect(),
    };

    let x2: Vec<T> = x2_grid.coords().collect();
    let values = x2.iter().zip(&numerators).map(|(&x, &num)| num / (bucket_mean * arm2.evaluate(x, x).re)).collect();
    CorrelationProfile::new(
        x2,
        values,
        vec![T::zero(); x2_grid.len()],
        0,
        Normalization::Fluctuation,
        ErrorEstimate::Exact,
    )
}

/// If `u(x1_i, x2_j) = u(x1_0, x2_0) + (i - k·j)·du1` for a positive integer
/// `k`, every needed kernel value lies on one 1D lattice.
fn lattice_step<T: Real>(
    grid1: &TransverseGrid<T>,
    grid2: &TransverseGrid<T>,
    kern: &CoherenceKernel<'_, T>,
) -> Option<usize> {
    let du1 = kern.reduced_coordinate(grid1.dx(), T::zero());
    let du2 = -kern.reduced_coordinate(T::zero(), grid2.dx());
    let ratio = (du2 / du1).as_f64();
    let k = ratio.round();
    (k >= 1.0 && (ratio - k).abs() <= LATTICE_TOLERANCE * k).then_some(k as usize)
}

fn numerators_on_lattice<T: Real>(
    kern: &CoherenceKernel<'_, T>,
    grid1: &TransverseGrid<T>,
    grid2: &TransverseGrid<T>,
    weights: &[(usize, T)],
    k: usize,
) -> Vec<T> {
    let du = kern.reduced_coordinate(grid1.dx(), T::zero());
    let u0 = kern.reduced_coordinate(grid1.x_min(), grid2.x_min());
    let i_lo = weights.first().expect("non-empty").0;
    let i_hi = weights.last().expect("non-empty").0;
    let m = grid2.len();
    // lattice index n = i - k·j + offset, offset = k·(m-1)
    let offset = k * (m - 1);
    let n_lo = i_lo;
    let n_hi = i_hi + offset;
    let mut needed = vec![false; n_hi - n_lo + 1];
    for j in 0..m {
        for &(i, _) in weights {
            needed[i + offset - k * j - n_lo] = true;
        }
    }
    let table: Vec<T> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| {
            if !needed[n - n_lo] {
                return T::zero();
            }
            let steps = n as f64 - offset as f64;
            kern.norm_sqr_at(u0 + du * T::of(steps))
        })
        .collect();
    let dx1 = grid1.dx();
    (0..m).map(|j| weights.iter().map(|&(i, w)| w * table[i + offset - k * j - n_lo]).sum::<T>() * dx1).collect()
}

/// Object made of `N` point-like transparent features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointlikeObject<T> {
    positions: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> PointlikeObject<T> {
    pub fn new(positions: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if positions.is_empty() || positions.len() != weights.len() {
            return Err(invalid(format!(
                "need matching, non-empty position/weight lists (got {} and {})",
                positions.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= T::zero() && w.is_finite())) {
            return Err(invalid("feature weights must be finite and non-negative"));
        }
        if weights.iter().all(|w| *w == T::zero()) {
            return Err(invalid("at least one feature weight must be positive"));
        }
        Ok(Self { positions, weights })
    }

    /// `N` unit-weight features.
    pub fn unit(positions: Vec<T>) -> Result<Self> {
        let weights = vec![T::one(); positions.len()];
        Self::new(positions, weights)
    }

    /// Number of features `N`.
    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Peak-to-background contrast `(max - N)/(max + N)` of
    /// [`g2_pointlike`], the maximum taken over the feature centers.
    pub fn visibility(&self, kernel_width: T) -> T {
        let background = T::of_usize(self.count());
        let peak = self.positions.iter().map(|&x| g2_pointlike(self, x, kernel_width)).fold(T::neg_infinity(), T::max);
        (peak - background) / (peak + background)
    }
}

/// `N + Σ_j w_j exp[-(x2 - p_j)² / (2σ²)]`: the `N + |T(x2)|²` form with the
/// ideal image blurred by a Gaussian of width `kernel_width`.
pub fn g2_pointlike<T: Real>(obj: &PointlikeObject<T>, x2: T, kernel_width: T) -> T {
    let two_var = T::of(2.0) * kernel_width * kernel_width;
    let image: T = obj
        .positions
        .iter()
        .zip(&obj.weights)
        .map(|(&p, &w)| {
            let d = x2 - p;
            // exact at the feature center even when two_var underflows
            if d == T::zero() {
                w
            } else {
                w * (-(d * d) / two_var).exp()
            }
        })
        .sum();
    T::of_usize(obj.count()) + image
}

/// First zero `λz/(2a)` of the coherence kernel of a uniform source of
/// half-width `a`.
pub fn predicted_speckle_size<T: Real>(source: &SourceSpec<T>, z: T) -> Result<T> {
    match source.profile {
        SourceProfile::Uniform { half_width } => Ok(source.wavelength * z / (T::of(2.0) * half_width)),
        _ => Err(Error::UnsupportedProfile(
            "speckle size has a closed form only for uniform sources; evaluate the coherence kernel instead".into(),
        )),
    }
}
