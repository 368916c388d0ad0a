//! Mutual-coherence kernel between the two arms,
//!
//! ```text
//! K(x1, x2) = ∫ I_s(x') · h2*(x', x2) · h1(x', x1) dx'
//! h_k(x', x) = exp[iπ(x' - x)² / (λ z_k)] / sqrt(λ z_k)
//! ```
//!
//! Expanding the two chirps, the x'-dependence factors into a fixed chirp
//! `exp(iπβx'²)` with `β = 1/(λz1) - 1/(λz2)` and a plane wave in the reduced
//! coordinate `u = x1/(λz1) - x2/(λz2)`:
//!
//! ```text
//! K = exp[iπ(x1²/(λz1) - x2²/(λz2))] / (λ sqrt(z1 z2)) · F(u)
//! F(u) = ∫ I_s(x') exp(iπβx'²) exp(-2πi u x') dx'
//! ```
//!
//! `F` is integrated with a dyadic trapezoid hierarchy over the source
//! support, starting from a step that puts at least 8 samples on every π of
//! phase, halving the step and Richardson-extrapolating until two successive
//! estimates agree to `1e-8` of `∫I_s`.

use std::sync::OnceLock;

use num_complex::Complex;

use super::source::{OpticalGeometry, SourceSpec};
use crate::scalar::Real;

/// Convergence tolerance, relative to `∫ I_s dx'`.
pub const KERNEL_TOLERANCE: f64 = 1e-8;

const MIN_LEVEL: usize = 4;
const MAX_LEVEL: usize = 20;
const MAX_REFINEMENTS: usize = 10;
const RESYNC: usize = 128;

/// Reusable evaluator of `K(x1, x2)` for one source and geometry.
///
/// Node coefficients are cached per refinement level and shared by all
/// evaluations, so one evaluator should be reused for a whole profile.
/// It is `Sync`; evaluations may run concurrently.
pub struct CoherenceKernel<'a, T: Real> {
    source: &'a SourceSpec<T>,
    inv_lz1: T,
    inv_lz2: T,
    beta: T,
    prefactor: T,
    lo: T,
    hi: T,
    scale: T,
    levels: Vec<OnceLock<Vec<Complex<T>>>>,
}

impl<'a, T: Real> CoherenceKernel<'a, T> {
    pub fn new(source: &'a SourceSpec<T>, geom: &OpticalGeometry<T>) -> Self {
        let lam = source.wavelength;
        let inv_lz1 = T::one() / (lam * geom.z1);
        let inv_lz2 = T::one() / (lam * geom.z2);
        let (lo, hi) = source.profile.support();
        let mut kernel = Self {
            source,
            inv_lz1,
            inv_lz2,
            beta: inv_lz1 - inv_lz2,
            prefactor: T::one() / (lam * (geom.z1 * geom.z2).sqrt()),
            lo,
            hi,
            scale: T::one(),
            levels: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect(),
        };
        kernel.scale = kernel.profile_integral();
        kernel
    }

    /// Reduced coordinate `u = x1/(λz1) - x2/(λz2)`.
    #[inline]
    pub fn reduced_coordinate(&self, x1: T, x2: T) -> T {
        x1 * self.inv_lz1 - x2 * self.inv_lz2
    }

    /// `1 / (λ sqrt(z1 z2))`.
    pub fn prefactor(&self) -> T {
        self.prefactor
    }

    /// Full complex kernel value.
    pub fn evaluate(&self, x1: T, x2: T) -> Complex<T> {
        let phase = T::PI() * (x1 * x1 * self.inv_lz1 - x2 * x2 * self.inv_lz2);
        T::cis(phase) * self.reduced(self.reduced_coordinate(x1, x2)) * self.prefactor
    }

    /// `|K(x1, x2)|²`.
    pub fn norm_sqr(&self, x1: T, x2: T) -> T {
        let f = self.reduced(self.reduced_coordinate(x1, x2)).norm_sqr();
        f * self.prefactor * self.prefactor
    }

    /// `|K|²` at reduced coordinate `u`.
    pub fn norm_sqr_at(&self, u: T) -> T {
        self.reduced(u).norm_sqr() * self.prefactor * self.prefactor
    }

    /// The reduced integral `F(u)`.
    pub fn reduced(&self, u: T) -> Complex<T> {
        let width = self.hi - self.lo;
        let slope = (self.beta * self.lo - u).abs().max((self.beta * self.hi - u).abs());
        // h · 2π·slope <= π/8  ⇔  intervals >= 16 · width · slope
        let needed = (T::of(16.0) * width * slope).ceil().to_f64().unwrap_or(f64::MAX);
        let mut start = MIN_LEVEL;
        while start < MAX_LEVEL && ((1u64 << start) as f64) < needed {
            start += 1;
        }
        let tol = T::of(KERNEL_TOLERANCE) * self.scale;

        let mut trapezoid = self.trapezoid_from_scratch(start, u);
        let mut row = vec![trapezoid];
        let mut prev_diag = trapezoid;
        let last = (start + MAX_REFINEMENTS).min(MAX_LEVEL);
        for (j, level) in (start + 1..=last).enumerate() {
            let h = width / T::of((1u64 << level) as f64);
            trapezoid = trapezoid * T::of(0.5) + self.level_sum(level, u) * h;
            let mut next = Vec::with_capacity(row.len() + 1);
            next.push(trapezoid);
            let mut factor = T::one();
            for (m, prev) in row.iter().enumerate() {
                factor = factor * T::of(4.0);
                let better = next[m] + (next[m] - *prev) / (factor - T::one());
                next.push(better);
            }
            let diag = *next.last().expect("row is non-empty");
            row = next;
            if j >= 1 && (diag - prev_diag).norm() <= tol {
                return diag;
            }
            prev_diag = diag;
        }
        prev_diag
    }

    fn trapezoid_from_scratch(&self, level: usize, u: T) -> Complex<T> {
        let width = self.hi - self.lo;
        let ends = self.level_sum(0, u) * T::of(0.5);
        let interior = (1..=level).fold(Complex::new(T::zero(), T::zero()), |acc, l| acc + self.level_sum(l, u));
        (ends + interior) * (width / T::of((1u64 << level) as f64))
    }

    /// Nodes of a level: level 0 is the two end points, level `l >= 1` the
    /// `2^(l-1)` midpoints `lo + (2k+1)·width/2^l`.
    fn node(&self, level: usize, k: usize) -> T {
        let width = self.hi - self.lo;
        if level == 0 {
            return if k == 0 { self.lo } else { self.hi };
        }
        self.lo + width * T::of((2 * k + 1) as f64) / T::of((1u64 << level) as f64)
    }

    fn coefficients(&self, level: usize) -> &[Complex<T>] {
        self.levels[level].get_or_init(|| {
            let count = if level == 0 { 2 } else { 1usize << (level - 1) };
            (0..count)
                .map(|k| {
                    let x = self.node(level, k);
                    T::cis(T::PI() * self.beta * x * x) * self.source.intensity(x)
                })
                .collect()
        })
    }

    /// `Σ_k c_k exp(-2πi u x_k)` over the nodes of one level.
    fn level_sum(&self, level: usize, u: T) -> Complex<T> {
        let coeffs = self.coefficients(level);
        let w = -T::of(2.0) * T::PI() * u;
        if level == 0 {
            return coeffs[0] * T::cis(w * self.lo) + coeffs[1] * T::cis(w * self.hi);
        }
        let step = (self.hi - self.lo) * T::of(2.0) / T::of((1u64 << level) as f64);
        let rot = T::cis(w * step);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (block, chunk) in coeffs.chunks(RESYNC).enumerate() {
            let mut phasor = T::cis(w * self.node(level, block * RESYNC));
            for c in chunk {
                acc = acc + c * phasor;
                phasor = phasor * rot;
            }
        }
        acc
    }

    fn profile_integral(&self) -> T {
        const N: usize = 4096;
        let h = (self.hi - self.lo) / T::of_usize(N);
        let sum: T = (0..=N)
            .map(|i| {
                let w = if i == 0 || i == N { T::of(0.5) } else { T::one() };
                w * self.source.intensity(self.lo + h * T::of_usize(i))
            })
            .sum();
        (sum * h).max(T::min_positive_value())
    }
}

/// `K(x1, x2)` for a single pair of points.
pub fn mutual_coherence_kernel<T: Real>(x1: T, x2: T, source: &SourceSpec<T>, geom: &OpticalGeometry<T>) -> Complex<T> {
    CoherenceKernel::new(source, geom).evaluate(x1, x2)
}
