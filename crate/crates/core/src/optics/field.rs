use num_complex::Complex;

use super::grid::TransverseGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sampled complex field amplitude on a transverse grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    grid: TransverseGrid<T>,
    amplitude: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: TransverseGrid<T>, amplitude: Vec<Complex<T>>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::Shape(format!("field has {} samples but its grid has {}", amplitude.len(), grid.len())));
        }
        Ok(Self { grid, amplitude })
    }

    pub fn zeros(grid: TransverseGrid<T>) -> Self {
        Self { amplitude: vec![Complex::new(T::zero(), T::zero()); grid.len()], grid }
    }

    /// Samples `f(x)` at every grid coordinate.
    pub fn from_fn(grid: TransverseGrid<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        let amplitude = grid.coords().map(f).collect();
        Self { grid, amplitude }
    }

    #[inline]
    pub fn grid(&self) -> &TransverseGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn amplitude(&self) -> &[Complex<T>] {
        &self.amplitude
    }

    #[inline]
    pub fn amplitude_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitude
    }

    pub fn into_amplitude(self) -> Vec<Complex<T>> {
        self.amplitude
    }

    pub fn intensity(&self) -> Vec<T> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `Σ |a_i|² · dx`.
    pub fn total_power(&self) -> T {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<T>() * self.grid.dx()
    }

    /// Intensity-weighted second central moment, `∫(x-x̄)²|a|² / ∫|a|²`.
    pub fn second_moment(&self) -> T {
        let total: T = self.amplitude.iter().map(|a| a.norm_sqr()).sum();
        let mean = self.grid.coords().zip(&self.amplitude).map(|(x, a)| x * a.norm_sqr()).sum::<T>() / total;
        self.grid.coords().zip(&self.amplitude).map(|(x, a)| (x - mean) * (x - mean) * a.norm_sqr()).sum::<T>() / total
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude.iter().all(|a| a.re == T::zero() && a.im == T::zero())
    }
}
