use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::ComplexField;
use super::grid::TransverseGrid;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

const MAGNITUDE_SLACK: f64 = 1e-12;

/// A transparent top-hat window of the object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskFeature<T> {
    pub center: T,
    pub width: T,
}

/// Complex amplitude transmission `T(x)` sampled on the object grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMask<T> {
    grid: TransverseGrid<T>,
    t: Vec<Complex<T>>,
    features: Vec<MaskFeature<T>>,
}

impl<T: Real> TransmissionMask<T> {
    /// Arbitrary samples; every `|t_i|` must be at most one.
    pub fn from_samples(grid: TransverseGrid<T>, t: Vec<Complex<T>>) -> Result<Self> {
        if t.len() != grid.len() {
            return Err(Error::Shape(format!("mask has {} samples for a {}-point grid", t.len(), grid.len())));
        }
        let limit = T::one() + T::of(MAGNITUDE_SLACK);
        if let Some(i) = t.iter().position(|v| !(v.norm() <= limit)) {
            return Err(invalid(format!("mask sample {i} has |t| = {} > 1", t[i].norm())));
        }
        Ok(Self { grid, t, features: Vec::new() })
    }

    pub fn uniform(grid: TransverseGrid<T>) -> Self {
        Self { t: vec![Complex::new(T::one(), T::zero()); grid.len()], grid, features: Vec::new() }
    }

    pub fn opaque(grid: TransverseGrid<T>) -> Self {
        Self { t: vec![Complex::new(T::zero(), T::zero()); grid.len()], grid, features: Vec::new() }
    }

    /// Fully transmitting top-hat windows, opaque elsewhere.
    pub fn top_hats(grid: TransverseGrid<T>, features: Vec<MaskFeature<T>>) -> Result<Self> {
        if features.is_empty() {
            return Err(invalid("at least one feature is required"));
        }
        for f in &features {
            if !(f.width > T::zero() && f.width.is_finite() && f.center.is_finite()) {
                return Err(invalid(format!("feature width must be positive, got {}", f.width)));
            }
        }
        let slack = grid.dx() * T::of(1e-9);
        let two = T::of(2.0);
        let t = grid
            .coords()
            .map(|x| {
                let open = features.iter().any(|f| (x - f.center).abs() <= f.width / two + slack);
                Complex::new(if open { T::one() } else { T::zero() }, T::zero())
            })
            .collect();
        Ok(Self { grid, t, features })
    }

    /// Two slits of equal `width` whose centers are `center_separation` apart,
    /// symmetric about x = 0.
    pub fn double_slit(grid: TransverseGrid<T>, width: T, center_separation: T) -> Result<Self> {
        if !(center_separation >= width) {
            return Err(invalid(format!(
                "slit separation {center_separation} must be at least the slit width {width}"
            )));
        }
        let h = center_separation / T::of(2.0);
        Self::top_hats(grid, vec![MaskFeature { center: -h, width }, MaskFeature { center: h, width }])
    }

    /// Two pinholes (1D cross-sections) of widths `d1` (at `-separation/2`)
    /// and `d2` (at `+separation/2`).
    pub fn pinhole_pair(grid: TransverseGrid<T>, d1: T, d2: T, separation: T) -> Result<Self> {
        let two = T::of(2.0);
        if !(separation >= (d1 + d2) / two) {
            return Err(invalid(format!("pinholes of {d1} and {d2} overlap at separation {separation}")));
        }
        let h = separation / two;
        Self::top_hats(grid, vec![MaskFeature { center: -h, width: d1 }, MaskFeature { center: h, width: d2 }])
    }

    #[inline]
    pub fn grid(&self) -> &TransverseGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex<T>] {
        &self.t
    }

    /// Top-hat windows this mask was built from (empty for sampled masks).
    pub fn features(&self) -> &[MaskFeature<T>] {
        &self.features
    }

    pub fn power_transmission(&self) -> Vec<T> {
        self.t.iter().map(|t| t.norm_sqr()).collect()
    }

    pub fn is_opaque(&self) -> bool {
        self.t.iter().all(|t| t.norm_sqr() == T::zero())
    }

    /// Smallest interval containing every transmitting sample (or feature).
    pub fn extent(&self) -> Option<(T, T)> {
        if !self.features.is_empty() {
            let two = T::of(2.0);
            let lo = self.features.iter().map(|f| f.center - f.width / two).fold(T::infinity(), T::min);
            let hi = self.features.iter().map(|f| f.center + f.width / two).fold(T::neg_infinity(), T::max);
            return Some((lo, hi));
        }
        let first = self.t.iter().position(|t| t.norm_sqr() > T::zero())?;
        let last = self.t.iter().rposition(|t| t.norm_sqr() > T::zero())?;
        Some((self.grid.coord(first), self.grid.coord(last)))
    }

    /// Pointwise product `field_i * t_i`.
    pub fn apply(&self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        if !self.grid.same_as(field.grid()) {
            return Err(Error::Shape("mask and field live on different grids".into()));
        }
        let amplitude = field.amplitude().iter().zip(&self.t).map(|(a, t)| a * t).collect();
        ComplexField::new(*field.grid(), amplitude)
    }
}

/// Multiplies `field` by the mask transmission.
pub fn apply_mask<T: Real>(field: &ComplexField<T>, mask: &TransmissionMask<T>) -> Result<ComplexField<T>> {
    mask.apply(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(grid: TransverseGrid<f64>) -> ComplexField<f64> {
        ComplexField::from_fn(grid, |_| Complex::new(1.0, 0.0))
    }

    #[test]
    fn uniform_and_opaque() {
        let g = TransverseGrid::new(-1e-3, 1e-3, 101).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex::new(x, 2.0 * x));
        assert_eq!(apply_mask(&f, &TransmissionMask::uniform(g)).unwrap(), f);
        assert!(apply_mask(&f, &TransmissionMask::opaque(g)).unwrap().is_zero());
    }

    #[test]
    fn grid_mismatch_is_a_shape_error() {
        let g = TransverseGrid::new(-1e-3, 1e-3, 101).unwrap();
        let h = TransverseGrid::new(-1e-3, 1e-3, 102).unwrap();
        let err = apply_mask(&ones(g), &TransmissionMask::uniform(h)).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn pinhole_pair_geometry() {
        // 1 µm sampling over ±4 mm
        let g = TransverseGrid::new(-4e-3, 4e-3, 8001).unwrap();
        let m = TransmissionMask::pinhole_pair(g, 0.77e-3, 0.72e-3, 3.66e-3).unwrap();
        let out = apply_mask(&ones(g), &m).unwrap();
        let open: Vec<f64> = g.coords().zip(out.amplitude()).filter(|(_, a)| a.re > 0.5).map(|(x, _)| x).collect();
        let left: Vec<f64> = open.iter().copied().filter(|x| *x < 0.0).collect();
        let right: Vec<f64> = open.iter().copied().filter(|x| *x > 0.0).collect();
        let width = |v: &[f64]| v.last().unwrap() - v.first().unwrap();
        let center = |v: &[f64]| 0.5 * (v.last().unwrap() + v.first().unwrap());
        assert!((width(&left) - 0.77e-3).abs() <= 1e-6 + 1e-12);
        assert!((width(&right) - 0.72e-3).abs() <= 1e-6 + 1e-12);
        assert!((center(&right) - center(&left) - 3.66e-3).abs() <= 1e-6 + 1e-12);
        assert_eq!(m.extent().unwrap(), (-1.83e-3 - 0.385e-3, 1.83e-3 + 0.36e-3));
    }

    #[test]
    fn sampled_masks_are_bounded() {
        let g = TransverseGrid::new(0.0, 1.0, 3).unwrap();
        let bad = vec![Complex::new(0.0, 0.0), Complex::new(0.9, 0.9), Complex::new(0.0, 0.0)];
        assert!(TransmissionMask::from_samples(g, bad).is_err());
        let ok = vec![Complex::new(0.0, 1.0), Complex::new(0.6, 0.8), Complex::new(0.0, 0.0)];
        let m = TransmissionMask::from_samples(g, ok).unwrap();
        assert_eq!(m.extent(), Some((0.0, 0.5)));
    }
}
