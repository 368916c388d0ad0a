use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Uniform 1D transverse sampling grid.
///
/// Coordinates are always recomputed from the sample index as
/// `x_min + i * dx`, never accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseGrid<T> {
    x_min: T,
    x_max: T,
    n_points: usize,
}

impl<T: Real> TransverseGrid<T> {
    pub fn new(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n_points}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(invalid(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn centered(half_width: T, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    /// Grid starting at `x_min` with an exact step and sample count.
    pub fn with_step(x_min: T, dx: T, n_points: usize) -> Result<Self> {
        if !(dx > T::zero()) {
            return Err(invalid(format!("grid step must be positive, got {dx}")));
        }
        if n_points < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n_points}")));
        }
        Self::new(x_min, x_min + dx * T::of_usize(n_points - 1), n_points)
    }

    #[inline]
    pub fn x_min(&self) -> T {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> T {
        self.x_max
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.n_points - 1)
    }

    #[inline]
    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        self.x_min + T::of_usize(i) * self.dx()
    }

    pub fn coords(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |i| self.x_min + T::of_usize(i) * dx)
    }

    /// Index of the sample nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: T) -> usize {
        let f = ((x - self.x_min) / self.dx()).round();
        if f <= T::zero() {
            0
        } else {
            f.to_usize().unwrap_or(usize::MAX).min(self.n_points - 1)
        }
    }

    /// Inclusive index range of samples with `lo <= x <= hi`, or `None` if empty.
    pub fn index_range(&self, lo: T, hi: T) -> Option<(usize, usize)> {
        let dx = self.dx();
        let eps = dx * T::of(1e-9);
        let first = ((lo - self.x_min - eps) / dx).ceil().max(T::zero());
        let last = ((hi - self.x_min + eps) / dx).floor();
        if last < T::zero() {
            return None;
        }
        let first = first.to_usize()?;
        let last = last.to_usize()?.min(self.n_points - 1);
        (first <= last).then_some((first, last))
    }

    /// Every `stride`-th sample, starting at sample 0.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("stride must be positive"));
        }
        let n = (self.n_points - 1) / stride + 1;
        Self::with_step(self.x_min, self.dx() * T::of_usize(stride), n)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.x_min == other.x_min && self.x_max == other.x_max
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub fn cast<U: Real>(&self) -> TransverseGrid<U> {
        TransverseGrid { x_min: U::of(self.x_min.as_f64()), x_max: U::of(self.x_max.as_f64()), n_points: self.n_points }
    }
}

/// Trapezoid weights (in units of `dx`) for the inclusive sample range `[first, last]`.
pub(crate) fn trapezoid_weight(i: usize, first: usize, last: usize) -> f64 {
    if first == last {
        1.0
    } else if i == first || i == last {
        0.5
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_examples() {
        let g = TransverseGrid::<f64>::new(-5e-3, 5e-3, 1001).unwrap();
        assert!((g.dx() - 1e-5).abs() < 1e-18);
        let g = TransverseGrid::new(0.0, 1.0, 2).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.coord(1), 1.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TransverseGrid::new(-5e-3, 5e-3, 1).is_err());
        assert!(TransverseGrid::new(1.0, 1.0, 10).is_err());
        assert!(TransverseGrid::new(2.0, 1.0, 10).is_err());
        assert!(TransverseGrid::new(f64::NAN, 1.0, 10).is_err());
    }

    #[test]
    fn coordinates_do_not_accumulate() {
        let g = TransverseGrid::<f64>::new(-1.0e-3, 3.0e-3, 40_001).unwrap();
        let last = g.coords().last().unwrap();
        assert_eq!(last, g.x_min() + 40_000.0 * g.dx());
        assert!((last - 3.0e-3).abs() < 1e-15);
    }

    #[test]
    fn ranges_and_subsampling() {
        let g = TransverseGrid::new(0.0, 10.0, 11).unwrap();
        assert_eq!(g.index_range(2.0, 4.0), Some((2, 4)));
        assert_eq!(g.index_range(2.5, 2.7), None);
        assert_eq!(g.index_range(-5.0, 0.0), Some((0, 0)));
        assert_eq!(g.nearest_index(7.4), 7);
        assert_eq!(g.nearest_index(-3.0), 0);
        let s = g.subsample(5).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.coord(2), 10.0);
    }
}
