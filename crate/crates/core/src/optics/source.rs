use serde::{Deserialize, Serialize};

use super::grid::TransverseGrid;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Gaussian profiles are integrated out to this many 1/e² half-widths
/// (relative intensity e^-32 at the cut).
const GAUSSIAN_CUTOFF: f64 = 4.0;

/// One-dimensional intensity profile `I_s(x')` of the thermal source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SourceProfile<T> {
    /// `I_s = 1` for `|x'| <= half_width`.
    Uniform { half_width: T },
    /// `I_s = exp(-2 x'² / half_width²)`, `half_width` being the 1/e² radius.
    Gaussian { half_width: T },
    /// Linear interpolation between non-negative samples, zero outside the grid.
    Sampled { grid: TransverseGrid<T>, values: Vec<T> },
}

impl<T: Real> SourceProfile<T> {
    pub fn intensity(&self, x: T) -> T {
        match self {
            SourceProfile::Uniform { half_width } => {
                if x.abs() <= *half_width {
                    T::one()
                } else {
                    T::zero()
                }
            }
            SourceProfile::Gaussian { half_width } => {
                let r = x / *half_width;
                (-T::of(2.0) * r * r).exp()
            }
            SourceProfile::Sampled { grid, values } => {
                if !grid.contains(x) {
                    return T::zero();
                }
                let f = (x - grid.x_min()) / grid.dx();
                let i = f.floor().to_usize().unwrap_or(0).min(values.len() - 2);
                let t = f - T::of_usize(i);
                values[i] * (T::one() - t) + values[i + 1] * t
            }
        }
    }

    /// Interval outside which the profile is (numerically) zero.
    pub fn support(&self) -> (T, T) {
        match self {
            SourceProfile::Uniform { half_width } => (-*half_width, *half_width),
            SourceProfile::Gaussian { half_width } => {
                let c = T::of(GAUSSIAN_CUTOFF) * *half_width;
                (-c, c)
            }
            SourceProfile::Sampled { grid, values } => {
                let first = values.iter().position(|v| *v > T::zero()).unwrap_or(0);
                let last = values.iter().rposition(|v| *v > T::zero()).unwrap_or(values.len() - 1);
                let lo = grid.coord(first.saturating_sub(1));
                let hi = grid.coord((last + 1).min(values.len() - 1));
                (lo, hi)
            }
        }
    }

    /// Half-width used for resolution and speckle-size estimates.
    ///
    /// Uniform: the half-width itself. Gaussian: the 1/e² radius. Sampled:
    /// half the extent of the non-zero support.
    pub fn characteristic_half_width(&self) -> T {
        match self {
            SourceProfile::Uniform { half_width } | SourceProfile::Gaussian { half_width } => *half_width,
            SourceProfile::Sampled { .. } => {
                let (lo, hi) = self.support();
                (hi - lo) / T::of(2.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SourceProfile::Uniform { half_width } | SourceProfile::Gaussian { half_width } => {
                if !(*half_width > T::zero() && half_width.is_finite()) {
                    return Err(invalid(format!("source half-width must be positive, got {half_width}")));
                }
            }
            SourceProfile::Sampled { grid, values } => {
                if values.len() != grid.len() {
                    return Err(Error::Shape(format!(
                        "sampled profile has {} values for a {}-point grid",
                        values.len(),
                        grid.len()
                    )));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
                    return Err(invalid("sampled source profile must be finite and non-negative"));
                }
                if values.iter().all(|v| *v == T::zero()) {
                    return Err(invalid("source profile has zero integral"));
                }
            }
        }
        Ok(())
    }
}

/// Spatially incoherent quasi-monochromatic thermal source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec<T> {
    pub wavelength: T,
    pub profile: SourceProfile<T>,
    pub coherence_time: T,
}

impl<T: Real> SourceSpec<T> {
    pub fn new(wavelength: T, profile: SourceProfile<T>, coherence_time: T) -> Result<Self> {
        if !(wavelength > T::zero() && wavelength.is_finite()) {
            return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        if !(coherence_time > T::zero() && coherence_time.is_finite()) {
            return Err(invalid(format!("coherence time must be positive, got {coherence_time}")));
        }
        profile.validate()?;
        Ok(Self { wavelength, profile, coherence_time })
    }

    pub fn uniform(wavelength: T, half_width: T, coherence_time: T) -> Result<Self> {
        Self::new(wavelength, SourceProfile::Uniform { half_width }, coherence_time)
    }

    pub fn intensity(&self, x: T) -> T {
        self.profile.intensity(x)
    }
}

/// Source-to-object (`z1`) and source-to-scanning-detector (`z2`) distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalGeometry<T> {
    pub z1: T,
    pub z2: T,
}

impl<T: Real> OpticalGeometry<T> {
    pub fn new(z1: T, z2: T) -> Result<Self> {
        if !(z1 > T::zero() && z2 > T::zero() && z1.is_finite() && z2.is_finite()) {
            return Err(invalid(format!("arm distances must be positive, got z1={z1}, z2={z2}")));
        }
        Ok(Self { z1, z2 })
    }

    pub fn swapped(&self) -> Self {
        Self { z1: self.z2, z2: self.z1 }
    }
}
