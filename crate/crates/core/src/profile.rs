use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// What the values of a [`CorrelationProfile`] represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Background-subtracted `Δg²(x2) = ⟨ΔI1 ΔI2⟩ / (⟨I1⟩⟨I2⟩)`.
    Fluctuation,
    /// `g²(x2) = 1 + Δg²(x2)`, background included.
    RawG2,
}

/// How `std_err` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorEstimate {
    /// Deterministic evaluation; errors are zero.
    Exact,
    BatchMeans {
        batches: usize,
    },
    Jackknife,
}

/// `Δg²` (or `g²`) samples over the scanning-detector coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile<T> {
    pub x2: Vec<T>,
    pub delta_g2: Vec<T>,
    pub std_err: Vec<T>,
    pub n_realizations: usize,
    pub normalization: Normalization,
    pub error_estimate: ErrorEstimate,
}

impl<T: Real> CorrelationProfile<T> {
    pub fn new(
        x2: Vec<T>,
        delta_g2: Vec<T>,
        std_err: Vec<T>,
        n_realizations: usize,
        normalization: Normalization,
        error_estimate: ErrorEstimate,
    ) -> Result<Self> {
        if x2.len() != delta_g2.len() || x2.len() != std_err.len() {
            return Err(Error::Shape(format!(
                "profile arrays differ in length: x2 {}, values {}, std_err {}",
                x2.len(),
                delta_g2.len(),
                std_err.len()
            )));
        }
        Ok(Self { x2, delta_g2, std_err, n_realizations, normalization, error_estimate })
    }

    pub fn len(&self) -> usize {
        self.x2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x2.is_empty()
    }

    /// `1 + Δg²` under the Gaussian-statistics identity; no-op if already raw.
    pub fn to_raw_g2(&self) -> Self {
        let mut out = self.clone();
        if self.normalization == Normalization::Fluctuation {
            out.delta_g2.iter_mut().for_each(|v| *v = *v + T::one());
            out.normalization = Normalization::RawG2;
        }
        out
    }

    /// Background-subtracted values regardless of the stored normalization.
    pub fn fluctuation(&self) -> Vec<T> {
        match self.normalization {
            Normalization::Fluctuation => self.delta_g2.clone(),
            Normalization::RawG2 => self.delta_g2.iter().map(|v| *v - T::one()).collect(),
        }
    }

    pub fn max_value(&self) -> T {
        self.delta_g2.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Second central moment of the fluctuation profile (negative samples
    /// clipped to zero), using the profile as a weight over `x2`.
    pub fn second_moment(&self) -> T {
        let w: Vec<T> = self.fluctuation().into_iter().map(|v| v.max(T::zero())).collect();
        let total: T = w.iter().copied().sum();
        if total <= T::zero() {
            return T::zero();
        }
        let mean = self.x2.iter().zip(&w).map(|(x, w)| *x * *w).sum::<T>() / total;
        self.x2.iter().zip(&w).map(|(x, w)| (*x - mean) * (*x - mean) * *w).sum::<T>() / total
    }
}
