//! Scalar abstraction for the wave-optics and estimation kernels.
//!
//! Everything numeric in this crate is written against [`Real`], which is
//! implemented for `f32` and `f64`. The accuracy targets quoted throughout the
//! docs (1e-9 power conservation and the like) assume `f64`; `f32` runs the
//! same code paths with single-precision error floors.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the simulation kernels.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite float converts to f64")
    }

    /// Unit phasor `exp(i·phase)`.
    #[inline]
    fn cis(phase: Self) -> Complex<Self> {
        let (s, c) = phase.sin_cos();
        Complex::new(c, s)
    }
}

impl Real for f32 {}
impl Real for f64 {}
