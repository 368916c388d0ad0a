//! Paraxial (Fresnel) free-space propagation between two 1D grids.
//!
//! The transform evaluated is
//!
//! ```text
//! out(y) = 1/sqrt(λz) · Σ_x exp[iπ(x - y)² / (λz)] · in(x) · dx
//! ```
//!
//! i.e. the Fresnel impulse response with its unitary prefactor. Two
//! strategies are provided: a direct O(N·M) quadrature and a chirp-z
//! factorisation that turns the sum into a single FFT convolution
//! (O((N+M) log(N+M))). They are algebraically identical; the direct sum is
//! kept as the reference.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::field::ComplexField;
use super::grid::TransverseGrid;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationMethod {
    /// Pairwise sum over every (input, output) sample.
    Direct,
    /// Chirp-factored FFT convolution.
    #[default]
    ChirpZ,
}

/// Checks that both grids resolve the Fresnel chirp: `max(dx_in, dx_out) <=
/// λz / (2·span)`, `span` being the extent of the union of both windows.
pub fn check_sampling<T: Real>(
    input: &TransverseGrid<T>,
    output: &TransverseGrid<T>,
    distance: T,
    wavelength: T,
) -> Result<()> {
    let span = input.x_max().max(output.x_max()) - input.x_min().min(output.x_min());
    let limit = wavelength * distance / (T::of(2.0) * span);
    let dx = input.dx().max(output.dx());
    if dx > limit * (T::one() + T::of(1e-12)) {
        return Err(Error::Aliasing { dx: dx.as_f64(), limit: limit.as_f64(), span: span.as_f64() });
    }
    Ok(())
}

/// Largest grid step allowed by [`check_sampling`] for a given union span.
pub fn max_sampling_step<T: Real>(span: T, distance: T, wavelength: T) -> T {
    wavelength * distance / (T::of(2.0) * span)
}

/// Precomputed Fresnel transform between a fixed pair of grids.
///
/// Building one is the expensive part (chirps and the kernel spectrum);
/// [`FresnelPropagator::propagate`] can then be called repeatedly and from
/// several threads at once.
pub struct FresnelPropagator<T: Real> {
    input: TransverseGrid<T>,
    output: TransverseGrid<T>,
    distance: T,
    wavelength: T,
    method: PropagationMethod,
    chirpz: Option<ChirpZ<T>>,
}

struct ChirpZ<T: Real> {
    pre: Vec<Complex<T>>,
    post: Vec<Complex<T>>,
    kernel_spectrum: Vec<Complex<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> FresnelPropagator<T> {
    pub fn new(
        input: TransverseGrid<T>,
        output: TransverseGrid<T>,
        distance: T,
        wavelength: T,
        method: PropagationMethod,
    ) -> Result<Self> {
        if !(distance > T::zero() && distance.is_finite()) {
            return Err(invalid(format!("propagation distance must be positive, got {distance}")));
        }
        if !(wavelength > T::zero() && wavelength.is_finite()) {
            return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        check_sampling(&input, &output, distance, wavelength)?;
        let chirpz = match method {
            PropagationMethod::Direct => None,
            PropagationMethod::ChirpZ => Some(ChirpZ::plan(&input, &output, distance, wavelength)),
        };
        Ok(Self { input, output, distance, wavelength, method, chirpz })
    }

    pub fn input_grid(&self) -> &TransverseGrid<T> {
        &self.input
    }

    pub fn output_grid(&self) -> &TransverseGrid<T> {
        &self.output
    }

    pub fn method(&self) -> PropagationMethod {
        self.method
    }

    pub fn propagate(&self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        if !field.grid().same_as(&self.input) {
            return Err(Error::Shape("field grid does not match the propagator input grid".into()));
        }
        let amplitude = match &self.chirpz {
            Some(cz) => cz.apply(field.amplitude(), self.output.len()),
            None => self.direct(field.amplitude()),
        };
        ComplexField::new(self.output, amplitude)
    }

    fn direct(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        let k = T::PI() / (self.wavelength * self.distance);
        let scale = self.input.dx() / (self.wavelength * self.distance).sqrt();
        let xs: Vec<T> = self.input.coords().collect();
        self.output
            .coords()
            .map(|y| {
                let acc = xs.iter().zip(input).fold(Complex::new(T::zero(), T::zero()), |acc, (&x, &a)| {
                    let d = x - y;
                    acc + a * T::cis(k * d * d)
                });
                acc * scale
            })
            .collect()
    }
}

impl<T: Real> ChirpZ<T> {
    // With x_i = a + i·dx, y_j = b + j·dy and d0 = a - b,
    //   (x_i - y_j)² = d0² + (dx² - dx·dy) i² + 2 d0 dx i
    //                      + (dy² - dx·dy) j² - 2 d0 dy j
    //                      + dx·dy (j - i)²
    // so the sum over i is a linear convolution with exp[iπ dx·dy m² / λz].
    fn plan(input: &TransverseGrid<T>, output: &TransverseGrid<T>, distance: T, wavelength: T) -> Self {
        let n = input.len();
        let m = output.len();
        let k = T::PI() / (wavelength * distance);
        let dx = input.dx();
        let dy = output.dx();
        let dxdy = dx * dy;
        let d0 = input.x_min() - output.x_min();
        let two = T::of(2.0);

        let pre = (0..n)
            .map(|i| {
                let fi = T::of_usize(i);
                T::cis(k * ((dx * dx - dxdy) * fi * fi + two * d0 * dx * fi))
            })
            .collect();
        let scale = dx / (wavelength * distance).sqrt();
        let post = (0..m)
            .map(|j| {
                let fj = T::of_usize(j);
                T::cis(k * (d0 * d0 + (dy * dy - dxdy) * fj * fj - two * d0 * dy * fj)) * scale
            })
            .collect();

        let len = fast_len(n + m - 1);
        let chirp = |idx: usize| {
            let f = T::of_usize(idx);
            T::cis(k * dxdy * f * f)
        };
        let mut kernel = vec![Complex::new(T::zero(), T::zero()); len];
        for (j, slot) in kernel.iter_mut().enumerate().take(m) {
            *slot = chirp(j);
        }
        for i in 1..n {
            kernel[len - i] = chirp(i);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        forward.process(&mut kernel);
        let norm = T::one() / T::of_usize(len);
        for v in kernel.iter_mut() {
            *v = *v * norm;
        }
        Self { pre, post, kernel_spectrum: kernel, forward, inverse }
    }

    fn apply(&self, input: &[Complex<T>], m: usize) -> Vec<Complex<T>> {
        let len = self.kernel_spectrum.len();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
        for ((b, a), p) in buf.iter_mut().zip(input).zip(&self.pre) {
            *b = a * p;
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_spectrum) {
            *b = *b * k;
        }
        self.inverse.process(&mut buf);
        buf.truncate(m);
        for (b, p) in buf.iter_mut().zip(&self.post) {
            *b = *b * p;
        }
        buf
    }
}

/// Smallest `n' >= n` whose only prime factors are 2, 3 and 5.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut v = p35;
            while v < n {
                v *= 2;
            }
            best = best.min(v);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Propagates `field` by `distance` onto `out_grid` (chirp-z strategy).
pub fn fresnel_propagate<T: Real>(
    field: &ComplexField<T>,
    distance: T,
    wavelength: T,
    out_grid: &TransverseGrid<T>,
) -> Result<ComplexField<T>> {
    fresnel_propagate_with(field, distance, wavelength, out_grid, PropagationMethod::ChirpZ)
}

pub fn fresnel_propagate_with<T: Real>(
    field: &ComplexField<T>,
    distance: T,
    wavelength: T,
    out_grid: &TransverseGrid<T>,
    method: PropagationMethod,
) -> Result<ComplexField<T>> {
    FresnelPropagator::new(*field.grid(), *out_grid, distance, wavelength, method)?.propagate(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_len_is_smooth_and_minimal() {
        assert_eq!(fast_len(1), 1);
        assert_eq!(fast_len(7), 8);
        assert_eq!(fast_len(11), 12);
        assert_eq!(fast_len(1967), 2000);
        assert_eq!(fast_len(4097), 4320);
        for n in 1..600 {
            let f = fast_len(n);
            assert!(f >= n);
            let mut r = f;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            assert_eq!(r, 1);
        }
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = TransverseGrid::new(-5e-3, 5e-3, 1001).unwrap();
        let out = fresnel_propagate(&ComplexField::zeros(g), 0.3, 693e-9, &g).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn rejects_nonpositive_distance() {
        let g = TransverseGrid::new(-5e-3, 5e-3, 1001).unwrap();
        let err = fresnel_propagate(&ComplexField::zeros(g), 0.0, 693e-9, &g).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn undersampled_chirp_is_refused() {
        // 10 µm step over 10 mm at z = 100 mm: limit is 6.9 µm.
        let g = TransverseGrid::new(-5e-3, 5e-3, 1001).unwrap();
        let err = fresnel_propagate(&ComplexField::zeros(g), 0.1, 693e-9, &g).unwrap_err();
        assert!(matches!(err, Error::Aliasing { .. }), "{err:?}");
    }
}
