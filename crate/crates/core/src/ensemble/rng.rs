//! Counter-based source deviates.
//!
//! Sample `i` of realization `r` under master seed `s` consumes ChaCha8
//! words `[4i, 4i+4)` of stream `r` keyed by `s`, so every deviate is a pure
//! function of `(s, r, i)` no matter which worker draws it or in what order.

use num_complex::Complex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::optics::{ComplexField, SourceSpec, TransverseGrid};
use crate::scalar::Real;

const WORDS_PER_SAMPLE: u128 = 4;

/// Generator positioned at sample `first` of realization `realization_index`.
pub(crate) fn sample_stream(master_seed: u64, realization_index: u64, first: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization_index);
    rng.set_word_pos(WORDS_PER_SAMPLE * first as u128);
    rng
}

/// Uniform on (0, 1], 53-bit resolution.
#[inline]
fn open_unit(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Circular complex Gaussian with `E|g|² = 1` (Box–Muller on two words).
#[inline]
pub(crate) fn circular_gaussian(rng: &mut ChaCha8Rng) -> Complex<f64> {
    let r = (-open_unit(rng.next_u64()).ln()).sqrt();
    let theta = std::f64::consts::TAU * open_unit(rng.next_u64());
    let (s, c) = theta.sin_cos();
    Complex::new(r * c, r * s)
}

/// One delta-correlated thermal field: `a_i = sqrt(I_s(x_i)) · g_i`.
pub fn draw_source_realization<T: Real>(
    source: &SourceSpec<T>,
    grid: &TransverseGrid<T>,
    realization_index: u64,
    master_seed: u64,
) -> ComplexField<T> {
    let mut rng = sample_stream(master_seed, realization_index, 0);
    let amplitude = grid
        .coords()
        .map(|x| {
            let g = circular_gaussian(&mut rng);
            let a = source.intensity(x).sqrt();
            Complex::new(a * T::of(g.re), a * T::of(g.im))
        })
        .collect();
    ComplexField::new(*grid, amplitude).expect("one deviate per grid point")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::SourceProfile;

    #[test]
    fn deviates_are_position_addressable() {
        let mut seq = sample_stream(42, 7, 0);
        let all: Vec<_> = (0..10).map(|_| circular_gaussian(&mut seq)).collect();
        let mut jump = sample_stream(42, 7, 6);
        assert_eq!(circular_gaussian(&mut jump), all[6]);
        let mut other = sample_stream(42, 8, 0);
        assert_ne!(circular_gaussian(&mut other), all[0]);
    }

    #[test]
    fn zero_source_gives_zero_field() {
        let grid = TransverseGrid::new(-1.0, 1.0, 3).unwrap();
        let values = vec![0.0, 1.0, 0.0];
        let src = SourceSpec::new(693e-9, SourceProfile::Sampled { grid, values }, 1e-10).unwrap();
        let far = TransverseGrid::new(5.0, 6.0, 11).unwrap();
        assert!(draw_source_realization(&src, &far, 0, 1).is_zero());
    }

    #[test]
    fn repeated_draws_are_bit_identical() {
        let src = SourceSpec::uniform(693e-9, 1e-3, 1e-10).unwrap();
        let grid = TransverseGrid::new(-1e-3, 1e-3, 257).unwrap();
        let a = draw_source_realization(&src, &grid, 7, 42);
        let b = draw_source_realization(&src, &grid, 7, 42);
        assert_eq!(a, b);
        assert_ne!(a, draw_source_realization(&src, &grid, 8, 42));
    }
}
