use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::stream_rng;
use crate::error::{invalid, Result};

pub(crate) const TRACE_STREAM: u64 = 0;

/// Thermal intensity `I_k = |E_k|²` sampled every `dt`, where `E` is a
/// circular complex Ornstein–Uhlenbeck process with `⟨E(t)E*(t+s)⟩ =
/// exp(-|s|/τ0)`.
///
/// The update `E_{k+1} = ρ E_k + sqrt(1 - ρ²) g_k`, `ρ = exp(-dt/τ0)`, is
/// exact for any `dt`, and the process starts in its stationary state, so
/// `⟨I⟩ = 1` from the first sample.
pub struct ThermalTrace {
    rng: ChaCha8Rng,
    field: Complex<f64>,
    rho: f64,
    kick: f64,
    remaining: usize,
}

impl ThermalTrace {
    pub fn new(tau0: f64, duration: f64, dt: f64, seed: u64) -> Result<Self> {
        Self::with_stream(tau0, duration, dt, seed, TRACE_STREAM)
    }

    pub(crate) fn with_stream(tau0: f64, duration: f64, dt: f64, seed: u64, stream: u64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(invalid(format!("coherence time must be positive, got {tau0}")));
        }
        if !(dt > 0.0) || dt > tau0 / 10.0 * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "trace step {dt:e} s must be positive and at most tau0/10 = {:e} s",
                tau0 / 10.0
            )));
        }
        if !(duration >= 100.0 * tau0 * (1.0 - 1e-12)) || !duration.is_finite() {
            return Err(invalid(format!(
                "trace duration {duration:e} s must be at least 100*tau0 = {:e} s",
                100.0 * tau0
            )));
        }
        let rho = (-dt / tau0).exp();
        let mut rng = stream_rng(seed, stream);
        let field = gaussian(&mut rng);
        Ok(Self { rng, field, rho, kick: (1.0 - rho * rho).sqrt(), remaining: (duration / dt).round() as usize })
    }

    /// Number of samples still to come.
    pub fn remaining(&self) -> usize {
        self.remaining
    }
}

/// Circular complex Gaussian with `E|g|² = 1`.
fn gaussian(rng: &mut ChaCha8Rng) -> Complex<f64> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl Iterator for ThermalTrace {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.field.norm_sqr();
        let g = gaussian(&mut self.rng);
        self.field = self.field * self.rho + g * self.kick;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for ThermalTrace {}

/// `round(duration/dt)` samples of a unit-mean thermal intensity trace.
pub fn simulate_intensity_trace(tau0: f64, duration: f64, dt: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(ThermalTrace::new(tau0, duration, dt, seed)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_or_short_traces() {
        assert!(simulate_intensity_trace(1e-10, 1e-7, 2e-11, 1).is_err());
        assert!(simulate_intensity_trace(1e-10, 5e-9, 1e-11, 1).is_err());
        assert!(simulate_intensity_trace(0.0, 1e-7, 1e-11, 1).is_err());
        assert_eq!(simulate_intensity_trace(1e-10, 1e-8, 1e-11, 1).unwrap().len(), 1000);
    }

    #[test]
    fn deterministic_and_non_negative() {
        let a = simulate_intensity_trace(1e-10, 1e-7, 1e-11, 9).unwrap();
        let b = simulate_intensity_trace(1e-10, 1e-7, 1e-11, 9).unwrap();
        let c = simulate_intensity_trace(1e-10, 1e-7, 1e-11, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn thermal_moments() {
        let tau0 = 1e-10;
        let dt = 1e-11;
        let trace = simulate_intensity_trace(tau0, 2e-5, dt, 3).unwrap();
        let n = trace.len() as f64;
        let mean = trace.iter().sum::<f64>() / n;
        let second = trace.iter().map(|v| v * v).sum::<f64>() / n;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        assert!((second / (mean * mean) - 2.0).abs() < 0.1, "ratio {}", second / (mean * mean));
        // decorrelated at 50 τ0
        let lag = 500;
        let cross = trace.iter().zip(&trace[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n - lag as f64);
        assert!((cross / (mean * mean) - 1.0).abs() < 0.03, "lagged {}", cross / (mean * mean));
        // one step apart: 1 + ρ²
        let one = trace.iter().zip(&trace[1..]).map(|(a, b)| a * b).sum::<f64>() / (n - 1.0);
        let expected = 1.0 + (-2.0 * dt / tau0).exp();
        assert!((one / (mean * mean) - expected).abs() < 0.05);
    }
}
