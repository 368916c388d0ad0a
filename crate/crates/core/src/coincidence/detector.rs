use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::stream_rng;
use crate::error::{invalid, Result};

pub(crate) const ARRIVAL_STREAM: u64 = 1;
pub(crate) const JITTER_STREAM: u64 = 2;

/// Largest allowed `mean_rate · dt`.
const MAX_STEP_PROBABILITY: f64 = 0.1;

/// Single-photon counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    /// Count rate at unit intensity, counts/s.
    pub mean_rate: f64,
    /// Standard deviation of the Gaussian timing jitter, s.
    pub jitter_sigma: f64,
    /// Non-paralyzable dead time, s.
    pub dead_time: f64,
}

impl DetectorSpec {
    pub fn new(mean_rate: f64, jitter_sigma: f64, dead_time: f64) -> Result<Self> {
        let det = Self { mean_rate, jitter_sigma, dead_time };
        det.validate()?;
        Ok(det)
    }

    /// Ideal counter: no jitter, no dead time.
    pub fn ideal(mean_rate: f64) -> Result<Self> {
        Self::new(mean_rate, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_rate > 0.0 && self.mean_rate.is_finite()) {
            return Err(invalid(format!("mean_rate must be positive, got {}", self.mean_rate)));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(invalid(format!("jitter_sigma must be non-negative, got {}", self.jitter_sigma)));
        }
        if !(self.dead_time >= 0.0 && self.dead_time.is_finite()) {
            return Err(invalid(format!("dead_time must be non-negative, got {}", self.dead_time)));
        }
        Ok(())
    }

    pub(crate) fn check_step(&self, dt: f64) -> Result<()> {
        let p = self.mean_rate * dt;
        if !(p < MAX_STEP_PROBABILITY) {
            return Err(invalid(format!(
                "mean_rate*dt = {p} must be below {MAX_STEP_PROBABILITY} for photon thinning"
            )));
        }
        Ok(())
    }

    /// Electronic response to ideal arrival times: Gaussian jitter, sort,
    /// then dead time. Jitter deviate `k` always goes to arrival `k`, so runs
    /// that differ only in `jitter_sigma` share their randomness.
    pub fn detect(&self, arrivals: &[f64], seed: u64) -> Vec<f64> {
        self.detect_stream(arrivals, seed, JITTER_STREAM)
    }

    pub(crate) fn detect_stream(&self, arrivals: &[f64], seed: u64, stream: u64) -> Vec<f64> {
        let mut times = arrivals.to_vec();
        if self.jitter_sigma > 0.0 {
            let mut rng = stream_rng(seed, stream);
            for t in &mut times {
                let z: f64 = StandardNormal.sample(&mut rng);
                *t += self.jitter_sigma * z;
            }
            times.sort_unstable_by(f64::total_cmp);
        }
        if self.dead_time > 0.0 {
            let mut last = f64::NEG_INFINITY;
            times.retain(|&t| {
                let keep = t - last >= self.dead_time;
                if keep {
                    last = t;
                }
                keep
            });
        }
        times
    }
}

/// Inhomogeneous Poisson arrivals with rate `mean_rate · I(t)`, the
/// intensity held constant over each step. Fed one step at a time so several
/// counters can share a trace that is never stored.
pub struct PhotonThinner {
    rate: f64,
    dt: f64,
    rng: ChaCha8Rng,
    budget: f64,
    arrivals: Vec<f64>,
}

impl PhotonThinner {
    pub fn new(mean_rate: f64, dt: f64, seed: u64) -> Self {
        Self::with_stream(mean_rate, dt, seed, ARRIVAL_STREAM)
    }

    pub(crate) fn with_stream(mean_rate: f64, dt: f64, seed: u64, stream: u64) -> Self {
        let mut rng = stream_rng(seed, stream);
        let budget = Exp1.sample(&mut rng);
        Self { rate: mean_rate, dt, rng, budget, arrivals: Vec::new() }
    }

    /// Consumes step `k` with intensity `intensity`. Arrival times are drawn
    /// by integrating the rate until it exhausts a unit exponential budget.
    pub fn push(&mut self, k: usize, intensity: f64) {
        let lambda = self.rate * intensity;
        if !(lambda > 0.0) {
            return;
        }
        let mut mass = lambda * self.dt;
        let mut offset = 0.0;
        let start = k as f64 * self.dt;
        while self.budget <= mass {
            offset += self.budget / lambda;
            mass -= self.budget;
            self.arrivals.push(start + offset);
            self.budget = Exp1.sample(&mut self.rng);
        }
        self.budget -= mass;
    }

    /// Arrival times so far, sorted.
    pub fn finish(self) -> Vec<f64> {
        self.arrivals
    }
}

/// Photon events of one counter watching `trace` (intensity in units of its
/// mean, one sample per `dt`): Poisson thinning at `det.mean_rate · I(t)`,
/// then jitter and dead time. Output is sorted.
pub fn thin_photons(trace: &[f64], dt: f64, det: &DetectorSpec, seed: u64) -> Result<Vec<f64>> {
    det.validate()?;
    det.check_step(dt)?;
    if let Some(bad) = trace.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(invalid(format!("trace intensities must be finite and non-negative, found {bad}")));
    }
    let mut thinner = PhotonThinner::new(det.mean_rate, dt, seed);
    for (k, &v) in trace.iter().enumerate() {
        thinner.push(k, v);
    }
    Ok(det.detect(&thinner.finish(), seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detector_validation() {
        assert!(DetectorSpec::new(0.0, 0.0, 0.0).is_err());
        assert!(DetectorSpec::new(1e6, -1.0, 0.0).is_err());
        assert!(DetectorSpec::new(1e6, 0.0, -1.0).is_err());
        let det = DetectorSpec::ideal(1e9).unwrap();
        assert!(thin_photons(&[1.0; 10], 1e-10, &det, 0).is_err());
        assert!(thin_photons(&[1.0, -1.0], 1e-11, &det, 0).is_err());
    }

    #[test]
    fn dark_trace_gives_no_events() {
        let det = DetectorSpec::ideal(1e8).unwrap();
        assert!(thin_photons(&vec![0.0; 100_000], 1e-11, &det, 4).unwrap().is_empty());
    }

    #[test]
    fn constant_intensity_is_poisson() {
        let det = DetectorSpec::ideal(5e8).unwrap();
        let dt = 1e-10;
        let n = 2_000_000;
        let events = thin_photons(&vec![1.0; n], dt, &det, 17).unwrap();
        let mean = 5e8 * dt * n as f64;
        assert!((events.len() as f64 - mean).abs() < 3.0 * mean.sqrt(), "{} vs {mean}", events.len());
        assert!(events.windows(2).all(|w| w[0] <= w[1]));
        assert!(events.iter().all(|&t| (0.0..n as f64 * dt).contains(&t)));
    }

    #[test]
    fn dead_time_saturates() {
        let det = DetectorSpec::new(9e8, 0.0, 1e-7).unwrap();
        let dt = 1e-10;
        let n = 1_000_000;
        let events = thin_photons(&vec![1.0; n], dt, &det, 2).unwrap();
        let rate = events.len() as f64 / (n as f64 * dt);
        // non-paralyzable: R / (1 + R τd)
        let expected = 9e8 / (1.0 + 9e8 * 1e-7);
        assert!((rate - expected).abs() < 0.02 * expected);
        assert!((rate * 1e-7 - 1.0).abs() < 0.02);
        assert!(events.windows(2).all(|w| w[1] - w[0] >= 1e-7));
    }

    #[test]
    fn jitter_shares_arrivals() {
        let arrivals: Vec<f64> = (0..1000).map(|i| i as f64 * 1e-9).collect();
        let a = DetectorSpec::new(1.0, 1e-12, 0.0).unwrap().detect(&arrivals, 5);
        let b = DetectorSpec::new(1.0, 2e-12, 0.0).unwrap().detect(&arrivals, 5);
        for ((x, y), t) in a.iter().zip(&b).zip(&arrivals) {
            assert!(((y - t) - 2.0 * (x - t)).abs() < 1e-20);
        }
    }
}
