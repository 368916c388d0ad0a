use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detector::{DetectorSpec, PhotonThinner, ARRIVAL_STREAM, JITTER_STREAM};
use super::histogram::{start_stop_histogram, CoincidenceHistogram};
use super::trace::{ThermalTrace, TRACE_STREAM};
use crate::error::{invalid, Result};

const STOP_ARRIVAL_STREAM: u64 = 3;
const STOP_JITTER_STREAM: u64 = 4;
const STOP_TRACE_STREAM: u64 = 5;

/// One start–stop coincidence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbtConfig {
    pub tau0: f64,
    pub dt: f64,
    /// Length of one run, s.
    pub duration: f64,
    pub start: DetectorSpec,
    pub stop: DetectorSpec,
    pub bin_width: f64,
    pub window: f64,
    /// Both counters watch the same thermal trace (`false` gives two
    /// independent traces, an uncorrelated control).
    pub shared_trace: bool,
}

impl HbtConfig {
    pub fn validate(&self) -> Result<()> {
        self.start.validate()?;
        self.stop.validate()?;
        self.start.check_step(self.dt)?;
        self.stop.check_step(self.dt)?;
        ThermalTrace::new(self.tau0, self.duration, self.dt, 0)?;
        CoincidenceHistogram::empty(self.bin_width, self.window)?;
        Ok(())
    }
}

/// Ideal (pre-jitter) photon arrival times of both counters.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalPair {
    pub start: Vec<f64>,
    pub stop: Vec<f64>,
}

impl ArrivalPair {
    /// Histogram after each counter's jitter and dead time. The jitter
    /// deviates depend only on `seed`, not on the detector settings.
    pub fn histogram(&self, cfg: &HbtConfig, seed: u64) -> Result<CoincidenceHistogram> {
        let starts = cfg.start.detect_stream(&self.start, seed, JITTER_STREAM);
        let stops = cfg.stop.detect_stream(&self.stop, seed, STOP_JITTER_STREAM);
        start_stop_histogram(&starts, &stops, cfg.bin_width, cfg.window)
    }
}

/// Streams the thermal trace(s) once, thinning both counters on the fly.
pub fn simulate_arrivals(cfg: &HbtConfig, seed: u64) -> Result<ArrivalPair> {
    cfg.validate()?;
    let mut start = PhotonThinner::with_stream(cfg.start.mean_rate, cfg.dt, seed, ARRIVAL_STREAM);
    let mut stop = PhotonThinner::with_stream(cfg.stop.mean_rate, cfg.dt, seed, STOP_ARRIVAL_STREAM);
    let trace = ThermalTrace::with_stream(cfg.tau0, cfg.duration, cfg.dt, seed, TRACE_STREAM)?;
    if cfg.shared_trace {
        for (k, v) in trace.enumerate() {
            start.push(k, v);
            stop.push(k, v);
        }
    } else {
        let other = ThermalTrace::with_stream(cfg.tau0, cfg.duration, cfg.dt, seed, STOP_TRACE_STREAM)?;
        for (k, (a, b)) in trace.zip(other).enumerate() {
            start.push(k, a);
            stop.push(k, b);
        }
    }
    Ok(ArrivalPair { start: start.finish(), stop: stop.finish() })
}

/// Runs `seeds` independent experiments concurrently and adds their
/// histograms in seed order.
pub fn simulate_hbt(cfg: &HbtConfig, seeds: &[u64]) -> Result<CoincidenceHistogram> {
    if seeds.is_empty() {
        return Err(invalid("at least one seed is required"));
    }
    cfg.validate()?;
    let runs: Vec<CoincidenceHistogram> =
        seeds.par_iter().map(|&seed| simulate_arrivals(cfg, seed)?.histogram(cfg, seed)).collect::<Result<_>>()?;
    let mut total = CoincidenceHistogram::empty(cfg.bin_width, cfg.window)?;
    for run in &runs {
        total.merge(run)?;
    }
    Ok(total)
}
