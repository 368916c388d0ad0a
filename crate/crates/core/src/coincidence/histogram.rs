use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Start–stop delay histogram, bins `[k·w, (k+1)·w)` for `k = 0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    pub bin_width: f64,
    pub bin_centers: Vec<f64>,
    pub counts: Vec<u64>,
    pub total_starts: u64,
    pub total_stops: u64,
}

impl CoincidenceHistogram {
    pub fn empty(bin_width: f64, window: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(invalid(format!("bin width must be positive, got {bin_width}")));
        }
        if !(window >= bin_width && window.is_finite()) {
            return Err(invalid(format!("window {window:e} s must hold at least one bin of {bin_width:e} s")));
        }
        let n = (window / bin_width - 1e-9).ceil() as usize;
        Ok(Self {
            bin_width,
            bin_centers: (0..n).map(|k| (k as f64 + 0.5) * bin_width).collect(),
            counts: vec![0; n],
            total_starts: 0,
            total_stops: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn window(&self) -> f64 {
        self.bin_width * self.len() as f64
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds another run with identical binning.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.bin_width != other.bin_width || self.len() != other.len() {
            return Err(invalid("histograms have different binning"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_starts += other.total_starts;
        self.total_stops += other.total_stops;
        Ok(())
    }
}

fn check_sorted(name: &str, times: &[f64]) -> Result<()> {
    if let Some(i) = times.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(invalid(format!("{name} times are not sorted at index {}", i + 1)));
    }
    Ok(())
}

/// Single-stop converter: each start is paired with the first stop strictly
/// after it, and counted if the delay is at most `window`.
pub fn start_stop_histogram(
    starts: &[f64],
    stops: &[f64],
    bin_width: f64,
    window: f64,
) -> Result<CoincidenceHistogram> {
    check_sorted("start", starts)?;
    check_sorted("stop", stops)?;
    let mut h = CoincidenceHistogram::empty(bin_width, window)?;
    h.total_starts = starts.len() as u64;
    h.total_stops = stops.len() as u64;
    let last = h.len() - 1;
    let mut j = 0;
    for &t in starts {
        while j < stops.len() && stops[j] <= t {
            j += 1;
        }
        let Some(&stop) = stops.get(j) else { break };
        let delay = stop - t;
        if delay <= window {
            // tolerate rounding of delays that sit on a bin edge
            let k = ((delay / bin_width) * (1.0 + 1e-12)).floor() as usize;
            h.counts[k.min(last)] += 1;
        }
    }
    Ok(h)
}
