use serde::{Deserialize, Serialize};

use super::histogram::CoincidenceHistogram;
use crate::error::{invalid, Error, Result};

/// Baseline bins lie beyond this many estimated coherence times.
const BASELINE_TAUS: f64 = 10.0;
/// Fewest bins accepted for the far-tail baseline.
const MIN_BASELINE_BINS: usize = 8;
/// A peak is resolvable when its contrast exceeds this many baseline-noise units.
const RESOLVABLE_SIGMAS: f64 = 5.0;

/// Normalized `g²(τ)` recovered from a start–stop histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Estimate {
    pub times: Vec<f64>,
    pub g2: Vec<f64>,
    /// Poisson standard error of each `g2` sample.
    pub std_err: Vec<f64>,
    pub g2_zero: f64,
    pub g2_zero_std_err: f64,
    /// `g2_zero - 1`.
    pub contrast: f64,
    /// Delay at which the fitted peak sits.
    pub peak_time: f64,
    /// Standard deviation of `g2` over the baseline bins.
    pub baseline_noise: f64,
    pub baseline_bins: usize,
}

impl G2Estimate {
    /// Whether the peak stands clear of the baseline noise.
    pub fn resolvable(&self) -> bool {
        self.contrast > RESOLVABLE_SIGMAS * self.baseline_noise
    }
}

/// Per-bin stop probability given no earlier stop (pile-up correction for
/// single-stop converters), with Poisson errors. Bins no start survives to
/// are `None`.
fn hazards(h: &CoincidenceHistogram) -> Vec<Option<(f64, f64)>> {
    let mut alive = h.total_starts as f64;
    h.counts
        .iter()
        .map(|&c| {
            let out = (alive > 0.0).then(|| (c as f64 / alive, (c as f64).sqrt() / alive));
            alive -= c as f64;
            out
        })
        .collect()
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0, 0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = if n > 1 { values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    (mean, var.sqrt(), n)
}

/// Maximum of the parabola through three equally spaced samples, over their
/// span: the vertex when it is a maximum inside the span, otherwise the
/// larger end sample. Returns (value, offset of the maximum in steps from
/// the first sample).
fn parabola_peak(y: [f64; 3]) -> (f64, f64) {
    let curvature = y[0] - 2.0 * y[1] + y[2];
    if curvature < 0.0 {
        let s = 1.0 + (y[0] - y[2]) / (2.0 * curvature);
        if (0.0..=2.0).contains(&s) {
            return (y[1] - (y[0] - y[2]).powi(2) / (8.0 * curvature), s);
        }
    }
    if y[0] >= y[2] {
        (y[0], 0.0)
    } else {
        (y[2], 2.0)
    }
}

struct Normalized {
    g2: Vec<f64>,
    se: Vec<f64>,
    noise: f64,
    bins: usize,
}

fn normalize(h: &CoincidenceHistogram, rates: &[Option<(f64, f64)>], baseline: &[usize]) -> Result<Normalized> {
    let (base, _, n) = mean_std(baseline.iter().filter_map(|&k| rates[k].map(|r| r.0)));
    if n == 0 || !(base > 0.0) {
        return Err(Error::DegenerateStatistics("no coincidences in the baseline bins".into()));
    }
    let base_counts: f64 = baseline.iter().filter(|&&k| rates[k].is_some()).map(|&k| h.counts[k] as f64).sum();
    let rel_base = 1.0 / base_counts.sqrt();
    let g2: Vec<f64> = rates.iter().map(|r| r.map_or(f64::NAN, |r| r.0 / base)).collect();
    let se = rates
        .iter()
        .zip(&g2)
        .map(|(r, g)| r.map_or(f64::NAN, |r| ((r.1 / base).powi(2) + (g * rel_base).powi(2)).sqrt()))
        .collect();
    let (_, noise, bins) = mean_std(baseline.iter().map(|&k| g2[k]).filter(|v| v.is_finite()));
    Ok(Normalized { g2, se, noise, bins })
}

/// Delay at which `g2` first falls to `level` after bin `from`, located on
/// the parabola through the bracketing bins.
fn crossing(times: &[f64], g2: &[f64], from: usize, level: f64) -> Option<f64> {
    let k = (from + 1..g2.len()).find(|&k| g2[k] <= level)?;
    if !g2[k].is_finite() {
        return None;
    }
    let j = if k + 1 < g2.len() && g2[k + 1].is_finite() { k - 1 } else { k.checked_sub(2)? };
    let (t0, step) = (times[j], times[j + 1] - times[j]);
    let y = [g2[j], g2[j + 1], g2[j + 2]];
    let p = |s: f64| y[0] + s * (y[1] - y[0]) + 0.5 * s * (s - 1.0) * (y[2] - 2.0 * y[1] + y[0]);
    // root between the samples at k-1 and k
    let (mut lo, mut hi) = ((k - 1 - j) as f64, (k - j) as f64);
    if !(p(lo) > level && p(hi) <= level) {
        let (a, b) = (g2[k - 1], g2[k]);
        return Some(times[k - 1] + (a - level) / (a - b) * step);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(t0 + 0.5 * (lo + hi) * step)
}

fn peak(times: &[f64], n: &Normalized) -> Result<(f64, f64, f64, usize)> {
    let y = [n.g2[0], n.g2[1], n.g2[2]];
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateStatistics("no starts reach the first bins".into()));
    }
    let (value, s) = parabola_peak(y);
    let bin = s.round() as usize;
    Ok((value, n.se[bin], times[0] + s * (times[1] - times[0]), bin))
}

/// `g²(τ)` normalized to the far-tail baseline, with the zero-delay value
/// taken from a three-bin parabolic fit at the start of the histogram.
///
/// The baseline is first taken over the outer half of the window, then
/// re-taken over the bins beyond ten estimated coherence times when enough
/// of them exist.
pub fn estimate_g2(h: &CoincidenceHistogram) -> Result<G2Estimate> {
    if h.len() < 2 * MIN_BASELINE_BINS {
        return Err(invalid(format!("need at least {} bins, got {}", 2 * MIN_BASELINE_BINS, h.len())));
    }
    if h.total_starts == 0 {
        return Err(Error::DegenerateStatistics("histogram has no starts".into()));
    }
    let rates = hazards(h);
    let times = &h.bin_centers;
    let outer: Vec<usize> = (h.len() / 2..h.len()).collect();
    let mut norm = normalize(h, &rates, &outer)?;
    let (g0, _, t_peak, bin) = peak(times, &norm)?;
    let level = 1.0 + 0.5 * (g0 - 1.0);
    if let Some(t_half) = crossing(times, &norm.g2, bin, level) {
        let tau = 2.0 * (t_half - t_peak) / std::f64::consts::LN_2;
        let far: Vec<usize> = (0..h.len()).filter(|&k| times[k] > BASELINE_TAUS * tau).collect();
        if far.len() >= MIN_BASELINE_BINS {
            norm = normalize(h, &rates, &far)?;
        }
    }
    let (g2_zero, g2_zero_std_err, peak_time, _) = peak(times, &norm)?;
    Ok(G2Estimate {
        times: times.clone(),
        g2: norm.g2,
        std_err: norm.se,
        g2_zero,
        g2_zero_std_err,
        contrast: g2_zero - 1.0,
        peak_time,
        baseline_noise: norm.noise,
        baseline_bins: norm.bins,
    })
}

/// Coherence time from the half-contrast point of the `g²(τ)` excess.
///
/// For field correlation `exp(-|τ|/τ0)` the excess is `exp(-2|τ|/τ0)`, so
/// `τ0 = 2·(t_half - t_peak)/ln 2`.
pub fn estimate_coherence_time(h: &CoincidenceHistogram) -> Result<f64> {
    let est = estimate_g2(h)?;
    if !est.resolvable() {
        return Err(Error::NotMeasurable(format!(
            "peak contrast {:.4} is within {RESOLVABLE_SIGMAS} x baseline noise {:.4}",
            est.contrast, est.baseline_noise
        )));
    }
    let bin = ((est.peak_time - est.times[0]) / h.bin_width).round() as usize;
    let t_half = crossing(&est.times, &est.g2, bin, 1.0 + 0.5 * est.contrast)
        .ok_or_else(|| Error::NotMeasurable("excess does not decay to half contrast inside the window".into()))?;
    Ok(2.0 * (t_half - est.peak_time) / std::f64::consts::LN_2)
}
