//! The `metrics.json` document.

use ghostsim_core::coincidence::{CoincidenceHistogram, G2Estimate};
use ghostsim_core::metrics::ProfileMetrics;
use ghostsim_core::{Correlation, Grid};
use serde::Serialize;

use crate::plan::{FocusedLayout, SweepLayout};
use crate::scenario::{HbtSettings, Method, ScenarioConfig, ScenarioKind};

/// Peaks, widths and visibility of one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub n_points: usize,
    pub n_realizations: usize,
    /// `(max g² - baseline)/(max g² + baseline)` of the raw `g² = 1 + Δg²`.
    pub visibility: Option<f64>,
    /// Median raw `g²` outside the feature neighborhoods.
    pub visibility_baseline: Option<f64>,
    /// Intervals left out of the baseline median, m.
    pub baseline_exclusions: Vec<[f64; 2]>,
    /// Peak positions (largest first), m.
    pub peak_positions: Vec<f64>,
    pub peak_values: Vec<f64>,
    /// Distance between the two largest peaks, m.
    pub peak_separation: Option<f64>,
    pub fwhm_per_peak: Vec<Option<f64>>,
    /// Smaller of the two largest peaks over `Δg²` midway between them.
    pub peak_to_midpoint: Option<f64>,
    pub max_delta_g2: f64,
    /// Second central moment over `x2` of `Δg²` clipped at zero, m².
    pub second_moment: f64,
}

fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    let k = x.partition_point(|v| *v < at).clamp(1, x.len() - 1);
    let t = (at - x[k - 1]) / (x[k] - x[k - 1]);
    y[k - 1] + t * (y[k] - y[k - 1])
}

impl ProfileSummary {
    pub fn new(profile: &Correlation, m: ProfileMetrics<f64>) -> Self {
        let peak_to_midpoint = (m.peaks.len() >= 2).then(|| {
            let (a, b) = (&m.peaks[0], &m.peaks[1]);
            let fluct = profile.fluctuation();
            let mid = interpolate(&profile.x2, &fluct, (a.position + b.position) / 2.0);
            (mid > 0.0).then(|| a.value.min(b.value) / mid)
        });
        Self {
            n_points: profile.len(),
            n_realizations: profile.n_realizations,
            visibility: m.visibility,
            visibility_baseline: m.visibility_baseline,
            baseline_exclusions: m.baseline_exclusions.iter().map(|&(a, b)| [a, b]).collect(),
            peak_values: m.peaks.iter().map(|p| p.value).collect(),
            peak_positions: m.peak_positions,
            peak_separation: m.peak_separation,
            fwhm_per_peak: m.fwhm_per_peak,
            peak_to_midpoint: peak_to_midpoint.flatten(),
            max_delta_g2: m.max_value,
            second_moment: m.second_moment,
        }
    }
}

/// Monte Carlo against analytic on the same samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub n_points: usize,
    pub fraction_within_3se: f64,
    pub max_abs_difference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dx: f64,
}

impl From<&Grid> for GridInfo {
    fn from(g: &Grid) -> Self {
        Self { x_min: g.x_min(), x_max: g.x_max(), n_points: g.len(), dx: g.dx() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub source: GridInfo,
    pub object: GridInfo,
    pub detector: GridInfo,
    pub scan_stride: usize,
}

impl GridSummary {
    pub fn focused(l: &FocusedLayout) -> Self {
        Self {
            source: (&l.source).into(),
            object: (&l.object).into(),
            detector: (&l.detector).into(),
            scan_stride: l.scan_stride,
        }
    }

    pub fn sweep(l: &SweepLayout) -> Self {
        Self { source: (&l.source).into(), object: (&l.object).into(), detector: (&l.detector).into(), scan_stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub z2: Vec<f64>,
    pub max_delta_g2: Vec<f64>,
    pub second_moment: Vec<f64>,
    /// `z2` of the row with the largest `Δg²`.
    pub best_focus_z2: f64,
    /// Row closest to `z2 = z1`, the one summarized at the top level.
    pub focus_row: usize,
    pub n_x2: usize,
}

impl SweepSummary {
    pub fn new(z2: &[f64], rows: &[Correlation], focus_row: usize) -> Self {
        let max: Vec<f64> = rows.iter().map(|r| r.max_value()).collect();
        let best = max.iter().enumerate().fold(0, |b, (i, v)| if *v > max[b] { i } else { b });
        Self {
            z2: z2.to_vec(),
            second_moment: rows.iter().map(|r| r.second_moment()).collect(),
            best_focus_z2: z2[best],
            max_delta_g2: max,
            focus_row,
            n_x2: rows.first().map_or(0, |r| r.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbtSummary {
    pub coherence_time: f64,
    pub jitter: f64,
    pub runs: usize,
    pub total_starts: u64,
    pub total_stops: u64,
    pub coincidences: u64,
    pub g2_zero: f64,
    pub g2_zero_std_err: f64,
    pub contrast: f64,
    pub baseline_noise: f64,
    pub peak_time: f64,
    pub resolvable: bool,
    /// Coherence time recovered from the half-contrast delay, s.
    pub tau0_estimate: Option<f64>,
    /// Why no estimate was reported.
    pub not_measurable: Option<String>,
}

impl HbtSummary {
    pub fn new(h: &HbtSettings, hist: &CoincidenceHistogram, est: &G2Estimate, tau: Result<f64, String>) -> Self {
        let (tau0_estimate, not_measurable) = match tau {
            Ok(t) => (Some(t), None),
            Err(reason) => (None, Some(reason)),
        };
        Self {
            coherence_time: h.coherence_time,
            jitter: h.jitter,
            runs: h.runs,
            total_starts: hist.total_starts,
            total_stops: hist.total_stops,
            coincidences: hist.total_counts(),
            g2_zero: est.g2_zero,
            g2_zero_std_err: est.g2_zero_std_err,
            contrast: est.contrast,
            baseline_noise: est.baseline_noise,
            peak_time: est.peak_time,
            resolvable: est.resolvable(),
            tau0_estimate,
            not_measurable,
        }
    }
}

/// Observables of one run. The top-level profile fields describe the
/// primary profile (Monte Carlo when simulated; for sweeps, the row
/// closest to focus).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub kind: ScenarioKind,
    pub method: Method,
    pub seed: u64,
    #[serde(flatten)]
    pub profile: Option<ProfileSummary>,
    /// Blur scale used for peak separation and baseline exclusions, m.
    pub kernel_width: Option<f64>,
    /// `sqrt(width² + speckle²)` per mask feature, m.
    pub expected_fwhm_per_feature: Vec<f64>,
    pub grids: Option<GridSummary>,
    pub analytic: Option<ProfileSummary>,
    pub comparison: Option<Comparison>,
    pub sweep: Option<SweepSummary>,
    pub hbt: Option<HbtSummary>,
    /// Wall-clock time; written to `timing.json`, not `metrics.json`.
    #[serde(skip)]
    pub runtime_seconds: f64,
}

impl MetricsReport {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            kind: cfg.kind,
            method: cfg.method,
            seed: cfg.seed,
            profile: None,
            kernel_width: None,
            expected_fwhm_per_feature: Vec::new(),
            grids: None,
            analytic: None,
            comparison: None,
            sweep: None,
            hbt: None,
            runtime_seconds: 0.0,
        }
    }
}
