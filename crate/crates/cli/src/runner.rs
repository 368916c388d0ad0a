//! Scenario drivers: focused image, `z2` sweep and HBT run.

use std::time::Instant;

use ghostsim_core::analytic::delta_g2_analytic;
use ghostsim_core::coincidence::{
    estimate_coherence_time, estimate_g2, simulate_hbt, CoincidenceHistogram, G2Estimate,
};
use ghostsim_core::ensemble::delta_g2_montecarlo;
use ghostsim_core::metrics::profile_metrics;
use ghostsim_core::optics::MaskFeature;
use ghostsim_core::profile::{ErrorEstimate, Normalization};
use ghostsim_core::{Correlation, Ensemble, Error, Geometry, Grid, Mask, Profile, Source};

use crate::error::RunError;
use crate::plan::{
    defocus_blur, mask_features, plan_focused, plan_sweep, speckle_size, sweep_row_grid, FocusedLayout, SweepLayout,
};
use crate::report::{Comparison, GridSummary, HbtSummary, MetricsReport, ProfileSummary, SweepSummary};
use crate::scenario::{HbtSettings, ImagingConfig, MaskSpec, Method, ScenarioConfig, ScenarioKind, SourceShape};

/// A profile per `z2`, all on the same `x2` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMatrix {
    pub z2: Vec<f64>,
    pub rows: Vec<Correlation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HbtResult {
    pub histogram: CoincidenceHistogram,
    pub estimate: G2Estimate,
}

/// Everything a run produces; see `export_results` for the files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Monte Carlo profile when simulated, otherwise the analytic one.
    pub profile: Option<Correlation>,
    /// Analytic profile of a `both` run.
    pub analytic: Option<Correlation>,
    /// Monte Carlo minus analytic, with the Monte Carlo errors.
    pub difference: Option<Correlation>,
    pub sweep: Option<SweepMatrix>,
    pub analytic_sweep: Option<SweepMatrix>,
    pub hbt: Option<HbtResult>,
    pub report: MetricsReport,
}

impl RunOutput {
    /// Output with no profiles.
    pub fn empty(report: MetricsReport) -> Self {
        Self { profile: None, analytic: None, difference: None, sweep: None, analytic_sweep: None, hbt: None, report }
    }
}

fn context(what: &str) -> impl Fn(Error) -> RunError + '_ {
    move |source| RunError::Core { context: what.to_owned(), source }
}

fn build_source(im: &ImagingConfig) -> Result<Source, RunError> {
    let profile = match im.source.shape {
        SourceShape::Uniform => Profile::Uniform { half_width: im.source.half_width },
        SourceShape::Gaussian => Profile::Gaussian { half_width: im.source.half_width },
    };
    Source::new(im.source.wavelength, profile, im.source.coherence_time).map_err(context("source"))
}

fn build_mask(spec: &MaskSpec, grid: Grid) -> Result<Mask, RunError> {
    let mask = match *spec {
        MaskSpec::DoubleSlit { width, center_separation } => Mask::double_slit(grid, width, center_separation),
        MaskSpec::PinholePair { d1, d2, separation } => Mask::pinhole_pair(grid, d1, d2, separation),
        MaskSpec::Slit { width, center } => Mask::top_hats(grid, vec![MaskFeature { center, width }]),
        MaskSpec::Uniform => Ok(Mask::uniform(grid)),
    };
    mask.map_err(context("mask"))
}

/// Moving average of `values` (on `grid`) over the aperture window around
/// every `stride`-th sample; the same windows the Monte Carlo detector uses.
fn aperture_average(values: &[f64], grid: &Grid, aperture: f64, stride: usize) -> Vec<f64> {
    let half = aperture / 2.0;
    (0..grid.len())
        .step_by(stride)
        .map(|i| {
            let x = grid.coord(i);
            let (a, b) = grid.index_range(x - half, x + half).unwrap_or((i, i));
            values[a..=b].iter().sum::<f64>() / (b - a + 1) as f64
        })
        .collect()
}

/// Catmull-Rom interpolation of `values` on `from` at each point of `to`.
fn resample(values: &[f64], from: &Grid, to: &Grid) -> Vec<f64> {
    let n = values.len();
    let at = |k: isize| values[k.clamp(0, n as isize - 1) as usize];
    to.coords()
        .map(|x| {
            let f = (x - from.x_min()) / from.dx();
            let i = f.floor();
            let t = f - i;
            let i = i as isize;
            let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
            p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
        })
        .collect()
}

fn exact_profile(x2: Vec<f64>, values: Vec<f64>) -> Result<Correlation, RunError> {
    let n = x2.len();
    Correlation::new(x2, values, vec![0.0; n], 0, Normalization::Fluctuation, ErrorEstimate::Exact)
        .map_err(context("analytic profile"))
}

fn analytic_focused(
    mask: &Mask,
    source: &Source,
    geom: &Geometry,
    layout: &FocusedLayout,
    aperture: f64,
) -> Result<Correlation, RunError> {
    let full = delta_g2_analytic(mask, source, geom, &layout.detector).map_err(context("analytic profile"))?;
    let scan = layout.detector.subsample(layout.scan_stride).map_err(context("scan grid"))?;
    let values = aperture_average(&full.delta_g2, &layout.detector, aperture, layout.scan_stride);
    exact_profile(scan.coords().collect(), values)
}

fn analytic_sweep_row(
    im: &ImagingConfig,
    mask: &Mask,
    source: &Source,
    layout: &SweepLayout,
    z2: f64,
) -> Result<Correlation, RunError> {
    let geom = Geometry::new(im.z1, z2).map_err(context("geometry"))?;
    let row = sweep_row_grid(im, &layout.object, &layout.detector, z2).map_err(context("sweep grid"))?;
    let fine = delta_g2_analytic(mask, source, &geom, &row).map_err(context("analytic sweep"))?;
    let averaged = aperture_average(&fine.delta_g2, &row, im.ensemble.detector_aperture, 1);
    exact_profile(layout.detector.coords().collect(), resample(&averaged, &row, &layout.detector))
}

fn montecarlo(
    mask: &Mask,
    source: &Source,
    geom: &Geometry,
    grids: (Grid, Grid, Grid),
    im: &ImagingConfig,
    seed: u64,
    stride: usize,
) -> Result<Correlation, RunError> {
    let (src, obj, det) = grids;
    let mut cfg = Ensemble::new(im.ensemble.n_realizations, seed, src, obj, det);
    cfg.detector_aperture = im.ensemble.detector_aperture;
    cfg.scan_stride = stride;
    delta_g2_montecarlo(mask, source, geom, &cfg).map_err(context("monte carlo"))
}

fn difference(mc: &Correlation, an: &Correlation) -> Result<Correlation, RunError> {
    let values = mc.delta_g2.iter().zip(&an.delta_g2).map(|(a, b)| a - b).collect();
    Correlation::new(mc.x2.clone(), values, mc.std_err.clone(), mc.n_realizations, mc.normalization, mc.error_estimate)
        .map_err(context("difference"))
}

/// Share of samples with `|mc - analytic| <= 3·std_err`.
pub fn compare(mc: &Correlation, an: &Correlation) -> Comparison {
    let n = mc.len();
    let diffs: Vec<f64> = mc.delta_g2.iter().zip(&an.delta_g2).map(|(a, b)| (a - b).abs()).collect();
    let within = diffs.iter().zip(&mc.std_err).filter(|(d, s)| **d <= 3.0 * **s).count();
    Comparison {
        n_points: n,
        fraction_within_3se: within as f64 / n as f64,
        max_abs_difference: diffs.iter().copied().fold(0.0, f64::max),
    }
}

fn summarize(
    profile: &Correlation,
    features: &[MaskFeature<f64>],
    kernel_width: f64,
) -> Result<ProfileSummary, RunError> {
    let m = profile_metrics(profile, features, kernel_width).map_err(context("metrics"))?;
    Ok(ProfileSummary::new(profile, m))
}

fn expected_widths(features: &[MaskFeature<f64>], kernel: f64) -> Vec<f64> {
    features.iter().map(|f| f.width.hypot(kernel)).collect()
}

fn run_focused(cfg: &ScenarioConfig, im: &ImagingConfig) -> Result<RunOutput, RunError> {
    let z2 = im.z2.unwrap_or(im.z1);
    let geom = Geometry::new(im.z1, z2).map_err(context("geometry"))?;
    let source = build_source(im)?;
    let layout = plan_focused(im).map_err(context("grid planning"))?;
    let mask = build_mask(&im.mask, layout.object)?;
    let features = mask_features(&im.mask);
    let kernel = speckle_size(im, z2) + defocus_blur(im, z2) + im.ensemble.detector_aperture / 2.0;

    let mc = if cfg.method.runs_montecarlo() {
        let grids = (layout.source, layout.object, layout.detector);
        Some(montecarlo(&mask, &source, &geom, grids, im, cfg.seed, layout.scan_stride)?)
    } else {
        None
    };
    let an = if cfg.method.runs_analytic() {
        Some(analytic_focused(&mask, &source, &geom, &layout, im.ensemble.detector_aperture)?)
    } else {
        None
    };

    let mut report = MetricsReport::new(cfg);
    report.kernel_width = Some(kernel);
    report.expected_fwhm_per_feature = expected_widths(&features, speckle_size(im, z2));
    report.grids = Some(GridSummary::focused(&layout));
    let (profile, analytic, diff) = match (mc, an) {
        (Some(mc), Some(an)) => {
            report.comparison = Some(compare(&mc, &an));
            report.analytic = Some(summarize(&an, &features, kernel)?);
            let d = difference(&mc, &an)?;
            (mc, Some(an), Some(d))
        }
        (Some(p), None) | (None, Some(p)) => (p, None, None),
        (None, None) => unreachable!("every method runs something"),
    };
    report.profile = Some(summarize(&profile, &features, kernel)?);
    Ok(RunOutput { profile: Some(profile), analytic, difference: diff, ..RunOutput::empty(report) })
}

fn run_sweep(cfg: &ScenarioConfig, im: &ImagingConfig) -> Result<RunOutput, RunError> {
    let sweep = im.sweep.as_ref().expect("validated sweep");
    let z2s = sweep.values();
    let source = build_source(im)?;
    let layout = plan_sweep(im, sweep).map_err(context("grid planning"))?;
    let mask = build_mask(&im.mask, layout.object)?;
    let features = mask_features(&im.mask);

    let mc_rows = if cfg.method.runs_montecarlo() {
        let rows = z2s
            .iter()
            .map(|&z2| {
                let geom = Geometry::new(im.z1, z2).map_err(context("geometry"))?;
                montecarlo(&mask, &source, &geom, (layout.source, layout.object, layout.detector), im, cfg.seed, 1)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Some(rows)
    } else {
        None
    };
    let an_rows = if cfg.method.runs_analytic() {
        let rows =
            z2s.iter().map(|&z2| analytic_sweep_row(im, &mask, &source, &layout, z2)).collect::<Result<Vec<_>, _>>()?;
        Some(rows)
    } else {
        None
    };

    let focus = z2s
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - im.z1).abs().total_cmp(&(b.1 - im.z1).abs()))
        .map(|(i, _)| i)
        .expect("at least two sweep steps");
    let kernel_at = |z2: f64| speckle_size(im, z2) + defocus_blur(im, z2) + im.ensemble.detector_aperture / 2.0;
    let primary = mc_rows.clone().or_else(|| an_rows.clone()).expect("every method runs something");

    let mut report = MetricsReport::new(cfg);
    report.kernel_width = Some(kernel_at(z2s[focus]));
    report.expected_fwhm_per_feature = expected_widths(&features, speckle_size(im, z2s[focus]));
    report.grids = Some(GridSummary::sweep(&layout));
    report.sweep = Some(SweepSummary::new(&z2s, &primary, focus));
    report.profile = Some(summarize(&primary[focus], &features, kernel_at(z2s[focus]))?);

    let mut out = RunOutput::empty(report);
    out.profile = Some(primary[focus].clone());
    if let (Some(mc), Some(an)) = (&mc_rows, &an_rows) {
        out.report.comparison = Some(compare(&mc[focus], &an[focus]));
        out.report.analytic = Some(summarize(&an[focus], &features, kernel_at(z2s[focus]))?);
        out.analytic = Some(an[focus].clone());
        out.difference = Some(difference(&mc[focus], &an[focus])?);
        out.analytic_sweep = Some(SweepMatrix { z2: z2s.clone(), rows: an.clone() });
    }
    out.sweep = Some(SweepMatrix { z2: z2s, rows: primary });
    Ok(out)
}

/// Per-run seeds derived from the master seed; disjoint for distinct
/// master seeds below 2^44 and fewer than 2^20 runs.
pub fn hbt_seeds(master: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|r| master.wrapping_mul(1 << 20).wrapping_add(r)).collect()
}

/// Histogram, `g²` estimate and summary of one HBT configuration.
pub fn run_hbt_settings(h: &HbtSettings, seed: u64) -> Result<(HbtResult, HbtSummary), RunError> {
    let core = h.to_core().map_err(RunError::Config)?;
    let histogram = simulate_hbt(&core, &hbt_seeds(seed, h.runs)).map_err(context("hbt simulation"))?;
    let estimate = estimate_g2(&histogram).map_err(context("g2 estimate"))?;
    let tau = match estimate_coherence_time(&histogram) {
        Ok(t) => Ok(t),
        Err(Error::NotMeasurable(reason)) => Err(reason),
        Err(e) => return Err(context("coherence time")(e)),
    };
    let summary = HbtSummary::new(h, &histogram, &estimate, tau);
    Ok((HbtResult { histogram, estimate }, summary))
}

fn run_hbt(cfg: &ScenarioConfig, h: &HbtSettings) -> Result<RunOutput, RunError> {
    let (result, summary) = run_hbt_settings(h, cfg.seed)?;
    let mut report = MetricsReport::new(cfg);
    report.hbt = Some(summary);
    Ok(RunOutput { hbt: Some(result), ..RunOutput::empty(report) })
}

/// Validates `cfg` and runs it on the current rayon pool.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    cfg.validate().map_err(RunError::Config)?;
    let start = Instant::now();
    let mut out = match cfg.kind {
        ScenarioKind::FocusedImage => run_focused(cfg, cfg.imaging.as_ref().expect("validated"))?,
        ScenarioKind::Z2Sweep => run_sweep(cfg, cfg.imaging.as_ref().expect("validated"))?,
        ScenarioKind::Hbt => run_hbt(cfg, cfg.hbt.as_ref().expect("validated"))?,
    };
    out.report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Overrides from the command line, applied before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub method: Option<Method>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(method) = self.method {
            cfg.method = method;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catmull_rom_reproduces_nodes_and_cubics() {
        let from = Grid::new(-1.0, 1.0, 41).unwrap();
        let cubic = |x: f64| 0.3 * x * x * x - x * x + 0.5;
        let values: Vec<f64> = from.coords().map(cubic).collect();
        let same = resample(&values, &from, &from);
        for (a, b) in same.iter().zip(&values) {
            assert!((a - b).abs() < 1e-15);
        }
        // Catmull-Rom is exact for quadratics away from the clamped ends
        let quad: Vec<f64> = from.coords().map(|x| x * x).collect();
        let to = Grid::new(-0.8, 0.8, 33).unwrap();
        for (x, v) in to.coords().zip(resample(&quad, &from, &to)) {
            assert!((v - x * x).abs() < 1e-12, "{x}: {v}");
        }
    }

    #[test]
    fn aperture_windows_are_clipped_means() {
        let g = Grid::new(0.0, 10.0, 11).unwrap();
        let v: Vec<f64> = (0..11).map(|i| i as f64).collect();
        assert_eq!(aperture_average(&v, &g, 0.0, 1), v);
        let avg = aperture_average(&v, &g, 2.0, 5);
        assert_eq!(avg, vec![0.5, 5.0, 9.5]);
    }

    #[test]
    fn comparison_counts_three_sigma_agreement() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let mc = Correlation::new(
            x.clone(),
            vec![1.0, 1.0, 1.0, 1.0],
            vec![0.1; 4],
            10,
            Normalization::Fluctuation,
            ErrorEstimate::Jackknife,
        )
        .unwrap();
        let an = exact_profile(x, vec![1.0, 1.29, 1.31, 0.5]).unwrap();
        let c = compare(&mc, &an);
        assert_eq!(c.fraction_within_3se, 0.5);
        assert!((c.max_abs_difference - 0.5).abs() < 1e-15);
    }

    #[test]
    fn seeds_do_not_collide() {
        let a = hbt_seeds(1, 4);
        let b = hbt_seeds(2, 4);
        assert!(a.iter().all(|s| !b.contains(s)));
        assert_eq!(a.len(), 4);
    }
}
