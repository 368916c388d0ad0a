//! Automatic sampling grids for imaging scenarios.
//!
//! Windows: the object window is the larger of twice the mask extent (a
//! window four times as wide as the mask), 1.5 times its outermost edge, and
//! three speckle sizes on either side. The detector window is the object
//! window scaled by `z2/z1` plus the geometric defocus blur `a|z2 - z1|/z1`.
//!
//! Steps: each grid resolves the Fresnel chirp with a 10% margin, a quarter
//! of the speckle size and a sixteenth of the narrowest feature; the
//! detector step is also at most an eighth of the aperture. Detector steps
//! are chosen as integer multiples of `dx1·z2/z1` when possible so the
//! analytic quadrature runs on a single kernel lattice.

use ghostsim_core::optics::{max_sampling_step, MaskFeature};
use ghostsim_core::{Grid, Result};
use serde::Serialize;

use crate::scenario::{ImagingConfig, MaskSpec, SourceShape, SweepConfig};

/// Gaussian sources are sampled out to this many 1/e² radii.
const GAUSSIAN_EXTENT: f64 = 4.0;
const SAMPLING_MARGIN: f64 = 0.9;
const KERNEL_SAMPLES: f64 = 4.0;
const FEATURE_SAMPLES: f64 = 16.0;
const APERTURE_SAMPLES: f64 = 8.0;
const MIN_SOURCE_POINTS: usize = 64;

/// Mask features (center, width) implied by a mask spec.
pub fn mask_features(mask: &MaskSpec) -> Vec<MaskFeature<f64>> {
    match *mask {
        MaskSpec::DoubleSlit { width, center_separation } => vec![
            MaskFeature { center: -center_separation / 2.0, width },
            MaskFeature { center: center_separation / 2.0, width },
        ],
        MaskSpec::PinholePair { d1, d2, separation } => vec![
            MaskFeature { center: -separation / 2.0, width: d1 },
            MaskFeature { center: separation / 2.0, width: d2 },
        ],
        MaskSpec::Slit { width, center } => vec![MaskFeature { center, width }],
        MaskSpec::Uniform => Vec::new(),
    }
}

/// Speckle size `λz/(2a)` at distance `z`.
pub fn speckle_size(im: &ImagingConfig, z: f64) -> f64 {
    im.source.wavelength * z / (2.0 * im.source.half_width)
}

/// Half-width of the sampled source window.
pub fn source_extent(im: &ImagingConfig) -> f64 {
    match im.source.shape {
        SourceShape::Uniform => im.source.half_width,
        SourceShape::Gaussian => GAUSSIAN_EXTENT * im.source.half_width,
    }
}

/// Defocus blur half-width `a|z2 - z1|/z1`.
pub fn defocus_blur(im: &ImagingConfig, z2: f64) -> f64 {
    im.source.half_width * (z2 - im.z1).abs() / im.z1
}

fn object_window(im: &ImagingConfig) -> f64 {
    let feats = mask_features(&im.mask);
    let lo = feats.iter().map(|f| f.center - f.width / 2.0).fold(f64::INFINITY, f64::min);
    let hi = feats.iter().map(|f| f.center + f.width / 2.0).fold(f64::NEG_INFINITY, f64::max);
    let (extent, edge) = if feats.is_empty() { (0.0, 0.0) } else { (hi - lo, lo.abs().max(hi.abs())) };
    (2.0 * extent).max(1.5 * edge).max(3.0 * speckle_size(im, im.z1))
}

fn detector_window(im: &ImagingConfig, h1: f64, z2: f64) -> f64 {
    h1 * (z2 / im.z1) + defocus_blur(im, z2)
}

fn narrowest_feature(im: &ImagingConfig) -> f64 {
    mask_features(&im.mask).iter().map(|f| f.width).fold(f64::INFINITY, f64::min)
}

/// Largest step allowed when a window of half-width `h` meets the source.
fn chirp_limit(im: &ImagingConfig, z: f64, h: f64) -> f64 {
    SAMPLING_MARGIN * max_sampling_step(2.0 * h.max(source_extent(im)), z, im.source.wavelength)
}

fn object_step_limit(im: &ImagingConfig, h1: f64) -> f64 {
    chirp_limit(im, im.z1, h1)
        .min(speckle_size(im, im.z1) / KERNEL_SAMPLES)
        .min(narrowest_feature(im) / FEATURE_SAMPLES)
}

fn detector_step_limit(im: &ImagingConfig, z2: f64, h2: f64) -> f64 {
    let mut lim = chirp_limit(im, z2, h2).min(speckle_size(im, z2) / KERNEL_SAMPLES);
    if im.ensemble.detector_aperture > 0.0 {
        lim = lim.min(im.ensemble.detector_aperture / APERTURE_SAMPLES);
    }
    lim
}

/// Grid `-m·dx ..= m·dx` with `m = ceil(half/dx)` rounded up to a multiple of `multiple`.
fn symmetric(half: f64, dx: f64, multiple: usize) -> Result<Grid> {
    let m = ((half / dx - 1e-9).ceil().max(1.0) as usize).div_ceil(multiple) * multiple;
    Grid::with_step(-(m as f64) * dx, dx, 2 * m + 1)
}

fn half_span(g: &Grid) -> f64 {
    g.x_min().abs().max(g.x_max().abs())
}

fn source_grid(im: &ImagingConfig, arms: &[(f64, &Grid)]) -> Result<Grid> {
    let s = source_extent(im);
    let n = match im.grid.source_points {
        Some(n) => n,
        None => {
            let dx = arms.iter().map(|&(z, g)| chirp_limit(im, z, half_span(g))).fold(f64::INFINITY, f64::min) / 2.0;
            ((2.0 * s / dx).ceil() as usize + 1).max(MIN_SOURCE_POINTS)
        }
    };
    Grid::centered(s, n)
}

/// Grids of one focused-image run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocusedLayout {
    pub source: Grid,
    pub object: Grid,
    /// Grid the reference field and analytic profile are evaluated on.
    pub detector: Grid,
    /// Reported `x2` are every `scan_stride`-th detector sample.
    pub scan_stride: usize,
}

pub fn plan_focused(im: &ImagingConfig) -> Result<FocusedLayout> {
    let z1 = im.z1;
    let z2 = im.z2.unwrap_or(z1);
    let h1 = object_window(im);
    let h2 = detector_window(im, h1, z2);
    let dx1_max = object_step_limit(im, h1);
    let dx2_max = detector_step_limit(im, z2, h2);

    let scan = im.ensemble.scan_step.map(|s| {
        let stride = (s / dx2_max - 1e-9).ceil().max(1.0) as usize;
        (s, stride, s / stride as f64)
    });
    let object = match (im.grid.object_points, scan) {
        (Some(n), _) => Grid::centered(h1, n)?,
        (None, Some((_, _, dx2))) => {
            let k = (dx2 * z1 / (z2 * dx1_max) - 1e-9).ceil().max(1.0);
            symmetric(h1, dx2 * z1 / (z2 * k), 1)?
        }
        (None, None) => symmetric(h1, dx1_max, 1)?,
    };
    let (detector, scan_stride) = match (scan, im.grid.detector_points) {
        (Some((s, stride, dx2)), _) => {
            let m = (h2 / s - 1e-9).ceil().max(1.0) as usize;
            (symmetric(m as f64 * s, dx2, stride)?, stride)
        }
        (None, Some(n)) => (Grid::centered(h2, n)?, 1),
        (None, None) => {
            let q = object.dx() * z2 / z1;
            let dx2 = if q <= dx2_max { (dx2_max / q + 1e-9).floor() * q } else { dx2_max };
            (symmetric(h2, dx2, 1)?, 1)
        }
    };
    let source = source_grid(im, &[(z1, &object), (z2, &detector)])?;
    Ok(FocusedLayout { source, object, detector, scan_stride })
}

/// Grids of a `z2` sweep; every row shares the detector grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepLayout {
    pub source: Grid,
    pub object: Grid,
    pub detector: Grid,
}

pub fn plan_sweep(im: &ImagingConfig, sweep: &SweepConfig) -> Result<SweepLayout> {
    let h1 = object_window(im);
    let ends = [sweep.z2_min, sweep.z2_max];
    let h2 = ends.iter().map(|&z| detector_window(im, h1, z)).fold(0.0, f64::max);
    let object = match im.grid.object_points {
        Some(n) => Grid::centered(h1, n)?,
        None => symmetric(h1, object_step_limit(im, h1), 1)?,
    };
    let detector = match im.grid.detector_points {
        Some(n) => Grid::centered(h2, n)?,
        None => {
            let dx2_max = ends.iter().map(|&z| detector_step_limit(im, z, h2)).fold(f64::INFINITY, f64::min);
            let dx1 = object.dx();
            let dx2 = if dx1 <= dx2_max { (dx2_max / dx1 + 1e-9).floor() * dx1 } else { dx2_max };
            symmetric(h2, dx2, 1)?
        }
    };
    let source = source_grid(im, &[(im.z1, &object), (sweep.z2_min, &detector)])?;
    Ok(SweepLayout { source, object, detector })
}

/// Detector grid for the analytic row at `z2`: a lattice commensurate with
/// the object grid covering the shared detector window.
pub fn sweep_row_grid(im: &ImagingConfig, object: &Grid, detector: &Grid, z2: f64) -> Result<Grid> {
    let q = object.dx() * z2 / im.z1;
    let h = (detector.dx() / q + 1e-9).floor().max(1.0) * q;
    symmetric(half_span(detector) + 2.0 * h, h, 1)
}
