//! Observables of a reconstructed correlation profile: peak positions,
//! widths, separation and visibility.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optics::MaskFeature;
use crate::profile::CorrelationProfile;
use crate::scalar::Real;

/// Candidates below this fraction of the global maximum are not peaks.
pub const MIN_PEAK_FRACTION: f64 = 0.3;

/// One resolved peak of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak<T> {
    /// Midpoint of the half-maximum crossings (the sample position when a
    /// crossing falls off the grid).
    pub position: T,
    pub value: T,
    pub index: usize,
    /// Full width at half maximum, `None` if the peak runs off the grid.
    pub fwhm: Option<T>,
}

/// Linear interpolation of the `level` crossing between samples `a` and `b`.
fn interpolate<T: Real>(x: &[T], y: &[T], a: usize, b: usize, level: T) -> T {
    let f = (y[a] - level) / (y[a] - y[b]);
    x[a] + (x[b] - x[a]) * f
}

/// Half-maximum crossings around sample `i`, measured from zero.
fn half_max_span<T: Real>(x: &[T], y: &[T], i: usize) -> (usize, usize, Option<T>, Option<T>) {
    let half = y[i] / T::of(2.0);
    let mut l = i;
    while l > 0 && y[l - 1] > half {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < y.len() && y[r + 1] > half {
        r += 1;
    }
    let left = (l > 0).then(|| interpolate(x, y, l, l - 1, half));
    let right = (r + 1 < y.len()).then(|| interpolate(x, y, r, r + 1, half));
    (l, r, left, right)
}

/// FWHM of the peak at sample `i`, by linear interpolation of the
/// half-maximum crossings.
pub fn fwhm<T: Real>(x: &[T], y: &[T], i: usize) -> Option<T> {
    let (_, _, left, right) = half_max_span(x, y, i);
    Some(right? - left?)
}

/// Peaks of `y(x)`, largest first.
///
/// Local maxima are taken in decreasing order of height; each accepted peak
/// claims its contiguous above-half-maximum span, and later candidates
/// inside a claimed span or closer than `min_separation` to an accepted peak
/// are dropped, as are candidates below [`MIN_PEAK_FRACTION`] of the global
/// maximum.
pub fn find_peaks<T: Real>(x: &[T], y: &[T], min_separation: T) -> Vec<Peak<T>> {
    assert_eq!(x.len(), y.len(), "profile arrays differ in length");
    let n = y.len();
    let Some(top) = y.iter().copied().filter(|v| v.is_finite()).reduce(T::max) else {
        return Vec::new();
    };
    if !(top > T::zero()) {
        return Vec::new();
    }
    let floor = top * T::of(MIN_PEAK_FRACTION);
    let mut order: Vec<usize> = (0..n).filter(|&i| y[i].is_finite() && y[i] >= floor).collect();
    order.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).expect("finite").then(a.cmp(&b)));

    let mut claimed = vec![false; n];
    let mut peaks: Vec<Peak<T>> = Vec::new();
    for i in order {
        let local_max = (i == 0 || y[i - 1] <= y[i]) && (i + 1 == n || y[i + 1] <= y[i]);
        if claimed[i] || !local_max {
            continue;
        }
        let (l, r, left, right) = half_max_span(x, y, i);
        claimed[l..=r].iter_mut().for_each(|c| *c = true);
        let position = match (left, right) {
            (Some(a), Some(b)) => (a + b) / T::of(2.0),
            _ => x[i],
        };
        if peaks.iter().any(|p| (p.position - position).abs() < min_separation) {
            continue;
        }
        let fwhm = match (left, right) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        peaks.push(Peak { position, value: y[i], index: i, fwhm });
    }
    peaks
}

/// Samples excluded from the visibility baseline: every feature widened by
/// `2·kernel_width` on both sides.
pub fn feature_neighborhoods<T: Real>(features: &[MaskFeature<T>], kernel_width: T) -> Vec<(T, T)> {
    let two = T::of(2.0);
    features
        .iter()
        .map(|f| (f.center - f.width / two - two * kernel_width, f.center + f.width / two + two * kernel_width))
        .collect()
}

fn median<T: Real>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::of(2.0)
    }
}

/// Visibility `V = (max - baseline)/(max + baseline)` of a raw `g²` profile,
/// the baseline being the median over samples outside `exclusions`.
/// Returns `(V, baseline)`.
pub fn visibility<T: Real>(x: &[T], g2: &[T], exclusions: &[(T, T)]) -> Result<(T, T)> {
    if x.len() != g2.len() {
        return Err(Error::Shape(format!("{} positions for {} values", x.len(), g2.len())));
    }
    if g2.iter().any(|v| !v.is_finite()) {
        return Err(invalid("profile contains non-finite values"));
    }
    let outside: Vec<T> = x
        .iter()
        .zip(g2)
        .filter(|(xi, _)| !exclusions.iter().any(|(lo, hi)| **xi >= *lo && **xi <= *hi))
        .map(|(_, v)| *v)
        .collect();
    if outside.is_empty() {
        return Err(Error::DegenerateStatistics("no profile samples outside the feature neighborhoods".into()));
    }
    let baseline = median(outside);
    let max = g2.iter().copied().fold(T::neg_infinity(), T::max);
    let sum = max + baseline;
    if !(sum > T::zero()) {
        return Err(Error::DegenerateStatistics("visibility undefined for a non-positive profile".into()));
    }
    Ok(((max - baseline) / sum, baseline))
}

/// Everything reported about one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetrics<T> {
    pub peaks: Vec<Peak<T>>,
    pub peak_positions: Vec<T>,
    /// Distance between the two largest peaks.
    pub peak_separation: Option<T>,
    pub fwhm_per_peak: Vec<Option<T>>,
    pub visibility: Option<T>,
    pub visibility_baseline: Option<T>,
    pub baseline_exclusions: Vec<(T, T)>,
    pub max_value: T,
    pub second_moment: T,
}

/// Peaks of the fluctuation profile and visibility of the raw `g²`.
///
/// `kernel_width` is the blur scale of the image; it sets both the minimum
/// peak separation and the baseline exclusion zones. Visibility is `None`
/// when no baseline samples remain.
pub fn profile_metrics<T: Real>(
    profile: &CorrelationProfile<T>,
    features: &[MaskFeature<T>],
    kernel_width: T,
) -> Result<ProfileMetrics<T>> {
    let fluct = profile.fluctuation();
    let peaks = find_peaks(&profile.x2, &fluct, kernel_width);
    let peak_separation = (peaks.len() >= 2).then(|| (peaks[0].position - peaks[1].position).abs());
    let exclusions = feature_neighborhoods(features, kernel_width);
    let raw = profile.to_raw_g2().delta_g2;
    let (visibility, visibility_baseline) = match visibility(&profile.x2, &raw, &exclusions) {
        Ok((v, b)) => (Some(v), Some(b)),
        Err(Error::DegenerateStatistics(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(ProfileMetrics {
        peak_positions: peaks.iter().map(|p| p.position).collect(),
        fwhm_per_peak: peaks.iter().map(|p| p.fwhm).collect(),
        peaks,
        peak_separation,
        visibility,
        visibility_baseline,
        baseline_exclusions: exclusions,
        max_value: fluct.iter().copied().fold(T::neg_infinity(), T::max),
        second_moment: profile.second_moment(),
    })
}
