//! Monte Carlo estimate of the bucket/point-detector fluctuation correlation.
//!
//! Each realization draws a delta-correlated circular-Gaussian source field,
//! propagates it by `z1` to the object (mask, then bucket integration) and by
//! `z2` to the scanning detector. Over realizations,
//!
//! ```text
//! Δg²(x2) = cov(i1, i2(x2)) / (⟨i1⟩ ⟨i2(x2)⟩)
//! ```
//!
//! Realizations are processed in contiguous batches. Inside a batch the
//! records are computed in parallel, collected in index order and reduced
//! two-pass; batches are then merged sequentially. The result therefore
//! does not depend on the number of worker threads.

mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rng::draw_source_realization;

use crate::error::{invalid, Error, Result};
use crate::optics::{
    ComplexField, FresnelPropagator, OpticalGeometry, PropagationMethod, SourceSpec, TransmissionMask, TransverseGrid,
};
use crate::profile::{CorrelationProfile, ErrorEstimate, Normalization};
use crate::scalar::Real;

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 16;
/// Below `BATCHES * MIN_BATCH_SIZE` realizations the jackknife is used instead.
pub const MIN_BATCH_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig<T> {
    pub n_realizations: usize,
    pub master_seed: u64,
    pub source_grid: TransverseGrid<T>,
    pub object_grid: TransverseGrid<T>,
    /// Grid the reference-arm field is computed on.
    pub detector_grid: TransverseGrid<T>,
    /// `[lo, hi]` on the object grid integrated by the bucket detector.
    pub bucket_window: (T, T),
    /// Width of the collection window around each reported `x2`; 0 = point detector.
    pub detector_aperture: T,
    /// Report every `scan_stride`-th detector-grid sample.
    pub scan_stride: usize,
}

impl<T: Real> EnsembleConfig<T> {
    /// Config with a full-grid bucket, point detector and no scan stride.
    pub fn new(
        n_realizations: usize,
        master_seed: u64,
        source_grid: TransverseGrid<T>,
        object_grid: TransverseGrid<T>,
        detector_grid: TransverseGrid<T>,
    ) -> Self {
        Self {
            n_realizations,
            master_seed,
            source_grid,
            object_grid,
            detector_grid,
            bucket_window: (object_grid.x_min(), object_grid.x_max()),
            detector_aperture: T::zero(),
            scan_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations < 2 {
            return Err(invalid(format!("need at least 2 realizations, got {}", self.n_realizations)));
        }
        let (lo, hi) = self.bucket_window;
        if !(lo <= hi && self.object_grid.contains(lo) && self.object_grid.contains(hi)) {
            return Err(invalid(format!(
                "bucket window [{lo}, {hi}] must lie within the object grid [{}, {}]",
                self.object_grid.x_min(),
                self.object_grid.x_max()
            )));
        }
        if !(self.detector_aperture >= T::zero() && self.detector_aperture.is_finite()) {
            return Err(invalid(format!("detector aperture must be non-negative, got {}", self.detector_aperture)));
        }
        if self.scan_stride == 0 {
            return Err(invalid("scan stride must be positive"));
        }
        Ok(())
    }

    /// Grid of reported `x2` positions.
    pub fn scan_grid(&self) -> Result<TransverseGrid<T>> {
        self.detector_grid.subsample(self.scan_stride)
    }
}

/// Detector readings of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityRecord<T> {
    /// Bucket signal.
    pub i1: T,
    /// Point-detector intensity at each reported `x2`.
    pub i2: Vec<T>,
}

/// Precomputed two-arm pipeline for one scenario.
pub struct TwoArmSimulator<'a, T: Real> {
    mask: &'a TransmissionMask<T>,
    object_arm: FresnelPropagator<T>,
    reference_arm: FresnelPropagator<T>,
    bucket: Option<(usize, usize)>,
    apertures: Vec<(usize, usize)>,
}

impl<'a, T: Real> TwoArmSimulator<'a, T> {
    pub fn new(
        mask: &'a TransmissionMask<T>,
        geom: &OpticalGeometry<T>,
        cfg: &EnsembleConfig<T>,
        wavelength: T,
    ) -> Result<Self> {
        cfg.validate()?;
        if !mask.grid().same_as(&cfg.object_grid) {
            return Err(Error::Shape("mask grid differs from the ensemble object grid".into()));
        }
        let method = PropagationMethod::ChirpZ;
        let object_arm = FresnelPropagator::new(cfg.source_grid, cfg.object_grid, geom.z1, wavelength, method)?;
        let reference_arm = FresnelPropagator::new(cfg.source_grid, cfg.detector_grid, geom.z2, wavelength, method)?;
        let bucket = cfg.object_grid.index_range(cfg.bucket_window.0, cfg.bucket_window.1);
        let half = cfg.detector_aperture / T::of(2.0);
        let det = cfg.detector_grid;
        let apertures = (0..det.len())
            .step_by(cfg.scan_stride)
            .map(|i| {
                let x = det.coord(i);
                det.index_range(x - half, x + half).unwrap_or((i, i))
            })
            .collect();
        Ok(Self { mask, object_arm, reference_arm, bucket, apertures })
    }

    pub fn record(&self, src: &ComplexField<T>) -> Result<IntensityRecord<T>> {
        let object = self.mask.apply(&self.object_arm.propagate(src)?)?;
        let i1 = match self.bucket {
            Some((first, last)) => {
                let dx = object.grid().dx();
                object.amplitude()[first..=last].iter().map(|a| a.norm_sqr()).sum::<T>() * dx
            }
            None => T::zero(),
        };
        let reference = self.reference_arm.propagate(src)?.intensity();
        let i2 = self
            .apertures
            .iter()
            .map(|&(first, last)| reference[first..=last].iter().copied().sum::<T>() / T::of_usize(last - first + 1))
            .collect();
        Ok(IntensityRecord { i1, i2 })
    }

    pub fn n_outputs(&self) -> usize {
        self.apertures.len()
    }
}

/// Detector readings for one source field.
///
/// Bucket: `Σ |T·E1|² dx` over the bucket window. Reference: mean `|E2|²`
/// over the aperture window around each reported `x2`.
pub fn simulate_realization<T: Real>(
    src_field: &ComplexField<T>,
    mask: &TransmissionMask<T>,
    geom: &OpticalGeometry<T>,
    cfg: &EnsembleConfig<T>,
    wavelength: T,
) -> Result<IntensityRecord<T>> {
    TwoArmSimulator::new(mask, geom, cfg, wavelength)?.record(src_field)
}

/// Running two-pass statistics of one batch (or a merge of batches).
#[derive(Debug, Clone)]
struct Moments<T> {
    n: usize,
    mean1: T,
    mean2: Vec<T>,
    /// `Σ (i1 - mean1)(i2 - mean2)`
    comoment: Vec<T>,
}

impl<T: Real> Moments<T> {
    fn from_records(records: &[IntensityRecord<T>]) -> Self {
        let n = records.len();
        let m = records[0].i2.len();
        let nf = T::of_usize(n);
        let mean1 = records.iter().map(|r| r.i1).sum::<T>() / nf;
        let mut mean2 = vec![T::zero(); m];
        for r in records {
            for (acc, v) in mean2.iter_mut().zip(&r.i2) {
                *acc = *acc + *v;
            }
        }
        mean2.iter_mut().for_each(|v| *v = *v / nf);
        let mut comoment = vec![T::zero(); m];
        for r in records {
            let d1 = r.i1 - mean1;
            for ((acc, v), mu) in comoment.iter_mut().zip(&r.i2).zip(&mean2) {
                *acc = *acc + d1 * (*v - *mu);
            }
        }
        Self { n, mean1, mean2, comoment }
    }

    fn merge(&mut self, other: &Self) {
        let na = T::of_usize(self.n);
        let nb = T::of_usize(other.n);
        let n = na + nb;
        let d1 = other.mean1 - self.mean1;
        for j in 0..self.mean2.len() {
            let d2 = other.mean2[j] - self.mean2[j];
            self.comoment[j] = self.comoment[j] + other.comoment[j] + d1 * d2 * na * nb / n;
            self.mean2[j] = self.mean2[j] + d2 * nb / n;
        }
        self.mean1 = self.mean1 + d1 * nb / n;
        self.n += other.n;
    }

    fn delta_g2(&self) -> Result<Vec<T>> {
        if self.mean1 <= T::zero() {
            return Err(Error::DegenerateStatistics("bucket detector saw no light in any realization".into()));
        }
        if let Some(j) = self.mean2.iter().position(|v| *v <= T::zero()) {
            return Err(Error::DegenerateStatistics(format!("no light at reference sample {j}")));
        }
        let dof = T::of_usize(self.n - 1);
        Ok(self.comoment.iter().zip(&self.mean2).map(|(c, m2)| *c / dof / (self.mean1 * *m2)).collect())
    }
}

fn batch_bounds(n: usize, batches: usize) -> Vec<(usize, usize)> {
    (0..batches).map(|b| (b * n / batches, (b + 1) * n / batches)).collect()
}

fn simulate_range<T: Real>(
    sim: &TwoArmSimulator<'_, T>,
    source: &SourceSpec<T>,
    cfg: &EnsembleConfig<T>,
    range: (usize, usize),
) -> Result<Vec<IntensityRecord<T>>> {
    (range.0..range.1)
        .into_par_iter()
        .map(|r| sim.record(&draw_source_realization(source, &cfg.source_grid, r as u64, cfg.master_seed)))
        .collect()
}

fn spread<T: Real>(values: &[Vec<T>], j: usize) -> (T, T) {
    let n = T::of_usize(values.len());
    let mean = values.iter().map(|v| v[j]).sum::<T>() / n;
    let ss = values.iter().map(|v| (v[j] - mean) * (v[j] - mean)).sum::<T>();
    (mean, ss)
}

/// Monte Carlo `Δg²(x2)` with batch-means (or, for small ensembles,
/// jackknife) standard errors.
pub fn delta_g2_montecarlo<T: Real>(
    mask: &TransmissionMask<T>,
    source: &SourceSpec<T>,
    geom: &OpticalGeometry<T>,
    cfg: &EnsembleConfig<T>,
) -> Result<CorrelationProfile<T>> {
    let sim = TwoArmSimulator::new(mask, geom, cfg, source.wavelength)?;
    let n = cfg.n_realizations;
    let x2: Vec<T> = cfg.scan_grid()?.coords().collect();

    if n < BATCHES * MIN_BATCH_SIZE {
        let records = simulate_range(&sim, source, cfg, (0, n))?;
        let all = Moments::from_records(&records).delta_g2()?;
        let leave_one_out: Vec<Vec<T>> = (0..n)
            .map(|k| {
                let rest: Vec<IntensityRecord<T>> =
                    records.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, r)| r.clone()).collect();
                Moments::from_records(&rest).delta_g2()
            })
            .collect::<Result<_>>()?;
        let nf = T::of_usize(n);
        let std_err = (0..x2.len()).map(|j| ((nf - T::one()) / nf * spread(&leave_one_out, j).1).sqrt()).collect();
        return CorrelationProfile::new(x2, all, std_err, n, Normalization::Fluctuation, ErrorEstimate::Jackknife);
    }

    let mut total: Option<Moments<T>> = None;
    let mut per_batch = Vec::with_capacity(BATCHES);
    for range in batch_bounds(n, BATCHES) {
        let records = simulate_range(&sim, source, cfg, range)?;
        let moments = Moments::from_records(&records);
        per_batch.push(moments.delta_g2()?);
        match total.as_mut() {
            Some(t) => t.merge(&moments),
            None => total = Some(moments),
        }
    }
    let values = total.expect("at least one batch").delta_g2()?;
    let b = T::of_usize(BATCHES);
    let std_err = (0..x2.len()).map(|j| (spread(&per_batch, j).1 / (b - T::one()) / b).sqrt()).collect();
    CorrelationProfile::new(
        x2,
        values,
        std_err,
        n,
        Normalization::Fluctuation,
        ErrorEstimate::BatchMeans { batches: BATCHES },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_setup() -> (SourceSpec<f64>, OpticalGeometry<f64>, EnsembleConfig<f64>) {
        let source = SourceSpec::uniform(693e-9, 0.5e-3, 1e-10).unwrap();
        let geom = OpticalGeometry::new(0.3, 0.3).unwrap();
        let src = TransverseGrid::centered(0.5e-3, 101).unwrap();
        let obj = TransverseGrid::centered(0.5e-3, 101).unwrap();
        (source, geom, EnsembleConfig::new(40, 3, src, obj, obj))
    }

    #[test]
    fn config_validation() {
        let (_, _, mut cfg) = small_setup();
        cfg.n_realizations = 1;
        assert!(cfg.validate().is_err());
        cfg.n_realizations = 2;
        cfg.bucket_window = (-1.0, 0.0);
        assert!(cfg.validate().is_err());
        cfg.bucket_window = (0.0, 0.0);
        cfg.detector_aperture = -1e-6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn opaque_mask_has_dark_bucket() {
        let (source, geom, cfg) = small_setup();
        let field = draw_source_realization(&source, &cfg.source_grid, 0, 9);
        let rec =
            simulate_realization(&field, &TransmissionMask::opaque(cfg.object_grid), &geom, &cfg, 693e-9).unwrap();
        assert_eq!(rec.i1, 0.0);
        assert!(rec.i2.iter().all(|v| *v >= 0.0));
        let err = delta_g2_montecarlo(&TransmissionMask::opaque(cfg.object_grid), &source, &geom, &cfg).unwrap_err();
        assert!(matches!(err, Error::DegenerateStatistics(_)));
    }

    #[test]
    fn full_bucket_collects_propagated_power() {
        let (source, geom, cfg) = small_setup();
        let field = draw_source_realization(&source, &cfg.source_grid, 1, 9);
        let mask = TransmissionMask::uniform(cfg.object_grid);
        let rec = simulate_realization(&field, &mask, &geom, &cfg, 693e-9).unwrap();
        let direct = crate::optics::fresnel_propagate(&field, 0.3, 693e-9, &cfg.object_grid).unwrap();
        assert!((rec.i1 - direct.total_power()).abs() <= 1e-12 * rec.i1);
    }

    #[test]
    fn aperture_averages_the_reference_intensity() {
        let (source, geom, mut cfg) = small_setup();
        cfg.detector_aperture = 4.0 * cfg.detector_grid.dx();
        let field = draw_source_realization(&source, &cfg.source_grid, 2, 9);
        let mask = TransmissionMask::uniform(cfg.object_grid);
        let rec = simulate_realization(&field, &mask, &geom, &cfg, 693e-9).unwrap();
        let i2 = crate::optics::fresnel_propagate(&field, 0.3, 693e-9, &cfg.detector_grid).unwrap().intensity();
        let expect = i2[48..=52].iter().sum::<f64>() / 5.0;
        assert!((rec.i2[50] - expect).abs() < 1e-12 * expect);
        // clipped at the grid edge
        let edge = i2[0..=2].iter().sum::<f64>() / 3.0;
        assert!((rec.i2[0] - edge).abs() < 1e-12 * edge);
    }

    #[test]
    fn small_ensembles_use_the_jackknife() {
        let (source, geom, cfg) = small_setup();
        let mask = TransmissionMask::uniform(cfg.object_grid);
        let p = delta_g2_montecarlo(&mask, &source, &geom, &cfg).unwrap();
        assert_eq!(p.error_estimate, ErrorEstimate::Jackknife);
        assert!(p.std_err.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn merged_moments_match_a_single_pass() {
        let recs: Vec<IntensityRecord<f64>> = (0..37)
            .map(|k| {
                let t = k as f64;
                IntensityRecord { i1: 1.0 + (t * 0.7).sin(), i2: vec![2.0 + (t * 1.3).cos(), 0.5 + t * 0.01] }
            })
            .collect();
        let whole = Moments::from_records(&recs);
        let mut merged = Moments::from_records(&recs[..10]);
        merged.merge(&Moments::from_records(&recs[10..23]));
        merged.merge(&Moments::from_records(&recs[23..]));
        for j in 0..2 {
            assert!((whole.comoment[j] - merged.comoment[j]).abs() < 1e-12);
            assert!((whole.mean2[j] - merged.mean2[j]).abs() < 1e-12);
        }
        assert_eq!(merged.n, 37);
    }
}
