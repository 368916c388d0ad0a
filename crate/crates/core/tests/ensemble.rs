use ghostsim_core::analytic::delta_g2_analytic;
use ghostsim_core::ensemble::*;
use ghostsim_core::metrics::find_peaks;
use ghostsim_core::optics::*;
use ghostsim_core::profile::ErrorEstimate;
use ghostsim_core::{Correlation, Ensemble, Error, Grid, Mask, Source};

/// Double slit 100 µm / 200 µm at z = 300 mm, 512-point object and detector grids.
fn fig3(n: usize, seed: u64) -> (Mask, Source, Geometry, Ensemble) {
    let source = Source::uniform(693e-9, 6e-3, 1e-10).unwrap();
    let geom = Geometry::new(0.3, 0.3).unwrap();
    let grid = Grid::centered(0.6e-3, 512).unwrap();
    let mask = Mask::double_slit(grid, 100e-6, 200e-6).unwrap();
    let src = Grid::centered(6e-3, 2801).unwrap();
    (mask, source, geom, Ensemble::new(n, seed, src, grid, grid))
}

type Geometry = OpticalGeometry<f64>;

fn within_3se(mc: &Correlation, reference: &[f64]) -> f64 {
    let ok =
        mc.delta_g2.iter().zip(&mc.std_err).zip(reference).filter(|((v, se), r)| (*v - *r).abs() <= 3.0 * *se).count();
    ok as f64 / mc.len() as f64
}

#[test]
fn draws_are_pure_functions_of_seed_and_index() {
    let source = Source::uniform(693e-9, 1e-3, 1e-10).unwrap();
    let grid = Grid::centered(1e-3, 64).unwrap();
    let a = draw_source_realization(&source, &grid, 7, 42);
    assert_eq!(a, draw_source_realization(&source, &grid, 7, 42));
    assert_ne!(a, draw_source_realization(&source, &grid, 8, 42));
    assert_ne!(a, draw_source_realization(&source, &grid, 7, 43));
    let dark = Source::uniform(693e-9, 1e-3, 1e-10).unwrap();
    let outside = Grid::new(2e-3, 3e-3, 16).unwrap();
    assert!(draw_source_realization(&dark, &outside, 0, 1).is_zero());
}

#[test]
fn generator_moments() {
    let source = Source::uniform(693e-9, 1e-3, 1e-10).unwrap();
    let grid = Grid::centered(0.5e-3, 5).unwrap();
    let n = 100_000;
    let mut power = [0.0; 5];
    let mut re = [0.0; 5];
    let mut re2 = [0.0; 5];
    for r in 0..n {
        let f = draw_source_realization(&source, &grid, r, 2024);
        for (i, a) in f.amplitude().iter().enumerate() {
            power[i] += a.norm_sqr();
            re[i] += a.re;
            re2[i] += a.re * a.re;
        }
    }
    let nf = n as f64;
    for i in 0..5 {
        assert!((power[i] / nf - 1.0).abs() < 0.02, "mean power {}", power[i] / nf);
        let mean = re[i] / nf;
        let se = ((re2[i] / nf - mean * mean) / nf).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    }
}

#[test]
fn opaque_and_full_bucket_records() {
    let (mask, source, geom, cfg) = fig3(4, 1);
    let field = draw_source_realization(&source, &cfg.source_grid, 0, 1);
    let opaque = Mask::opaque(*mask.grid());
    let rec = simulate_realization(&field, &opaque, &geom, &cfg, source.wavelength).unwrap();
    assert_eq!(rec.i1, 0.0);
    assert!(rec.i2.iter().all(|&v| v >= 0.0));

    // uniform mask, full bucket: the bucket reads the propagated power
    let src = Grid::centered(1e-3, 201).unwrap();
    let obj = Grid::centered(2e-3, 801).unwrap();
    let small = Source::uniform(693e-9, 1e-3, 1e-10).unwrap();
    let cfg = Ensemble::new(4, 1, src, obj, obj);
    let field = draw_source_realization(&small, &src, 3, 9);
    let rec = simulate_realization(&field, &Mask::uniform(obj), &geom, &cfg, small.wavelength).unwrap();
    let propagated = fresnel_propagate(&field, 0.3, 693e-9, &obj).unwrap().total_power();
    assert!((rec.i1 / propagated - 1.0).abs() < 1e-12);
}

#[test]
fn rejects_degenerate_ensembles() {
    let (mask, source, geom, mut cfg) = fig3(1, 1);
    assert!(matches!(delta_g2_montecarlo(&mask, &source, &geom, &cfg), Err(Error::InvalidArgument(_))));
    cfg.n_realizations = 8;
    let opaque = Mask::opaque(*mask.grid());
    assert!(matches!(delta_g2_montecarlo(&opaque, &source, &geom, &cfg), Err(Error::DegenerateStatistics(_))));
}

#[test]
fn identical_across_worker_counts() {
    let (mask, source, geom, cfg) = fig3(96, 11);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| delta_g2_montecarlo(&mask, &source, &geom, &cfg).unwrap())
    };
    let one = run(1);
    for threads in [2, 8] {
        let other = run(threads);
        assert!(one.delta_g2.iter().zip(&other.delta_g2).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(one.std_err.iter().zip(&other.std_err).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
    assert_eq!(one.error_estimate, ErrorEstimate::BatchMeans { batches: BATCHES });
    let small = Ensemble { n_realizations: 20, ..cfg.clone() };
    let jk = delta_g2_montecarlo(&mask, &source, &geom, &small).unwrap();
    assert_eq!(jk.error_estimate, ErrorEstimate::Jackknife);
    assert!(jk.std_err.iter().all(|s| *s > 0.0));
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let source = Source::uniform(693e-9, 1e-3, 1e-10).unwrap();
    let geom = Geometry::new(0.3, 0.3).unwrap();
    let grid = Grid::centered(0.6e-3, 241).unwrap();
    let mask = Mask::double_slit(grid, 100e-6, 300e-6).unwrap();
    let src = Grid::centered(1e-3, 101).unwrap();
    let mean_se = |n: usize, seed: u64| {
        let cfg = Ensemble::new(n, seed, src, grid, grid);
        let p = delta_g2_montecarlo(&mask, &source, &geom, &cfg).unwrap();
        p.std_err.iter().sum::<f64>() / p.len() as f64
    };
    let ratio = mean_se(512, 100) / mean_se(2048, 200);
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn point_source_obeys_siegert() {
    // one lit source sample: the field is fully coherent in every realization
    let source = Source::uniform(693e-9, 4e-6, 1e-10).unwrap();
    let geom = Geometry::new(0.3, 0.3).unwrap();
    let src = Grid::centered(1e-3, 201).unwrap();
    let obj = Grid::centered(1e-3, 201).unwrap();
    let cfg = Ensemble::new(4096, 5, src, obj, obj);
    let p = delta_g2_montecarlo(&Mask::uniform(obj), &source, &geom, &cfg).unwrap().to_raw_g2();
    let peak = (0..p.len()).max_by(|&a, &b| p.delta_g2[a].total_cmp(&p.delta_g2[b])).unwrap();
    assert!((p.delta_g2[peak] - 2.0).abs() <= 3.0 * p.std_err[peak], "{} ± {}", p.delta_g2[peak], p.std_err[peak]);
    assert!(p.delta_g2.iter().zip(&p.std_err).all(|(v, se)| *v >= -3.0 * se));
}

#[test]
fn no_object_gives_flat_correlation() {
    // bucket 60 speckles wide, scanned well inside it
    let source = Source::uniform(693e-9, 0.5e-3, 1e-10).unwrap();
    let geom = Geometry::new(0.3, 0.3).unwrap();
    let src = Grid::centered(1e-3, 251).unwrap();
    let obj = Grid::centered(6e-3, 1501).unwrap();
    let det = Grid::centered(0.5e-3, 101).unwrap();
    let cfg = Ensemble::new(1024, 8, src, obj, det);
    let p = delta_g2_montecarlo(&Mask::uniform(obj), &source, &geom, &cfg).unwrap();
    let mean = p.delta_g2.iter().sum::<f64>() / p.len() as f64;
    assert!(within_3se(&p, &vec![mean; p.len()]) >= 0.95);
}

#[test]
fn speckle_correlation_length() {
    // long-baseline geometry: intensity correlation vanishes at λz/(2a) ≈ 0.705 mm
    let source = Source::uniform(692.9e-9, 0.835e-3, 1e-10).unwrap();
    let src = Grid::centered(0.84e-3, 85).unwrap();
    let det = Grid::centered(3e-3, 601).unwrap();
    let prop = FresnelPropagator::new(src, det, 1.7, source.wavelength, PropagationMethod::ChirpZ).unwrap();
    let zero = (7.053473053892216e-4 / det.dx()).round() as usize;
    let half = zero / 2;
    let (mut s0, mut s1, mut s2, mut m) = (0.0, 0.0, 0.0, 0.0);
    let n = 2000;
    let centers = 200..400;
    for r in 0..n {
        let i = prop.propagate(&draw_source_realization(&source, &src, r, 77)).unwrap().intensity();
        for c in centers.clone() {
            m += i[c];
            s0 += i[c] * i[c];
            s1 += i[c] * i[c + half];
            s2 += i[c] * i[c + zero];
        }
    }
    let count = (n as usize * centers.len()) as f64;
    let mean = m / count;
    let norm = |s: f64| (s / count - mean * mean) / (mean * mean);
    let at0 = norm(s0);
    assert!((at0 - 1.0).abs() < 0.1, "{at0}");
    assert!((norm(s1) / at0 - 0.405).abs() < 0.05, "{}", norm(s1) / at0);
    assert!((norm(s2) / at0).abs() < 0.05, "{}", norm(s2) / at0);
}

#[test]
fn fig3_montecarlo_matches_analytic() {
    let (mask, source, geom, cfg) = fig3(4096, 2023);
    let t = std::time::Instant::now();
    let mc = delta_g2_montecarlo(&mask, &source, &geom, &cfg).unwrap();
    let elapsed = t.elapsed();
    let exact = delta_g2_analytic(&mask, &source, &geom, &cfg.detector_grid).unwrap();
    let fraction = within_3se(&mc, &exact.delta_g2);
    assert!(fraction >= 0.95, "agreement at {:.1}% of samples ({elapsed:?})", 100.0 * fraction);

    let peaks = find_peaks(&mc.x2, &mc.delta_g2, 50e-6);
    assert!(peaks.len() >= 2);
    let dx = cfg.detector_grid.dx();
    let mut centers = [peaks[0].position, peaks[1].position];
    centers.sort_by(f64::total_cmp);
    assert!((centers[0] + 100e-6).abs() <= dx && (centers[1] - 100e-6).abs() <= dx, "{centers:?}");
}
