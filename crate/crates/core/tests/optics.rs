use approx::assert_relative_eq;
use ghostsim_core::analytic::predicted_speckle_size;
use ghostsim_core::optics::*;
use ghostsim_core::{Complex, Error, Grid, Source};
use proptest::prelude::*;

fn gaussian_beam(grid: TransverseGrid<f64>, w0: f64) -> ComplexField<f64> {
    ComplexField::from_fn(grid, |x| Complex::new((-x * x / (w0 * w0)).exp(), 0.0))
}

/// 1/e² intensity half-width from the second moment: `w = 2σ`.
fn beam_width(f: &ComplexField<f64>) -> f64 {
    2.0 * f.second_moment().sqrt()
}

fn relative_l2(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn make_grid_examples() {
    let g = make_grid::<f64>(-5e-3, 5e-3, 1001).unwrap();
    assert_relative_eq!(g.dx(), 1e-5, max_relative = 1e-12);
    assert_eq!(make_grid(0.0, 1.0, 2).unwrap().dx(), 1.0);
    assert!(matches!(make_grid::<f64>(-5e-3, 5e-3, 1), Err(Error::InvalidArgument(_))));
}

#[test]
fn gaussian_beam_spreading() {
    let lambda = 693e-9;
    // (w0, z, input half-window, input points, output half-window, output points, expected w(z))
    let cases = [
        (1e-3, 0.3, 5e-3, 2001, 5e-3, 2001, 0.0010021872807719494),
        (1e-4, 0.3, 5e-4, 501, 4e-3, 801, 0.0006692791451311192),
        (1e-3, 1.7, 6e-3, 1201, 6e-3, 1201, 0.001068000776069761),
    ];
    for (w0, z, hin, nin, hout, nout, expected) in cases {
        let input = gaussian_beam(Grid::centered(hin, nin).unwrap(), w0);
        let out = fresnel_propagate(&input, z, lambda, &Grid::centered(hout, nout).unwrap()).unwrap();
        let w = beam_width(&out);
        assert!((w / expected - 1.0).abs() < 1e-3, "w0={w0} z={z}: {w} vs {expected}");
        assert!((out.total_power() / input.total_power() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn zero_field_and_bad_distance() {
    let g = Grid::centered(1e-3, 201).unwrap();
    let out = fresnel_propagate(&ComplexField::zeros(g), 0.3, 693e-9, &g).unwrap();
    assert!(out.is_zero());
    let f = gaussian_beam(g, 2e-4);
    assert!(matches!(fresnel_propagate(&f, 0.0, 693e-9, &g), Err(Error::InvalidArgument(_))));
    assert!(matches!(fresnel_propagate(&f, -0.3, 693e-9, &g), Err(Error::InvalidArgument(_))));
}

#[test]
fn undersampled_chirp_is_refused() {
    // span 40 mm at z = 0.3 m allows at most 2.6 µm; 40 µm steps alias
    let g = Grid::centered(20e-3, 1001).unwrap();
    let f = gaussian_beam(g, 1e-3);
    match fresnel_propagate(&f, 0.3, 693e-9, &g) {
        Err(Error::Aliasing { dx, limit, .. }) => assert!(dx > limit),
        other => panic!("expected aliasing error, got {other:?}"),
    }
}

#[test]
fn fast_matches_direct_on_4096_points() {
    let lambda = 693e-9;
    let z = 1.7;
    let input = Grid::centered(4e-3, 4096).unwrap();
    let output = Grid::new(-5e-3, 4.5e-3, 4096).unwrap();
    let field = ComplexField::from_fn(input, |x| {
        let a = (-(x - 5e-4).powi(2) / (8e-4f64).powi(2)).exp();
        let b = 0.5 * (-(x + 1e-3).powi(2) / (3e-4f64).powi(2)).exp();
        Complex::new(a, 0.0) + Complex::from_polar(b, 2e3 * x)
    });
    let fast = fresnel_propagate_with(&field, z, lambda, &output, PropagationMethod::ChirpZ).unwrap();
    let direct = fresnel_propagate_with(&field, z, lambda, &output, PropagationMethod::Direct).unwrap();
    let err = relative_l2(fast.amplitude(), direct.amplitude());
    assert!(err < 1e-9, "relative L2 difference {err:e}");
}

#[test]
fn fast_matches_direct_on_unequal_grids() {
    let lambda = 693e-9;
    let input = Grid::centered(6e-3, 1500).unwrap();
    let output = Grid::new(-3e-4, 2e-4, 333).unwrap();
    let field = ComplexField::from_fn(input, |x| Complex::from_polar(1.0, 1e4 * x * x));
    let fast = fresnel_propagate_with(&field, 0.3, lambda, &output, PropagationMethod::ChirpZ).unwrap();
    let direct = fresnel_propagate_with(&field, 0.3, lambda, &output, PropagationMethod::Direct).unwrap();
    assert!(relative_l2(fast.amplitude(), direct.amplitude()) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_conserves_power(
        c1 in -1e-3f64..1e-3, c2 in -1e-3f64..1e-3,
        w1 in 3e-4f64..1e-3, w2 in 3e-4f64..1e-3,
        amp in 0.1f64..2.0, phase in 0.0f64..std::f64::consts::TAU, tilt in -500.0f64..500.0,
    ) {
        let lambda = 692.9e-9;
        let grid = Grid::centered(8e-3, 1601).unwrap();
        let field = ComplexField::from_fn(grid, |x| {
            let a = (-(x - c1).powi(2) / (w1 * w1)).exp();
            let b = amp * (-(x - c2).powi(2) / (w2 * w2)).exp();
            Complex::new(a, 0.0) + Complex::from_polar(b, phase + std::f64::consts::TAU * tilt * x)
        });
        let out = fresnel_propagate(&field, 1.7, lambda, &grid).unwrap();
        let rel = (out.total_power() / field.total_power() - 1.0).abs();
        prop_assert!(rel < 1e-9, "relative power change {rel:e}");
    }
}

#[test]
fn mask_application() {
    let g = Grid::centered(3e-3, 6001).unwrap();
    let f = gaussian_beam(g, 1e-3);
    assert_eq!(apply_mask(&f, &TransmissionMask::uniform(g)).unwrap(), f);
    assert!(apply_mask(&f, &TransmissionMask::opaque(g)).unwrap().is_zero());
    let other = Grid::centered(3e-3, 601).unwrap();
    assert!(matches!(apply_mask(&f, &TransmissionMask::uniform(other)), Err(Error::Shape(_))));

    let flat = ComplexField::from_fn(g, |_| Complex::new(1.0, 0.0));
    let mask = TransmissionMask::pinhole_pair(g, 0.77e-3, 0.72e-3, 3.66e-3).unwrap();
    let out = apply_mask(&flat, &mask).unwrap();
    let open: Vec<f64> = g.coords().zip(out.amplitude()).filter(|(_, a)| a.re > 0.5).map(|(x, _)| x).collect();
    let split = open.iter().position(|&x| x > 0.0).unwrap();
    let (left, right) = open.split_at(split);
    let width = |s: &[f64]| s[s.len() - 1] - s[0];
    let center = |s: &[f64]| 0.5 * (s[0] + s[s.len() - 1]);
    assert!((width(left) - 0.77e-3).abs() <= g.dx());
    assert!((width(right) - 0.72e-3).abs() <= g.dx());
    assert!((center(right) - center(left) - 3.66e-3).abs() <= g.dx());
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
    }
}

#[test]
fn uniform_source_kernel_follows_sinc_law() {
    for (lambda, a, z, x1) in [(693e-9, 6e-3, 0.3, 0.0), (693e-9, 6e-3, 0.3, 1.2e-4), (692.9e-9, 0.835e-3, 1.7, -2e-3)]
    {
        let source = Source::uniform(lambda, a, 1e-10).unwrap();
        let geom = OpticalGeometry::new(z, z).unwrap();
        let kern = CoherenceKernel::new(&source, &geom);
        let peak = kern.norm_sqr(x1, x1);
        let first_zero = lambda * z / (2.0 * a);
        let mut worst = 0.0f64;
        for k in -400..=400 {
            let d = k as f64 * first_zero / 50.0;
            let law = sinc(2.0 * a * d / (lambda * z)).powi(2);
            worst = worst.max((kern.norm_sqr(x1, x1 + d) / peak - law).abs());
        }
        assert!(worst < 1e-6, "a={a} z={z}: max deviation {worst:e}");
    }
}

#[test]
fn long_baseline_first_zero() {
    let source = Source::uniform(692.9e-9, 0.835e-3, 1e-10).unwrap();
    let size = predicted_speckle_size(&source, 1.7).unwrap();
    assert!((size / 0.705e-3 - 1.0).abs() < 0.01, "{size}");
    assert_relative_eq!(size, 7.053473053892216e-4, max_relative = 1e-12);
    let geom = OpticalGeometry::new(1.7, 1.7).unwrap();
    let kern = CoherenceKernel::new(&source, &geom);
    let at_zero = kern.norm_sqr(0.0, size) / kern.norm_sqr(0.0, 0.0);
    assert!(at_zero < 1e-9, "{at_zero:e}");
    // a minimum: both neighbours are higher
    let d = size * 1e-2;
    assert!(kern.norm_sqr(0.0, size - d) > kern.norm_sqr(0.0, size));
    assert!(kern.norm_sqr(0.0, size + d) > kern.norm_sqr(0.0, size));
}

#[test]
fn kernel_matches_brute_force_quadrature() {
    // high-precision quadrature references of |K(0, d)|² / |K(0, 0)|² at z = 300 mm, a = 6 mm
    let source = Source::uniform(693e-9, 6e-3, 1e-10).unwrap();
    let kern = CoherenceKernel::new(&source, &OpticalGeometry::new(0.3, 0.3).unwrap());
    let peak = kern.norm_sqr(0.0, 0.0);
    assert!((kern.norm_sqr(0.0, 5e-6) / peak - 0.75431921097468).abs() < 1e-9);
    assert!((kern.norm_sqr(0.0, 30e-6) / peak - 0.018844406432024).abs() < 1e-9);
}

#[test]
fn kernel_conjugate_symmetry() {
    let source = Source::uniform(693e-9, 6e-3, 1e-10).unwrap();
    let gauss = Source::new(693e-9, SourceProfile::Gaussian { half_width: 2e-3 }, 1e-10).unwrap();
    for s in [&source, &gauss] {
        for (z1, z2) in [(0.3, 0.3), (0.3, 0.25), (0.3, 0.4)] {
            let g = OpticalGeometry::new(z1, z2).unwrap();
            let scale = mutual_coherence_kernel(0.0, 0.0, s, &g).norm();
            for (x1, x2) in [(0.0, 0.0), (1e-5, -2e-5), (-1e-4, 3e-5), (2e-4, 2e-4)] {
                let k = mutual_coherence_kernel(x1, x2, s, &g);
                let back = mutual_coherence_kernel(x2, x1, s, &g.swapped());
                assert!((k - back.conj()).norm() < 1e-12 * scale, "{z1} {z2} {x1} {x2}");
            }
        }
    }
}

#[test]
fn kernel_peaks_at_coincidence() {
    let source = Source::new(693e-9, SourceProfile::Gaussian { half_width: 3e-3 }, 1e-10).unwrap();
    let uniform = Source::uniform(693e-9, 6e-3, 1e-10).unwrap();
    for s in [&source, &uniform] {
        let g = OpticalGeometry::new(0.3, 0.3).unwrap();
        let kern = CoherenceKernel::new(s, &g);
        for x in [-1e-4, 0.0, 3e-4] {
            let at = kern.norm_sqr(x, x);
            for k in 1..200 {
                let d = k as f64 * 7.3e-7;
                assert!(kern.norm_sqr(x, x + d) <= at);
                assert!(kern.norm_sqr(x, x - d) <= at);
            }
        }
    }
}
