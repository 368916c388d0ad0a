use ghostsim::scenario::{MaskSpec, Method, ScenarioKind};
use ghostsim::units::{format_quantity, parse_quantity, Dimension};
use ghostsim::{parse_scenario, presets};
use proptest::prelude::*;

fn focused(extra: &str) -> String {
    format!(
        "kind = focused_image
source.wavelength = 500 nm
source.half_width = 1 mm
geometry.z1 = 1 m
mask.kind = slit
mask.width = 50 um
{extra}"
    )
}

#[test]
fn unit_suffixes_and_comments() {
    let text = focused("# comment\n  ensemble.detector_aperture = 0.5mm   \n\nmethod = mc\n");
    let cfg = parse_scenario(&text).unwrap();
    let im = cfg.imaging.as_ref().unwrap();
    assert_eq!(im.source.wavelength, 5e-7);
    assert_eq!(im.ensemble.detector_aperture, 5e-4);
    assert_eq!(im.z2, Some(1.0));
    assert_eq!(cfg.method, Method::Montecarlo);
    assert_eq!(im.mask, MaskSpec::Slit { width: 5e-5, center: 0.0 });
}

#[test]
fn diagnostics_name_line_and_key() {
    let cases = [
        ("geometry.z1 = 1 s\n", "geometry.z1"),
        ("ensemble.n_realizations = 0\n", "ensemble.n_realizations"),
        ("mask.width = 60 um\n", "mask.width"),
        ("hbt.runs = 3\n", "hbt.runs"),
        ("grid.detector_points = 1\n", "grid.detector_points"),
        ("just some words\n", "line 7"),
    ];
    for (extra, needle) in cases {
        let err = parse_scenario(&focused(extra)).unwrap_err().to_string();
        assert!(err.contains(needle), "{extra:?}: {err}");
        assert!(err.contains("line 7"), "{extra:?}: {err}");
    }
    let missing = parse_scenario("kind = focused_image\n").unwrap_err().to_string();
    assert!(missing.contains("source.wavelength"), "{missing}");
}

#[test]
fn sweep_and_z2_are_exclusive() {
    let text = focused("sweep.z2_min = 0.5 m\nsweep.z2_max = 1.5 m\nsweep.z2_steps = 3\n");
    assert!(parse_scenario(&text).is_err());
    let ok = parse_scenario(&text.replace("focused_image", "z2_sweep")).unwrap();
    assert_eq!(ok.kind, ScenarioKind::Z2Sweep);
    assert_eq!(ok.imaging.unwrap().sweep.unwrap().values(), [0.5, 1.0, 1.5]);
}

#[test]
fn presets_dump_to_a_fixed_point() {
    for p in presets::PRESETS {
        let cfg = presets::load(p.name).unwrap().unwrap();
        let again = parse_scenario(&cfg.dump()).unwrap();
        assert_eq!(again, cfg, "{}", p.name);
        assert_eq!(again.dump(), cfg.dump());
    }
}

proptest! {
    #[test]
    fn quantities_round_trip(v in -1e3f64..1e3, dim in prop::sample::select(vec![Dimension::Length, Dimension::Time, Dimension::Rate])) {
        let text = format_quantity(v, dim);
        prop_assert_eq!(parse_quantity(&text, dim).unwrap(), v);
    }

    #[test]
    fn millimetres_match_the_decimal_literal(int in 0u32..100_000, frac in 0u32..1000) {
        let literal = format!("{int}.{frac:03}");
        let parsed = parse_quantity(&format!("{literal} mm"), Dimension::Length).unwrap();
        let exact: f64 = format!("{literal}e-3").parse().unwrap();
        prop_assert_eq!(parsed, exact);
    }

    #[test]
    fn dump_parse_is_identity(
        wavelength in 300e-9f64..1.5e-6,
        half_width in 1e-4f64..1e-2,
        z1 in 0.05f64..3.0,
        width in 1e-5f64..1e-3,
        n in 2usize..100_000,
        seed in any::<u64>(),
    ) {
        let text = format!(
            "kind = focused_image\nseed = {seed}\nsource.wavelength = {wavelength:e} m\nsource.half_width = {half_width:e} m\n\
             geometry.z1 = {z1:e} m\nmask.kind = slit\nmask.width = {width:e} m\nensemble.n_realizations = {n}\n"
        );
        let cfg = parse_scenario(&text).unwrap();
        let im = cfg.imaging.as_ref().unwrap();
        prop_assert_eq!(im.source.wavelength, wavelength);
        prop_assert_eq!(im.z1, z1);
        prop_assert_eq!(&parse_scenario(&cfg.dump()).unwrap(), &cfg);
    }
}
