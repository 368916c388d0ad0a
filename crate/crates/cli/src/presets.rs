//! Scenario files bundled with the binary.

use crate::scenario::{parse_scenario, ConfigError, ScenarioConfig};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2",
        summary: "two-pinhole focused image, z1 = z2 = 1.7 m, 1.8 mm aperture, 0.25 mm scan",
        text: include_str!("../presets/fig2.scenario"),
    },
    Preset {
        name: "fig3",
        summary: "double-slit z2 sweep over 200-400 mm around z1 = 300 mm",
        text: include_str!("../presets/fig3.scenario"),
    },
    Preset {
        name: "hbt",
        summary: "start-stop coincidences of a thermal source, coherence time 0.1 ns",
        text: include_str!("../presets/hbt.scenario"),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Parsed preset, or `None` for an unknown name.
pub fn load(name: &str) -> Option<Result<ScenarioConfig, ConfigError>> {
    find(name).map(|p| parse_scenario(p.text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_round_trips() {
        for p in PRESETS {
            let cfg = parse_scenario(p.text).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(parse_scenario(&cfg.dump()).unwrap(), cfg, "{}", p.name);
        }
        assert!(load("nope").is_none());
    }
}
