use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ghostsim::error::EXIT_CONFIG;
use ghostsim::scenario::Method;
use ghostsim::{export_results, parse_scenario, presets, run_scenario, Overrides, RunError, ScenarioConfig};

const DEFAULT_OUT: &str = "ghostsim-out";
const PRESET_PREFIX: &str = "preset:";

#[derive(Parser)]
#[command(name = "ghostsim", version, about = "Thermal-light ghost imaging and HBT simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or `preset:<name>`) and write its outputs.
    Run {
        scenario: String,
        /// Master seed, overriding the file.
        #[arg(long)]
        seed: Option<u64>,
        /// mc, analytic or both, overriding the file.
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long, env = "GHOSTSIM_THREADS")]
        threads: Option<usize>,
    },
    /// List or print the bundled scenarios.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Parse a scenario and print its normalized form.
    Validate { scenario: String },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print the normalized scenario of a preset.
    Dump {
        name: String,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_word(s).ok_or_else(|| format!("`{s}` is not one of mc, analytic, both"))
}

fn load(spec: &str) -> Result<ScenarioConfig, RunError> {
    let text = match spec.strip_prefix(PRESET_PREFIX) {
        Some(name) => presets::find(name)
            .ok_or_else(|| RunError::io(spec, std::io::Error::new(std::io::ErrorKind::NotFound, "no such preset")))?
            .text
            .to_owned(),
        None => fs::read_to_string(spec).map_err(|e| RunError::io(spec, e))?,
    };
    parse_scenario(&text).map_err(RunError::Config)
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|e| RunError::io(path, e))
}

fn run(spec: &str, overrides: Overrides, out: Option<PathBuf>, threads: Option<usize>) -> Result<(), RunError> {
    let mut cfg = load(spec)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build().map_err(|e| {
        RunError::Config(ghostsim::ConfigError { line: None, key: Some("--threads".into()), message: e.to_string() })
    })?;
    let workers = pool.current_num_threads();
    let result = pool.install(|| run_scenario(&cfg))?;

    let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let written = export_results(&result, &dir, cfg.output.svg)?;
    write_text(&dir.join("scenario.txt"), &cfg.dump())?;
    let timing = serde_json::json!({ "runtime_seconds": result.report.runtime_seconds, "threads": workers });
    write_text(&dir.join("timing.json"), &format!("{timing:#}\n"))?;

    let r = &result.report;
    println!("{} ({}) in {:.2} s on {workers} threads", r.kind.name(), r.method.name(), r.runtime_seconds);
    if let Some(p) = &r.profile {
        match p.peak_separation {
            Some(s) => println!("peaks: {}, separation {s:.6e} m", p.peak_positions.len()),
            None => println!("peaks: {}", p.peak_positions.len()),
        }
        if let Some(v) = p.visibility {
            println!("visibility: {v:.6}");
        }
    }
    if let Some(c) = &r.comparison {
        println!("within 3 std_err: {:.1}% of {} samples", 100.0 * c.fraction_within_3se, c.n_points);
    }
    if let Some(h) = &r.hbt {
        println!("g2(0) = {:.4} +/- {:.4}", h.g2_zero, h.g2_zero_std_err);
        match (h.tau0_estimate, &h.not_measurable) {
            (Some(t), _) => println!("tau0 estimate: {t:.4e} s"),
            (None, Some(why)) => println!("tau0: not measurable ({why})"),
            _ => {}
        }
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, seed, method, out, threads } => {
            run(&scenario, Overrides { seed, method }, out, threads)
        }
        Command::Presets { action: PresetAction::List } => {
            for p in presets::PRESETS {
                println!("{:<6} {}", p.name, p.summary);
            }
            Ok(())
        }
        Command::Presets { action: PresetAction::Dump { name } } => match presets::load(&name) {
            Some(Ok(cfg)) => {
                print!("{}", cfg.dump());
                Ok(())
            }
            Some(Err(e)) => Err(RunError::Config(e)),
            None => {
                let names: Vec<&str> = presets::PRESETS.iter().map(|p| p.name).collect();
                eprintln!("error: unknown preset `{name}` (available: {})", names.join(", "));
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        },
        Command::Validate { scenario } => load(&scenario).map(|cfg| print!("{}", cfg.dump())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
