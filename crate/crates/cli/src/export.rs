//! Output files: CSV tables, `metrics.json` and an optional SVG plot.
//!
//! CSV: header row, comma separator, LF line endings, floats in
//! `{:.16e}` (17 significant digits, exact round trip), RFC 4180 quoting
//! for fields that need it.

use std::fs;
use std::path::{Path, PathBuf};

use ghostsim_core::Correlation;

use crate::error::RunError;
use crate::report::MetricsReport;
use crate::runner::{HbtResult, RunOutput, SweepMatrix};
use crate::svg::{line_plot, Series};

pub const PROFILE_HEADER: [&str; 3] = ["x2_m", "delta_g2", "std_err"];
pub const SWEEP_HEADER: [&str; 3] = ["z2_m", "x2_m", "delta_g2"];
pub const HISTOGRAM_HEADER: [&str; 5] = ["tau_s", "counts", "g2", "std_err", "bin_width_s"];

/// A float with 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// RFC 4180 field quoting.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = header.iter().map(|h| field(h)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|f| field(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn profile_csv(p: &Correlation) -> String {
    table(&PROFILE_HEADER, (0..p.len()).map(|i| vec![float(p.x2[i]), float(p.delta_g2[i]), float(p.std_err[i])]))
}

pub fn sweep_csv(m: &SweepMatrix) -> String {
    table(
        &SWEEP_HEADER,
        m.z2.iter().zip(&m.rows).flat_map(|(z, row)| {
            row.x2.iter().zip(&row.delta_g2).map(move |(x, v)| vec![float(*z), float(*x), float(*v)])
        }),
    )
}

pub fn histogram_csv(h: &HbtResult) -> String {
    let hist = &h.histogram;
    table(
        &HISTOGRAM_HEADER,
        (0..hist.len()).map(|k| {
            vec![
                float(hist.bin_centers[k]),
                hist.counts[k].to_string(),
                float(h.estimate.g2[k]),
                float(h.estimate.std_err[k]),
                float(hist.bin_width),
            ]
        }),
    )
}

pub fn metrics_json(report: &MetricsReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn plot(out: &RunOutput) -> Option<String> {
    if let Some(h) = &out.hbt {
        let s = [Series { label: "g2", x: &h.estimate.times, y: &h.estimate.g2 }];
        return Some(line_plot(&s, "delay (s)", "g2"));
    }
    let p = out.profile.as_ref()?;
    let mut series = vec![Series { label: "primary", x: &p.x2, y: &p.delta_g2 }];
    if let Some(a) = &out.analytic {
        series.push(Series { label: "analytic", x: &a.x2, y: &a.delta_g2 });
    }
    Some(line_plot(&series, "x2 (m)", "delta g2"))
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| RunError::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes every output of `out` into `dir` (created if needed) and returns
/// the paths written. A run without profiles writes `metrics.json` only.
pub fn export_results(out: &RunOutput, dir: &Path, svg: bool) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut written = Vec::new();
    if let Some(p) = &out.profile {
        write(dir, "profile.csv", &profile_csv(p), &mut written)?;
    }
    if let Some(p) = &out.analytic {
        write(dir, "profile_analytic.csv", &profile_csv(p), &mut written)?;
    }
    if let Some(p) = &out.difference {
        write(dir, "difference.csv", &profile_csv(p), &mut written)?;
    }
    if let Some(m) = &out.sweep {
        write(dir, "sweep.csv", &sweep_csv(m), &mut written)?;
    }
    if let Some(m) = &out.analytic_sweep {
        write(dir, "sweep_analytic.csv", &sweep_csv(m), &mut written)?;
    }
    if let Some(h) = &out.hbt {
        write(dir, "histogram.csv", &histogram_csv(h), &mut written)?;
    }
    write(dir, "metrics.json", &metrics_json(&out.report), &mut written)?;
    if svg {
        if let Some(doc) = plot(out) {
            write(dir, "profile.svg", &doc, &mut written)?;
        }
    }
    Ok(written)
}
