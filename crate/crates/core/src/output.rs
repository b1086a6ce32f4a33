//! CSV and manifest writers.
//!
//! Each method gets `<method>.csv` with columns
//! `tau,mean_x,mean_p,var_x,var_p,cov_xp` in units of `X₀`, `P₀`, `X₀²`,
//! `P₀²` and `X₀P₀`; the last column holds `⟨XP + PX⟩/(X₀P₀)`. Values use 12
//! significant digits in scientific notation. `manifest.txt` is a flat
//! `key = value` file whose `scenario.*` entries reproduce the scenario.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::nondimensionalize;
use crate::run::{RunManifest, RunOutput, TimeSeries};
use crate::scenario::{parse_scenario, Scenario};

pub const CSV_HEADER: &str = "tau,mean_x,mean_p,var_x,var_p,cov_xp";
pub const MANIFEST_FILE: &str = "manifest.txt";

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_owned(), source }
}

/// CSV text of one series.
pub fn csv_document(series: &TimeSeries, scenario: &Scenario) -> String {
    let mut out = String::with_capacity(80 * (series.taus.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (tau, m) in series.taus.iter().zip(&series.moments) {
        let r = nondimensionalize(&scenario.params, m);
        let row = [*tau, r.mean_x, r.mean_p, r.var_x(), r.var_p(), r.mean_xp_sym];
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.11e}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Flat `key = value` rendering of the manifest.
pub fn manifest_document(m: &RunManifest) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        writeln!(out, "{k} = {v}").expect("writing to a String cannot fail");
    };
    line("tool.name", env!("CARGO_PKG_NAME").to_string());
    line("tool.version", m.version.to_string());
    for (k, v) in m.scenario.entries() {
        line(&format!("scenario.{k}"), v);
    }
    for s in &m.methods {
        line(&format!("timing.{}.seconds", s.method), format!("{:.6}", s.elapsed_seconds));
        if let Some(e) = s.max_est_error {
            line(&format!("quadrature.{}.max_est_error", s.method), format!("{e:.3e}"));
        }
    }
    line(
        "diagnostics.breakup_mass",
        m.breakup_mass.map_or_else(|| "n/a".to_string(), |b| format!("{b:.6e}")),
    );
    for c in &m.cross_checks {
        let prefix = format!("cross_check.{}.{}", c.first, c.second);
        line(&format!("{prefix}.max_mean_deviation"), format!("{:.6e}", c.max_mean_deviation));
        line(&format!("{prefix}.mean_threshold"), format!("{:.6e}", c.mean_threshold));
        line(&format!("{prefix}.max_second_moment_deviation"), format!("{:.6e}", c.max_second_moment_deviation));
        line(&format!("{prefix}.second_moment_threshold"), format!("{:.6e}", c.second_moment_threshold));
        line(&format!("{prefix}.status"), if c.exceeded() { "exceeded" } else { "ok" }.to_string());
    }
    for (i, w) in m.warnings.iter().enumerate() {
        line(&format!("warning.{i}"), w.clone());
    }
    out
}

/// Recovers the scenario echoed in a manifest.
pub fn scenario_from_manifest(text: &str) -> Result<Scenario> {
    let doc: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("scenario."))
        .map(|l| format!("{l}\n"))
        .collect();
    parse_scenario(&doc)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let file = fs::File::create(path).map_err(io_error(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(contents.as_bytes()).map_err(io_error(path))?;
    w.flush().map_err(io_error(path))
}

/// Writes one CSV per method and the manifest into `out_dir`, creating it if
/// needed. Returns the written paths in order.
pub fn write_outputs(output: &RunOutput, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let mut written = Vec::new();
    for series in &output.series {
        let path = out_dir.join(format!("{}.csv", series.method));
        write_file(&path, &csv_document(series, &output.manifest.scenario))?;
        written.push(path);
    }
    let path = out_dir.join(MANIFEST_FILE);
    write_file(&path, &manifest_document(&output.manifest))?;
    written.push(path);
    Ok(written)
}
