//! On-disk layout of a run: `summary.json`, `config.json`, one CSV per
//! statistic and the resumable `checkpoint.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::run::{RunConfig, StatsReport, SCHEMA_VERSION};

pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

pub fn checkpoint_path(dir: &Path) -> PathBuf {
    dir.join(CHECKPOINT_FILE)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_config(dir: &Path, config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(
        &dir.join(CONFIG_FILE),
        &Versioned {
            schema_version: SCHEMA_VERSION,
            body: config,
        },
    )
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# polylcm-csv v{SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(csv_error)?;
    Ok(w)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes the summary and every per-statistic CSV into `dir`.
pub fn write_report(dir: &Path, report: &StatsReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join(SUMMARY_FILE), report)?;

    let mut w = csv_writer(&dir.join("lcm.csv"), &["n", "ln_lcm", "cilleruelo_ratio"])?;
    for s in &report.checkpoints {
        w.write_record([s.n.to_string(), s.ln_lcm.to_string(), s.cilleruelo_ratio.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("checks.csv"), &["name", "measured", "threshold", "hard", "pass"])?;
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            c.measured.to_string(),
            c.threshold.clone(),
            c.hard.to_string(),
            c.pass.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;

    if report.checkpoints.iter().all(|s| s.window.is_none()) {
        return Ok(());
    }

    let mut dens = csv_writer(&dir.join("density.csv"), &["n", "count", "total", "fraction"])?;
    let mut exc = csv_writer(
        &dir.join("exceptional.csv"),
        &[
            "n",
            "window_start",
            "window_size",
            "exceptional",
            "fraction",
            "ln_q_direct",
            "ln_q_factored",
            "ln_alpha_bound",
            "log_ratio",
        ],
    )?;
    let mut mult = csv_writer(
        &dir.join("multiplicity.csv"),
        &["n", "members", "max_multiplicity", "argmax", "exact", "distinct_primes"],
    )?;
    let mut gran = csv_writer(
        &dir.join("granville.csv"),
        &["n", "delta", "definite", "indeterminate", "total", "fraction", "flagged"],
    )?;
    for s in &report.checkpoints {
        let Some(win) = &s.window else { continue };
        if let Some(d) = s.density {
            dens.write_record([
                s.n.to_string(),
                d.numerator.to_string(),
                d.denominator.to_string(),
                d.value.to_string(),
            ])
            .map_err(csv_error)?;
        }
        exc.write_record([
            s.n.to_string(),
            win.window_start.to_string(),
            win.window_size.to_string(),
            win.exceptional.to_string(),
            win.exceptional_fraction.value.to_string(),
            win.ln_q_direct.to_string(),
            win.ln_q_factored.to_string(),
            win.ln_alpha_bound.to_string(),
            opt(win.log_ratio),
        ])
        .map_err(csv_error)?;
        let m = &win.multiplicity;
        mult.write_record([
            s.n.to_string(),
            m.members.to_string(),
            m.max_multiplicity.to_string(),
            opt(m.argmax.clone()),
            m.exact.to_string(),
            m.distinct_primes.to_string(),
        ])
        .map_err(csv_error)?;
        for g in &win.granville {
            gran.write_record([
                s.n.to_string(),
                g.delta.to_string(),
                g.definite.numerator.to_string(),
                g.indeterminate.to_string(),
                g.total.to_string(),
                g.definite.value.to_string(),
                g.flagged.to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    dens.flush()?;
    exc.flush()?;
    mult.flush()?;
    gran.flush()?;

    let mut w = csv_writer(&dir.join("chebotarev.csv"), &["n", "sum", "deviation"])?;
    for c in &report.chebotarev {
        w.write_record([c.n.to_string(), c.sum.to_string(), c.deviation.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("psi.csv"), &["n", "ln_lcm", "psi", "ratio", "exact_match"])?;
    for p in &report.psi {
        w.write_record([
            p.n.to_string(),
            p.ln_lcm.to_string(),
            p.psi.to_string(),
            p.ratio.to_string(),
            p.exact_match.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;

    if let Some(a) = &report.alpha {
        let mut w = csv_writer(
            &dir.join("alpha.csv"),
            &["prime", "kind", "alpha", "rho", "main_term", "residual", "bound", "pass"],
        )?;
        for r in &a.rows {
            let kind = serde_json::to_value(r.kind)?;
            w.write_record([
                r.prime.to_string(),
                kind.as_str().unwrap_or_default().to_string(),
                r.alpha.to_string(),
                r.rho.to_string(),
                r.main_term.to_string(),
                r.residual.to_string(),
                r.bound.to_string(),
                r.pass.to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
    }
    Ok(())
}
