//! JSON and CSV encodings of a [`Report`].
//!
//! JSON carries everything, profiles included, and reads back losslessly.
//! CSV has one row per check; profile tables go to a sidecar file
//! `<stem>.profiles.csv`.

use crate::config::Format;
use crate::CliError;
use cvlab::Report;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: [&str; 12] =
    ["suite", "name", "inputs", "measured", "reference", "abs_dev", "rel_dev", "tol", "pass", "diagnostic", "fd_self_error", "note"];

/// 17 significant digits; non-finite values are left empty.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}

pub fn read_json(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

pub fn render_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for c in &report.checks {
        let inputs: Vec<String> = c.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        w.write_record([
            report.suite.clone(),
            c.name.clone(),
            inputs.join(";"),
            num(c.measured),
            num(c.reference),
            num(c.abs_dev),
            num(c.rel_dev),
            num(c.tol),
            c.pass.to_string(),
            c.diagnostic.to_string(),
            c.fd_self_error.map(num).unwrap_or_default(),
            c.note.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// `check,t,value` rows of every profile in the report, or `None` when
/// there are none.
pub fn render_profiles_csv(report: &Report) -> Option<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "t", "value"]).expect("in-memory write");
    let mut any = false;
    for c in &report.checks {
        for &(t, v) in c.profile.iter().flatten() {
            any = true;
            w.write_record([c.name.clone(), num(t), num(v)]).expect("in-memory write");
        }
    }
    any.then(|| String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8"))
}

/// Path of the profile sidecar next to a CSV report.
pub fn profiles_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}.profiles.csv"))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Write the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => render_json(report),
        Format::Csv => render_csv(report),
    };
    match path {
        Some(p) => {
            write_file(p, &text)?;
            if format == Format::Csv {
                if let Some(profiles) = render_profiles_csv(report) {
                    write_file(&profiles_path(p), &profiles)?;
                }
            }
            Ok(())
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}
