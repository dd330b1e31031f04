//! Delimited text output: curve, trace, summary and comparison files.
//!
//! All files are comma-separated with a header row, LF line endings and a
//! leading `format_version` column. Floats are printed with Rust's
//! shortest round-trip formatting, so re-parsing a file reproduces every
//! value bit-for-bit and byte-level determinism checks are meaningful.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use flexion::beam::{DeflectionCurve, TipState};
use flexion::oracle::OracleError;

pub const FORMAT_VERSION: u32 = 1;

fn push_f64(line: &mut String, value: f64) {
    // Shortest round-trip representation; never contains a comma.
    write!(line, "{value}").unwrap();
}

/// Curve file: `format_version,unit_index,arc_length_s,x,y,theta`.
pub fn curve_file(curve: &DeflectionCurve) -> String {
    let mut text = String::from("format_version,unit_index,arc_length_s,x,y,theta\n");
    for (index, point) in curve.points().iter().enumerate() {
        write!(text, "{FORMAT_VERSION},{index},").unwrap();
        push_f64(&mut text, index as f64 * curve.unit_length());
        text.push(',');
        push_f64(&mut text, point.x);
        text.push(',');
        push_f64(&mut text, point.y);
        text.push(',');
        push_f64(&mut text, point.slope);
        text.push('\n');
    }
    text
}

/// Trace file: `format_version,iteration,gbest_fitness`, iterations 1-based.
pub fn trace_file(trace: &[f64]) -> String {
    let mut text = String::from("format_version,iteration,gbest_fitness\n");
    for (index, fitness) in trace.iter().enumerate() {
        write!(text, "{FORMAT_VERSION},{},", index + 1).unwrap();
        push_f64(&mut text, *fitness);
        text.push('\n');
    }
    text
}

/// Oracle outcome for one summary row.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleColumns {
    /// Oracle skipped; columns stay empty.
    Disabled,
    /// Oracle failed; columns carry NaN and the row counts as a failure.
    Failed(String),
    /// Oracle tip plus the normalized PSO-vs-oracle tip distance.
    Solved { tip: TipState, error_vs_pso: f64 },
}

impl From<&Result<TipState, OracleError>> for OracleColumns {
    fn from(value: &Result<TipState, OracleError>) -> Self {
        match value {
            Ok(tip) => OracleColumns::Solved {
                tip: *tip,
                error_vs_pso: f64::NAN,
            },
            Err(e) => OracleColumns::Failed(e.to_string()),
        }
    }
}

/// One line of the tip-locus summary, all values SI.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub case_id: String,
    pub force: f64,
    pub angle: f64,
    pub moment: f64,
    pub tip: TipState,
    pub fitness: f64,
    pub iterations: usize,
    pub converged: bool,
    pub oracle: OracleColumns,
    /// Beam length, carried so downstream comparisons can normalize.
    pub length: f64,
}

pub const SUMMARY_HEADER: &str = "format_version,case_id,F0,phi,M0,Qx,Qy,theta0,fitness,\
iterations,converged,oracle_Qx,oracle_Qy,oracle_theta0,pso_vs_oracle_error,length";

/// Summary file over all cases, one row per case in input order.
pub fn summary_file(rows: &[SummaryRow]) -> String {
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for row in rows {
        write!(text, "{FORMAT_VERSION},{},", row.case_id).unwrap();
        for value in [row.force, row.angle, row.moment, row.tip.x, row.tip.y, row.tip.slope] {
            push_f64(&mut text, value);
            text.push(',');
        }
        push_f64(&mut text, row.fitness);
        write!(text, ",{},{},", row.iterations, row.converged).unwrap();
        match &row.oracle {
            OracleColumns::Disabled => text.push_str(",,,"),
            OracleColumns::Failed(_) => text.push_str("NaN,NaN,NaN,NaN"),
            OracleColumns::Solved { tip, error_vs_pso } => {
                push_f64(&mut text, tip.x);
                text.push(',');
                push_f64(&mut text, tip.y);
                text.push(',');
                push_f64(&mut text, tip.slope);
                text.push(',');
                push_f64(&mut text, *error_vs_pso);
            }
        }
        text.push(',');
        push_f64(&mut text, row.length);
        text.push('\n');
    }
    text
}

/// One line of the oracle-only summary, all values SI.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub case_id: String,
    pub force: f64,
    pub angle: f64,
    pub moment: f64,
    /// Solved tip with its merit, or the failure message.
    pub outcome: Result<(TipState, f64), String>,
}

/// Oracle-only summary: `format_version,case_id,F0,phi,M0,Qx,Qy,theta0,merit,converged`.
pub fn oracle_summary_file(rows: &[OracleRow]) -> String {
    let mut text =
        String::from("format_version,case_id,F0,phi,M0,Qx,Qy,theta0,merit,converged\n");
    for row in rows {
        write!(text, "{FORMAT_VERSION},{},", row.case_id).unwrap();
        for value in [row.force, row.angle, row.moment] {
            push_f64(&mut text, value);
            text.push(',');
        }
        match &row.outcome {
            Ok((tip, merit)) => {
                for value in [tip.x, tip.y, tip.slope, *merit] {
                    push_f64(&mut text, value);
                    text.push(',');
                }
                text.push_str("true");
            }
            Err(_) => text.push_str("NaN,NaN,NaN,NaN,false"),
        }
        text.push('\n');
    }
    text
}

/// A parsed delimited file: header names plus rows of fields.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .with_context(|| format!("missing column `{name}`"))
    }

    pub fn f64_at(&self, row: &[String], column: usize) -> Result<f64> {
        row[column]
            .parse::<f64>()
            .with_context(|| format!("cannot parse `{}` as a number", row[column]))
    }
}

/// Reads a comma-separated file with a header row.
pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .with_context(|| format!("{} is empty", path.display()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (number, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != columns.len() {
            bail!(
                "{} line {}: expected {} fields, found {}",
                path.display(),
                number + 2,
                columns.len(),
                fields.len()
            );
        }
        rows.push(fields);
    }
    Ok(Table { columns, rows })
}

/// Writes a file atomically enough for our purposes and with LF endings
/// guaranteed by construction.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
