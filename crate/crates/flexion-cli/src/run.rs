//! Batch orchestration behind the CLI subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use flexion::beam::{generate_random_widths, integrate_deflection, TipState};
use flexion::oracle::{self, OracleParams};
use flexion::solver::{self, SolveResult};

use crate::config::RunConfig;
use crate::output::{self, OracleColumns, SummaryRow, FORMAT_VERSION};

/// Exit code when every case converged and every oracle solve succeeded.
pub const EXIT_OK: i32 = 0;
/// Exit code when results were written but some case did not converge or
/// an oracle solve failed.
pub const EXIT_UNCONVERGED: i32 = 2;

fn ensure_writable_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let probe = dir.join(".write_probe");
    std::fs::write(&probe, b"probe")
        .with_context(|| format!("output directory {} is not writable", dir.display()))?;
    std::fs::remove_file(&probe).ok();
    Ok(())
}

fn in_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .context("cannot build worker pool")?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Stream tag for retry seeds, distinct from anything the library uses.
const RETRY_STREAM: u64 = 0x0052_4554_5259;

/// Re-solves non-converged cases with fresh derived seeds.
///
/// Round `r` solves case `i` with `derive(master, RETRY_STREAM + r, i)`
/// a retry replaces the original only when it improves the fitness, so
/// the output stays deterministic and never gets worse.
fn retry_unconverged(
    config: &RunConfig,
    loads: &[flexion::beam::TipLoad],
    results: &mut [SolveResult],
) -> Result<()> {
    for round in 1..=config.retries as u64 {
        let pending: Vec<usize> = results
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.converged)
            .map(|(i, _)| i)
            .collect();
        if pending.is_empty() {
            return Ok(());
        }
        let reruns: Vec<(usize, SolveResult)> = in_pool(config.jobs, || {
            pending
                .par_iter()
                .map(|&index| {
                    let mut params = config.pso.clone();
                    params.seed =
                        flexion::seed::derive(config.pso.seed, RETRY_STREAM.wrapping_add(round), index as u64);
                    solver::solve_tip_locus(&config.geometry, loads[index], &params)
                        .map(|result| (index, result))
                })
                .collect::<Result<_, _>>()
        })??;
        for (index, rerun) in reruns {
            if rerun.fitness < results[index].fitness {
                results[index] = rerun;
            }
        }
    }
    Ok(())
}

/// Runs every load case with the swarm, cross-checks against the oracle
/// unless disabled, and writes curves, traces and the summary.
///
/// Returns [`EXIT_OK`] when all cases converged (and the oracle agreed to
/// run everywhere it was asked); [`EXIT_UNCONVERGED`] otherwise. Files are
/// written either way.
pub fn run_solve(config: &RunConfig) -> Result<i32> {
    ensure_writable_dir(&config.out_dir)?;

    let loads: Vec<_> = config.cases.iter().map(|c| c.load).collect();
    let mut results: Vec<SolveResult> =
        in_pool(config.jobs, || solver::sweep_loads(&config.geometry, &loads, &config.pso))??;
    retry_unconverged(config, &loads, &mut results)?;
    let results = results;

    let oracle_results: Vec<Option<Result<TipState, oracle::OracleError>>> =
        if config.oracle_enabled {
            let params = OracleParams::default();
            in_pool(config.jobs, || {
                loads
                    .par_iter()
                    .map(|&load| Some(oracle::solve(&config.geometry, load, &params)))
                    .collect()
            })?
        } else {
            vec![None; loads.len()]
        };

    let mut rows = Vec::with_capacity(config.cases.len());
    for ((case, result), oracle_result) in
        config.cases.iter().zip(&results).zip(&oracle_results)
    {
        let oracle_columns = match oracle_result {
            None => OracleColumns::Disabled,
            Some(Err(e)) => OracleColumns::Failed(e.to_string()),
            Some(Ok(tip)) => OracleColumns::Solved {
                tip: *tip,
                error_vs_pso: solver::normalized_tip_error(
                    result.tip,
                    (tip.x, tip.y),
                    config.geometry.length(),
                ),
            },
        };
        rows.push(SummaryRow {
            case_id: case.id.clone(),
            force: case.load.force(),
            angle: case.load.angle(),
            moment: case.load.moment(),
            tip: result.tip,
            fitness: result.fitness,
            iterations: result.iterations,
            converged: result.converged,
            oracle: oracle_columns,
            length: config.geometry.length(),
        });

        output::write_text(
            &config.out_dir.join(format!("{}_curve.csv", case.id)),
            &output::curve_file(&result.curve),
        )?;
        output::write_text(
            &config.out_dir.join(format!("{}_trace.csv", case.id)),
            &output::trace_file(&result.trace),
        )?;
    }
    output::write_text(
        &config.out_dir.join("summary.csv"),
        &output::summary_file(&rows),
    )?;

    let all_converged = results.iter().all(|r| r.converged);
    let oracle_ok = oracle_results
        .iter()
        .all(|r| !matches!(r, Some(Err(_))));
    for (case, result) in config.cases.iter().zip(&results) {
        if !result.converged {
            eprintln!(
                "case {}: not converged after {} iterations (fitness {:.3e})",
                case.id, result.iterations, result.fitness
            );
        }
    }
    Ok(if all_converged && oracle_ok {
        EXIT_OK
    } else {
        EXIT_UNCONVERGED
    })
}

/// Runs the Newton shooting oracle alone and writes its summary and
/// per-case curves.
pub fn run_oracle(config: &RunConfig) -> Result<i32> {
    ensure_writable_dir(&config.out_dir)?;
    let params = OracleParams::default();

    let outcomes: Vec<Result<TipState, oracle::OracleError>> = in_pool(config.jobs, || {
        config
            .cases
            .par_iter()
            .map(|case| oracle::solve(&config.geometry, case.load, &params))
            .collect()
    })?;

    let mut rows = Vec::with_capacity(config.cases.len());
    for (case, outcome) in config.cases.iter().zip(&outcomes) {
        let row_outcome = match outcome {
            Ok(tip) => {
                let curve = integrate_deflection(&config.geometry, case.load, *tip);
                output::write_text(
                    &config.out_dir.join(format!("{}_oracle_curve.csv", case.id)),
                    &output::curve_file(&curve),
                )?;
                Ok((*tip, oracle::merit(&config.geometry, case.load, *tip)))
            }
            Err(e) => {
                eprintln!("case {}: oracle failed: {e}", case.id);
                Err(e.to_string())
            }
        };
        rows.push(output::OracleRow {
            case_id: case.id.clone(),
            force: case.load.force(),
            angle: case.load.angle(),
            moment: case.load.moment(),
            outcome: row_outcome,
        });
    }
    output::write_text(
        &config.out_dir.join("oracle_summary.csv"),
        &output::oracle_summary_file(&rows),
    )?;

    Ok(if outcomes.iter().all(|o| o.is_ok()) {
        EXIT_OK
    } else {
        EXIT_UNCONVERGED
    })
}

/// Joins a solve summary with measured tip coordinates and writes the
/// per-case normalized errors plus their maximum.
///
/// The measured file needs `case_id`, `Qxm` and `Qym` columns in SI
/// metres. Unmatched ids on either side land in a skipped-rows section
/// and make the exit status nonzero.
pub fn run_compare(summary_path: &Path, measured_path: &Path, out_path: &Path) -> Result<i32> {
    let summary = output::read_table(summary_path)?;
    let s_id = summary.column("case_id")?;
    let s_qx = summary.column("Qx")?;
    let s_qy = summary.column("Qy")?;
    let s_len = summary.column("length")?;

    let measured = output::read_table(measured_path)?;
    let m_id = measured.column("case_id")?;
    let m_qx = measured.column("Qxm")?;
    let m_qy = measured.column("Qym")?;
    if measured.rows.is_empty() {
        bail!("measured file {} has no data rows", measured_path.display());
    }

    let mut text =
        String::from("format_version,case_id,status,Qx,Qy,Qxm,Qym,e_norm\n");
    let mut max_error: Option<f64> = None;
    let mut skipped = Vec::new();
    let mut matched_measured = vec![false; measured.rows.len()];

    let mut matched_lines = Vec::new();
    for row in &summary.rows {
        let id = &row[s_id];
        let qx = summary.f64_at(row, s_qx)?;
        let qy = summary.f64_at(row, s_qy)?;
        let length = summary.f64_at(row, s_len)?;
        let hit = measured.rows.iter().position(|m| &m[m_id] == id);
        match hit {
            Some(index) => {
                matched_measured[index] = true;
                let qxm = measured.f64_at(&measured.rows[index], m_qx)?;
                let qym = measured.f64_at(&measured.rows[index], m_qy)?;
                let e_norm = ((qx - qxm).powi(2) + (qy - qym).powi(2)).sqrt() / length;
                matched_lines.push((id.clone(), qx, qy, qxm, qym, e_norm));
            }
            None => skipped.push(format!(
                "{FORMAT_VERSION},{id},no_measurement,{qx},{qy},,,\n"
            )),
        }
    }

    for (index, row) in measured.rows.iter().enumerate() {
        if !matched_measured[index] {
            skipped.push(format!(
                "{FORMAT_VERSION},{},no_prediction,,,,,\n",
                row[m_id]
            ));
        }
    }

    for (id, qx, qy, qxm, qym, e_norm) in &matched_lines {
        max_error = Some(max_error.map_or(*e_norm, |m: f64| m.max(*e_norm)));
        text.push_str(&format!(
            "{FORMAT_VERSION},{id},ok,{qx},{qy},{qxm},{qym},{e_norm}\n"
        ));
    }
    if let Some(max_error) = max_error {
        text.push_str(&format!("{FORMAT_VERSION},,max,,,,,{max_error}\n"));
    }
    for line in &skipped {
        text.push_str(line);
    }

    output::write_text(out_path, &text)?;
    Ok(if skipped.is_empty() {
        EXIT_OK
    } else {
        EXIT_UNCONVERGED
    })
}

/// Prints random width knots as CSV to stdout; millimetres unless `si`.
pub fn run_gen_widths(lower: f64, upper: f64, knots: usize, seed: u64, si: bool) -> Result<i32> {
    use std::io::Write;

    // CLI bounds arrive in the same unit they are printed in.
    let scale = if si { 1.0 } else { 1e-3 };
    let generated = generate_random_widths(lower * scale, upper * scale, knots, seed)?;
    let unit = if si { "width_m" } else { "width_mm" };
    let mut text = format!("format_version,knot_index,{unit}\n");
    for (index, width) in generated.widths().iter().enumerate() {
        text.push_str(&format!("{FORMAT_VERSION},{index},{}\n", width / scale));
    }
    // A closed pipe (e.g. piping into `head`) is a normal way to consume
    // this output, not an error.
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(EXIT_OK),
        other => {
            other.context("cannot write to stdout")?;
            Ok(EXIT_OK)
        }
    }
}

/// Applies command-line overrides on top of a parsed config.
pub fn apply_overrides(
    config: &mut RunConfig,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
    no_oracle: bool,
    retries: Option<usize>,
) {
    if let Some(seed) = seed {
        config.pso.seed = seed;
    }
    if let Some(out_dir) = out_dir {
        config.out_dir = out_dir;
    }
    if let Some(jobs) = jobs {
        config.jobs = Some(jobs);
    }
    if no_oracle {
        config.oracle_enabled = false;
    }
    if let Some(retries) = retries {
        config.retries = retries;
    }
}
