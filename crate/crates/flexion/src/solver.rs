//! Tip-locus solver: the swarm searches for the self-consistent tip state.
//!
//! A particle is the candidate tip state `[Qx, Qy, theta0]`. Its fitness
//! integrates the beam from the root using the candidate tip in the
//! moment arm and measures how far the integration lands from the
//! candidate itself: position error normalized by the beam length plus
//! slope error normalized by the `2*pi` search range. A fitness of zero
//! means the candidate reproduces itself exactly.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::beam::{integrate_deflection, integrate_tip, BeamGeometry, DeflectionCurve, TipLoad, TipState};
use crate::pso::{self, PsoError, PsoParams};
use crate::seed;

/// Stream tag separating per-load sweep seeds from everything else.
const LOAD_SWEEP_STREAM: u64 = 0x4c4f_4144;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("tip search space must have exactly 3 dimensions (got {0})")]
    SearchSpaceNotThreeDimensional(usize),
    #[error("load sweep needs at least one load case")]
    EmptyLoadSweep,
    #[error(transparent)]
    Pso(#[from] PsoError),
}

/// Everything one solve produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Best tip state found by the swarm.
    pub tip: TipState,
    /// Self-consistency fitness at `tip`.
    pub fitness: f64,
    /// Deflection curve re-integrated at `tip`.
    pub curve: DeflectionCurve,
    /// Iterations the swarm ran.
    pub iterations: usize,
    /// Swarm-best fitness per iteration; non-increasing.
    pub trace: Vec<f64>,
    /// Whether `fitness` reached the threshold. A non-converged result is
    /// still returned in full so callers can inspect or retry it.
    pub converged: bool,
}

/// Self-consistency error of a hypothesized tip state.
///
/// `sqrt((Qx - qx_nl)^2 + (Qy - qy_nl)^2) / l + |theta0 - theta_nl| / 2pi`
/// where `(qx_nl, qy_nl, theta_nl)` is the tip reached by integrating the
/// beam with `guess` in the moment arm. Non-negative, and zero exactly at
/// the self-consistent tip.
pub fn fitness(geometry: &BeamGeometry, load: TipLoad, guess: TipState) -> f64 {
    let reached = integrate_tip(geometry, load, guess);
    let dx = guess.x - reached.x;
    let dy = guess.y - reached.y;
    (dx * dx + dy * dy).sqrt() / geometry.length() + (guess.slope - reached.slope).abs() / TAU
}

/// Default search box and tuning for a given beam: `Qx, Qy` in
/// `[-l, l]`, `theta0` in `[-pi, pi]`, swarm defaults from
/// [`PsoParams::new`].
pub fn default_params(geometry: &BeamGeometry, seed_value: u64) -> PsoParams {
    let l = geometry.length();
    PsoParams::new(vec![(-l, l), (-l, l), (-PI, PI)], seed_value)
}

/// Runs the swarm over the tip search space and re-integrates the curve
/// at the best tip found.
///
/// Deterministic per `(params, seed)`. Non-convergence is reported via
/// [`SolveResult::converged`], never silently accepted.
pub fn solve_tip_locus(
    geometry: &BeamGeometry,
    load: TipLoad,
    params: &PsoParams,
) -> Result<SolveResult, SolverError> {
    if params.dims() != 3 {
        return Err(SolverError::SearchSpaceNotThreeDimensional(params.dims()));
    }
    let objective = |x: &[f64]| fitness(geometry, load, TipState::new(x[0], x[1], x[2]));
    let result = pso::run(objective, params)?;
    let tip = TipState::new(
        result.best_position[0],
        result.best_position[1],
        result.best_position[2],
    );
    Ok(SolveResult {
        tip,
        fitness: result.best_fitness,
        curve: integrate_deflection(geometry, load, tip),
        iterations: result.iterations,
        trace: result.trace,
        converged: result.converged,
    })
}

/// Solves a list of load cases, one result per load in order.
///
/// Case `i` runs with the seed `derive(master, LOAD_SWEEP_STREAM, i)`, so
/// the sweep is reproducible as a whole and each case is reproducible in
/// isolation. Cases run in parallel; per-case non-convergence is carried
/// in the results and never aborts the sweep.
pub fn sweep_loads(
    geometry: &BeamGeometry,
    loads: &[TipLoad],
    params: &PsoParams,
) -> Result<Vec<SolveResult>, SolverError> {
    if loads.is_empty() {
        return Err(SolverError::EmptyLoadSweep);
    }
    if params.dims() != 3 {
        return Err(SolverError::SearchSpaceNotThreeDimensional(params.dims()));
    }
    params.validate()?;
    loads
        .par_iter()
        .enumerate()
        .map(|(index, &load)| {
            let mut case_params = params.clone();
            case_params.seed = seed::derive(params.seed, LOAD_SWEEP_STREAM, index as u64);
            solve_tip_locus(geometry, load, &case_params)
        })
        .collect()
}

/// Normalized distance between a predicted tip and a measured tip
/// position: `sqrt((Qx - Qxm)^2 + (Qy - Qym)^2) / l`.
pub fn normalized_tip_error(predicted: TipState, measured: (f64, f64), length: f64) -> f64 {
    ((predicted.x - measured.0).powi(2) + (predicted.y - measured.1).powi(2)).sqrt() / length
}
