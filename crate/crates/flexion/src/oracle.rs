//! Deterministic reference solvers for validating the swarm.
//!
//! The same self-consistency condition the swarm minimizes can be written
//! as a three-component residual and driven to zero with a damped Newton
//! iteration on a forward-difference Jacobian. With the default tolerance
//! of `1e-9` the shooting solution is several orders of magnitude tighter
//! than the swarm threshold, making it a trustworthy reference for every
//! swarm answer. Closed-form limits (small-deflection linear theory and
//! the constant-curvature arc) cover the regimes where the discretized
//! model has an analytic answer.

use std::f64::consts::{PI, TAU};

use crate::beam::{integrate_tip, BeamGeometry, TipLoad, TipState};

/// Newton shooting controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub max_newton_iters: usize,
    /// Convergence test on the merit (the normalized residual); the
    /// default is 1e-9, about five orders tighter than the usual swarm
    /// threshold.
    pub residual_tol: f64,
    /// Forward-difference step as a fraction of each variable's search
    /// range width.
    pub fd_step: f64,
    /// Initial step fraction for the damped update, in `(0, 1]`.
    pub damping: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            max_newton_iters: 50,
            residual_tol: 1e-9,
            fd_step: 1e-6,
            damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("Jacobian singular at {last}, merit {merit:.3e}")]
    JacobianSingular { last: TipState, merit: f64 },
    #[error("no merit decrease below damping 1/64 at {last}, merit {merit:.3e}")]
    LineSearchStalled { last: TipState, merit: f64 },
    #[error("Newton did not converge in {iters} iterations; last {last}, merit {merit:.3e}")]
    MaxIterationsExceeded {
        iters: usize,
        last: TipState,
        merit: f64,
    },
    #[error("closed-form tip deflection requires a uniform beam")]
    NonUniformGeometry,
}

/// Picard feedback steps used to warm-start the Newton iteration.
const PICARD_WARMUP_STEPS: usize = 5;

/// Smallest damping factor tried before the line search gives up.
const MIN_DAMPING: f64 = 1.0 / 64.0;

/// Maps an angle difference into `(-pi, pi]`.
fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Self-consistency residual of a hypothesized tip state:
/// `(qx_nl - Qx, qy_nl - Qy, wrap(theta_nl - theta0))`.
///
/// The angle component is wrapped into `(-pi, pi]` so the root finder
/// sees no branch jump near `+-pi`.
pub fn residual(geometry: &BeamGeometry, load: TipLoad, guess: TipState) -> [f64; 3] {
    let reached = integrate_tip(geometry, load, guess);
    [
        reached.x - guess.x,
        reached.y - guess.y,
        wrap_angle(reached.slope - guess.slope),
    ]
}

/// Normalized residual magnitude, the same functional form as the swarm
/// fitness: position error over `l` plus wrapped angle error over `2*pi`.
pub fn merit(geometry: &BeamGeometry, load: TipLoad, guess: TipState) -> f64 {
    let r = residual(geometry, load, guess);
    (r[0] * r[0] + r[1] * r[1]).sqrt() / geometry.length() + r[2].abs() / TAU
}

/// Solves a 3x3 linear system by Gaussian elimination with partial
/// pivoting. `None` when the matrix is numerically singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot_line = a[col];
        for row in col + 1..3 {
            let factor = a[row][col] / pivot_line[col];
            for (entry, pivot_entry) in a[row].iter_mut().zip(pivot_line).skip(col) {
                *entry -= factor * pivot_entry;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut sum = b[row];
        for k in row + 1..3 {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}

/// Forward-difference Jacobian of the residual. The step in each variable
/// is `fd_step` times that variable's search-range width (`2l` for the
/// coordinates, `2*pi` for the slope).
fn fd_jacobian(
    geometry: &BeamGeometry,
    load: TipLoad,
    guess: TipState,
    base: &[f64; 3],
    fd_step: f64,
) -> [[f64; 3]; 3] {
    let l = geometry.length();
    let ranges = [2.0 * l, 2.0 * l, TAU];
    let mut jacobian = [[0.0; 3]; 3];
    for (j, range) in ranges.iter().enumerate() {
        let h = fd_step * range;
        let mut bumped = [guess.x, guess.y, guess.slope];
        bumped[j] += h;
        let r = residual(
            geometry,
            load,
            TipState::new(bumped[0], bumped[1], bumped[2]),
        );
        for i in 0..3 {
            jacobian[i][j] = (r[i] - base[i]) / h;
        }
    }
    jacobian
}

/// The wrapped residual accepts any slope branch `theta0 = theta_nl + 2 pi k`;
/// report the principal one so solved slopes are comparable across solvers.
fn principal_branch(tip: TipState) -> TipState {
    TipState::new(tip.x, tip.y, wrap_angle(tip.slope))
}

fn newton_from(
    geometry: &BeamGeometry,
    load: TipLoad,
    params: &OracleParams,
    mut guess: TipState,
) -> Result<TipState, OracleError> {
    let mut current_merit = merit(geometry, load, guess);
    for _ in 0..params.max_newton_iters {
        if current_merit <= params.residual_tol {
            return Ok(principal_branch(guess));
        }
        let r = residual(geometry, load, guess);
        let jacobian = fd_jacobian(geometry, load, guess, &r, params.fd_step);
        let step = solve3(jacobian, [-r[0], -r[1], -r[2]]).ok_or(OracleError::JacobianSingular {
            last: guess,
            merit: current_merit,
        })?;

        // Halve the step until the merit decreases.
        let mut damping = params.damping;
        loop {
            let trial = TipState::new(
                guess.x + damping * step[0],
                guess.y + damping * step[1],
                guess.slope + damping * step[2],
            );
            let trial_merit = merit(geometry, load, trial);
            if trial_merit < current_merit {
                guess = trial;
                current_merit = trial_merit;
                break;
            }
            damping *= 0.5;
            if damping < MIN_DAMPING {
                return Err(OracleError::LineSearchStalled {
                    last: guess,
                    merit: current_merit,
                });
            }
        }
    }
    if current_merit <= params.residual_tol {
        Ok(principal_branch(guess))
    } else {
        Err(OracleError::MaxIterationsExceeded {
            iters: params.max_newton_iters,
            last: guess,
            merit: current_merit,
        })
    }
}

/// Damped Newton shooting from a Picard warm start.
///
/// The warm start begins at the undeformed tip `(l, 0, 0)` and feeds the
/// computed tip back into the integration five times; the computed tip
/// always lies within a beam length of the root, so the warm-up cannot
/// run away. Fails explicitly (with the last iterate and its merit) when
/// the Jacobian degenerates, the line search stalls, or the iteration cap
/// is reached; [`continuation_solve`] is the fallback for those cases.
pub fn newton_shooting_solve(
    geometry: &BeamGeometry,
    load: TipLoad,
    params: &OracleParams,
) -> Result<TipState, OracleError> {
    let mut guess = TipState::undeformed(geometry.length());
    for _ in 0..PICARD_WARMUP_STEPS {
        guess = integrate_tip(geometry, load, guess);
    }
    newton_from(geometry, load, params, guess)
}

/// Newton shooting with the load ramped from zero in `steps` equal
/// fractions, each step warm-started from the previous solution.
pub fn continuation_solve(
    geometry: &BeamGeometry,
    load: TipLoad,
    params: &OracleParams,
    steps: usize,
) -> Result<TipState, OracleError> {
    let mut solved = TipState::undeformed(geometry.length());
    for k in 1..=steps.max(1) {
        let fraction = k as f64 / steps.max(1) as f64;
        solved = newton_from(geometry, load.scaled(fraction), params, solved)?;
    }
    Ok(solved)
}

/// Direct Newton shooting, falling back to a ten-step load continuation
/// when the direct solve fails.
pub fn solve(
    geometry: &BeamGeometry,
    load: TipLoad,
    params: &OracleParams,
) -> Result<TipState, OracleError> {
    newton_shooting_solve(geometry, load, params)
        .or_else(|_| continuation_solve(geometry, load, params, 10))
}

/// Small-deflection linear theory for a uniform beam:
/// `y = F_t l^3 / 3EI + M0 l^2 / 2EI`, `theta = F_t l^2 / 2EI + M0 l / EI`,
/// `x = l`, with `F_t = F0 sin(phi)` the transverse force component.
pub fn linear_tip_deflection(
    geometry: &BeamGeometry,
    load: TipLoad,
) -> Result<TipState, OracleError> {
    if !geometry.is_uniform() {
        return Err(OracleError::NonUniformGeometry);
    }
    let l = geometry.length();
    let stiffness = geometry.youngs_modulus() * geometry.second_moment_profile()[0];
    let transverse = load.force() * load.angle().sin();
    let moment = load.moment();
    Ok(TipState::new(
        l,
        transverse * l.powi(3) / (3.0 * stiffness) + moment * l.powi(2) / (2.0 * stiffness),
        transverse * l.powi(2) / (2.0 * stiffness) + moment * l / stiffness,
    ))
}
