//! Flexion computes the large planar deflection of straight cantilever
//! beams under a combined tip force and tip moment.
//!
//! The beam is discretized into equal-length units and integrated forward
//! from the clamped root with the Euler-Bernoulli curvature-moment
//! relation. Because the bending moment depends on the (unknown) deflected
//! tip position, the tip state is found as the fixed point of that
//! integration. Two independent routes are provided:
//!
//! * [`solver`] — a bounded-box particle swarm optimizer ([`pso`]) searches
//!   for the tip state `[Qx, Qy, theta0]` that minimizes the
//!   self-consistency error between the hypothesized tip and the tip
//!   reached by integration.
//! * [`oracle`] — a damped Newton shooting solver drives the same
//!   self-consistency residual to zero deterministically, several orders of
//!   magnitude tighter than the swarm threshold. It validates every swarm
//!   answer and supplies closed-form limits (linear theory, constant
//!   curvature) for testing.
//!
//! Geometry may be uniform or non-uniform along the length: per-unit widths
//! come either from a constant, from piecewise-linear interpolation between
//! knot widths, or from a seeded random knot generator ([`beam`]).
//!
//! All solver entry points are pure functions of their inputs and a seed,
//! so results are reproducible bit-for-bit across runs and thread counts
//! (see [`seed`] for the derivation scheme).
//!
//! ```
//! use flexion::beam::{BeamGeometry, TipLoad};
//! use flexion::{oracle, solver};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! // 180 mm x 25 mm x 1.15 mm aluminium-alloy cantilever, 200 units.
//! let geometry = BeamGeometry::uniform(0.18, 0.025, 1.15e-3, 45.36e9, 200)?;
//! // 6.958 N pulling down-and-back at -5*pi/6, no tip moment.
//! let load = TipLoad::new(6.958, -5.0 * std::f64::consts::FRAC_PI_6, 0.0)?;
//!
//! let params = solver::default_params(&geometry, 42);
//! let result = solver::solve_tip_locus(&geometry, load, &params)?;
//! assert!(result.converged);
//!
//! // The deterministic shooting solver lands on the same tip.
//! let reference = oracle::solve(&geometry, load, &oracle::OracleParams::default())?;
//! let dist = ((result.tip.x - reference.x).powi(2)
//!     + (result.tip.y - reference.y).powi(2)).sqrt();
//! assert!(dist < 2.0 * params.fitness_threshold * geometry.length());
//! # Ok(()) }
//! ```

pub mod beam;
pub mod oracle;
pub mod pso;
pub mod seed;
pub mod solver;

pub use beam::{BeamGeometry, DeflectionCurve, TipLoad, TipState, WidthKnots};
pub use solver::SolveResult;
