//! Bounded-box particle swarm optimization with a fitness-adaptive
//! inertia weight.
//!
//! The swarm minimizes an arbitrary objective over a rectangular search
//! space. Velocities follow the classic two-attractor update
//! `v' = w v + c1 r1 (pbest - x) + c2 r2 (gbest - x)` with fresh uniform
//! draws `r1, r2` per dimension per update, and positions absorb at the
//! box bounds. The inertia weight is not constant: each particle gets a
//! weight interpolated between `w_min` and `w_max` from its own fitness
//! relative to the swarm minimum and average, so above-average particles
//! keep exploring while good ones refine locally.
//!
//! Runs are deterministic: all randomness comes from per-particle,
//! per-iteration substreams of one master seed (see [`crate::seed`]),
//! so the result is bit-identical no matter how evaluations are
//! scheduled.

use crate::seed;

/// Velocities are clamped to this fraction of each dimension's bound
/// width. Initial velocities are drawn uniformly inside the same limit.
pub const VELOCITY_BOUND_FRACTION: f64 = 0.5;

/// Line-search floor aside, everything the optimizer needs to run.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoParams {
    pub n_particles: usize,
    /// Cognitive acceleration (pull toward the particle's own best).
    pub c1: f64,
    /// Social acceleration (pull toward the swarm best).
    pub c2: f64,
    pub w_min: f64,
    pub w_max: f64,
    /// Iteration cap; one iteration is one evaluation of the whole swarm.
    pub t_max: usize,
    /// The run stops as soon as the swarm best reaches this fitness.
    pub fitness_threshold: f64,
    /// Inclusive `(lower, upper)` box per dimension.
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

impl PsoParams {
    /// Parameters with the library's default tuning (swarm of 100,
    /// `c1 = c2 = 0.2`, inertia in `[0.6, 0.8]`, 50 iterations, threshold
    /// `5e-3`) over the given box.
    pub fn new(bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        Self {
            n_particles: 100,
            c1: 0.2,
            c2: 0.2,
            w_min: 0.6,
            w_max: 0.8,
            t_max: 50,
            fitness_threshold: 5e-3,
            bounds,
            seed,
        }
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    /// Velocity clamp for one dimension.
    pub fn velocity_limit(&self, dim: usize) -> f64 {
        let (lower, upper) = self.bounds[dim];
        VELOCITY_BOUND_FRACTION * (upper - lower)
    }

    pub fn validate(&self) -> Result<(), PsoError> {
        if self.n_particles == 0 {
            return Err(PsoError::NoParticles);
        }
        if self.bounds.is_empty() {
            return Err(PsoError::NoDimensions);
        }
        if self.t_max == 0 {
            return Err(PsoError::NoIterations);
        }
        for (dim, &(lower, upper)) in self.bounds.iter().enumerate() {
            if !lower.is_finite() || !upper.is_finite() || lower >= upper {
                return Err(PsoError::BadBound { dim, lower, upper });
            }
        }
        // NaN fails each of these comparisons and lands in the error arm.
        let inertia_ok = self.w_min >= 0.0 && self.w_max >= self.w_min && self.w_max.is_finite();
        if !inertia_ok {
            return Err(PsoError::BadInertiaRange {
                w_min: self.w_min,
                w_max: self.w_max,
            });
        }
        let acceleration_ok = self.c1 >= 0.0 && self.c2 >= 0.0;
        if !acceleration_ok {
            return Err(PsoError::NegativeAcceleration {
                c1: self.c1,
                c2: self.c2,
            });
        }
        let threshold_ok = self.fitness_threshold > 0.0;
        if !threshold_ok {
            return Err(PsoError::BadThreshold(self.fitness_threshold));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PsoError {
    #[error("swarm needs at least one particle")]
    NoParticles,
    #[error("search space needs at least one dimension")]
    NoDimensions,
    #[error("iteration cap must be at least 1")]
    NoIterations,
    #[error("bound {dim} must satisfy lower < upper with finite ends (got {lower} .. {upper})")]
    BadBound { dim: usize, lower: f64, upper: f64 },
    #[error("inertia weights must satisfy 0 <= w_min <= w_max (got {w_min} .. {w_max})")]
    BadInertiaRange { w_min: f64, w_max: f64 },
    #[error("acceleration coefficients must be non-negative (got c1 = {c1}, c2 = {c2})")]
    NegativeAcceleration { c1: f64, c2: f64 },
    #[error("fitness threshold must be positive (got {0})")]
    BadThreshold(f64),
    #[error("objective returned non-finite fitness for {nan} of {total} initial particles")]
    MostlyNanObjective { nan: usize, total: usize },
}

/// One swarm member.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    /// Objective at `pbest_position`; `INFINITY` until a finite
    /// evaluation has been seen.
    pub pbest_fitness: f64,
    /// Inertia weight used for this particle's most recent update.
    pub inertia: f64,
}

/// Swarm plus the running global best.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub gbest_position: Vec<f64>,
    pub gbest_fitness: f64,
    pub iteration: usize,
    /// Swarm-best fitness after each completed iteration; non-increasing.
    pub trace: Vec<f64>,
}

/// What a finished run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Diagnostic count of non-finite objective values seen over the run.
    pub nan_evaluations: usize,
}

/// Per-particle inertia weight from its own fitness and the swarm's
/// current minimum and average fitness.
///
/// Above-average (or non-finite) fitness gets `w_max`; otherwise the
/// weight interpolates linearly between `w_min` at the swarm minimum and
/// `w_max` at the average. When minimum and average coincide the formula
/// is indeterminate and `w_min` is returned, favouring refinement once
/// the swarm has collapsed. The result is always in `[w_min, w_max]`.
pub fn adaptive_inertia(fit: f64, fit_min: f64, fit_ave: f64, params: &PsoParams) -> f64 {
    if !fit.is_finite() || fit > fit_ave {
        return params.w_max;
    }
    // Collapsed or non-finite swarm statistics leave the blend undefined.
    let spread_is_positive = fit_ave > fit_min;
    if !spread_is_positive {
        return params.w_min;
    }
    let blend = params.w_min + (params.w_max - params.w_min) * (fit - fit_min) / (fit_ave - fit_min);
    blend.clamp(params.w_min, params.w_max)
}

/// The scalar velocity rule, exposed for direct verification.
#[allow(clippy::too_many_arguments)]
fn velocity_component(
    velocity: f64,
    position: f64,
    pbest: f64,
    gbest: f64,
    w: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    w * velocity + c1 * r1 * (pbest - position) + c2 * r2 * (gbest - position)
}

/// New velocity for one particle; two fresh draws per dimension, clamped
/// to the per-dimension velocity limit.
pub fn update_velocity(
    particle: &Particle,
    gbest: &[f64],
    w: f64,
    params: &PsoParams,
    rng: &mut impl rand_core::RngCore,
) -> Vec<f64> {
    (0..params.dims())
        .map(|j| {
            let r1 = seed::unit_uniform(rng);
            let r2 = seed::unit_uniform(rng);
            let v = velocity_component(
                particle.velocity[j],
                particle.position[j],
                particle.pbest_position[j],
                gbest[j],
                w,
                params.c1,
                params.c2,
                r1,
                r2,
            );
            let limit = params.velocity_limit(j);
            v.clamp(-limit, limit)
        })
        .collect()
}

/// New position: one velocity step, absorbed at the box bounds.
pub fn update_position(position: &[f64], velocity: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    position
        .iter()
        .zip(velocity)
        .zip(bounds)
        .map(|((&x, &v), &(lower, upper))| (x + v).clamp(lower, upper))
        .collect()
}

/// Folds freshly evaluated fitnesses into the personal and global bests.
///
/// Replacement requires strict improvement, so ties keep the incumbent
/// and, among new bests evaluated in the same iteration, the lowest
/// particle index wins. Non-finite fitness never replaces anything.
pub fn update_bests(state: &mut SwarmState, fitnesses: &[f64]) {
    assert_eq!(state.particles.len(), fitnesses.len());
    for (particle, &fit) in state.particles.iter_mut().zip(fitnesses) {
        if fit.is_finite() && fit < particle.pbest_fitness {
            particle.pbest_fitness = fit;
            particle.pbest_position.copy_from_slice(&particle.position);
        }
    }
    for particle in &state.particles {
        if particle.pbest_fitness < state.gbest_fitness {
            state.gbest_fitness = particle.pbest_fitness;
            state.gbest_position.copy_from_slice(&particle.pbest_position);
        }
    }
}

/// Swarm at iteration zero: positions uniform inside the bounds,
/// velocities uniform inside the velocity limits.
///
/// Particle `i` draws from substream `(i, 0)` of the master seed, position
/// components first, then velocity components.
pub fn init_swarm(params: &PsoParams) -> SwarmState {
    let dims = params.dims();
    let particles = (0..params.n_particles)
        .map(|i| {
            let mut rng = seed::substream_rng(params.seed, i as u64, 0);
            let position: Vec<f64> = params
                .bounds
                .iter()
                .map(|&(lower, upper)| lower + seed::unit_uniform(&mut rng) * (upper - lower))
                .collect();
            let velocity: Vec<f64> = (0..dims)
                .map(|j| {
                    let limit = params.velocity_limit(j);
                    -limit + seed::unit_uniform(&mut rng) * 2.0 * limit
                })
                .collect();
            Particle {
                pbest_position: position.clone(),
                pbest_fitness: f64::INFINITY,
                inertia: params.w_max,
                position,
                velocity,
            }
        })
        .collect();
    SwarmState {
        particles,
        gbest_position: vec![f64::NAN; dims],
        gbest_fitness: f64::INFINITY,
        iteration: 0,
        trace: Vec::new(),
    }
}

/// Runs the optimizer until the swarm best reaches the fitness threshold
/// or the iteration cap.
///
/// Iteration `t` evaluates every particle, folds the bests, records the
/// swarm best in the trace, and (when the run continues) updates
/// velocities and positions using substream `(i, t)` per particle. The
/// objective must be a pure function of its argument; evaluations within
/// an iteration may then be scheduled in any order, including
/// concurrently by a wrapping caller, without changing the result.
///
/// Errors if more than half of the initial swarm evaluates to a
/// non-finite fitness, which almost always means a misconfigured
/// objective.
pub fn run<F>(objective: F, params: &PsoParams) -> Result<RunResult, PsoError>
where
    F: Fn(&[f64]) -> f64,
{
    params.validate()?;
    let mut state = init_swarm(params);
    let mut fitnesses = vec![0.0; params.n_particles];
    let mut nan_evaluations = 0usize;

    let evaluate = |state: &SwarmState, fitnesses: &mut [f64], nan: &mut usize| {
        for (slot, particle) in fitnesses.iter_mut().zip(&state.particles) {
            let fit = objective(&particle.position);
            if !fit.is_finite() {
                *nan += 1;
            }
            *slot = fit;
        }
    };

    evaluate(&state, &mut fitnesses, &mut nan_evaluations);
    if 2 * nan_evaluations > params.n_particles {
        return Err(PsoError::MostlyNanObjective {
            nan: nan_evaluations,
            total: params.n_particles,
        });
    }
    update_bests(&mut state, &fitnesses);
    state.iteration = 1;
    state.trace.push(state.gbest_fitness);

    loop {
        if state.gbest_fitness <= params.fitness_threshold || state.iteration == params.t_max {
            break;
        }
        step_swarm(&mut state, &fitnesses, params);
        evaluate(&state, &mut fitnesses, &mut nan_evaluations);
        let previous_best = state.gbest_fitness;
        update_bests(&mut state, &fitnesses);
        debug_assert!(state.gbest_fitness <= previous_best);
        state.iteration += 1;
        state.trace.push(state.gbest_fitness);
    }

    let converged = state.gbest_fitness <= params.fitness_threshold;
    Ok(RunResult {
        best_position: state.gbest_position,
        best_fitness: state.gbest_fitness,
        trace: state.trace,
        iterations: state.iteration,
        converged,
        nan_evaluations,
    })
}

/// One velocity-and-position update of the whole swarm, driven by the
/// fitnesses from the iteration that just finished.
fn step_swarm(state: &mut SwarmState, fitnesses: &[f64], params: &PsoParams) {
    let finite = fitnesses.iter().copied().filter(|f| f.is_finite());
    let (mut fit_min, mut fit_sum, mut count) = (f64::INFINITY, 0.0, 0usize);
    for f in finite {
        fit_min = fit_min.min(f);
        fit_sum += f;
        count += 1;
    }
    let fit_ave = if count > 0 {
        fit_sum / count as f64
    } else {
        f64::INFINITY
    };

    // gbest is borrowed immutably per particle below; clone once instead.
    let gbest = state.gbest_position.clone();
    for (i, particle) in state.particles.iter_mut().enumerate() {
        let w = adaptive_inertia(fitnesses[i], fit_min, fit_ave, params);
        particle.inertia = w;
        let mut rng = seed::substream_rng(params.seed, i as u64, state.iteration as u64);
        let velocity = update_velocity(particle, &gbest, w, params, &mut rng);
        let position = update_position(&particle.position, &velocity, &params.bounds);
        particle.velocity = velocity;
        particle.position = position;
    }
}
