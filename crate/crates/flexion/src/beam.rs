//! Beam geometry and the unit-discretized bending model.
//!
//! A straight cantilever of length `l` is split into `nl` units of length
//! `dl = l / nl`. Only bending is modelled: each unit is a rigid chord of
//! length `dl` whose slope increment comes from the Euler-Bernoulli
//! relation `d(theta) = M * dl / (E * I)`, with the bending moment taken
//! from the tip load about the unit's start point. Axial stretching,
//! shear and initial curvature are out of scope.
//!
//! The integration runs root to tip for a *hypothesized* tip state: the
//! moment arm uses the guessed tip coordinates, so the result is only
//! physical when the guess reproduces itself. Finding that fixed point is
//! the job of [`crate::solver`] and [`crate::oracle`].

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::seed;

/// Errors from constructing geometry, width profiles or loads.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BeamError {
    #[error("{name} must be positive and finite (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("beam needs at least one unit")]
    NoUnits,
    #[error("unit width {index} must be positive and finite (got {value})")]
    BadUnitWidth { index: usize, value: f64 },
    #[error("width profile needs at least two knots (got {0})")]
    TooFewKnots(usize),
    #[error("unit count {n_units} is not a positive multiple of the {n_segments} knot segments")]
    KnotAlignment { n_units: usize, n_segments: usize },
    #[error("width bounds must satisfy 0 < lower <= upper (got {lower} .. {upper})")]
    BadWidthBounds { lower: f64, upper: f64 },
    #[error("operation requires a uniform beam")]
    NotUniform,
    #[error("tip force must be non-negative and finite (got {0})")]
    BadForce(f64),
    #[error("force inclination must lie in (-pi, pi] (got {0})")]
    AngleOutOfRange(f64),
    #[error("tip moment must be finite (got {0})")]
    BadMoment(f64),
}

fn require_positive(name: &'static str, value: f64) -> Result<(), BeamError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(BeamError::NonPositive { name, value })
    }
}

/// Cross-section second moment of area for a rectangle: `w * t^3 / 12`.
fn unit_second_moment(width: f64, thickness: f64) -> f64 {
    width * thickness.powi(3) / 12.0
}

/// A straight cantilever with a per-unit width profile.
///
/// All quantities are SI: metres and pascals. The unit length
/// `dl = length / n_units` is always derived, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGeometry {
    length: f64,
    thickness: f64,
    youngs_modulus: f64,
    unit_widths: Vec<f64>,
}

impl BeamGeometry {
    /// A beam of constant width.
    pub fn uniform(
        length: f64,
        width: f64,
        thickness: f64,
        youngs_modulus: f64,
        n_units: usize,
    ) -> Result<Self, BeamError> {
        require_positive("width", width)?;
        Self::from_widths(length, thickness, youngs_modulus, vec![width; n_units])
    }

    /// A beam with an explicit width per unit.
    pub fn from_widths(
        length: f64,
        thickness: f64,
        youngs_modulus: f64,
        unit_widths: Vec<f64>,
    ) -> Result<Self, BeamError> {
        require_positive("length", length)?;
        require_positive("thickness", thickness)?;
        require_positive("youngs_modulus", youngs_modulus)?;
        if unit_widths.is_empty() {
            return Err(BeamError::NoUnits);
        }
        for (index, &value) in unit_widths.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(BeamError::BadUnitWidth { index, value });
            }
        }
        Ok(Self {
            length,
            thickness,
            youngs_modulus,
            unit_widths,
        })
    }

    /// A beam whose width profile interpolates the given knots.
    pub fn from_knots(
        length: f64,
        thickness: f64,
        youngs_modulus: f64,
        knots: &WidthKnots,
        n_units: usize,
    ) -> Result<Self, BeamError> {
        let widths = interpolate_width_profile(knots, n_units)?;
        Self::from_widths(length, thickness, youngs_modulus, widths)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }

    pub fn unit_widths(&self) -> &[f64] {
        &self.unit_widths
    }

    pub fn n_units(&self) -> usize {
        self.unit_widths.len()
    }

    /// Length of one unit, `l / nl`.
    pub fn unit_length(&self) -> f64 {
        self.length / self.n_units() as f64
    }

    /// True when every unit has the same width.
    pub fn is_uniform(&self) -> bool {
        self.unit_widths.iter().all(|&w| w == self.unit_widths[0])
    }

    /// Per-unit second moments of area, `w_i * t^3 / 12`.
    pub fn second_moment_profile(&self) -> Vec<f64> {
        self.unit_widths
            .iter()
            .map(|&w| unit_second_moment(w, self.thickness))
            .collect()
    }

    /// Same geometry resampled to a different unit count (uniform beams only).
    ///
    /// Used by discretization-convergence checks; non-uniform profiles are
    /// tied to their unit count and cannot be resampled losslessly.
    pub fn with_n_units(&self, n_units: usize) -> Result<Self, BeamError> {
        if !self.is_uniform() {
            return Err(BeamError::NotUniform);
        }
        Self::uniform(
            self.length,
            self.unit_widths[0],
            self.thickness,
            self.youngs_modulus,
            n_units,
        )
    }
}

/// Width knots for a piecewise-linear non-uniform profile.
///
/// `n` segments are described by `n + 1` knot widths placed at equal
/// intervals along the beam.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthKnots {
    knot_widths: Vec<f64>,
}

impl WidthKnots {
    pub fn new(knot_widths: Vec<f64>) -> Result<Self, BeamError> {
        if knot_widths.len() < 2 {
            return Err(BeamError::TooFewKnots(knot_widths.len()));
        }
        for (index, &value) in knot_widths.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(BeamError::BadUnitWidth { index, value });
            }
        }
        Ok(Self { knot_widths })
    }

    pub fn widths(&self) -> &[f64] {
        &self.knot_widths
    }

    pub fn n_segments(&self) -> usize {
        self.knot_widths.len() - 1
    }
}

/// Expands knots into one width per unit.
///
/// Unit `k` (0-based) takes the profile value at the *end* of its chord,
/// i.e. the linear blend at fraction `(k + 1) / units_per_segment` within
/// its segment; a unit whose end lands exactly on a knot takes that knot's
/// width bit-for-bit. `n_units` must be a positive multiple of the segment
/// count, otherwise the knot alignment would be ambiguous.
pub fn interpolate_width_profile(
    knots: &WidthKnots,
    n_units: usize,
) -> Result<Vec<f64>, BeamError> {
    let n_segments = knots.n_segments();
    if n_units == 0 || !n_units.is_multiple_of(n_segments) {
        return Err(BeamError::KnotAlignment {
            n_units,
            n_segments,
        });
    }
    let per_segment = n_units / n_segments;
    let k = knots.widths();
    Ok((1..=n_units)
        .map(|i| {
            let segment = i / per_segment;
            let offset = i % per_segment;
            if offset == 0 {
                k[segment]
            } else {
                let frac = offset as f64 / per_segment as f64;
                k[segment] + frac * (k[segment + 1] - k[segment])
            }
        })
        .collect())
}

/// Draws `n_knots` widths independently uniform on `[lower, upper]`.
///
/// Deterministic in `seed`: knot `k` is `lower + u_k * (upper - lower)`
/// where `u_k` is the k-th [`seed::unit_uniform`] draw from
/// `ChaCha8Rng::seed_from_u64(seed)`. This mapping is stable across
/// releases.
pub fn generate_random_widths(
    lower: f64,
    upper: f64,
    n_knots: usize,
    seed_value: u64,
) -> Result<WidthKnots, BeamError> {
    if !lower.is_finite() || !upper.is_finite() || lower <= 0.0 || upper < lower {
        return Err(BeamError::BadWidthBounds { lower, upper });
    }
    if n_knots < 2 {
        return Err(BeamError::TooFewKnots(n_knots));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    let widths = (0..n_knots)
        .map(|_| lower + seed::unit_uniform(&mut rng) * (upper - lower))
        .collect();
    WidthKnots::new(widths)
}

/// A force of magnitude `F0` at inclination `phi` plus a moment `M0`,
/// all applied at the free end.
///
/// `phi` is measured from the undeformed beam axis, so `-pi/2` is a force
/// pulling straight "down" in beam coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipLoad {
    force: f64,
    angle: f64,
    moment: f64,
}

impl TipLoad {
    pub fn new(force: f64, angle: f64, moment: f64) -> Result<Self, BeamError> {
        if !force.is_finite() || force < 0.0 {
            return Err(BeamError::BadForce(force));
        }
        if !angle.is_finite() || angle <= -std::f64::consts::PI || angle > std::f64::consts::PI {
            return Err(BeamError::AngleOutOfRange(angle));
        }
        if !moment.is_finite() {
            return Err(BeamError::BadMoment(moment));
        }
        Ok(Self {
            force,
            angle,
            moment,
        })
    }

    /// No load at all.
    pub fn free() -> Self {
        Self {
            force: 0.0,
            angle: 0.0,
            moment: 0.0,
        }
    }

    pub fn pure_force(force: f64, angle: f64) -> Result<Self, BeamError> {
        Self::new(force, angle, 0.0)
    }

    pub fn pure_moment(moment: f64) -> Result<Self, BeamError> {
        Self::new(0.0, 0.0, moment)
    }

    pub fn force(&self) -> f64 {
        self.force
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn moment(&self) -> f64 {
        self.moment
    }

    /// Force and moment scaled by `factor >= 0`, angle unchanged.
    ///
    /// Load ramping for the continuation solver; also the statement of
    /// load linearity (the moment field below scales linearly).
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            force: self.force * factor,
            angle: self.angle,
            moment: self.moment * factor,
        }
    }

    /// Bending moment at `(x, y)` for a hypothesized tip position:
    /// `F0 sin(phi) (Qx - x) - F0 cos(phi) (Qy - y) + M0`.
    pub fn moment_at(&self, tip: TipState, x: f64, y: f64) -> f64 {
        self.force * self.angle.sin() * (tip.x - x) - self.force * self.angle.cos() * (tip.y - y)
            + self.moment
    }
}

/// The three unknowns of the problem: tip coordinates and tip slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipState {
    pub x: f64,
    pub y: f64,
    pub slope: f64,
}

impl TipState {
    pub fn new(x: f64, y: f64, slope: f64) -> Self {
        Self { x, y, slope }
    }

    /// Tip of the unloaded beam: `(l, 0, 0)`.
    pub fn undeformed(length: f64) -> Self {
        Self {
            x: length,
            y: 0.0,
            slope: 0.0,
        }
    }
}

impl std::fmt::Display for TipState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6} rad)", self.x, self.y, self.slope)
    }
}

/// Position and slope at one unit boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    pub slope: f64,
}

/// The deflected shape: one point per unit boundary, root first.
///
/// Point 0 is exactly `(0, 0, 0)` (clamped root) and consecutive points
/// are exactly one unit length apart, because each unit is a rigid chord.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflectionCurve {
    unit_length: f64,
    points: Vec<CurvePoint>,
}

impl DeflectionCurve {
    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn unit_length(&self) -> f64 {
        self.unit_length
    }

    pub fn n_units(&self) -> usize {
        self.points.len() - 1
    }

    /// State at the free end (the last point).
    pub fn tip(&self) -> TipState {
        let p = self.points[self.points.len() - 1];
        TipState::new(p.x, p.y, p.slope)
    }
}

/// Core forward scheme shared by the curve and tip-only integrators.
///
/// Per unit, in this order: the moment is evaluated at the unit's start
/// point, the position advances one chord along the start slope, then the
/// slope picks up `M * dl / (E * I)`. Using the start slope (not a
/// midpoint) for the chord is deliberate; changing it would change every
/// recorded curve.
fn integrate_with(
    geometry: &BeamGeometry,
    load: TipLoad,
    tip_guess: TipState,
    mut visit: impl FnMut(CurvePoint),
) -> TipState {
    let dl = geometry.unit_length();
    let thickness = geometry.thickness();
    let youngs = geometry.youngs_modulus();
    // Hoisted from moment_at; identical arithmetic, evaluated once.
    let f_sin = load.force * load.angle.sin();
    let f_cos = load.force * load.angle.cos();
    let mut p = CurvePoint {
        x: 0.0,
        y: 0.0,
        slope: 0.0,
    };
    visit(p);
    for &width in geometry.unit_widths() {
        let moment = f_sin * (tip_guess.x - p.x) - f_cos * (tip_guess.y - p.y) + load.moment;
        let slope_step = moment * dl / (youngs * unit_second_moment(width, thickness));
        p = CurvePoint {
            x: p.x + dl * p.slope.cos(),
            y: p.y + dl * p.slope.sin(),
            slope: p.slope + slope_step,
        };
        visit(p);
    }
    TipState::new(p.x, p.y, p.slope)
}

/// Integrates the full deflection curve for a hypothesized tip state.
pub fn integrate_deflection(
    geometry: &BeamGeometry,
    load: TipLoad,
    tip_guess: TipState,
) -> DeflectionCurve {
    let mut points = Vec::with_capacity(geometry.n_units() + 1);
    integrate_with(geometry, load, tip_guess, |p| points.push(p));
    DeflectionCurve {
        unit_length: geometry.unit_length(),
        points,
    }
}

/// Integrates only the computed tip state; the fitness hot path.
pub fn integrate_tip(geometry: &BeamGeometry, load: TipLoad, tip_guess: TipState) -> TipState {
    integrate_with(geometry, load, tip_guess, |_| {})
}
