//! Run configuration: a TOML file describing one beam, its load cases and
//! the solver tuning.
//!
//! Numbers default to bench units (`units = "mm-n"`): millimetres for
//! lengths, newtons for forces, newton-millimetres for moments, GPa for
//! the Young's modulus, radians for angles. With `units = "si"` everything
//! is metres, newtons, newton-metres, pascals and radians. Internally the
//! solver always works in SI.
//!
//! Unknown keys are rejected so typos cannot silently fall back to
//! defaults, and every validation failure names the offending key.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use flexion::beam::{self, BeamGeometry, TipLoad};
use flexion::pso::PsoParams;

/// Hanging-mass conversion, `F0 = 9.8 * mass`.
pub const GRAVITY: f64 = 9.8;

const DEFAULT_N_UNITS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Units {
    MmN,
    Si,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    format_version: Option<u32>,
    units: Option<Units>,
    seed: Option<u64>,
    out_dir: Option<String>,
    jobs: Option<usize>,
    oracle: Option<bool>,
    retries: Option<usize>,
    geometry: GeometrySection,
    #[serde(default)]
    loads: Vec<LoadSection>,
    pso: Option<PsoSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    length: f64,
    thickness: f64,
    youngs_modulus: f64,
    n_units: Option<usize>,
    width: Option<f64>,
    knot_widths: Option<Vec<f64>>,
    random_widths: Option<RandomWidthSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomWidthSection {
    lower: f64,
    upper: f64,
    knots: usize,
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadSection {
    label: Option<String>,
    force: Option<f64>,
    mass: Option<f64>,
    angle: Option<f64>,
    angle_deg: Option<f64>,
    moment: Option<f64>,
    lever_arm: Option<f64>,
    pulley_force: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PsoSection {
    particles: Option<usize>,
    c1: Option<f64>,
    c2: Option<f64>,
    w_min: Option<f64>,
    w_max: Option<f64>,
    max_iterations: Option<usize>,
    fitness_threshold: Option<f64>,
    position_bound: Option<f64>,
    slope_bound: Option<f64>,
}

/// One named load case.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCase {
    pub id: String,
    pub load: TipLoad,
}

/// A fully validated run in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: BeamGeometry,
    pub cases: Vec<LoadCase>,
    pub pso: PsoParams,
    pub oracle_enabled: bool,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
    /// Extra solve attempts with fresh derived seeds for cases that do
    /// not converge. Zero (the default) reports non-convergence as-is.
    pub retries: usize,
}

impl Units {
    fn length_si(self, value: f64) -> f64 {
        match self {
            Units::MmN => value * 1e-3,
            Units::Si => value,
        }
    }

    fn modulus_si(self, value: f64) -> f64 {
        match self {
            Units::MmN => value * 1e9,
            Units::Si => value,
        }
    }

    fn moment_si(self, value: f64) -> f64 {
        match self {
            Units::MmN => value * 1e-3,
            Units::Si => value,
        }
    }
}

fn check_case_id(id: &str) -> Result<()> {
    if id.is_empty() || id.len() > 64 {
        bail!("loads.label: must be 1..=64 characters (got {:?})", id);
    }
    if !id
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        bail!(
            "loads.label: only ASCII letters, digits, '-' and '_' are allowed (got {:?})",
            id
        );
    }
    Ok(())
}

fn build_geometry(section: &GeometrySection, units: Units) -> Result<BeamGeometry> {
    let n_units = section.n_units.unwrap_or(DEFAULT_N_UNITS);
    let length = units.length_si(section.length);
    let thickness = units.length_si(section.thickness);
    let modulus = units.modulus_si(section.youngs_modulus);

    let variants = section.width.is_some() as u8
        + section.knot_widths.is_some() as u8
        + section.random_widths.is_some() as u8;
    if variants != 1 {
        bail!(
            "geometry: exactly one of `width`, `knot_widths` or `random_widths` must be given (got {variants})"
        );
    }

    if let Some(width) = section.width {
        return BeamGeometry::uniform(length, units.length_si(width), thickness, modulus, n_units)
            .map_err(|e| anyhow!("geometry: {e}"));
    }

    let knots = if let Some(widths) = &section.knot_widths {
        beam::WidthKnots::new(widths.iter().map(|&w| units.length_si(w)).collect())
            .map_err(|e| anyhow!("geometry.knot_widths: {e}"))?
    } else {
        let random = section.random_widths.as_ref().unwrap();
        beam::generate_random_widths(
            units.length_si(random.lower),
            units.length_si(random.upper),
            random.knots,
            random.seed,
        )
        .map_err(|e| anyhow!("geometry.random_widths: {e}"))?
    };
    BeamGeometry::from_knots(length, thickness, modulus, &knots, n_units)
        .map_err(|e| anyhow!("geometry: {e}"))
}

fn build_load(index: usize, section: &LoadSection, units: Units) -> Result<LoadCase> {
    let key = |field: &str| format!("loads[{index}].{field}");

    let base_force = match (section.force, section.mass) {
        (Some(force), None) => force,
        (None, Some(mass)) => {
            if !(mass.is_finite() && mass >= 0.0) {
                bail!("{}: hanging mass must be non-negative (got {mass} kg)", key("mass"));
            }
            GRAVITY * mass
        }
        _ => bail!(
            "{}: exactly one of `force` [N] or `mass` [kg] must be given",
            key("force")
        ),
    };
    let pulley = section.pulley_force.unwrap_or(0.0);
    if !(pulley.is_finite() && pulley >= 0.0) {
        bail!(
            "{}: pulley force must be non-negative (got {pulley} N)",
            key("pulley_force")
        );
    }
    let force = base_force + pulley;

    let angle = match (section.angle, section.angle_deg) {
        (Some(angle), None) => angle,
        (None, Some(degrees)) => degrees.to_radians(),
        _ => bail!(
            "{}: exactly one of `angle` [rad] or `angle_deg` must be given",
            key("angle")
        ),
    };

    let moment = match (section.moment, section.lever_arm) {
        (None, None) => 0.0,
        (Some(moment), None) => units.moment_si(moment),
        // The whole tip force (weights plus pulley) acts on the lever.
        (None, Some(arm)) => -force * units.length_si(arm),
        (Some(_), Some(_)) => bail!(
            "{}: give `moment` or `lever_arm`, not both",
            key("moment")
        ),
    };

    let id = match &section.label {
        Some(label) => {
            check_case_id(label)?;
            label.clone()
        }
        None => format!("case{index:03}"),
    };
    let load = TipLoad::new(force, angle, moment)
        .map_err(|e| anyhow!("loads[{index}]: {e}"))?;
    Ok(LoadCase { id, load })
}

fn build_pso(section: Option<&PsoSection>, geometry: &BeamGeometry, seed: u64, units: Units) -> Result<PsoParams> {
    let mut params = flexion::solver::default_params(geometry, seed);
    if let Some(section) = section {
        if let Some(n) = section.particles {
            params.n_particles = n;
        }
        if let Some(c1) = section.c1 {
            params.c1 = c1;
        }
        if let Some(c2) = section.c2 {
            params.c2 = c2;
        }
        if let Some(w) = section.w_min {
            params.w_min = w;
        }
        if let Some(w) = section.w_max {
            params.w_max = w;
        }
        if let Some(t) = section.max_iterations {
            params.t_max = t;
        }
        if let Some(e) = section.fitness_threshold {
            params.fitness_threshold = e;
        }
        if let Some(bound) = section.position_bound {
            let b = units.length_si(bound);
            params.bounds[0] = (-b, b);
            params.bounds[1] = (-b, b);
        }
        if let Some(bound) = section.slope_bound {
            params.bounds[2] = (-bound, bound);
        }
    }
    params.validate().map_err(|e| anyhow!("pso: {e}"))?;
    Ok(params)
}

/// Parses and validates a config file into an SI [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let file: ConfigFile = toml::from_str(text).context("config is not valid TOML")?;

    let version = file.format_version.unwrap_or(1);
    if version != 1 {
        bail!("format_version: only version 1 is supported (got {version})");
    }
    let units = file.units.unwrap_or(Units::MmN);

    let geometry = build_geometry(&file.geometry, units)?;

    if file.loads.is_empty() {
        bail!("loads: at least one load case is required");
    }
    let cases: Vec<LoadCase> = file
        .loads
        .iter()
        .enumerate()
        .map(|(index, section)| build_load(index, section, units))
        .collect::<Result<_>>()?;
    for (i, a) in cases.iter().enumerate() {
        if let Some(b) = cases[..i].iter().find(|b| b.id == a.id) {
            bail!("loads: duplicate case id {:?}", b.id);
        }
    }

    let pso = build_pso(file.pso.as_ref(), &geometry, file.seed.unwrap_or(0), units)?;

    Ok(RunConfig {
        geometry,
        cases,
        pso,
        oracle_enabled: file.oracle.unwrap_or(true),
        out_dir: PathBuf::from(file.out_dir.unwrap_or_else(|| "out".to_string())),
        jobs: file.jobs,
        retries: file.retries.unwrap_or(0),
    })
}
