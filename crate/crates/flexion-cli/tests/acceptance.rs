//! Acceptance suite: one test per release criterion, each printing a
//! single pass line with the measured numbers (run with `--nocapture` to
//! see them). Tolerances are pinned here, not configurable.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use flexion::beam::{
    generate_random_widths, interpolate_width_profile, BeamGeometry, TipLoad, TipState, WidthKnots,
};
use flexion::oracle::{self, OracleParams};
use flexion::pso;
use flexion::solver;
use flexion_cli::{config, output, run};

const LENGTH: f64 = 0.18;
const TABLE_KNOTS_MM: [f64; 11] = [
    22.6, 26.9, 30.0, 22.8, 22.8, 26.8, 28.1, 20.8, 23.7, 28.1, 29.6,
];
/// Hand-derived bending stiffness of the uniform beam, `E * w t^3 / 12`.
const BENDING_STIFFNESS: f64 = 0.14372268749999997;

fn uniform_beam() -> BeamGeometry {
    BeamGeometry::uniform(LENGTH, 0.025, 1.15e-3, 45.36e9, 200).unwrap()
}

fn table_knots() -> WidthKnots {
    WidthKnots::new(TABLE_KNOTS_MM.iter().map(|w| w * 1e-3).collect()).unwrap()
}

fn nonuniform_beam() -> BeamGeometry {
    BeamGeometry::from_knots(LENGTH, 1.15e-3, 45.36e9, &table_knots(), 200).unwrap()
}

/// The bench weight ladder: 2..=28 fifty-gram plates plus the ten-gram
/// hanger, giving forces 1.078 N .. 13.818 N.
fn weight_ladder() -> Vec<f64> {
    (1..=14).map(|i| (2 * i) as f64 * 9.8 * 0.050 + 9.8 * 0.010).collect()
}

const ANGLES_SIXTHS: [f64; 4] = [-2.0, -3.0, -4.0, -5.0];
const LEVER_ARMS_M: [f64; 4] = [0.01, 0.02, 0.03, 0.04];

fn tip_distance(a: TipState, b: TipState) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

#[test]
fn criterion_1_zero_load_identity() {
    let mut slowest = Duration::ZERO;
    for geometry in [uniform_beam(), nonuniform_beam()] {
        for seed in 0..20 {
            let params = solver::default_params(&geometry, seed);
            let started = Instant::now();
            let result = solver::solve_tip_locus(&geometry, TipLoad::free(), &params).unwrap();
            let elapsed = started.elapsed();
            slowest = slowest.max(elapsed);
            assert!(
                elapsed < Duration::from_secs(1),
                "seed {seed}: solve took {elapsed:?}"
            );
            let undeformed = TipState::undeformed(geometry.length());
            let miss = tip_distance(result.tip, undeformed) / geometry.length()
                + result.tip.slope.abs() / TAU;
            assert!(
                miss <= params.fitness_threshold,
                "seed {seed}: tip {} misses (l, 0, 0) by {miss}",
                result.tip
            );
        }
    }
    println!(
        "acceptance criterion 1 (zero-load identity): PASS — 40/40 seeds within e_th, slowest solve {slowest:?}"
    );
}

#[test]
fn criterion_2_linear_limit_agreement() {
    let geometry = uniform_beam();
    let params = OracleParams::default();
    let mut worst: f64 = 0.0;
    for force in [0.05, 0.1, 0.2] {
        let load = TipLoad::pure_force(force, -FRAC_PI_2).unwrap();
        let tip = oracle::newton_shooting_solve(&geometry, load, &params).unwrap();
        let expected = force * LENGTH.powi(3) / (3.0 * BENDING_STIFFNESS);
        let relative = (tip.y.abs() - expected).abs() / expected;
        worst = worst.max(relative);
        assert!(
            relative <= 0.01,
            "F = {force} N: |y| = {} vs linear {expected} ({relative:.4} relative)",
            tip.y.abs()
        );
    }
    println!(
        "acceptance criterion 2 (linear-limit agreement): PASS — worst relative error {worst:.2e}"
    );
}

#[test]
fn criterion_3_constant_curvature_exactness() {
    let moment = FRAC_PI_2 * BENDING_STIFFNESS / LENGTH;
    let load = TipLoad::pure_moment(moment).unwrap();
    let radius = BENDING_STIFFNESS / moment;

    let geometry = uniform_beam();
    let oracle_tip = oracle::newton_shooting_solve(&geometry, load, &OracleParams::default()).unwrap();
    assert!(
        (oracle_tip.slope - FRAC_PI_2).abs() <= 1e-6,
        "oracle slope {}",
        oracle_tip.slope
    );

    let swarm = solver::solve_tip_locus(&geometry, load, &solver::default_params(&geometry, 0)).unwrap();
    assert!(swarm.converged);
    let swarm_slope = swarm.curve.tip().slope;
    assert!(
        (swarm_slope - FRAC_PI_2).abs() <= 1e-6,
        "swarm curve slope {swarm_slope}"
    );

    let arc_error = |n_units: usize| {
        let g = uniform_beam().with_n_units(n_units).unwrap();
        let tip = oracle::newton_shooting_solve(&g, load, &OracleParams::default()).unwrap();
        ((tip.x - radius).powi(2) + (tip.y - radius).powi(2)).sqrt() / LENGTH
    };
    let coarse = arc_error(200);
    let fine = arc_error(400);
    assert!(coarse <= 2.0 / 200.0, "arc error {coarse} at nl = 200");
    let halving = fine / coarse;
    assert!(
        (0.4..=0.6).contains(&halving),
        "error ratio at doubled resolution: {halving}"
    );
    println!(
        "acceptance criterion 3 (constant-curvature exactness): PASS — arc error {coarse:.2e} at nl=200, ratio {halving:.3} at nl=400"
    );
}

struct CaseFamily {
    name: String,
    geometry: BeamGeometry,
    loads: Vec<TipLoad>,
}

/// The 16 bench-style cases: per beam, four pure-force inclinations and
/// four lever arms, each swept over the weight ladder.
fn bench_cases() -> Vec<CaseFamily> {
    let mut cases = Vec::new();
    for (beam_name, geometry) in [("uniform", uniform_beam()), ("nonuniform", nonuniform_beam())] {
        for sixths in ANGLES_SIXTHS {
            cases.push(CaseFamily {
                name: format!("{beam_name} phi={sixths}pi/6"),
                geometry: geometry.clone(),
                loads: weight_ladder()
                    .iter()
                    .map(|&f| TipLoad::pure_force(f, sixths * PI / 6.0).unwrap())
                    .collect(),
            });
        }
        for arm in LEVER_ARMS_M {
            cases.push(CaseFamily {
                name: format!("{beam_name} arm={}mm", arm * 1e3),
                geometry: geometry.clone(),
                loads: weight_ladder()
                    .iter()
                    .map(|&f| TipLoad::new(f, -FRAC_PI_2, -f * arm).unwrap())
                    .collect(),
            });
        }
    }
    cases
}

#[test]
fn criterion_4_pso_oracle_equivalence() {
    let cases = bench_cases();
    assert_eq!(cases.len(), 16);
    let oracle_params = OracleParams::default();
    let allowed = 2.0 * 0.005 * LENGTH; // 1.8 mm
    let mut worst_distance: f64 = 0.0;
    let mut lowest_rate = 20;

    for case in &cases {
        // Convergence rate at the heaviest load of the sweep, 20 seeds.
        let heaviest = *case.loads.last().unwrap();
        let reference = oracle::solve(&case.geometry, heaviest, &oracle_params).unwrap();
        let mut converged = 0;
        for seed in 0..20 {
            let params = solver::default_params(&case.geometry, seed);
            let result = solver::solve_tip_locus(&case.geometry, heaviest, &params).unwrap();
            assert!(result.iterations <= 50);
            if result.converged {
                converged += 1;
                let distance = tip_distance(result.tip, reference);
                worst_distance = worst_distance.max(distance);
                assert!(
                    distance <= allowed,
                    "{}: converged swarm tip {} is {distance} m from the oracle",
                    case.name,
                    result.tip
                );
            }
        }
        lowest_rate = lowest_rate.min(converged);
        assert!(
            converged >= 18,
            "{}: only {converged}/20 seeds converged",
            case.name
        );

        // Whole-ladder equivalence at one seed.
        let params = solver::default_params(&case.geometry, 1);
        let sweep = solver::sweep_loads(&case.geometry, &case.loads, &params).unwrap();
        for (load, result) in case.loads.iter().zip(&sweep) {
            if !result.converged {
                continue;
            }
            let reference = oracle::solve(&case.geometry, *load, &oracle_params).unwrap();
            let distance = tip_distance(result.tip, reference);
            worst_distance = worst_distance.max(distance);
            assert!(
                distance <= allowed,
                "{} at F0 = {} N: swarm is {distance} m from the oracle",
                case.name,
                load.force()
            );
        }
    }
    println!(
        "acceptance criterion 4 (PSO-oracle equivalence): PASS — 16 cases, worst tip distance {:.3} mm <= 1.8 mm, lowest seed convergence {lowest_rate}/20",
        worst_distance * 1e3
    );
}

#[test]
fn criterion_5_deflection_scale_reproduction() {
    let sweeps = [
        ("uniform", uniform_beam(), -5.0, 0.70, 0.80),
        ("uniform", uniform_beam(), -2.0, 0.40, 0.50),
        ("nonuniform", nonuniform_beam(), -5.0, 0.70, 0.79),
    ];
    let mut report = String::new();
    for (name, geometry, sixths, low, high) in sweeps {
        let loads: Vec<TipLoad> = weight_ladder()
            .iter()
            .map(|&f| TipLoad::pure_force(f, sixths * PI / 6.0).unwrap())
            .collect();
        let params = solver::default_params(&geometry, 3);
        let sweep = solver::sweep_loads(&geometry, &loads, &params).unwrap();
        let max_deflection = sweep
            .iter()
            .filter(|r| r.converged)
            .map(|r| r.tip.y.abs() / geometry.length())
            .fold(0.0f64, f64::max);
        assert!(
            (low..=high).contains(&max_deflection),
            "{name} phi={sixths}pi/6: max |Qy|/l = {max_deflection} outside [{low}, {high}]"
        );
        write!(report, "{name} phi={sixths}pi/6 -> {max_deflection:.3}; ").unwrap();
    }
    println!("acceptance criterion 5 (deflection-scale reproduction): PASS — {report}");
}

#[test]
fn criterion_6_property_suite() {
    // Stands in for the unpublished bench data: the properties that make
    // the solver trustworthy at desk scale.
    let geometry = uniform_beam();
    let load = TipLoad::pure_force(6.958, -5.0 * PI / 6.0).unwrap();

    // Swarm-best trace never increases, across several seeds.
    for seed in 0..5 {
        let params = solver::default_params(&geometry, seed);
        let result = solver::solve_tip_locus(&geometry, load, &params).unwrap();
        for pair in result.trace.windows(2) {
            assert!(pair[1] <= pair[0], "trace increased: {pair:?}");
        }
    }

    // Every evaluated position stays inside the search box.
    let params = solver::default_params(&geometry, 8);
    let seen = std::sync::Mutex::new(Vec::new());
    pso::run(
        |x: &[f64]| {
            seen.lock().unwrap().push(x.to_vec());
            solver::fitness(&geometry, load, TipState::new(x[0], x[1], x[2]))
        },
        &params,
    )
    .unwrap();
    for position in seen.into_inner().unwrap() {
        for (value, &(lower, upper)) in position.iter().zip(&params.bounds) {
            assert!((lower..=upper).contains(value));
        }
    }

    // Chord-length conservation at 1e-12 relative on a solved curve.
    let result = solver::solve_tip_locus(&geometry, load, &params).unwrap();
    let dl = geometry.unit_length();
    for pair in result.curve.points().windows(2) {
        let chord = ((pair[1].x - pair[0].x).powi(2) + (pair[1].y - pair[0].y).powi(2)).sqrt();
        assert!((chord - dl).abs() <= 1e-12 * dl);
    }

    // Fitness is non-negative everywhere sampled, and zero (to oracle
    // tolerance) at oracle solutions.
    let oracle_params = OracleParams::default();
    let mut rng = flexion::seed::substream_rng(2024, 0, 0);
    for _ in 0..500 {
        let guess = TipState::new(
            (flexion::seed::unit_uniform(&mut rng) - 0.5) * 2.0 * LENGTH,
            (flexion::seed::unit_uniform(&mut rng) - 0.5) * 2.0 * LENGTH,
            (flexion::seed::unit_uniform(&mut rng) - 0.5) * TAU,
        );
        assert!(solver::fitness(&geometry, load, guess) >= 0.0);
    }
    let reference = oracle::solve(&geometry, load, &oracle_params).unwrap();
    let residual_fitness = solver::fitness(&geometry, load, reference);
    assert!(residual_fitness <= 10.0 * oracle_params.residual_tol);

    // Adaptive inertia containment on randomized fitness triples.
    for _ in 0..2000 {
        let a = flexion::seed::unit_uniform(&mut rng) * 5.0;
        let b = flexion::seed::unit_uniform(&mut rng) * 5.0;
        let fit = flexion::seed::unit_uniform(&mut rng) * 10.0;
        let (fit_min, fit_ave) = if a <= b { (a, b) } else { (b, a) };
        let w = pso::adaptive_inertia(fit, fit_min, fit_ave, &params);
        assert!((0.6..=0.8).contains(&w));
    }

    // Byte-determinism of CLI outputs for a fixed seed.
    let dir = tempfile::tempdir().unwrap();
    let make_config = |out: &std::path::Path| {
        config::parse_config(&format!(
            r#"
seed = 5
out_dir = {out:?}

[geometry]
length = 180.0
width = 25.0
thickness = 1.15
youngs_modulus = 45.36

[[loads]]
label = "w10"
force = 4.998
angle_deg = -120.0
"#,
            out = out.display().to_string()
        ))
        .unwrap()
    };
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run::run_solve(&make_config(&out_a)).unwrap();
    run::run_solve(&make_config(&out_b)).unwrap();
    for name in ["summary.csv", "w10_curve.csv", "w10_trace.csv"] {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap(),
            "{name} not byte-identical"
        );
    }

    println!(
        "acceptance criterion 6 (property suite in lieu of unpublished bench data): PASS — monotone traces, bounded positions, chords at 1e-12, fitness >= 0 with oracle zero {residual_fitness:.1e}, inertia in [0.6, 0.8], byte-identical reruns"
    );
}

#[test]
fn criterion_7_nonuniform_width_plumbing() {
    let knots = table_knots();
    let widths = interpolate_width_profile(&knots, 200).unwrap();
    for (k, &knot) in knots.widths().iter().enumerate().skip(1) {
        assert_eq!(widths[20 * k - 1], knot, "knot {k} missed");
    }

    let degenerate = generate_random_widths(25e-3, 25e-3, 11, 42).unwrap();
    assert!(degenerate.widths().iter().all(|&w| w == 25e-3));

    let first = generate_random_widths(20e-3, 30e-3, 11, 42).unwrap();
    let second = generate_random_widths(20e-3, 30e-3, 11, 42).unwrap();
    assert_eq!(first, second, "same seed must reproduce knots bit-exactly");

    println!(
        "acceptance criterion 7 (non-uniform width plumbing): PASS — knots hit exactly, degenerate interval constant, seed-reproducible"
    );
}

fn sweep_config(out_dir: &std::path::Path, geometry_lines: &str) -> String {
    let mut text = format!(
        r#"seed = 12
retries = 3
out_dir = {out_dir:?}

[geometry]
length = 180.0
thickness = 1.15
youngs_modulus = 45.36
{geometry_lines}
"#,
        out_dir = out_dir.display().to_string()
    );
    for (angle_index, sixths) in ANGLES_SIXTHS.iter().enumerate() {
        for (weight_index, force) in weight_ladder().iter().enumerate() {
            write!(
                text,
                "\n[[loads]]\nlabel = \"phi{angle_index}-w{weight_index:02}\"\nforce = {force}\nangle_deg = {}\n",
                sixths * 30.0
            )
            .unwrap();
        }
    }
    for (arm_index, arm) in LEVER_ARMS_M.iter().enumerate() {
        for (weight_index, force) in weight_ladder().iter().enumerate() {
            write!(
                text,
                "\n[[loads]]\nlabel = \"arm{arm_index}-w{weight_index:02}\"\nforce = {force}\nangle_deg = -90.0\nlever_arm = {}\n",
                arm * 1e3
            )
            .unwrap();
        }
    }
    text
}

#[test]
fn criterion_8_full_bench_sweep_under_a_minute() {
    let dir = tempfile::tempdir().unwrap();
    let knot_list = TABLE_KNOTS_MM
        .iter()
        .map(|w| w.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let beams = [
        ("uniform", "width = 25.0".to_string()),
        ("nonuniform", format!("knot_widths = [{knot_list}]")),
    ];

    let started = Instant::now();
    let mut case_count = 0;
    for (name, geometry_lines) in beams {
        let out = dir.path().join(name);
        let config_path = dir.path().join(format!("{name}.toml"));
        fs::write(&config_path, sweep_config(&out, &geometry_lines)).unwrap();

        let result = Command::new(env!("CARGO_BIN_EXE_flexion"))
            .arg("solve")
            .arg(&config_path)
            .output()
            .unwrap();
        assert_eq!(
            result.status.code(),
            Some(0),
            "{name} sweep: {}",
            String::from_utf8_lossy(&result.stderr)
        );
        let summary = output::read_table(&out.join("summary.csv")).unwrap();
        assert_eq!(summary.rows.len(), 112);
        case_count += summary.rows.len();
        let error_column = summary.column("pso_vs_oracle_error").unwrap();
        for row in &summary.rows {
            let error = summary.f64_at(row, error_column).unwrap();
            assert!(error.is_finite() && error <= 2.0 * 0.005);
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "bench sweep took {elapsed:?}"
    );
    println!(
        "acceptance criterion 8 (full bench sweep): PASS — {case_count} cases with oracle in {elapsed:?}"
    );
}
