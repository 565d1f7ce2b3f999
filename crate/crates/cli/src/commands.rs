//! Subcommand drivers: build a run from its config, execute it, and
//! write the results under `<output root>/<subcommand>/<config stem>/`.
//!
//! Output files never embed paths, clocks, or machine state, so
//! rerunning the same config writes byte-identical files. Floats are
//! written with the shortest round-trip representation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sharpfront::{
    check_domination, classify_outcome, find_threshold, find_threshold_with, front_speed,
    indicator_ic, ratio_witness, simulate, solve_bump, BellReport, ClassifyCriteria, Error, Grid,
    NonlinearitySpec, Outcome, ProbeSet, SimParams, ThresholdResult, Trajectory,
};

use crate::config::{NonlinearityConfig, RunConfig, SweepCommand};

/// A command failure carrying its process exit code: 2 for config
/// problems, 3 for numerical failures (and I/O), 4 for non-convergence.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub fn config_failure(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn run_failure(e: Error) -> Failure {
    let code = match e {
        Error::Bracket(_) | Error::Convergence(_) => 4,
        _ => 3,
    };
    Failure { code, message: e.to_string() }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 3, message: format!("{}: {e}", path.display()) }
}

struct Run {
    spec: NonlinearitySpec,
    grid: Grid,
    params: SimParams,
}

/// Builds the library objects out of the config; every error here is a
/// config error.
fn prepare(config: &RunConfig) -> Result<Run, Failure> {
    let spec = config.nonlinearity.build().map_err(config_failure)?;
    let grid = config.grid.build().map_err(config_failure)?;
    let params = config.sim.build(grid, &spec).map_err(config_failure)?;
    Ok(Run { spec, grid, params })
}

fn command_dir(root: &Path, sub: &str, stem: &str) -> Result<PathBuf, Failure> {
    let dir = root.join(sub).join(stem);
    fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure { code: 3, message: format!("serializing {}: {e}", path.display()) })?;
    text.push('\n');
    write_text(path, &text)
}

fn probes_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,midpoint,sup");
    for level in &traj.r_levels {
        out.push_str(&format!(",r_{level}"));
    }
    if traj.ref_distance.is_some() {
        out.push_str(",ref_distance");
    }
    out.push('\n');
    for i in 0..traj.times.len() {
        out.push_str(&format!("{},{},{}", traj.times[i], traj.midpoint[i], traj.sup[i]));
        for series in &traj.radii {
            out.push_str(&format!(",{}", series[i]));
        }
        if let Some(d) = &traj.ref_distance {
            out.push_str(&format!(",{}", d[i]));
        }
        out.push('\n');
    }
    out
}

fn snapshots_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,value\n");
    for snap in &traj.snapshots {
        let grid = snap.grid();
        for (i, v) in snap.values().iter().enumerate() {
            out.push_str(&format!("{},{},{v}\n", snap.time(), grid.node(i)));
        }
    }
    out
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    config: &'a RunConfig,
    dt: f64,
    probe_every: usize,
    t_end: f64,
    midpoint_end: f64,
    sup_end: f64,
    mass_end: f64,
    boundary_max: f64,
    /// Verdict of the standard classifier, when one applies to this
    /// reaction; informational only.
    outcome: Option<Outcome>,
}

pub fn run_simulate(config: &RunConfig, root: &Path, stem: &str) -> Result<PathBuf, Failure> {
    let section = config
        .simulate
        .ok_or_else(|| config_failure("simulate needs a [simulate] section"))?;
    let run = prepare(config)?;
    let ic = indicator_ic(run.grid, section.ic_half_width, section.ic_height)
        .map_err(config_failure)?;
    let (probes, criteria) = match ClassifyCriteria::for_spec(&run.spec) {
        Ok(c) => (c.probe_set(run.grid).map_err(run_failure)?, Some(c)),
        // No standard criteria for this reaction (e.g. a zero-mean
        // bistable): record a bare radius probe and skip the verdict.
        Err(_) => (ProbeSet { r_levels: vec![0.5], reference: None }, None),
    };
    let traj = simulate(&ic, &run.spec, &run.params, &probes).map_err(run_failure)?;
    let outcome = criteria.and_then(|c| classify_outcome(&traj, &run.spec, &c).ok());

    let dir = command_dir(root, "simulate", stem)?;
    write_text(&dir.join("probes.csv"), &probes_csv(&traj))?;
    write_text(&dir.join("snapshots.csv"), &snapshots_csv(&traj))?;
    let summary = SimulateSummary {
        config,
        dt: run.params.dt,
        probe_every: run.params.probe_every,
        t_end: traj.t_end(),
        midpoint_end: *traj.midpoint.last().unwrap(),
        sup_end: *traj.sup.last().unwrap(),
        mass_end: traj.final_field.mass(),
        boundary_max: traj.boundary_max,
        outcome,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(dir)
}

/// Command-line values that take precedence over the `[threshold]`
/// section (`--t-max` over `[sim] t_max`).
#[derive(Default)]
pub struct ThresholdOverrides {
    pub l_min: Option<f64>,
    pub l_max: Option<f64>,
    pub gap_tol: Option<f64>,
    pub t_max: Option<f64>,
}

#[derive(Serialize)]
struct ThresholdSummary<'a> {
    config: &'a RunConfig,
    l_min: f64,
    l_max: f64,
    gap_tol: f64,
    t_max: f64,
    result: ThresholdResult,
}

fn verdict_name(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Extinction { .. } => "extinction",
        Outcome::Propagation { .. } => "propagation",
        Outcome::NearCritical { .. } => "near_critical",
        Outcome::Undetermined { .. } => "undetermined",
    }
}

fn verdict_time(outcome: &Outcome) -> f64 {
    match outcome {
        Outcome::Extinction { t_ext } => *t_ext,
        Outcome::Propagation { t_prop } => *t_prop,
        _ => f64::NAN,
    }
}

pub fn run_threshold(
    config: &RunConfig,
    over: &ThresholdOverrides,
    root: &Path,
    stem: &str,
) -> Result<PathBuf, Failure> {
    let section = config.threshold;
    let need = |flag: &str, v: Option<f64>| {
        v.ok_or_else(|| {
            config_failure(format!("threshold needs {flag} (a [threshold] section or the flag)"))
        })
    };
    let l_min = need("--L-min", over.l_min.or(section.map(|s| s.l_min)))?;
    let l_max = need("--L-max", over.l_max.or(section.map(|s| s.l_max)))?;
    let gap_tol = need("--gap-tol", over.gap_tol.or(section.map(|s| s.gap_tol)))?;

    let mut run = prepare(config)?;
    if let Some(t) = over.t_max {
        if !(t > 0.0 && t.is_finite()) {
            return Err(config_failure(format!("--t-max {t} must be positive")));
        }
        run.params.t_max = t;
    }
    if !(gap_tol > 0.0 && gap_tol.is_finite()) {
        return Err(config_failure(format!("gap_tol = {gap_tol} must be positive")));
    }
    if !(l_min >= 0.0 && l_min < l_max && l_max <= run.grid.half_width()) {
        return Err(config_failure(format!(
            "bracket [{l_min}, {l_max}] must satisfy 0 <= L_min < L_max <= {}",
            run.grid.half_width()
        )));
    }

    let dir = command_dir(root, "threshold", stem)?;
    let iter_dir = dir.join("iterates");
    fs::create_dir_all(&iter_dir).map_err(|e| io_failure(&iter_dir, e))?;
    let result = find_threshold_with(
        &run.spec,
        run.grid,
        &run.params,
        (l_min, l_max),
        gap_tol,
        |point, traj| {
            let path = iter_dir.join(format!("L_{}.csv", point.l));
            fs::write(&path, probes_csv(traj))
                .map_err(|e| Error::NumericalFault(format!("{}: {e}", path.display())))
        },
    )
    .map_err(run_failure)?;

    let mut trace = String::from("l,verdict,t_event,flagged,horizon\n");
    for p in &result.trace {
        trace.push_str(&format!(
            "{},{},{},{},{}\n",
            p.l,
            verdict_name(&p.outcome),
            verdict_time(&p.outcome),
            p.flagged,
            p.horizon
        ));
    }
    write_text(&dir.join("trace.csv"), &trace)?;
    let summary = ThresholdSummary {
        config,
        l_min,
        l_max,
        gap_tol,
        t_max: run.params.t_max,
        result,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(dir)
}

const DEFAULT_FRONT_TOL: f64 = 1e-6;
const DEFAULT_RESIDUAL_H: f64 = 0.01;

#[derive(Serialize)]
struct FrontSummary<'a> {
    config: &'a RunConfig,
    tol: f64,
    speed: f64,
    shoot_residual: f64,
    bracket: (f64, f64),
    iterations: usize,
    /// Sup of the traveling-wave equation residual over the table.
    profile_residual: f64,
}

pub fn run_front(config: &RunConfig, root: &Path, stem: &str) -> Result<PathBuf, Failure> {
    let tol = config.front.map_or(DEFAULT_FRONT_TOL, |s| s.tol);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(config_failure(format!("front tol = {tol} must be positive")));
    }
    let spec = config.nonlinearity.build().map_err(config_failure)?;
    if !spec.is_bistable() {
        return Err(config_failure("the front subcommand needs a bistable reaction"));
    }
    let front = front_speed(&spec, tol).map_err(run_failure)?;
    let profile_residual = front.residual_sup(&spec).map_err(run_failure)?;

    let dir = command_dir(root, "front", stem)?;
    let mut profile = String::from("xi,phi\n");
    for (xi, phi) in front.rows() {
        profile.push_str(&format!("{xi},{phi}\n"));
    }
    write_text(&dir.join("profile.csv"), &profile)?;
    let summary = FrontSummary {
        config,
        tol,
        speed: front.speed,
        shoot_residual: front.shoot_residual,
        bracket: front.bracket,
        iterations: front.iterations,
        profile_residual,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(dir)
}

#[derive(Serialize)]
struct BumpSummary<'a> {
    config: &'a RunConfig,
    theta2: f64,
    decay_rate: f64,
    table_radius: f64,
    /// Sup of |U'' + f(U)| on a uniform grid of the given spacing.
    residual_h: f64,
    residual_sup: f64,
    energy_defect: f64,
    shape: BellReport,
}

pub fn run_bump(config: &RunConfig, root: &Path, stem: &str) -> Result<PathBuf, Failure> {
    let residual_h = config.bump.map_or(DEFAULT_RESIDUAL_H, |s| s.residual_h);
    if !(residual_h > 0.0 && residual_h.is_finite()) {
        return Err(config_failure(format!("bump residual_h = {residual_h} must be positive")));
    }
    let spec = config.nonlinearity.build().map_err(config_failure)?;
    if !spec.is_bistable() {
        return Err(config_failure("the bump subcommand needs a bistable reaction"));
    }
    let bump = solve_bump(&spec).map_err(run_failure)?;
    let residual_sup = bump.residual_sup(&spec, residual_h).map_err(run_failure)?;
    let energy_defect = bump.energy_defect(&spec).map_err(run_failure)?;

    let dir = command_dir(root, "bump", stem)?;
    let mut profile = String::from("x,u,du\n");
    for (x, u, du) in bump.rows() {
        profile.push_str(&format!("{x},{u},{du}\n"));
    }
    write_text(&dir.join("profile.csv"), &profile)?;
    let summary = BumpSummary {
        config,
        theta2: bump.theta2(),
        decay_rate: bump.decay_rate(),
        table_radius: bump.table_radius(),
        residual_h,
        residual_sup,
        energy_defect,
        shape: bump.bell_report(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(dir)
}

#[derive(Serialize)]
struct Lemma22Summary<'a> {
    config: &'a RunConfig,
    /// The scan certified g(theta + eps (theta - theta1)) >=
    /// (1 + eps) f(theta) on the configured rectangle.
    domination: bool,
    omega_cap: f64,
    omega_initial: f64,
    omega_terminal: f64,
    samples: usize,
}

pub fn run_lemma22(config: &RunConfig, root: &Path, stem: &str) -> Result<PathBuf, Failure> {
    let section = config
        .lemma22
        .as_ref()
        .ok_or_else(|| config_failure("lemma22 needs a [lemma22] section"))?;
    let f_spec = config.nonlinearity.build().map_err(config_failure)?;
    let g_spec = section.g.build().map_err(config_failure)?;
    let grid = config.grid.build().map_err(config_failure)?;
    let mut sim = config.sim;
    if sim.dt.is_none() {
        // One lockstep dt must respect both reactions' monotonicity caps.
        sim.dt = Some(
            SimParams::default_dt(grid, &f_spec).min(SimParams::default_dt(grid, &g_spec)),
        );
    }
    let params = sim.build(grid, &f_spec).map_err(config_failure)?;
    if params.boundary != sharpfront::Boundary::DirichletZero {
        return Err(config_failure("lemma22 needs the dirichlet boundary"));
    }
    let ic_t = indicator_ic(grid, section.ic_t.half_width, section.ic_t.height)
        .map_err(config_failure)?;
    let ic_s = indicator_ic(grid, section.ic_s.half_width, section.ic_s.height)
        .map_err(config_failure)?;

    let domination =
        check_domination(&f_spec, &g_spec, section.theta1, section.eps1, section.theta_max)
            .map_err(config_failure)?;
    let witness = ratio_witness(
        &f_spec,
        &g_spec,
        &ic_t,
        &ic_s,
        section.theta1,
        section.eps1,
        section.theta_max,
        &params,
    )
    .map_err(run_failure)?;

    let dir = command_dir(root, "lemma22", stem)?;
    let mut omega = String::from("t,omega\n");
    for (t, w) in &witness.omega_series {
        omega.push_str(&format!("{t},{w}\n"));
    }
    write_text(&dir.join("omega.csv"), &omega)?;
    let summary = Lemma22Summary {
        config,
        domination,
        omega_cap: 1.0 + section.eps1,
        omega_initial: witness.omega_series.first().unwrap().1,
        omega_terminal: witness.terminal(),
        samples: witness.omega_series.len(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(dir)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    config: &'a RunConfig,
    rows: usize,
}

fn sweep_header(command: SweepCommand, parameter: &str) -> String {
    match command {
        SweepCommand::Front => format!("{parameter},speed,shoot_residual,iterations\n"),
        SweepCommand::Bump => format!("{parameter},theta2,decay_rate,table_radius\n"),
        SweepCommand::Threshold => {
            format!("{parameter},l_lo,l_hi,l0_estimate,sharpness_gap,hair_trigger\n")
        }
    }
}

fn at_value(value: f64, e: Error) -> Failure {
    let mut failure = run_failure(e);
    failure.message = format!("sweep value {value}: {}", failure.message);
    failure
}

fn sweep_cell(
    config: &RunConfig,
    command: SweepCommand,
    value: f64,
    patched: &NonlinearityConfig,
) -> Result<String, Failure> {
    let spec = patched.build().map_err(config_failure)?;
    match command {
        SweepCommand::Front => {
            let tol = config.front.map_or(DEFAULT_FRONT_TOL, |s| s.tol);
            let front = front_speed(&spec, tol).map_err(|e| at_value(value, e))?;
            Ok(format!("{value},{},{},{}\n", front.speed, front.shoot_residual, front.iterations))
        }
        SweepCommand::Bump => {
            let bump = solve_bump(&spec).map_err(|e| at_value(value, e))?;
            Ok(format!(
                "{value},{},{},{}\n",
                bump.theta2(),
                bump.decay_rate(),
                bump.table_radius()
            ))
        }
        SweepCommand::Threshold => {
            let section = config.threshold.expect("checked by run_sweep");
            let grid = config.grid.build().map_err(config_failure)?;
            let params = config.sim.build(grid, &spec).map_err(config_failure)?;
            let result =
                find_threshold(&spec, grid, &params, (section.l_min, section.l_max), section.gap_tol)
                    .map_err(|e| at_value(value, e))?;
            Ok(format!(
                "{value},{},{},{},{},{}\n",
                result.l_lo,
                result.l_hi,
                result.l0_estimate,
                result.sharpness_gap,
                result.hair_trigger
            ))
        }
    }
}

pub fn run_sweep(
    config: &RunConfig,
    jobs: Option<usize>,
    root: &Path,
    stem: &str,
) -> Result<PathBuf, Failure> {
    let section = config
        .sweep
        .as_ref()
        .ok_or_else(|| config_failure("sweep needs a [sweep] section"))?;
    if section.values.is_empty() {
        return Err(config_failure("sweep.values must not be empty"));
    }
    if section.command == SweepCommand::Threshold && config.threshold.is_none() {
        return Err(config_failure("a threshold sweep needs a [threshold] section"));
    }
    // Patch and validate every cell before any work runs, so a bad value
    // is a config error rather than a mid-sweep surprise.
    let mut cells = Vec::with_capacity(section.values.len());
    for &value in &section.values {
        let mut patched = config.nonlinearity.clone();
        patched.set_parameter(&section.parameter, value).map_err(config_failure)?;
        patched
            .build()
            .map_err(|e| config_failure(format!("sweep value {value}: {e}")))?;
        if matches!(section.command, SweepCommand::Front | SweepCommand::Bump) {
            let spec = patched.build().map_err(config_failure)?;
            if !spec.is_bistable() {
                return Err(config_failure(format!(
                    "sweep value {value}: this command needs a bistable reaction"
                )));
            }
        }
        cells.push((value, patched));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure { code: 3, message: format!("thread pool: {e}") })?;
    let rows: Vec<Result<String, Failure>> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|(value, patched)| sweep_cell(config, section.command, *value, patched))
            .collect()
    });

    let mut csv = sweep_header(section.command, &section.parameter);
    for row in rows {
        csv.push_str(&row?);
    }
    let dir = command_dir(root, "sweep", stem)?;
    write_text(&dir.join("sweep.csv"), &csv)?;
    let summary = SweepSummary { config, rows: cells.len() };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(dir)
}

#[derive(Serialize)]
struct CheckRow {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct CheckSummary<'a> {
    config: &'a RunConfig,
    passed: bool,
    checks: Vec<CheckRow>,
}

type CheckOutcome = std::result::Result<String, String>;

pub fn run_check(config: &RunConfig, root: &Path, stem: &str) -> Result<PathBuf, Failure> {
    let run = prepare(config)?;
    let spec = &run.spec;
    let c = spec.lipschitz_constant();
    let scale = c.max(1.0);
    let mut checks: Vec<CheckRow> = Vec::new();
    let push = |name: &'static str, outcome: CheckOutcome, checks: &mut Vec<CheckRow>| {
        match outcome {
            Ok(detail) => checks.push(CheckRow { name, passed: true, detail }),
            Err(detail) => checks.push(CheckRow { name, passed: false, detail }),
        }
    };

    push(
        "sign_pattern",
        match spec.check_sign_pattern() {
            Ok(report) => Ok(format!(
                "{:?} verified over {} samples, f in [{}, {}]",
                report.pattern, report.samples, report.min_f, report.max_f
            )),
            Err(e) => Err(e.to_string()),
        },
        &mut checks,
    );

    push(
        "rest_states",
        (|| -> CheckOutcome {
            let f0 = spec.eval_clamped(0.0);
            let f1 = spec.eval_clamped(1.0);
            if f0 != 0.0 || f1 != 0.0 {
                return Err(format!("f(0) = {f0}, f(1) = {f1}; both must vanish"));
            }
            let d0 = spec.derivative_at_zero();
            let ok = match spec.declared_pattern() {
                sharpfront::SignPattern::Bistable { .. } => d0 < 0.0,
                sharpfront::SignPattern::PositiveInterior => d0 >= 0.0,
                _ => d0 == 0.0,
            };
            if ok {
                Ok(format!("f(0) = f(1) = 0, f'(0) = {d0} consistent with the pattern"))
            } else {
                Err(format!("f'(0) = {d0} contradicts the declared pattern"))
            }
        })(),
        &mut checks,
    );

    push(
        "potential_derivative",
        (|| -> CheckOutcome {
            let h = 1e-4;
            // Centered differences lose an O(c h) term at kinks of f, so
            // the slack carries it.
            let slack = 1e-6 * scale + 0.5 * c * h;
            let mut worst = (0.0f64, 0.0f64);
            for k in 1..20 {
                let t = 0.05 * k as f64;
                let num = (spec.potential(t + h).map_err(|e| e.to_string())?
                    - spec.potential(t - h).map_err(|e| e.to_string())?)
                    / (2.0 * h);
                let err = (num - spec.eval_f(t).map_err(|e| e.to_string())?).abs();
                if err > worst.1 {
                    worst = (t, err);
                }
            }
            if worst.1 <= slack {
                Ok(format!("max |dF/dtheta - f| = {} at theta = {} (slack {slack})", worst.1, worst.0))
            } else {
                Err(format!("|dF/dtheta - f| = {} at theta = {} exceeds {slack}", worst.1, worst.0))
            }
        })(),
        &mut checks,
    );

    if spec.is_bistable() {
        push(
            "balance_root",
            (|| -> CheckOutcome {
                let theta2 = spec.theta2().map_err(|e| e.to_string())?;
                let pot = spec.potential(theta2).map_err(|e| e.to_string())?;
                if pot.abs() <= 1e-10 * scale {
                    Ok(format!("theta2 = {theta2}, potential there {pot}"))
                } else {
                    Err(format!("potential at theta2 = {theta2} is {pot}, not ~0"))
                }
            })(),
            &mut checks,
        );
    }

    push(
        "lipschitz_bound",
        (|| -> CheckOutcome {
            let n = 2000usize;
            let mut max_slope = 0.0f64;
            let mut max_abs = 0.0f64;
            let mut prev = spec.eval_clamped(0.0);
            for i in 1..=n {
                let v = spec.eval_clamped(i as f64 / n as f64);
                max_slope = max_slope.max((v - prev).abs() * n as f64);
                max_abs = max_abs.max(v.abs());
                prev = v;
            }
            if max_abs <= c + 1e-12 && max_slope <= c * (1.0 + 1e-6) + 1e-12 {
                Ok(format!("sup |f| = {max_abs}, max sampled slope {max_slope}, bound {c}"))
            } else {
                Err(format!(
                    "sup |f| = {max_abs} or sampled slope {max_slope} exceeds the bound {c}"
                ))
            }
        })(),
        &mut checks,
    );

    push(
        "dynamics_invariants",
        (|| -> CheckOutcome {
            let ic = indicator_ic(run.grid, 0.5 * run.grid.half_width(), 1.0)
                .map_err(|e| e.to_string())?;
            let mut params = run.params;
            params.t_max = run.params.t_max.min(1.0);
            params.snapshot_every = 0;
            let probes = ProbeSet { r_levels: Vec::new(), reference: None };
            let traj = simulate(&ic, spec, &params, &probes).map_err(|e| e.to_string())?;
            let field = &traj.final_field;
            let lo = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = field.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sym = field.symmetry_defect();
            if lo < -1e-12 || hi > 1.0 + 1e-12 {
                return Err(format!("range [{lo}, {hi}] escapes [0, 1]"));
            }
            if sym > 1e-12 {
                return Err(format!("symmetry defect {sym} for symmetric data"));
            }
            if spec.amplitude() == 0.0 {
                let decreasing = traj.sup.windows(2).all(|w| w[1] < w[0]);
                if !decreasing {
                    return Err("pure diffusion must decrease the sup strictly".into());
                }
            }
            Ok(format!(
                "range [{lo}, {hi}], symmetry defect {sym} after t = {}",
                traj.t_end()
            ))
        })(),
        &mut checks,
    );

    let passed = checks.iter().all(|row| row.passed);
    let dir = command_dir(root, "check", stem)?;
    let summary = CheckSummary { config, passed, checks };
    write_json(&dir.join("summary.json"), &summary)?;
    if passed {
        Ok(dir)
    } else {
        let names: Vec<&str> = summary
            .checks
            .iter()
            .filter(|row| !row.passed)
            .map(|row| row.name)
            .collect();
        Err(Failure {
            code: 3,
            message: format!(
                "check failed ({}); details in {}",
                names.join(", "),
                dir.join("summary.json").display()
            ),
        })
    }
}
