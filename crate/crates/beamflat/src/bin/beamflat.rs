//! Command-line front end: generating-function tables, open-loop motion
//! plans, finite-difference verification runs, eigenvalue computation and the
//! end-to-end `validate` pipeline for the two reference transfer examples.
//!
//! Every subcommand exits nonzero on any failed invariant and prints the
//! identifier of the failing check. `BEAMFLAT_THREADS` caps worker
//! parallelism.

use beamflat::gevrey::TrajectoryGen;
use beamflat::model::{h2_norm, l2_norm, tilde_z_norm};
use beamflat::planner::{plan_transfer, steady_state, Plan};
use beamflat::sim::{energy_audit, simulate, SimConfig};
use beamflat::spectral::{find_eigenvalues, required_truncation};
use beamflat::{compute_gen_tables, io, BeamError, BeamParams, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// Reference data files; the embedded copies keep the binary self-contained
// while the files stay the single source of truth.
const DEFAULT_PARAMS: &str = include_str!("../../configs/beam.json");
const EX1_Y0: &str = include_str!("../../configs/example1_y0.json");
const EX1_YT: &str = include_str!("../../configs/example1_yT.json");
const EX2_Y0: &str = include_str!("../../configs/example2_y0.json");
const EX2_YT: &str = include_str!("../../configs/example2_yT.json");

#[derive(Parser)]
#[command(name = "beamflat", version, about = "Flatness-based motion planning and verification for a non-uniform cantilever beam with tip mass")]
struct Cli {
    /// Beam parameter file (JSON); defaults to the built-in reference beam
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (genfun/plan/eigen) or directory (simulate/validate)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the generating-function tables and their boundary values
    Genfun {
        /// Number of levels k = 0..K
        #[arg(long = "K", default_value_t = 12)]
        k: usize,
        /// Also embed the full g_k, h_k grid tables in the JSON
        #[arg(long)]
        full: bool,
    },
    /// Build an open-loop transfer plan and export the sampled control
    Plan {
        /// Built-in reference transfer (1 or 2)
        #[arg(long, conflicts_with = "traj")]
        example: Option<u8>,
        /// Two trajectory-generator JSON files: initial y0 and final yT
        #[arg(long, num_args = 2)]
        traj: Vec<PathBuf>,
        /// Transfer horizon in seconds
        #[arg(long = "T", default_value_t = 3.0)]
        t_horizon: f64,
        /// Gevrey order of the blend, in (1, 2)
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        /// Series truncation level
        #[arg(long = "N", default_value_t = 10)]
        n: usize,
    },
    /// Integrate the beam under a control input with the finite-difference scheme
    Simulate {
        /// plan.csv produced by the plan subcommand (t, f, y columns)
        #[arg(long, conflicts_with = "input")]
        plan: Option<PathBuf>,
        /// Generic sampled input (t, f columns, uniform grid)
        #[arg(long)]
        input: Option<PathBuf>,
        /// Initial state CSV; defaults to the rest configuration at f(0)
        #[arg(long)]
        z0: Option<PathBuf>,
        #[arg(long, default_value_t = 300)]
        nx: usize,
        #[arg(long, default_value_t = 2.5e-4)]
        dt: f64,
        /// End time; defaults to the input's last sample time
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Skip the (large) field.csv export
        #[arg(long)]
        no_field: bool,
    },
    /// Locate imaginary-axis eigenvalues and their mode shapes
    Eigen {
        #[arg(long = "omega-max", default_value_t = 2000.0)]
        omega_max: f64,
        /// Maximum number of modes
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Also write modes.csv next to the spectrum
        #[arg(long)]
        modes: bool,
    },
    /// End-to-end reproduction of a reference example with pass/fail report
    Validate {
        /// Reference transfer to reproduce (1 or 2)
        #[arg(long)]
        example: u8,
        #[arg(long = "N", default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 300)]
        nx: usize,
        #[arg(long, default_value_t = 2.5e-4)]
        dt: f64,
        /// Recorded in the report for reproducibility of seeded runs
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("BEAMFLAT_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("FAIL env/BEAMFLAT_THREADS: not a positive integer: {threads:?}");
                return ExitCode::FAILURE;
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((check, err)) => {
            eprintln!("FAIL {check}: {err}");
            ExitCode::FAILURE
        }
    }
}

type CmdResult = std::result::Result<(), (String, BeamError)>;

fn at(check: &str) -> impl Fn(BeamError) -> (String, BeamError) + '_ {
    move |e| (check.to_string(), e)
}

fn load_params(cli: &Cli) -> Result<BeamParams> {
    match &cli.config {
        Some(path) => io::read_params(path),
        None => BeamParams::from_json(DEFAULT_PARAMS),
    }
}

fn example_trajectories(example: u8) -> Result<(TrajectoryGen, TrajectoryGen)> {
    let (y0, yt) = match example {
        1 => (EX1_Y0, EX1_YT),
        2 => (EX2_Y0, EX2_YT),
        other => {
            return Err(BeamError::InvalidParameter(format!(
                "example must be 1 or 2, got {other}"
            )))
        }
    };
    Ok((serde_json::from_str(y0)?, serde_json::from_str(yt)?))
}

fn read_traj(path: &Path) -> Result<TrajectoryGen> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::Genfun { k, full } => cmd_genfun(cli, *k, *full),
        Cmd::Plan {
            example,
            traj,
            t_horizon,
            s,
            n,
        } => cmd_plan(cli, *example, traj, *t_horizon, *s, *n),
        Cmd::Simulate {
            plan,
            input,
            z0,
            nx,
            dt,
            t_end,
            no_field,
        } => cmd_simulate(cli, plan.as_deref(), input.as_deref(), z0.as_deref(), *nx, *dt, *t_end, *no_field),
        Cmd::Eigen { omega_max, n, modes } => cmd_eigen(cli, *omega_max, *n, *modes),
        Cmd::Validate {
            example,
            n,
            nx,
            dt,
            seed,
        } => cmd_validate(cli, *example, *n, *nx, *dt, *seed),
    }
}

fn cmd_genfun(cli: &Cli, k: usize, full: bool) -> CmdResult {
    let params = load_params(cli).map_err(at("genfun/params"))?;
    let table =
        compute_gen_tables(&params, k, params.grid_n).map_err(at("genfun/tables"))?;
    if !beamflat::genfun::sign_alternation_holds(&table) {
        return Err((
            "genfun/sign-alternation".into(),
            BeamError::InvalidParameter("(-1)^j g_{j,x}(L) > 0 violated".into()),
        ));
    }
    let margin = beamflat::genfun::envelope_margin(&table, &params);
    if margin > 0.0 {
        return Err((
            "genfun/envelope".into(),
            BeamError::InvalidParameter(format!(
                "factorial envelope exceeded (log-margin {margin:.3e})"
            )),
        ));
    }
    if cli.verbose {
        eprintln!("envelope log-margin {margin:.3} (negative is inside the bound)");
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("gentable.json"));
    if full {
        let mut doc = json!({
            "K": table.k_max,
            "grid_n": table.grid_n,
            "gL": table.g_l,
            "gxL": table.gx_l,
            "hL": table.h_l,
            "hxL": table.hx_l,
        });
        let g: Vec<&[f64]> = table.g.iter().map(|lv| lv.table(0)).collect();
        let h: Vec<&[f64]> = table.h.iter().map(|lv| lv.table(0)).collect();
        doc["g"] = json!(g);
        doc["h"] = json!(h);
        io::write_json(&out, &doc).map_err(at("genfun/write"))?;
    } else {
        io::write_gentable_json(&out, &table).map_err(at("genfun/write"))?;
    }
    Ok(())
}

fn build_plan(
    cli: &Cli,
    example: Option<u8>,
    traj: &[PathBuf],
    t_horizon: f64,
    s: f64,
    n: usize,
) -> std::result::Result<Plan, (String, BeamError)> {
    let params = load_params(cli).map_err(at("plan/params"))?;
    let (y0, yt) = match (example, traj) {
        (Some(e), _) => example_trajectories(e).map_err(at("plan/example"))?,
        (None, [a, b]) => (
            read_traj(a).map_err(at("plan/traj"))?,
            read_traj(b).map_err(at("plan/traj"))?,
        ),
        _ => {
            return Err((
                "plan/args".into(),
                BeamError::InvalidParameter(
                    "need --example 1|2 or --traj y0.json yT.json".into(),
                ),
            ))
        }
    };
    plan_transfer(&params, y0, yt, t_horizon, s, n).map_err(at("plan/build"))
}

fn cmd_plan(
    cli: &Cli,
    example: Option<u8>,
    traj: &[PathBuf],
    t_horizon: f64,
    s: f64,
    n: usize,
) -> CmdResult {
    let plan = build_plan(cli, example, traj, t_horizon, s, n)?;
    if cli.verbose && n >= 5 {
        let gap = plan.control_l2_gap(n - 2, n).map_err(at("plan/gap"))?;
        eprintln!("L2 gap between f^{} and f^{n}: {gap:.3e}", n - 2);
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("plan.csv"));
    io::write_plan_csv(&out, &plan).map_err(at("plan/write"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    plan: Option<&Path>,
    input: Option<&Path>,
    z0: Option<&Path>,
    nx: usize,
    dt: f64,
    t_end: Option<f64>,
    no_field: bool,
) -> CmdResult {
    let params = load_params(cli).map_err(at("simulate/params"))?;
    let path = plan.or(input).ok_or_else(|| {
        (
            "simulate/args".into(),
            BeamError::InvalidParameter("need --plan plan.csv or --input f.csv".into()),
        )
    })?;
    let signal = io::read_input_csv(path).map_err(at("simulate/input"))?;
    let t_end = t_end.unwrap_or(signal.t_end);
    let state0 = match z0 {
        Some(p) => io::read_state_csv(p).map_err(at("simulate/z0"))?,
        None => {
            use beamflat::sim::InputSignal;
            steady_state(&params, signal.value(0.0))
        }
    };
    let cfg = SimConfig {
        nx,
        dt,
        t_end,
        snapshot_every: 0.01,
    };
    let result = simulate(&params, &state0, &signal, &cfg).map_err(at("simulate/run"))?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("result"));
    std::fs::create_dir_all(&dir).map_err(|e| at("simulate/outdir")(e.into()))?;
    io::write_tip_csv(&dir.join("tip.csv"), &result).map_err(at("simulate/write"))?;
    if !no_field {
        io::write_field_csv(&dir.join("field.csv"), &result).map_err(at("simulate/write"))?;
    }
    io::write_state_csv(&dir.join("terminal.csv"), &result.terminal)
        .map_err(at("simulate/write"))?;
    let constant = result
        .f_at_snapshots
        .iter()
        .all(|&f| f == result.f_at_snapshots[0]);
    let drift = if constant {
        Some(energy_audit(&result).map_err(at("simulate/audit"))?)
    } else {
        None
    };
    let mut shifted = result.terminal.clone();
    let f_t = *result.f_at_snapshots.last().unwrap();
    for u in shifted.u.values.iter_mut() {
        *u -= f_t;
    }
    let report = json!({
        "schema": io::REPORT_SCHEMA,
        "nx": nx,
        "dt": dt,
        "t_end": t_end,
        "terminal": {
            "h2_norm_w": h2_norm(&result.terminal.u),
            "l2_norm_wt": l2_norm(&result.terminal.v),
            "tilde_z_norm_shifted": tilde_z_norm(&shifted, &params).ok(),
        },
        "energy_drift": drift,
        "compatibility_residual": (result.f_at_snapshots[0] - state0.u_at_right()).abs(),
    });
    io::write_json(&dir.join("report.json"), &report).map_err(at("simulate/write"))?;
    if cli.verbose {
        eprintln!("terminal H2 {:.3e}", h2_norm(&result.terminal.u));
    }
    Ok(())
}

fn cmd_eigen(cli: &Cli, omega_max: f64, n: usize, modes: bool) -> CmdResult {
    let params = load_params(cli).map_err(at("eigen/params"))?;
    let k = required_truncation(&params, omega_max).max(12);
    let table = compute_gen_tables(&params, k, 1024).map_err(at("eigen/tables"))?;
    let spectrum =
        find_eigenvalues(&table, &params, omega_max, n).map_err(at("eigen/search"))?;
    for (i, p) in spectrum.pairs.iter().enumerate() {
        let worst = p.residual_u_l.max(p.residual_ux_l);
        if worst > 1e-6 {
            return Err((
                format!("eigen/residual-mode-{}", i + 1),
                BeamError::InvalidParameter(format!(
                    "clamped-end residual {worst:.3e} exceeds 1e-6 at omega = {:.6e}",
                    p.omega
                )),
            ));
        }
        if cli.verbose {
            eprintln!(
                "mode {}: omega {:.9e}, u0 {:.6e}, residuals ({:.2e}, {:.2e})",
                i + 1,
                p.omega,
                p.u0,
                p.residual_u_l,
                p.residual_ux_l
            );
        }
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("spectrum.json"));
    io::write_spectrum_json(&out, &spectrum).map_err(at("eigen/write"))?;
    if modes {
        let sibling = out.with_file_name("modes.csv");
        io::write_modes_csv(&sibling, &spectrum).map_err(at("eigen/write"))?;
    }
    Ok(())
}

struct Check {
    id: &'static str,
    value: f64,
    bound: f64,
}

fn cmd_validate(cli: &Cli, example: u8, n: usize, nx: usize, dt: f64, seed: u64) -> CmdResult {
    let params = load_params(cli).map_err(at("validate/params"))?;
    let bounds: [f64; 4] = match example {
        1 => [9e-7, 3e-13, 4.1e-3, 8.1e-4],
        2 => [7e-6, 3e-12, 2.3e-2, 1.6e-2],
        other => {
            return Err((
                "validate/example".into(),
                BeamError::InvalidParameter(format!("example must be 1 or 2, got {other}")),
            ))
        }
    };
    let t_horizon = 3.0;
    let plan = build_plan(cli, Some(example), &[], t_horizon, 1.5, n)?;
    let gap53 = plan.control_l2_gap(3, 5).map_err(at("validate/plan-gap"))?;
    let gap105 = plan
        .control_l2_gap(5, n.min(10))
        .map_err(at("validate/plan-gap"))?;
    if cli.verbose {
        eprintln!("|f5-f3| = {gap53:.3e}, |f10-f5| = {gap105:.3e}");
    }

    // Initial state induced by y0: the rest configuration for a constant
    // generator, otherwise the planner's series state at t = 0.
    let (y0_gen, _) = example_trajectories(example).map_err(at("validate/example"))?;
    let z0 = match &y0_gen {
        TrajectoryGen::Constant { c } => steady_state(&params, *c),
        _ => plan.induced_state(0.0, nx).map_err(at("validate/z0"))?,
    };
    let cfg = SimConfig {
        nx,
        dt,
        t_end: t_horizon,
        snapshot_every: 0.01,
    };
    let result = simulate(&params, &z0, &plan, &cfg).map_err(at("validate/simulate"))?;
    let h2_w = h2_norm(&result.terminal.u);
    let l2_wt = l2_norm(&result.terminal.v);

    let checks = [
        Check { id: "f5_f3", value: gap53, bound: bounds[0] },
        Check { id: "f10_f5", value: gap105, bound: bounds[1] },
        Check { id: "terminal_h2", value: h2_w, bound: bounds[2] },
        Check { id: "terminal_l2", value: l2_wt, bound: bounds[3] },
    ];
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| at("validate/outdir")(e.into()))?;
    let report = json!({
        "schema": io::REPORT_SCHEMA,
        "example": example,
        "seed": seed,
        "N": n,
        "nx": nx,
        "dt": dt,
        "checks": checks
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "value": c.value,
                    "bound": c.bound,
                    "pass": c.value < c.bound,
                })
            })
            .collect::<Vec<_>>(),
        "pass": checks.iter().all(|c| c.value < c.bound),
    });
    io::write_json(&dir.join("report.json"), &report).map_err(at("validate/write"))?;
    for c in &checks {
        let verdict = if c.value < c.bound { "PASS" } else { "FAIL" };
        println!(
            "{verdict} example{example}/{}: {:.6e} (bound {:.1e})",
            c.id, c.value, c.bound
        );
    }
    if let Some(c) = checks.iter().find(|c| !(c.value < c.bound)) {
        return Err((
            format!("validate/example{example}/{}", c.id),
            BeamError::InvalidParameter(format!(
                "value {:.6e} exceeds bound {:.1e}",
                c.value, c.bound
            )),
        ));
    }
    Ok(())
}
