//! Acceptance gate: one test per published criterion, each printing a
//! PASS/FAIL line with the measured value against the stated bound.
//! Run with `cargo test --test acceptance -- --nocapture` to see every line.

use beamflat::genfun::{envelope_constants, envelope_margin, sign_alternation_holds};
use beamflat::gevrey::{endpoint_match, BumpSpec, TrajectoryGen};
use beamflat::model::{h2_norm, l2_norm, z_norm};
use beamflat::planner::{plan_transfer, steady_state, Plan};
use beamflat::sim::{energy_audit, simulate, ConstantInput, SimConfig};
use beamflat::spectral::{
    char_fn, find_eigenvalues, project_state, required_truncation, shooting_eigenfrequencies,
};
use beamflat::{compute_gen_tables, BeamParams, BeamState, GridFunction, Profile};
use num_complex::Complex64;

fn reference_params() -> BeamParams {
    BeamParams::from_json(include_str!("../configs/beam.json")).unwrap()
}

fn example_gens(example: u8) -> (TrajectoryGen, TrajectoryGen) {
    let zero = TrajectoryGen::Constant { c: 0.0 };
    match example {
        1 => (TrajectoryGen::Constant { c: 0.3 }, zero),
        2 => (
            TrajectoryGen::Sum {
                terms: vec![
                    TrajectoryGen::Constant { c: 1.0 },
                    TrajectoryGen::PolyExp {
                        coeffs: vec![0.0, 0.0, 10.0],
                        rate: -2.0,
                    },
                ],
            },
            zero,
        ),
        _ => unreachable!(),
    }
}

fn example_plan(example: u8) -> Plan {
    let p = reference_params();
    let (y0, yt) = example_gens(example);
    plan_transfer(&p, y0, yt, 3.0, 1.5, 10).unwrap()
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[test]
fn criterion_1_example1_truncation_decay() {
    let plan = example_plan(1);
    let g53 = plan.control_l2_gap(3, 5).unwrap();
    let g105 = plan.control_l2_gap(5, 10).unwrap();
    let ok = g53 < 9e-7 && g105 < 3e-13;
    println!(
        "criterion 1 example-1 truncation decay: {} (|f5-f3| = {g53:.3e} < 9e-7, |f10-f5| = {g105:.3e} < 3e-13)",
        verdict(ok)
    );
    assert!(ok);
}

#[test]
fn criterion_2_example1_terminal_state() {
    let p = reference_params();
    let plan = example_plan(1);
    let z0 = steady_state(&p, 0.3);
    let cfg = SimConfig::defaults(3.0);
    let r = simulate(&p, &z0, &plan, &cfg).unwrap();
    let h2 = h2_norm(&r.terminal.u);
    let l2 = l2_norm(&r.terminal.v);
    let ok = h2 < 4.1e-3 && l2 < 8.1e-4;
    println!(
        "criterion 2 example-1 terminal state: {} (H2 = {h2:.3e} < 4.1e-3, L2 = {l2:.3e} < 8.1e-4)",
        verdict(ok)
    );
    assert!(ok);
}

#[test]
fn criterion_3_example2_analogs() {
    let p = reference_params();
    let plan = example_plan(2);
    let g53 = plan.control_l2_gap(3, 5).unwrap();
    let g105 = plan.control_l2_gap(5, 10).unwrap();
    let z0 = plan.induced_state(0.0, 300).unwrap();
    let cfg = SimConfig::defaults(3.0);
    let r = simulate(&p, &z0, &plan, &cfg).unwrap();
    let h2 = h2_norm(&r.terminal.u);
    let l2 = l2_norm(&r.terminal.v);
    let ok = g53 < 7e-6 && g105 < 3e-12 && h2 < 2.3e-2 && l2 < 1.6e-2;
    println!(
        "criterion 3 example-2 analogs: {} (|f5-f3| = {g53:.3e} < 7e-6, |f10-f5| = {g105:.3e} < 3e-12, H2 = {h2:.3e} < 2.3e-2, L2 = {l2:.3e} < 1.6e-2)",
        verdict(ok)
    );
    assert!(ok);
}

#[test]
fn criterion_4_generating_function_suite() {
    let p = reference_params();
    let (r1, r2) = envelope_constants(&p);
    let t = compute_gen_tables(&p, 12, 1024).unwrap();
    let exact_levels = t.g[0].f.iter().all(|&v| v == 1.0)
        && (0..=t.grid_n).all(|i| t.h[0].f[i] == i as f64 * t.h_step());
    let margin = envelope_margin(&t, &p);
    let signs = sign_alternation_holds(&t);

    // constant-coefficient closed forms, independent of the cascade
    let uniform = |m: f64, j: f64| BeamParams {
        length: 1.0,
        tip_mass: m.max(1e-300),
        tip_inertia: j.max(1e-300),
        rho: Profile::Affine { a: 1.0, b: 0.0 },
        ei: Profile::Affine { a: 1.0, b: 0.0 },
        grid_n: 512,
    };
    let (m, j) = (0.7, 0.3);
    let tu = compute_gen_tables(&uniform(m, j), 2, 1024).unwrap();
    let mut oracle_ok = true;
    for i in (0..=tu.grid_n).step_by(32) {
        let x = i as f64 * tu.h_step();
        let g1 = -x.powi(4) / 24.0 - m * x.powi(3) / 6.0;
        let h1 = -x.powi(5) / 120.0 + j * x * x / 2.0;
        oracle_ok &= (tu.g[1].f[i] - g1).abs() <= 1e-8 * g1.abs().max(1e-12);
        oracle_ok &= (tu.h[1].f[i] - h1).abs() <= 1e-8 * h1.abs().max(1e-12);
    }
    let t0 = compute_gen_tables(&uniform(0.0, 0.0), 2, 1024).unwrap();
    oracle_ok &= (t0.g_l[2] - 1.0 / 40320.0).abs() <= 1e-8 / 40320.0;
    oracle_ok &= (t0.h_l[2] - 1.0 / 362880.0).abs() <= 1e-8 / 362880.0;

    let consts_ok = (r1 - 2.3276).abs() < 1e-4 && (r2 - 0.9492).abs() < 5e-4;
    let ok = exact_levels && margin < 0.0 && signs && oracle_ok && consts_ok;
    println!(
        "criterion 4 generating functions: {} (R1 = {r1:.6}, R2 = {r2:.6}, envelope log-margin = {margin:.3}, sign alternation = {signs}, oracle match = {oracle_ok})",
        verdict(ok)
    );
    assert!(ok);
}

#[test]
fn criterion_5_gevrey_endpoint_suite() {
    let spec = BumpSpec::new(3.0, 1.5).unwrap();
    let j0 = spec.psi_jet(0.0, 24).unwrap();
    let jt = spec.psi_jet(3.0, 24).unwrap();
    let jm = spec.psi_jet(1.5, 0).unwrap();
    let mut ok = j0.value() == 1.0 && jt.value() == 0.0 && jm.value() == 0.5;
    for n in 1..=24 {
        ok &= j0.deriv(n).unwrap() == 0.0 && jt.deriv(n).unwrap() == 0.0;
    }
    let mut match_ok = true;
    for ex in [1u8, 2] {
        let (y0, yt) = example_gens(ex);
        match_ok &= endpoint_match(&y0, &yt, &spec, 8).unwrap() == 0.0;
    }
    println!(
        "criterion 5 Gevrey endpoints: {} (psi endpoint values exact = {ok}, endpoint jets match to order 8 = {match_ok})",
        verdict(ok && match_ok)
    );
    assert!(ok && match_ok);
}

// Average-acceleration Newmark conserves the scheme's own quadratic energy
// exactly; the audited drift is the dt-independent gap between that discrete
// quadratic and the continuum energy. The magnitude bound below holds; the
// expected ~4x reduction under dt halving does not materialize for this
// integrator (measured ratio ~1), and this test records that honestly.
#[test]
fn criterion_6_conservation_drift() {
    let p = reference_params();
    let nx = 300;
    let mut z0 = BeamState::zero(p.length, nx);
    // fixed "random" smooth compatible data: u(L) = u_x(L) = 0
    for i in 0..=nx {
        let x = p.length * i as f64 / nx as f64;
        let s = (x - p.length) / p.length;
        z0.u.values[i] = 0.04 * s * s * (1.7 - 0.9 * s + 0.4 * s * s) * x / p.length;
        z0.u.values[i] += 0.03 * x * x * (x - p.length).powi(2);
        z0.v.values[i] = 0.02 * s * s - 0.05 * s * s * s;
    }
    z0.alpha = z0.v.values[0];
    let run = |dt: f64| {
        let cfg = SimConfig {
            nx,
            dt,
            t_end: 3.0,
            snapshot_every: 0.01,
        };
        let r = simulate(&p, &z0, &ConstantInput(0.0), &cfg).unwrap();
        energy_audit(&r).unwrap()
    };
    let drift = run(2.5e-4);
    let drift_half = run(1.25e-4);
    let ratio = drift / drift_half;
    let magnitude_ok = drift <= 1e-3;
    let ratio_ok = (3.0..=5.0).contains(&ratio);
    println!(
        "criterion 6 conservation: {} (drift = {drift:.3e} <= 1e-3: {magnitude_ok}; dt-halving ratio = {ratio:.3}, expected ~4: {ratio_ok})",
        verdict(magnitude_ok && ratio_ok)
    );
    assert!(magnitude_ok && ratio_ok);
}

#[test]
fn criterion_7_spectral_cross_validation() {
    let p = reference_params();
    let omega_max = 1000.0;
    let k = required_truncation(&p, omega_max).max(12);
    let t = compute_gen_tables(&p, k, 1024).unwrap();

    let d0 = char_fn(&t, &p, Complex64::new(0.0, 0.0)).unwrap();
    let d0_ok = (d0 - Complex64::new(1.0, 0.0)).norm() < 1e-14;

    let spectrum = find_eigenvalues(&t, &p, omega_max, 5).unwrap();
    let oracle = shooting_eigenfrequencies(&p, omega_max, 5);
    let mut worst = 0.0_f64;
    let count_ok = spectrum.pairs.len() == 5 && oracle.len() == 5;
    if count_ok {
        for (pair, w_ref) in spectrum.pairs.iter().zip(&oracle) {
            worst = worst.max((pair.omega_raw - w_ref).abs() / w_ref);
        }
    }
    let match_ok = count_ok && worst < 1e-6;

    // classical clamped-free limit on a uniform beam as m, J -> 0
    let pu = BeamParams {
        length: 0.5,
        tip_mass: 1e-8,
        tip_inertia: 1e-8,
        rho: Profile::Affine { a: 1.0, b: 0.0 },
        ei: Profile::Affine { a: 1.0, b: 0.0 },
        grid_n: 512,
    };
    let ku = required_truncation(&pu, 50.0).max(12);
    let tu = compute_gen_tables(&pu, ku, 1024).unwrap();
    let su = find_eigenvalues(&tu, &pu, 50.0, 1).unwrap();
    let w_ref = (1.875104068711961_f64 / pu.length).powi(2);
    let limit_err = (su.pairs[0].omega - w_ref).abs() / w_ref;
    let limit_ok = limit_err < 1e-3;

    let ok = d0_ok && match_ok && limit_ok;
    println!(
        "criterion 7 spectral cross-validation: {} (D(0) - 1 = {:.1e}, worst series-vs-shooting gap = {worst:.3e} < 1e-6, clamped-free limit error = {limit_err:.3e} < 1e-3)",
        verdict(ok),
        (d0 - Complex64::new(1.0, 0.0)).norm()
    );
    assert!(ok);
}

#[test]
fn criterion_8_projection_residual_decreasing() {
    let p = reference_params();
    let omega_max = 7500.0;
    let k = required_truncation(&p, omega_max).max(12);
    let t = compute_gen_tables(&p, k, 1024).unwrap();
    let spectrum = find_eigenvalues(&t, &p, omega_max, 12).unwrap();
    assert_eq!(spectrum.pairs.len(), 12, "expected 12 modes below {omega_max}");

    // fixed smooth non-modal test state with u(L) = u_x(L) = 0
    let n = p.grid_n;
    let mut u = vec![0.0; n + 1];
    for (i, ui) in u.iter_mut().enumerate() {
        let x = p.length * i as f64 / n as f64;
        *ui = x * x * (x - p.length) * (x - p.length);
    }
    let z = BeamState::new(
        GridFunction::new(0.0, p.length, u).unwrap(),
        GridFunction::zeros_like(&BeamState::zero(p.length, n).u),
        0.0,
        0.0,
    )
    .unwrap();

    let mut residuals = Vec::new();
    for n_modes in 1..=12 {
        let (_, res) = project_state(&spectrum, &p, &z, n_modes).unwrap();
        residuals.push(res);
    }
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    let last = *residuals.last().unwrap();
    let ok = decreasing && last < 0.05;
    println!(
        "criterion 8 projection density: {} (residuals strictly decreasing = {decreasing}, residual at 12 modes = {last:.3e} < 5e-2)",
        verdict(ok)
    );
    assert!(ok);
}

#[test]
fn criterion_9_steady_state_fixed_point() {
    let p = reference_params();
    let z0 = steady_state(&p, 0.3);
    let cfg = SimConfig::defaults(3.0);
    let r = simulate(&p, &z0, &ConstantInput(0.3), &cfg).unwrap();
    let mut reference = BeamState::zero(p.length, cfg.nx);
    reference.u.values.iter_mut().for_each(|u| *u = 0.3);
    let mut worst = 0.0_f64;
    for s in &r.snapshots {
        let d = s.sub(&reference).unwrap();
        worst = worst.max(z_norm(&d, &p).unwrap());
    }
    let ok = worst <= 1e-10;
    println!(
        "criterion 9 steady-state fixed point: {} (max |z(t) - z0|_Z = {worst:.3e} <= 1e-10)",
        verdict(ok)
    );
    assert!(ok);
}
