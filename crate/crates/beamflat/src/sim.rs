//! Independent verification path: method-of-lines finite differences for the
//! beam equation rho w_tt + (EI w_xx)_xx = 0 with displacement input
//! w(L,t) = f(t), w_x(L,t) = 0 and the tip-mass conditions at x = 0, stepped
//! with Newmark average acceleration.
//!
//! Unknowns are q = [w_0 .. w_{nx-1}, theta] with theta = w_x(0); the driven
//! node w_nx = f(t) is imposed, never solved. Ghost nodes give the moment
//! closures: w_{-1} = w_1 - 2 h theta at the tip and w_{nx+1} = w_{nx-1} at
//! the clamp (zero slope).

use crate::error::{BeamError, Result};
use crate::model::{is_compatible, tilde_z_norm, BeamParams, BeamState, GridFunction};
use nalgebra::{DMatrix, DVector};

/// Time-dependent boundary input with two derivatives (membership in C^2 is
/// part of the well-posedness hypothesis).
pub trait InputSignal {
    fn value(&self, t: f64) -> f64;
    /// [f, f', f''] at t
    fn jet2(&self, t: f64) -> [f64; 3];
}

pub struct ConstantInput(pub f64);

impl InputSignal for ConstantInput {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }
    fn jet2(&self, _t: f64) -> [f64; 3] {
        [self.0, 0.0, 0.0]
    }
}

impl InputSignal for crate::planner::Plan {
    fn value(&self, t: f64) -> f64 {
        self.eval_control(t).expect("control evaluation")
    }
    fn jet2(&self, t: f64) -> [f64; 3] {
        let j = self.control_jet(t, 2).expect("control jet");
        [j.c[0], j.c[1], 2.0 * j.c[2]]
    }
}

/// Input given by a closure returning [f, f', f''].
pub struct FnInput<F: Fn(f64) -> [f64; 3]>(pub F);

impl<F: Fn(f64) -> [f64; 3]> InputSignal for FnInput<F> {
    fn value(&self, t: f64) -> f64 {
        (self.0)(t)[0]
    }
    fn jet2(&self, t: f64) -> [f64; 3] {
        (self.0)(t)
    }
}

/// Input from uniformly sampled values; derivatives by centered differences
/// (callers with analytic inputs should prefer those — see the CLI warning).
pub struct SampledInput {
    pub t_end: f64,
    pub values: Vec<f64>,
}

impl SampledInput {
    fn h(&self) -> f64 {
        self.t_end / (self.values.len() - 1) as f64
    }
}

impl InputSignal for SampledInput {
    fn value(&self, t: f64) -> f64 {
        crate::model::interp_cubic(&self.values, 0.0, self.t_end, t)
    }
    fn jet2(&self, t: f64) -> [f64; 3] {
        let h = self.h();
        let d1 = crate::model::GridFunction {
            x0: 0.0,
            x1: self.t_end,
            values: self.values.clone(),
        }
        .derivative_values(1);
        let d2 = crate::model::GridFunction {
            x0: 0.0,
            x1: self.t_end,
            values: self.values.clone(),
        }
        .derivative_values(2);
        let _ = h;
        [
            self.value(t),
            crate::model::interp_cubic(&d1, 0.0, self.t_end, t),
            crate::model::interp_cubic(&d2, 0.0, self.t_end, t),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    /// snapshot spacing in seconds
    pub snapshot_every: f64,
}

impl SimConfig {
    pub fn defaults(t_end: f64) -> Self {
        SimConfig {
            nx: 300,
            dt: 2.5e-4,
            t_end,
            snapshot_every: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 32 || self.nx % 2 != 0 {
            return Err(BeamError::InvalidParameter(
                "nx must be even and at least 32".into(),
            ));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(BeamError::InvalidParameter("dt and t_end must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub config: SimConfig,
    /// snapshot times
    pub times: Vec<f64>,
    pub snapshots: Vec<BeamState>,
    /// (t, w(0,t), w_x(0,t)) at every snapshot
    pub tip: Vec<(f64, f64, f64)>,
    /// input samples at snapshot times
    pub f_at_snapshots: Vec<f64>,
    /// shifted-energy trace E(t) = 1/2 * tilde-norm(w - f, w_t)^2
    pub energy: Vec<f64>,
    pub terminal: BeamState,
}

// Assembled semi-discrete system: Mass * qdd = force(q, f), with the
// stiffness K (force(q, f) = -K q + b f) materialized densely only for the
// Newmark factorization.
struct Assembly {
    nx: usize,
    h: f64,
    ei: Vec<f64>,
    mass: DVector<f64>,
    k: DMatrix<f64>,
}

impl Assembly {
    // Moments then forces, with stencil groupings that cancel bitwise for a
    // constant profile (steady states must be exact fixed points of the
    // discrete flow, not merely O(roundoff * EI/h^4) ones).
    fn force(&self, q: &DVector<f64>, f: f64) -> DVector<f64> {
        let nx = self.nx;
        let h = self.h;
        let h2 = h * h;
        let mut mm = vec![0.0; nx + 1];
        // tip: ghost w_{-1} = w_1 - 2 h theta
        mm[0] = self.ei[0] / h2 * (2.0 * q[1] - 2.0 * q[0] - 2.0 * h * q[nx]);
        for j in 1..nx {
            let right = if j + 1 < nx { q[j + 1] } else { f };
            mm[j] = self.ei[j] / h2 * (q[j - 1] - 2.0 * q[j] + right);
        }
        // clamp: zero slope ghost w_{nx+1} = w_{nx-1}
        mm[nx] = self.ei[nx] / h2 * (2.0 * q[nx - 1] - 2.0 * f);

        let mut r = DVector::<f64>::zeros(nx + 1);
        // m w_0'' = (3 M_0 - 4 M_1 + M_2)/(2h)   (shear balance at the tip)
        r[0] = (3.0 * mm[0] - 4.0 * mm[1] + mm[2]) / (2.0 * h);
        // rho_i w_i'' = -(M_{i-1} - 2 M_i + M_{i+1})/h^2
        for i in 1..nx {
            r[i] = -(mm[i - 1] - 2.0 * mm[i] + mm[i + 1]) / h2;
        }
        // J theta'' = M_0                        (moment balance)
        r[nx] = mm[0];
        r
    }
}

fn assemble(params: &BeamParams, nx: usize) -> Assembly {
    let n = nx + 1; // unknowns: w_0..w_{nx-1}, theta
    let l = params.length;
    let h = l / nx as f64;
    let ei: Vec<f64> = (0..=nx).map(|i| params.ei.eval(i as f64 * h, l)).collect();
    let rho: Vec<f64> = (0..=nx).map(|i| params.rho.eval(i as f64 * h, l)).collect();
    let mut mass = DVector::<f64>::zeros(n);
    mass[0] = params.tip_mass;
    for i in 1..nx {
        mass[i] = rho[i];
    }
    mass[nx] = params.tip_inertia;
    let mut asm = Assembly {
        nx,
        h,
        ei,
        mass,
        k: DMatrix::zeros(n, n),
    };
    // K columns from the force stencils applied to basis vectors
    let mut basis = DVector::<f64>::zeros(n);
    for col in 0..n {
        basis[col] = 1.0;
        let fcol = asm.force(&basis, 0.0);
        basis[col] = 0.0;
        for row in 0..n {
            asm.k[(row, col)] = -fcol[row];
        }
    }
    asm
}

fn state_from(
    q: &DVector<f64>,
    v: &DVector<f64>,
    f: f64,
    fdot: f64,
    length: f64,
    nx: usize,
) -> Result<BeamState> {
    let mut u = Vec::with_capacity(nx + 1);
    let mut w = Vec::with_capacity(nx + 1);
    for i in 0..nx {
        u.push(q[i]);
        w.push(v[i]);
    }
    u.push(f); // imposed boundary value, bitwise
    w.push(fdot);
    BeamState::new(
        GridFunction::new(0.0, length, u)?,
        GridFunction::new(0.0, length, w)?,
        v[0],
        v[nx],
    )
}

/// Advance the semi-discrete beam from z0 under the input f.
pub fn simulate(
    params: &BeamParams,
    z0: &BeamState,
    input: &dyn InputSignal,
    cfg: &SimConfig,
) -> Result<SimResult> {
    params.validate()?;
    cfg.validate()?;
    let f0 = input.value(0.0);
    if !is_compatible(f0, z0) {
        return Err(BeamError::Incompatible {
            f0,
            u_at_l: z0.u_at_right(),
        });
    }
    let nx = cfg.nx;
    let n = nx + 1;
    let l = params.length;
    let h = l / nx as f64;
    let asm = assemble(params, nx);

    // initial unknowns resampled from z0 (which may live on another grid)
    let mut q = DVector::<f64>::zeros(n);
    let mut v = DVector::<f64>::zeros(n);
    for i in 0..nx {
        let x = i as f64 * h;
        q[i] = z0.u.eval(x);
        v[i] = z0.v.eval(x);
    }
    q[nx] = z0.u.derivative_values(1)[0];
    v[nx] = z0.beta;
    v[0] = z0.alpha;

    let mut a = asm.force(&q, f0);
    a.component_div_assign(&asm.mass);

    // Newmark average acceleration: (M + dt^2/4 K) a_{n+1} = b f - K q*
    let dt = cfg.dt;
    let mut lhs = DMatrix::<f64>::from_diagonal(&asm.mass);
    lhs += &asm.k * (dt * dt / 4.0);
    let lu = lhs.lu();

    let steps = (cfg.t_end / dt).round() as usize;
    let snap_stride = (cfg.snapshot_every / dt).round().max(1.0) as usize;
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut tip = Vec::new();
    let mut f_trace = Vec::new();
    let mut energy = Vec::new();

    let mut record = |t: f64, q: &DVector<f64>, v: &DVector<f64>| -> Result<()> {
        let [f, fdot, _] = input.jet2(t);
        let st = state_from(q, v, f, fdot, l, nx)?;
        let shifted = shift_by_input(&st, f);
        let e = tilde_z_norm(&shifted, params)?;
        times.push(t);
        tip.push((t, q[0], q[nx]));
        f_trace.push(f);
        energy.push(0.5 * e * e);
        snapshots.push(st);
        Ok(())
    };
    record(0.0, &q, &v)?;

    for step in 1..=steps {
        let t = step as f64 * dt;
        let qstar = &q + &v * dt + &a * (dt * dt / 4.0);
        let rhs = asm.force(&qstar, input.value(t));
        let a_next = lu.solve(&rhs).ok_or(BeamError::Diverged { step, t })?;
        q = &qstar + &a_next * (dt * dt / 4.0);
        v += (&a + &a_next) * (dt / 2.0);
        a = a_next;
        if !q[0].is_finite() {
            return Err(BeamError::Diverged { step, t });
        }
        if step % snap_stride == 0 || step == steps {
            record(t, &q, &v)?;
        }
    }

    let terminal = snapshots.last().unwrap().clone();
    Ok(SimResult {
        config: cfg.clone(),
        times,
        snapshots,
        tip,
        f_at_snapshots: f_trace,
        energy,
        terminal,
    })
}

// w~ = w - f: subtracting the rigid boundary offset puts the state in the
// domain of the tilde norm (u(L) = 0) without touching velocities.
fn shift_by_input(state: &BeamState, f: f64) -> BeamState {
    let mut s = state.clone();
    s.u.values.iter_mut().for_each(|u| *u -= f);
    s
}

/// Max relative drift of the shifted energy over the run. Valid only for
/// runs whose input was constant.
pub fn energy_audit(result: &SimResult) -> Result<f64> {
    let f0 = result.f_at_snapshots[0];
    if result.f_at_snapshots.iter().any(|&f| f != f0) {
        return Err(BeamError::InvalidParameter(
            "energy audit requires a constant input".into(),
        ));
    }
    let e0 = result.energy[0];
    if e0 == 0.0 {
        return Ok(result
            .energy
            .iter()
            .fold(0.0_f64, |m, &e| m.max(e.abs())));
    }
    Ok(result
        .energy
        .iter()
        .map(|&e| (e - e0).abs() / e0)
        .fold(0.0, f64::max))
}

/// Empirical well-posedness witness: sup_t ||z_{f+df}(t) - z_f(t)||_Z
/// divided by ||df||_{C^2[0,T]}.
pub fn continuity_probe(
    params: &BeamParams,
    z0: &BeamState,
    f: &dyn InputSignal,
    df: &dyn InputSignal,
    cfg: &SimConfig,
) -> Result<f64> {
    if df.value(0.0).abs() > crate::model::compat_tol(0.0) {
        return Err(BeamError::Incompatible {
            f0: df.value(0.0),
            u_at_l: 0.0,
        });
    }
    let base = simulate(params, z0, f, cfg)?;
    let sum = FnInput(|t: f64| {
        let a = f.jet2(t);
        let b = df.jet2(t);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    });
    let pert = simulate(params, z0, &sum, cfg)?;
    let mut sup = 0.0_f64;
    for (za, zb) in base.snapshots.iter().zip(&pert.snapshots) {
        let d = zb.sub(za)?;
        sup = sup.max(crate::model::z_norm(&d, params)?);
    }
    // C^2 norm of df on a fine grid
    let mut c2 = 0.0_f64;
    for i in 0..=2000 {
        let t = cfg.t_end * i as f64 / 2000.0;
        let [d0, d1, d2] = df.jet2(t);
        c2 = c2.max(d0.abs() + d1.abs() + d2.abs());
    }
    if c2 == 0.0 {
        return Ok(0.0);
    }
    Ok(sup / c2)
}
