//! Spectrum of the beam/tip-mass operator via the generating-function
//! characteristic condition, an independent shooting oracle, and modal
//! least-squares projection of states.
//!
//! With G(x,l) = sum_k g_k(x) l^{2k} and H(x,l) = sum_k h_k(x) l^{2k}, the
//! clamped-end conditions u(L) = u_x(L) = 0 applied to
//! u = u(0) G + u_x(0) H give the characteristic function
//! D(l) = G(L,l) H_x(L,l) - H(L,l) G_x(L,l); eigenvalues are its roots on
//! the imaginary axis, where D is real (even series, real coefficients).

use crate::error::{BeamError, Result};
use crate::genfun::{envelope_constants, GenTable};
use crate::model::{z_inner, z_norm, BeamParams, BeamState, GridFunction};
use crate::quadrature::Kahan;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// One imaginary-axis eigenvalue lambda = i omega with its mode shape,
/// normalized by u_x(0) = 1. The shape is real on the imaginary axis (all
/// series terms are real there).
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub omega: f64,
    /// the sign-change root of D(i w) before the defect polish; coincides
    /// with `omega` at low modes, kept for oracle comparisons
    pub omega_raw: f64,
    pub lambda: Complex64,
    /// u(0) under the normalization u_x(0) = 1
    pub u0: f64,
    pub u: GridFunction,
    /// clamped-end residuals |u(L)|, |u_x(L)| relative to max |u|
    pub residual_u_l: f64,
    pub residual_ux_l: f64,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub pairs: Vec<Eigenpair>,
    pub omega_max: f64,
}

const TAIL_REL: f64 = 1e-12;

// ln k!
fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

// Envelope bound on the remaining tail of the four boundary series beyond
// level k_max, at |lambda| = lam; returns None if the term ratio has not yet
// dropped below 1 (tail not summable from the envelope alone).
fn tail_bound(table: &GenTable, params: &BeamParams, lam: f64) -> Option<f64> {
    let (r1, r2) = envelope_constants(params);
    let l = table.length;
    let k = table.k_max + 1;
    let lam2 = lam * lam;
    // next-term bounds for g(L), g_x(L), h(L), h_x(L)
    let mut worst = f64::NEG_INFINITY;
    for (r, drop) in [(r1, 1), (r1, 2), (r2, 2), (r2, 3)] {
        let p = 4 * k - drop;
        let ln_term =
            k as f64 * r.ln() + 2.0 * k as f64 * lam.max(1e-300).ln() + p as f64 * l.ln()
                - ln_factorial(p);
        worst = worst.max(ln_term);
    }
    // geometric ratio of successive envelope terms
    let kk = 4 * k;
    let ratio = r1.max(r2) * lam2 * l.powi(4)
        / ((kk - 2) as f64 * (kk - 1) as f64 * kk as f64 * (kk + 1) as f64);
    if ratio >= 0.9 {
        return None;
    }
    Some(worst.exp() / (1.0 - ratio))
}

// sum_k c_k * (-w^2)^k in log space (the coefficients underflow and the
// powers overflow long before their product does).
fn alternating_power_sum(coeffs: &[f64], omega: f64) -> f64 {
    let ln_w2 = if omega > 0.0 { 2.0 * omega.ln() } else { f64::NEG_INFINITY };
    let mut acc = Kahan::default();
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let term = if k == 0 {
            c
        } else {
            let mag = (c.abs().ln() + k as f64 * ln_w2).exp();
            c.signum() * if k % 2 == 0 { mag } else { -mag }
        };
        acc.add(term);
    }
    acc.value()
}

/// D(lambda) for general complex lambda, with the envelope tail check.
pub fn char_fn(table: &GenTable, params: &BeamParams, lambda: Complex64) -> Result<Complex64> {
    let lam = lambda.norm();
    let sum = |coeffs: &[f64]| -> Complex64 {
        let l2 = lambda * lambda;
        let mut p = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs {
            acc += c * p;
            p *= l2;
        }
        acc
    };
    let g = sum(&table.g_l);
    let gx = sum(&table.gx_l);
    let h = sum(&table.h_l);
    let hx = sum(&table.hx_l);
    let d = g * hx - h * gx;
    let partial = g.norm().max(gx.norm()).max(h.norm()).max(hx.norm());
    let tail = tail_bound(table, params, lam)
        .ok_or(BeamError::TruncationInsufficient { lambda_abs: lam, tail: f64::INFINITY })?;
    if tail > TAIL_REL * partial.max(1.0) {
        return Err(BeamError::TruncationInsufficient {
            lambda_abs: lam,
            tail: tail / partial.max(1.0),
        });
    }
    Ok(d)
}

/// D(i omega), real by the even/real structure; the root target of the scan.
pub fn char_fn_imag_axis(table: &GenTable, params: &BeamParams, omega: f64) -> Result<f64> {
    let tail = tail_bound(table, params, omega)
        .ok_or(BeamError::TruncationInsufficient { lambda_abs: omega, tail: f64::INFINITY })?;
    let g = alternating_power_sum(&table.g_l, omega);
    let gx = alternating_power_sum(&table.gx_l, omega);
    let h = alternating_power_sum(&table.h_l, omega);
    let hx = alternating_power_sum(&table.hx_l, omega);
    let partial = g.abs().max(gx.abs()).max(h.abs()).max(hx.abs());
    if tail > TAIL_REL * partial.max(1.0) {
        return Err(BeamError::TruncationInsufficient {
            lambda_abs: omega,
            tail: tail / partial.max(1.0),
        });
    }
    Ok(g * hx - h * gx)
}

/// Smallest truncation depth whose envelope tail at omega_max drops below
/// the series tolerance (relative to the leading term scale).
pub fn required_truncation(params: &BeamParams, omega_max: f64) -> usize {
    let (r1, r2) = envelope_constants(params);
    let r = r1.max(r2);
    let l = params.length;
    let lam2 = omega_max * omega_max;
    // worst of the four boundary-series envelopes at level k (drop = number
    // of x-derivatives lowering the vanishing order at x = 0)
    let ln_term = |k: usize| {
        [(r1, 1usize), (r1, 2), (r2, 2), (r2, 3)]
            .iter()
            .map(|&(rr, drop)| {
                let p = 4 * k - drop;
                k as f64 * rr.ln() + k as f64 * lam2.max(1e-300).ln() + p as f64 * l.ln()
                    - ln_factorial(p)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // absolute tail below the tolerance is conservative: the runtime check
    // measures the tail against partial sums clamped to at least 1
    for k in 1..200 {
        let kk = 4 * (k + 1);
        let ratio =
            r * lam2 * l.powi(4) / ((kk - 2) as f64 * (kk - 1) as f64 * kk as f64 * (kk + 1) as f64);
        if ratio < 0.9 && (ln_term(k + 1) - (1.0 - ratio).ln()) < TAIL_REL.ln() {
            return k;
        }
    }
    200
}

/// Scan [1, omega_max] on a log-dense grid for sign changes of D(i omega)
/// and bisect each bracket; returns up to n_max pairs ordered by omega.
pub fn find_eigenvalues(
    table: &GenTable,
    params: &BeamParams,
    omega_max: f64,
    n_max: usize,
) -> Result<Spectrum> {
    const SCAN: usize = 400;
    let d = |w: f64| char_fn_imag_axis(table, params, w);
    let grid: Vec<f64> = (0..=SCAN)
        .map(|i| (omega_max.ln() * i as f64 / SCAN as f64).exp())
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&w| d(w)).collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for i in 0..SCAN {
        if vals[i] == 0.0 {
            brackets.push((grid[i], grid[i]));
        } else if vals[i].signum() != vals[i + 1].signum() {
            brackets.push((grid[i], grid[i + 1]));
        }
        if brackets.len() >= n_max {
            break;
        }
    }
    let roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(mut a, mut b)| -> Result<f64> {
            if a == b {
                return Ok(a);
            }
            let mut fa = d(a)?;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if (b - a) <= 1e-10 * m {
                    break;
                }
                let fm = d(m)?;
                if fm == 0.0 {
                    return Ok(m);
                }
                if fa.signum() == fm.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<Eigenpair> = roots
        .par_iter()
        .map(|&w| {
            let polished = polish_root(table, params, w)?;
            let mut pair = eigenfunction(table, params, Complex64::new(0.0, polished))?;
            pair.omega_raw = w;
            Ok(pair)
        })
        .collect::<Result<_>>()?;
    Ok(Spectrum {
        pairs,
        omega_max,
    })
}

// Bisection on D(i w) bottoms out at the cancellation noise of the power
// sums, which grows with w; tighten the root against the slope defect of the
// stably evaluated series shape (the same root condition, a different
// functional) before building the eigenpair.
pub fn polish_root(table: &GenTable, params: &BeamParams, w: f64) -> Result<f64> {
    let slope = |w: f64| -> Result<f64> {
        let shape = series_shape(table, params, w)?;
        Ok(shape.defect_ux_signed)
    };
    let f0 = slope(w)?;
    if f0 == 0.0 {
        return Ok(w);
    }
    // expand a bracket around the bisection result
    let mut step = 1e-9 * w;
    let (mut a, mut b, mut fa) = loop {
        let (lo, hi) = (w - step, w + step);
        let (flo, fhi) = (slope(lo)?, slope(hi)?);
        if flo.signum() != f0.signum() {
            break (lo, w, flo);
        }
        if fhi.signum() != f0.signum() {
            break (w, hi, f0);
        }
        step *= 4.0;
        // D's root can sit a noise-zone away from the defect zero at high
        // modes; mode spacing grows ~n^2, so a percent-level search stays
        // well inside the bracket of a single mode
        if step > 1e-2 * w {
            // D's root was already as good as the slope functional can see
            return Ok(w);
        }
    };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= 1e-14 * m {
            break;
        }
        let fm = slope(m)?;
        if fm == 0.0 {
            break;
        }
        if fa.signum() == fm.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // the defect sits on a roundoff plateau near its zero at high modes;
    // bisection lands at an arbitrary point of it, so sweep the plateau and
    // keep the frequency with the smallest worst-case residual
    let m = 0.5 * (a + b);
    let mut best = (m, {
        let s = series_shape(table, params, m)?;
        s.defect_u.max(s.defect_ux)
    });
    for i in 0..64 {
        let wc = m * (1.0 + 4e-11 * (i as f64 - 31.5) / 31.5);
        let s = series_shape(table, params, wc)?;
        let r = s.defect_u.max(s.defect_ux);
        if r < best.1 {
            best = (wc, r);
        }
    }
    Ok(best.0)
}

struct SeriesShape {
    u: Vec<f64>,
    u0: f64,
    /// u(0) from the boundary series, for cross-checking against `u0`
    u0_series: f64,
    /// matching defects in u and u' at midspan, relative to max |u|
    defect_u: f64,
    defect_ux: f64,
    defect_ux_signed: f64,
}

// One RK4 step of the quadratic-pencil ODE system [u, u', M, M'] with
// u'' = M/EI and M'' = w^2 rho u; h may be negative (backward sweep).
fn rk4_step(params: &BeamParams, w2: f64, x: f64, h: f64, s: &mut [f64; 4]) {
    let l = params.length;
    let rhs = |x: f64, s: [f64; 4]| -> [f64; 4] {
        let ei = params.ei.eval(x, l);
        let rho = params.rho.eval(x, l);
        [s[1], s[2] / ei, s[3], w2 * rho * s[0]]
    };
    let k1 = rhs(x, *s);
    let mid1: [f64; 4] = std::array::from_fn(|j| s[j] + 0.5 * h * k1[j]);
    let k2 = rhs(x + 0.5 * h, mid1);
    let mid2: [f64; 4] = std::array::from_fn(|j| s[j] + 0.5 * h * k2[j]);
    let k3 = rhs(x + 0.5 * h, mid2);
    let end: [f64; 4] = std::array::from_fn(|j| s[j] + h * k3[j]);
    let k4 = rhs(x + h, end);
    for j in 0..4 {
        s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
}

// The summed series u0*G + H with u0 = -H_x(L)/G_x(L) is, by the cascade
// construction, exactly the solution of lambda^2 rho u + (EI u'')'' = 0 with
// the tip data u(0) = u0, u'(0) = 1, EI u''(0) = J lambda^2,
// (EI u'')'(0) = -m lambda^2 u0. Direct power summation cancels
// catastrophically at large |lambda|, and a single 0 -> L integration of
// that initial-value problem amplifies roundoff by exp(beta L) through the
// growing fundamental solution; so the shape is assembled by double
// shooting. The forward solution is linear in u0: u0 * A + B with the two
// tip fundamental solutions; a two-parameter clamped family
// (u(L) = u'(L) = 0) comes backward from L; (u0, mu, nu) are solved from
// three of the four continuity conditions at midspan and the leftover
// mismatch is the honest clamped-end self-consistency residual, measured
// where f64 can still resolve it. The matched u0 is cross-checked against
// the series value from the two single-signed boundary sums.
fn series_shape(table: &GenTable, params: &BeamParams, omega: f64) -> Result<SeriesShape> {
    let gx_l = alternating_power_sum(&table.gx_l, omega);
    let hx_l = alternating_power_sum(&table.hx_l, omega);
    if gx_l <= 0.0 {
        return Err(BeamError::NonFinite(
            "positivity of the G_x(L) series failed".into(),
        ));
    }
    let u0_series = -hx_l / gx_l;
    let n = table.grid_n;
    let nm = n / 2;
    let w2 = omega * omega;
    let l = table.length;
    let h = l / n as f64;

    // forward sweeps of the tip fundamental solutions
    let mut aa = [1.0, 0.0, 0.0, params.tip_mass * w2];
    let mut bb = [0.0, 1.0, -params.tip_inertia * w2, 0.0];
    let mut au = vec![0.0; nm + 1];
    let mut bu = vec![0.0; nm + 1];
    au[0] = 1.0;
    for i in 0..nm {
        let x = i as f64 * h;
        rk4_step(params, w2, x, h, &mut aa);
        rk4_step(params, w2, x, h, &mut bb);
        au[i + 1] = aa[0];
        bu[i + 1] = bb[0];
    }

    // backward sweep of the clamped two-parameter family, re-orthonormalized
    // every step: both raw columns collapse onto the one backward-growing
    // direction, and by midspan the raw pair is parallel to ~exp(-beta L/2)
    let mut b1 = [0.0, 0.0, 1.0, 0.0];
    let mut b2 = [0.0, 0.0, 0.0, 1.0];
    let mut b1u = vec![0.0; n + 1];
    let mut b2u = vec![0.0; n + 1];
    // rs[i]: upper-triangular factor (r11, r12, r22) relating the integrated
    // pair at node i to the orthonormal basis stored there
    let mut rs = vec![[0.0_f64; 3]; n];
    for i in (nm..n).rev() {
        rk4_step(params, w2, (i + 1) as f64 * h, -h, &mut b1);
        rk4_step(params, w2, (i + 1) as f64 * h, -h, &mut b2);
        let r11 = b1.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r11 == 0.0 {
            return Err(BeamError::NonFinite("degenerate clamped continuation".into()));
        }
        b1.iter_mut().for_each(|v| *v /= r11);
        let r12 = b1.iter().zip(&b2).map(|(a, b)| a * b).sum::<f64>();
        for j in 0..4 {
            b2[j] -= r12 * b1[j];
        }
        let r22 = b2.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r22 == 0.0 {
            return Err(BeamError::NonFinite("degenerate clamped continuation".into()));
        }
        b2.iter_mut().for_each(|v| *v /= r22);
        rs[i] = [r11, r12, r22];
        b1u[i] = b1[0];
        b2u[i] = b2[0];
    }

    // u0*A + B = c1*B1 + c2*B2 at midspan: four conditions, three unknowns.
    // Solve the three rows leaving out `skip`; the skipped row's mismatch is
    // the defect.
    let solve = |skip: usize| -> Result<(f64, f64, f64, f64)> {
        let rows: Vec<usize> = (0..4).filter(|&r| r != skip).collect();
        let mat = DMatrix::<f64>::from_fn(3, 3, |i, j| {
            let r = rows[i];
            [aa[r], -b1[r], -b2[r]][j]
        });
        let rhs = DVector::<f64>::from_fn(3, |i, _| -bb[rows[i]]);
        let sol = mat
            .lu()
            .solve(&rhs)
            .ok_or_else(|| BeamError::NonFinite("degenerate clamped continuation".into()))?;
        let (u0, c1, c2) = (sol[0], sol[1], sol[2]);
        let defect = u0 * aa[skip] + bb[skip] - c1 * b1[skip] - c2 * b2[skip];
        Ok((u0, c1, c2, defect))
    };
    let (u0, c1, c2, d_u) = solve(0)?;
    let (_, _, _, d_ux) = solve(1)?;

    let mut u = vec![0.0; n + 1];
    for i in 0..=nm {
        u[i] = u0 * au[i] + bu[i];
    }
    // propagate the midspan coefficients back toward L through the stored
    // orthonormalization factors: d_{i+1} = R_i^{-1} d_i
    let (mut d1, mut d2) = (c1, c2);
    for i in nm..n {
        let [r11, r12, r22] = rs[i];
        let e2 = d2 / r22;
        let e1 = (d1 - r12 * e2) / r11;
        d1 = e1;
        d2 = e2;
        u[i + 1] = d1 * b1u[i + 1] + d2 * b2u[i + 1];
    }
    u[n] = 0.0;
    let scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    Ok(SeriesShape {
        u,
        u0,
        u0_series,
        defect_u: d_u.abs() / scale,
        defect_ux: d_ux.abs() * l / scale,
        defect_ux_signed: d_ux,
    })
}

/// Mode shape at an imaginary-axis root: u = u0 * G(x) + H(x) with
/// u_x(0) = 1 and u0 = -H_x(L)/G_x(L) (the denominator is a sum of positive
/// terms by the sign alternation, hence never vanishes).
pub fn eigenfunction(table: &GenTable, params: &BeamParams, lambda: Complex64) -> Result<Eigenpair> {
    if lambda.re.abs() > 1e-9 * lambda.norm() {
        return Err(BeamError::OutOfRange(
            "eigenfunctions are computed on the imaginary axis".into(),
        ));
    }
    let omega = lambda.im.abs();
    let shape = series_shape(table, params, omega)?;
    let u0 = shape.u0;
    let u = GridFunction::new(0.0, table.length, shape.u)?;
    let residual_u_l = shape.defect_u;
    let residual_ux_l = shape.defect_ux;
    let tol = 1e-6;
    if residual_u_l > tol || residual_ux_l > tol {
        return Err(BeamError::OutOfRange(format!(
            "lambda is not a root: clamped-end residuals {residual_u_l:.3e}, {residual_ux_l:.3e}"
        )));
    }
    let u0_gap = (u0 - shape.u0_series).abs() / u0.abs().max(1e-300);
    if u0_gap > 1e-3 {
        return Err(BeamError::OutOfRange(format!(
            "u(0) disagrees with the boundary-series value by {u0_gap:.3e}"
        )));
    }
    Ok(Eigenpair {
        omega,
        omega_raw: omega,
        lambda,
        u0,
        u,
        residual_u_l,
        residual_ux_l,
    })
}

/// Independent oracle: RK4 integration of
/// (EI u'')'' = omega^2 rho u from x = 0 with the two tip-condition
/// fundamental solutions; the clamped-end determinant vanishes exactly at
/// the eigenfrequencies.
pub fn shooting_det(params: &BeamParams, omega: f64, steps: usize) -> f64 {
    // state [u, u', M, M'] with M = EI u'': u'' = M/EI, M'' = omega^2 rho u
    let l = params.length;
    let rhs = |x: f64, s: [f64; 4]| -> [f64; 4] {
        let ei = params.ei.eval(x, l);
        let rho = params.rho.eval(x, l);
        [s[1], s[2] / ei, s[3], omega * omega * rho * s[0]]
    };
    let mut a = [1.0, 0.0, 0.0, params.tip_mass * omega * omega];
    let mut b = [0.0, 1.0, -params.tip_inertia * omega * omega, 0.0];
    let h = l / steps as f64;
    let step = |s: &mut [f64; 4], x: f64| {
        let k1 = rhs(x, *s);
        let mid1: [f64; 4] = std::array::from_fn(|i| s[i] + 0.5 * h * k1[i]);
        let k2 = rhs(x + 0.5 * h, mid1);
        let mid2: [f64; 4] = std::array::from_fn(|i| s[i] + 0.5 * h * k2[i]);
        let k3 = rhs(x + 0.5 * h, mid2);
        let end: [f64; 4] = std::array::from_fn(|i| s[i] + h * k3[i]);
        let k4 = rhs(x + h, end);
        for i in 0..4 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    };
    for i in 0..steps {
        let x = i as f64 * h;
        step(&mut a, x);
        step(&mut b, x);
    }
    a[0] * b[1] - b[0] * a[1]
}

/// Eigenfrequencies from the shooting determinant by scan + bisection.
pub fn shooting_eigenfrequencies(params: &BeamParams, omega_max: f64, n_max: usize) -> Vec<f64> {
    const SCAN: usize = 400;
    let steps = 2000;
    let det = |w: f64| shooting_det(params, w, steps);
    let grid: Vec<f64> = (0..=SCAN)
        .map(|i| (omega_max.ln() * i as f64 / SCAN as f64).exp())
        .collect();
    let vals: Vec<f64> = grid.par_iter().map(|&w| det(w)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN {
        if roots.len() >= n_max {
            break;
        }
        if vals[i].signum() != vals[i + 1].signum() {
            let (mut a, mut b) = (grid[i], grid[i + 1]);
            let mut fa = vals[i];
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if (b - a) <= 1e-12 * m {
                    break;
                }
                let fm = det(m);
                if fa.signum() == fm.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots
}

/// Least-squares fit of z onto span{phi_0, Re phi_n, Im phi_n : n <= modes}
/// in the Z inner product; returns (coefficients, relative residual).
///
/// phi_0 = [1, 0, 0, 0]; with lambda = i omega and u_x(0) = 1,
/// Re phi_n = [u_n, 0, 0, 0] and Im phi_n = [0, omega u_n, omega u_n(0),
/// omega].
pub fn project_state(
    spectrum: &Spectrum,
    params: &BeamParams,
    z: &BeamState,
    n_modes: usize,
) -> Result<(Vec<f64>, f64)> {
    if n_modes > spectrum.pairs.len() {
        return Err(BeamError::OutOfRange(format!(
            "n_modes = {n_modes} exceeds the {} computed pairs",
            spectrum.pairs.len()
        )));
    }
    let nx = z.u.n_intervals();
    let l = z.u.x1;
    let resample = |g: &GridFunction| -> GridFunction {
        let values = (0..=nx).map(|i| g.eval(l * i as f64 / nx as f64)).collect();
        GridFunction { x0: 0.0, x1: l, values }
    };
    let mut basis: Vec<BeamState> = Vec::new();
    let mut phi0 = BeamState::zero(l, nx);
    phi0.u.values.iter_mut().for_each(|v| *v = 1.0);
    basis.push(phi0);
    for pair in spectrum.pairs.iter().take(n_modes) {
        let un = resample(&pair.u);
        let mut re = BeamState::zero(l, nx);
        re.u = un.clone();
        basis.push(re);
        let mut im = BeamState::zero(l, nx);
        im.v = un;
        im.v.values.iter_mut().for_each(|v| *v *= pair.omega);
        im.alpha = pair.omega * pair.u0;
        im.beta = pair.omega;
        basis.push(im);
    }
    // normalize before assembling the Gram matrix: the velocity-part vectors
    // carry a factor omega, and the raw scale spread squares into the
    // conditioning of the solve
    let mut scales = Vec::with_capacity(basis.len());
    for b in basis.iter_mut() {
        let s = z_norm(b, params)?.max(1e-300);
        *b = b.scaled(1.0 / s);
        scales.push(s);
    }
    let nb = basis.len();
    let mut gram = DMatrix::<f64>::zeros(nb, nb);
    let mut rhs = DVector::<f64>::zeros(nb);
    for i in 0..nb {
        for j in i..nb {
            let v = z_inner(&basis[i], &basis[j], params)?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
        rhs[i] = z_inner(&basis[i], z, params)?;
    }
    let svd = gram.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin.max(1e-300);
    if cond > 1e12 {
        return Err(BeamError::RankDeficient { cond });
    }
    let coeffs = svd
        .solve(&rhs, 0.0)
        .map_err(|e| BeamError::Parse(e.to_string()))?;
    let mut diff = z.clone();
    for (c, b) in coeffs.iter().zip(&basis) {
        diff = diff.sub(&b.scaled(*c))?;
    }
    let denom = z_norm(z, params)?.max(1e-300);
    let residual = z_norm(&diff, params)? / denom;
    // report coefficients against the unnormalized basis
    let coeffs = coeffs.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok((coeffs, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::compute_gen_tables;
    use crate::model::Profile;
    use crate::testutil::sec6_params;
    use approx::assert_relative_eq;

    fn sec6_table() -> (BeamParams, GenTable) {
        let p = sec6_params(2048);
        let k = required_truncation(&p, 500.0).max(12);
        let t = compute_gen_tables(&p, k, 1024).unwrap();
        (p, t)
    }

    #[test]
    fn d_at_zero_is_one() {
        let (p, t) = sec6_table();
        assert_eq!(char_fn_imag_axis(&t, &p, 0.0).unwrap(), 1.0);
        let d = char_fn(&t, &p, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(d, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn d_symmetries() {
        let (p, t) = sec6_table();
        let l = Complex64::new(0.4, 2.0);
        let d = char_fn(&t, &p, l).unwrap();
        let d_conj = char_fn(&t, &p, l.conj()).unwrap();
        let d_neg = char_fn(&t, &p, -l).unwrap();
        assert_relative_eq!(d.re, d_conj.re, max_relative = 1e-12);
        assert_relative_eq!(d.im, -d_conj.im, max_relative = 1e-12);
        assert_eq!(d, d_neg);
    }

    #[test]
    fn truncation_guard_triggers() {
        let p = sec6_params(2048);
        let t = compute_gen_tables(&p, 3, 256).unwrap();
        assert!(matches!(
            char_fn_imag_axis(&t, &p, 500.0),
            Err(BeamError::TruncationInsufficient { .. })
        ));
    }

    #[test]
    fn clamped_free_limit_on_uniform_beam() {
        // m = J = 1e-8: the lowest frequency must approach the classical
        // clamped-free value beta1^2 with beta1 L ~ 1.87510
        let p = BeamParams {
            length: 1.0,
            tip_mass: 1e-8,
            tip_inertia: 1e-8,
            rho: Profile::Affine { a: 1.0, b: 0.0 },
            ei: Profile::Affine { a: 1.0, b: 0.0 },
            grid_n: 512,
        };
        let k = required_truncation(&p, 30.0).max(12);
        let t = compute_gen_tables(&p, k, 1024).unwrap();
        let spec = find_eigenvalues(&t, &p, 30.0, 2).unwrap();
        let expect = 1.8751040687119612_f64.powi(2);
        assert_relative_eq!(spec.pairs[0].omega, expect, max_relative = 1e-3);
    }

    #[test]
    fn series_matches_shooting_on_first_modes() {
        let (p, t) = sec6_table();
        let spec = find_eigenvalues(&t, &p, 500.0, 3).unwrap();
        let oracle = shooting_eigenfrequencies(&p, 500.0, 3);
        assert!(spec.pairs.len() >= 2 && oracle.len() >= 2);
        for (a, b) in spec.pairs.iter().zip(&oracle) {
            assert_relative_eq!(a.omega, *b, max_relative = 1e-6);
        }
    }

    #[test]
    fn eigenfunction_satisfies_tip_conditions() {
        let (p, t) = sec6_table();
        let spec = find_eigenvalues(&t, &p, 500.0, 2).unwrap();
        for pair in &spec.pairs {
            assert!(pair.residual_u_l <= 1e-6);
            assert!(pair.residual_ux_l <= 1e-6);
            let w2 = pair.omega * pair.omega;
            // m lambda^2 u(0) + (EI u'')'(0) = 0; J lambda^2 u'(0) - EI(0) u''(0) = 0
            let ei0 = p.ei.eval(0.0, p.length);
            let uxx0 = pair.u.derivative_values(2)[0];
            let moment = p.tip_inertia * (-w2) * 1.0 - ei0 * uxx0;
            let scale = (p.tip_inertia * w2).abs().max(ei0 * uxx0.abs());
            assert!(moment.abs() / scale < 1e-4, "moment residual {moment:e}");
            assert_relative_eq!(pair.u.values[0], pair.u0, max_relative = 1e-12);
        }
    }

    #[test]
    fn projection_recovers_members_of_the_span() {
        let (p, t) = sec6_table();
        let spec = find_eigenvalues(&t, &p, 500.0, 2).unwrap();
        let z = crate::planner::steady_state(&p, 0.7);
        let (coeffs, residual) = project_state(&spec, &p, &z, 1).unwrap();
        assert_relative_eq!(coeffs[0], 0.7, max_relative = 1e-8);
        // floor set by quadrature error in the Gram entries, not conditioning
        assert!(residual <= 1e-8, "residual {residual:e}");
        // Re phi_1 reproduced exactly with one mode
        let nx = p.grid_n;
        let mut re1 = BeamState::zero(p.length, nx);
        for i in 0..=nx {
            let x = p.length * i as f64 / nx as f64;
            re1.u.values[i] = spec.pairs[0].u.eval(x);
        }
        let (_, r2) = project_state(&spec, &p, &re1, 1).unwrap();
        assert!(r2 <= 1e-6, "residual {r2:e}");
    }
}
