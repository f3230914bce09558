//! Physical parameters, grid-sampled coefficient profiles, state vectors and
//! the norms of the state spaces Z and Z-tilde.
//!
//! A state is `[u v alpha beta]`: deflection profile, velocity profile, tip
//! velocity and tip angular velocity. The Z inner product weighs the
//! curvature with the flexural rigidity, the velocity with the mass density
//! and adds the two tip point masses; the Z-tilde variant drops the plain
//! `u` term and additionally requires `u(L) = 0`.

use crate::error::{BeamError, Result};
use crate::quadrature::simpson;
use serde::{Deserialize, Serialize};

/// Coefficient profile on `[0, L]`: either the affine descriptor
/// `a * (1 + b*x)` or a uniformly sampled table (interpolated with cubic
/// Lagrange polynomials, order-4 accurate).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Affine { a: f64, b: f64 },
    Samples { samples: Vec<f64> },
}

impl Profile {
    /// Value at `x` in `[0, length]`.
    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match self {
            Profile::Affine { a, b } => a * (1.0 + b * x),
            Profile::Samples { samples } => interp_cubic(samples, 0.0, length, x),
        }
    }

    pub fn eval_deriv(&self, x: f64, length: f64) -> f64 {
        match self {
            Profile::Affine { a, b } => a * b,
            Profile::Samples { samples } => {
                let h = length / (samples.len() - 1) as f64;
                let d1 = derivative_table(samples, h, 1);
                interp_cubic(&d1, 0.0, length, x)
            }
        }
    }

    pub fn eval_deriv2(&self, x: f64, length: f64) -> f64 {
        match self {
            Profile::Affine { .. } => 0.0,
            Profile::Samples { samples } => {
                let h = length / (samples.len() - 1) as f64;
                let d2 = derivative_table(samples, h, 2);
                interp_cubic(&d2, 0.0, length, x)
            }
        }
    }
}

/// Physical coefficients of the beam and its tip-mass, with the default
/// grid resolution used when sampling the coefficient profiles.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BeamParams {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "m")]
    pub tip_mass: f64,
    #[serde(rename = "J")]
    pub tip_inertia: f64,
    pub rho: Profile,
    #[serde(rename = "EI")]
    pub ei: Profile,
    pub grid_n: usize,
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(BeamError::InvalidParameter("L must be positive".into()));
        }
        if !(self.tip_mass > 0.0) || !(self.tip_inertia > 0.0) {
            return Err(BeamError::InvalidParameter("m and J must be positive".into()));
        }
        if self.grid_n < 32 || self.grid_n % 2 != 0 {
            return Err(BeamError::InvalidParameter(
                "grid_n must be even and at least 32".into(),
            ));
        }
        for i in 0..=self.grid_n {
            let x = self.length * i as f64 / self.grid_n as f64;
            let r = self.rho.eval(x, self.length);
            let e = self.ei.eval(x, self.length);
            if !(r > 0.0) || !(e > 0.0) {
                return Err(BeamError::InvalidParameter(format!(
                    "rho and EI must be strictly positive on [0, L]; at x = {x}: rho = {r}, EI = {e}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let p: BeamParams = serde_json::from_str(json)?;
        p.validate()?;
        Ok(p)
    }

    /// Max of rho and min of EI over the evaluation grid; feed the
    /// factorial-envelope constants.
    pub fn rho_max_ei_min(&self) -> (f64, f64) {
        let mut rho_max = f64::MIN;
        let mut ei_min = f64::MAX;
        for i in 0..=self.grid_n {
            let x = self.length * i as f64 / self.grid_n as f64;
            rho_max = rho_max.max(self.rho.eval(x, self.length));
            ei_min = ei_min.min(self.ei.eval(x, self.length));
        }
        (rho_max, ei_min)
    }
}

/// A scalar function sampled on a uniform grid over `[x0, x1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub x0: f64,
    pub x1: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x0: f64, x1: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 5 {
            return Err(BeamError::InvalidParameter(
                "grid function needs at least 5 samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BeamError::NonFinite("grid function samples".into()));
        }
        Ok(GridFunction { x0, x1, values })
    }

    pub fn zeros_like(other: &GridFunction) -> Self {
        GridFunction {
            x0: other.x0,
            x1: other.x1,
            values: vec![0.0; other.values.len()],
        }
    }

    pub fn n_intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        (self.x1 - self.x0) / self.n_intervals() as f64
    }

    pub fn eval(&self, x: f64) -> f64 {
        interp_cubic(&self.values, self.x0, self.x1, x)
    }

    /// Sampled derivative of the given order (1 or 2), fourth-order accurate
    /// including one-sided stencils at the boundary.
    pub fn derivative_values(&self, order: usize) -> Vec<f64> {
        derivative_table(&self.values, self.h(), order)
    }
}

/// A Z-vector: deflection, velocity, tip velocity and tip angular velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamState {
    pub u: GridFunction,
    pub v: GridFunction,
    pub alpha: f64,
    pub beta: f64,
}

impl BeamState {
    pub fn new(u: GridFunction, v: GridFunction, alpha: f64, beta: f64) -> Result<Self> {
        if u.values.len() != v.values.len() || u.x0 != v.x0 || u.x1 != v.x1 {
            return Err(BeamError::GridMismatch(
                "u and v must share the same grid".into(),
            ));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(BeamError::NonFinite("alpha/beta".into()));
        }
        Ok(BeamState { u, v, alpha, beta })
    }

    pub fn zero(length: f64, n: usize) -> Self {
        let g = GridFunction {
            x0: 0.0,
            x1: length,
            values: vec![0.0; n + 1],
        };
        BeamState {
            u: g.clone(),
            v: g,
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn u_at_right(&self) -> f64 {
        *self.u.values.last().unwrap()
    }

    /// u_x(L), needed by the Z-membership check.
    pub fn slope_at_right(&self) -> f64 {
        let d1 = self.u.derivative_values(1);
        *d1.last().unwrap()
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut s = self.clone();
        s.u.values.iter_mut().for_each(|v| *v *= a);
        s.v.values.iter_mut().for_each(|v| *v *= a);
        s.alpha *= a;
        s.beta *= a;
        s
    }

    pub fn sub(&self, other: &BeamState) -> Result<Self> {
        if self.u.values.len() != other.u.values.len() {
            return Err(BeamError::GridMismatch("state subtraction".into()));
        }
        let mut s = self.clone();
        for (a, b) in s.u.values.iter_mut().zip(&other.u.values) {
            *a -= b;
        }
        for (a, b) in s.v.values.iter_mut().zip(&other.v.values) {
            *a -= b;
        }
        s.alpha -= other.alpha;
        s.beta -= other.beta;
        Ok(s)
    }
}

/// Z inner product of two states: EI-weighted curvature term, plain u term,
/// rho-weighted velocity term plus the two tip point masses.
pub fn z_inner(z1: &BeamState, z2: &BeamState, params: &BeamParams) -> Result<f64> {
    check_pair(z1, z2)?;
    let n = z1.u.n_intervals();
    let h = z1.u.h();
    let uxx1 = z1.u.derivative_values(2);
    let uxx2 = z2.u.derivative_values(2);
    let mut bend = vec![0.0; n + 1];
    let mut plain = vec![0.0; n + 1];
    let mut kinetic = vec![0.0; n + 1];
    for i in 0..=n {
        let x = z1.u.x0 + i as f64 * h;
        let ei = params.ei.eval(x, params.length);
        let rho = params.rho.eval(x, params.length);
        bend[i] = ei * uxx1[i] * uxx2[i];
        plain[i] = z1.u.values[i] * z2.u.values[i];
        kinetic[i] = rho * z1.v.values[i] * z2.v.values[i];
    }
    Ok(simpson(&bend, h)
        + simpson(&plain, h)
        + simpson(&kinetic, h)
        + params.tip_mass * z1.alpha * z2.alpha
        + params.tip_inertia * z1.beta * z2.beta)
}

/// sqrt of the Z inner product of the state with itself.
pub fn z_norm(state: &BeamState, params: &BeamParams) -> Result<f64> {
    Ok(z_inner(state, state, params)?.max(0.0).sqrt())
}

/// Energy-like norm of Z-tilde (no plain-u term); requires `u(L) = 0`
/// within grid tolerance.
pub fn tilde_z_norm(state: &BeamState, params: &BeamParams) -> Result<f64> {
    let u_max = state.u.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-7 * u_max.max(1.0);
    let u_l = state.u_at_right();
    if u_l.abs() > tol {
        return Err(BeamError::NotInTildeZ { u_at_l: u_l.abs(), tol });
    }
    let plain = z_inner(state, state, params)?;
    // subtract the plain integral term
    let n = state.u.n_intervals();
    let h = state.u.h();
    let sq: Vec<f64> = state.u.values.iter().map(|v| v * v).collect();
    let _ = n;
    Ok((plain - simpson(&sq, h)).max(0.0).sqrt())
}

/// L2 norm over the grid interval by composite Simpson.
pub fn l2_norm(g: &GridFunction) -> f64 {
    let sq: Vec<f64> = g.values.iter().map(|v| v * v).collect();
    simpson(&sq, g.h()).max(0.0).sqrt()
}

/// Full H2 norm: L2 norms of the function and its first two grid
/// derivatives, combined in quadrature.
pub fn h2_norm(g: &GridFunction) -> f64 {
    let d1 = GridFunction {
        x0: g.x0,
        x1: g.x1,
        values: g.derivative_values(1),
    };
    let d2 = GridFunction {
        x0: g.x0,
        x1: g.x1,
        values: g.derivative_values(2),
    };
    let (a, b, c) = (l2_norm(g), l2_norm(&d1), l2_norm(&d2));
    (a * a + b * b + c * c).sqrt()
}

/// Compatibility of a control value with a state: `f(0) = u(L)` up to float
/// noise.
pub fn is_compatible(f0: f64, state: &BeamState) -> bool {
    let u_l = state.u_at_right();
    (f0 - u_l).abs() <= compat_tol(u_l)
}

pub fn compat_tol(u_l: f64) -> f64 {
    1e-9 * u_l.abs().max(1.0)
}

fn check_pair(z1: &BeamState, z2: &BeamState) -> Result<()> {
    if z1.u.values.len() != z2.u.values.len() {
        return Err(BeamError::GridMismatch("states on different grids".into()));
    }
    if z1.u.n_intervals() % 2 != 0 {
        return Err(BeamError::GridMismatch(
            "norm quadrature needs an even interval count".into(),
        ));
    }
    for s in [z1, z2] {
        if s.u.values.iter().chain(&s.v.values).any(|v| !v.is_finite()) {
            return Err(BeamError::NonFinite("state samples".into()));
        }
    }
    Ok(())
}

/// Cubic Lagrange interpolation of uniformly sampled data.
pub fn interp_cubic(values: &[f64], x0: f64, x1: f64, x: f64) -> f64 {
    let n = values.len() - 1;
    let h = (x1 - x0) / n as f64;
    let s = ((x - x0) / h).clamp(0.0, n as f64);
    let mut i0 = s.floor() as usize;
    // 4-node window [i0-1 .. i0+2], shifted inside the grid
    i0 = i0.saturating_sub(1).min(n - 3);
    let t = s - i0 as f64;
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (t - k as f64) / (j as f64 - k as f64);
            }
        }
        acc += w * values[i0 + j];
    }
    acc
}

/// Fornberg's algorithm: weights for the m-th derivative at `z` given node
/// locations `x`. Used to build fourth-order derivative tables with correct
/// one-sided closures near the boundary.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Fourth-order finite-difference derivative table on a uniform grid.
fn derivative_table(values: &[f64], h: f64, order: usize) -> Vec<f64> {
    let n = values.len() - 1;
    assert!(n >= 5, "derivative table needs at least 6 samples");
    let stencil = 6usize;
    let mut out = vec![0.0; n + 1];
    for i in 0..=n {
        let lo = i.saturating_sub(stencil / 2).min(n + 1 - stencil);
        let xs: Vec<f64> = (0..stencil).map(|j| (lo + j) as f64 * h).collect();
        let w = fornberg_weights(i as f64 * h, &xs, order);
        out[i] = w.iter().zip(&values[lo..lo + stencil]).map(|(wi, vi)| wi * vi).sum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::sec6_params;
    use approx::assert_relative_eq;

    fn constant_state(c: f64, length: f64, n: usize) -> BeamState {
        let mut s = BeamState::zero(length, n);
        s.u.values.iter_mut().for_each(|v| *v = c);
        s
    }

    #[test]
    fn zero_state_has_zero_norms() {
        let p = sec6_params(256);
        let z = BeamState::zero(p.length, 256);
        assert_eq!(z_norm(&z, &p).unwrap(), 0.0);
        assert_eq!(tilde_z_norm(&z, &p).unwrap(), 0.0);
    }

    #[test]
    fn z_norm_constant_deflection() {
        // u = 0.3: only the plain integral term survives, sqrt(0.09 * 0.5)
        let p = sec6_params(512);
        let z = constant_state(0.3, p.length, 512);
        assert_relative_eq!(z_norm(&z, &p).unwrap(), 0.045_f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn z_norm_unit_velocity() {
        // v = 1: integral of rho over [0, 0.5] is 0.09625
        let p = sec6_params(512);
        let mut z = BeamState::zero(p.length, 512);
        z.v.values.iter_mut().for_each(|v| *v = 1.0);
        assert_relative_eq!(z_norm(&z, &p).unwrap(), 0.096_25_f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn tilde_norm_adds_tip_mass() {
        let p = sec6_params(512);
        let mut z = BeamState::zero(p.length, 512);
        z.v.values.iter_mut().for_each(|v| *v = 1.0);
        z.alpha = 1.0;
        let expect = (0.096_25 + 0.4_f64).sqrt();
        assert_relative_eq!(tilde_z_norm(&z, &p).unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn tilde_norm_rejects_nonzero_u_at_l() {
        let p = sec6_params(256);
        let z = constant_state(0.2, p.length, 256);
        assert!(matches!(
            tilde_z_norm(&z, &p),
            Err(BeamError::NotInTildeZ { .. })
        ));
    }

    #[test]
    fn tilde_norm_below_z_norm() {
        let p = sec6_params(256);
        let n = 256;
        let mut z = BeamState::zero(p.length, n);
        for i in 0..=n {
            let x = p.length * i as f64 / n as f64;
            z.u.values[i] = x * x * (x - p.length).powi(2);
            z.v.values[i] = (x * 7.0).sin();
        }
        z.alpha = 0.3;
        z.beta = -0.1;
        assert!(tilde_z_norm(&z, &p).unwrap() <= z_norm(&z, &p).unwrap());
    }

    #[test]
    fn compatibility_examples() {
        let p = sec6_params(256);
        let z03 = constant_state(0.3, p.length, 256);
        assert!(is_compatible(0.3, &z03));
        assert!(is_compatible(0.0, &BeamState::zero(p.length, 256)));
        assert!(!is_compatible(0.1, &z03));
    }

    #[test]
    fn grid_refinement_order() {
        // analytic state: norms at n and 2n should converge with order >= 3.5
        let norm_at = |n: usize| {
            let p = sec6_params(n);
            let mut z = BeamState::zero(p.length, n);
            for i in 0..=n {
                let x = p.length * i as f64 / n as f64;
                z.u.values[i] = (3.0 * x).sin() * (1.0 + x);
                z.v.values[i] = (5.0 * x).cos();
            }
            z_norm(&z, &p).unwrap()
        };
        let n0 = norm_at(64);
        let n1 = norm_at(128);
        let n2 = norm_at(256);
        let order = ((n0 - n1).abs() / (n1 - n2).abs()).log2();
        assert!(order >= 3.5, "observed order {order}");
    }

    #[test]
    fn fornberg_matches_known_stencils() {
        let xs: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let w = fornberg_weights(2.0, &xs, 2);
        let expect = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn params_json_round_trip() {
        let p = sec6_params(2048);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"L\""));
        let q = BeamParams::from_json(&s).unwrap();
        assert_eq!(p, q);
    }
}
