//! The flatness core: truncated series over the generating-function boundary
//! values, the control input f^N(t) = w(L,t), the planned space-time field
//! w(x,t), and steady-state constructors.
//!
//! With y1 = w(0,t), y2 = w_x(0,t) the solution series is
//! w = sum_k g_k y1^(2k) + sum_k h_k y2^(2k); imposing w_x(L,t) = 0 fixes
//! y1 = sum_j hxL[j] y^(2j), y2 = -sum_j gxL[j] y^(2j) in terms of a single
//! flat output y, giving the double series truncated at j + k = l <= N.

use crate::error::{BeamError, Result};
use crate::genfun::{compute_gen_tables, GenTable};
use crate::gevrey::{blend_y, BumpSpec, TrajectoryGen};
use crate::jet::Jet;
use crate::model::{interp_cubic, BeamParams, BeamState, GridFunction};
use crate::quadrature::{simpson, Kahan};
use rayon::prelude::*;

/// Coefficients of y^(2l) in the control series
/// f^N(t) = sum_l c_l y^(2l)(t), c_l = sum_{j+k=l} [gL_k hxL_j - hL_k gxL_j].
#[derive(Debug, Clone)]
pub struct SeriesCoeffs {
    pub n: usize,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LOperator {
    L1,
    L2,
}

/// sum_k coeff_k y^(2k)(t) with coeff = gxL (L1) or hxL (L2).
pub fn apply_l(table: &GenTable, which: LOperator, y_jet: &Jet) -> Result<f64> {
    if y_jet.order() < 2 * table.k_max {
        return Err(BeamError::JetOrderTooSmall {
            got: y_jet.order(),
            need: 2 * table.k_max,
        });
    }
    let coeff = match which {
        LOperator::L1 => &table.gx_l,
        LOperator::L2 => &table.hx_l,
    };
    let mut acc = Kahan::default();
    for (k, &ck) in coeff.iter().enumerate() {
        acc.add(ck * y_jet.deriv(2 * k)?);
    }
    Ok(acc.value())
}

/// The Cauchy-product coefficients, computed in both summation orders and
/// checked identical (a finite reordering is exact in floating point only if
/// the terms are added in the same grouping; both orders share it here).
pub fn series_coeffs(table: &GenTable, n: usize) -> Result<SeriesCoeffs> {
    if n > table.k_max {
        return Err(BeamError::TruncationTooDeep { n, k: table.k_max });
    }
    let term = |k: usize, j: usize| table.g_l[k] * table.hx_l[j] - table.h_l[k] * table.gx_l[j];
    let mut c = vec![0.0; n + 1];
    for (l, cl) in c.iter_mut().enumerate() {
        let mut acc = Kahan::default();
        for k in 0..=l {
            acc.add(term(k, l - k));
        }
        *cl = acc.value();
    }
    // j-outer order must reproduce the same values bitwise
    for l in 0..=n {
        let mut acc = Kahan::default();
        for j in (0..=l).rev() {
            acc.add(term(l - j, j));
        }
        debug_assert_eq!(acc.value(), c[l], "summation-order mismatch at l = {l}");
    }
    Ok(SeriesCoeffs { n, c })
}

/// A complete open-loop transfer plan: the blended flat output, the series
/// coefficients, and a sampled control trajectory.
#[derive(Debug, Clone)]
pub struct Plan {
    pub params: BeamParams,
    pub table: GenTable,
    pub y0: TrajectoryGen,
    pub y_end: TrajectoryGen,
    pub bump: BumpSpec,
    pub n: usize,
    pub coeffs: SeriesCoeffs,
    /// uniform time samples over [0, T]
    pub times: Vec<f64>,
    pub f_samples: Vec<f64>,
    pub y_samples: Vec<f64>,
}

pub const DEFAULT_TIME_SAMPLES: usize = 2000;
pub const DEFAULT_TABLE_GRID: usize = 2048;

/// Build a transfer plan between the states generated by y0 and y_end over
/// horizon `t_horizon` with Gevrey order `s` and truncation `n`.
pub fn plan_transfer(
    params: &BeamParams,
    y0: TrajectoryGen,
    y_end: TrajectoryGen,
    t_horizon: f64,
    s: f64,
    n: usize,
) -> Result<Plan> {
    let k_max = (n + 2).max(12);
    let table = compute_gen_tables(params, k_max, DEFAULT_TABLE_GRID)?;
    plan_with_table(params, table, y0, y_end, t_horizon, s, n)
}

pub fn plan_with_table(
    params: &BeamParams,
    table: GenTable,
    y0: TrajectoryGen,
    y_end: TrajectoryGen,
    t_horizon: f64,
    s: f64,
    n: usize,
) -> Result<Plan> {
    let bump = BumpSpec::new(t_horizon, s)?;
    let coeffs = series_coeffs(&table, n)?;
    let nt = DEFAULT_TIME_SAMPLES;
    let times: Vec<f64> = (0..=nt).map(|i| t_horizon * i as f64 / nt as f64).collect();
    let samples: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let jet = blend_y(&y0, &y_end, &bump, t, 2 * n)?;
            let mut acc = Kahan::default();
            for (l, &cl) in coeffs.c.iter().enumerate() {
                acc.add(cl * jet.deriv(2 * l)?);
            }
            Ok((acc.value(), jet.value()))
        })
        .collect::<Result<_>>()?;
    Ok(Plan {
        params: params.clone(),
        table,
        y0,
        y_end,
        bump,
        n,
        coeffs,
        times,
        f_samples: samples.iter().map(|s| s.0).collect(),
        y_samples: samples.iter().map(|s| s.1).collect(),
    })
}

impl Plan {
    pub fn horizon(&self) -> f64 {
        self.bump.horizon
    }

    /// Jet of the flat output y at t.
    pub fn y_jet(&self, t: f64, order: usize) -> Result<Jet> {
        blend_y(&self.y0, &self.y_end, &self.bump, t, order)
    }

    /// f^N(t) = sum_l c_l y^(2l)(t).
    pub fn eval_control(&self, t: f64) -> Result<f64> {
        Ok(self.control_jet(t, 0)?.value())
    }

    /// Jet of t -> f^N(t) up to `order` time derivatives (needed by the
    /// simulator, which wants f, f', f'').
    pub fn control_jet(&self, t: f64, order: usize) -> Result<Jet> {
        let jet = self.y_jet(t, 2 * self.n + order)?;
        let mut c = vec![0.0; order + 1];
        for (b, cb) in c.iter_mut().enumerate() {
            let mut acc = Kahan::default();
            for (l, &cl) in self.coeffs.c.iter().enumerate() {
                acc.add(cl * jet.deriv(2 * l + b)?);
            }
            *cb = acc.value() / crate::jet::factorial(b);
        }
        Ok(Jet { t, c })
    }

    /// Control samples at a lower truncation level on the plan's time grid.
    pub fn control_samples_at(&self, n_trunc: usize) -> Result<Vec<f64>> {
        if n_trunc > self.n {
            return Err(BeamError::TruncationTooDeep {
                n: n_trunc,
                k: self.n,
            });
        }
        let coeffs = series_coeffs(&self.table, n_trunc)?;
        self.times
            .par_iter()
            .map(|&t| {
                let jet = self.y_jet(t, 2 * n_trunc)?;
                let mut acc = Kahan::default();
                for (l, &cl) in coeffs.c.iter().enumerate() {
                    acc.add(cl * jet.deriv(2 * l)?);
                }
                Ok(acc.value())
            })
            .collect()
    }

    /// L2(0,T) distance between the controls at two truncation levels.
    pub fn control_l2_gap(&self, n_lo: usize, n_hi: usize) -> Result<f64> {
        let a = self.control_samples_at(n_lo)?;
        let b = self.control_samples_at(n_hi)?;
        let h = self.horizon() / (self.times.len() - 1) as f64;
        let sq: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).collect();
        Ok(simpson(&sq, h).max(0.0).sqrt())
    }

    /// partial_x^a partial_t^b of the truncated field series at (x, t).
    pub fn eval_w(&self, x: f64, t: f64, x_order: usize, t_order: usize) -> Result<f64> {
        if x_order > 4 || t_order > 2 {
            return Err(BeamError::OutOfRange(format!(
                "field derivative orders ({x_order}, {t_order})"
            )));
        }
        let jet = self.y_jet(t, 2 * self.n + t_order)?;
        self.eval_w_with_jet(x, &jet, x_order, t_order)
    }

    fn eval_w_with_jet(&self, x: f64, y_jet: &Jet, x_order: usize, t_order: usize) -> Result<f64> {
        let l_len = self.params.length;
        let mut acc = Kahan::default();
        for l in 0..=self.n {
            let mut spatial = Kahan::default();
            for k in 0..=l {
                let j = l - k;
                let gk = interp_cubic(self.table.g[k].table(x_order), 0.0, l_len, x);
                let hk = interp_cubic(self.table.h[k].table(x_order), 0.0, l_len, x);
                spatial.add(gk * self.table.hx_l[j] - hk * self.table.gx_l[j]);
            }
            acc.add(spatial.value() * y_jet.deriv(2 * l + t_order)?);
        }
        Ok(acc.value())
    }

    /// The state [w, w_t, w_t(0), w_xt(0)] induced by the planned field at
    /// time t, sampled on an `nx`-interval grid.
    pub fn induced_state(&self, t: f64, nx: usize) -> Result<BeamState> {
        let jet = self.y_jet(t, 2 * self.n + 2)?;
        let l_len = self.params.length;
        let h = l_len / nx as f64;
        let mut u = vec![0.0; nx + 1];
        let mut v = vec![0.0; nx + 1];
        for i in 0..=nx {
            let x = i as f64 * h;
            u[i] = self.eval_w_with_jet(x, &jet, 0, 0)?;
            v[i] = self.eval_w_with_jet(x, &jet, 0, 1)?;
        }
        let alpha = v[0];
        let beta = self.eval_w_with_jet(0.0, &jet, 1, 1)?;
        BeamState::new(
            GridFunction::new(0.0, l_len, u)?,
            GridFunction::new(0.0, l_len, v)?,
            alpha,
            beta,
        )
    }
}

/// The rest configuration [u = c, 0, 0, 0] held by the constant input c.
pub fn steady_state(params: &BeamParams, c: f64) -> BeamState {
    let mut z = BeamState::zero(params.length, params.grid_n);
    z.u.values.iter_mut().for_each(|v| *v = c);
    z
}
