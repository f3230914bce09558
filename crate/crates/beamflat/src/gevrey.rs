//! Gevrey-class reference trajectories: analytic trajectory generators, the
//! smooth bump psi that is flat to all orders at both ends of the horizon,
//! and the blended trajectory y(t) = y0(t) psi(t) + yT(T-t) psi(T-t).

use crate::error::{BeamError, Result};
use crate::jet::Jet;
use crate::quadrature::adaptive_simpson;
use serde::{Deserialize, Serialize};

/// Closed-form trajectory generator; all kinds are real-analytic, so exact
/// jets of any order exist at any t.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryGen {
    Constant { c: f64 },
    /// (coeffs[0] + coeffs[1] t + ...) * exp(rate * t)
    PolyExp { coeffs: Vec<f64>, rate: f64 },
    /// amp * sin(omega t + phase)
    Sinusoid { amp: f64, omega: f64, phase: f64 },
    Sum { terms: Vec<TrajectoryGen> },
}

impl TrajectoryGen {
    pub fn jet(&self, t: f64, order: usize) -> Jet {
        match self {
            TrajectoryGen::Constant { c } => Jet::constant(*c, order, t),
            TrajectoryGen::PolyExp { coeffs, rate } => {
                let var = Jet::variable(t, order);
                let mut poly = Jet::constant(0.0, order, t);
                for &a in coeffs.iter().rev() {
                    poly = poly.mul(&var).add(&Jet::constant(a, order, t));
                }
                poly.mul(&var.scale(*rate).exp())
            }
            TrajectoryGen::Sinusoid { amp, omega, phase } => {
                let mut c = vec![0.0; order + 1];
                let mut fact = 1.0;
                for (n, cn) in c.iter_mut().enumerate() {
                    if n > 0 {
                        fact *= n as f64;
                    }
                    let shift = omega * t + phase + n as f64 * std::f64::consts::FRAC_PI_2;
                    *cn = amp * omega.powi(n as i32) * shift.sin() / fact;
                }
                Jet { t, c }
            }
            TrajectoryGen::Sum { terms } => {
                let mut acc = Jet::constant(0.0, order, t);
                for term in terms {
                    acc = acc.add(&term.jet(t, order));
                }
                acc
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t, 0).value()
    }
}

/// The bump parameters: horizon, Gevrey order, and the cached normalization
/// integral of psi0 over [0, T].
#[derive(Debug, Clone)]
pub struct BumpSpec {
    pub horizon: f64,
    pub s: f64,
    pub norm_const: f64,
}

// exp(-arg) is below double resolution past this; the bump and all its
// derivatives are then returned as exact endpoint jets
const CLAMP_EXPONENT: f64 = 700.0;

fn psi0_value(t: f64, horizon: f64, s: f64) -> f64 {
    let tau = t / horizon;
    let v = (1.0 - tau) * tau;
    if v <= 0.0 {
        return 0.0;
    }
    let arg = v.powf(-1.0 / (s - 1.0));
    if arg > CLAMP_EXPONENT {
        0.0
    } else {
        (-arg).exp()
    }
}

impl BumpSpec {
    pub fn new(horizon: f64, s: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(BeamError::InvalidParameter("T must be positive".into()));
        }
        if !(s > 1.0 && s < 2.0) {
            return Err(BeamError::InvalidParameter(
                "Gevrey order s must lie in (1, 2)".into(),
            ));
        }
        // psi0 is symmetric about T/2; integrating the half range keeps
        // psi(T/2) = 1/2 exact by construction
        let half = adaptive_simpson(&|t| psi0_value(t, horizon, s), 0.0, horizon / 2.0, 1e-12);
        Ok(BumpSpec {
            horizon,
            s,
            norm_const: 2.0 * half,
        })
    }

    /// Jet of psi at t. Exact at (and exponentially near) the endpoints:
    /// (1, 0, ...) on the left, all zeros on the right.
    pub fn psi_jet(&self, t: f64, order: usize) -> Result<Jet> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(BeamError::OutOfRange(format!("t = {t} outside [0, T]")));
        }
        let left_jet = || Jet::constant(1.0, order, t);
        let right_jet = || Jet::constant(0.0, order, t);
        let tau = t / self.horizon;
        let v0 = (1.0 - tau) * tau;
        if v0 <= 0.0 || v0.powf(-1.0 / (self.s - 1.0)) > CLAMP_EXPONENT {
            return Ok(if t < self.horizon / 2.0 {
                left_jet()
            } else {
                right_jet()
            });
        }
        // jet of psi0 = exp(-v^{-1/(s-1)}) with v = (1 - t/T)(t/T)
        let var = Jet::variable(t, order).scale(1.0 / self.horizon);
        let v = var.mul(&Jet::constant(1.0, order, t).sub(&var));
        let psi0 = v.powf(-1.0 / (self.s - 1.0))?.scale(-1.0).exp();
        // psi' = -psi0 / norm_const; c_0 from the cumulative integral using
        // the symmetry of psi0 about T/2
        let c0 = if t <= self.horizon / 2.0 {
            1.0 - adaptive_simpson(&|u| psi0_value(u, self.horizon, self.s), 0.0, t, 1e-12)
                / self.norm_const
        } else {
            adaptive_simpson(
                &|u| psi0_value(u, self.horizon, self.s),
                0.0,
                self.horizon - t,
                1e-12,
            ) / self.norm_const
        };
        let mut c = vec![0.0; order + 1];
        c[0] = c0;
        for n in 0..order {
            c[n + 1] = -psi0.c[n] / (self.norm_const * (n + 1) as f64);
        }
        Ok(Jet { t, c })
    }
}

/// Jet of the blended trajectory y(t) = y0(t) psi(t) + yT(T-t) psi(T-t).
///
/// psi(T-t) = 1 - psi(t) holds identically (cumulative-integral definition
/// plus symmetry of psi0), so the complement jet is formed exactly rather
/// than re-evaluated; yT(T-t) goes through the jet reflection.
pub fn blend_y(
    y0: &TrajectoryGen,
    y_t: &TrajectoryGen,
    spec: &BumpSpec,
    t: f64,
    order: usize,
) -> Result<Jet> {
    let psi = spec.psi_jet(t, order)?;
    let psi_c = Jet::constant(1.0, order, t).sub(&psi);
    let j0 = y0.jet(t, order);
    let jt = y_t.jet(spec.horizon - t, order).reflect(spec.horizon);
    Ok(j0.mul(&psi).add(&jt.mul(&psi_c)))
}

/// Max mismatch between the blended trajectory's endpoint derivatives and
/// the generators' own derivatives at 0, relative to max(1, |y0^(n)(0)|).
pub fn endpoint_match(
    y0: &TrajectoryGen,
    y_t: &TrajectoryGen,
    spec: &BumpSpec,
    order: usize,
) -> Result<f64> {
    let at0 = blend_y(y0, y_t, spec, 0.0, order)?;
    let at_t = blend_y(y0, y_t, spec, spec.horizon, order)?;
    let ref0 = y0.jet(0.0, order);
    let ref_t = y_t.jet(0.0, order);
    let mut worst = 0.0_f64;
    for n in 0..=order {
        let scale = ref0.deriv(n)?.abs().max(1.0);
        worst = worst.max((at0.deriv(n)? - ref0.deriv(n)?).abs() / scale);
        worst = worst.max((at_t.deriv(n)? - ref_t.deriv(n)? * (-1.0_f64).powi(n as i32)).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_bump() -> BumpSpec {
        BumpSpec::new(3.0, 1.5).unwrap()
    }

    #[test]
    fn endpoint_jets_exact() {
        let b = default_bump();
        let left = b.psi_jet(0.0, 24).unwrap();
        assert_eq!(left.c[0], 1.0);
        assert!(left.c[1..].iter().all(|&v| v == 0.0));
        let right = b.psi_jet(3.0, 24).unwrap();
        assert!(right.c.iter().all(|&v| v == 0.0));
        // exponentially close to the ends the clamp returns the same jets
        let near = b.psi_jet(1e-9, 24).unwrap();
        assert_eq!(near.c, left.c);
        let near_t = b.psi_jet(3.0 - 1e-9, 24).unwrap();
        assert!(near_t.c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn midpoint_half_by_symmetry() {
        let b = default_bump();
        let mid = b.psi_jet(1.5, 4).unwrap();
        assert_relative_eq!(mid.c[0], 0.5, max_relative = 1e-12);
        assert!(mid.c[1] < 0.0);
    }

    #[test]
    fn psi_nonincreasing_and_in_unit_interval() {
        let b = default_bump();
        let mut prev = 1.0;
        for i in 0..=300 {
            let t = 3.0 * i as f64 / 300.0;
            let p = b.psi_jet(t, 1).unwrap();
            assert!(p.c[0] <= prev + 1e-12, "t = {t}");
            assert!((0.0..=1.0).contains(&p.c[0]));
            assert!(p.c[1] <= 0.0);
            prev = p.c[0];
        }
    }

    #[test]
    fn derivative_consistent_with_finite_difference() {
        let b = default_bump();
        let t = 1.1;
        let eps = 1e-6;
        let j = b.psi_jet(t, 3).unwrap();
        let fd = (b.psi_jet(t + eps, 0).unwrap().c[0] - b.psi_jet(t - eps, 0).unwrap().c[0])
            / (2.0 * eps);
        assert_relative_eq!(j.deriv(1).unwrap(), fd, max_relative = 1e-7);
    }

    #[test]
    fn gevrey_growth_bound_with_fitted_constant() {
        // sup |psi^(n)| <= D^{n+1} (n!)^s: fit D on n <= 12, then verify the
        // bound with a 2x margin up to n = 24
        let b = default_bump();
        let order = 24;
        let mut sup = vec![0.0_f64; order + 1];
        for i in 1..600 {
            let t = 3.0 * i as f64 / 600.0;
            let j = b.psi_jet(t, order).unwrap();
            for (n, s) in sup.iter_mut().enumerate() {
                *s = s.max(j.deriv(n).unwrap().abs());
            }
        }
        let ln_fact = |n: usize| (2..=n).map(|i| (i as f64).ln()).sum::<f64>();
        let mut d = 1.0_f64;
        for (n, &m) in sup.iter().enumerate().take(13) {
            if m > 0.0 {
                d = d.max(((m.ln() - b.s * ln_fact(n)) / (n as f64 + 1.0)).exp());
            }
        }
        for (n, &m) in sup.iter().enumerate() {
            if m > 0.0 {
                let ln_bound = (n as f64 + 1.0) * (2.0 * d).ln() + b.s * ln_fact(n);
                assert!(m.ln() <= ln_bound, "n = {n}: sup {m:e}");
            }
        }
    }

    #[test]
    fn blend_endpoints_example_one() {
        let b = default_bump();
        let y0 = TrajectoryGen::Constant { c: 0.3 };
        let yt = TrajectoryGen::Constant { c: 0.0 };
        let at0 = blend_y(&y0, &yt, &b, 0.0, 8).unwrap();
        assert_eq!(at0.c[0], 0.3);
        assert!(at0.c[1..].iter().all(|&v| v == 0.0));
        let at3 = blend_y(&y0, &yt, &b, 3.0, 8).unwrap();
        assert!(at3.c.iter().all(|&v| v == 0.0));
        assert_eq!(endpoint_match(&y0, &yt, &b, 8).unwrap(), 0.0);
    }

    #[test]
    fn blend_endpoints_example_two() {
        // y0 = 1 + 10 t^2 e^{-2t}: y0''(0) = 20, so c_2 = 10
        let b = default_bump();
        let y0 = TrajectoryGen::Sum {
            terms: vec![
                TrajectoryGen::Constant { c: 1.0 },
                TrajectoryGen::PolyExp {
                    coeffs: vec![0.0, 0.0, 10.0],
                    rate: -2.0,
                },
            ],
        };
        let yt = TrajectoryGen::Constant { c: 0.0 };
        let j = blend_y(&y0, &yt, &b, 0.0, 8).unwrap();
        assert_eq!(j.c[0], 1.0);
        assert_eq!(j.c[1], 0.0);
        assert_relative_eq!(j.c[2], 10.0, max_relative = 1e-13);
        assert_eq!(endpoint_match(&y0, &yt, &b, 8).unwrap(), 0.0);
    }

    #[test]
    fn constant_blend_is_identity() {
        // y0 = yT = c: psi(t) + psi(T-t) = 1 identically, so y = c
        let b = default_bump();
        let y = TrajectoryGen::Constant { c: 2.5 };
        for i in 0..=30 {
            let t = 3.0 * i as f64 / 30.0;
            let j = blend_y(&y, &y, &b, t, 6).unwrap();
            assert_relative_eq!(j.c[0], 2.5, max_relative = 1e-13);
            for &v in &j.c[1..] {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sinusoid_jet_matches_closed_form() {
        let g = TrajectoryGen::Sinusoid {
            amp: 2.0,
            omega: 3.0,
            phase: 0.4,
        };
        let t = 0.7;
        let j = g.jet(t, 10);
        // f'' = -omega^2 f
        assert_relative_eq!(
            j.deriv(2).unwrap(),
            -9.0 * j.deriv(0).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            j.deriv(1).unwrap(),
            2.0 * 3.0 * (3.0 * t + 0.4).cos(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn trajectory_json_round_trip() {
        let g = TrajectoryGen::Sum {
            terms: vec![
                TrajectoryGen::Constant { c: 1.0 },
                TrajectoryGen::PolyExp {
                    coeffs: vec![0.0, 0.0, 10.0],
                    rate: -2.0,
                },
            ],
        };
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("poly_exp"));
        let back: TrajectoryGen = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(BumpSpec::new(3.0, 2.5).is_err());
        assert!(BumpSpec::new(-1.0, 1.5).is_err());
        assert!(default_bump().psi_jet(3.5, 2).is_err());
    }
}
