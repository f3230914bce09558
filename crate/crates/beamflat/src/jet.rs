//! Truncated Taylor (jet) arithmetic. A jet stores the scaled coefficients
//! c_n = f^(n)(t)/n!, so products are Cauchy convolutions and exp/ln/powf
//! follow the standard power-series recurrences.

use crate::error::{BeamError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    /// expansion point
    pub t: f64,
    /// c[n] = f^(n)(t) / n!
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize, t: f64) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet { t, c }
    }

    /// The identity function s |-> s expanded at t.
    pub fn variable(t: f64, order: usize) -> Self {
        let mut j = Jet::constant(t, order, t);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// n-th derivative value: c_n * n!.
    pub fn deriv(&self, n: usize) -> Result<f64> {
        if n > self.order() {
            return Err(BeamError::JetOrderTooSmall {
                got: self.order(),
                need: n,
            });
        }
        Ok(self.c[n] * factorial(n))
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut r = self.clone();
        for (a, b) in r.c.iter_mut().zip(&other.c) {
            *a += b;
        }
        r
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut r = self.clone();
        for (a, b) in r.c.iter_mut().zip(&other.c) {
            *a -= b;
        }
        r
    }

    pub fn scale(&self, a: f64) -> Jet {
        let mut r = self.clone();
        r.c.iter_mut().for_each(|v| *v *= a);
        r
    }

    /// Cauchy product, truncated to the shorter order.
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.order().min(other.order());
        let mut c = vec![0.0; n + 1];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = (0..=k).map(|i| self.c[i] * other.c[k - i]).sum();
        }
        Jet { t: self.t, c }
    }

    /// exp of the jet: e_0 = exp(c_0), n e_n = sum_{k=1}^{n} k c_k e_{n-k}.
    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.c[0].exp();
        for m in 1..=n {
            let mut acc = 0.0;
            for k in 1..=m {
                acc += k as f64 * self.c[k] * e[m - k];
            }
            e[m] = acc / m as f64;
        }
        Jet { t: self.t, c: e }
    }

    /// ln of the jet; requires a positive constant term.
    pub fn ln(&self) -> Result<Jet> {
        if self.c[0] <= 0.0 {
            return Err(BeamError::OutOfRange(
                "ln of a jet needs a positive constant term".into(),
            ));
        }
        let n = self.order();
        let mut l = vec![0.0; n + 1];
        l[0] = self.c[0].ln();
        for m in 1..=n {
            let mut acc = m as f64 * self.c[m];
            for k in 1..m {
                acc -= k as f64 * l[k] * self.c[m - k];
            }
            l[m] = acc / (m as f64 * self.c[0]);
        }
        Ok(Jet { t: self.t, c: l })
    }

    /// Real power via exp(r * ln self); requires a positive constant term.
    pub fn powf(&self, r: f64) -> Result<Jet> {
        Ok(self.ln()?.scale(r).exp())
    }

    /// Reciprocal: c_0 must be nonzero.
    pub fn recip(&self) -> Result<Jet> {
        if self.c[0] == 0.0 {
            return Err(BeamError::OutOfRange("reciprocal of a jet with zero value".into()));
        }
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / self.c[0];
        for m in 1..=n {
            let mut acc = 0.0;
            for k in 1..=m {
                acc += self.c[k] * r[m - k];
            }
            r[m] = -acc / self.c[0];
        }
        Ok(Jet { t: self.t, c: r })
    }

    /// Jet of s |-> f(T - s) at the reflected point: flips the sign of the
    /// odd coefficients.
    pub fn reflect(&self, total: f64) -> Jet {
        let mut r = self.clone();
        r.t = total - self.t;
        for (n, v) in r.c.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
        r
    }
}

pub fn factorial(n: usize) -> f64 {
    (2..=n).map(|i| i as f64).product::<f64>().max(1.0)
}
