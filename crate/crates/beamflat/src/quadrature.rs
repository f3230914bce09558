//! Quadrature kernels shared by the norm, generating-function and bump
//! machinery: composite Simpson, a fourth-order cumulative integrator and
//! adaptive Simpson for one-off integrals.

/// Composite Simpson on a uniform grid. Requires an even number of intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 2 && n % 2 == 0, "simpson needs an even interval count");
    let mut acc = values[0] + values[n];
    for (i, &v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Cumulative antiderivative of uniformly sampled data: returns F with
/// F[0] = 0 and F[i] ~ integral of f from x0 to x0 + i*h.
///
/// Per-interval rules never look more than one node ahead, so integrands
/// vanishing to high order at the left endpoint are not polluted by large
/// samples further right (the generating-function cascades integrate
/// functions behaving like x^p with p up to 4K near x = 0):
///   interval 0:   trapezoid,
///   interval 1:   quadratic through nodes {0,1,2},
///   interval i>1: cubic through nodes {i-2,i-1,i,i+1} (Adams-Moulton).
/// Fourth-order away from the startup intervals.
pub fn cumulative_integral(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "cumulative_integral needs at least 4 samples");
    let f = values;
    let mut out = vec![0.0; n];
    out[1] = h * (f[0] + f[1]) / 2.0;
    out[2] = out[1] + h * (-f[0] + 8.0 * f[1] + 5.0 * f[2]) / 12.0;
    for i in 2..n - 1 {
        let inc = h * (f[i - 2] - 5.0 * f[i - 1] + 19.0 * f[i] + 9.0 * f[i + 1]) / 24.0;
        out[i + 1] = out[i] + inc;
    }
    out
}

/// Cumulative antiderivative when the sampled derivative of the integrand
/// is also available: the two-point cubic Hermite rule
/// `h (f_i + f_{i+1})/2 + h^2 (f'_i - f'_{i+1})/12` per interval.
///
/// Strictly local (no lookahead at all) and fourth-order with no startup
/// penalty, so it is the rule of choice inside the generating-function
/// cascades where each integrand's derivative is known exactly.
pub fn cumulative_integral_hermite(f: &[f64], fp: &[f64], h: f64) -> Vec<f64> {
    assert_eq!(f.len(), fp.len());
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let inc = h * (f[i] + f[i + 1]) / 2.0 + h * h * (fp[i] - fp[i + 1]) / 12.0;
        out[i + 1] = out[i] + inc;
    }
    out
}

/// Hermite cumulative integration of a function known to vanish like `x^q`
/// at the left endpoint.
///
/// A plain polynomial rule is never exact on the leading monomial, so its
/// relative error at the first nodes grows like `q^4` per pass and compounds
/// geometrically when the output is integrated again (the
/// generating-function cascades apply dozens of passes). Near the origin the
/// integrand is therefore written as `x^q * phi(x)` with `phi` smooth:
/// `phi` is fitted with a cubic Hermite per interval and `x^q * cubic` is
/// integrated in closed form, which is exact on the leading monomials.
/// Beyond `x ~ 2 q h` the plain Hermite rule takes over.
pub fn cumulative_integral_monomial(f: &[f64], fp: &[f64], h: f64, q: usize) -> Vec<f64> {
    if q == 0 {
        return cumulative_integral_hermite(f, fp, h);
    }
    assert_eq!(f.len(), fp.len());
    let n = f.len();
    let mut out = vec![0.0; n];
    // interval 0: fit a x^q + b x^{q+1} to the node-1 data and integrate
    let qf = q as f64;
    let lead = (qf + 1.0) * f[1] - h * fp[1]; // a h^q
    let next = h * fp[1] - qf * f[1]; //        b h^{q+1}
    out[1] = h * (lead / (qf + 1.0) + next / (qf + 2.0));
    let cutoff = (2 * q).min(n - 1);
    for i in 1..n - 1 {
        let inc = if i < cutoff {
            weighted_hermite_interval(f, fp, h, q, i)
        } else {
            h * (f[i] + f[i + 1]) / 2.0 + h * h * (fp[i] - fp[i + 1]) / 12.0
        };
        out[i + 1] = out[i] + inc;
    }
    out
}

// Integral over [ih, (i+1)h] of x^q * H(x) where H is the cubic Hermite
// interpolant of phi = f / x^q; the moments of x^q (x - u)^j are closed-form.
fn weighted_hermite_interval(f: &[f64], fp: &[f64], h: f64, q: usize, i: usize) -> f64 {
    let u = i as f64 * h;
    let v = u + h;
    let qf = q as f64;
    let uq = u.powi(q as i32);
    let vq = v.powi(q as i32);
    if uq == 0.0 || vq == 0.0 {
        // x^q below the subnormal range: the contribution is negligible
        return h * (f[i] + f[i + 1]) / 2.0 + h * h * (fp[i] - fp[i + 1]) / 12.0;
    }
    let pu = f[i] / uq;
    let pv = f[i + 1] / vq;
    let dpu = (fp[i] - qf * f[i] / u) / uq;
    let dpv = (fp[i + 1] - qf * f[i + 1] / v) / vq;
    let c = [
        pu,
        dpu,
        (3.0 * (pv - pu) - h * (2.0 * dpu + dpv)) / (h * h),
        (-2.0 * (pv - pu) + h * (dpu + dpv)) / (h * h * h),
    ];
    let binom = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ];
    let mut acc = 0.0;
    for (j, &cj) in c.iter().enumerate() {
        let mut mj = 0.0;
        for r in 0..=j {
            let p = (q + r + 1) as i32;
            let diff = v.powi(p) - u.powi(p);
            mj += binom[j][r] * (-u).powi((j - r) as i32) * diff / p as f64;
        }
        acc += cj * mj;
    }
    acc
}

/// Adaptive Simpson to the requested relative tolerance (with a small
/// absolute floor so integrals of functions that are essentially zero
/// terminate).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, rel_tol * whole.abs().max(1e-300), 50)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Kahan-compensated accumulator for series whose terms span many orders
/// of magnitude.
#[derive(Debug, Default, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_exact_on_cubics() {
        let n = 64;
        let h = 1.0 / n as f64;
        let vals: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(3)).collect();
        assert_relative_eq!(simpson(&vals, h), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn cumulative_fourth_order_on_smooth_data() {
        // integral of cos from 0 to x is sin x
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let vals: Vec<f64> = (0..=n).map(|i| (i as f64 * h).cos()).collect();
            let cum = cumulative_integral(&vals, h);
            cum.iter()
                .enumerate()
                .map(|(i, &c)| (c - (i as f64 * h).sin()).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(64);
        let e2 = err(128);
        // the trapezoid startup interval contributes a one-time O(h^3) term
        assert!(e1 / e2 > 7.0, "observed ratio {}", e1 / e2);
        assert!(e2 < 1e-7);
    }

    #[test]
    fn hermite_cumulative_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let f: Vec<f64> = (0..=n).map(|i| (i as f64 * h).cos()).collect();
            let fp: Vec<f64> = (0..=n).map(|i| -(i as f64 * h).sin()).collect();
            let cum = cumulative_integral_hermite(&f, &fp, h);
            cum.iter()
                .enumerate()
                .map(|(i, &c)| (c - (i as f64 * h).sin()).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(64);
        let e2 = err(128);
        assert!(e1 / e2 > 14.0, "observed ratio {}", e1 / e2);
        assert!(e2 < 1e-9);
    }

    #[test]
    fn hermite_no_lookahead_pollution() {
        // f ~ x^20 near the left end: the startup value must stay within
        // ~p^2/12 of the true integral rather than blowing up geometrically.
        let n = 256;
        let h = 1.0 / n as f64;
        let p = 20;
        let f: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(p)).collect();
        let fp: Vec<f64> = (0..=n)
            .map(|i| p as f64 * (i as f64 * h).powi(p - 1))
            .collect();
        let cum = cumulative_integral_hermite(&f, &fp, h);
        let truth = |x: f64| x.powi(p + 1) / (p + 1) as f64;
        assert!((cum[1] / truth(h)).abs() < 50.0);
        assert!((cum[2] / truth(2.0 * h)).abs() < 50.0);
    }

    #[test]
    fn cumulative_no_lookahead_pollution() {
        // f ~ x^20: the startup value at node 1 must stay within a modest
        // factor of the true integral, not blow up by 3^20.
        let n = 256;
        let h = 1.0 / n as f64;
        let p = 20;
        let vals: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(p)).collect();
        let cum = cumulative_integral(&vals, h);
        let truth = |x: f64| x.powi(p + 1) / (p + 1) as f64;
        assert!(cum[1] / truth(h) < 15.0);
        assert!(cum[2] / truth(2.0 * h) < 15.0);
    }

    #[test]
    fn monomial_rule_exact_on_leading_terms() {
        // f = x^q (2 - x): every node value must be accurate in a relative
        // sense, including node 1 where the truth is ~ h^(q+1).
        let n = 256;
        let h = 1.0 / n as f64;
        let q = 17;
        let f: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                x.powi(q) * (2.0 - x)
            })
            .collect();
        let fp: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                q as f64 * x.powi(q - 1) * (2.0 - x) - x.powi(q)
            })
            .collect();
        let cum = cumulative_integral_monomial(&f, &fp, h, q as usize);
        let truth = |x: f64| {
            2.0 * x.powi(q + 1) / (q + 1) as f64 - x.powi(q + 2) / (q + 2) as f64
        };
        for i in 1..=n {
            let x = i as f64 * h;
            let rel = (cum[i] - truth(x)).abs() / truth(x).abs();
            // weighted region is exact here (phi is linear); past the
            // crossover the plain rule's q^4/(720 i^4) truncation applies
            let tol = if i < 2 * q as usize { 1e-10 } else { 1e-3 };
            assert!(rel < tol, "node {i}: rel = {rel}");
        }
    }

    #[test]
    fn adaptive_simpson_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), 0.0, 1.0, 1e-12);
        assert_relative_eq!(v, 0.746_824_132_812_427_4, max_relative = 1e-11);
    }
}
