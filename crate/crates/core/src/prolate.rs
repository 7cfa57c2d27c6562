//! Order-zero prolate spheroidal wave function `psi_0^c` on `[-1, 1]`.
//!
//! `psi_0^c` is the eigenfunction of `F_c[f](x) = int_{-1}^{1} f(t) e^{icxt} dt`
//! with the largest eigenvalue. It also diagonalises the commuting
//! differential operator `-(d/dx)(1-x^2)(d/dx) + c^2 x^2`, which is symmetric
//! tridiagonal in the normalised even Legendre basis; `psi_0^c` belongs to its
//! smallest eigenvalue.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, ceil, composite_rule, cos, gauss_legendre, ln, sqrt};

const MAX_TERMS: usize = 4096;

/// Legendre expansion `psi(x) = sum_k d_k P_{2k}(x)`, scaled so `psi(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlateExpansion {
    c: f64,
    coeffs: Vec<f64>,
    eigenvalue: f64,
    l2_norm: f64,
    /// 24-point Gauss-Legendre rule on `[-1, 1]`, reused by the quadratures.
    rule: (Vec<f64>, Vec<f64>),
}

impl ProlateExpansion {
    /// Solve for `psi_0^c`. Terms are added until the trailing coefficient is
    /// below `min(tol, 1e-15)` times the largest one.
    pub fn new(c: f64, tol: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter("prolate bandwidth c must be positive"));
        }
        if !(1e-16..=1e-6).contains(&tol) {
            return Err(Error::InvalidParameter(
                "prolate tolerance must be in [1e-16, 1e-6]",
            ));
        }
        let threshold = tol.min(1e-15);
        let mut terms = 2 * ceil(c) as usize + 30;
        loop {
            let a = smallest_eigenvector(c, terms);
            let max = a.iter().fold(0.0f64, |m, &v| m.max(abs(v)));
            let tail = abs(a[terms - 1]);
            if tail <= threshold * max {
                return Ok(Self::from_normalized(c, &a));
            }
            terms *= 2;
            if terms > MAX_TERMS {
                return Err(Error::NotConverged { c, terms });
            }
        }
    }

    fn from_normalized(c: f64, a: &[f64]) -> Self {
        // orthonormal basis sqrt(n + 1/2) P_n  ->  plain P_n
        let mut coeffs: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(k, &ak)| ak * sqrt(2.0 * k as f64 + 0.5))
            .collect();
        // drop negligible tail so evaluation cost tracks c
        let max = coeffs.iter().fold(0.0f64, |m, &v| m.max(abs(v)));
        while coeffs.len() > 1 && abs(*coeffs.last().unwrap()) < 1e-20 * max {
            coeffs.pop();
        }
        let mut p0 = 1.0;
        let mut at_zero = 0.0;
        for (k, d) in coeffs.iter().enumerate() {
            if k > 0 {
                p0 *= -(2.0 * k as f64 - 1.0) / (2.0 * k as f64);
            }
            at_zero += d * p0;
        }
        for d in coeffs.iter_mut() {
            *d /= at_zero;
        }
        let l2_norm = sqrt(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, d)| d * d * 2.0 / (4.0 * k as f64 + 1.0))
                .sum(),
        );
        let mut out = Self {
            c,
            coeffs,
            eigenvalue: 0.0,
            l2_norm,
            rule: gauss_legendre(24),
        };
        // lambda_0 = F_c[psi](0) / psi(0)
        out.eigenvalue = out.fourier(0.0);
        out
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Coefficients of `P_0, P_2, P_4, ...` under `psi(0) = 1`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Largest eigenvalue of `F_c`; real and positive for the order-zero function.
    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    /// `||psi||_2` over `[-1, 1]` under `psi(0) = 1`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// `psi(1)` for the L2-normalised function. This is the precision level
    /// that the shape parameter is solved against.
    pub fn edge_value(&self) -> f64 {
        self.coeffs.iter().sum::<f64>() / self.l2_norm
    }

    /// Value and derivative; zero outside `[-1, 1]`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if !(abs(x) <= 1.0) {
            return (0.0, 0.0);
        }
        let nmax = 2 * (self.coeffs.len() - 1);
        let (mut p_prev, mut p) = (1.0, x);
        let (mut dp_prev, mut dp) = (0.0, 1.0);
        let mut value = self.coeffs[0];
        let mut deriv = 0.0;
        for n in 1..nmax {
            let nf = n as f64;
            let p_next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
            let dp_next = dp_prev + (2.0 * nf + 1.0) * p;
            p_prev = p;
            p = p_next;
            dp_prev = dp;
            dp = dp_next;
            if (n + 1) % 2 == 0 {
                let d = self.coeffs[n.div_ceil(2)];
                value += d * p;
                deriv += d * dp;
            }
        }
        (value, deriv)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// `int_0^y psi(x) dx`, with `y` clamped to `[-1, 1]`.
    pub fn integral(&self, y: f64) -> f64 {
        let y = y.clamp(-1.0, 1.0);
        let nmax = 2 * self.coeffs.len();
        let mut total = self.coeffs[0] * y;
        let (mut p_prev, mut p) = (1.0, y);
        // p_odd_prev tracks P_{2k-1}
        let mut p_odd_prev = y;
        for n in 1..nmax {
            let nf = n as f64;
            let p_next = ((2.0 * nf + 1.0) * y * p - nf * p_prev) / (nf + 1.0);
            p_prev = p;
            p = p_next;
            let m = n + 1;
            if m % 2 == 1 {
                // m = 2k + 1
                let k = (m - 1) / 2;
                if k < self.coeffs.len() && k > 0 {
                    total += self.coeffs[k] * (p - p_odd_prev) / (4.0 * k as f64 + 1.0);
                }
                p_odd_prev = p;
            }
        }
        total
    }

    /// `int_{-1}^{1} psi(x) e^{i xi x} dx` by composite Gauss–Legendre quadrature.
    pub fn fourier(&self, xi: f64) -> f64 {
        let panels = 1 + ceil((self.c + abs(xi)) / 4.0) as usize;
        let (x, w) = composite_rule(0.0, 1.0, panels, &self.rule);
        2.0 * x
            .iter()
            .zip(&w)
            .map(|(&x, &w)| w * self.value(x) * cos(xi * x))
            .sum::<f64>()
    }

    /// `F_c[psi](x)`.
    pub fn apply_operator(&self, x: f64) -> f64 {
        self.fourier(self.c * x)
    }
}

/// Eigenvector (orthonormal even-Legendre coordinates) belonging to the
/// smallest eigenvalue of the prolate differential operator truncated to
/// `terms` even degrees.
fn smallest_eigenvector(c: f64, terms: usize) -> Vec<f64> {
    let c2 = c * c;
    let diag: Vec<f64> = (0..terms)
        .map(|k| {
            let n = 2.0 * k as f64;
            n * (n + 1.0) + c2 * (2.0 * n * (n + 1.0) - 1.0) / ((2.0 * n + 3.0) * (2.0 * n - 1.0))
        })
        .collect();
    let off: Vec<f64> = (0..terms - 1)
        .map(|k| {
            let n = 2.0 * k as f64;
            c2 * (n + 1.0) * (n + 2.0) / ((2.0 * n + 3.0) * sqrt((2.0 * n + 1.0) * (2.0 * n + 5.0)))
        })
        .collect();

    // Sturm-sequence bisection for the smallest eigenvalue
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..terms {
        let r = if i > 0 { abs(off[i - 1]) } else { 0.0 } + if i + 1 < terms { abs(off[i]) } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..terms {
            let e2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            q = diag[i] - x - if i > 0 { e2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (abs(diag[i]) + abs(x) + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // inverse iteration with shift just below the eigenvalue: T - lo I is
    // positive (semi)definite, so LDL^T without pivoting is stable
    let shift = lo;
    let mut v = vec![1.0; terms];
    for _ in 0..4 {
        v = solve_shifted(&diag, &off, shift, &v);
        let norm = sqrt(v.iter().map(|x| x * x).sum());
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    // sign: psi(0) > 0
    let mut p0 = 1.0;
    let mut at_zero = 0.0;
    for (k, a) in v.iter().enumerate() {
        if k > 0 {
            p0 *= -(2.0 * k as f64 - 1.0) / (2.0 * k as f64);
        }
        at_zero += a * sqrt(2.0 * k as f64 + 0.5) * p0;
    }
    if at_zero < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    v
}

fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n];
    let tiny = 1e-300;
    d[0] = diag[0] - shift;
    if abs(d[0]) < tiny {
        d[0] = tiny;
    }
    for i in 1..n {
        l[i] = off[i - 1] / d[i - 1];
        d[i] = diag[i] - shift - l[i] * off[i - 1];
        if abs(d[i]) < tiny {
            d[i] = tiny;
        }
    }
    let mut y = rhs.to_vec();
    for i in 1..n {
        y[i] -= l[i] * y[i - 1];
    }
    for i in 0..n {
        y[i] /= d[i];
    }
    for i in (0..n - 1).rev() {
        y[i] -= l[i + 1] * y[i + 1];
    }
    // overflow guard for a near-exact shift
    let scale = y.iter().fold(0.0f64, |m, &v| m.max(abs(v)));
    if scale > 1e200 {
        for v in y.iter_mut() {
            *v /= scale;
        }
    }
    y
}

/// Shape parameter `c` at which the L2-normalised `psi_0^c(1)` equals `eps`.
pub fn solve_c(eps: f64) -> Result<f64> {
    if !(1e-8..=1e-2).contains(&eps) {
        return Err(Error::UnsupportedPrecision(eps));
    }
    let target = ln(eps);
    let residual = |c: f64| -> Result<f64> { Ok(ln(ProlateExpansion::new(c, 1e-15)?.edge_value()) - target) };
    let (mut lo, mut hi) = (1.0, 40.0);
    let (mut f_lo, f_hi) = (residual(lo)?, residual(hi)?);
    debug_assert!(f_lo > 0.0 && f_hi < 0.0);
    // bisection; edge value is strictly decreasing in c
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid)?;
        if abs(f_mid) < 1e-10 || hi - lo < 1e-13 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
