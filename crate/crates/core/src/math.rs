//! Scalar helpers that work without `std`, plus Gauss–Legendre quadrature and
//! Chebyshev fitting used to compile kernels into piecewise polynomials.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if abs(x) < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        sin(x) / x
    }
}

/// Wrap `x` into `[0, len)`.
#[inline]
pub fn fold(x: f64, len: f64) -> f64 {
    let y = x - len * floor(x / len);
    // x slightly negative can round up to exactly len
    if y >= len {
        0.0
    } else {
        y
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if abs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule: `panels` equal panels on `[a, b]`, each with
/// the supplied base rule.
pub fn composite_rule(a: f64, b: f64, panels: usize, base: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    let (bx, bw) = base;
    let width = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * bx.len());
    let mut w = Vec::with_capacity(panels * bx.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (&t, &wt) in bx.iter().zip(bw) {
            x.push(mid + 0.5 * width * t);
            w.push(0.5 * width * wt);
        }
    }
    (x, w)
}

/// Monomial coefficients (in `s`, lowest degree first) of the degree-`degree`
/// Chebyshev interpolant of `f` on `s in [-1, 1]`.
pub fn chebyshev_monomial_fit(degree: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = degree + 1;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let theta = PI * (j as f64 + 0.5) / n as f64;
            let s = cos(theta);
            (theta, f(s))
        })
        .collect();
    let mut cheb = vec![0.0; n];
    for (k, ck) in cheb.iter_mut().enumerate() {
        let sum: f64 = samples.iter().map(|&(theta, v)| v * cos(k as f64 * theta)).sum();
        *ck = 2.0 * sum / n as f64;
    }
    cheb[0] *= 0.5;

    // T_k in the monomial basis via T_{k+1} = 2 s T_k - T_{k-1}
    let mut mono = vec![0.0; n];
    let mut t_prev = vec![0.0; n];
    let mut t_cur = vec![0.0; n];
    t_prev[0] = 1.0;
    mono[0] += cheb[0];
    if n > 1 {
        t_cur[1] = 1.0;
        mono[1] += cheb[1];
    }
    for k in 2..n {
        let mut t_next = vec![0.0; n];
        for i in 0..n - 1 {
            t_next[i + 1] += 2.0 * t_cur[i];
        }
        for i in 0..n {
            t_next[i] -= t_prev[i];
        }
        for i in 0..n {
            mono[i] += cheb[k] * t_next[i];
        }
        t_prev = core::mem::replace(&mut t_cur, t_next);
    }
    mono
}
