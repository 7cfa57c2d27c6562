//! Piecewise polynomial evaluators on uniform subintervals.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::math::{chebyshev_monomial_fit, floor};

/// A function tabulated as one polynomial per equal-width subinterval of
/// `[start, start + intervals * width]`.
///
/// Coefficients are monomial in the local variable `s = 2 (x - mid) / width`,
/// lowest degree first, so `s` spans `[-1, 1]` on every subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    start: f64,
    width: f64,
    intervals: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl PiecewisePoly {
    /// Chebyshev-interpolate `f` on each subinterval.
    pub fn fit(start: f64, width: f64, intervals: usize, degree: usize, f: impl Fn(f64) -> f64) -> Self {
        let mut coeffs = Vec::with_capacity(intervals * (degree + 1));
        for i in 0..intervals {
            let mid = start + (i as f64 + 0.5) * width;
            coeffs.extend(chebyshev_monomial_fit(degree, |s| f(mid + 0.5 * width * s)));
        }
        Self {
            start,
            width,
            intervals,
            degree,
            coeffs,
        }
    }

    /// The exact derivative of this approximant, as another piecewise polynomial.
    pub fn derivative(&self) -> Self {
        let scale = 2.0 / self.width;
        let deg = self.degree.max(1) - 1;
        let mut coeffs = Vec::with_capacity(self.intervals * (deg + 1));
        for i in 0..self.intervals {
            let c = self.interval_coeffs(i);
            if self.degree == 0 {
                coeffs.push(0.0);
            } else {
                coeffs.extend((1..=self.degree).map(|k| k as f64 * c[k] * scale));
            }
        }
        Self {
            start: self.start,
            width: self.width,
            intervals: self.intervals,
            degree: deg,
            coeffs,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.start + self.intervals as f64 * self.width)
    }

    pub fn interval_coeffs(&self, i: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.coeffs[i * n..(i + 1) * n]
    }

    /// Evaluate at `x`; zero outside the domain.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.start) / self.width;
        if !(u >= 0.0) || u > self.intervals as f64 {
            return 0.0;
        }
        let i = (floor(u) as usize).min(self.intervals - 1);
        let s = 2.0 * (u - i as f64) - 1.0;
        horner(self.interval_coeffs(i), s)
    }

    /// Evaluate subinterval `i` at local coordinate `s`.
    #[inline]
    pub fn eval_local(&self, i: usize, s: f64) -> f64 {
        horner(self.interval_coeffs(i), s)
    }

    /// Plain-text dump: one line per subinterval with its two breakpoints
    /// followed by the monomial coefficients in the local variable.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.intervals {
            let a = self.start + i as f64 * self.width;
            let b = a + self.width;
            let _ = write!(out, "{a:.17e} {b:.17e}");
            for c in self.interval_coeffs(i) {
                let _ = write!(out, " {c:.17e}");
            }
            out.push('\n');
        }
        out
    }
}

#[inline]
fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fit_and_derivative_of_smooth_function() {
        let p = PiecewisePoly::fit(-1.0, 0.5, 4, 16, |x| (3.0 * x).sin());
        let d = p.derivative();
        for k in 0..41 {
            let x = -1.0 + k as f64 * 0.05;
            assert_relative_eq!(p.eval(x), (3.0 * x).sin(), epsilon = 1e-13);
            assert_relative_eq!(d.eval(x), 3.0 * (3.0 * x).cos(), epsilon = 1e-11);
        }
        assert_eq!(p.eval(1.01), 0.0);
        assert_eq!(p.eval(-1.01), 0.0);
    }

    #[test]
    fn dump_has_one_line_per_interval() {
        let p = PiecewisePoly::fit(0.0, 1.0, 3, 2, |x| x * x);
        let text = p.dump();
        assert_eq!(text.lines().count(), 3);
        let first: Vec<f64> = text
            .lines()
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        // x^2 on [0,1] with x = 0.5 + 0.5 s: 0.25 + 0.5 s + 0.25 s^2
        assert_eq!(first.len(), 5);
        assert_relative_eq!(first[2], 0.25, epsilon = 1e-15);
        assert_relative_eq!(first[3], 0.5, epsilon = 1e-15);
        assert_relative_eq!(first[4], 0.25, epsilon = 1e-15);
    }
}
