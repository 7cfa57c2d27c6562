//! Splitting kernels `chi` and spreading/interpolation windows `phi`.
//!
//! A splitting kernel is an even profile `chi` on the dimensionless variable
//! `x = r / r_c` with antiderivative `Psi(y) = int_0^y chi`, normalised so that
//! `Psi(1) = 1` (PSWF, exactly) or `Psi(inf) = 1` (Gaussian). The Coulomb kernel
//! splits as
//!
//! ```text
//! 1/(4 pi r) = Psi(r/r_c)/(4 pi r) + (1 - Psi(r/r_c))/(4 pi r)
//! ```
//!
//! into a smooth long-range part and a short-range part that vanishes (PSWF)
//! or is negligible (Gaussian) beyond `r_c`.
//!
//! Windows live in grid units: `phi(t)` with `t = x / h` is supported on
//! `|t| <= P/2`, and its transform is `phihat(theta) = int phi(t) e^{i theta t} dt`
//! with `theta = xi h`.

use alloc::string::String;
use core::f64::consts::PI;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::math::{abs, ceil, erf, exp, floor, ln, pow, sinc, sqrt};
use crate::poly::PiecewisePoly;
use crate::prolate::{solve_c, ProlateExpansion};

/// Polynomial degree of compiled split tables.
const SPLIT_DEGREE: usize = 16;
const SPLIT_INTERVALS: usize = 8;
/// Polynomial degree of compiled window tables (one subinterval per grid cell).
pub const WINDOW_DEGREE: usize = 20;
const HAT_DEGREE: usize = 16;
const HAT_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitFamily {
    Pswf,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowFamily {
    Pswf,
    BSpline,
}

/// Transform `int_{-1}^{1} f(x) e^{i eta x} dx` tabulated on `[0, max)` with a
/// quadrature fallback above it.
#[derive(Debug, Clone)]
struct HatTable {
    table: PiecewisePoly,
    max: f64,
    prolate: ProlateExpansion,
}

impl HatTable {
    fn new(prolate: ProlateExpansion, max: f64) -> Self {
        let intervals = ceil(max / HAT_WIDTH) as usize;
        let table = PiecewisePoly::fit(0.0, HAT_WIDTH, intervals, HAT_DEGREE, |eta| prolate.fourier(eta));
        let max = intervals as f64 * HAT_WIDTH;
        Self { table, max, prolate }
    }

    fn eval(&self, eta: f64) -> f64 {
        let eta = eta.abs();
        if eta < self.max {
            self.table.eval(eta)
        } else {
            self.prolate.fourier(eta)
        }
    }
}

#[derive(Debug, Clone)]
enum SplitShape {
    Gaussian {
        alpha: f64,
    },
    Pswf {
        prolate: ProlateExpansion,
        c0: f64,
        psi: PiecewisePoly,
        chi: PiecewisePoly,
        hat: HatTable,
    },
}

/// Radial splitting kernel with its antiderivative and 1D transform.
#[derive(Debug, Clone)]
pub struct SplitKernel {
    family: SplitFamily,
    eps: f64,
    r_c: f64,
    shape: SplitShape,
}

impl SplitKernel {
    /// Build the kernel for precision `eps` and cutoff `r_c`. The Gaussian uses
    /// `alpha = ln(1/eps)`; the PSWF uses `c = solve_c(eps)`.
    pub fn new(family: SplitFamily, eps: f64, r_c: f64) -> Result<Self> {
        if !(1e-8..=1e-2).contains(&eps) {
            return Err(Error::UnsupportedPrecision(eps));
        }
        let shape = match family {
            SplitFamily::Gaussian => ln(1.0 / eps),
            SplitFamily::Pswf => solve_c(eps)?,
        };
        Self::with_shape(family, eps, shape, r_c)
    }

    /// Build with an explicit shape parameter (`alpha` or `c`).
    pub fn with_shape(family: SplitFamily, eps: f64, shape: f64, r_c: f64) -> Result<Self> {
        if !(r_c > 0.0) || !r_c.is_finite() {
            return Err(Error::InvalidParameter("cutoff radius must be positive"));
        }
        if !(shape > 0.0) {
            return Err(Error::InvalidParameter("shape parameter must be positive"));
        }
        let shape = match family {
            SplitFamily::Gaussian => SplitShape::Gaussian { alpha: shape },
            SplitFamily::Pswf => {
                let prolate = ProlateExpansion::new(shape, 1e-15)?;
                let c0 = prolate.integral(1.0);
                let width = 1.0 / SPLIT_INTERVALS as f64;
                let psi = PiecewisePoly::fit(0.0, width, SPLIT_INTERVALS, SPLIT_DEGREE, |y| {
                    prolate.integral(y) / c0
                });
                let chi = PiecewisePoly::fit(0.0, width, SPLIT_INTERVALS, SPLIT_DEGREE, |y| {
                    prolate.value(y) / c0
                });
                let hat = HatTable::new(prolate.clone(), 4.0 * shape + 16.0);
                SplitShape::Pswf {
                    prolate,
                    c0,
                    psi,
                    chi,
                    hat,
                }
            }
        };
        Ok(Self {
            family,
            eps,
            r_c,
            shape,
        })
    }

    pub fn family(&self) -> SplitFamily {
        self.family
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn r_c(&self) -> f64 {
        self.r_c
    }

    /// `alpha` for the Gaussian, `c` for the PSWF.
    pub fn shape(&self) -> f64 {
        match &self.shape {
            SplitShape::Gaussian { alpha } => *alpha,
            SplitShape::Pswf { prolate, .. } => prolate.c(),
        }
    }

    /// PSWF normalisation `C_0 = int_0^1 psi_0^c` (unit for the Gaussian).
    pub fn c0(&self) -> f64 {
        match &self.shape {
            SplitShape::Gaussian { .. } => 1.0,
            SplitShape::Pswf { c0, .. } => *c0,
        }
    }

    pub fn prolate(&self) -> Option<&ProlateExpansion> {
        match &self.shape {
            SplitShape::Gaussian { .. } => None,
            SplitShape::Pswf { prolate, .. } => Some(prolate),
        }
    }

    /// `Psi(y) = int_0^y chi(x) dx` for `y >= 0`.
    #[inline]
    pub fn psi(&self, y: f64) -> f64 {
        match &self.shape {
            SplitShape::Gaussian { alpha } => erf(sqrt(*alpha) * y),
            SplitShape::Pswf { psi, .. } => {
                if y >= 1.0 {
                    1.0
                } else {
                    psi.eval(y)
                }
            }
        }
    }

    /// `chi(y)` for `y >= 0`.
    #[inline]
    pub fn chi(&self, y: f64) -> f64 {
        match &self.shape {
            SplitShape::Gaussian { alpha } => 2.0 * sqrt(alpha / PI) * exp(-alpha * y * y),
            SplitShape::Pswf { chi, .. } => {
                if y > 1.0 {
                    0.0
                } else {
                    chi.eval(y)
                }
            }
        }
    }

    pub fn chi0(&self) -> f64 {
        match &self.shape {
            SplitShape::Gaussian { alpha } => 2.0 * sqrt(alpha / PI),
            SplitShape::Pswf { c0, .. } => 1.0 / c0,
        }
    }

    /// `chihat(eta) = int chi(x) e^{i eta x} dx` over the real line.
    pub fn chihat(&self, eta: f64) -> f64 {
        match &self.shape {
            SplitShape::Gaussian { alpha } => 2.0 * exp(-eta * eta / (4.0 * alpha)),
            SplitShape::Pswf { c0, hat, .. } => hat.eval(eta) / c0,
        }
    }

    /// Short-range pair kernel `(1 - Psi(r/r_c))/(4 pi r)` truncated at `r_c`,
    /// and its radial force `-dL/dr`.
    #[inline]
    pub fn local_kernel(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 0.0) {
            return Err(Error::ZeroDistance);
        }
        if r >= self.r_c {
            return Ok((0.0, 0.0));
        }
        Ok(self.local_profile(r))
    }

    /// Untruncated short-range profile and its radial force.
    #[inline]
    pub fn local_profile(&self, r: f64) -> (f64, f64) {
        let y = r / self.r_c;
        let tail = 1.0 - self.psi(y);
        let inv = 1.0 / (4.0 * PI * r);
        let pot = tail * inv;
        let force = self.chi(y) * inv / self.r_c + tail * inv / r;
        (pot, force)
    }

    /// Long-range profile `Psi(r/r_c)/(4 pi r)`; its `r -> 0` limit at zero.
    pub fn spectral_profile(&self, r: f64) -> f64 {
        if r == 0.0 {
            self.self_potential()
        } else {
            self.psi(r / self.r_c) / (4.0 * PI * r)
        }
    }

    /// `S(0) = chi(0)/(4 pi r_c)`.
    pub fn self_potential(&self) -> f64 {
        self.chi0() / (4.0 * PI * self.r_c)
    }

    /// 3D Fourier transform of the long-range profile,
    /// `chihat(r_c xi) / (2 xi^2)`; zero at `xi = 0`.
    pub fn spectral_hat(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            0.0
        } else {
            self.chihat(self.r_c * xi) / (2.0 * xi * xi)
        }
    }

    /// Text dump of the compiled `Psi` and `chi` tables (PSWF only).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        match &self.shape {
            SplitShape::Gaussian { alpha } => {
                let _ = writeln!(out, "# split gaussian alpha={alpha:.17e} (closed form)");
            }
            SplitShape::Pswf {
                prolate, psi, chi, ..
            } => {
                let _ = writeln!(out, "# split pswf c={:.17e} Psi", prolate.c());
                out.push_str(&psi.dump());
                let _ = writeln!(out, "# split pswf c={:.17e} chi", prolate.c());
                out.push_str(&chi.dump());
            }
        }
        out
    }
}

/// Separable spreading/interpolation window of width `P` grid points.
#[derive(Debug, Clone)]
pub struct WindowKernel {
    family: WindowFamily,
    order: usize,
    shape: f64,
    phi: PiecewisePoly,
    dphi: PiecewisePoly,
    hat: Option<HatTable>,
    /// Edge value `psi(1)` subtracted from the PSWF window so that it is continuous.
    edge: f64,
    slope: f64,
}

impl WindowKernel {
    pub fn new(family: WindowFamily, order: usize, c1: Option<f64>) -> Result<Self> {
        match family {
            WindowFamily::BSpline => Self::bspline(order),
            WindowFamily::Pswf => Self::pswf(
                order,
                c1.ok_or(Error::InvalidParameter("PSWF window needs a shape c1"))?,
            ),
        }
    }

    pub fn bspline(order: usize) -> Result<Self> {
        check_order(order)?;
        let phi = fit_window(order, |t| bspline_centered(order, t).0);
        Ok(Self {
            family: WindowFamily::BSpline,
            order,
            shape: 0.0,
            dphi: phi.derivative(),
            phi,
            hat: None,
            edge: 0.0,
            slope: 0.0,
        })
    }

    /// `phi(t) = (psi(2t/P) - psi(1)) / (1 - psi(1))` on `|t| < P/2`, with
    /// `psi` the order-zero prolate function of bandwidth `c1`. Lowering it by
    /// its edge value makes the window continuous, so the piecewise
    /// derivative used by AD forces is its true derivative.
    pub fn pswf(order: usize, c1: f64) -> Result<Self> {
        check_order(order)?;
        let prolate = ProlateExpansion::new(c1, 1e-15)?;
        let half = order as f64 / 2.0;
        let (edge, slope) = pswf_edge(&prolate, order);
        let phi = fit_window(order, |t| (prolate.value(t / half) - edge) / (1.0 - edge));
        let hat = HatTable::new(prolate, 3.0 * PI * half + 2.0);
        Ok(Self {
            family: WindowFamily::Pswf,
            order,
            shape: c1,
            dphi: phi.derivative(),
            phi,
            hat: Some(hat),
            edge,
            slope,
        })
    }

    pub fn family(&self) -> WindowFamily {
        self.family
    }

    /// Support width `P` in grid points.
    pub fn order(&self) -> usize {
        self.order
    }

    /// PSWF bandwidth `c1`; zero for B-splines.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// `phi(t)` from the compiled table.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.phi.eval(t)
    }

    /// `phi'(t)` (per grid unit) from the compiled table.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        self.dphi.eval(t)
    }

    /// Value and derivative straight from the prolate expansion or the
    /// B-spline recursion.
    pub fn direct(&self, t: f64) -> (f64, f64) {
        match &self.hat {
            None => bspline_centered(self.order, t),
            Some(hat) => {
                let half = self.order as f64 / 2.0;
                if abs(t) >= half {
                    return (0.0, 0.0);
                }
                let (v, d) = hat.prolate.eval(t / half);
                let scale = 1.0 - self.edge;
                ((v - self.edge) / scale, d / (half * scale))
            }
        }
    }

    /// `phihat(theta) = int phi(t) e^{i theta t} dt`.
    pub fn hat(&self, theta: f64) -> f64 {
        match &self.hat {
            None => pow(sinc(0.5 * theta), self.order as f64),
            Some(hat) => {
                let half = self.order as f64 / 2.0;
                let eta = theta * half;
                half * (hat.eval(eta) - 2.0 * self.edge * sinc(eta)) / (1.0 - self.edge)
            }
        }
    }

    /// `phi'` just inside the left end of the support. A B-spline of order
    /// three or more is C1 there; the PSWF window has a kink.
    pub fn edge_slope(&self) -> f64 {
        self.slope
    }

    /// Footprint of a point at grid coordinate `t`: returns the first grid
    /// index and fills `w[j] = phi(t - start - j)`, `dw[j] = phi'(..)`.
    #[inline]
    pub fn weights(&self, t: f64, w: &mut [f64], dw: Option<&mut [f64]>) -> i64 {
        let p = self.order;
        let half = p as f64 / 2.0;
        let start = ceil(t - half);
        // offset from the centre of each subinterval; identical for all j
        let s = 2.0 * (t - start - half + 0.5);
        for (j, wj) in w.iter_mut().enumerate().take(p) {
            *wj = self.phi.eval_local(p - 1 - j, s);
        }
        if let Some(dw) = dw {
            for (j, dj) in dw.iter_mut().enumerate().take(p) {
                *dj = self.dphi.eval_local(p - 1 - j, s);
            }
        }
        start as i64
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let name = match self.family {
            WindowFamily::Pswf => "pswf",
            WindowFamily::BSpline => "bspline",
        };
        let _ = writeln!(
            out,
            "# window {name} P={} c1={:.17e} degree={}",
            self.order,
            self.shape,
            self.phi.degree()
        );
        out.push_str(&self.phi.dump());
        out
    }
}

/// Edge value `psi(1)` and the slope `phi'(-P/2)` of the shifted,
/// rescaled PSWF window of width `order`.
pub(crate) fn pswf_edge(prolate: &ProlateExpansion, order: usize) -> (f64, f64) {
    let (edge, d) = prolate.eval(1.0);
    (edge, -d / (0.5 * order as f64 * (1.0 - edge)))
}

/// `phihat(theta)` of the PSWF window of width `order` built from `prolate`,
/// without tabulation.
pub(crate) fn pswf_window_hat(prolate: &ProlateExpansion, order: usize, edge: f64, theta: f64) -> f64 {
    let half = 0.5 * order as f64;
    let eta = theta * half;
    half * (prolate.fourier(eta) - 2.0 * edge * sinc(eta)) / (1.0 - edge)
}

fn check_order(order: usize) -> Result<()> {
    if (3..=16).contains(&order) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("window order P must be in [3, 16]"))
    }
}

fn fit_window(order: usize, f: impl Fn(f64) -> f64) -> PiecewisePoly {
    PiecewisePoly::fit(-(order as f64) / 2.0, 1.0, order, WINDOW_DEGREE, f)
}

/// Centred cardinal B-spline of order `p` (support `[-p/2, p/2]`) and its
/// derivative, by the Cox–de Boor recursion.
pub fn bspline_centered(p: usize, t: f64) -> (f64, f64) {
    let x = t + p as f64 / 2.0;
    if !(x > 0.0 && x < p as f64) {
        return (0.0, 0.0);
    }
    let i = floor(x) as usize;
    let u = x - i as f64;
    // v[r] = N_k(u + r), r = 0..k
    let mut v = [0.0f64; 17];
    let mut prev = [0.0f64; 17];
    v[0] = 1.0;
    for k in 2..=p {
        prev[..k - 1].copy_from_slice(&v[..k - 1]);
        for r in 0..k {
            let y = u + r as f64;
            let a = if r < k - 1 { y * prev[r] } else { 0.0 };
            let b = if r > 0 { (k as f64 - y) * prev[r - 1] } else { 0.0 };
            v[r] = (a + b) / (k as f64 - 1.0);
        }
    }
    let value = v[i];
    // N_p' (x) = N_{p-1}(x) - N_{p-1}(x - 1), from the order p-1 row
    let lower = |r: isize| -> f64 {
        if r < 0 || r as usize >= p - 1 {
            0.0
        } else {
            prev[r as usize]
        }
    };
    let deriv = lower(i as isize) - lower(i as isize - 1);
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_shape_is_log_inverse_eps() {
        let k = SplitKernel::new(SplitFamily::Gaussian, 1e-4, 1.0).unwrap();
        assert!((k.shape() - 9.2103).abs() < 5e-5);
        assert!((1.0 - k.psi(1.0)) < 1e-4);
    }

    #[test]
    fn pswf_split_normalised() {
        let k = SplitKernel::new(SplitFamily::Pswf, 1e-4, 1.0).unwrap();
        assert!((k.shape() - 12.024).abs() < 0.01);
        assert_relative_eq!(k.psi(1.0), 1.0, epsilon = 1e-13);
        assert!(k.psi(0.0).abs() < 1e-15);
        assert_relative_eq!(k.chihat(0.0), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn local_kernel_truncates_and_rejects_zero() {
        let k = SplitKernel::new(SplitFamily::Gaussian, 1e-3, 2.0).unwrap();
        assert_eq!(k.local_kernel(2.0).unwrap(), (0.0, 0.0));
        assert_eq!(k.local_kernel(0.0), Err(Error::ZeroDistance));
        let r = 0.7;
        let (u, _) = k.local_kernel(r).unwrap();
        let expect = crate::math::erfc(sqrt(k.shape()) * r / 2.0) / (4.0 * PI * r);
        assert_relative_eq!(u, expect, epsilon = 1e-15);
    }

    #[test]
    fn spectral_hat_zero_mode() {
        let k = SplitKernel::new(SplitFamily::Pswf, 1e-3, 1.0).unwrap();
        assert_eq!(k.spectral_hat(0.0), 0.0);
    }

    #[test]
    fn bspline_partition_of_unity() {
        for p in 3..=16 {
            for &t in &[0.0, 0.13, 0.5, 0.77] {
                let s: f64 = (-10..=10).map(|j| bspline_centered(p, t + j as f64).0).sum();
                assert_relative_eq!(s, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn window_rejects_bad_order() {
        assert!(WindowKernel::bspline(2).is_err());
        assert!(WindowKernel::bspline(17).is_err());
        assert!(WindowKernel::new(WindowFamily::Pswf, 6, None).is_err());
    }

    #[test]
    fn weights_match_pointwise_evaluation() {
        for w in [
            WindowKernel::bspline(5).unwrap(),
            WindowKernel::pswf(6, 13.0).unwrap(),
        ] {
            let p = w.order();
            let mut buf = [0.0; 16];
            let mut dbuf = [0.0; 16];
            for &t in &[3.0, 3.25, 3.5, 3.999, 10.01] {
                let start = w.weights(t, &mut buf, Some(&mut dbuf));
                for j in 0..p {
                    let x = t - (start + j as i64) as f64;
                    assert!(x.abs() <= p as f64 / 2.0 + 1e-12);
                    assert_relative_eq!(buf[j], w.value(x), epsilon = 1e-14);
                    assert_relative_eq!(dbuf[j], w.derivative(x), epsilon = 1e-10);
                }
            }
        }
    }
}
