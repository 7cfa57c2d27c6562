//! Uniform Fourier grid: spreading, FFTs, influence coefficients and
//! interpolation.
//!
//! Grid values are stored row-major as `[ix][iy][iz]`. Array index `j` along a
//! dimension of length `n` corresponds to the signed mode `k = j` for
//! `j < n/2` and `k = j - n` otherwise, so modes span `-n/2 .. n/2 - 1`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{Direction, Fft3d};
use crate::kernels::{SplitKernel, WindowKernel};
use crate::math::{abs, sqrt};
use crate::system::ParticleSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Real,
    Fourier,
}

/// Complex-capable values on the grid with a space tag.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    dims: [usize; 3],
    data: Vec<Complex64>,
    space: Space,
}

impl GridData {
    pub fn zeros(dims: [usize; 3], space: Space) -> Self {
        Self {
            dims,
            data: vec![Complex64::new(0.0, 0.0); dims[0] * dims[1] * dims[2]],
            space,
        }
    }

    pub fn from_real(dims: [usize; 3], values: &[f64]) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n {
            return Err(Error::LengthMismatch(values.len(), n));
        }
        Ok(Self {
            dims,
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            space: Space::Real,
        })
    }

    pub fn from_complex(dims: [usize; 3], data: Vec<Complex64>, space: Space) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(Error::LengthMismatch(data.len(), n));
        }
        Ok(Self { dims, data, space })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.re).collect()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    /// Unnormalised forward DFT with kernel `e^{+2 pi i k.l/n}`.
    pub fn fft_forward(mut self, fft: &Fft3d) -> Result<Self> {
        self.check(fft.dims(), Space::Real)?;
        fft.process(&mut self.data, Direction::Forward);
        self.space = Space::Fourier;
        Ok(self)
    }

    /// Unnormalised inverse DFT with kernel `e^{-2 pi i k.l/n}`.
    pub fn fft_inverse(mut self, fft: &Fft3d) -> Result<Self> {
        self.check(fft.dims(), Space::Fourier)?;
        fft.process(&mut self.data, Direction::Inverse);
        self.space = Space::Real;
        Ok(self)
    }

    fn check(&self, dims: [usize; 3], space: Space) -> Result<()> {
        if self.dims != dims {
            return Err(Error::ShapeMismatch {
                expected: dims,
                found: self.dims,
            });
        }
        if self.space != space {
            return Err(Error::WrongSpace);
        }
        Ok(())
    }
}

/// Signed mode number of array index `j` on a grid of length `n`.
#[inline]
pub fn signed_mode(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Grid geometry plus the diagonal scaling (influence) coefficients.
#[derive(Debug, Clone)]
pub struct FourierGrid {
    dims: [usize; 3],
    box_lengths: [f64; 3],
    fft: Fft3d,
    influence: Vec<f64>,
}

impl FourierGrid {
    pub fn new(dims: [usize; 3], box_lengths: [f64; 3]) -> Result<Self> {
        if dims.iter().any(|&n| n < 2 || n % 2 != 0) {
            return Err(Error::InvalidParameter("grid sizes must be even and at least 2"));
        }
        if box_lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidParameter("box lengths must be positive"));
        }
        Ok(Self {
            dims,
            box_lengths,
            fft: Fft3d::new(dims),
            influence: Vec::new(),
        })
    }

    /// Grid with influence coefficients filled for the given kernels.
    pub fn with_kernels(
        dims: [usize; 3],
        box_lengths: [f64; 3],
        split: &SplitKernel,
        window: &WindowKernel,
    ) -> Result<Self> {
        let mut grid = Self::new(dims, box_lengths)?;
        grid.influence = influence_coefficients(split, window, dims, box_lengths)?;
        Ok(grid)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn box_lengths(&self) -> [f64; 3] {
        self.box_lengths
    }

    /// Spacing `h_d = L_d / n_d`.
    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|d| self.box_lengths[d] / self.dims[d] as f64)
    }

    pub fn total_modes(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn fft(&self) -> &Fft3d {
        &self.fft
    }

    pub fn influence(&self) -> &[f64] {
        &self.influence
    }

    /// Wavenumbers `2 pi k / L_d` along dimension `d`, indexed by array position.
    pub fn wavenumbers(&self, d: usize) -> Vec<f64> {
        let n = self.dims[d];
        (0..n)
            .map(|j| 2.0 * PI * signed_mode(j, n) as f64 / self.box_lengths[d])
            .collect()
    }
}

/// `p_k = S^(xi) / (V prod_d phihat(xi_d h_d)^2)` for every mode on the grid,
/// with `p_0 = 0`. The unnormalised FFT pair and the `1/V` of the Fourier series
/// are folded in, so spread / FFT / scale / IFFT / interpolate needs no other
/// scaling.
pub fn influence_coefficients(
    split: &SplitKernel,
    window: &WindowKernel,
    dims: [usize; 3],
    box_lengths: [f64; 3],
) -> Result<Vec<f64>> {
    let volume: f64 = box_lengths.iter().product();
    let mut xi = [Vec::new(), Vec::new(), Vec::new()];
    let mut wsq = [Vec::new(), Vec::new(), Vec::new()];
    let mut smallest = 1.0;
    for d in 0..3 {
        let n = dims[d];
        let h = box_lengths[d] / n as f64;
        xi[d] = (0..n)
            .map(|j| 2.0 * PI * signed_mode(j, n) as f64 / box_lengths[d])
            .collect();
        let hats: Vec<f64> = xi[d].iter().map(|&x| window.hat(x * h)).collect();
        smallest *= hats.iter().fold(f64::INFINITY, |m, &v| m.min(abs(v)));
        wsq[d] = hats.iter().map(|v| v * v).collect();
    }
    if smallest < 1e-30 {
        return Err(Error::WindowTooNarrow(smallest));
    }
    let mut out = vec![0.0; dims[0] * dims[1] * dims[2]];
    let mut idx = 0;
    for ix in 0..dims[0] {
        for iy in 0..dims[1] {
            let xy2 = xi[0][ix] * xi[0][ix] + xi[1][iy] * xi[1][iy];
            let wxy = wsq[0][ix] * wsq[1][iy];
            for iz in 0..dims[2] {
                let k = sqrt(xy2 + xi[2][iz] * xi[2][iz]);
                out[idx] = split.spectral_hat(k) / (volume * wxy * wsq[2][iz]);
                idx += 1;
            }
        }
    }
    Ok(out)
}

struct Footprint {
    start: [i64; 3],
    w: [[f64; 16]; 3],
    dw: [[f64; 16]; 3],
}

#[inline]
fn footprint(window: &WindowKernel, pos: &[f64; 3], h: [f64; 3], derivative: bool) -> Footprint {
    let mut fp = Footprint {
        start: [0; 3],
        w: [[0.0; 16]; 3],
        dw: [[0.0; 16]; 3],
    };
    for d in 0..3 {
        let t = pos[d] / h[d];
        fp.start[d] = if derivative {
            window.weights(t, &mut fp.w[d], Some(&mut fp.dw[d]))
        } else {
            window.weights(t, &mut fp.w[d], None)
        };
    }
    fp
}

#[inline]
fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

/// `b_l = sum_j phi~(r_j - h l) q_j`, accumulated particle by particle in
/// index order.
pub fn spread(system: &ParticleSystem, window: &WindowKernel, grid: &FourierGrid) -> GridData {
    spread_points(system.positions(), system.charges(), window, grid)
}

pub fn spread_points(
    positions: &[[f64; 3]],
    charges: &[f64],
    window: &WindowKernel,
    grid: &FourierGrid,
) -> GridData {
    let dims = grid.dims();
    let h = grid.spacing();
    let p = window.order();
    let mut out = GridData::zeros(dims, Space::Real);
    let mut ix = [0usize; 16];
    let mut iy = [0usize; 16];
    let mut iz = [0usize; 16];
    for (pos, &q) in positions.iter().zip(charges) {
        if q == 0.0 {
            continue;
        }
        let fp = footprint(window, pos, h, false);
        for a in 0..p {
            ix[a] = wrap(fp.start[0] + a as i64, dims[0]);
            iy[a] = wrap(fp.start[1] + a as i64, dims[1]);
            iz[a] = wrap(fp.start[2] + a as i64, dims[2]);
        }
        for a in 0..p {
            let wa = q * fp.w[0][a];
            for b in 0..p {
                let wab = wa * fp.w[1][b];
                let row = (ix[a] * dims[1] + iy[b]) * dims[2];
                for c in 0..p {
                    out.data[row + iz[c]].re += wab * fp.w[2][c];
                }
            }
        }
    }
    out
}

/// Interpolated values and (optionally) gradients at a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    pub values: Vec<f64>,
    pub gradients: Option<Vec<[f64; 3]>>,
}

/// `u_i = sum_l phi~(r_i - h l) c_l`; gradients use `phi'` in the
/// differentiated dimension. Uses only the real part of `g`.
pub fn interpolate(
    g: &GridData,
    window: &WindowKernel,
    grid: &FourierGrid,
    points: &[[f64; 3]],
    with_gradient: bool,
) -> Result<Interpolation> {
    interpolate_impl(g, window, grid, points, with_gradient, false)
}

pub(crate) fn interpolate_impl(
    g: &GridData,
    window: &WindowKernel,
    grid: &FourierGrid,
    points: &[[f64; 3]],
    with_gradient: bool,
    parallel: bool,
) -> Result<Interpolation> {
    if g.space != Space::Real {
        return Err(Error::WrongSpace);
    }
    if g.dims != grid.dims() {
        return Err(Error::ShapeMismatch {
            expected: grid.dims(),
            found: g.dims,
        });
    }
    let one = |pos: &[f64; 3]| interpolate_point(g, window, grid, pos, with_gradient);
    let results: Vec<(f64, [f64; 3])> = map_points(points, one, parallel);
    let values = results.iter().map(|r| r.0).collect();
    let gradients = with_gradient.then(|| results.iter().map(|r| r.1).collect());
    Ok(Interpolation { values, gradients })
}

#[cfg(feature = "parallel")]
fn map_points<T: Send>(points: &[[f64; 3]], f: impl Fn(&[f64; 3]) -> T + Sync, parallel: bool) -> Vec<T> {
    use rayon::prelude::*;
    if parallel {
        points.par_iter().map(&f).collect()
    } else {
        points.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_points<T>(points: &[[f64; 3]], f: impl Fn(&[f64; 3]) -> T, _parallel: bool) -> Vec<T> {
    points.iter().map(f).collect()
}

#[inline]
fn interpolate_point(
    g: &GridData,
    window: &WindowKernel,
    grid: &FourierGrid,
    pos: &[f64; 3],
    with_gradient: bool,
) -> (f64, [f64; 3]) {
    let dims = grid.dims();
    let h = grid.spacing();
    let p = window.order();
    let fp = footprint(window, pos, h, with_gradient);
    let mut ix = [0usize; 16];
    let mut iy = [0usize; 16];
    let mut iz = [0usize; 16];
    for a in 0..p {
        ix[a] = wrap(fp.start[0] + a as i64, dims[0]);
        iy[a] = wrap(fp.start[1] + a as i64, dims[1]);
        iz[a] = wrap(fp.start[2] + a as i64, dims[2]);
    }
    let mut value = 0.0;
    let mut grad = [0.0; 3];
    for a in 0..p {
        let mut va = 0.0;
        let mut gya = 0.0;
        let mut gza = 0.0;
        for b in 0..p {
            let row = (ix[a] * dims[1] + iy[b]) * dims[2];
            let mut vb = 0.0;
            let mut gzb = 0.0;
            for c in 0..p {
                let v = g.data[row + iz[c]].re;
                vb += fp.w[2][c] * v;
                if with_gradient {
                    gzb += fp.dw[2][c] * v;
                }
            }
            va += fp.w[1][b] * vb;
            if with_gradient {
                gya += fp.dw[1][b] * vb;
                gza += fp.w[1][b] * gzb;
            }
        }
        value += fp.w[0][a] * va;
        if with_gradient {
            grad[0] += fp.dw[0][a] * va;
            grad[1] += fp.w[0][a] * gya;
            grad[2] += fp.w[0][a] * gza;
        }
    }
    // window derivatives are per grid unit
    for d in 0..3 {
        grad[d] /= h[d];
    }
    (value, grad)
}
