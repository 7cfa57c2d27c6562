//! Mixed-radix complex FFT (radix 4, 2 and a generic butterfly for 3, 5 and
//! any other prime) and a 3D transform over row-major grids.
//!
//! Sign convention: [`Direction::Forward`] computes
//! `X_k = sum_l x_l e^{+2 pi i k l / n}` and [`Direction::Inverse`] uses
//! `e^{-2 pi i k l / n}`. Neither is normalised, so `inverse(forward(x)) = n x`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math::{cos, sin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone)]
pub struct Fft1d {
    n: usize,
    factors: Vec<(usize, usize)>,
    twiddles: [Vec<Complex64>; 2],
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        let twiddle = |sign: f64| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    let a = sign * 2.0 * PI * k as f64 / n as f64;
                    Complex64::new(cos(a), sin(a))
                })
                .collect()
        };
        Self {
            n,
            factors: factorize(n),
            twiddles: [twiddle(1.0), twiddle(-1.0)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place transform of `data`; `scratch` must hold at least `n` values.
    pub fn process(&self, data: &mut [Complex64], scratch: &mut [Complex64], dir: Direction) {
        let n = self.n;
        assert_eq!(data.len(), n);
        if n == 1 {
            return;
        }
        let input = &mut scratch[..n];
        input.copy_from_slice(data);
        let tw = &self.twiddles[dir as usize];
        let positive = dir == Direction::Forward;
        work(data, input, 0, 1, &self.factors, tw, positive);
    }
}

fn factorize(mut n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut p = 4;
    while n > 1 {
        while !n.is_multiple_of(p) {
            p = match p {
                4 => 2,
                2 => 3,
                _ => p + 2,
            };
            if p * p > n {
                p = n;
            }
        }
        n /= p;
        out.push((p, n));
    }
    out
}

fn work(
    out: &mut [Complex64],
    input: &[Complex64],
    offset: usize,
    stride: usize,
    factors: &[(usize, usize)],
    tw: &[Complex64],
    positive: bool,
) {
    let (p, m) = factors[0];
    if m == 1 {
        for (j, o) in out.iter_mut().enumerate().take(p) {
            *o = input[offset + j * stride];
        }
    } else {
        for q in 0..p {
            work(
                &mut out[q * m..(q + 1) * m],
                input,
                offset + q * stride,
                stride * p,
                &factors[1..],
                tw,
                positive,
            );
        }
    }
    match p {
        2 => butterfly2(out, stride, m, tw),
        4 => butterfly4(out, stride, m, tw, positive),
        _ => butterfly_generic(out, stride, p, m, tw),
    }
}

fn butterfly2(out: &mut [Complex64], stride: usize, m: usize, tw: &[Complex64]) {
    for k in 0..m {
        let t = out[k + m] * tw[k * stride];
        out[k + m] = out[k] - t;
        out[k] += t;
    }
}

fn butterfly4(out: &mut [Complex64], stride: usize, m: usize, tw: &[Complex64], positive: bool) {
    for k in 0..m {
        let s0 = out[k + m] * tw[k * stride];
        let s1 = out[k + 2 * m] * tw[2 * k * stride];
        let s2 = out[k + 3 * m] * tw[3 * k * stride];
        let s5 = out[k] - s1;
        out[k] += s1;
        let s3 = s0 + s2;
        let s4 = s0 - s2;
        out[k + 2 * m] = out[k] - s3;
        out[k] += s3;
        if positive {
            out[k + m] = Complex64::new(s5.re - s4.im, s5.im + s4.re);
            out[k + 3 * m] = Complex64::new(s5.re + s4.im, s5.im - s4.re);
        } else {
            out[k + m] = Complex64::new(s5.re + s4.im, s5.im - s4.re);
            out[k + 3 * m] = Complex64::new(s5.re - s4.im, s5.im + s4.re);
        }
    }
}

fn butterfly_generic(out: &mut [Complex64], stride: usize, p: usize, m: usize, tw: &[Complex64]) {
    let n = tw.len();
    let mut scratch = [Complex64::new(0.0, 0.0); 64];
    let mut heap;
    let scratch: &mut [Complex64] = if p <= 64 {
        &mut scratch[..p]
    } else {
        heap = vec![Complex64::new(0.0, 0.0); p];
        &mut heap
    };
    for u in 0..m {
        for q in 0..p {
            scratch[q] = out[u + q * m];
        }
        for q1 in 0..p {
            let k = u + q1 * m;
            let mut acc = scratch[0];
            let mut idx = 0;
            let step = stride * k % n;
            for s in scratch.iter().skip(1) {
                idx += step;
                if idx >= n {
                    idx -= n;
                }
                acc += s * tw[idx];
            }
            out[k] = acc;
        }
    }
}

/// 3D transform over a row-major `[nx][ny][nz]` array.
#[derive(Debug, Clone)]
pub struct Fft3d {
    dims: [usize; 3],
    plans: [Fft1d; 3],
}

impl Fft3d {
    pub fn new(dims: [usize; 3]) -> Self {
        Self {
            dims,
            plans: [Fft1d::new(dims[0]), Fft1d::new(dims[1]), Fft1d::new(dims[2])],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn process(&self, data: &mut [Complex64], dir: Direction) {
        let [nx, ny, nz] = self.dims;
        assert_eq!(data.len(), nx * ny * nz);
        let longest = nx.max(ny).max(nz);
        let mut scratch = vec![Complex64::new(0.0, 0.0); longest];
        let mut line = vec![Complex64::new(0.0, 0.0); longest];

        for row in data.chunks_exact_mut(nz) {
            self.plans[2].process(row, &mut scratch, dir);
        }
        for ix in 0..nx {
            for iz in 0..nz {
                let base = ix * ny * nz + iz;
                for iy in 0..ny {
                    line[iy] = data[base + iy * nz];
                }
                self.plans[1].process(&mut line[..ny], &mut scratch, dir);
                for iy in 0..ny {
                    data[base + iy * nz] = line[iy];
                }
            }
        }
        let plane = ny * nz;
        for j in 0..plane {
            for ix in 0..nx {
                line[ix] = data[ix * plane + j];
            }
            self.plans[0].process(&mut line[..nx], &mut scratch, dir);
            for ix in 0..nx {
                data[ix * plane + j] = line[ix];
            }
        }
    }
}
