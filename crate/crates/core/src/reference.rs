//! Mesh-free classical Ewald summation used as ground truth, and the
//! relative RMS force error.
//!
//! The sum uses the Gaussian (erf/erfc) split with explicit image and
//! structure-factor loops, so it shares no code path with the gridded
//! evaluation beyond the particle container.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_SQRT_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ewald::map_indices;
use crate::math::{ceil, cos, erfc, exp, ln, round, sin, sqrt};
use crate::system::ParticleSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Largest image shell `max |n_d|` visited in the real-space sum.
    pub real_shells: usize,
    /// Real-space interaction radius beyond which terms were dropped.
    pub real_cutoff: f64,
    /// Largest integer mode index `max |m_d|` in the reciprocal sum.
    pub reciprocal_shells: usize,
    /// Wavenumber beyond which reciprocal terms were dropped.
    pub reciprocal_cutoff: f64,
    /// Gaussian splitting parameter.
    pub beta: f64,
    /// Largest dropped term, relative to the natural potential and force scales.
    pub residual: f64,
    /// Relative energy difference against a rerun at `1.3 beta`.
    pub split_check: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceResult {
    pub potentials: Vec<f64>,
    pub forces: Vec<[f64; 3]>,
    pub energy: f64,
    pub report: ConvergenceReport,
}

/// Classical Ewald sum converged so that every dropped term is below
/// `tol / 10` of the potential and force scales. The result is recomputed at
/// a second splitting parameter and the two energies must agree within `tol`.
pub fn direct_ewald(system: &ParticleSystem, tol: f64) -> Result<ReferenceResult> {
    if !(1e-12..1.0).contains(&tol) {
        return Err(Error::InvalidParameter(
            "reference tolerance must lie in [1e-12, 1)",
        ));
    }
    system.require_neutral()?;
    let l_min = system.box_lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    // real-space terms at half the shortest edge fall to about tol/10
    let beta = 2.0 * sqrt(ln(10.0 / tol) + 1.0) / l_min;
    let first = ewald_at(system, tol, beta);
    let second = ewald_at(system, tol, 1.3 * beta);
    let scale = energy_scale(system).max(first.energy.abs());
    let diff = if scale > 0.0 {
        (first.energy - second.energy).abs() / scale
    } else {
        0.0
    };
    let residual = first.report.residual.max(second.report.residual);
    if diff > tol || residual > tol {
        return Err(Error::ReferenceNotConverged {
            tol,
            residual: diff.max(residual),
        });
    }
    let mut out = first;
    out.report.split_check = diff;
    Ok(out)
}

fn energy_scale(system: &ParticleSystem) -> f64 {
    let l_min = system.box_lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    system.charges().iter().map(|q| q * q).sum::<f64>() / (4.0 * PI * l_min)
}

fn ewald_at(system: &ParticleSystem, tol: f64, beta: f64) -> ReferenceResult {
    let box_lengths = system.box_lengths();
    let l_min = box_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let target = tol / 10.0;

    // real space: potential term erfc(br)/r, force term erfc(br)/r^2 + 2b/sqrt(pi) e^{-b^2r^2}/r,
    // both measured in units of 1/L and 1/L^2
    let real_bound = |r: f64| {
        let e = erfc(beta * r);
        let g = FRAC_2_SQRT_PI * beta * exp(-beta * beta * r * r);
        (l_min * e / r).max(l_min * l_min * (e / (r * r) + g / r))
    };
    let mut r_cut = 0.5 * l_min;
    while real_bound(r_cut) > target {
        r_cut += 0.05 * l_min;
    }
    let real_shells = ceil(r_cut / l_min + 0.5) as usize;

    // reciprocal space: potential term 4 pi L g(k)/V, force term 4 pi L^2 k g(k)/V
    let volume = system.volume();
    let g = |k: f64| exp(-k * k / (4.0 * beta * beta)) / (k * k);
    let recip_bound = |k: f64| {
        let base = 4.0 * PI * l_min * g(k) / volume;
        base.max(base * l_min * k)
    };
    let l_max = box_lengths.iter().cloned().fold(0.0, f64::max);
    let mut shells = 1usize;
    while recip_bound(2.0 * PI * shells as f64 / l_max) > target {
        shells += 1;
    }
    let k_cut = 2.0 * PI * shells as f64 / l_max;
    let m_max = box_lengths.map(|l| ceil(k_cut * l / (2.0 * PI)) as i64);

    let residual = real_bound(r_cut).max(recip_bound(k_cut));

    let (mut potentials, mut forces) = real_space(system, beta, r_cut, real_shells as i64);
    let (rp, rf) = reciprocal_space(system, beta, k_cut, m_max);
    let self_term = beta / (2.0 * PI * sqrt(PI));
    let charges = system.charges();
    for i in 0..system.len() {
        potentials[i] += rp[i] - charges[i] * self_term;
        for d in 0..3 {
            forces[i][d] += rf[i][d];
        }
    }
    let energy = 0.5 * potentials.iter().zip(charges).map(|(u, q)| u * q).sum::<f64>();
    ReferenceResult {
        potentials,
        forces,
        energy,
        report: ConvergenceReport {
            real_shells,
            real_cutoff: r_cut,
            reciprocal_shells: m_max.iter().cloned().max().unwrap_or(0) as usize,
            reciprocal_cutoff: k_cut,
            beta,
            residual,
            split_check: 0.0,
        },
    }
}

fn real_space(system: &ParticleSystem, beta: f64, r_cut: f64, shells: i64) -> (Vec<f64>, Vec<[f64; 3]>) {
    let positions = system.positions();
    let charges = system.charges();
    let box_lengths = system.box_lengths();
    let rc2 = r_cut * r_cut;
    let one = |i: usize| {
        let mut u = 0.0;
        let mut f = [0.0; 3];
        for (j, pj) in positions.iter().enumerate() {
            let mut d = [0.0; 3];
            for k in 0..3 {
                let x = positions[i][k] - pj[k];
                d[k] = x - box_lengths[k] * round(x / box_lengths[k]);
            }
            for nx in -shells..=shells {
                for ny in -shells..=shells {
                    for nz in -shells..=shells {
                        if i == j && nx == 0 && ny == 0 && nz == 0 {
                            continue;
                        }
                        let v = [
                            d[0] + nx as f64 * box_lengths[0],
                            d[1] + ny as f64 * box_lengths[1],
                            d[2] + nz as f64 * box_lengths[2],
                        ];
                        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                        if r2 >= rc2 {
                            continue;
                        }
                        let r = sqrt(r2);
                        let e = erfc(beta * r);
                        u += charges[j] * e / r;
                        let s = charges[j] * (e / r + FRAC_2_SQRT_PI * beta * exp(-beta * beta * r2)) / r2;
                        f[0] += s * v[0];
                        f[1] += s * v[1];
                        f[2] += s * v[2];
                    }
                }
            }
        }
        let c = 1.0 / (4.0 * PI);
        (u * c, f.map(|x| x * c * charges[i]))
    };
    let pairs: Vec<(f64, [f64; 3])> = map_indices(system.len(), one, true);
    pairs.into_iter().unzip()
}

fn reciprocal_space(
    system: &ParticleSystem,
    beta: f64,
    k_cut: f64,
    m_max: [i64; 3],
) -> (Vec<f64>, Vec<[f64; 3]>) {
    let n = system.len();
    let positions = system.positions();
    let charges = system.charges();
    let box_lengths = system.box_lengths();
    let volume = system.volume();

    // phase tables e^{i m 2 pi x_d / L_d} for m in [-M_d, M_d]
    let tables: [Vec<Complex64>; 3] = [0, 1, 2].map(|d| {
        let width = (2 * m_max[d] + 1) as usize;
        let mut t = vec![Complex64::new(0.0, 0.0); n * width];
        for (i, p) in positions.iter().enumerate() {
            let a = 2.0 * PI * p[d] / box_lengths[d];
            for m in -m_max[d]..=m_max[d] {
                let b = a * m as f64;
                t[i * width + (m + m_max[d]) as usize] = Complex64::new(cos(b), sin(b));
            }
        }
        t
    });
    let phase = |i: usize, m: [i64; 3]| -> Complex64 {
        let mut z = Complex64::new(1.0, 0.0);
        for d in 0..3 {
            let width = (2 * m_max[d] + 1) as usize;
            z *= tables[d][i * width + (m[d] + m_max[d]) as usize];
        }
        z
    };

    // half space: m_x > 0, or m_x = 0 and m_y > 0, or m_x = m_y = 0 and m_z > 0
    let mut modes = Vec::new();
    for mx in 0..=m_max[0] {
        for my in -m_max[1]..=m_max[1] {
            for mz in -m_max[2]..=m_max[2] {
                let positive = mx > 0 || (mx == 0 && (my > 0 || (my == 0 && mz > 0)));
                if !positive {
                    continue;
                }
                let k = [
                    2.0 * PI * mx as f64 / box_lengths[0],
                    2.0 * PI * my as f64 / box_lengths[1],
                    2.0 * PI * mz as f64 / box_lengths[2],
                ];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 > k_cut * k_cut {
                    continue;
                }
                // factor 2 for the mirrored half
                let weight = 2.0 * exp(-k2 / (4.0 * beta * beta)) / (k2 * volume);
                modes.push(([mx, my, mz], k, weight));
            }
        }
    }

    let structure: Vec<Complex64> = modes
        .iter()
        .map(|(m, _, _)| (0..n).map(|j| charges[j] * phase(j, *m)).sum())
        .collect();

    let one = |i: usize| {
        let mut u = 0.0;
        let mut f = [0.0; 3];
        for ((m, k, w), s) in modes.iter().zip(&structure) {
            // e^{i k r_i} conj(S)
            let z = phase(i, *m) * s.conj();
            u += w * z.re;
            let fi = w * z.im;
            f[0] += fi * k[0];
            f[1] += fi * k[1];
            f[2] += fi * k[2];
        }
        (u, f.map(|x| x * charges[i]))
    };
    let pairs: Vec<(f64, [f64; 3])> = map_indices(n, one, true);
    pairs.into_iter().unzip()
}

/// Relative RMS error `sqrt(sum |F~_i - F_i|^2 / sum |F_i|^2)`.
pub fn relative_force_error(test: &[[f64; 3]], reference: &[[f64; 3]]) -> Result<f64> {
    if test.len() != reference.len() {
        return Err(Error::LengthMismatch(test.len(), reference.len()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in test.iter().zip(reference) {
        for d in 0..3 {
            num += (a[d] - b[d]) * (a[d] - b[d]);
            den += b[d] * b[d];
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(sqrt(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_forces_have_zero_error() {
        let f = vec![[1.0, -2.0, 0.5], [0.0, 3.0, 1.0]];
        assert_eq!(relative_force_error(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn scaled_forces_error_is_scale() {
        let f = vec![[1.0, -2.0, 0.5], [0.0, 3.0, 1.0]];
        let g: Vec<_> = f.iter().map(|v| v.map(|x| 1.01 * x)).collect();
        assert!((relative_force_error(&g, &f).unwrap() - 0.01).abs() < 1e-14);
    }

    #[test]
    fn error_preconditions() {
        let f = vec![[0.0; 3]];
        assert!(matches!(relative_force_error(&f, &f), Err(Error::ZeroReference)));
        assert!(matches!(
            relative_force_error(&f, &[]),
            Err(Error::LengthMismatch(1, 0))
        ));
    }

    #[test]
    fn opposite_pair_forces_are_axial() {
        let l = 4.0;
        let sys = ParticleSystem::new(vec![[0.0; 3], [l / 2.0, 0.0, 0.0]], vec![1.0, -1.0], [l; 3]).unwrap();
        let r = direct_ewald(&sys, 1e-9).unwrap();
        for f in &r.forces {
            assert!(f[1].abs() < 1e-12 && f[2].abs() < 1e-12);
        }
        assert!((r.forces[0][0] + r.forces[1][0]).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_tolerance() {
        let sys = ParticleSystem::new(vec![[0.0; 3], [1.0; 3]], vec![1.0, -1.0], [4.0; 3]).unwrap();
        assert!(direct_ewald(&sys, 1e-13).is_err());
    }
}
