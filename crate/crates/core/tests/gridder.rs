mod common;

use std::f64::consts::PI;

use common::{random_system, rng};
use esp_core::grid::{influence_coefficients, interpolate, signed_mode, spread};
use esp_core::{FourierGrid, GridData, ParticleSystem, Space, SplitFamily, SplitKernel, WindowKernel};
use num_complex::Complex64;
use rand::Rng;

fn pswf_window(order: usize) -> WindowKernel {
    WindowKernel::pswf(order, 2.3 * order as f64).unwrap()
}

fn grid(n: usize, l: f64) -> FourierGrid {
    FourierGrid::new([n; 3], [l; 3]).unwrap()
}

#[test]
fn spread_of_zero_charges_is_zero() {
    let s = random_system(20, 5.0, 1).scaled_charges(0.0);
    let g = spread(&s, &pswf_window(6), &grid(16, 5.0));
    assert!(g.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
}

#[test]
fn spread_superposes() {
    let (w, gr) = (pswf_window(7), grid(16, 5.0));
    let a = ParticleSystem::new(vec![[1.1, 2.2, 3.3]], vec![0.7], [5.0; 3]).unwrap();
    let b = ParticleSystem::new(vec![[4.9, 0.05, 2.5]], vec![-1.3], [5.0; 3]).unwrap();
    let ab = ParticleSystem::new(vec![[1.1, 2.2, 3.3], [4.9, 0.05, 2.5]], vec![0.7, -1.3], [5.0; 3]).unwrap();
    let (ga, gb, gab) = (spread(&a, &w, &gr), spread(&b, &w, &gr), spread(&ab, &w, &gr));
    for i in 0..gab.values().len() {
        let sum = ga.values()[i] + gb.values()[i];
        assert!((gab.values()[i] - sum).norm() <= 1e-15);
        assert_eq!(gab.values()[i].im, 0.0);
    }
}

#[test]
fn unit_charge_on_node_spreads_window_samples() {
    let (n, l) = (16, 8.0);
    let h = l / n as f64;
    let node = [3usize, 7, 12];
    for order in [4, 6, 8] {
        let w = pswf_window(order);
        let pos = node.map(|i| i as f64 * h);
        let s = ParticleSystem::new(vec![pos], vec![1.0], [l; 3]).unwrap();
        let g = spread(&s, &w, &grid(n, l));
        let half = order as i64 / 2;
        let mut touched = 0;
        for dx in -half..=half {
            for dy in -half..=half {
                for dz in -half..=half {
                    let idx = [dx, dy, dz];
                    let at = [0, 1, 2].map(|d| (node[d] as i64 - idx[d]).rem_euclid(n as i64) as usize);
                    let want: f64 = idx.iter().map(|&k| w.direct(k as f64).0).product();
                    let got = g.values()[g.index(at[0], at[1], at[2])].re;
                    // the footprint is half-open, so one edge plane may be left out
                    let edge = idx.iter().any(|k| k.abs() == half);
                    let ok = (got - want).abs() <= 1e-12 || (edge && got == 0.0);
                    assert!(ok, "P={order} offset {idx:?}: {got} vs {want}");
                    if got != 0.0 {
                        touched += 1;
                    }
                }
            }
        }
        assert!(touched <= order.pow(3));
        let total: f64 = g.values().iter().map(|v| v.re).sum();
        let line: f64 = (-half..half).map(|k| w.direct(k as f64).0).sum();
        assert!((total - line.powi(3)).abs() <= 1e-12);
    }
}

#[test]
fn footprint_has_p_cubed_points() {
    let (n, l) = (20, 10.0);
    let mut r = rng(5);
    for order in [5, 6, 7] {
        let w = pswf_window(order);
        for _ in 0..10 {
            let pos = [0; 3].map(|_| r.random::<f64>() * l);
            let s = ParticleSystem::new(vec![pos], vec![1.0], [l; 3]).unwrap();
            let g = spread(&s, &w, &grid(n, l));
            let nonzero = g.values().iter().filter(|v| v.re != 0.0).count();
            assert!(nonzero <= order.pow(3) && nonzero >= (order - 1).pow(3));
        }
    }
}

#[test]
fn shifting_by_one_spacing_rolls_the_grid() {
    let (n, l) = (16, 8.0);
    let h = l / n as f64;
    let s = random_system(12, l, 3);
    let shifted = s.translated([h, 0.0, 0.0]);
    let w = pswf_window(6);
    let (a, b) = (spread(&s, &w, &grid(n, l)), spread(&shifted, &w, &grid(n, l)));
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let va = a.values()[a.index(ix, iy, iz)].re;
                let vb = b.values()[b.index((ix + 1) % n, iy, iz)].re;
                assert!((va - vb).abs() <= 1e-12 * (1.0 + va.abs()));
            }
        }
    }
}

#[test]
fn delta_transforms_to_constant_and_back() {
    let gr = grid(12, 3.0);
    let mut values = vec![0.0; 12 * 12 * 12];
    values[0] = 1.0;
    let f = GridData::from_real([12; 3], &values)
        .unwrap()
        .fft_forward(gr.fft())
        .unwrap();
    assert_eq!(f.space(), Space::Fourier);
    assert!(f
        .values()
        .iter()
        .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
}

#[test]
fn forward_then_inverse_is_nf_times_identity() {
    for dims in [[16, 16, 16], [10, 12, 18], [30, 8, 6]] {
        let gr = FourierGrid::new(dims, [4.0, 5.0, 6.0]).unwrap();
        let mut r = rng(dims[0] as u64);
        let x: Vec<f64> = (0..gr.total_modes()).map(|_| r.random::<f64>() - 0.5).collect();
        let back = GridData::from_real(dims, &x)
            .unwrap()
            .fft_forward(gr.fft())
            .unwrap()
            .fft_inverse(gr.fft())
            .unwrap();
        let nf = gr.total_modes() as f64;
        let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (b, a) in back.values().iter().zip(&x) {
            assert!((b.re / nf - a).abs() <= 1e-13 * scale);
            assert!((b.im / nf).abs() <= 1e-13 * scale);
        }
    }
}

#[test]
fn real_input_gives_hermitian_transform() {
    let dims = [8, 10, 12];
    let gr = FourierGrid::new(dims, [1.0; 3]).unwrap();
    let mut r = rng(9);
    let x: Vec<f64> = (0..gr.total_modes()).map(|_| r.random::<f64>()).collect();
    let f = GridData::from_real(dims, &x)
        .unwrap()
        .fft_forward(gr.fft())
        .unwrap();
    for ix in 0..dims[0] {
        for iy in 0..dims[1] {
            for iz in 0..dims[2] {
                let a = f.values()[f.index(ix, iy, iz)];
                let m = [ix, iy, iz]
                    .iter()
                    .zip(dims)
                    .map(|(&i, n)| (n - i) % n)
                    .collect::<Vec<_>>();
                let b = f.values()[f.index(m[0], m[1], m[2])];
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn influence_mode_matches_scalar_formula() {
    let (n, l, r_c, eps) = (16usize, 10.0f64, 1.0, 1e-3f64);
    let split = SplitKernel::new(SplitFamily::Gaussian, eps, r_c).unwrap();
    let window = WindowKernel::bspline(5).unwrap();
    let p = influence_coefficients(&split, &window, [n; 3], [l; 3]).unwrap();
    // scalar evaluation: 1/(4 pi r) split by erf(sqrt(alpha) r / r_c)
    let alpha = (1.0 / eps).ln();
    let xi = 2.0 * PI / l;
    let s_hat = (-(r_c * xi).powi(2) / (4.0 * alpha)).exp() / (xi * xi);
    let theta = xi * l / n as f64;
    let phihat = ((theta / 2.0).sin() / (theta / 2.0)).powi(5);
    let want = s_hat / (l.powi(3) * phihat * phihat);
    let got = p[n * n];
    assert!(((got - want) / want).abs() <= 1e-12, "{got} vs {want}");
    assert_eq!(p[0], 0.0);
}

#[test]
fn influence_is_even_and_nonnegative() {
    let dims = [16, 18, 20];
    let box_l = [8.0, 9.0, 10.0];
    let split = SplitKernel::new(SplitFamily::Pswf, 1e-4, 1.0).unwrap();
    let window = pswf_window(6);
    let p = influence_coefficients(&split, &window, dims, box_l).unwrap();
    let at = |i: [usize; 3]| p[(i[0] * dims[1] + i[1]) * dims[2] + i[2]];
    let mut r = rng(2);
    for _ in 0..20 {
        let k = [0, 1, 2].map(|d| r.random_range(1..dims[d]));
        let mk = [0, 1, 2].map(|d| dims[d] - k[d]);
        // -k lies outside the index set only on the Nyquist planes
        if (0..3).any(|d| signed_mode(k[d], dims[d]) == -(dims[d] as i64) / 2) {
            continue;
        }
        assert!((at(k) - at(mk)).abs() <= 1e-15 * at(k).abs());
    }
    assert!(p.iter().all(|&v| v >= 0.0));
    assert_eq!(p[0], 0.0);
}

fn sample_grid(dims: [usize; 3], seed: u64) -> GridData {
    let mut r = rng(seed);
    let v: Vec<f64> = (0..dims.iter().product())
        .map(|_| r.random::<f64>() - 0.5)
        .collect();
    GridData::from_real(dims, &v).unwrap()
}

#[test]
fn interpolating_a_constant_grid_gives_the_footprint_sum() {
    let (n, l) = (16, 8.0);
    let gr = grid(n, l);
    let v = 2.5;
    let g = GridData::from_real([n; 3], &vec![v; n * n * n]).unwrap();
    let mut r = rng(4);
    let points: Vec<[f64; 3]> = (0..10).map(|_| [0; 3].map(|_| r.random::<f64>() * l)).collect();
    for order in [5, 6] {
        let w = pswf_window(order);
        let out = interpolate(&g, &w, &gr, &points, false).unwrap();
        for (p, got) in points.iter().zip(&out.values) {
            let want: f64 = (0..3)
                .map(|d| {
                    let t = p[d] / (l / n as f64);
                    let lo = (t - order as f64 / 2.0).ceil() as i64;
                    (lo..lo + order as i64)
                        .map(|j| w.value(t - j as f64))
                        .sum::<f64>()
                })
                .product();
            assert!((got - v * want).abs() <= 1e-12, "{got} vs {}", v * want);
        }
    }
}

#[test]
fn interpolated_gradient_matches_finite_difference() {
    let (n, l) = (16, 8.0);
    let gr = grid(n, l);
    let g = sample_grid([n; 3], 11);
    let w = pswf_window(7);
    let mut r = rng(12);
    let step = 1e-6 * l;
    for _ in 0..10 {
        let p = [0; 3].map(|_| r.random::<f64>() * l);
        let grad = interpolate(&g, &w, &gr, &[p], true).unwrap().gradients.unwrap()[0];
        for d in 0..3 {
            let (mut a, mut b) = (p, p);
            a[d] += step;
            b[d] -= step;
            let vals = interpolate(&g, &w, &gr, &[a, b], false).unwrap().values;
            let fd = (vals[0] - vals[1]) / (2.0 * step);
            let scale = grad.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!((fd - grad[d]).abs() <= 1e-6 * scale, "{fd} vs {}", grad[d]);
        }
    }
}

#[test]
fn interpolating_zero_gives_zero() {
    let gr = grid(12, 6.0);
    let g = GridData::zeros([12; 3], Space::Real);
    let out = interpolate(&g, &pswf_window(6), &gr, &[[1.0, 2.0, 3.0]], true).unwrap();
    assert_eq!(out.values, vec![0.0]);
    assert_eq!(out.gradients.unwrap(), vec![[0.0; 3]]);
}

#[test]
fn interpolation_needs_real_space_grid() {
    let gr = grid(12, 6.0);
    let g = GridData::zeros([12; 3], Space::Fourier);
    assert!(interpolate(&g, &pswf_window(6), &gr, &[[1.0; 3]], false).is_err());
}

#[test]
fn spread_and_interpolate_are_adjoint() {
    let dims = [16, 18, 20];
    let box_l = [8.0, 9.0, 10.0];
    let gr = FourierGrid::new(dims, box_l).unwrap();
    let c = sample_grid(dims, 21);
    for (order, seed) in [(5, 1), (6, 2), (8, 3)] {
        let w = pswf_window(order);
        let mut r = rng(seed);
        let positions: Vec<[f64; 3]> = (0..40)
            .map(|_| [0, 1, 2].map(|d| r.random::<f64>() * box_l[d]))
            .collect();
        let q: Vec<f64> = (0..40).map(|_| r.random::<f64>() - 0.5).collect();
        let s = ParticleSystem::new(positions.clone(), q.clone(), box_l).unwrap();
        let b = spread(&s, &w, &gr);
        let lhs: f64 = b.values().iter().zip(c.values()).map(|(x, y)| x.re * y.re).sum();
        let u = interpolate(&c, &w, &gr, &positions, false).unwrap().values;
        let rhs: f64 = q.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!(
            (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()),
            "{lhs} vs {rhs}"
        );
    }
}
