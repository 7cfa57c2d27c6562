use std::f64::consts::PI;

use esp_core::{solve_c, ProlateExpansion, SplitFamily, SplitKernel, WindowKernel};

const TABLE_EPS: [f64; 5] = [1e-3, 5e-4, 1e-4, 5e-5, 1e-5];
const TABLE_C: [f64; 5] = [9.5392, 10.290, 12.024, 12.762, 14.471];
const TABLE_ALPHA: [f64; 5] = [6.9078, 7.6009, 9.2103, 9.9035, 11.5129];

#[test]
fn prolate_bandwidths_match_table() {
    for (eps, want) in TABLE_EPS.iter().zip(TABLE_C) {
        let c = solve_c(*eps).unwrap();
        assert!((c - want).abs() <= 5e-3, "eps={eps:e}: c={c} vs {want}");
    }
}

#[test]
fn gaussian_shapes_match_table() {
    for (eps, want) in TABLE_EPS.iter().zip(TABLE_ALPHA) {
        let alpha = SplitKernel::new(SplitFamily::Gaussian, *eps, 1.0)
            .unwrap()
            .shape();
        assert!((alpha - want).abs() <= 5e-5, "eps={eps:e}: {alpha} vs {want}");
    }
}

/// First `eta` on a fine scan with `chihat(eta) <= eps chihat(0)`.
fn bandlimit(split: &SplitKernel, eps: f64) -> f64 {
    let h = 1e-3;
    let top = split.chihat(0.0);
    (1..)
        .map(|i| i as f64 * h)
        .find(|&eta| split.chihat(eta) <= eps * top)
        .unwrap()
}

#[test]
fn bandlimits_at_1e4() {
    let p = bandlimit(&SplitKernel::new(SplitFamily::Pswf, 1e-4, 1.0).unwrap(), 1e-4);
    let g = bandlimit(&SplitKernel::new(SplitFamily::Gaussian, 1e-4, 1.0).unwrap(), 1e-4);
    assert!((p / 12.0 - 1.0).abs() <= 0.05, "pswf {p}");
    assert!((g / 18.4 - 1.0).abs() <= 0.05, "gaussian {g}");
    assert!(((g / p).powi(3) / 3.6 - 1.0).abs() <= 0.15);
}

#[test]
fn split_is_a_partition_of_the_coulomb_kernel() {
    for family in [SplitFamily::Pswf, SplitFamily::Gaussian] {
        let s = SplitKernel::new(family, 1e-5, 1.3).unwrap();
        for r in [0.05, 0.4, 0.9, 1.25] {
            let total = s.local_profile(r).0 + s.spectral_profile(r);
            assert!((total * 4.0 * PI * r - 1.0).abs() <= 1e-12, "{family:?} r={r}");
        }
        let (beyond, f) = s.local_kernel(1.3).unwrap();
        assert_eq!((beyond, f), (0.0, 0.0));
    }
}

#[test]
fn local_force_is_minus_derivative() {
    for family in [SplitFamily::Pswf, SplitFamily::Gaussian] {
        let s = SplitKernel::new(family, 1e-4, 1.0).unwrap();
        for r in [0.1, 0.5, 0.8] {
            let h = 1e-6;
            let fd = -(s.local_profile(r + h).0 - s.local_profile(r - h).0) / (2.0 * h);
            let f = s.local_profile(r).1;
            assert!((fd - f).abs() <= 1e-7 * f.abs(), "{family:?} r={r}: {fd} vs {f}");
        }
    }
}

#[test]
fn self_term_is_the_small_r_limit() {
    for family in [SplitFamily::Pswf, SplitFamily::Gaussian] {
        let r_c = 1.7;
        let s = SplitKernel::new(family, 1e-4, r_c).unwrap();
        let limit = s.spectral_profile(1e-6 * r_c);
        let s0 = s.self_potential();
        assert!(((limit - s0) / s0).abs() <= 1e-6);
        assert!((s0 - s.chi0() / (4.0 * PI * r_c)).abs() <= 1e-15 * s0);
    }
}

#[test]
fn gaussian_self_term_closed_form() {
    let (eps, r_c) = (1e-5, 0.9);
    let s = SplitKernel::new(SplitFamily::Gaussian, eps, r_c).unwrap();
    let alpha = (1.0f64 / eps).ln();
    let want = alpha.sqrt() / (2.0 * PI.powf(1.5) * r_c);
    assert!((s.self_potential() - want).abs() <= 1e-14 * want);
}

#[test]
fn spectral_transform_matches_quadrature() {
    // S^(xi) = (4 pi / xi) int_0^inf r S(r) sin(xi r) dr with S(r) = Psi(r/r_c)/(4 pi r)
    let s = SplitKernel::new(SplitFamily::Pswf, 1e-4, 1.0).unwrap();
    for xi in [0.7, 2.0, 5.0] {
        // Psi is 1 beyond r_c; the remaining tail sin(xi r)/xi integrates to cos(xi r_c)/xi^2
        let n = 20000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            acc += s.spectral_profile(r) * 4.0 * PI * r * (xi * r).sin() / xi * h;
        }
        acc += (xi * 1.0).cos() / (xi * xi);
        let want = s.spectral_hat(xi);
        assert!(
            (acc - want).abs() <= 1e-6 * want.abs().max(1e-3),
            "xi={xi}: {acc} vs {want}"
        );
    }
}

#[test]
fn window_tables_match_direct_evaluation() {
    let w = WindowKernel::pswf(7, 16.0).unwrap();
    let b = WindowKernel::bspline(5).unwrap();
    for k in 0..200 {
        let t = -3.49 + k as f64 * 0.035;
        let (v, d) = w.direct(t);
        assert!((w.value(t) - v).abs() <= 1e-12);
        assert!((w.derivative(t) - d).abs() <= 1e-10);
        let (bv, bd) = b.direct(t.clamp(-2.49, 2.49));
        assert!((b.value(t.clamp(-2.49, 2.49)) - bv).abs() <= 1e-13);
        assert!((b.derivative(t.clamp(-2.49, 2.49)) - bd).abs() <= 1e-11);
    }
}

#[test]
fn window_transform_matches_quadrature() {
    let w = WindowKernel::pswf(6, 14.0).unwrap();
    for theta in [0.0, 0.8, 2.0, PI] {
        let n = 6000;
        let h = 6.0 / n as f64;
        let q: f64 = (0..n)
            .map(|i| {
                let t = -3.0 + (i as f64 + 0.5) * h;
                w.direct(t).0 * (theta * t).cos() * h
            })
            .sum();
        assert!((q - w.hat(theta)).abs() <= 1e-7, "theta={theta}");
    }
}

#[test]
fn prolate_satisfies_its_integral_equation() {
    let p = ProlateExpansion::new(12.0, 1e-15).unwrap();
    for x in [0.0, 0.3, 0.77] {
        let lhs = p.apply_operator(x);
        assert!((lhs / p.value(x) - p.eigenvalue()).abs() <= 1e-10 * p.eigenvalue().abs());
    }
}
