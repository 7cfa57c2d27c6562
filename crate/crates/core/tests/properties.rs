mod common;

use std::sync::OnceLock;

use common::{centred, flatten, random_system, relative_rms};
use esp_core::fft::Fft3d;
use esp_core::grid::{interpolate, signed_mode, spread_points};
use esp_core::{
    build_plan, relative_force_error, EwaldPlan, ForceMethod, FourierGrid, GridData, Overrides, SplitFamily,
    SplitKernel, WindowKernel,
};
use proptest::prelude::*;

const L: f64 = 8.0;
const EPS: f64 = 1e-4;

fn plans() -> &'static [EwaldPlan; 3] {
    static PLANS: OnceLock<[EwaldPlan; 3]> = OnceLock::new();
    PLANS.get_or_init(|| {
        let pswf = build_plan([L; 3], SplitFamily::Pswf, EPS, 1.0, &Overrides::default()).unwrap();
        let gauss = build_plan([L; 3], SplitFamily::Gaussian, EPS, 1.0, &Overrides::default()).unwrap();
        let ik = pswf.with_force_method(ForceMethod::Ik);
        [pswf, gauss, ik]
    })
}

fn window(pswf: bool, order: usize) -> WindowKernel {
    if pswf {
        WindowKernel::pswf(order, 2.2 * order as f64).unwrap()
    } else {
        WindowKernel::bspline(order).unwrap()
    }
}

fn points(raw: &[(f64, f64, f64, f64)], box_l: [f64; 3]) -> (Vec<[f64; 3]>, Vec<f64>) {
    raw.iter()
        .map(|&(x, y, z, q)| ([x * box_l[0], y * box_l[1], z * box_l[2]], q))
        .unzip()
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spreading_is_the_adjoint_of_interpolation(
        raw in prop::collection::vec((unit(), unit(), unit(), -2.0..2.0f64), 1..12),
        values in prop::collection::vec(-1.0..1.0f64, 12 * 10 * 14),
        pswf in any::<bool>(),
        order in 3usize..9,
    ) {
        let box_l = [5.0, 4.0, 6.5];
        let dims = [12, 10, 14];
        let grid = FourierGrid::new(dims, box_l).unwrap();
        let w = window(pswf, order);
        let (pos, q) = points(&raw, box_l);
        let b = spread_points(&pos, &q, &w, &grid);
        let g = GridData::from_real(dims, &values).unwrap();
        let lhs: f64 = b.real_parts().iter().zip(&values).map(|(x, y)| x * y).sum();
        let u = interpolate(&g, &w, &grid, &pos, false).unwrap().values;
        let rhs: f64 = q.iter().zip(&u).map(|(a, b)| a * b).sum();
        let scale: f64 = q.iter().zip(&u).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn fft_round_trip(
        dims in (1usize..6, 1usize..6, 1usize..6).prop_map(|(a, b, c)| [2 * a, 2 * b, 2 * c]),
        seed in any::<u64>(),
    ) {
        let n: usize = dims.iter().product();
        let mut r = common::rng(seed);
        let values: Vec<f64> = (0..n).map(|_| rand::Rng::random::<f64>(&mut r) - 0.5).collect();
        let fft = Fft3d::new(dims);
        let back = GridData::from_real(dims, &values).unwrap()
            .fft_forward(&fft).unwrap()
            .fft_inverse(&fft).unwrap();
        for (b, v) in back.values().iter().zip(&values) {
            prop_assert!((b.re / n as f64 - v).abs() <= 1e-13);
            prop_assert!(b.im.abs() / (n as f64) <= 1e-13);
        }
    }

    #[test]
    fn influence_is_even_and_drops_the_zero_mode(
        half in (3usize..9, 3usize..9, 3usize..9),
        box_l in (3.0..9.0f64, 3.0..9.0f64, 3.0..9.0f64),
        pswf in any::<bool>(),
    ) {
        let dims = [2 * half.0, 2 * half.1, 2 * half.2];
        let box_l = [box_l.0, box_l.1, box_l.2];
        let family = if pswf { SplitFamily::Pswf } else { SplitFamily::Gaussian };
        let split = SplitKernel::new(family, 1e-3, 1.0).unwrap();
        let grid = FourierGrid::with_kernels(dims, box_l, &split, &window(pswf, 5)).unwrap();
        let p = grid.influence();
        let at = |i: usize, j: usize, k: usize| p[(i * dims[1] + j) * dims[2] + k];
        prop_assert_eq!(p[0], 0.0);
        let neg = |j: usize, n: usize| (n - j) % n;
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let nyquist = [i, j, k].iter().zip(&dims).any(|(&x, &n)| signed_mode(x, n) == -(n as i64) / 2);
                    if nyquist {
                        continue;
                    }
                    let (a, b) = (at(i, j, k), at(neg(i, dims[0]), neg(j, dims[1]), neg(k, dims[2])));
                    prop_assert!((a - b).abs() <= 1e-15 * a.abs());
                }
            }
        }
    }

    #[test]
    fn window_derivative_matches_finite_differences(
        t in -0.49..0.49f64,
        order in 3usize..11,
        pswf in any::<bool>(),
    ) {
        let w = window(pswf, order);
        let t = t * order as f64;
        let step = 1e-6;
        let fd = (w.value(t + step) - w.value(t - step)) / (2.0 * step);
        prop_assert!((fd - w.derivative(t)).abs() <= 1e-6, "{} vs {}", fd, w.derivative(t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn charge_scaling_is_exact(seed in 0u64..1000, k in -3i32..4, negative in any::<bool>()) {
        let s = random_system(40, L, seed);
        let factor = if negative { -(2f64.powi(k)) } else { 2f64.powi(k) };
        let scaled = s.scaled_charges(factor);
        for plan in plans() {
            let a = plan.evaluate(&s).unwrap();
            let b = plan.evaluate(&scaled).unwrap();
            for (x, y) in a.potentials.iter().zip(&b.potentials) {
                prop_assert_eq!(factor * x, *y);
            }
            for (x, y) in flatten(&a.forces).iter().zip(&flatten(&b.forces)) {
                prop_assert_eq!(factor * factor * x, *y);
            }
            prop_assert_eq!(factor * factor * a.energy, b.energy);
        }
    }

    #[test]
    fn rigid_translation_changes_little(seed in 0u64..1000, shift in (unit(), unit(), unit())) {
        let s = random_system(60, L, seed);
        let moved = s.translated([shift.0 * L, shift.1 * L, shift.2 * L]);
        for plan in plans() {
            let a = plan.evaluate(&s).unwrap();
            let b = plan.evaluate(&moved).unwrap();
            let du = relative_rms(&centred(&b.potentials), &centred(&a.potentials));
            let df = relative_force_error(&b.forces, &a.forces).unwrap();
            prop_assert!(du <= 10.0 * EPS && df <= 10.0 * EPS, "du={} df={}", du, df);
        }
    }

    #[test]
    fn ik_forces_have_no_net_component(seed in 0u64..1000) {
        let s = random_system(80, L, seed);
        let f = plans()[2].evaluate(&s).unwrap().forces;
        let total: f64 = f.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).sum();
        for d in 0..3 {
            let net: f64 = f.iter().map(|v| v[d]).sum();
            prop_assert!(net.abs() <= 1e-8 * total);
        }
    }
}
