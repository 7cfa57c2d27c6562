//! Parameter selection, plan construction and the full energy/force
//! evaluation: short-range pair sum, spectral five-step pipeline and the
//! self-interaction correction.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::cells::CellList;
use crate::error::{Error, Result};
use crate::grid::{interpolate_impl, signed_mode, spread, FourierGrid, GridData};
use crate::kernels::{pswf_edge, pswf_window_hat, SplitFamily, SplitKernel, WindowFamily, WindowKernel};
use crate::math::{abs, ceil, cos, sqrt};
use crate::prolate::ProlateExpansion;
use crate::system::ParticleSystem;
use crate::timer::Stopwatch;

/// Window order used by the classical baseline unless overridden.
pub const DEFAULT_GAUSSIAN_ORDER: usize = 5;

const MAX_GRID: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForceMethod {
    /// Multiply Fourier data by `-i xi` and interpolate three gradient grids.
    Ik,
    /// Differentiate the interpolation window analytically.
    #[default]
    Ad,
}

/// Caller pins for the selected parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub n_f: Option<[usize; 3]>,
    pub order: Option<usize>,
    pub c1: Option<f64>,
    pub force_method: ForceMethod,
    /// Skip the truncation and aliasing gates (for deliberately
    /// under-resolved runs).
    pub unchecked: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectedParameters {
    pub family: SplitFamily,
    pub eps: f64,
    pub r_c: f64,
    /// `alpha` (Gaussian) or `c` (PSWF).
    pub shape: f64,
    /// Grid size from the closed-form truncation rule, rounded to even 5-smooth.
    pub base_n_f: [usize; 3],
    pub n_f: [usize; 3],
    pub order: usize,
    /// PSWF window bandwidth; `None` for B-splines.
    pub c1: Option<f64>,
    pub aliasing: f64,
    pub truncation: f64,
}

/// Recommended PSWF window order for precision `eps`.
pub fn table_order(eps: f64) -> usize {
    const TABLE: [(f64, usize); 5] = [(1e-3, 5), (5e-4, 5), (1e-4, 6), (5e-5, 7), (1e-5, 8)];
    if eps >= 1e-3 {
        return 5;
    }
    // first row at least as strict as eps
    for &(e, p) in &TABLE {
        if e <= eps * (1.0 + 1e-9) {
            return p;
        }
    }
    // beyond the table: about one more point per digit
    let digits = -crate::math::ln(eps) / core::f64::consts::LN_10;
    (ceil(digits) as usize + 3).min(16)
}

/// Smallest even 5-smooth integer `>= n`.
pub fn next_smooth_even(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m.is_multiple_of(2) {
            let mut r = m;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

/// Unrounded grid size from the closed-form truncation rule along a box edge
/// of length `l`: `2 ceil(alpha l / (pi r_c))` for the Gaussian,
/// `ceil(c l / (pi r_c))` for the PSWF.
pub fn raw_grid_size(family: SplitFamily, shape: f64, l: f64, r_c: f64) -> usize {
    match family {
        SplitFamily::Gaussian => 2 * ceil(shape * l / (PI * r_c)) as usize,
        SplitFamily::Pswf => ceil(shape * l / (PI * r_c)) as usize,
    }
}

/// Alias images summed explicitly on each side of a mode; the rest come from
/// the asymptotic tail of the window transform.
const ALIAS_IMAGES: i64 = 4;

/// Window-independent pieces of the aliasing estimate. For each axis `d` and
/// index `j`, the squared force weight `w^2 = (chihat(r_c|xi|)/(chihat(0)|xi|))^2`
/// of every mode with `d`-th index `j`, weighted as the per-axis image sums
/// `sigma_d` and `tau_d` enter the error of that mode, plus the total `sum w^2`.
struct AliasWeights {
    sigma: [Vec<f64>; 3],
    tau: [Vec<f64>; 3],
    total: f64,
    spacing: [f64; 3],
}

fn alias_weights(
    split: &SplitKernel,
    dims: [usize; 3],
    box_lengths: [f64; 3],
    method: ForceMethod,
) -> AliasWeights {
    let xi: [Vec<f64>; 3] = [0, 1, 2].map(|d| {
        (0..dims[d])
            .map(|j| 2.0 * PI * signed_mode(j, dims[d]) as f64 / box_lengths[d])
            .collect()
    });
    let mut sigma = [vec![0.0; dims[0]], vec![0.0; dims[1]], vec![0.0; dims[2]]];
    let mut tau = sigma.clone();
    let mut total = 0.0;
    let chi0 = split.chihat(0.0);
    for ix in 0..dims[0] {
        for iy in 0..dims[1] {
            for iz in 0..dims[2] {
                let k = [xi[0][ix], xi[1][iy], xi[2][iz]];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 == 0.0 {
                    continue;
                }
                let c = split.chihat(split.r_c() * sqrt(k2)) / chi0;
                let w2 = c * c / k2;
                total += w2;
                for (d, j) in [ix, iy, iz].into_iter().enumerate() {
                    match method {
                        ForceMethod::Ik => sigma[d][j] += 2.0 * w2,
                        ForceMethod::Ad => {
                            sigma[d][j] += w2 * (2.0 * k2 - k[d] * k[d]) / k2;
                            tau[d][j] += w2 / k2;
                        }
                    }
                }
            }
        }
    }
    AliasWeights {
        sigma,
        tau,
        total,
        spacing: [0, 1, 2].map(|d| box_lengths[d] / dims[d] as f64),
    }
}

/// Per-axis image sums at `theta = 2 pi k / n`: `sigma = sum_{m != 0} r_m^2` and
/// `tau = sum_{m != 0} r_m^2 (theta + 2 pi m)^2`, with
/// `r_m = phihat(theta + 2 pi m) / phihat(theta)`. Beyond the explicit images
/// the transform of a window with edge slope `a` behaves like
/// `-2 a cos(theta P / 2) / theta^2`.
fn image_sums(theta: f64, hat: &impl Fn(f64) -> f64, order: usize, slope: f64) -> (f64, f64) {
    let h0 = hat(theta);
    let (mut sigma, mut tau) = (0.0, 0.0);
    for m in (-ALIAS_IMAGES..=ALIAS_IMAGES).filter(|&m| m != 0) {
        let t = theta + 2.0 * PI * m as f64;
        let r = hat(t) / h0;
        sigma += r * r;
        tau += r * r * t * t;
    }
    let g = 4.0 * slope * slope * pow2(cos(0.5 * theta * order as f64)) / (h0 * h0);
    // sums of |theta + 2 pi m|^-p over |m| > M by the midpoint rule
    let edge = 2.0 * PI * (ALIAS_IMAGES as f64 + 0.5);
    let (lo, hi) = (edge - abs(theta), edge + abs(theta));
    let tail2 = (1.0 / lo + 1.0 / hi) / (2.0 * PI);
    let tail4 = (1.0 / (lo * lo * lo) + 1.0 / (hi * hi * hi)) / (6.0 * PI);
    (sigma + g * tail4, tau + g * tail2)
}

fn pow2(x: f64) -> f64 {
    x * x
}

/// Combine precomputed weights with the per-axis image sums of a window.
fn alias_from_weights(
    weights: &AliasWeights,
    dims: [usize; 3],
    hat: impl Fn(f64) -> f64,
    order: usize,
    slope: f64,
) -> f64 {
    let mut sum = 0.0;
    let mut sums: Vec<(f64, f64)> = Vec::new();
    for d in 0..3 {
        let n = dims[d];
        if d == 0 || n != dims[d - 1] {
            sums = (0..n)
                .map(|j| image_sums(2.0 * PI * signed_mode(j, n) as f64 / n as f64, &hat, order, slope))
                .collect();
        }
        let h2 = weights.spacing[d] * weights.spacing[d];
        for (j, (sigma, tau)) in sums.iter().enumerate() {
            sum += weights.sigma[d][j] * sigma + weights.tau[d][j] * tau / h2;
        }
    }
    sqrt(sum / weights.total)
}

/// Aliasing estimate: the expected relative RMS force error that the
/// spread/interpolate pipeline adds to the truncated spectral sum, for
/// uncorrelated charges at uniformly random positions.
///
/// A mode `xi` of the pipeline reaches the forces through the images
/// `xi + 2 pi m / h` of both the spreading and the interpolation window,
/// each weighted by `r_m = phihat(theta + 2 pi m)/phihat(theta)` along every
/// axis. With force weight `w = chihat(r_c|xi|)/|xi|` per mode, the squared
/// error of a mode is, to first order in the image sums `sigma_d` and
/// `tau_d` (see `image_sums`):
///
/// - ik: `w^2 sum_d 2 sigma_d`,
/// - AD: `w^2 sum_d [sigma_d (2|xi|^2 - xi_d^2) + tau_d / h_d^2] / |xi|^2`,
///
/// where the AD interpolation images carry their own wavenumber
/// `xi_d + 2 pi m / h_d`. The estimate is the square root of the summed
/// errors over `sum w^2`.
pub fn aliasing_estimate(
    split: &SplitKernel,
    window: &WindowKernel,
    dims: [usize; 3],
    box_lengths: [f64; 3],
    method: ForceMethod,
) -> f64 {
    let weights = alias_weights(split, dims, box_lengths, method);
    alias_from_weights(
        &weights,
        dims,
        |t| window.hat(t),
        window.order(),
        window.edge_slope(),
    )
}

/// Per-mode truncation level: the largest `|chihat(r_c|xi|)|/chihat(0)` over
/// the outer boundary shell of the retained index set (modes with some
/// component equal to `-n/2`).
pub fn truncation_estimate(split: &SplitKernel, dims: [usize; 3], box_lengths: [f64; 3]) -> f64 {
    let chi0 = split.chihat(0.0);
    let mut worst = 0.0f64;
    let xi = |d: usize, j: usize| 2.0 * PI * signed_mode(j, dims[d]) as f64 / box_lengths[d];
    for ix in 0..dims[0] {
        for iy in 0..dims[1] {
            for iz in 0..dims[2] {
                let on_shell = ix == dims[0] / 2 || iy == dims[1] / 2 || iz == dims[2] / 2;
                if !on_shell {
                    continue;
                }
                let k2 = pow2(xi(0, ix)) + pow2(xi(1, iy)) + pow2(xi(2, iz));
                worst = worst.max(abs(split.chihat(split.r_c() * sqrt(k2))) / chi0);
            }
        }
    }
    worst
}

/// Pick the PSWF window bandwidth `c1` in `[c, 1.5 c]` minimising the aliasing
/// estimate for this grid. Returns `(c1, estimate)`.
pub fn optimize_window_shape(
    split: &SplitKernel,
    order: usize,
    dims: [usize; 3],
    box_lengths: [f64; 3],
    method: ForceMethod,
) -> Result<(f64, f64)> {
    let weights = alias_weights(split, dims, box_lengths, method);
    let estimate = |c1: f64| -> Result<f64> {
        let prolate = ProlateExpansion::new(c1, 1e-15)?;
        let (edge, slope) = pswf_edge(&prolate, order);
        let hat = |t: f64| pswf_window_hat(&prolate, order, edge, t);
        Ok(alias_from_weights(&weights, dims, hat, order, slope))
    };
    let c = split.shape();
    let (lo, hi) = (c, 1.5 * c);
    let steps = 10;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=steps {
        let c1 = lo + (hi - lo) * i as f64 / steps as f64;
        let e = estimate(c1)?;
        if e < best.1 {
            best = (c1, e);
        }
    }
    // golden-section refinement around the best sample
    let step = (hi - lo) / steps as f64;
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = estimate(x1)?;
    let mut f2 = estimate(x2)?;
    for _ in 0..12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = estimate(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = estimate(x2)?;
        }
    }
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

fn validate(eps: f64, box_lengths: [f64; 3], r_c: f64) -> Result<()> {
    if !(1e-8..=1e-2).contains(&eps) {
        return Err(Error::UnsupportedPrecision(eps));
    }
    if box_lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidParameter("box lengths must be positive"));
    }
    if !(r_c > 0.0) {
        return Err(Error::InvalidParameter("cutoff radius must be positive"));
    }
    let min_len = box_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    if r_c >= 0.5 * min_len {
        return Err(Error::InvalidParameter(
            "cutoff radius must be below half the shortest box edge",
        ));
    }
    Ok(())
}

fn window_for(
    family: SplitFamily,
    split: &SplitKernel,
    order: usize,
    c1: Option<f64>,
    dims: [usize; 3],
    box_lengths: [f64; 3],
    method: ForceMethod,
) -> Result<(WindowKernel, f64)> {
    match family {
        SplitFamily::Gaussian => {
            let w = WindowKernel::bspline(order)?;
            let ea = aliasing_estimate(split, &w, dims, box_lengths, method);
            Ok((w, ea))
        }
        SplitFamily::Pswf => {
            let c1 = match c1 {
                Some(c1) => c1,
                None => optimize_window_shape(split, order, dims, box_lengths, method)?.0,
            };
            let w = WindowKernel::pswf(order, c1)?;
            let ea = aliasing_estimate(split, &w, dims, box_lengths, method);
            Ok((w, ea))
        }
    }
}

/// Choose shape, grid size and window order for `family` at precision `eps`.
///
/// The grid starts from the closed-form truncation rule (rounded up to an
/// even 5-smooth size) and grows until both the truncation level and the
/// aliasing estimate are at most `eps`. A pinned `n_f` is not grown, but is
/// rejected if it fails the truncation gate (unless `unchecked`).
pub fn select_parameters(
    family: SplitFamily,
    eps: f64,
    box_lengths: [f64; 3],
    r_c: f64,
    overrides: &Overrides,
) -> Result<SelectedParameters> {
    Ok(select_with_kernels(family, eps, box_lengths, r_c, overrides)?.0)
}

fn select_with_kernels(
    family: SplitFamily,
    eps: f64,
    box_lengths: [f64; 3],
    r_c: f64,
    overrides: &Overrides,
) -> Result<(SelectedParameters, SplitKernel, WindowKernel)> {
    validate(eps, box_lengths, r_c)?;
    let split = SplitKernel::new(family, eps, r_c)?;
    let shape = split.shape();
    let order = overrides.order.unwrap_or(match family {
        SplitFamily::Gaussian => DEFAULT_GAUSSIAN_ORDER,
        SplitFamily::Pswf => table_order(eps),
    });
    let base_n_f = box_lengths.map(|l| next_smooth_even(raw_grid_size(family, shape, l, r_c)));

    let finish = |dims: [usize; 3], window: WindowKernel, aliasing: f64, truncation: f64| {
        let params = SelectedParameters {
            family,
            eps,
            r_c,
            shape,
            base_n_f,
            n_f: dims,
            order,
            c1: (family == SplitFamily::Pswf).then(|| window.shape()),
            aliasing,
            truncation,
        };
        (params, window)
    };

    if let Some(dims) = overrides.n_f {
        if dims.iter().any(|&n| n < 2 || n % 2 != 0) {
            return Err(Error::InvalidParameter("grid sizes must be even and at least 2"));
        }
        let truncation = truncation_estimate(&split, dims, box_lengths);
        if !overrides.unchecked && truncation > eps {
            return Err(Error::GridTooCoarse {
                n: dims[0],
                level: truncation,
                eps,
            });
        }
        let (window, aliasing) = window_for(
            family,
            &split,
            order,
            overrides.c1,
            dims,
            box_lengths,
            overrides.force_method,
        )?;
        let (p, w) = finish(dims, window, aliasing, truncation);
        return Ok((p, split, w));
    }

    let mut dims = base_n_f;
    loop {
        let truncation = truncation_estimate(&split, dims, box_lengths);
        if truncation <= eps {
            let (window, aliasing) = window_for(
                family,
                &split,
                order,
                overrides.c1,
                dims,
                box_lengths,
                overrides.force_method,
            )?;
            if aliasing <= eps || overrides.unchecked {
                let (p, w) = finish(dims, window, aliasing, truncation);
                return Ok((p, split, w));
            }
        }
        dims = dims.map(|n| next_smooth_even(n + 1));
        if dims.iter().any(|&n| n > MAX_GRID) {
            return Err(Error::GridTooCoarse {
                n: MAX_GRID,
                level: truncation,
                eps,
            });
        }
    }
}

/// Select parameters and compile everything needed to evaluate.
pub fn build_plan(
    box_lengths: [f64; 3],
    family: SplitFamily,
    eps: f64,
    r_c: f64,
    overrides: &Overrides,
) -> Result<EwaldPlan> {
    let (params, split, window) = select_with_kernels(family, eps, box_lengths, r_c, overrides)?;
    let grid = FourierGrid::with_kernels(params.n_f, box_lengths, &split, &window)?;
    let self_interaction = self_interaction(&window, &grid);
    Ok(EwaldPlan {
        split,
        window,
        grid,
        force_method: overrides.force_method,
        params,
        self_interaction,
    })
}

/// Wall-clock seconds per stage of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub local: f64,
    pub spread: f64,
    pub fft: f64,
    pub scale: f64,
    pub ifft: f64,
    pub interpolate: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.local + self.spread + self.fft + self.scale + self.ifft + self.interpolate
    }

    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("local", self.local),
            ("spread", self.spread),
            ("fft", self.fft),
            ("scale", self.scale),
            ("ifft", self.ifft),
            ("interpolate", self.interpolate),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyForces {
    pub potentials: Vec<f64>,
    pub forces: Vec<[f64; 3]>,
    pub energy: f64,
    pub timings: StageTimings,
}

/// Per-particle potentials and forces from one part of the split.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums {
    pub potentials: Vec<f64>,
    pub forces: Vec<[f64; 3]>,
}

/// Compiled kernels, grid and influence coefficients. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct EwaldPlan {
    split: SplitKernel,
    window: WindowKernel,
    grid: FourierGrid,
    force_method: ForceMethod,
    params: SelectedParameters,
    self_interaction: SelfInteraction,
}

/// Spurious interaction of a charge with its own spread-and-interpolated
/// field.
///
/// A unit charge at grid coordinate `t` sees
/// `W(t) = sum_{l, l'} phi(t - l) G(l - l') phi(t - l')`, where `G` is the
/// real-space grid Green's function (the inverse transform of `p_k`). With a
/// separable window this is `sum_delta G(delta) prod_d C_d(delta_d)` with
/// the footprint autocorrelation `C_d(delta) = sum_j w_j w_{j - delta}`.
/// Only the position-dependent part `W - mean(W)` is an artifact; the mean is
/// the periodic-image self energy that the analytic `S(0)` term pairs with.
#[derive(Debug, Clone)]
struct SelfInteraction {
    /// `G(delta)` for `delta` in `[-(P-1), P-1]^3`, row-major.
    green: Vec<f64>,
    /// Cell average of `W`.
    mean: f64,
}

fn self_interaction(window: &WindowKernel, grid: &FourierGrid) -> SelfInteraction {
    let dims = grid.dims();
    let p = window.order() as i64;
    let width = (2 * p - 1) as usize;
    let data: Vec<Complex64> = grid.influence().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let g = GridData::from_complex(dims, data, crate::grid::Space::Fourier)
        .and_then(|g| g.fft_inverse(grid.fft()))
        .expect("influence array matches the grid");
    let at = |d: usize, off: i64| off.rem_euclid(dims[d] as i64) as usize;
    let mut green = Vec::with_capacity(width * width * width);
    for dx in -(p - 1)..p {
        for dy in -(p - 1)..p {
            for dz in -(p - 1)..p {
                green.push(g.values()[g.index(at(0, dx), at(1, dy), at(2, dz))].re);
            }
        }
    }
    // continuous autocorrelation int phi(s) phi(s - delta) ds by Gauss-Legendre
    // on half-unit panels, exact for the polynomial pieces
    let rule = crate::math::gauss_legendre(24);
    let half = p as f64 / 2.0;
    let (xs, ws) = crate::math::composite_rule(-half, half, 2 * p as usize, &rule);
    let ac: Vec<f64> = (-(p - 1)..p)
        .map(|delta| {
            xs.iter()
                .zip(&ws)
                .map(|(&x, &w)| w * window.value(x) * window.value(x - delta as f64))
                .sum()
        })
        .collect();
    let mut mean = 0.0;
    let mut idx = 0;
    for a in &ac {
        for b in &ac {
            for c in &ac {
                mean += green[idx] * a * b * c;
                idx += 1;
            }
        }
    }
    SelfInteraction { green, mean }
}

impl SelfInteraction {
    /// Artifact potential `W(t) - mean` and the AD self-force per unit
    /// charge squared, `-d_1 W` (derivative on the evaluation point only).
    fn evaluate(&self, window: &WindowKernel, pos: &[f64; 3], h: [f64; 3]) -> (f64, [f64; 3]) {
        let p = window.order();
        let width = 2 * p - 1;
        let mut c = [[0.0; 31]; 3];
        let mut dc = [[0.0; 31]; 3];
        for d in 0..3 {
            let (mut w, mut dw) = ([0.0; 16], [0.0; 16]);
            window.weights(pos[d] / h[d], &mut w, Some(&mut dw));
            // index delta + P - 1, delta = j - j'
            for j in 0..p {
                for jp in 0..p {
                    let k = j + p - 1 - jp;
                    c[d][k] += w[j] * w[jp];
                    dc[d][k] += dw[j] * w[jp] / h[d];
                }
            }
        }
        let (mut u, mut f) = (0.0, [0.0; 3]);
        let mut idx = 0;
        for a in 0..width {
            for b in 0..width {
                let (cab, dab, adb) = (c[0][a] * c[1][b], dc[0][a] * c[1][b], c[0][a] * dc[1][b]);
                for e in 0..width {
                    let g = self.green[idx];
                    idx += 1;
                    u += g * cab * c[2][e];
                    f[0] -= g * dab * c[2][e];
                    f[1] -= g * adb * c[2][e];
                    f[2] -= g * cab * dc[2][e];
                }
            }
        }
        (u - self.mean, f)
    }
}

impl EwaldPlan {
    /// Assemble a plan from explicit kernels and grid size, bypassing
    /// parameter selection.
    pub fn from_kernels(
        split: SplitKernel,
        window: WindowKernel,
        dims: [usize; 3],
        box_lengths: [f64; 3],
        force_method: ForceMethod,
    ) -> Result<Self> {
        let grid = FourierGrid::with_kernels(dims, box_lengths, &split, &window)?;
        let family = split.family();
        let params = SelectedParameters {
            family,
            eps: split.eps(),
            r_c: split.r_c(),
            shape: split.shape(),
            base_n_f: dims,
            n_f: dims,
            order: window.order(),
            c1: (window.family() == WindowFamily::Pswf).then(|| window.shape()),
            aliasing: aliasing_estimate(&split, &window, dims, box_lengths, force_method),
            truncation: truncation_estimate(&split, dims, box_lengths),
        };
        let self_interaction = self_interaction(&window, &grid);
        Ok(Self {
            split,
            window,
            grid,
            force_method,
            params,
            self_interaction,
        })
    }

    pub fn split(&self) -> &SplitKernel {
        &self.split
    }

    pub fn window(&self) -> &WindowKernel {
        &self.window
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn params(&self) -> &SelectedParameters {
        &self.params
    }

    pub fn eps(&self) -> f64 {
        self.params.eps
    }

    pub fn r_c(&self) -> f64 {
        self.split.r_c()
    }

    pub fn order(&self) -> usize {
        self.window.order()
    }

    pub fn force_method(&self) -> ForceMethod {
        self.force_method
    }

    /// Same kernels and grid with a different force method.
    pub fn with_force_method(&self, force_method: ForceMethod) -> Self {
        let mut plan = self.clone();
        plan.force_method = force_method;
        plan.params.aliasing = aliasing_estimate(
            &self.split,
            &self.window,
            self.grid.dims(),
            self.grid.box_lengths(),
            force_method,
        );
        plan
    }

    pub fn estimate_aliasing(&self) -> f64 {
        self.params.aliasing
    }

    pub fn estimate_truncation(&self) -> f64 {
        self.params.truncation
    }

    /// Expected number of neighbours within `r_c` at the given number density.
    pub fn average_neighbors(&self, density: f64) -> f64 {
        density * 4.0 / 3.0 * PI * self.r_c() * self.r_c() * self.r_c()
    }

    fn check_box(&self, system: &ParticleSystem) -> Result<()> {
        if system.box_lengths() != self.grid.box_lengths() {
            return Err(Error::InvalidParameter("system box does not match the plan"));
        }
        Ok(())
    }

    /// Short-range potentials and forces over all pairs within `r_c`
    /// (minimum image), excluding `i = j`.
    pub fn local_sum(&self, system: &ParticleSystem) -> Result<PartialSums> {
        self.local_sum_impl(system, false)
    }

    fn local_sum_impl(&self, system: &ParticleSystem, parallel: bool) -> Result<PartialSums> {
        self.check_box(system)?;
        let positions = system.positions();
        let charges = system.charges();
        let r_c = self.r_c();
        let rc2 = r_c * r_c;
        let cells = CellList::new(positions, system.box_lengths(), r_c);
        let one = |i: usize| -> Result<(f64, [f64; 3])> {
            let pi = &positions[i];
            let mut u = 0.0;
            let mut f = [0.0; 3];
            let mut err = None;
            cells.for_each_candidate(i, pi, |j| {
                let d = cells.displacement(pi, &positions[j]);
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                if r2 >= rc2 {
                    return;
                }
                if r2 == 0.0 {
                    err = Some(Error::ZeroDistance);
                    return;
                }
                let r = sqrt(r2);
                let (pot, radial) = self.split.local_profile(r);
                let qj = charges[j];
                u += qj * pot;
                let s = qj * radial / r;
                f[0] += s * d[0];
                f[1] += s * d[1];
                f[2] += s * d[2];
            });
            match err {
                Some(e) => Err(e),
                None => Ok((u, f.map(|v| v * charges[i]))),
            }
        };
        let results: Vec<Result<(f64, [f64; 3])>> = map_indices(system.len(), one, parallel);
        let mut potentials = Vec::with_capacity(system.len());
        let mut forces = Vec::with_capacity(system.len());
        for r in results {
            let (u, f) = r?;
            potentials.push(u);
            forces.push(f);
        }
        Ok(PartialSums { potentials, forces })
    }

    /// Long-range potentials (self-interaction included) and forces via
    /// spread, FFT, diagonal scaling, inverse FFT and interpolation.
    pub fn spectral_sum(&self, system: &ParticleSystem) -> Result<PartialSums> {
        let mut timings = StageTimings::default();
        self.spectral_sum_impl(system, &mut timings, false)
    }

    fn spectral_sum_impl(
        &self,
        system: &ParticleSystem,
        timings: &mut StageTimings,
        parallel: bool,
    ) -> Result<PartialSums> {
        self.check_box(system)?;
        let fft = self.grid.fft();
        let dims = self.grid.dims();

        let clock = Stopwatch::start();
        let b = spread(system, &self.window, &self.grid);
        timings.spread += clock.seconds();

        let clock = Stopwatch::start();
        let mut bhat = b.fft_forward(fft)?;
        timings.fft += clock.seconds();

        let clock = Stopwatch::start();
        let influence = self.grid.influence();
        let gradient_grids = match self.force_method {
            ForceMethod::Ad => None,
            ForceMethod::Ik => {
                let xi: [Vec<f64>; 3] = [0, 1, 2].map(|d| {
                    let mut w = self.grid.wavenumbers(d);
                    // the Nyquist derivative is not representable on a real grid
                    w[dims[d] / 2] = 0.0;
                    w
                });
                let mut grads = [
                    GridData::zeros(dims, crate::grid::Space::Fourier),
                    GridData::zeros(dims, crate::grid::Space::Fourier),
                    GridData::zeros(dims, crate::grid::Space::Fourier),
                ];
                let src = bhat.values();
                let mut idx = 0;
                for ix in 0..dims[0] {
                    for iy in 0..dims[1] {
                        for iz in 0..dims[2] {
                            let c = src[idx] * influence[idx];
                            // d/dr e^{-i xi.r} = -i xi e^{-i xi.r}
                            let minus_i_c = Complex64::new(c.im, -c.re);
                            grads[0].values_mut()[idx] = minus_i_c * xi[0][ix];
                            grads[1].values_mut()[idx] = minus_i_c * xi[1][iy];
                            grads[2].values_mut()[idx] = minus_i_c * xi[2][iz];
                            idx += 1;
                        }
                    }
                }
                Some(grads)
            }
        };
        for (v, p) in bhat.values_mut().iter_mut().zip(influence) {
            *v *= *p;
        }
        timings.scale += clock.seconds();

        let clock = Stopwatch::start();
        let c = bhat.fft_inverse(fft)?;
        let gradient_grids = match gradient_grids {
            None => None,
            Some([gx, gy, gz]) => Some([gx.fft_inverse(fft)?, gy.fft_inverse(fft)?, gz.fft_inverse(fft)?]),
        };
        timings.ifft += clock.seconds();

        let clock = Stopwatch::start();
        let positions = system.positions();
        let charges = system.charges();
        let (potentials, gradients) = match &gradient_grids {
            None => {
                let interp = interpolate_impl(&c, &self.window, &self.grid, positions, true, parallel)?;
                (interp.values, interp.gradients.unwrap_or_default())
            }
            Some(grads) => {
                let interp = interpolate_impl(&c, &self.window, &self.grid, positions, false, parallel)?;
                let parts: Vec<Vec<f64>> = grads
                    .iter()
                    .map(|g| {
                        interpolate_impl(g, &self.window, &self.grid, positions, false, parallel)
                            .map(|i| i.values)
                    })
                    .collect::<Result<_>>()?;
                let gradients = (0..positions.len())
                    .map(|i| [parts[0][i], parts[1][i], parts[2][i]])
                    .collect();
                (interp.values, gradients)
            }
        };
        let forces = gradients
            .iter()
            .zip(charges)
            .map(|(g, &q)| [-q * g[0], -q * g[1], -q * g[2]])
            .collect();
        timings.interpolate += clock.seconds();
        Ok(PartialSums { potentials, forces })
    }

    /// `q_i S(0)` per particle: the self-interaction carried by the spectral
    /// part, to be subtracted from it.
    pub fn self_correction(&self, charges: &[f64]) -> Vec<f64> {
        let s0 = self.split.self_potential();
        charges.iter().map(|q| q * s0).collect()
    }

    /// Position-dependent part of each particle's interaction with its own
    /// gridded charge: the potential it adds to `u^s` and, for the AD method,
    /// the spurious force it adds to `F^s`. Both are subtracted by
    /// [`evaluate`](Self::evaluate). The ik method carries no such force
    /// because its self term is odd in `k`.
    pub fn grid_self_interaction(&self, system: &ParticleSystem) -> PartialSums {
        self.grid_self_interaction_impl(system, false)
    }

    fn grid_self_interaction_impl(&self, system: &ParticleSystem, parallel: bool) -> PartialSums {
        let h = self.grid.spacing();
        let (pos, q) = (system.positions(), system.charges());
        let per_particle = map_indices(
            system.len(),
            |i| {
                if q[i] == 0.0 {
                    return (0.0, [0.0; 3]);
                }
                let (u, f) = self.self_interaction.evaluate(&self.window, &pos[i], h);
                let f = match self.force_method {
                    ForceMethod::Ad => f.map(|v| q[i] * q[i] * v),
                    // the ik self-force vanishes: its derivative kernel is odd
                    ForceMethod::Ik => [0.0; 3],
                };
                (q[i] * u, f)
            },
            parallel,
        );
        let (potentials, forces) = per_particle.into_iter().unzip();
        PartialSums { potentials, forces }
    }

    /// Potentials, forces and energy of a neutral system.
    pub fn evaluate(&self, system: &ParticleSystem) -> Result<EnergyForces> {
        self.evaluate_with(system, false)
    }

    /// As [`evaluate`](Self::evaluate); with `parallel` (and the `parallel`
    /// feature) the per-particle stages run on the rayon pool. Per-particle
    /// results are accumulated in the same order either way.
    pub fn evaluate_with(&self, system: &ParticleSystem, parallel: bool) -> Result<EnergyForces> {
        system.require_neutral()?;
        let mut timings = StageTimings::default();
        let clock = Stopwatch::start();
        let local = self.local_sum_impl(system, parallel)?;
        timings.local = clock.seconds();
        let spectral = self.spectral_sum_impl(system, &mut timings, parallel)?;
        let selfc = self.self_correction(system.charges());
        let artifact = self.grid_self_interaction_impl(system, parallel);
        let potentials: Vec<f64> = (0..system.len())
            .map(|i| local.potentials[i] + spectral.potentials[i] - selfc[i] - artifact.potentials[i])
            .collect();
        let forces = (0..system.len())
            .map(|i| {
                let (a, b, c) = (local.forces[i], spectral.forces[i], artifact.forces[i]);
                [a[0] + b[0] - c[0], a[1] + b[1] - c[1], a[2] + b[2] - c[2]]
            })
            .collect();
        let energy = 0.5
            * potentials
                .iter()
                .zip(system.charges())
                .map(|(u, q)| u * q)
                .sum::<f64>();
        Ok(EnergyForces {
            potentials,
            forces,
            energy,
            timings,
        })
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync, parallel: bool) -> Vec<T> {
    use rayon::prelude::*;
    if parallel {
        (0..n).into_par_iter().map(&f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T>(n: usize, f: impl Fn(usize) -> T, _parallel: bool) -> Vec<T> {
    (0..n).map(f).collect()
}
