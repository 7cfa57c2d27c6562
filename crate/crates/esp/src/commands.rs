//! The `generate`, `eval`, `check` and `bench` commands as library calls.

use std::path::{Path, PathBuf};
use std::time::Instant;

use esp_core::grid::{spread, Space};
use esp_core::{
    build_plan, direct_ewald, relative_force_error, EnergyForces, EwaldPlan, GridData, Overrides,
    ParticleSystem, ReferenceResult, SplitFamily,
};

use crate::generate::{generate_system, GeneratorSpec};
use crate::io;
use crate::report::{BenchReport, FamilyBench, StageStats, Summary};
use crate::CliError;

/// Largest system the oracle accepts.
pub const ORACLE_MAX_PARTICLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemSource,
    pub family: SplitFamily,
    pub eps: f64,
    /// Defaults to an eighth of the shortest box edge.
    pub r_c: Option<f64>,
    pub overrides: Overrides,
    pub out: Option<PathBuf>,
    /// Evaluate every stage single-threaded in particle order.
    pub deterministic: bool,
    pub dump_grids: bool,
    pub dump_kernels: bool,
    pub oracle_tol: f64,
    pub repetitions: usize,
    /// Family the bench compares against (its `N_f` is the numerator of R).
    pub baseline: SplitFamily,
    /// Bench runs the oracle only up to this many particles.
    pub bench_oracle_limit: usize,
}

impl RunConfig {
    pub fn new(system: SystemSource, family: SplitFamily, eps: f64) -> Self {
        Self {
            system,
            family,
            eps,
            r_c: None,
            overrides: Overrides::default(),
            out: None,
            deterministic: false,
            dump_grids: false,
            dump_kernels: false,
            oracle_tol: 1e-9,
            repetitions: 5,
            baseline: SplitFamily::Gaussian,
            bench_oracle_limit: 2000,
        }
    }

    pub fn load_system(&self) -> Result<ParticleSystem, CliError> {
        match &self.system {
            SystemSource::File(path) => io::read_system(path),
            SystemSource::Generated(spec) => generate_system(spec),
        }
    }

    pub fn cutoff(&self, system: &ParticleSystem) -> f64 {
        self.r_c
            .unwrap_or_else(|| system.box_lengths().iter().cloned().fold(f64::INFINITY, f64::min) / 8.0)
    }

    pub fn build_plan(&self, system: &ParticleSystem) -> Result<EwaldPlan, CliError> {
        Ok(build_plan(
            system.box_lengths(),
            self.family,
            self.eps,
            self.cutoff(system),
            &self.overrides,
        )?)
    }
}

pub fn cmd_generate(spec: &GeneratorSpec, path: &Path) -> Result<ParticleSystem, CliError> {
    let system = generate_system(spec)?;
    io::write_system(path, &system)?;
    Ok(system)
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub system: ParticleSystem,
    pub plan: EwaldPlan,
    pub result: EnergyForces,
    pub summary: Summary,
}

fn plan_summary(system: &ParticleSystem, plan: &EwaldPlan, deterministic: bool) -> Summary {
    let mut s = Summary::default();
    s.push("particles", system.len());
    let l = system.box_lengths();
    s.push("box", format!("{:e} {:e} {:e}", l[0], l[1], l[2]));
    s.push_f64("net_charge", system.net_charge());
    s.push_plan("", plan.params(), plan.force_method());
    s.push_f64(
        "average_neighbors",
        plan.average_neighbors(system.len() as f64 / system.volume()),
    );
    s.push("deterministic", deterministic);
    s
}

pub fn cmd_eval(config: &RunConfig) -> Result<EvalOutcome, CliError> {
    let eval = evaluate_loaded(config, config.load_system()?)?;
    if let Some(dir) = &config.out {
        write_eval(config, dir, &eval)?;
    }
    Ok(eval)
}

fn evaluate_loaded(config: &RunConfig, system: ParticleSystem) -> Result<EvalOutcome, CliError> {
    let plan = config.build_plan(&system)?;
    let result = plan.evaluate_with(&system, !config.deterministic)?;
    let mut summary = plan_summary(&system, &plan, config.deterministic);
    summary.push_f64("energy", result.energy);
    Ok(EvalOutcome {
        system,
        plan,
        result,
        summary,
    })
}

fn write_eval(config: &RunConfig, dir: &Path, eval: &EvalOutcome) -> Result<(), CliError> {
    let (plan, result) = (&eval.plan, &eval.result);
    io::write_results(dir, &result.potentials, &result.forces, &eval.summary)?;
    io::write_timings(dir, &result.timings)?;
    if config.dump_kernels {
        let text = format!("{}{}", plan.split().dump(), plan.window().dump());
        io::write_kernel_dump(&dir.join("kernels.txt"), &text)?;
    }
    if config.dump_grids {
        let (charge, potential) = pipeline_grids(plan, &eval.system)?;
        let dims = plan.grid().dims();
        io::write_grid(&dir.join("charge_grid.bin"), dims, &charge.real_parts())?;
        io::write_grid(&dir.join("potential_grid.bin"), dims, &potential.real_parts())?;
    }
    Ok(())
}

/// The spread charge grid and the scaled, back-transformed potential grid.
pub fn pipeline_grids(plan: &EwaldPlan, system: &ParticleSystem) -> Result<(GridData, GridData), CliError> {
    let grid = plan.grid();
    let charge = spread(system, plan.window(), grid);
    let mut fourier = charge.clone().fft_forward(grid.fft())?;
    for (v, p) in fourier.values_mut().iter_mut().zip(grid.influence()) {
        *v *= *p;
    }
    let potential = fourier.fft_inverse(grid.fft())?;
    debug_assert_eq!(potential.space(), Space::Real);
    Ok((charge, potential))
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub eval: EvalOutcome,
    pub reference: ReferenceResult,
    /// `"forces"` or `"energy"`.
    pub metric: &'static str,
    pub delta: f64,
    pub pass: bool,
}

pub fn reference_summary(system: &ParticleSystem, reference: &ReferenceResult, tol: f64) -> Summary {
    let r = &reference.report;
    let mut s = Summary::default();
    s.push("particles", system.len());
    s.push_f64("tolerance", tol);
    s.push_f64("beta", r.beta);
    s.push("real_shells", r.real_shells);
    s.push_f64("real_cutoff", r.real_cutoff);
    s.push("reciprocal_shells", r.reciprocal_shells);
    s.push_f64("reciprocal_cutoff", r.reciprocal_cutoff);
    s.push_f64("residual", r.residual);
    s.push_f64("split_check", r.split_check);
    s.push_f64("energy", reference.energy);
    s
}

/// True when the reference forces are zero up to roundoff, as on a perfect
/// lattice, where the relative force error is undefined.
fn forces_vanish(system: &ParticleSystem, forces: &[[f64; 3]]) -> bool {
    let n = system.len().max(1) as f64;
    let q2 = system.charges().iter().map(|q| q * q).sum::<f64>() / n;
    let spacing = (system.volume() / n).cbrt();
    let scale = q2 / (4.0 * std::f64::consts::PI * spacing * spacing);
    let rms = (forces.iter().flatten().map(|f| f * f).sum::<f64>() / n).sqrt();
    rms <= 1e-9 * scale
}

/// Evaluate, run the oracle and certify the relative error against `eps`.
/// The error is the relative RMS force error, or the relative energy error
/// when the reference forces vanish by symmetry.
pub fn cmd_check(config: &RunConfig) -> Result<CheckOutcome, CliError> {
    let system = config.load_system()?;
    if system.len() > ORACLE_MAX_PARTICLES {
        return Err(CliError::Usage(format!(
            "check needs at most {ORACLE_MAX_PARTICLES} particles, got {}",
            system.len()
        )));
    }
    let reference = direct_ewald(&system, config.oracle_tol)?;
    let mut eval = evaluate_loaded(config, system.clone())?;
    let (metric, delta) = if forces_vanish(&system, &reference.forces) {
        let e = (eval.result.energy - reference.energy).abs() / reference.energy.abs();
        ("energy", e)
    } else {
        (
            "forces",
            relative_force_error(&eval.result.forces, &reference.forces)?,
        )
    };
    let pass = delta <= config.eps;
    eval.summary.push("metric", metric);
    eval.summary.push_f64("delta", delta);
    eval.summary.push_f64("reference_energy", reference.energy);
    eval.summary.push("check", if pass { "PASS" } else { "FAIL" });
    if let Some(dir) = &config.out {
        write_eval(config, dir, &eval)?;
        let summary = reference_summary(&system, &reference, config.oracle_tol);
        io::write_results(
            &dir.join("reference"),
            &reference.potentials,
            &reference.forces,
            &summary,
        )?;
    }
    Ok(CheckOutcome {
        eval,
        reference,
        metric,
        delta,
        pass,
    })
}

fn bench_family(
    config: &RunConfig,
    system: &ParticleSystem,
    family: SplitFamily,
    reference: Option<&ReferenceResult>,
) -> Result<FamilyBench, CliError> {
    let overrides = Overrides {
        force_method: config.overrides.force_method,
        ..Overrides::default()
    };
    let clock = Instant::now();
    let plan = build_plan(
        system.box_lengths(),
        family,
        config.eps,
        config.cutoff(system),
        &overrides,
    )?;
    let plan_seconds = clock.elapsed().as_secs_f64();
    let reps = config.repetitions.max(1);
    let mut samples: Vec<Vec<f64>> = (0..7).map(|_| Vec::with_capacity(reps)).collect();
    let mut delta = None;
    for rep in 0..reps {
        let result = plan.evaluate_with(system, !config.deterministic)?;
        for (i, (_, secs)) in result.timings.entries().iter().enumerate() {
            samples[i].push(*secs);
        }
        samples[6].push(result.timings.total());
        if rep == 0 {
            if let Some(r) = reference {
                delta = Some(relative_force_error(&result.forces, &r.forces)?);
            }
        }
    }
    let names = esp_core::StageTimings::default().entries().map(|(n, _)| n);
    let stages = names
        .iter()
        .chain(&["total"])
        .zip(&samples)
        .map(|(name, s)| StageStats::from_samples(name, s))
        .collect();
    Ok(FamilyBench {
        params: plan.params().clone(),
        force_method: plan.force_method(),
        plan_seconds,
        stages,
        delta,
    })
}

/// Build the baseline and candidate plans at equal `eps` and `r_c` with their
/// default parameters, time repeated evaluations and report the grid ratio.
pub fn cmd_bench(config: &RunConfig) -> Result<BenchReport, CliError> {
    let system = config.load_system()?;
    let reference = if system.len() <= config.bench_oracle_limit {
        Some(direct_ewald(&system, config.oracle_tol)?)
    } else {
        None
    };
    let baseline = bench_family(config, &system, config.baseline, reference.as_ref())?;
    let candidate = bench_family(config, &system, config.family, reference.as_ref())?;
    let report = BenchReport {
        eps: config.eps,
        r_c: config.cutoff(&system),
        box_lengths: system.box_lengths(),
        particles: system.len(),
        repetitions: config.repetitions.max(1),
        baseline,
        candidate,
    };
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join("bench.txt");
        std::fs::write(&path, report.summary().to_string())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(report)
}
