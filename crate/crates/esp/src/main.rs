use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use esp::commands::{cmd_bench, cmd_check, cmd_eval, cmd_generate, RunConfig, SystemSource};
use esp::generate::{GeneratorKind, GeneratorSpec};
use esp::CliError;
use esp_core::{ForceMethod, Overrides, SplitFamily};

#[derive(Parser)]
#[command(
    name = "esp",
    version,
    about = "Periodic Coulomb sums with prolate Ewald splitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated particle file.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        /// Output particle file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate potentials, forces and energy.
    Eval(RunArgs),
    /// Evaluate and certify the force error against the direct Ewald oracle.
    Check(RunArgs),
    /// Compare grid sizes and stage timings of two kernel families.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        /// Family whose grid forms the numerator of the ratio R.
        #[arg(long, value_enum, default_value = "gaussian")]
        baseline: Family,
        /// Timed evaluations per family.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Run the oracle for the bench only up to this many particles.
        #[arg(long, default_value_t = 2000)]
        oracle_limit: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Pswf,
    Gaussian,
}

impl From<Family> for SplitFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Pswf => SplitFamily::Pswf,
            Family::Gaussian => SplitFamily::Gaussian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ad,
    Ik,
}

#[derive(Args)]
struct GenArgs {
    /// Generator: random, rocksalt or water.
    #[arg(long, default_value = "random")]
    kind: String,
    /// Number of particles (sites).
    #[arg(long, short = 'n', default_value_t = 512)]
    n: usize,
    /// Box edge `L` or `Lx,Ly,Lz`.
    #[arg(long = "box", default_value = "10")]
    box_lengths: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    /// Particle file; when absent a system is generated.
    #[arg(long, short = 'i')]
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    #[arg(long, value_enum, default_value = "pswf")]
    family: Family,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// Cutoff radius (default: shortest box edge / 8).
    #[arg(long)]
    rc: Option<f64>,
    /// Pin the grid size: `n` or `nx,ny,nz`.
    #[arg(long)]
    nf: Option<String>,
    /// Pin the window order P.
    #[arg(long)]
    order: Option<usize>,
    /// Pin the PSWF window bandwidth.
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long, value_enum, default_value = "ad")]
    force_method: Method,
    /// Skip the truncation and aliasing gates on the grid.
    #[arg(long)]
    unchecked: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Single-threaded, fixed-order evaluation.
    #[arg(long)]
    deterministic: bool,
    /// Output directory for result files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_grids: bool,
    #[arg(long)]
    dump_kernels: bool,
    /// Oracle tolerance.
    #[arg(long, default_value_t = 1e-9)]
    oracle_tol: f64,
}

fn parse_triple<T: std::str::FromStr + Copy>(s: &str, what: &str) -> Result<[T; 3], CliError> {
    let bad = || CliError::Usage(format!("cannot parse {what} `{s}`"));
    let v: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a] => Ok([*a; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(bad()),
    }
}

fn generator(args: &GenArgs) -> Result<GeneratorSpec, CliError> {
    Ok(GeneratorSpec {
        kind: args.kind.parse::<GeneratorKind>()?,
        n: args.n,
        box_lengths: parse_triple(&args.box_lengths, "box")?,
        seed: args.seed,
    })
}

fn run_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let system = match &args.input {
        Some(path) => SystemSource::File(path.clone()),
        None => SystemSource::Generated(generator(&args.gen)?),
    };
    let mut config = RunConfig::new(system, args.family.into(), args.eps);
    config.r_c = args.rc;
    config.overrides = Overrides {
        n_f: args
            .nf
            .as_deref()
            .map(|s| parse_triple(s, "grid size"))
            .transpose()?,
        order: args.order,
        c1: args.c1,
        force_method: match args.force_method {
            Method::Ad => ForceMethod::Ad,
            Method::Ik => ForceMethod::Ik,
        },
        unchecked: args.unchecked,
    };
    config.out = args.out.clone();
    config.deterministic = args.deterministic;
    config.dump_grids = args.dump_grids;
    config.dump_kernels = args.dump_kernels;
    config.oracle_tol = args.oracle_tol;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Generate { gen, out } => {
            let system = cmd_generate(&generator(&gen)?, &out)?;
            println!("wrote {} particles to {}", system.len(), out.display());
            Ok(true)
        }
        Command::Eval(args) => {
            let outcome = cmd_eval(&run_config(&args)?)?;
            print!("{}", outcome.summary);
            Ok(true)
        }
        Command::Check(args) => {
            let outcome = cmd_check(&run_config(&args)?)?;
            print!("{}", outcome.eval.summary);
            Ok(outcome.pass)
        }
        Command::Bench {
            run,
            baseline,
            reps,
            oracle_limit,
        } => {
            let mut config = run_config(&run)?;
            config.baseline = baseline.into();
            config.repetitions = reps.max(5);
            config.bench_oracle_limit = oracle_limit;
            let report = cmd_bench(&config)?;
            print!("{}", report.table());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("esp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
