use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use msfft::bench::{doubling, generate_signal, run_sweep, write_csv, SweepSpec, SweepVariable};
use msfft::oracle::compare;
use msfft::recovery::recover_timed;
use msfft::{NoiseKind, RecoveryConfig, SparseSpectrum};

/// Sparse Fourier recovery in high dimensions: signal generation, recovery
/// runs and parameter sweeps.
#[derive(Parser, Debug)]
#[command(name = "msfft", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random s-sparse signal in the signal-spec text format.
    Generate(GenerateArgs),
    /// Recover the modes of a signal file from noisy samples.
    Recover(RecoverArgs),
    /// Run seeded trials across a range of sparsities or noise levels and write CSV.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 20)]
    n: u64,
    #[arg(long, default_value_t = 100)]
    d: usize,
    /// Checked to divide d when given.
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    sparsity: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AlgorithmArgs {
    #[arg(long, default_value_t = 5)]
    d1: usize,
    #[arg(long, default_value_t = 2.5)]
    beta: f64,
    #[arg(long, default_value_t = 2.0)]
    c1: f64,
    #[arg(long = "c-sigma", default_value_t = 6.0)]
    c_sigma: f64,
    #[arg(long, default_value_t = 0.25)]
    eta: f64,
    /// Lower bound on the coefficient magnitudes.
    #[arg(long = "a-min", default_value_t = 1.0)]
    a_min: f64,
    #[arg(long = "noise-kind", default_value = "complex")]
    noise_kind: NoiseKind,
    /// Outer iteration budget; 10 d/d1 when omitted.
    #[arg(long = "max-outer")]
    max_outer: Option<usize>,
}

impl AlgorithmArgs {
    fn apply(&self, mut config: RecoveryConfig) -> RecoveryConfig {
        config.beta = self.beta;
        config.c1 = self.c1;
        config.c_sigma = self.c_sigma;
        config.eta = self.eta;
        config.a_min = self.a_min;
        config.max_outer_iterations = self.max_outer;
        config
    }
}

#[derive(Args, Debug)]
struct RecoverArgs {
    /// Signal-spec file holding the ground truth.
    signal: PathBuf,
    /// Must match the file header when given.
    #[arg(long)]
    n: Option<u64>,
    /// Must match the file header when given.
    #[arg(long)]
    d: Option<usize>,
    /// Sparsity budget; the number of modes in the file when omitted.
    #[arg(long)]
    sparsity: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    algorithm: AlgorithmArgs,
    /// Recovered modes in signal-spec format; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    variable: SweepVariable,
    /// Comma-separated values; a doubling ladder when omitted
    /// (0.001..0.512 for sigma, 1..1024 for sparsity).
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    n: u64,
    #[arg(long, default_value_t = 100)]
    d: usize,
    /// Fixed sparsity for a sigma sweep.
    #[arg(long, default_value_t = 256)]
    sparsity: usize,
    /// Fixed noise level for a sparsity sweep.
    #[arg(long, default_value_t = 0.512)]
    sigma: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Trial t uses seed + t for the signal.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    algorithm: AlgorithmArgs,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode> {
    if let Some(d1) = args.d1 {
        if d1 == 0 || args.d % d1 != 0 {
            bail!("--d1 {d1} must divide --d {}", args.d);
        }
    }
    let signal = generate_signal(args.n, args.d, args.sparsity, args.seed)?;
    let mut out = open_out(args.out.as_deref())?;
    signal.write_text(&mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_recover(args: &RecoverArgs) -> Result<ExitCode> {
    let file = File::open(&args.signal).with_context(|| format!("cannot open {}", args.signal.display()))?;
    let truth = SparseSpectrum::read_text(BufReader::new(file))
        .with_context(|| format!("cannot parse {}", args.signal.display()))?;
    if args.n.is_some_and(|n| n != truth.bandwidth()) || args.d.is_some_and(|d| d != truth.dim()) {
        bail!("--n/--d disagree with the header of {}", args.signal.display());
    }
    let s = args.sparsity.unwrap_or(truth.len()).max(1);
    let config = args
        .algorithm
        .apply(RecoveryConfig::new(truth.bandwidth(), truth.dim(), args.algorithm.d1, s))
        .with_sigma(args.sigma)
        .with_seed(args.seed);
    let noise = config.noise_model(args.algorithm.noise_kind)?;
    let (result, timings) = recover_timed(&config, &truth, &noise)?;

    let mut out = open_out(args.out.as_deref())?;
    result.modes.write_text(&mut out)?;
    out.flush()?;
    drop(out);

    let report = compare(&truth, &result.modes);
    println!(
        "l1_error={} exact_rate={} samples={} runtime_ms={:.3} sample_ms={:.3} converged={}",
        report.l1_coeff_error,
        report.exact_freq_rate,
        result.samples_used,
        timings.runtime().as_secs_f64() * 1e3,
        timings.sampling.as_secs_f64() * 1e3,
        result.converged
    );
    Ok(if result.converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode> {
    let values = if !args.values.is_empty() {
        args.values.clone()
    } else {
        match args.variable {
            SweepVariable::Sigma => doubling(0.001, 0.512),
            SweepVariable::Sparsity => doubling(1.0, 1024.0),
        }
    };
    let fixed = args
        .algorithm
        .apply(RecoveryConfig::new(args.n, args.d, args.algorithm.d1, args.sparsity))
        .with_sigma(args.sigma);
    let spec = SweepSpec {
        variable: args.variable,
        values,
        fixed,
        trials: args.trials,
        noise_kind: args.algorithm.noise_kind,
        base_seed: args.seed,
    };
    let rows = run_sweep(&spec)?;
    let out = open_out(args.out.as_deref())?;
    write_csv(&rows, out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let run = match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
