use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mflab::harness::{self, Experiment, ExperimentConfig};
use mflab::Error;

/// Desk-scale many-body dynamics experiments.
#[derive(Parser)]
#[command(name = "mflab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-energy scattering solution, scattering length and its rescaling.
    Scatter(RunArgs),
    /// Hartree equation on a periodic grid.
    Hartree(RunArgs),
    /// Gross-Pitaevskii equation on a periodic grid.
    Gp(RunArgs),
    /// Time-dependent Hartree-Fock.
    Hf(RunArgs),
    /// Exact N-boson propagation from a product state.
    Exact(RunArgs),
    /// Exact vs Hartree distance over an N sweep with a log-log fit.
    ConvergeHartree(RunArgs),
    /// Exact fermions vs Hartree-Fock at ε = N^{-1/3} over an N sweep.
    ConvergeHf(RunArgs),
    /// Fock-space norm approximation by the Bogoliubov fluctuation dynamics.
    Fluct(RunArgs),
    /// Thomas-Fermi minimizer.
    Tf(RunArgs),
    /// Commutator growth and exchange smallness under Hartree-Fock.
    Semiclass(RunArgs),
    /// BBGKY consistency of exact dynamics and the collision trace bound.
    Bbgky(RunArgs),
    /// Collects completed runs into report.json and report.gp.
    Report(ReportArgs),
    /// Prints the JSON schema of experiment configurations.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Configuration of kind `report`.
    #[arg(long, required_unless_present = "input")]
    config: Option<PathBuf>,
    /// Run directory, instead of a configuration.
    #[arg(long, conflicts_with = "config")]
    input: Option<PathBuf>,
}

const DEFAULT_OUT: &str = "runs";

fn fail(e: &Error) -> ExitCode {
    eprintln!("mflab: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn run_experiment(name: &str, args: &RunArgs) -> Result<ExitCode, Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment.kind() != name {
        return Err(Error::Config(format!("subcommand {name} given a {} configuration", cfg.experiment.kind())));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let out_dir = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let output = harness::run(&cfg)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    for p in harness::write_run(&out_dir, &cfg, &output)? {
        println!("{}", p.display());
    }
    for (name, fit) in &output.fits {
        println!("fit {name}: exponent {:.4}, prefactor {:.4e}, residual {:.3e}", fit.exponent, fit.prefactor, fit.residual);
    }
    if let Some(r) = &output.refusal {
        eprintln!("mflab: {r}");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_report(args: &ReportArgs) -> Result<ExitCode, Error> {
    let dir = match (&args.input, &args.config) {
        (Some(d), _) => d.clone(),
        (None, Some(c)) => match ExperimentConfig::load(c)?.experiment {
            Experiment::Report(p) => p.input,
            other => return Err(Error::Config(format!("subcommand report given a {} configuration", other.kind()))),
        },
        (None, None) => unreachable!("clap requires one of --config and --input"),
    };
    let files = harness::emit_report(&dir)?;
    println!("{}\n{}", files.summary.display(), files.plot.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Scatter(a) => run_experiment("scatter", a),
        Command::Hartree(a) => run_experiment("hartree", a),
        Command::Gp(a) => run_experiment("gp", a),
        Command::Hf(a) => run_experiment("hf", a),
        Command::Exact(a) => run_experiment("exact", a),
        Command::ConvergeHartree(a) => run_experiment("converge-hartree", a),
        Command::ConvergeHf(a) => run_experiment("converge-hf", a),
        Command::Fluct(a) => run_experiment("fluct", a),
        Command::Tf(a) => run_experiment("tf", a),
        Command::Semiclass(a) => run_experiment("semiclass", a),
        Command::Bbgky(a) => run_experiment("bbgky", a),
        Command::Report(a) => run_report(a),
        Command::Schema => {
            println!("{}", harness::config_schema());
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| fail(&e))
}
