mod commands;
mod config;
mod outcome;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_band, parse_grid, parse_line, ExperimentConfig, GridSpec, LineSpec};
use outcome::CliError;

#[derive(Parser)]
#[command(name = "flagcalc", version, about = "Flag multipliers on the Heisenberg group: identities, estimates, inversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Check the group, representation, transform and calculus identities.
    Identities,
    /// Flag-multiplier estimates of a kernel and Sym0 seminorms of its fiber symbols.
    Estimates,
    /// Invert a kernel fiber by fiber and verify the inverse.
    Invert,
    /// Write the kernel catalog and summarize results already in the output directory.
    Report,
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Catalog kernel name, or `expr:<formula>`.
    #[arg(long, global = true)]
    kernel: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Group grid `V_COUNT:V_HALF,T_COUNT:T_HALF`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    /// Fiber position grid `COUNT:HALF`.
    #[arg(long, global = true, value_parser = parse_line)]
    line: Option<LineSpec>,
    /// `LO,HI`: fibers at `±λ` for `LO <= λ <= HI`.
    #[arg(long, global = true, value_parser = parse_band)]
    lambda_band: Option<[f64; 2]>,
    #[arg(long, global = true)]
    sigma_floor: Option<f64>,
    /// Reject non-self-adjoint fibers instead of using the Gramian route.
    #[arg(long, global = true)]
    strict_symmetric: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        set!(kernel, eps, n, grid, lambda_band, sigma_floor, seed, out);
        if let Some(l) = self.line {
            c.line = Some(l);
        }
        c.strict_symmetric |= self.strict_symmetric;
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.common.config()?;
    if let Some(j) = cli.common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {j} worker threads: {e}")))?;
    }
    let out = match cli.command {
        Command::Identities => commands::identities(&cfg)?,
        Command::Estimates => commands::estimates(&cfg)?,
        Command::Invert => commands::invert(&cfg)?,
        Command::Report => commands::report(&cfg)?,
    };
    out.artifacts.write_all(&cfg.out)?;
    for l in &out.lines {
        println!("{l}");
    }
    out.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flagcalc: {}", e.message());
            e.code()
        }
    }
}
