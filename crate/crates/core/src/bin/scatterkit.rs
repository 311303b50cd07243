use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scatterkit::scenario::{run_scenario, Command, RunOptions, ScenarioConfig};
use scatterkit::wave::{Method, Sign};

#[derive(Parser)]
#[command(name = "scatterkit", version, about = "Desk checks for wave operators and Kato smoothness")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides outputs.dir in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "SCATTERKIT_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Time,
    Weak,
    Stationary,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Subcommand)]
enum Sub {
    /// Eigenvalues and density histogram.
    Spectrum(Common),
    /// Smoothness functionals γ₁…γ₅ for the configured G.
    Smoothness(Common),
    /// λ ↦ ‖P E_H(λ) P‖ diagnostics.
    Acdiag(Common),
    /// One wave operator construction.
    Wave {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "time")]
        method: MethodArg,
        #[arg(long, value_enum, default_value = "plus")]
        sign: SignArg,
    },
    /// Full Kato–Rosenblum report.
    VerifyKr(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, command) = match cli.command {
        Sub::Spectrum(c) => (c, Command::Spectrum),
        Sub::Smoothness(c) => (c, Command::Smoothness),
        Sub::Acdiag(c) => (c, Command::Acdiag),
        Sub::VerifyKr(c) => (c, Command::VerifyKr),
        Sub::Wave { common, method, sign } => {
            let method = match method {
                MethodArg::Time => Method::TimeDependent,
                MethodArg::Weak => Method::Weak,
                MethodArg::Stationary => Method::Stationary,
            };
            let sign = match sign {
                SignArg::Plus => Sign::Plus,
                SignArg::Minus => Sign::Minus,
            };
            (common, Command::Wave { method, sign })
        }
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = ScenarioConfig::load(&common.config)
        .and_then(|cfg| run_scenario(&cfg, command, &RunOptions { out: common.out, seed: common.seed }));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for line in &outcome.failures {
                eprintln!("check failed: {line}");
            }
            println!("{} {}", command.name(), if outcome.passed { "passed" } else { "FAILED" });
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
