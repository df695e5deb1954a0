use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use jetvar_cli::error::CliError;
use jetvar_cli::parser::parse_problem;
use jetvar_cli::report::Format;
use jetvar_cli::run::{execute, Command, Options};
use jetvar_core::varcalc::Gauge;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    /// Euler-Lagrange source of the lagrangian
    El,
    /// Obstruction tensor and variationality verdict of the source
    Helmholtz,
    /// Momentum of the decomposition, from alpha or the lagrangian
    Momentum,
    /// Minimal-order lagrangian reproducing the source
    Inverse,
    /// Null-density verdict and primitive of the lagrangian
    Trivial,
    /// Structural identities on everything the file supplies
    Check,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Latex,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GaugeArg {
    /// First-order momenta only
    Natural,
    /// Symmetrized second-order representative
    Quasisym,
    /// Order-peeling gauge, defined at every order
    Lex,
}

/// Exact variational calculus on jet bundles.
#[derive(Parser)]
#[command(name = "jetvar", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,
    /// Report rendering
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Decomposition gauge for momentum extraction
    #[arg(long, value_enum, default_value_t = GaugeArg::Lex)]
    gauge: GaugeArg,
    /// Bound on the minimality search; defaults to 2*order(E) + 1
    #[arg(long)]
    order_cap: Option<u32>,
    /// Problem file (UTF-8)
    file: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&cli.file).map_err(|e| CliError::Io {
        message: format!("cannot read {}: {e}", cli.file.display()),
    })?;
    let problem = parse_problem(&text)?;
    let command = match cli.command {
        CommandArg::El => Command::El,
        CommandArg::Helmholtz => Command::Helmholtz,
        CommandArg::Momentum => Command::Momentum,
        CommandArg::Inverse => Command::Inverse,
        CommandArg::Trivial => Command::Trivial,
        CommandArg::Check => Command::Check,
    };
    let options = Options {
        gauge: match cli.gauge {
            GaugeArg::Natural => Gauge::Natural,
            GaugeArg::Quasisym => Gauge::Quasisymmetric,
            GaugeArg::Lex => Gauge::LexPeel,
        },
        order_cap: cli.order_cap,
    };
    let report = execute(command, &problem, &options)?;
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
        FormatArg::Latex => Format::Latex,
    };
    println!("{}", report.render(format));
    if report.failed_checks() {
        eprintln!("error: invariant checks failed");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}
