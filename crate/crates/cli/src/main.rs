use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fuchsnorm_cli::commands::DEFAULT_TOL;
use fuchsnorm_cli::{run, CliError, Command, Document, Settings};
use fuchsnorm_core::linearize::Mode;
use fuchsnorm_core::RESONANCE_TOL;

#[derive(Parser)]
#[command(name = "fuchsnorm", version, about = "Linearization obstructions and normal forms for systems with Fuchsian linear part")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Highest order N_max of the series in w.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Solver tolerance; overrides the document and FUCHSNORM_TOL.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Which conjugacy `verify` checks.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Exact rational arithmetic.
    #[arg(long, global = true)]
    exact: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "FUCHSNORM_TOL", default_value_t = DEFAULT_TOL, hide = true)]
    default_tol: f64,
    /// Threshold of the nonresonance checks.
    #[arg(long, global = true, env = "FUCHSNORM_RESONANCE_TOL", default_value_t = RESONANCE_TOL)]
    resonance_tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Obstruction,
    NormalForm,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the nonresonance assumptions.
    Check { doc: PathBuf },
    /// Dump the polynomial family P_0..P_n and leading coefficients.
    Polys {
        doc: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Correct the document's right-hand side `rhs`.
    Correct {
        doc: PathBuf,
        /// Use the moment route along complex paths.
        #[arg(long)]
        analytic: bool,
    },
    /// Obstruction series and linearizing map.
    Linearize { doc: PathBuf },
    /// Normal form and conjugating map.
    NormalForm { doc: PathBuf },
    /// Check the conjugacy equation order by order.
    Verify {
        doc: PathBuf,
        /// Output of `linearize` or `normal-form` to check instead of recomputing.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (doc_path, command) = match cli.command {
        Cmd::Check { doc } => (doc, Command::Check),
        Cmd::Polys { doc, n } => (doc, Command::Polys { n }),
        Cmd::Correct { doc, analytic } => (doc, Command::Correct { analytic }),
        Cmd::Linearize { doc } => (doc, Command::Linearize),
        Cmd::NormalForm { doc } => (doc, Command::NormalForm),
        Cmd::Verify { doc, tables } => (doc, Command::Verify { tables }),
    };
    let settings = Settings {
        order: cli.order,
        tol: cli.tol,
        default_tol: cli.default_tol,
        resonance_tol: cli.resonance_tol,
        mode: cli.mode.map(|m| match m {
            ModeArg::Obstruction => Mode::Obstruction,
            ModeArg::NormalForm => Mode::NormalForm,
        }),
        exact: cli.exact,
    };
    let doc = Document::load(&doc_path)?;
    let outcome = run(&command, &doc, &settings)?;
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize") + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => std::io::stdout().write_all(text.as_bytes()).expect("stdout is writable"),
    }
    if let Some(failure) = &outcome.failure {
        eprintln!("fuchsnorm: {failure}");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fuchsnorm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
