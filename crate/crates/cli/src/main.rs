use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evp_cli::commands::{self, batch_certificate_path, run_batch};
use evp_cli::{exit, BackendChoice, CliError, Outcome, Settings};
use evp_core::rational::parse_rational;

#[derive(Parser)]
#[command(name = "evp", version, about = "Scalarize, classify and solve set-valued Ekeland problems on finite data")]
struct Cli {
    /// LP backend: exact (default) or float. Overrides EVP_BACKEND.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Tolerance for the float backend and the bisection oracle.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Bracket limit for the bisection oracle.
    #[arg(long = "t-max", global = true)]
    t_max: Option<String>,
    /// Machine-readable output with sorted keys.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the separation functional at a point.
    Scalarize {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Comma-separated coordinates, e.g. "1,-1/2".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        batch: bool,
    },
    /// Classify the lower boundedness of the "ranges" block.
    Diagnose {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        batch: bool,
    },
    /// Run the descent and write a verified certificate.
    Solve {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output path (single-file mode; batches write <input>.cert.json).
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        batch: bool,
    },
    /// Check a certificate against a problem by enumeration.
    Verify {
        /// PROBLEM CERTIFICATE, or several problems with --batch.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        batch: bool,
    },
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let num = |flag: &str, v: &Option<String>| {
        v.as_deref()
            .map(|s| parse_rational(s).map_err(|e| CliError::input(format!("--{flag}: {e}"))))
            .transpose()
    };
    Ok(Settings {
        backend: cli.backend.as_deref().map(BackendChoice::parse).transpose()?,
        env_backend: std::env::var("EVP_BACKEND").ok(),
        tol: num("tol", &cli.tol)?,
        t_max: num("t-max", &cli.t_max)?,
        json: cli.json,
    })
}

fn single(files: &[PathBuf], batch: bool) -> Result<Option<&PathBuf>, CliError> {
    match (batch, files) {
        (true, _) => Ok(None),
        (false, [f]) => Ok(Some(f)),
        (false, _) => Err(CliError::input("several input files need --batch")),
    }
}

fn run(cli: &Cli) -> Vec<(Option<PathBuf>, Outcome)> {
    let settings = match settings(cli) {
        Ok(s) => s,
        Err(e) => return vec![(None, e.into())],
    };
    let batch = |files: &[PathBuf], job: &(dyn Fn(&std::path::Path) -> Outcome + Sync)| {
        let outcomes = run_batch(files, job);
        files.iter().cloned().map(Some).zip(outcomes).collect()
    };
    match &cli.command {
        Command::Scalarize { files, point, batch: b } => match single(files, *b) {
            Ok(Some(f)) => vec![(None, commands::scalarize(f, point, &settings))],
            Ok(None) => batch(files, &|f| commands::scalarize(f, point, &settings)),
            Err(e) => vec![(None, e.into())],
        },
        Command::Diagnose { files, batch: b } => match single(files, *b) {
            Ok(Some(f)) => vec![(None, commands::diagnose(f, &settings))],
            Ok(None) => batch(files, &|f| commands::diagnose(f, &settings)),
            Err(e) => vec![(None, e.into())],
        },
        Command::Solve { files, certificate, batch: b } => match single(files, *b) {
            Ok(Some(f)) => vec![(None, commands::solve(f, certificate.as_deref(), &settings))],
            Ok(None) if certificate.is_some() => {
                vec![(None, CliError::input("--certificate is per-file; batches write <input>.cert.json").into())]
            }
            Ok(None) => batch(files, &|f| commands::solve(f, Some(&batch_certificate_path(f)), &settings)),
            Err(e) => vec![(None, e.into())],
        },
        Command::Verify { files, batch: b } => {
            if *b {
                batch(files, &|f| commands::verify(f, &batch_certificate_path(f), &settings))
            } else if let [problem, cert] = files.as_slice() {
                vec![(None, commands::verify(problem, cert, &settings))]
            } else {
                vec![(None, CliError::input("verify takes PROBLEM CERTIFICATE").into())]
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let results = run(&cli);
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let mut code = exit::OK;
    for (file, outcome) in &results {
        if let Some(f) = file {
            let _ = writeln!(stdout, "== {} (exit {})", f.display(), outcome.code);
        }
        let _ = stdout.write_all(outcome.stdout.as_bytes());
        let _ = stderr.write_all(outcome.stderr.as_bytes());
        code = code.max(outcome.code);
    }
    ExitCode::from(code as u8)
}
