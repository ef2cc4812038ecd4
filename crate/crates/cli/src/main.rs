use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metrocontrol::experiment::{self, Scenario, ScenarioConfig};
use metrocontrol::Error;

#[derive(Parser)]
#[command(name = "metrocontrol", version, about = "Control-enhanced multiparameter estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario and control; prints a JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of stdout (or the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every control over the `sweep` list; writes CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the check battery; exits 1 if any check fails.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the built-in scenarios with their fields.
    Scenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> metrocontrol::Result<()> {
    let Ok(raw) = std::env::var("METROCONTROL_THREADS") else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(Error::Config(format!("METROCONTROL_THREADS must be a positive integer, got `{raw}`"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size thread pool: {e}")))
}

fn load(path: &Path) -> metrocontrol::Result<Scenario> {
    ScenarioConfig::from_path(path)?.validate()
}

fn dispatch(command: Command) -> metrocontrol::Result<u8> {
    match command {
        Command::Run { config, out } => {
            let s = load(&config)?;
            let report = experiment::run(&s)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            match out.or(s.output) {
                Some(path) => experiment::write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Sweep { config, out } => {
            let s = load(&config)?;
            let path = out
                .or_else(|| s.output.clone())
                .ok_or_else(|| Error::Config("sweep needs --out or an `output` path in the config".into()))?;
            let rows = experiment::sweep(&s)?;
            experiment::write_sweep_csv(&path, &rows, s.model.n_params())?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
            Ok(0)
        }
        Command::Verify { config } => {
            let s = load(&config)?;
            let report = experiment::verify(&s)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            match &report.first_failure {
                Some(name) => {
                    eprintln!("verification failed: {name}");
                    Ok(1)
                }
                None => Ok(0),
            }
        }
        Command::Scenarios => {
            for line in experiment::scenario_listing() {
                println!("{line}");
            }
            println!("custom\t(from config)\tΣ_k amplitude_k·waveform_k(frequency_k·t)·axis_k");
            Ok(0)
        }
    }
}
