use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tdgauge::config::{preset, RunConfig};
use tdgauge::fock::Fixtures;
use tdgauge::run::{run_groundstate, run_oracle_compare, run_simulate, run_sweep};
use tdgauge::Error;

#[derive(Parser)]
#[command(
    name = "tdgauge",
    version,
    about = "Gauge-dependent light-matter dynamics with time-dependent coupling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of photon numbers, correlations and energies.
    Simulate(Common),
    /// Final-time quantities over a grid of gauges.
    Sweep(Common),
    /// Closed-form ground-state curves.
    Groundstate(Common),
    /// Compare against the truncated-Fock reference.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Merge converged oracle values into this fixtures file.
        #[arg(long, value_name = "PATH")]
        write_fixtures: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset: fig2, fig3, fig4, fig5, fig6, supp-fig7, supp-fig8.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for independent jobs.
    #[arg(long, value_name = "N", default_value_t = 1)]
    parallel: usize,
    /// Integrator tolerance.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        (None, Some(name)) => preset(name)?,
        _ => {
            return Err(Error::Config(
                "give exactly one of --config or --preset".into(),
            ))
        }
    };
    if let Some(tol) = common.tol {
        cfg.tol = tol;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.display().to_string());
    }
    if common.parallel == 0 {
        return Err(Error::Config("--parallel must be >= 1".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Error> {
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {path}: {e}")))
        }
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::Io(e.to_string()))
                }
                _ => Ok(()),
            }
        }
    }
}

fn merge_fixtures(path: &Path, new: Fixtures) -> Result<(), Error> {
    let mut all = if path.exists() {
        Fixtures::read(path)?
    } else {
        Fixtures::new()
    };
    all.entries.extend(new.entries);
    all.write(path)
}

fn run(cli: Cli) -> Result<(), Error> {
    let common = match &cli.command {
        Command::Simulate(c) | Command::Sweep(c) | Command::Groundstate(c) => c,
        Command::OracleCompare { common, .. } => common,
    };
    let cfg = load(common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.parallel)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate(_) => emit(&cfg, &run_simulate(&cfg)?.to_csv()),
        Command::Sweep(_) => emit(&cfg, &run_sweep(&cfg)?.to_csv()),
        Command::Groundstate(_) => emit(&cfg, &run_groundstate(&cfg)?.to_csv()),
        Command::OracleCompare {
            json,
            write_fixtures,
            ..
        } => {
            let report = run_oracle_compare(&cfg)?;
            emit(
                &cfg,
                &if *json {
                    report.to_json() + "\n"
                } else {
                    report.to_text()
                },
            )?;
            if let Some(path) = write_fixtures {
                merge_fixtures(path, report.fixtures())?;
            }
            if report.passed {
                Ok(())
            } else {
                let failed = report.entries.iter().filter(|e| !e.passed).count();
                Err(Error::OracleMismatch(format!(
                    "{failed} of {} entries",
                    report.entries.len()
                )))
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tdgauge: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
