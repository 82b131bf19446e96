//! `hessmetric` command-line tool.

mod commands;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use hessmetric::geodesic::DEFAULT_RESOLUTION;
use hessmetric::report::{all_pass, to_csv, to_json, write_atomic, CheckRow};

use commands::Settings;

#[derive(Parser, Debug)]
#[command(name = "hessmetric", version, about = "Energies, envelopes, distances and geodesics of radial m-subharmonic functions")]
struct Cli {
    /// Scenario file (JSON). An absent file means the empty scenario.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for the report and auxiliary tables; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count used when a profile changes coordinate.
    #[arg(long, global = true, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Override every default tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleId {
    IntroNorm,
    TopologyEx1,
    TopologyEx2,
    CapExample,
    GeodesicKinks,
}

impl ExampleId {
    fn name(self) -> &'static str {
        match self {
            ExampleId::IntroNorm => "intro-norm",
            ExampleId::TopologyEx1 => "topology-ex1",
            ExampleId::TopologyEx2 => "topology-ex2",
            ExampleId::CapExample => "cap-example",
            ExampleId::GeodesicKinks => "geodesic-kinks",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted energies and segment concavity.
    Energy,
    /// Distances between profile pairs.
    Metric,
    /// Rooftop envelopes by hull and by continuation.
    Envelope,
    /// Weak geodesics between profile pairs.
    Geodesic,
    /// Capacities of sublevel sets.
    Capacity,
    /// Recompute one of the worked examples.
    Reproduce {
        #[arg(value_enum)]
        id: ExampleId,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Defaults to `n`.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 50)]
        jmax: usize,
    },
    /// Run every property suite and every example.
    Selftest,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    fn render(self, rows: &[CheckRow]) -> Result<String> {
        Ok(match self {
            Format::Csv => to_csv(rows)?,
            Format::Json => to_json(rows)? + "\n",
        })
    }
}

/// Writes `name` inside the output directory, or prints it when there is none.
fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => write_atomic(&dir.join(name), text.as_bytes())?,
        None => print_stdout(text)?,
    }
    Ok(())
}

/// Writes to standard output, treating a closed pipe as success.
fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let scenario = match &cli.scenario {
        Some(path) => scenario::load(path, cli.resolution)?,
        None => scenario::empty()?,
    };
    let settings = Settings { seed: cli.seed, resolution: cli.resolution, tolerance: cli.tolerance };
    let out = cli.out.as_deref();
    let rows = match cli.command {
        Command::Energy => commands::energy(&scenario, &settings)?,
        Command::Metric => commands::metric(&scenario, &settings)?,
        Command::Envelope => commands::envelope(&scenario, &settings)?,
        Command::Capacity => commands::capacity(&scenario, &settings)?,
        Command::Selftest => commands::selftest(&scenario, &settings)?,
        Command::Geodesic => {
            let (rows, traces) = commands::geodesic(&scenario, &settings)?;
            if let Some(dir) = out {
                for (name, csv) in traces {
                    write_atomic(&dir.join(format!("{name}.csv")), csv.as_bytes())?;
                }
            }
            rows
        }
        Command::Reproduce { id, n, m, jmax } => {
            let result = commands::run_reproduction(id.name(), n, m, jmax, &settings)?;
            let table = result.table.to_csv()?;
            match out {
                Some(dir) => write_atomic(&dir.join(format!("{}.table.csv", id.name())), table.as_bytes())?,
                None => print_stdout(&format!("{table}\n"))?,
            }
            result.checks
        }
    };
    emit(out, &format!("report.{}", cli.format.extension()), &cli.format.render(&rows)?)?;
    Ok(all_pass(&rows))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
