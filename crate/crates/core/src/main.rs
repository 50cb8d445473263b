use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swipt_maxmin::harness::acceptance::{run_all_with, AcceptanceConfig};
use swipt_maxmin::harness::{
    format_table, preset_by_name, read_rows, run_experiment, summarize, write_report, ExperimentSpec, Metric,
    RunOptions, INCIDENT_THRESHOLD,
};
use swipt_maxmin::Error;

#[derive(Parser)]
#[command(name = "swipt-maxmin", version, about = "Max-min harvested power simulator for multiuser SWIPT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write its CSV.
    Run {
        /// Experiment spec (TOML).
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        spec: Option<PathBuf>,
        /// Built-in figure preset, F2 to F12.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the realization count.
        #[arg(long)]
        realizations: Option<usize>,
        /// Write golden-section traces next to the CSV.
        #[arg(long)]
        verbose: bool,
        /// Fill the wall_s column.
        #[arg(long)]
        timing: bool,
    },
    /// Aggregate a result CSV.
    Summarize {
        #[arg(long)]
        csv: PathBuf,
        /// P_star, P_H, rho_mean or goa_iters.
        #[arg(long, default_value = "P_star")]
        metric: String,
        /// Comma-separated grouping columns.
        #[arg(long, value_delimiter = ',', default_value = "preset,gamma_db,N,K,L,algorithm")]
        group_by: Vec<String>,
        /// Algorithm to report improvements against.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Run a check suite.
    Check {
        #[arg(long, default_value = "acceptance")]
        suite: String,
        /// A few realizations per criterion.
        #[arg(long)]
        smoke: bool,
    },
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::Io(_) | Error::Csv(_) => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn run(cmd: Command) -> Result<ExitCode, Error> {
    match cmd {
        Command::Run { spec, preset, out, seed, workers, realizations, verbose, timing } => {
            let (mut spec, base_dir) = match (spec, preset) {
                (Some(path), _) => {
                    let base = path.parent().map(PathBuf::from);
                    (ExperimentSpec::load(&path)?, base)
                }
                (None, Some(name)) => (preset_by_name(&name)?, None),
                (None, None) => return Err(Error::Config("either --spec or --preset is required".into())),
            };
            if let Some(r) = realizations {
                spec.realizations = r;
            }
            let opts = RunOptions { seed, workers, timing, verbose, base_dir };
            let report = run_experiment(&spec, &opts)?;
            let path = write_report(&spec, &report, &out)?;
            let feasible = report.rows.iter().filter(|r| r.feasible).count();
            eprintln!(
                "wrote {} rows ({feasible} feasible) to {}; {} of {} realizations infeasible; {} incidents",
                report.rows.len(),
                path.display(),
                report.infeasible_realizations,
                report.realizations_run,
                report.incidents.len()
            );
            if report.exceeds_threshold() {
                eprintln!(
                    "incident rate {:.2}% exceeds {:.0}%",
                    100.0 * report.incident_rate(),
                    100.0 * INCIDENT_THRESHOLD
                );
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Summarize { csv, metric, group_by, baseline } => {
            let metric = Metric::parse(&metric)?;
            let file = std::fs::File::open(&csv).map_err(|e| Error::Config(format!("{}: {e}", csv.display())))?;
            let rows = read_rows(file)?;
            let stats = summarize(&rows, metric, &group_by, baseline.as_deref())?;
            print!("{}", format_table(&group_by, &stats));
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { suite, smoke } => {
            if suite != "acceptance" {
                return Err(Error::Config(format!("unknown suite {suite:?}")));
            }
            let cfg = if smoke { AcceptanceConfig::smoke() } else { AcceptanceConfig::full() };
            let results = run_all_with(&cfg, |c| println!("{}", c.line()));
            let failed = results.iter().filter(|c| !c.passed).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => exit_for(&e),
    }
}
