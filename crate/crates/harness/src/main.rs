use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harness::{
    emit_report, load_report, run_certify, run_norms, run_oscillation, run_probe, run_scenario,
    write_report, HarnessError, ReportRow, ScenarioConfig, ScenarioId,
};

#[derive(Parser)]
#[command(
    name = "bmo-bench",
    about = "Commutator lower bounds and norm checks on grid functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// JSON scenario config.
    #[arg(long)]
    config: PathBuf,
    /// CSV output; defaults to the config's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Norms of the symbol b: Lebesgue, weak, BMO and Lipschitz.
    Norms(Io),
    /// Shift search and pointwise certificate over the dyadic family.
    Certify(Io),
    /// Kernel oscillation sweep and admissibility verdict.
    Oscillation(Io),
    /// Operator-norm probe of the commutator.
    Probe(Io),
    /// Runs a named scenario end to end.
    Scenario {
        #[arg(long)]
        id: String,
        #[command(flatten)]
        io: Io,
    },
    /// Prints the headline and error rows of report files.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn write_rows(rows: &[ReportRow], out: Option<&Path>) -> Result<(), HarnessError> {
    match out {
        Some(path) => emit_report(rows, path),
        None => write_report(rows, std::io::stdout().lock()).map_err(|source| HarnessError::Csv {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

type Runner = fn(&ScenarioConfig) -> Result<Vec<ReportRow>, HarnessError>;

fn run(cli: Cli) -> Result<bool, HarnessError> {
    let (io, runner): (Io, Runner) = match cli.command {
        Command::Norms(io) => (io, run_norms),
        Command::Certify(io) => (io, run_certify),
        Command::Oscillation(io) => (io, run_oscillation),
        Command::Probe(io) => (io, run_probe),
        Command::Scenario { id, io } => {
            let want = ScenarioId::parse(&id)
                .ok_or_else(|| HarnessError::Config(format!("unknown scenario id {id:?}")))?;
            let cfg = ScenarioConfig::load(&io.config)?;
            if cfg.scenario != want {
                return Err(HarnessError::Config(format!(
                    "--id {id} does not match the config's scenario {}",
                    cfg.scenario.as_str()
                )));
            }
            (io, run_scenario)
        }
        Command::Report { inputs } => {
            let mut clean = true;
            for path in inputs {
                for r in load_report(&path)? {
                    if r.is_error() || r.item.ends_with("headline") {
                        println!(
                            "{}\t{}\t{}\t{}\t{}",
                            r.scenario, r.item, r.quantity, r.value, r.notes
                        );
                    }
                    clean &= !r.is_error();
                }
            }
            return Ok(clean);
        }
    };
    let cfg = ScenarioConfig::load(&io.config)?;
    let rows = runner(&cfg)?;
    write_rows(&rows, io.out.as_deref().or(cfg.output.as_deref()))?;
    Ok(!rows.iter().any(ReportRow::is_error))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("bmo-bench: {e}");
            ExitCode::from(1)
        }
    }
}
