use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use greduce::cases;
use greduce::gen::AlignmentStrategy;
use greduce::reduce::SearchKind;
use greduce::trace::{serialize_trace, TraceTree};
use greduce_cli::{
    campaign_exit_code, emit_report, replay, run_campaign, CampaignConfig, CliError, LabelingFile, ReportFormat,
    SeedSpec,
};

#[derive(Parser)]
#[command(name = "greduce", about = "Reduce generated test inputs by reducing the generator's trace")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce every (case, search, strategy, seed) cell and report.
    Run {
        /// Case names, or `all`.
        #[arg(long = "case", value_delimiter = ',', required = true)]
        cases: Vec<String>,
        #[arg(long = "search", value_delimiter = ',', default_value = "tree")]
        searches: Vec<SearchKind>,
        #[arg(long = "strategy", value_delimiter = ',', default_value = "realign")]
        strategies: Vec<AlignmentStrategy>,
        /// An integer, `fixture`, or `bugs:N` for the first N bug-exhibiting seeds.
        #[arg(long = "seed", value_delimiter = ',', default_value = "fixture")]
        seeds: Vec<SeedSpec>,
        #[arg(long, default_value_t = 0)]
        realign_seed: u64,
        /// Per-cell deadline in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Report file; the report goes to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List the bundled cases.
    ListCases,
    /// Re-execute a trace file, optionally under a labeling file.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        labeling: Option<PathBuf>,
        #[arg(long, default_value = "realign")]
        strategy: AlignmentStrategy,
        #[arg(long, default_value_t = 0)]
        realign_seed: u64,
    },
    /// Record a case's trace as JSON.
    Record {
        #[arg(long = "case")]
        case: String,
        /// An integer or `fixture`.
        #[arg(long, default_value = "fixture")]
        seed: SeedSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_out(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout().write_all(bytes).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run {
            cases,
            searches,
            strategies,
            seeds,
            realign_seed,
            timeout,
            report,
            format,
            jobs,
        } => {
            let timeout = match timeout {
                Some(t) if !(t.is_finite() && t >= 0.0) => {
                    return Err(CliError::Config(format!("bad timeout {t}")));
                }
                t => t.map(Duration::from_secs_f64),
            };
            let config = CampaignConfig {
                cases,
                searches,
                strategies,
                seeds,
                realign_seed,
                timeout,
                jobs,
            };
            let reports = run_campaign(&config)?;
            for r in &reports {
                match &r.error {
                    Some(e) => eprintln!("{} {} {} seed {}: error: {e}", r.case, r.search, r.strategy, r.seed),
                    None => eprintln!(
                        "{} {} {} seed {}: size {} -> {} in {} tests{}: {:?}",
                        r.case,
                        r.search,
                        r.strategy,
                        r.seed,
                        r.size_original,
                        r.size_final,
                        r.property_tests,
                        if r.sound { "" } else { " (UNSOUND)" },
                        r.final_input
                    ),
                }
            }
            write_out(report.as_ref(), &emit_report(&reports, format))?;
            Ok(campaign_exit_code(&reports))
        }
        Command::ListCases => {
            for c in cases::all_cases() {
                let (trace, _) = c
                    .record(c.fixture_seed)
                    .map_err(|e| CliError::Generator(e.to_string()))?;
                let units = TraceTree::build(&trace)?.removable_units().len();
                let note = if c.reducible { "" } else { " [demo]" };
                println!("{:<16} fixture seed {:<8} {:>3} units  {}{note}", c.name, c.fixture_seed, units, c.summary);
            }
            Ok(0)
        }
        Command::Replay {
            trace,
            labeling,
            strategy,
            realign_seed,
        } => {
            let trace_bytes = read(&trace)?;
            let labeling = labeling.map(|p| read(&p).and_then(|b| LabelingFile::parse(&b))).transpose()?;
            let out = replay(&trace_bytes, labeling.as_ref(), strategy, realign_seed)?;
            for e in &out.events {
                eprintln!("event: {e}");
            }
            match out.input {
                Some(text) => write_out(None, text.as_bytes())?,
                None => eprintln!("halted"),
            }
            Ok(0)
        }
        Command::Record { case, seed, out } => {
            let c = cases::find_case(&case).ok_or(CliError::UnknownCase(case))?;
            let seed = match seed {
                SeedSpec::Fixture => c.fixture_seed,
                SeedSpec::Value(v) => v,
                SeedSpec::Bugs(_) => return Err(CliError::Config("record takes a single seed".into())),
            };
            let (trace, _) = c.record(seed).map_err(|e| CliError::Generator(e.to_string()))?;
            write_out(out.as_ref(), &serialize_trace(&trace))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
