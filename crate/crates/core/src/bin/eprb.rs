use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;

use eprb::analyze::{analyze, chsh_block, AnalysisReport};
use eprb::hv::{polytope_membership, MembershipReport};
use eprb::model::ModelConfig;
use eprb::simulate::{scan, simulate, write_scan_csv, Schedule, SimConfig};
use eprb::table::Table;

#[derive(Parser)]
#[command(name = "eprb", version, about = "Contextual analysis and simulation of EPRB experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo run of the local model; writes a runs CSV.
    Simulate {
        /// key=value model config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// fixed:AB, fixed:A'B', ... or random
        #[arg(long, default_value = "random")]
        schedule: String,
        /// Output CSV (stdout if omitted). A `.meta.json` sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Lower/upper probabilities, contextual statistics and CHSH for a runs CSV.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// CHSH values, analytic from the model or estimated from a runs CSV.
    Chsh {
        #[arg(long, conflicts_with = "input")]
        analytic: bool,
        #[arg(long, requires = "analytic")]
        config: Option<PathBuf>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Analytic probability, correlation and CHSH curves on an angle grid.
    Scan {
        #[arg(long, default_value_t = 1.0)]
        step_deg: f64,
        #[arg(long, default_value_t = 0.0)]
        from_deg: f64,
        #[arg(long, default_value_t = 360.0)]
        to_deg: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks whether the contextual tables of a report admit a joint distribution.
    Polytope {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn load_model(path: Option<&Path>) -> anyhow::Result<ModelConfig> {
    match path {
        None => Ok(ModelConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(text.parse()?)
        }
    }
}

fn load_table(path: &Path) -> anyhow::Result<Table> {
    Ok(Table::read_csv(open(path)?)?)
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Simulate { config, runs, seed, schedule, out, threads } => {
            let cfg = SimConfig { model: load_model(config.as_deref())?, runs, seed, schedule: Schedule::parse(&schedule)? };
            let sim = simulate(&cfg, threads)?;
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    sim.table.write_csv(&mut w)?;
                    w.flush()?;
                    let mut meta = create(&sidecar(&path))?;
                    serde_json::to_writer_pretty(&mut meta, &cfg.metadata())?;
                    writeln!(meta)?;
                    meta.flush()?;
                }
                None => sim.table.write_csv(io::stdout().lock())?,
            }
        }
        Cmd::Analyze { input, json } => {
            let report = analyze(&load_table(&input)?)?;
            match json {
                Some(path) => {
                    let mut w = create(&path)?;
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                    w.flush()?;
                }
                None => print_json(&report)?,
            }
        }
        Cmd::Chsh { analytic, config, input } => {
            let block = match (analytic, input) {
                (true, _) => chsh_block(&load_model(config.as_deref())?.correlation_quad())?,
                (false, Some(path)) => match analyze(&load_table(&path)?)?.chsh {
                    Some(b) => b,
                    None => return Err(eprb::Error::NoDataInContext("some joint context has no runs".into()).into()),
                },
                (false, None) => bail!(eprb::Error::validation("chsh needs --analytic or --in FILE")),
            };
            print_json(&block)?;
        }
        Cmd::Scan { step_deg, from_deg, to_deg, config, out } => {
            let rows = scan(&load_model(config.as_deref())?, from_deg, to_deg, step_deg)?;
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    write_scan_csv(&rows, &mut w)?;
                    w.flush()?;
                }
                None => write_scan_csv(&rows, io::stdout().lock())?,
            }
        }
        Cmd::Polytope { input } => {
            let report: AnalysisReport =
                serde_json::from_reader(open(&input)?).map_err(eprb::Error::from)?;
            let membership = polytope_membership(&report.context_tables()?)?;
            print_json(&MembershipReport::from(&membership))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<eprb::Error>() {
                Some(inner) if inner.is_validation() => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
