//! `cqc` command-line driver.
//!
//! Exit codes: 0 success, 2 counterexample found, 64 usage error or malformed
//! input, 65 input is not a valid state, 73 output failure.

pub mod format;

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cqc_core::bounds::{evaluate, BasisQuadruple};
use cqc_core::harness::{
    run_search, run_werner_sweep, FlagKind, Sample, SearchConfig, SearchMode, SearchSummary,
};
use cqc_core::io::{parse_state, SampleDump};
use cqc_core::measurement::PauliAxis;
use cqc_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_COUNTEREXAMPLE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;
pub const EXIT_IO: u8 = 73;

/// Noise-negative samples beyond this many per run are counted but not dumped.
const NOISE_DUMP_CAP: u64 = 1000;

const SEARCH_BASES: &str = "computational/fourier on both sides";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Output(m) => CliError::Io(m),
            CoreError::ConfigInvalid(_) | CoreError::NonSquareDim(..) | CoreError::Parse(_) => {
                CliError::Usage(e.to_string())
            }
            CoreError::ParamOutOfRange(_) | CoreError::DimensionMismatch(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "cqc",
    version,
    about = "Complementary-quantum correlation bounds and Monte Carlo checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every bound for one state file.
    Bounds(BoundsArgs),
    /// Sweep the asymmetric Werner family over eta at fixed p.
    WernerSweep(WernerArgs),
    /// Perturbed boundary-state scatter (CQC sum against QMI).
    Scatter(ScatterArgs),
    /// Uniform random-state counterexample search.
    Search(SearchArgs),
    /// Pure states against arbitrary (non-unbiased) bases.
    PureCheck(PureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisChoice {
    /// Computational and Fourier bases on both sides.
    CompFourier,
    /// Pauli X and Y on both qubits.
    PauliXy,
    /// Pauli Z and X on both qubits.
    PauliZx,
}

impl BasisChoice {
    fn label(self) -> &'static str {
        match self {
            BasisChoice::CompFourier => "comp-fourier",
            BasisChoice::PauliXy => "pauli-xy",
            BasisChoice::PauliZx => "pauli-zx",
        }
    }

    fn quadruple(self, dim_a: usize, dim_b: usize) -> Result<BasisQuadruple, CliError> {
        let pauli = |q, r| {
            if (dim_a, dim_b) != (2, 2) {
                return Err(CliError::Usage(format!(
                    "--bases {} needs a 2x2 state, got {dim_a}x{dim_b}",
                    self.label()
                )));
            }
            Ok(BasisQuadruple::pauli(q, r)?)
        };
        match self {
            BasisChoice::CompFourier => Ok(BasisQuadruple::computational_fourier(dim_a, dim_b)),
            BasisChoice::PauliXy => pauli(PauliAxis::X, PauliAxis::Y),
            BasisChoice::PauliZx => pauli(PauliAxis::Z, PauliAxis::X),
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// JSON state file with dim_a, dim_b and entries.
    pub state: PathBuf,
    #[arg(long, value_enum, default_value_t = BasisChoice::CompFourier)]
    pub bases: BasisChoice,
    /// Also print the report as a CSV header and row.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct WernerArgs {
    #[arg(long, default_value_t = 0.75)]
    pub p: f64,
    /// Number of eta points on [0, 1].
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A `MxN` dimension pair; a bare `N` is read as `NxN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims(pub usize, pub usize);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
        match s.split_once(['x', 'X']) {
            Some((m, n)) => Ok(Dims(parse(m)?, parse(n)?)),
            // A bare `N` means `NxN`.
            None => parse(s).map(|n| Dims(n, n)),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Comma-separated dimension pairs, e.g. 2x2,3x4.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<Dims>,
    /// Samples per dimension pair (default 1e5 up to 3x3, 1e4 above).
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append the summary block to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// JSON-lines file for flagged samples (negative gaps). Defaults to
    /// `<out>.flagged.jsonl`, created only if something is flagged.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 101)]
    pub lambda_grid: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps_max: f64,
}

#[derive(Debug, Args)]
pub struct PureArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Bounds(a) => cmd_bounds(&a, &mut io::stdout().lock()),
        Command::WernerSweep(a) => cmd_werner_sweep(&a),
        Command::Search(a) => run_experiment(SearchMode::Uniform, &a.run, None),
        Command::Scatter(a) => {
            let extra = (a.lambda_grid, a.eps_min, a.eps_max);
            run_experiment(SearchMode::BoundaryPerturb, &a.run, Some(extra))
        }
        Command::PureCheck(a) => run_experiment(SearchMode::PureStates, &a.run, None),
    }
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut impl Write) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(&args.state)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.state.display())))?;
    let rho = parse_state(&text)?;
    let bases = args.bases.quadruple(rho.dim_a(), rho.dim_b())?;
    let report = evaluate(&rho, &bases)?;
    let stdout_err = |e: io::Error| CliError::Io(format!("stdout: {e}"));
    out.write_all(format::bounds_text(&report, args.bases.label()).as_bytes())
        .map_err(stdout_err)?;
    if args.csv {
        out.write_all(format::bounds_csv(&report).as_bytes())
            .map_err(stdout_err)?;
    }
    Ok(EXIT_OK)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn cmd_werner_sweep(args: &WernerArgs) -> Result<u8, CliError> {
    let rows = run_werner_sweep(args.p, args.grid)?;
    let mut out = open_output(args.out.as_deref())?;
    let label = args.out.as_deref().unwrap_or(Path::new("stdout"));
    out.write_all(format::werner_csv(&rows).as_bytes())
        .map_err(io_err(label))?;
    out.flush().map_err(io_err(label))?;
    Ok(EXIT_OK)
}

/// Lazily-created JSON-lines file for flagged samples.
struct Dumper {
    path: PathBuf,
    file: Option<BufWriter<File>>,
    noise_dumped: u64,
}

impl Dumper {
    fn write(&mut self, sample: &Sample) -> Result<(), CoreError> {
        let Some(flag) = &sample.flagged else {
            return Ok(());
        };
        if flag.kind == FlagKind::NoiseNegative {
            if self.noise_dumped >= NOISE_DUMP_CAP {
                return Ok(());
            }
            self.noise_dumped += 1;
        }
        if self.file.is_none() {
            self.file = Some(BufWriter::new(File::create(&self.path)?));
        }
        let r = &sample.record;
        let dump = SampleDump::new(flag.kind.tag(), r.index, r.gap, &flag.state, &flag.bases);
        let f = self.file.as_mut().expect("opened above");
        writeln!(f, "{}", dump.to_json_line())?;
        Ok(())
    }

    fn finish(self) -> Result<(), CoreError> {
        if let Some(mut f) = self.file {
            f.flush()?;
        }
        Ok(())
    }
}

fn build_config(
    mode: SearchMode,
    run: &RunArgs,
    scatter: Option<(usize, f64, f64)>,
) -> SearchConfig {
    let mut cfg = SearchConfig::new(mode);
    if !run.dims.is_empty() {
        cfg.dims = run.dims.iter().map(|d| (d.0, d.1)).collect();
    }
    cfg.samples_per_dim = run.samples;
    cfg.master_seed = run.seed;
    cfg.workers = run.workers;
    if let Some((grid, lo, hi)) = scatter {
        cfg.lambda_grid = grid;
        cfg.epsilon_range = (lo, hi);
    }
    cfg
}

fn run_experiment(
    mode: SearchMode,
    run: &RunArgs,
    scatter: Option<(usize, f64, f64)>,
) -> Result<u8, CliError> {
    let cfg = build_config(mode, run, scatter);
    cfg.validate()?;

    let mut out = open_output(run.out.as_deref())?;
    let header = match mode {
        SearchMode::BoundaryPerturb => format::SCATTER_HEADER,
        _ => format::SEARCH_HEADER,
    };
    writeln!(out, "{header}").map_err(|e| CliError::Io(e.to_string()))?;

    let dump_path = run.dump.clone().unwrap_or_else(|| match &run.out {
        Some(p) => {
            let mut s = p.clone().into_os_string();
            s.push(".flagged.jsonl");
            PathBuf::from(s)
        }
        None => PathBuf::from("cqc-flagged.jsonl"),
    });
    let mut dumper = Dumper {
        path: dump_path,
        file: None,
        noise_dumped: 0,
    };

    let row: fn(&cqc_core::harness::SampleRecord) -> String = match mode {
        SearchMode::BoundaryPerturb => format::scatter_row,
        _ => format::search_row,
    };
    let summary = run_search(&cfg, |sample| {
        out.write_all(row(&sample.record).as_bytes())?;
        dumper.write(sample)
    })?;
    out.flush().map_err(|e| CliError::Io(e.to_string()))?;
    dumper.finish()?;

    write_summary(&summary, run.report.as_deref())?;
    Ok(if summary.counterexamples() > 0 {
        EXIT_COUNTEREXAMPLE
    } else {
        EXIT_OK
    })
}

fn write_summary(summary: &SearchSummary, report: Option<&Path>) -> Result<(), CliError> {
    let text = format::summary_text(summary, SEARCH_BASES);
    eprint!("{text}");
    if let Some(p) = report {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(p)
            .map_err(io_err(p))?;
        f.write_all(text.as_bytes()).map_err(io_err(p))?;
    }
    Ok(())
}
