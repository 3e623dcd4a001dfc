//! Command-line front end: detuning sweeps, virtual experiments, estimation
//! from count files and randomized audits.
//!
//! Exit codes: 0 success, 1 usage or validation error (including a failed
//! audit), 2 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use unclab::audit::{indirect_audit, projective_audit, robertson_audit, AuditKind, AuditReport};
use unclab::estimator::{PreparedState, DEFAULT_RESAMPLES};
use unclab::measurement::CELLS;
use unclab::noise_sim::{run_experiment_on_stream, CountingModel, NoiseConfig, DEFAULT_COUNTS_PER_STATE};
use unclab::relation::{
    record_from_counts, sweep, ErrorDisturbanceRecord, EstimationSettings, PhiGrid, SimulationSettings, SweepMode,
};
use unclab::scalar::deg_to_rad;

pub mod format;
pub mod ingest;
pub mod rows;

use rows::{AuditRow, CsvRow, SimulateRow, SweepRow};

pub const DEFAULT_GRID: &str = "0:90:19";
pub const DEFAULT_AUDIT_DRAWS: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "unclab",
    version,
    about = "Error-disturbance uncertainty relations for successive spin measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error, disturbance and the three relations over a detuning grid.
    Sweep(SweepArgs),
    /// Sixteen simulated intensities per detuning.
    Simulate(SimulateArgs),
    /// Error and disturbance from a count file in the `simulate` layout.
    Estimate(EstimateArgs),
    /// Randomized checks of the relations.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "UNCLAB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Counts per prepared state.
    #[arg(long, default_value_t = DEFAULT_COUNTS_PER_STATE)]
    pub counts: u64,
    /// Analyzer contrast in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub contrast: f64,
    /// Coherent angle offset of detuning and preparation, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub misalign_deg: f64,
    /// Independent Poisson cells instead of a fixed total per state.
    #[arg(long)]
    pub poisson: bool,
    #[command(flatten)]
    pub seed: SeedArg,
}

impl NoiseArgs {
    fn config(&self) -> NoiseConfig {
        NoiseConfig {
            counts_per_state: self.counts,
            contrast: self.contrast,
            misalign_deg: self.misalign_deg,
            seed: self.seed.seed,
            counting: if self.poisson {
                CountingModel::Poisson
            } else {
                CountingModel::Multinomial
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// START:STOP:COUNT in degrees, endpoints included.
    #[arg(long, default_value = DEFAULT_GRID)]
    pub phi: String,
    /// Exact values only, no simulation.
    #[arg(long)]
    pub analytic: bool,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Bootstrap resamples per detuning.
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    pub bootstrap: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// START:STOP:COUNT in degrees, endpoints included.
    #[arg(long, default_value = DEFAULT_GRID)]
    pub phi: String,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV with columns phi_deg,prepared_state,m1,m2,count,normalized_intensity,true_probability.
    pub input: PathBuf,
    /// Bootstrap resamples per detuning (needs whole-number counts).
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    pub bootstrap: usize,
    /// Angle for the systematic term, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub misalign_deg: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Projective draws; the indirect-model and Robertson audits use a tenth
    /// of this, rounded up.
    #[arg(long, default_value_t = DEFAULT_AUDIT_DRAWS)]
    pub draws: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("audit failed: {0}")]
    AuditFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::AuditFailed(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<unclab::Error> for CliError {
    fn from(e: unclab::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn io_error(path: Option<&Path>, e: io::Error) -> CliError {
    match path {
        Some(p) => CliError::Io(format!("{}: {e}", p.display())),
        None => CliError::Io(e.to_string()),
    }
}

/// Parses `args` (program name first) and runs the command. Data goes to
/// `stdout` unless `--output` is given; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Estimate(a) => cmd_estimate(a, stdout, stderr),
        Command::Audit(a) => cmd_audit(a, stdout, stderr),
    }
}

fn parse_grid(text: &str) -> Result<PhiGrid, CliError> {
    text.parse::<PhiGrid>()
        .map_err(|e| CliError::Invalid(format!("--phi {text}: {e}")))
}

#[derive(Serialize)]
struct Document<'a, C: Serialize, R: Serialize> {
    config: C,
    records: &'a [R],
}

fn emit<C: Serialize, R: CsvRow + Serialize>(
    out: &OutputArgs,
    config: C,
    rows: &[R],
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match &out.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(Some(path), e))?;
            let mut w = BufWriter::new(file);
            write_rows(out.format, config, rows, &mut w).map_err(|e| io_error(Some(path), e))?;
            w.flush().map_err(|e| io_error(Some(path), e))
        }
        None => write_rows(out.format, config, rows, stdout).map_err(|e| io_error(None, e)),
    }
}

fn write_rows<C: Serialize, R: CsvRow + Serialize, W: Write + ?Sized>(
    format: Format,
    config: C,
    rows: &[R],
    w: &mut W,
) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut csv = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            csv.write_record(R::header())?;
            for row in rows {
                csv.write_record(row.fields())?;
            }
            csv.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &Document { config, records: rows })?;
            w.write_all(b"\n")
        }
    }
}

/// Sweep records for the given arguments, in grid order.
pub fn sweep_records(a: &SweepArgs) -> Result<Vec<ErrorDisturbanceRecord>, CliError> {
    let grid = parse_grid(&a.phi)?;
    Ok(sweep(&grid, &sweep_mode(a))?.records)
}

fn sweep_mode(a: &SweepArgs) -> SweepMode {
    if a.analytic {
        SweepMode::Analytic
    } else {
        SweepMode::Simulated(SimulationSettings {
            resamples: a.bootstrap,
            ..SimulationSettings::new(a.noise.config())
        })
    }
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let records = sweep_records(a)?;
    let rows: Vec<SweepRow> = records.iter().map(SweepRow::from).collect();
    #[derive(Serialize)]
    struct Config<'a> {
        command: &'static str,
        phi: &'a str,
        #[serde(flatten)]
        mode: SweepMode,
    }
    let config = Config {
        command: "sweep",
        phi: &a.phi,
        mode: sweep_mode(a),
    };
    emit(&a.out, config, &rows, stdout)
}

/// The sixteen rows of every grid point; detuning `i` uses noise stream `i`,
/// as in a simulated sweep.
pub fn simulate_rows(a: &SimulateArgs) -> Result<Vec<SimulateRow>, CliError> {
    let grid = parse_grid(&a.phi)?;
    let noise = a.noise.config();
    noise.validate()?;
    let mut rows = Vec::with_capacity(16 * grid.len());
    for (i, &deg) in grid.degrees().iter().enumerate() {
        let run = run_experiment_on_stream(deg_to_rad(deg), &noise, i as u64)?;
        for state in PreparedState::ALL {
            let table = run.tables.table(state);
            let total = table.total();
            let truth = run.true_probability(state).cells();
            for (k, (m1, m2)) in CELLS.iter().enumerate() {
                let count = table.cells()[k];
                rows.push(SimulateRow {
                    phi_deg: deg,
                    prepared_state: state.label(),
                    m1: m1.symbol(),
                    m2: m2.symbol(),
                    count: count as u64,
                    normalized_intensity: if total > 0.0 { count / total } else { 0.0 },
                    true_probability: truth[k],
                });
            }
        }
    }
    Ok(rows)
}

fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = simulate_rows(a)?;
    #[derive(Serialize)]
    struct Config<'a> {
        command: &'static str,
        phi: &'a str,
        noise: NoiseConfig,
    }
    let config = Config {
        command: "simulate",
        phi: &a.phi,
        noise: a.noise.config(),
    };
    emit(&a.out, config, &rows, stdout)
}

/// Records for every setting of the input file. Setting `i` (file order)
/// bootstraps on the same stream as grid point `i` of a simulated sweep.
pub fn estimate_records(a: &EstimateArgs, stderr: &mut dyn Write) -> Result<Vec<ErrorDisturbanceRecord>, CliError> {
    let file = File::open(&a.input).map_err(|e| io_error(Some(&a.input), e))?;
    let settings = ingest::read_settings(io::BufReader::new(file))
        .map_err(|e| CliError::Invalid(format!("{}: {e}", a.input.display())))?;
    settings
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let resamples = if s.integer_counts {
                a.bootstrap
            } else {
                if a.bootstrap > 0 {
                    let _ = writeln!(
                        stderr,
                        "warning: phi_deg = {}: counts are not whole numbers, statistical uncertainty set to 0",
                        s.phi_deg
                    );
                }
                0
            };
            let est = EstimationSettings {
                resamples,
                systematic_deg: a.misalign_deg.abs(),
                seed: a.seed.seed,
                ..EstimationSettings::default()
            };
            record_from_counts(s.phi_deg, &s.tables, &est, i).map_err(CliError::from)
        })
        .collect()
}

fn cmd_estimate(a: &EstimateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let records = estimate_records(a, stderr)?;
    let rows: Vec<SweepRow> = records.iter().map(SweepRow::from).collect();
    #[derive(Serialize)]
    struct Config {
        command: &'static str,
        input: String,
        bootstrap: usize,
        systematic_deg: f64,
        seed: u64,
    }
    let config = Config {
        command: "estimate",
        input: a.input.display().to_string(),
        bootstrap: a.bootstrap,
        systematic_deg: a.misalign_deg.abs(),
        seed: a.seed.seed,
    };
    emit(&a.out, config, &rows, stdout)
}

/// Projective, indirect-model and Robertson audit reports.
pub fn audit_reports(draws: usize, seed: u64) -> Result<Vec<AuditReport>, CliError> {
    if draws == 0 {
        return Err(CliError::Invalid("--draws must be at least 1".into()));
    }
    let small = draws.div_ceil(10);
    Ok(vec![
        projective_audit(draws, seed)?,
        indirect_audit(small, seed)?,
        robertson_audit(small, 2, seed)?,
    ])
}

fn cmd_audit(a: &AuditArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let reports = audit_reports(a.draws, a.seed.seed)?;
    let rows: Vec<AuditRow> = reports.iter().map(AuditRow::from).collect();
    #[derive(Serialize)]
    struct Config {
        command: &'static str,
        draws: usize,
        seed: u64,
    }
    emit(
        &a.out,
        Config {
            command: "audit",
            draws: a.draws,
            seed: a.seed.seed,
        },
        &rows,
        stdout,
    )?;
    for r in &reports {
        let heisenberg = match r.kind {
            AuditKind::Robertson => String::new(),
            _ => format!(", {} Heisenberg-type violations", r.heisenberg_violations),
        };
        let _ = writeln!(
            stderr,
            "{}: {} draws, {} violations beyond tolerance{heisenberg}, min slack {:.3e}",
            r.kind.label(),
            r.draws,
            r.violations,
            r.min_slack
        );
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| r.violations > 0)
        .map(|r| r.kind.label())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::AuditFailed(failed.join(", ")))
    }
}
