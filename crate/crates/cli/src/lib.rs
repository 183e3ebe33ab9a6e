//! Command-line front end.
//!
//! Results go to stdout (or `--out`); failures go to stderr as a JSON
//! object with a stable `error_kind`. Exit codes: 0 success, 1 domain
//! failure (uncertified count, event limit, failed comparison), 2 usage.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use pigrover::angle::{self, AngleError};
use pigrover::equivalence::{self, CompareLimits, ComparisonReport, EquivalenceError};
use pigrover::export;
use pigrover::grover::{self, GroverError, GroverInstance};
use pigrover::machine::{self, MachineConfig, MachineError, ParseRationalError, TraceMode};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "pigrover",
    version,
    about = "Block-collision π counting and Grover search, side by side"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exact collision simulation.
    Simulate {
        #[command(flatten)]
        masses: Masses,
        #[arg(long, value_enum, default_value_t = TraceArg::Count)]
        trace: TraceArg,
        #[arg(long, default_value_t = machine::DEFAULT_MAX_EVENTS)]
        max_events: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Certified closed-form collision count.
    Count {
        #[command(flatten)]
        masses: Masses,
        #[arg(long, default_value_t = angle::DEFAULT_MAX_PRECISION_BITS)]
        max_bits: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Collision count for mass ratio 100^n.
    Digits {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = angle::DEFAULT_MAX_PRECISION_BITS)]
        max_bits: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// State-vector Grover run with the closed-form probability alongside.
    Grover {
        /// Qubit count. Alternatively derive it from --m1/--m2.
        #[arg(long, required_unless_present = "m2", conflicts_with_all = ["m1", "m2"])]
        n: Option<u32>,
        #[arg(long, requires = "m2")]
        m1: Option<String>,
        #[arg(long)]
        m2: Option<String>,
        #[arg(long, default_value_t = 0)]
        k: u64,
        /// Iterations; defaults to ⌊π/(4θ)⌋.
        #[arg(long)]
        steps: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Compare machine and Grover angle sequences.
    Compare {
        #[arg(
            long,
            required_unless_present = "ratios_file",
            conflicts_with = "ratios_file"
        )]
        m2: Option<String>,
        #[arg(long, default_value = "1")]
        m1: String,
        /// One `m2/m1` ratio per line; emits a JSON array of reports.
        #[arg(long)]
        ratios_file: Option<PathBuf>,
        #[arg(long, default_value_t = machine::DEFAULT_MAX_EVENTS)]
        max_events: u64,
        #[arg(long, default_value_t = angle::DEFAULT_MAX_PRECISION_BITS)]
        max_bits: u32,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
pub struct Masses {
    /// Integer or num/den.
    #[arg(long)]
    pub m1: String,
    #[arg(long)]
    pub m2: String,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceArg {
    Count,
    Full,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    fn usage(kind: &'static str, message: impl ToString) -> Self {
        Self {
            kind,
            message: message.to_string(),
            exit_code: 2,
        }
    }

    fn failure(kind: &'static str, message: impl ToString) -> Self {
        Self {
            kind,
            message: message.to_string(),
            exit_code: 1,
        }
    }
}

impl From<ParseRationalError> for CliError {
    fn from(e: ParseRationalError) -> Self {
        Self::usage("invalid_rational", e)
    }
}

impl From<MachineError> for CliError {
    fn from(e: MachineError) -> Self {
        match e {
            MachineError::NonPositiveMass { .. } | MachineError::NotApproaching(_) => {
                Self::usage("invalid_config", e)
            }
            MachineError::WrongPhase { .. } => Self::failure("contract_violation", e),
            MachineError::EventLimit { .. } => Self::failure("event_limit", e),
        }
    }
}

impl From<AngleError> for CliError {
    fn from(e: AngleError) -> Self {
        match e {
            AngleError::NonPositiveMass => Self::usage("invalid_config", e),
            AngleError::PrecisionTooLow(_) => Self::usage("invalid_precision", e),
            AngleError::Uncertified { .. } => Self::failure("uncertified", e),
            AngleError::CountOverflow => Self::failure("count_overflow", e),
        }
    }
}

impl From<GroverError> for CliError {
    fn from(e: GroverError) -> Self {
        let kind = match e {
            GroverError::RatioBelowOne(_) => "ratio_below_one",
            GroverError::NonPositiveMass => "invalid_config",
            GroverError::NoQubits | GroverError::TooManyQubits { .. } => "invalid_qubits",
            GroverError::IndexOutOfRange { .. } => "index_out_of_range",
            GroverError::BadLength(_) => "invalid_state",
        };
        Self::usage(kind, e)
    }
}

impl From<EquivalenceError> for CliError {
    fn from(e: EquivalenceError) -> Self {
        match e {
            EquivalenceError::Machine(e) => e.into(),
            EquivalenceError::Angle(e) => e.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::failure("io", e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::failure("io", e)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error_kind: &'a str,
    message: &'a str,
}

/// What a command produced, before it is written out.
struct Outcome {
    body: Vec<u8>,
    out: Option<PathBuf>,
    /// Set when the output is valid but the command still failed.
    failure: Option<CliError>,
}

fn json_line<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec(value).expect("serializable");
    v.push(b'\n');
    v
}

fn masses(m1: &str, m2: &str) -> Result<(BigRational, BigRational), CliError> {
    Ok((machine::parse_rational(m1)?, machine::parse_rational(m2)?))
}

#[derive(Serialize)]
struct CountCsvRow<'a> {
    count: Option<u64>,
    certified: bool,
    precision_used: u32,
    mass_ratio: &'a str,
}

#[derive(Serialize)]
struct GroverJson<'a> {
    instance: &'a GroverInstance,
    rows: &'a [grover::ProbabilityRow],
}

fn simulate(
    masses_arg: &Masses,
    trace: TraceArg,
    max_events: u64,
    format: Format,
) -> Result<Vec<u8>, CliError> {
    let (m1, m2) = masses(&masses_arg.m1, &masses_arg.m2)?;
    let cfg = MachineConfig::new(m1, m2)?;
    let mode = match trace {
        TraceArg::Count => TraceMode::CountOnly,
        TraceArg::Full => TraceMode::FullTrace,
    };
    let result = machine::run_machine_with_limit(&cfg, mode, max_events)?;
    let mut body = Vec::new();
    match (trace, format) {
        (TraceArg::Count, Format::Json) => {
            body = json_line(&export::CountSummary::new(&cfg, &result))
        }
        (TraceArg::Count, Format::Csv) => {
            let mut w = csv::Writer::from_writer(&mut body);
            w.serialize(export::CountSummary::new(&cfg, &result))?;
            w.flush()?;
        }
        (TraceArg::Full, Format::Json) => body = json_line(&export::trace_records(&result)),
        (TraceArg::Full, Format::Csv) => {
            export::write_trace_csv(&mut body, &export::trace_records(&result))?
        }
    }
    Ok(body)
}

fn count(masses_arg: &Masses, max_bits: u32, format: Format) -> Result<Outcome, CliError> {
    let (m1, m2) = masses(&masses_arg.m1, &masses_arg.m2)?;
    let result = angle::collision_count_with_ceiling(&m1, &m2, max_bits)?;
    let body = match format {
        Format::Json => json_line(&result),
        Format::Csv => {
            let mut body = Vec::new();
            let ratio = machine::format_rational(&result.mass_ratio);
            let mut w = csv::Writer::from_writer(&mut body);
            w.serialize(CountCsvRow {
                count: result.count,
                certified: result.certified,
                precision_used: result.precision_used,
                mass_ratio: &ratio,
            })?;
            w.flush()?;
            drop(w);
            body
        }
    };
    let failure = (!result.certified).then(|| CliError::from(AngleError::Uncertified { max_bits }));
    Ok(Outcome {
        body,
        out: None,
        failure,
    })
}

fn run_grover(
    n: Option<u32>,
    m1: Option<&str>,
    m2: Option<&str>,
    k: u64,
    steps: Option<u64>,
    format: Format,
) -> Result<Vec<u8>, CliError> {
    let instance = match (n, m2) {
        (Some(n), _) => GroverInstance::new(n, k)?,
        (None, Some(m2)) => {
            let (m1, m2) = masses(m1.unwrap_or("1"), m2)?;
            grover::instance_from_ratio(&m1, &m2)?.with_marked(k)?
        }
        (None, None) => return Err(CliError::usage("usage", "either --n or --m2 is required")),
    };
    let steps = steps.unwrap_or_else(|| instance.optimal_iterations());
    let rows = grover::probability_trace(&instance, steps)?;
    let mut body = Vec::new();
    match format {
        Format::Json => {
            body = json_line(&GroverJson {
                instance: &instance,
                rows: &rows,
            })
        }
        Format::Csv => export::write_probability_csv(&mut body, &rows)?,
    }
    Ok(body)
}

fn compare_one(
    m1: &BigRational,
    m2: &BigRational,
    limits: CompareLimits,
) -> Result<ComparisonReport, CliError> {
    let cfg = MachineConfig::new(m1.clone(), m2.clone())?;
    Ok(equivalence::compare_with_limits(&cfg, limits)?)
}

fn mismatch(report: &ComparisonReport) -> CliError {
    let detail = match &report.failure {
        Some(m) => format!(
            "{:?} at index {} (deviation {:e})",
            m.kind, m.index, m.deviation
        ),
        None => format!(
            "machine count {} vs closed form {:?}",
            report.machine_count, report.closed_form_count
        ),
    };
    CliError::failure(
        "equivalence_mismatch",
        format!(
            "mass ratio {}: {detail}",
            machine::format_rational(&report.mass_ratio)
        ),
    )
}

fn compare(
    m1: &str,
    m2: Option<&str>,
    ratios_file: Option<&PathBuf>,
    limits: CompareLimits,
    format: Format,
) -> Result<Outcome, CliError> {
    let m1 = machine::parse_rational(m1)?;
    let mut body = Vec::new();
    if let Some(path) = ratios_file {
        let reader = BufReader::new(File::open(path)?);
        let mut reports = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ratio = machine::parse_rational(line)?;
            reports.push(compare_one(&m1, &(&m1 * ratio), limits)?);
        }
        let failure = reports.iter().find(|r| !r.passed()).map(mismatch);
        match format {
            Format::Json => body = json_line(&reports),
            Format::Csv => {
                return Err(CliError::usage(
                    "usage",
                    "--ratios-file output is JSON only",
                ));
            }
        }
        return Ok(Outcome {
            body,
            out: None,
            failure,
        });
    }
    let m2 = machine::parse_rational(m2.expect("clap enforces --m2"))?;
    let report = compare_one(&m1, &m2, limits)?;
    match format {
        Format::Json => body = json_line(&report),
        Format::Csv => export::write_angle_csv(&mut body, &export::angle_pairs(&report))?,
    }
    let failure = (!report.passed()).then(|| mismatch(&report));
    Ok(Outcome {
        body,
        out: None,
        failure,
    })
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let ok = |body, out: &Option<PathBuf>| Outcome {
        body,
        out: out.clone(),
        failure: None,
    };
    match &cli.command {
        Command::Simulate {
            masses,
            trace,
            max_events,
            output,
        } => Ok(ok(
            simulate(masses, *trace, *max_events, output.format)?,
            &output.out,
        )),
        Command::Count {
            masses,
            max_bits,
            output,
        } => {
            let mut outcome = count(masses, *max_bits, output.format)?;
            outcome.out = output.out.clone();
            Ok(outcome)
        }
        Command::Digits { n, max_bits, out } => {
            let digits = angle::pi_digits_with_ceiling(*n, *max_bits)?;
            Ok(ok(format!("{digits}\n").into_bytes(), out))
        }
        Command::Grover {
            n,
            m1,
            m2,
            k,
            steps,
            output,
        } => {
            let body = run_grover(*n, m1.as_deref(), m2.as_deref(), *k, *steps, output.format)?;
            Ok(ok(body, &output.out))
        }
        Command::Compare {
            m2,
            m1,
            ratios_file,
            max_events,
            max_bits,
            output,
        } => {
            let limits = CompareLimits {
                max_events: *max_events,
                max_precision_bits: *max_bits,
                ..CompareLimits::default()
            };
            let mut outcome = compare(
                m1,
                m2.as_deref(),
                ratios_file.as_ref(),
                limits,
                output.format,
            )?;
            outcome.out = output.out.clone();
            Ok(outcome)
        }
    }
}

fn report_error(stderr: &mut dyn Write, err: &CliError) -> i32 {
    let line = json_line(&ErrorReport {
        error_kind: err.kind,
        message: &err.message,
    });
    let _ = stderr.write_all(&line);
    err.exit_code
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            return report_error(stderr, &CliError::usage("usage", e.to_string().trim_end()));
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => return report_error(stderr, &e),
    };
    let written = match &outcome.out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(&outcome.body)),
        None => stdout.write_all(&outcome.body),
    };
    if let Err(e) = written {
        return report_error(stderr, &CliError::from(e));
    }
    match outcome.failure {
        Some(f) => report_error(stderr, &f),
        None => 0,
    }
}
