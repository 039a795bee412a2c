//! Command-line front end: experiments, analytic tables, and the
//! self-check suite, with reproducible seeded output.
//!
//! Every number is printed with an explicit format (fixed 6-decimal
//! probabilities, three-significant-digit survival renderings), so output
//! is locale-independent and byte-stable for a fixed invocation and seed.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::adversary::{AncillaAttackConfig, Strategy};
use crate::analysis::{
    detection_probability, render_survival, run_experiment, run_transcript, success_curve,
    survival_probability, AnalysisError, BitSource, ExperimentConfig, SurvivalQuery,
};
use crate::protocol::DecodeOutcome;
use crate::verify;

pub const EXIT_OK: i32 = 0;
/// A self-check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Stop mode saw an intrusion; the communication stopped.
pub const EXIT_INTRUSION: i32 = 2;
/// Invocation or configuration problem (sysexits EX_USAGE).
pub const EXIT_USAGE: i32 = 64;
/// Output file could not be written (sysexits EX_IOERR).
pub const EXIT_IO: i32 = 74;
/// Invariant violation inside the simulator (sysexits EX_SOFTWARE).
pub const EXIT_INTERNAL: i32 = 70;

/// Seed used when none is given, so bare invocations reproduce.
pub const DEFAULT_SEED: u64 = 7;

const DEFAULT_ROUNDS: u64 = 1000;
const DEFAULT_ANALYTIC_ROUNDS: u64 = 1000;

#[derive(Debug, Error)]
pub enum MessageCodecError {
    #[error("bit count {count} is not a whole number of bytes")]
    PartialByte { count: usize },
    #[error("bits hold 0s and 1s, got {bit}")]
    BadBit { bit: u8 },
    #[error("decoded bytes are not valid UTF-8")]
    NotUtf8,
}

/// UTF-8 bytes of `message`, expanded to bits, most significant bit of
/// each byte first.
pub fn message_to_bits(message: &str) -> Vec<u8> {
    message
        .bytes()
        .flat_map(|byte| (0..8).rev().map(move |shift| (byte >> shift) & 1))
        .collect()
}

/// Inverse of [`message_to_bits`].
pub fn bits_to_message(bits: &[u8]) -> Result<String, MessageCodecError> {
    if !bits.len().is_multiple_of(8) {
        return Err(MessageCodecError::PartialByte { count: bits.len() });
    }
    if let Some(&bit) = bits.iter().find(|&&b| b > 1) {
        return Err(MessageCodecError::BadBit { bit });
    }
    let bytes: Vec<u8> = bits
        .chunks_exact(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, &bit| (acc << 1) | bit))
        .collect();
    String::from_utf8(bytes).map_err(|_| MessageCodecError::NotUtf8)
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Internal(m) => m,
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// Configuration problems are the caller's; violated internal invariants
/// are ours.
fn analysis_error(err: AnalysisError) -> CliError {
    match err {
        AnalysisError::BudgetExceeded { .. }
        | AnalysisError::ZeroRounds
        | AnalysisError::ZeroTrials
        | AnalysisError::EmptyPattern
        | AnalysisError::PatternBit { .. }
        | AnalysisError::TranscriptTrials { .. }
        | AnalysisError::ProbabilityOutOfRange { .. }
        | AnalysisError::EmptyGrid
        | AnalysisError::Adversary(_) => CliError::Usage(err.to_string()),
        AnalysisError::Protocol(_) | AnalysisError::Quantum(_) | AnalysisError::BranchMass { .. } => {
            CliError::Internal(err.to_string())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qsdc",
    version,
    about = "Exact simulator of a two-qubit ping-pong secure communication protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded experiment and emit statistics or a transcript
    Run(RunArgs),
    /// Emit the detection/survival table over a (d, n) grid as CSV
    Sweep(SweepArgs),
    /// Survival numbers for one (rounds, detection probability) query
    Analytic(AnalyticArgs),
    /// Run the embedded exact self-checks and print a pass/fail table
    Verify,
}

const STRATEGY_HELP: &str = "Eavesdropping strategy: \"none\", \
\"ancilla:d=<real>[,chi=orthonormal|overlap:<real>]\", or \
\"intercept_resend[:basis=computational|diagonal]\"";

#[derive(Args)]
#[command(after_help = "Statistics are pretty-printed JSON; transcripts are JSON lines with \
fields round, prepared, alice_bit, eve, measured, decoded. Output is byte-identical for a \
fixed configuration and seed.")]
struct RunArgs {
    /// Defaults file of `key = value` lines; explicit flags win
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, help = STRATEGY_HELP)]
    strategy: Option<String>,
    /// Rounds per trial [default: the message length, or 1000]
    #[arg(long)]
    rounds: Option<u64>,
    /// Independent repetitions, aggregated into one statistics object [default: 1]
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; trial k uses stream k of this seed [default: 7]
    #[arg(long)]
    seed: Option<u64>,
    /// UTF-8 text sent bit by bit, most significant bit of each byte first
    /// (cycled if --rounds exceeds its length)
    #[arg(long)]
    message: Option<String>,
    /// Abandon a trial at its first wrong-family outcome; exit code 2 if
    /// that happens
    #[arg(long)]
    stop_on_intrusion: bool,
    /// Output file [default: stdout]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// "json" for statistics, "jsonl" for the per-round transcript
    /// (requires trials = 1) [default: jsonl with --message, else json]
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
#[command(after_help = "CSV columns: d,n,p_detect,log10_survival. Probabilities and log10 \
values use fixed 6-decimal notation; certain detection prints log10_survival as -inf. \
Grids are comma-separated entries, each a scalar or a start:step:end range.")]
struct SweepArgs {
    /// Defaults file of `key = value` lines; explicit flags win
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Detection parameter grid, e.g. "0,0.25,0.5" or "0:0.05:0.5"
    #[arg(long)]
    d: Option<String>,
    /// Round count grid, e.g. "1,10,1000" or "100:100:1000"
    #[arg(long)]
    n: Option<String>,
    /// Output file [default: stdout]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(after_help = "Prints p_detect and log10_survival in fixed 6-decimal notation \
(log10_survival is -inf when detection is certain) and the survival probability rendered \
to three significant digits, e.g. 9.33e-302.")]
struct AnalyticArgs {
    /// Defaults file of `key = value` lines; explicit flags win
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Number of rounds survived [default: 1000]
    #[arg(long)]
    n: Option<u64>,
    /// Per-round detection probability (exclusive with --d)
    #[arg(long)]
    p: Option<f64>,
    /// Detection parameter of the orthonormal ancilla attack; its exact
    /// per-round detection probability becomes p (exclusive with --p)
    #[arg(long)]
    d: Option<f64>,
}

/// Parses and dispatches one invocation, returning the process exit code.
/// Never panics on bad input; `--help` and `--version` exit 0.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Verify => Ok(cmd_verify()),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}

const KNOWN_KEYS: [&str; 11] = [
    "strategy",
    "rounds",
    "trials",
    "seed",
    "message",
    "stop_on_intrusion",
    "output",
    "format",
    "d",
    "n",
    "p",
];

/// `key = value` lines; `#` comments; values may be double-quoted. Keys
/// are the long flag names (dashes and underscores both accepted).
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig(HashMap::new()));
        };
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!(
                    "config line {}: expected key = value",
                    index + 1
                )));
            };
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(usage(format!(
                    "config line {}: unknown key \"{key}\"",
                    index + 1
                )));
            }
            let mut value = value.trim();
            if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
                value = &value[1..value.len() - 1];
            }
            if map.insert(key.clone(), value.to_owned()).is_some() {
                return Err(usage(format!(
                    "config line {}: duplicate key \"{key}\"",
                    index + 1
                )));
            }
        }
        Ok(FileConfig(map))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: std::str::FromStr,
        T::Err: Display,
    {
        self.get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| usage(format!("config {key} = \"{raw}\": {e}")))
            })
            .transpose()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Jsonl,
}

fn parse_format(raw: &str) -> Result<OutputFormat, CliError> {
    match raw {
        "json" => Ok(OutputFormat::Json),
        "jsonl" => Ok(OutputFormat::Jsonl),
        other => Err(usage(format!("format must be json or jsonl, got \"{other}\""))),
    }
}

fn write_output(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<i32, CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let strategy_spec = args
        .strategy
        .or_else(|| file.get("strategy").map(String::from))
        .unwrap_or_else(|| "none".to_owned());
    let strategy: Strategy = strategy_spec
        .parse()
        .map_err(|e: crate::adversary::AdversaryError| usage(e.to_string()))?;
    let message = args.message.or_else(|| file.get("message").map(String::from));
    let bits = message.as_deref().map(message_to_bits);
    let n_rounds = args
        .rounds
        .map(Ok)
        .or_else(|| file.parsed::<u64>("rounds").transpose())
        .transpose()?
        .or_else(|| bits.as_ref().map(|b| b.len() as u64))
        .unwrap_or(DEFAULT_ROUNDS);
    let trials = args
        .trials
        .map(Ok)
        .or_else(|| file.parsed::<u64>("trials").transpose())
        .transpose()?
        .unwrap_or(1);
    let master_seed = args
        .seed
        .map(Ok)
        .or_else(|| file.parsed::<u64>("seed").transpose())
        .transpose()?
        .unwrap_or(DEFAULT_SEED);
    let stop_on_intrusion =
        args.stop_on_intrusion || file.parsed::<bool>("stop_on_intrusion")?.unwrap_or(false);
    let format = match args.format.as_deref().or_else(|| file.get("format")) {
        Some(raw) => parse_format(raw)?,
        None if message.is_some() => OutputFormat::Jsonl,
        None => OutputFormat::Json,
    };
    let output = args
        .output
        .or_else(|| file.get("output").map(PathBuf::from));

    let cfg = ExperimentConfig {
        n_rounds,
        strategy,
        bit_source: match bits {
            Some(bits) => BitSource::Fixed(bits),
            None => BitSource::Random,
        },
        stop_on_intrusion,
        master_seed,
        trials,
    };

    let (body, intruded) = match format {
        OutputFormat::Json => {
            let stats = run_experiment(&cfg).map_err(analysis_error)?;
            let rendered = serde_json::to_string_pretty(&stats)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            (rendered + "\n", stats.halted_trials > 0)
        }
        OutputFormat::Jsonl => {
            let records = run_transcript(&cfg).map_err(analysis_error)?;
            let mut body = String::new();
            for record in &records {
                body.push_str(
                    &serde_json::to_string(record)
                        .map_err(|e| CliError::Internal(e.to_string()))?,
                );
                body.push('\n');
            }
            let intruded = records
                .iter()
                .any(|r| r.decoded == DecodeOutcome::Intrusion);
            (body, intruded)
        }
    };
    write_output(output.as_deref(), &body)?;
    Ok(if stop_on_intrusion && intruded {
        EXIT_INTRUSION
    } else {
        EXIT_OK
    })
}

fn fmt_log10(value: f64) -> String {
    if value == f64::NEG_INFINITY {
        "-inf".to_owned()
    } else {
        format!("{value:.6}")
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let d_spec = args
        .d
        .or_else(|| file.get("d").map(String::from))
        .ok_or_else(|| usage("sweep needs a --d grid"))?;
    let n_spec = args
        .n
        .or_else(|| file.get("n").map(String::from))
        .ok_or_else(|| usage("sweep needs an --n grid"))?;
    let output = args
        .output
        .or_else(|| file.get("output").map(PathBuf::from));
    let d_grid = parse_f64_grid(&d_spec)?;
    let n_grid = parse_u64_grid(&n_spec)?;
    let rows = success_curve(&d_grid, &n_grid).map_err(analysis_error)?;
    let mut body = String::from("d,n,p_detect,log10_survival\n");
    for row in rows {
        body.push_str(&format!(
            "{},{},{:.6},{}\n",
            row.d,
            row.n,
            row.p_detect,
            fmt_log10(row.log10_survival)
        ));
    }
    write_output(output.as_deref(), &body)?;
    Ok(EXIT_OK)
}

fn cmd_analytic(args: AnalyticArgs) -> Result<i32, CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let n = args
        .n
        .map(Ok)
        .or_else(|| file.parsed::<u64>("n").transpose())
        .transpose()?
        .unwrap_or(DEFAULT_ANALYTIC_ROUNDS);
    let p_flag = args
        .p
        .map(Ok)
        .or_else(|| file.parsed::<f64>("p").transpose())
        .transpose()?;
    let d_flag = args
        .d
        .map(Ok)
        .or_else(|| file.parsed::<f64>("d").transpose())
        .transpose()?;
    let p = match (p_flag, d_flag) {
        (Some(_), Some(_)) => return Err(usage("give either --p or --d, not both")),
        (None, None) => return Err(usage("one of --p or --d is required")),
        (Some(p), None) => p,
        (None, Some(d)) => {
            let cfg = AncillaAttackConfig::orthonormal(d).map_err(|e| usage(e.to_string()))?;
            detection_probability(&Strategy::Ancilla(cfg)).map_err(analysis_error)?
        }
    };
    let log10 = survival_probability(SurvivalQuery { n, p }).map_err(analysis_error)?;
    println!("p_detect = {p:.6}");
    println!("log10_survival = {}", fmt_log10(log10));
    println!("survival = {}", render_survival(log10));
    Ok(EXIT_OK)
}

fn cmd_verify() -> i32 {
    let results = verify::run_all();
    for result in &results {
        let status = if result.passed { "pass" } else { "FAIL" };
        println!("{status}  {:<36}  {}", result.name, result.detail);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} checks passed", results.len());
    if passed == results.len() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn parse_scalar_f64(raw: &str) -> Result<f64, CliError> {
    raw.parse::<f64>()
        .map_err(|_| usage(format!("\"{raw}\" is not a number")))
}

fn parse_scalar_u64(raw: &str) -> Result<u64, CliError> {
    raw.parse::<u64>()
        .map_err(|_| usage(format!("\"{raw}\" is not a non-negative integer")))
}

/// Comma-separated entries; each is a scalar or an inclusive
/// start:step:end range.
fn parse_f64_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let mut grid = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let pieces: Vec<&str> = part.split(':').collect();
        match pieces.as_slice() {
            [scalar] => grid.push(parse_scalar_f64(scalar)?),
            [start, step, end] => {
                let start = parse_scalar_f64(start)?;
                let step = parse_scalar_f64(step)?;
                let end = parse_scalar_f64(end)?;
                if step <= 0.0 || end < start {
                    return Err(usage(format!(
                        "range \"{part}\" needs a positive step and end >= start"
                    )));
                }
                let count = ((end - start) / step + 1e-9).floor() as u64;
                for i in 0..=count {
                    grid.push(start + i as f64 * step);
                }
            }
            _ => {
                return Err(usage(format!(
                    "grid entry \"{part}\" is neither a scalar nor start:step:end"
                )))
            }
        }
    }
    Ok(grid)
}

fn parse_u64_grid(spec: &str) -> Result<Vec<u64>, CliError> {
    let mut grid = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let pieces: Vec<&str> = part.split(':').collect();
        match pieces.as_slice() {
            [scalar] => grid.push(parse_scalar_u64(scalar)?),
            [start, step, end] => {
                let start = parse_scalar_u64(start)?;
                let step = parse_scalar_u64(step)?;
                let end = parse_scalar_u64(end)?;
                if step == 0 || end < start {
                    return Err(usage(format!(
                        "range \"{part}\" needs a positive step and end >= start"
                    )));
                }
                let mut value = start;
                while value <= end {
                    grid.push(value);
                    match value.checked_add(step) {
                        Some(next) => value = next,
                        None => break,
                    }
                }
            }
            _ => {
                return Err(usage(format!(
                    "grid entry \"{part}\" is neither a scalar nor start:step:end"
                )))
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn run_cli(args: &[&str]) -> i32 {
        run(std::iter::once("qsdc").chain(args.iter().copied()))
    }

    #[test]
    fn message_codec_round_trips() {
        let bits = message_to_bits("hi");
        assert_eq!(bits.len(), 16);
        // 'h' = 0x68, most significant bit first
        assert_eq!(&bits[0..8], &[0, 1, 1, 0, 1, 0, 0, 0]);
        assert_eq!(bits_to_message(&bits).unwrap(), "hi");
        assert_eq!(message_to_bits(""), Vec::<u8>::new());
        assert!(matches!(
            bits_to_message(&[0, 1, 1]),
            Err(MessageCodecError::PartialByte { count: 3 })
        ));
        assert!(matches!(
            bits_to_message(&[2; 8]),
            Err(MessageCodecError::BadBit { bit: 2 })
        ));
        assert!(matches!(
            bits_to_message(&message_to_bits("é")[..8]),
            Err(MessageCodecError::NotUtf8)
        ));
    }

    #[test]
    fn grids_parse_scalars_and_ranges() {
        assert_eq!(parse_u64_grid("1,10,1000").unwrap(), vec![1, 10, 1000]);
        assert_eq!(parse_u64_grid("2:2:8").unwrap(), vec![2, 4, 6, 8]);
        let d = parse_f64_grid("0,0.25,0.5").unwrap();
        assert_eq!(d, vec![0.0, 0.25, 0.5]);
        let ramp = parse_f64_grid("0:0.25:0.5").unwrap();
        assert_eq!(ramp.len(), 3);
        assert!((ramp[2] - 0.5).abs() < 1e-12);
        assert!(parse_f64_grid("0:0:1").is_err());
        assert!(parse_u64_grid("5:1:2").is_err());
        assert!(parse_u64_grid("1:2").is_err());
        assert!(parse_f64_grid("abc").is_err());
    }

    #[test]
    fn help_and_version_exit_clean() {
        assert_eq!(run_cli(&["--help"]), EXIT_OK);
        assert_eq!(run_cli(&["--version"]), EXIT_OK);
        assert_eq!(run_cli(&["run", "--help"]), EXIT_OK);
        assert_eq!(run_cli(&["definitely-not-a-subcommand"]), EXIT_USAGE);
        assert_eq!(run_cli(&[]), EXIT_USAGE);
    }

    #[test]
    fn bad_parameters_exit_with_usage() {
        assert_eq!(run_cli(&["run", "--strategy", "sorcery"]), EXIT_USAGE);
        assert_eq!(run_cli(&["run", "--strategy", "ancilla:d=1.5"]), EXIT_USAGE);
        assert_eq!(run_cli(&["run", "--rounds", "0"]), EXIT_USAGE);
        assert_eq!(
            run_cli(&["run", "--rounds", "1000000", "--trials", "1000"]),
            EXIT_USAGE
        );
        assert_eq!(
            run_cli(&["run", "--format", "jsonl", "--trials", "2"]),
            EXIT_USAGE
        );
        assert_eq!(run_cli(&["run", "--format", "yaml"]), EXIT_USAGE);
        assert_eq!(run_cli(&["sweep", "--n", "10"]), EXIT_USAGE);
        assert_eq!(run_cli(&["sweep", "--d", "0.5"]), EXIT_USAGE);
        assert_eq!(run_cli(&["analytic", "--n", "10"]), EXIT_USAGE);
        assert_eq!(
            run_cli(&["analytic", "--p", "0.5", "--d", "0.5"]),
            EXIT_USAGE
        );
        assert_eq!(run_cli(&["analytic", "--p", "1.5"]), EXIT_USAGE);
    }

    #[test]
    fn unwritable_output_exits_with_io_code() {
        assert_eq!(
            run_cli(&[
                "run",
                "--rounds",
                "2",
                "--output",
                "/definitely/not/a/writable/path.json",
            ]),
            EXIT_IO
        );
    }

    #[test]
    fn quiet_message_run_round_trips_through_the_transcript() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("transcript.jsonl");
        let code = run_cli(&[
            "run",
            "--strategy",
            "none",
            "--message",
            "hi",
            "--seed",
            "7",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let body = fs::read_to_string(&path).unwrap();
        let records: Vec<serde_json::Value> = body
            .lines()
            .map(|line| serde_json::from_str(line).unwrap())
            .collect();
        assert_eq!(records.len(), 16);
        let decoded: Vec<u8> = records
            .iter()
            .map(|r| u8::try_from(r["decoded"].as_u64().unwrap()).unwrap())
            .collect();
        assert_eq!(bits_to_message(&decoded).unwrap(), "hi");
        for record in &records {
            assert_eq!(record["eve"]["pre_encoding_action"], "none");
        }
    }

    #[test]
    fn stats_run_emits_pretty_json() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("stats.json");
        let code = run_cli(&[
            "run",
            "--strategy",
            "ancilla:d=0.5",
            "--rounds",
            "400",
            "--seed",
            "3",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let stats: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(stats["rounds_evaluated"], 400);
        assert_eq!(stats["eve_accuracy"], 1.0);
        let histogram = &stats["bell_histogram"];
        let total: u64 = ["psi_plus", "psi_minus", "phi_plus", "phi_minus"]
            .iter()
            .map(|k| histogram[*k].as_u64().unwrap())
            .sum();
        assert_eq!(total, 400);
    }

    #[test]
    fn stop_mode_intrusion_exits_two() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("halted.json");
        let code = run_cli(&[
            "run",
            "--strategy",
            "ancilla:d=0.5",
            "--rounds",
            "64",
            "--stop-on-intrusion",
            "--seed",
            "1",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_INTRUSION);
        let stats: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(stats["halted_trials"], 1);
    }

    #[test]
    fn sweep_emits_the_documented_csv() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        let code = run_cli(&[
            "sweep",
            "--d",
            "0,0.25,0.5",
            "--n",
            "1,10,1000",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let body = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "d,n,p_detect,log10_survival");
        assert_eq!(lines[1], "0,1,0.000000,0.000000");
        assert!(lines[9].starts_with("0.5,1000,0.500000,-301.029"));
    }

    #[test]
    fn config_file_fills_gaps_and_flags_override() {
        let dir = tempdir().unwrap();
        let config_path = dir.path().join("defaults.conf");
        fs::write(
            &config_path,
            "# defaults\nstrategy = ancilla:d=0.5\nrounds = 50\nseed = 9\n",
        )
        .unwrap();
        let from_file = dir.path().join("a.json");
        let code = run_cli(&[
            "run",
            "--config",
            config_path.to_str().unwrap(),
            "--output",
            from_file.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let stats: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&from_file).unwrap()).unwrap();
        assert_eq!(stats["rounds_evaluated"], 50);
        assert_eq!(stats["eve_accuracy"], 1.0);

        let overridden = dir.path().join("b.json");
        let code = run_cli(&[
            "run",
            "--config",
            config_path.to_str().unwrap(),
            "--strategy",
            "none",
            "--rounds",
            "20",
            "--output",
            overridden.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let stats: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&overridden).unwrap()).unwrap();
        assert_eq!(stats["rounds_evaluated"], 20);
        assert_eq!(stats["eve_accuracy"], 0.0);
    }

    #[test]
    fn config_file_rejects_unknown_and_duplicate_keys() {
        let dir = tempdir().unwrap();
        let bad_key = dir.path().join("bad.conf");
        fs::write(&bad_key, "speed = 9\n").unwrap();
        assert_eq!(
            run_cli(&["run", "--config", bad_key.to_str().unwrap()]),
            EXIT_USAGE
        );
        let duplicate = dir.path().join("dup.conf");
        fs::write(&duplicate, "seed = 1\nseed = 2\n").unwrap();
        assert_eq!(
            run_cli(&["run", "--config", duplicate.to_str().unwrap()]),
            EXIT_USAGE
        );
        assert_eq!(run_cli(&["run", "--config", "/no/such/file.conf"]), EXIT_USAGE);
    }

    #[test]
    fn verify_subcommand_passes_cleanly() {
        assert_eq!(run_cli(&["verify"]), EXIT_OK);
    }

    #[test]
    fn analytic_accepts_p_or_d() {
        assert_eq!(run_cli(&["analytic", "--n", "1000", "--p", "0.5"]), EXIT_OK);
        assert_eq!(run_cli(&["analytic", "--n", "1000", "--d", "0.5"]), EXIT_OK);
        assert_eq!(run_cli(&["analytic", "--n", "0", "--p", "0.5"]), EXIT_OK);
    }
}
