//! `squant`: command-line front end for the exact quantization toolkit.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use squant_core::format::parse_parity;
use squant_core::quantization::AnsatzShape;
use squant_core::rational::parse_rational;
use squant_core::{BasisName, Error, Parity, Rational};

pub const EXIT_RESONANT: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;
pub const EXIT_SINGULARITY: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "squant",
    version,
    about = "Exact osp(2|2)-equivariant quantization on S^{1|2}"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(
        long,
        global = true,
        value_enum,
        default_value = "json",
        env = "SQUANT_FORMAT"
    )]
    pub format: Format,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Latex,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symbol JSON to operator JSON.
    Quantize(QuantizeArgs),
    /// Operator JSON to its graded symbol tuple.
    Symbol(SymbolArgs),
    /// Act with a contact Hamiltonian on a density, an operator or a symbol.
    Act(ActArgs),
    /// Verify equivariance of the quantization map under a generator set.
    CheckEquivariance(CheckArgs),
    /// Solve the coefficient table and diff it against the closed formula.
    SolveCoeffs(SolveArgs),
    /// Dump the divergence terms of a grade.
    Div(DivArgs),
    /// Compare the printed recurrences with the derived equivariance system.
    Recurrences(RecurrenceArgs),
    /// Solver verdicts for every 2(mu - lambda) in 0..=2*k2.
    Resonance(ResonanceArgs),
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parity(s: &str) -> Result<Parity, String> {
    parse_parity(s).map_err(|e| e.to_string())
}

fn basis(s: &str) -> Result<BasisName, String> {
    BasisName::parse(s).map_err(|e| e.to_string())
}

fn shape(s: &str) -> Result<AnsatzShape, String> {
    AnsatzShape::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct Weights {
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub lambda: Rational,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub mu: Rational,
}

#[derive(Debug, Clone, Args)]
pub struct Grade {
    #[arg(long)]
    pub k2: u32,
    #[command(flatten)]
    pub weights: Weights,
    #[arg(long, value_parser = parity, default_value = "even")]
    pub parity: Parity,
}

/// How coefficient tables are solved.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Generators imposed when solving for the coefficients.
    #[arg(long, value_parser = basis, default_value = "x2", env = "SQUANT_GENERATORS")]
    pub generators: BasisName,
    #[arg(long, value_parser = shape, default_value = "reduced", env = "SQUANT_SHAPE")]
    pub shape: AnsatzShape,
    /// Probe degree bound; defaults to 2*k2 + 4 for solving.
    #[arg(long, env = "SQUANT_PROBE_DEGREE")]
    pub degree: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Oracle,
    Closed,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    /// Symbol JSON file, `-` for stdin. Without it the symbol is built from the flags.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "oracle")]
    pub method: Method,
    #[arg(long, allow_hyphen_values = true, requires = "k2")]
    pub f1: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "k2")]
    pub f2: Option<String>,
    #[arg(long)]
    pub k2: Option<u32>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub lambda: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub mu: Option<Rational>,
    /// Needed only when both components are zero.
    #[arg(long, value_parser = parity)]
    pub parity: Option<Parity>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SymbolArgs {
    /// Operator JSON file, `-` for stdin.
    pub input: PathBuf,
    /// Only the principal symbol instead of the full graded tuple.
    #[arg(long)]
    pub principal: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ActArgs {
    /// Contact Hamiltonian, e.g. `x^2` or `x*xi1`.
    #[arg(long, allow_hyphen_values = true)]
    pub hamiltonian: String,
    /// Density to act on (needs `--lambda`).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["operator", "symbol"])]
    pub density: Option<String>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub lambda: Option<Rational>,
    /// Operator JSON file.
    #[arg(long, conflicts_with = "symbol")]
    pub operator: Option<PathBuf>,
    /// Symbol JSON file.
    #[arg(long)]
    pub symbol: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub k2: u32,
    #[command(flatten)]
    pub weights: Weights,
    /// Generators the quantization map is checked against.
    #[arg(long, value_parser = basis, default_value = "osp", env = "SQUANT_GENERATORS")]
    pub generators: BasisName,
    /// Monomial probe degree bound for the check.
    #[arg(long, default_value_t = 4, env = "SQUANT_PROBE_DEGREE")]
    pub degree: u32,
    #[arg(long, value_parser = shape, default_value = "reduced", env = "SQUANT_SHAPE")]
    pub shape: AnsatzShape,
    /// Check this coefficient table JSON instead of the solved one for its parity.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub grade: Grade,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct DivArgs {
    #[command(flatten)]
    pub grade: Grade,
    /// A single divergence index; all of 0..=k2 when omitted.
    #[arg(long)]
    pub n: Option<u32>,
    /// Also evaluate every term on this symbol JSON.
    #[arg(long)]
    pub symbol: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    pub grade: Grade,
}

#[derive(Debug, Args)]
pub struct ResonanceArgs {
    #[arg(long)]
    pub k2: u32,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub lambda: Rational,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// A finished command: its rendered payload and exit status.
pub struct Outcome {
    pub payload: String,
    pub code: u8,
}

impl Outcome {
    pub fn ok(payload: String) -> Self {
        Self { payload, code: 0 }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Resonant(_)) => EXIT_RESONANT,
        Some(Error::IntermediateSingularity(_)) => EXIT_SINGULARITY,
        _ => EXIT_CONFIG,
    }
}

fn emit(cli: &Cli, payload: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, payload)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(payload.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match commands::run(&cli).and_then(|o| emit(&cli, &o.payload).map(|_| o.code)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
