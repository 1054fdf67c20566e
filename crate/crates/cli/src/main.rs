//! `steinops`: construct, verify and analyse polynomial Stein operators.
//!
//! Exit codes: 0 success, 1 verification failed, 2 usage error.

mod commands;
mod input;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use stein_core::Exec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{flag}: {msg}")]
    Usage { flag: &'static str, msg: String },
}

impl CliError {
    pub fn usage(flag: &'static str, msg: impl Into<String>) -> Self {
        CliError::Usage {
            flag,
            msg: msg.into(),
        }
    }
}

/// Attaches a flag name to a core error.
pub trait FlagContext<T> {
    fn flag(self, flag: &'static str) -> Result<T, CliError>;
}

impl<T> FlagContext<T> for stein_core::Result<T> {
    fn flag(self, flag: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::usage(flag, e.to_string()))
    }
}

/// What a command printed and whether its check held.
pub struct Outcome {
    pub output: String,
    pub ok: bool,
}

impl Outcome {
    pub fn ok(output: String) -> Self {
        Outcome { output, ok: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Latex,
    Json,
    Csv,
}

impl Format {
    /// Usage error unless `self` is one of `allowed`.
    pub fn require(self, allowed: &[Format]) -> Result<Format, CliError> {
        if allowed.contains(&self) {
            Ok(self)
        } else {
            let names: Vec<String> = allowed
                .iter()
                .map(|f| f.to_possible_value().expect("named").get_name().to_string())
                .collect();
            Err(CliError::usage(
                "--format",
                format!("this command supports {}", names.join(", ")),
            ))
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "steinops",
    version,
    about = "Polynomial Stein operators for products of random variables"
)]
struct Cli {
    /// Run the data-parallel kernels on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a Stein operator.
    Construct(ConstructArgs),
    /// Check an operator against exact moments and optionally by simulation.
    Verify(VerifyArgs),
    /// Exact moments of a law, or moments generated by an operator's recurrence.
    Moments(MomentsArgs),
    /// Nullspace of the moment system for one operator shape or a grid of shapes.
    Minimality(MinimalityArgs),
    /// Characteristic function ODE, closed-form values, or the mgf.
    Charfn(CharfnArgs),
    /// Density ODE, or series vs convolution values of a normal product density.
    Density(DensityArgs),
    /// Check an operator identity `A L = B` or `A = B L`.
    Reduce(ReduceArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["dist", "product_iid_linear", "product_iid"])))]
pub struct ConstructArgs {
    /// Distribution shorthand or JSON (`@file`, `-` for stdin).
    #[arg(long)]
    pub dist: Option<String>,
    /// `XY` for iid `X` with operator `M - alpha T_a - beta T_b D`.
    #[arg(long, requires_all = ["alpha", "beta", "a", "b"])]
    pub product_iid_linear: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Shift of `T_a`; `inf` for the identity limit.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Shift of `T_b`; `inf` for the identity limit.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// `XY` for iid `X` with operator `M - Q(MD) - P(MD) D`.
    #[arg(long, requires_all = ["p", "q"])]
    pub product_iid: bool,
    /// Coefficients of `P(u)`, ascending powers, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Coefficients of `Q(u)`, ascending powers, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Operator for the sum of this many iid copies (needs a linear-coefficient operator).
    #[arg(long)]
    pub sum: Option<u32>,
    /// Operator for `c` times the variable.
    #[arg(long, allow_hyphen_values = true)]
    pub scale: Option<String>,
    /// Scale so the leading term has coefficient 1.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Operator: JSON or text, inline, `@file` or `-` for stdin.
    #[arg(long)]
    pub op: String,
    /// Target law.
    #[arg(long)]
    pub dist: String,
    /// Test monomials `x^k`, `k = 0..=max-k`.
    #[arg(long, default_value_t = 30)]
    pub max_k: usize,
    /// Also run the Monte Carlo check.
    #[arg(long)]
    pub mc: bool,
    /// Only the Monte Carlo check.
    #[arg(long, conflicts_with = "mc")]
    pub mc_only: bool,
    /// Monte Carlo sample size.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, env = "STEIN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Largest accepted `|z|`.
    #[arg(long, default_value_t = stein_core::verify::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["dist", "op"])))]
pub struct MomentsArgs {
    #[arg(long)]
    pub dist: Option<String>,
    /// Operator whose moment recurrence generates the sequence.
    #[arg(long, requires = "initial")]
    pub op: Option<String>,
    /// Initial moments for `--op`, comma separated, starting with 1.
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
    /// Moments `0..=max-k`.
    #[arg(long, default_value_t = 10)]
    pub max_k: usize,
    /// Add empirical moments from this many draws (with `--dist`).
    #[arg(long, requires = "dist")]
    pub sample: Option<usize>,
    #[arg(long, env = "STEIN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("grid").required(true).args(["shape", "max_order"])))]
pub struct MinimalityArgs {
    #[arg(long)]
    pub dist: String,
    /// One shape `<order>x<degree>`, e.g. `2x1`.
    #[arg(long)]
    pub shape: Option<String>,
    /// Scan every shape up to this order.
    #[arg(long, requires = "max_degree")]
    pub max_order: Option<usize>,
    #[arg(long, requires = "max_order")]
    pub max_degree: Option<usize>,
    /// Last test monomial index; rows are `k = 0..=k-max`.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["dist", "op"])))]
pub struct CharfnArgs {
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub op: Option<String>,
    /// Evaluate the closed form on `lo:hi:n` or a comma list (normal products only).
    #[arg(long, requires = "dist", allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Evaluate the moment generating function at `s` (normal products only).
    #[arg(
        long,
        requires = "dist",
        conflicts_with = "grid",
        allow_hyphen_values = true
    )]
    pub mgf: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["dist", "op"])))]
pub struct DensityArgs {
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub op: Option<String>,
    /// Tabulate series and convolution values on `lo:hi:n` or a comma list.
    #[arg(long, requires = "dist", allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Series terms.
    #[arg(long, default_value_t = stein_core::analytic::DEFAULT_TERMS)]
    pub terms: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReduceKind {
    /// `A L = B`.
    Compose,
    /// `A = B L`.
    Factor,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long)]
    pub op: String,
    /// The operator `L`.
    #[arg(long)]
    pub by: String,
    /// The operator `B`.
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum, default_value_t = ReduceKind::Compose)]
    pub kind: ReduceKind,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let result = match &cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Verify(a) => commands::verify(a, exec),
        Command::Moments(a) => commands::moments(a, exec),
        Command::Minimality(a) => commands::minimality(a, exec),
        Command::Charfn(a) => commands::charfn(a),
        Command::Density(a) => commands::density(a, exec),
        Command::Reduce(a) => commands::reduce(a),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream is not our failure
            let _ = stdout.write_all(out.output.as_bytes());
            let _ = stdout.flush();
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
