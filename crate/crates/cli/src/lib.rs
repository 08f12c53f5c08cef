//! Command dispatch for the `qcloseness` binary.
//!
//! Results (numbers, ensembles, CSV reports) go to `--output` when given and
//! to stdout otherwise; the one-line summary goes to stderr. Exit codes: 0 on
//! success, 1 for invalid input, 2 for numerical infeasibility or a failed
//! report write.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcloseness::format::{
    certificate_csv, curve_csv, parse_ensemble, parse_operator, read_file, validation_csv, write_atomic,
    write_ensemble,
};
use qcloseness::nogo::{identical_base, Side};
use qcloseness::rng::seeded;
use qcloseness::{
    build_family_for, c_min, closeness, comparison_povm, minimal_ensemble, nullspace_decay, sample_region,
    select_epsilon_for, spanning_certificate, validate_povm, Error, Povm, ProductState, StateEnsemble,
    ThresholdSpec,
};

#[derive(Debug, Parser)]
#[command(name = "qcloseness", version, about = "Closeness of unknown pure states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closeness of the ensemble in --input.
    Closeness(Flags),
    /// Minimal closeness of n states in dimension d.
    Cmin(Flags),
    /// Write an ensemble attaining the minimal closeness.
    Minimal(Flags),
    /// Spanning certificate for a perturbed family on one side of --threshold.
    Witness(Flags),
    /// Outcome probabilities of the symmetric-subspace comparison measurement.
    Compare(Flags),
    /// Nullspace dimension of sampled products versus sample count.
    NullspaceDecay(Flags),
    /// Positivity and completeness report for a POVM.
    ValidatePovm(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    S1,
    S2,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::S1 => Side::S1,
            SideArg::S2 => Side::S2,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Input file; `validate-povm` accepts one operator file per element.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    /// Completeness tolerance for `validate-povm`.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { 2 } else { 1 };
        Self { code, message: e.to_string() }
    }
}

/// What a command produced.
#[derive(Debug, Default, PartialEq)]
pub struct Outcome {
    /// Written to stdout unless it went to `--output`.
    pub stdout: String,
    pub summary: String,
    /// Nonzero when a report was produced but records a failure.
    pub code: u8,
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Closeness(f) => run_closeness(f),
        Command::Cmin(f) => run_cmin(f),
        Command::Minimal(f) => run_minimal(f),
        Command::Witness(f) => run_witness(f),
        Command::Compare(f) => run_compare(f),
        Command::NullspaceDecay(f) => run_nullspace_decay(f),
        Command::ValidatePovm(f) => run_validate_povm(f),
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("missing required flag --{flag}")))
}

fn single_input(f: &Flags) -> Result<&Path, CliError> {
    match f.input.as_slice() {
        [path] => Ok(path),
        [] => Err(CliError::usage("missing required flag --input")),
        _ => Err(CliError::usage("expected a single --input")),
    }
}

fn read_ensemble(path: &Path) -> Result<StateEnsemble, CliError> {
    let text = read_file(path).map_err(|e| CliError::usage(e.to_string()))?;
    parse_ensemble(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Sends `contents` to `--output` (atomically) or back to the caller for
/// stdout. Write failures exit with 2.
fn deliver(f: &Flags, contents: String, summary: String) -> Result<Outcome, CliError> {
    match &f.output {
        Some(path) => {
            write_atomic(path, &contents).map_err(|e| CliError { code: 2, message: e.to_string() })?;
            Ok(Outcome { summary: format!("{summary}; wrote {}", path.display()), ..Outcome::default() })
        }
        None => Ok(Outcome { stdout: contents, summary, code: 0 }),
    }
}

fn run_closeness(f: &Flags) -> Result<Outcome, CliError> {
    let e = read_ensemble(single_input(f)?)?;
    let c = closeness(&e);
    deliver(f, format!("{c}\n"), format!("closeness of n={} states in d={}", e.n(), e.dim()))
}

fn run_cmin(f: &Flags) -> Result<Outcome, CliError> {
    let (n, d) = (require(f.n, "n")?, require(f.d, "d")?);
    let value = c_min(n, d)?;
    deliver(f, format!("{value}\n"), format!("c_min(n={n}, d={d})"))
}

fn run_minimal(f: &Flags) -> Result<Outcome, CliError> {
    let (n, d) = (require(f.n, "n")?, require(f.d, "d")?);
    let e = minimal_ensemble(n, d)?;
    let summary = format!("minimal ensemble n={n} d={d} closeness {}", closeness(&e));
    deliver(f, write_ensemble(&e), summary)
}

fn run_witness(f: &Flags) -> Result<Outcome, CliError> {
    let (n, d) = (require(f.n, "n")?, require(f.d, "d")?);
    let threshold = require(f.threshold, "threshold")?;
    ThresholdSpec::new(threshold, n, d)?;
    let side: Side = f.side.unwrap_or(SideArg::S2).into();
    if let Some(eps) = f.epsilon {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(CliError::usage(format!("--epsilon must be finite and nonnegative, got {eps}")));
        }
    }
    let base = match side {
        Side::S2 => sample_region(n, d, threshold, Side::S2, f.seed)?,
        Side::S1 => identical_base(&mut seeded(f.seed), n, d)?,
    };
    let eps = match f.epsilon {
        Some(eps) => eps,
        None => select_epsilon_for(&base, threshold, side)?,
    };
    let family = build_family_for(&base, threshold, eps, side)?;
    let cert = spanning_certificate(&family, f.seed)?;
    let summary = format!(
        "witness n={n} d={d} A={threshold} side={side} seed={} epsilon={eps} rank={} verdict={}",
        f.seed, cert.rank, cert.verdict
    );
    deliver(f, certificate_csv(&cert), summary)
}

fn run_compare(f: &Flags) -> Result<Outcome, CliError> {
    let ensemble = match f.input.as_slice() {
        [] => {
            let (n, d) = (require(f.n, "n")?, require(f.d, "d")?);
            StateEnsemble::haar(&mut seeded(f.seed), n, d)?
        }
        _ => read_ensemble(single_input(f)?)?,
    };
    let (n, d) = (ensemble.n(), ensemble.dim());
    if f.n.is_some_and(|v| v != n) || f.d.is_some_and(|v| v != d) {
        return Err(CliError::usage(format!("--n/--d disagree with the input ensemble (n={n}, d={d})")));
    }
    let povm = comparison_povm(n, d)?;
    let probs = povm.probabilities(&ProductState::from_ensemble(&ensemble)?)?;
    let mut csv = String::from("element_label,probability\n");
    for (label, p) in &probs {
        csv.push_str(&format!("{label},{}\n", qcloseness::format::format_real(*p)));
    }
    let summary = format!(
        "comparison n={n} d={d} seed={} closeness={} P(R2)={}",
        f.seed,
        closeness(&ensemble),
        probs[0].1
    );
    deliver(f, csv, summary)
}

fn run_nullspace_decay(f: &Flags) -> Result<Outcome, CliError> {
    let (n, d) = (require(f.n, "n")?, require(f.d, "d")?);
    let threshold = require(f.threshold, "threshold")?;
    ThresholdSpec::new(threshold, n, d)?;
    let side: Side = require(f.side, "side")?.into();
    let curve = nullspace_decay(n, d, threshold, side, f.samples, f.seed)?;
    let summary = format!(
        "nullspace decay n={n} d={d} A={threshold} side={side} seed={} final dimension {}",
        f.seed,
        curve.final_dimension().map_or("-".to_string(), |v| v.to_string())
    );
    deliver(f, curve_csv(&curve), summary)
}

fn run_validate_povm(f: &Flags) -> Result<Outcome, CliError> {
    let povm = if f.input.is_empty() {
        comparison_povm(require(f.n, "n")?, require(f.d, "d")?)?
    } else {
        let elements = f
            .input
            .iter()
            .map(|path| {
                let text = read_file(path).map_err(|e| CliError::usage(e.to_string()))?;
                let op =
                    parse_operator(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                let label = path
                    .file_stem()
                    .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                Ok((label, op))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Povm::new(elements)?
    };
    let report = validate_povm(&povm);
    let passed = match f.tolerance {
        Some(t) => report.passes_with(t),
        None => report.passed(),
    };
    let summary = format!(
        "POVM with {} elements: {} (completeness residue {:e})",
        report.elements.len(),
        if passed { "pass" } else { "FAIL" },
        report.completeness_residue
    );
    let mut outcome = deliver(f, validation_csv(&report), summary)?;
    outcome.code = if passed { 0 } else { 1 };
    Ok(outcome)
}
