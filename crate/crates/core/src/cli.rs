//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 usage or parse error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::bench_dual_routes;
use crate::config::Tolerances;
use crate::error::Error;
use crate::io::{bench_to_json, bench_to_text, report_to_json, report_to_text, MatrixFile};
use crate::linalg::ComplexMatrix;
use crate::models::{ensemble_scale, ModelSpec};
use crate::pt::ParityOperator;
use crate::verify::full_verification;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ptgram",
    version,
    about = "Gram matrices and dual bases of PT-symmetric Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum, signature, Gram matrix and dual basis of one Hamiltonian.
    Analyze(AnalyzeArgs),
    /// Check every relation; exit 1 if an applicable one fails.
    Verify(AnalyzeArgs),
    /// Time the inversion and sign-flip dual constructions.
    Bench(BenchArgs),
    /// Write a model Hamiltonian and its parity in the matrix format.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelFamily {
    TwoLevel,
    LatticeChain,
    DiscretizedSchrodinger,
    RandomPt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model family to build.
    #[arg(long, value_enum)]
    pub model: Option<ModelFamily>,
    /// Gain/loss strength of the two-level model.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub g: f64,
    /// Coupling of the two-level model.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Dimension of the lattice, grid or random models.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Gain/loss strength of the lattice chain.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Hopping of the lattice chain.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Exponent in the potential `x^2 (i x)^epsilon`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Half-width of the grid `[-L, L]`.
    #[arg(long = "L", default_value_t = 8.0)]
    pub half_width: f64,
    /// Seed of the random model.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Anti-Hermitian strength of the random model; defaults to `n^-1.5`.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Redraw random instances until the spectrum is real.
    #[arg(long)]
    pub unbroken_only: bool,
}

impl ModelArgs {
    pub fn spec(&self) -> Option<ModelSpec> {
        Some(match self.model? {
            ModelFamily::TwoLevel => ModelSpec::TwoLevel {
                g: self.g,
                b: self.b,
            },
            ModelFamily::LatticeChain => ModelSpec::LatticeChain {
                n: self.n,
                gamma: self.gamma,
                t: self.t,
            },
            ModelFamily::DiscretizedSchrodinger => ModelSpec::DiscretizedSchrodinger {
                n: self.n,
                half_width: self.half_width,
                epsilon: self.epsilon,
            },
            ModelFamily::RandomPt => ModelSpec::RandomPt {
                n: self.n,
                seed: self.seed,
                scale: self.scale.unwrap_or_else(|| ensemble_scale(self.n)),
                unbroken_only: self.unbroken_only,
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Matrix file to read instead of building a model.
    #[arg(long, conflicts_with = "model")]
    pub input: Option<PathBuf>,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Relative residual bound of the eigensolver.
    #[arg(long)]
    pub tol_eig: Option<f64>,
    /// Bound on the signature residuals.
    #[arg(long)]
    pub tol_sig: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    /// Repetitions per dimension; timings are medians.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_error(context: &str, e: &Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::InvalidGrid(_) | Error::InvalidParity(_) => {
                EXIT_USAGE
            }
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: format!("{context}: {e}"),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Analyze(args) => analyze(&args, false, stdout),
        Command::Verify(args) => analyze(&args, true, stdout),
        Command::Bench(args) => bench(&args, stdout),
        Command::Generate(args) => generate(&args, stdout),
    }
}

fn emit(output: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("cannot write to standard output: {e}"))),
    }
}

fn build_model(args: &ModelArgs) -> Result<(ComplexMatrix, ParityOperator), Failure> {
    let spec = args
        .spec()
        .ok_or_else(|| Failure::usage("one of --model or --input is required"))?;
    let model = spec
        .build()
        .map_err(|e| Failure::from_error("cannot build model", &e))?;
    Ok((model.hamiltonian, model.parity))
}

fn load_input(args: &AnalyzeArgs) -> Result<(ComplexMatrix, ParityOperator), Failure> {
    match &args.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            MatrixFile::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
        }
        None => build_model(&args.model),
    }
}

fn tolerances(args: &AnalyzeArgs) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Some(t) = args.tol_eig {
        tol.eig = t;
    }
    if let Some(t) = args.tol_sig {
        tol.sig = t;
    }
    tol.validate().map_err(Failure::usage)?;
    Ok(tol)
}

fn analyze(args: &AnalyzeArgs, verify: bool, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let tol = tolerances(args)?;
    let (h, p) = load_input(args)?;
    let report = full_verification(&h, &p, &tol)
        .map_err(|e| Failure::from_error("cannot analyze input", &e))?;
    let text = match args.format {
        Format::Json => report_to_json(&report, if verify { "verify" } else { "analyze" }, !verify),
        Format::Text => report_to_text(&report),
    };
    emit(args.output.as_ref(), &text, stdout)?;
    Ok(if report.has_numerical_failure() {
        EXIT_NUMERICAL
    } else if verify && !report.all_applicable_pass() {
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    })
}

fn bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    if args.dims.is_empty() {
        return Err(Failure::usage("--dims must list at least one dimension"));
    }
    let rows = bench_dual_routes(&args.dims, args.reps, args.seed)
        .map_err(|e| Failure::from_error("benchmark", &e))?;
    let text = match args.format {
        Format::Json => bench_to_json(&rows),
        Format::Text => bench_to_text(&rows),
    };
    emit(args.output.as_ref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn generate(args: &GenerateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let (h, p) = build_model(&args.model)?;
    emit(
        args.output.as_ref(),
        &MatrixFile::new(&h, &p).to_json(),
        stdout,
    )?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("ptgram").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn missing_model_is_a_usage_error() {
        let (code, _, err) = run_args(&["analyze"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--model"));
    }

    #[test]
    fn bad_tolerance_is_a_usage_error() {
        let (code, _, _) = run_args(&["verify", "--model", "two-level", "--tol-eig", "-1"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn text_format_lists_relations() {
        let (code, out, _) = run_args(&["verify", "--model", "two-level", "--format", "text"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("gram-inverse"));
        assert!(out.contains("all applicable relations pass"));
    }

    #[test]
    fn negative_parameters_parse() {
        let (code, _, _) = run_args(&["generate", "--model", "two-level", "--g", "-1", "--b", "2"]);
        assert_eq!(code, EXIT_OK);
    }
}
