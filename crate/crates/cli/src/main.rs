use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use norden_core::checks::{connection_checks, norm_theorem_row};
use norden_core::files::{ModelFile, ReportFile, RunConfig};
use norden_core::generator::{generate, GeneratorConfig, ModelKind};
use norden_core::{Error, Geometry, LieAlgebraModel, NordenStructure, Tolerances};

const EXIT_PASS: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE_OR_IO: u8 = 2;
const EXIT_NO_RESULT: u8 = 3;

#[derive(Parser)]
#[command(name = "norden", version, about = "Checks and generators for homogeneous Norden models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lie algebra axioms, Norden conditions and connection residuals
    Validate(InputArgs),
    /// Class residuals and memberships (W0, W1, W2, W3)
    Classify(InputArgs),
    /// Scalar curvatures, square norm of ∇J, Ricci matrices
    Invariants(InputArgs),
    /// Full identity suite
    Verify(VerifyArgs),
    /// Write a generated model file
    Generate(GenerateArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Report destination; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Random vector pairs for the holomorphic-plane sweep
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Adds 1e-3 to Γ^0_{01} before checking
    #[arg(long, hide = true)]
    corrupt_connection: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Kahler,
    Random,
    W3,
    IsotropicW3,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Kahler => ModelKind::Kahler,
            KindArg::Random => ModelKind::Random,
            KindArg::W3 => ModelKind::W3,
            KindArg::IsotropicW3 => ModelKind::IsotropicW3,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Model destination; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Early exit with a code and a message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_PARSE_OR_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

fn tolerances(t: f64) -> Result<Tolerances, Failure> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Failure {
            code: EXIT_PARSE_OR_IO,
            message: format!("tolerance must be positive and finite, got {t}"),
        });
    }
    Ok(Tolerances::default().with_check(t))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_config(command: &str) -> RunConfig {
    RunConfig {
        command: command.into(),
        seed: None,
        samples: None,
        generator: None,
        perturbation: None,
    }
}

/// Parses and validates the input. Validation failures still produce a report.
fn load(
    io: &InputArgs,
    tol: &Tolerances,
    config: &RunConfig,
) -> Result<(LieAlgebraModel, NordenStructure, Option<String>), Failure> {
    let file = ModelFile::read(&io.input).map_err(|e| Failure {
        code: EXIT_PARSE_OR_IO,
        message: e.to_string(),
    })?;
    if let Err(e @ Error::Parse(_)) = file.constants().and(file.matrices().map(|_| ())) {
        return Err(Failure {
            code: EXIT_PARSE_OR_IO,
            message: e.to_string(),
        });
    }
    match file.to_model(tol) {
        Ok((m, s)) => Ok((m, s, file.label)),
        Err(e) => {
            let report = ReportFile::new(config.clone(), file.label, *tol).with_error(&e).finish();
            emit(&report.to_json(), io.output.as_deref())?;
            Err(Failure {
                code: EXIT_CHECK_FAILED,
                message: format!("{}: {e}", e.kind()),
            })
        }
    }
}

fn geometry(model: LieAlgebraModel, s: NordenStructure, tol: &Tolerances) -> Result<Geometry, Failure> {
    Geometry::new(model, s, tol).map_err(|e| Failure {
        code: EXIT_CHECK_FAILED,
        message: format!("{}: {e}", e.kind()),
    })
}

fn finish(report: ReportFile, output: Option<&Path>) -> Result<u8, Failure> {
    let report = report.finish();
    emit(&report.to_json(), output)?;
    Ok(if report.summary.all_passed { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn cmd_validate(io: &InputArgs) -> Result<u8, Failure> {
    let tol = tolerances(io.tolerance)?;
    let config = run_config("validate");
    let (model, s, label) = load(io, &tol, &config)?;
    let geom = geometry(model, s, &tol)?;
    let mut report = ReportFile::new(config, label, tol);
    report.checks = connection_checks(&geom, &tol);
    finish(report, io.output.as_deref())
}

fn cmd_classify(io: &InputArgs) -> Result<u8, Failure> {
    let tol = tolerances(io.tolerance)?;
    let tol = Tolerances { class: tol.check, ..tol };
    let config = run_config("classify");
    let (model, s, label) = load(io, &tol, &config)?;
    let geom = geometry(model, s, &tol)?;
    let mut report = ReportFile::new(config, label, tol);
    report.classes = Some(geom.classes);
    finish(report, io.output.as_deref())
}

fn cmd_invariants(io: &InputArgs) -> Result<u8, Failure> {
    let tol = tolerances(io.tolerance)?;
    let config = run_config("invariants");
    let (model, s, label) = load(io, &tol, &config)?;
    let geom = geometry(model, s, &tol)?;
    let mut report = ReportFile::new(config, label, tol).with_invariants(&geom, &tol);
    report.checks.push(norm_theorem_row(&geom, &tol));
    finish(report, io.output.as_deref())
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let tol = tolerances(args.io.tolerance)?;
    let mut config = run_config("verify");
    config.seed = Some(args.seed);
    config.samples = Some(args.samples);
    let (model, s, label) = load(&args.io, &tol, &config)?;
    let geom = if args.corrupt_connection {
        config.perturbation = Some("gamma[0,1,0] += 1e-3".into());
        let conn = norden_core::models::levi_civita(&model, s.metric())
            .map_err(|e| Failure {
                code: EXIT_CHECK_FAILED,
                message: e.to_string(),
            })?
            .perturbed(0, 1, 0, 1e-3);
        Geometry::with_connection(model, s, conn, &tol).map_err(|e| Failure {
            code: EXIT_CHECK_FAILED,
            message: e.to_string(),
        })?
    } else {
        geometry(model, s, &tol)?
    };
    let mut report = ReportFile::new(config, label, tol)
        .with_invariants(&geom, &tol)
        .with_verification(&geom, &tol, args.samples, args.seed);
    report.classes = Some(geom.classes);
    finish(report, args.io.output.as_deref())
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8, Failure> {
    let tol = Tolerances::default();
    let cfg = GeneratorConfig::new(args.dim, args.seed);
    match generate(args.kind.into(), &cfg, &tol) {
        Ok(g) => {
            let file = ModelFile::from_model(&g.model, &g.structure, Some(g.label));
            emit(&file.to_json(), args.output.as_deref())?;
            Ok(EXIT_PASS)
        }
        Err(e @ (Error::OnlyKahlerSolutions | Error::NotFound(_) | Error::RetriesExhausted(_))) => Err(Failure {
            code: EXIT_NO_RESULT,
            message: format!("{}: {e}", e.kind()),
        }),
        Err(e) => Err(Failure {
            code: EXIT_PARSE_OR_IO,
            message: format!("{}: {e}", e.kind()),
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Validate(io) => cmd_validate(io),
        Command::Classify(io) => cmd_classify(io),
        Command::Invariants(io) => cmd_invariants(io),
        Command::Verify(args) => cmd_verify(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("norden: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
