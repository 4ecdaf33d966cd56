//! `gtm`: exact Gelfand-Tsetlin module computations from the command line.
//!
//! Subcommands: `classify` a tableau, `act` with a generator on a vector,
//! enumerate a finite-dimensional `basis`, and `verify` the identity
//! suites. All I/O is JSON with rationals as `"p/q"` strings; no floating
//! point appears anywhere.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed input or
//! configuration.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gt_modules::engine::{fd_basis, fd_top_row, weyl_dim, Engine, ModuleSpec, ModuleVector};
use gt_modules::engine::Generator;
use gt_modules::formulas::{EvalOptions, Mutation};
use gt_modules::jet::{DEFAULT_FLOOR, DEFAULT_TRUNC};
use gt_modules::tableau::Tableau;
use gt_modules::verify::{self, Suite, VerifyConfig};

#[derive(Parser)]
#[command(name = "gtm", version, about = "Exact Gelfand-Tsetlin module calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a tableau: integrality, standardness, singular and
    /// critical pairs.
    Classify(ClassifyArgs),
    /// Apply a generator E,a,b or a Gelfand-Tsetlin generator C,m,t to a
    /// vector.
    Act(ActArgs),
    /// Enumerate the standard tableaux of a finite-dimensional module.
    Basis(BasisArgs),
    /// Run the exact verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Tableau JSON: inline, a file path, or `-` for stdin.
    #[arg(default_value = "-")]
    input: String,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ActArgs {
    /// Generator: `E,a,b` or `C,m,t`.
    #[arg(long)]
    generator: String,
    /// Vector JSON: inline, a file path, or `-` for stdin.
    #[arg(long)]
    vector: String,
    /// Module spec JSON; must match the vector's spec when given.
    #[arg(long)]
    spec: Option<String>,
    /// Truncation order for jet evaluation.
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    trunc: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasisArgs {
    /// Module spec JSON of the finite-dimensional family.
    #[arg(long)]
    spec: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest rank to exercise (>= 2).
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    /// Seed for instance sampling; falls back to GTM_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// 1-norm radius of the sampled shift ball.
    #[arg(long, default_value_t = 2)]
    radius: i64,
    /// Truncation order for jet evaluation.
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    trunc: i64,
    /// Run only the named suites (repeatable):
    /// bracket|casimir|singular|regularity|dlemma|dimension.
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Corrupt one formula to prove the checks can fail:
    /// sign-e12|gamma-shift|pminus-factor|tau-orientation.
    #[arg(long)]
    mutate: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

impl From<gt_modules::Error> for Failure {
    fn from(e: gt_modules::Error) -> Failure {
        Failure::config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        Failure::config(format!("invalid JSON: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::config(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Act(args) => cmd_act(args),
        Command::Basis(args) => cmd_basis(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("gtm: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

/// Reads a payload argument: `-` is stdin, something that looks like JSON
/// is taken inline, anything else is a file path.
fn read_payload(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        return Ok(buf);
    }
    if arg.trim_start().starts_with(['{', '[']) {
        return Ok(arg.to_string());
    }
    Ok(fs::read_to_string(arg)?)
}

fn write_output(out: Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            f.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                f.write_all(b"\n")?;
            }
        }
        None => {
            if content.ends_with('\n') {
                print!("{content}");
            } else {
                println!("{content}");
            }
        }
    }
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode, Failure> {
    let payload = read_payload(&args.input)?;
    let tableau: Tableau = serde_json::from_str(&payload)?;
    let classification = tableau.classify();
    write_output(args.out, &serde_json::to_string(&classification)?)?;
    Ok(ExitCode::SUCCESS)
}

enum GeneratorArg {
    Single(Generator),
    Casimir(usize, usize),
}

fn parse_generator(s: &str) -> Result<GeneratorArg, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Failure::config(format!("invalid generator `{s}`; expected E,a,b or C,m,t"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let x: usize = parts[1].parse().map_err(|_| bad())?;
    let y: usize = parts[2].parse().map_err(|_| bad())?;
    match parts[0] {
        "E" | "e" => Ok(GeneratorArg::Single(Generator::e(x, y))),
        "C" | "c" => Ok(GeneratorArg::Casimir(x, y)),
        _ => Err(bad()),
    }
}

fn cmd_act(args: ActArgs) -> Result<ExitCode, Failure> {
    let generator = parse_generator(&args.generator)?;
    let vector: ModuleVector = serde_json::from_str(&read_payload(&args.vector)?)?;
    if let Some(spec_arg) = &args.spec {
        let spec: ModuleSpec = serde_json::from_str(&read_payload(spec_arg)?)?;
        if &spec != vector.spec() {
            return Err(Failure::config(
                "the --spec argument does not match the vector's spec".to_string(),
            ));
        }
    }
    let opts = EvalOptions { trunc: args.trunc, floor: DEFAULT_FLOOR, mutation: Mutation::None };
    let engine = Engine::new(vector.spec().clone(), opts)?;
    let acted = match generator {
        GeneratorArg::Single(gen) => engine.act(gen, &vector)?,
        GeneratorArg::Casimir(m, t) => engine.act_casimir(m, t, &vector)?,
    };
    write_output(args.out, &serde_json::to_string(&acted)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_basis(args: BasisArgs) -> Result<ExitCode, Failure> {
    let spec: ModuleSpec = serde_json::from_str(&read_payload(&args.spec)?)?;
    let ModuleSpec::FiniteDim { lambda } = &spec else {
        return Err(Failure::config(
            "basis enumeration needs a finite_dim spec".to_string(),
        ));
    };
    let tableaux = fd_basis(lambda)?;
    let payload = serde_json::json!({
        "lambda": lambda,
        "top_row": fd_top_row(lambda),
        "dimension": tableaux.len(),
        "weyl_dimension": weyl_dim(lambda)?,
        "tableaux": tableaux,
    });
    write_output(args.out, &serde_json::to_string(&payload)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let seed = match args.seed {
        Some(seed) => seed,
        None => match std::env::var("GTM_SEED") {
            Ok(v) => v
                .parse()
                .map_err(|_| Failure::config(format!("invalid GTM_SEED `{v}`")))?,
            Err(_) => 0,
        },
    };
    let mut suites = Vec::new();
    for name in &args.suites {
        suites.push(name.parse::<Suite>()?);
    }
    if suites.is_empty() {
        suites = Suite::ALL.to_vec();
    }
    if let Some(flag) = &args.mutate {
        Mutation::from_flag(flag)?;
    }
    let config = VerifyConfig {
        n_max: args.n_max,
        seed,
        radius: args.radius,
        trunc: args.trunc,
        mutation: args.mutate.clone(),
        suites,
        ..VerifyConfig::default()
    };
    let reports = verify::run(&config)?;

    let mut lines = Vec::with_capacity(reports.len() + 2);
    lines.push(serde_json::to_string(&serde_json::json!({ "config": config }))?);
    let mut failed = 0usize;
    for report in &reports {
        if !report.pass {
            failed += 1;
        }
        lines.push(serde_json::to_string(report)?);
    }
    lines.push(serde_json::to_string(&serde_json::json!({
        "summary": { "total": reports.len(), "failed": failed, "seed": seed }
    }))?);
    write_output(args.out, &(lines.join("\n") + "\n"))?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
