use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use subelliptic_cli::{run, Format, RunError, RunRequest, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "subelliptic", version, about = "Numerical checks for model operators, symbols and relative indices")]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// JSON object of parameters; command-line flags take precedence.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Add wall-clock time to the report (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(ClapSubcommand, Debug)]
enum Command {
    /// Creation/annihilation, oscillator and model Dirac operator identities.
    VerifyAlgebra(AlgebraArgs),
    /// Principal symbol, Calderon symbol and contour integral identities.
    VerifySymbols(SymbolArgs),
    /// Explicit inverses of the model comparison operators.
    ModelInvert(ModelArgs),
    /// Relative index of projector pairs.
    Relindex(RelindexArgs),
    /// Toeplitz index on a finite Fourier window.
    Toeplitz(ToeplitzArgs),
    /// Index formulas from filling and characteristic data.
    Topo(TopoArgs),
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct AlgebraArgs {
    /// Complex dimension; the oscillator has n - 1 variables.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cutoff: Option<u32>,
    #[arg(long)]
    guard: Option<u32>,
    /// Cutoff for the kernel computation.
    #[arg(long)]
    kernel_cutoff: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SymbolArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    contour_samples: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ModelArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    cutoff: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Number of random right-hand sides.
    #[arg(long)]
    samples: Option<usize>,
    /// even, odd or both
    #[arg(long)]
    chirality: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct RelindexArgs {
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    shadow_pairs: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ToeplitzArgs {
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    k_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    k_max: Option<i64>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct TopoArgs {
    /// Filling descriptor as JSON.
    #[arg(long, value_parser = parse_json)]
    x0: Option<Value>,
    #[arg(long, value_parser = parse_json)]
    x1: Option<Value>,
    /// Characteristic numbers as JSON.
    #[arg(long, value_parser = parse_json)]
    numbers: Option<Value>,
    #[arg(long, allow_hyphen_values = true)]
    ind_glued: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    cdeg: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    bterm0: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    bterm1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    base0_euler: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    base1_euler: Option<i64>,
}

fn parse_json(s: &str) -> Result<Value, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

fn flags<T: Serialize>(args: &T) -> BTreeMap<String, Value> {
    match serde_json::to_value(args).expect("flag structs serialize") {
        Value::Object(map) => map.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => BTreeMap::new(),
    }
}

fn request(cli: &Cli) -> Result<RunRequest, RunError> {
    let (subcommand, overrides) = match &cli.command {
        Command::VerifyAlgebra(a) => (Subcommand::VerifyAlgebra, flags(a)),
        Command::VerifySymbols(a) => (Subcommand::VerifySymbols, flags(a)),
        Command::ModelInvert(a) => (Subcommand::ModelInvert, flags(a)),
        Command::Relindex(a) => (Subcommand::Relindex, flags(a)),
        Command::Toeplitz(a) => (Subcommand::Toeplitz, flags(a)),
        Command::Topo(a) => (Subcommand::Topo, flags(a)),
    };
    let mut params = BTreeMap::new();
    if let Some(path) = &cli.input {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?;
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(map)) => params.extend(map),
            Ok(_) => return Err(RunError::Usage(format!("{}: expected a JSON object", path.display()))),
            Err(e) => return Err(RunError::Usage(format!("{}: {e}", path.display()))),
        }
    }
    params.extend(overrides);
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
    };
    Ok(RunRequest { subcommand, params, seed: cli.seed, format })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let start = Instant::now();
    let outcome = request(&cli).and_then(|req| run(&req));
    match outcome {
        Ok(mut report) => {
            if cli.timing {
                report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            let _ = writeln!(std::io::stdout(), "{}", report.render());
            ExitCode::from(report.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
