//! `faultring` command-line front end.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 validation failure,
//! 4 engine cross-check failure, 5 budget exceeded when asked to treat
//! that as an error.

use std::fs;
use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use faultring::fault::validate;
use faultring::reliability::{predicted_cost, CrossCheck, EnginePolicy, DEFAULT_BUDGET};
use faultring::report::{render, Format, McRow, ReportRow};
use faultring::scenario::{parse_scenario, ScenarioConfig};
use faultring::{estimate_p_hit, p_miss, Error, ObstacleModel};

const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_CROSS_CHECK: u8 = 4;
const EXIT_BUDGET: u8 = 5;

#[derive(Parser)]
#[command(name = "faultring", version, about = "Minimal-path fault ring hit probabilities in n-D meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact hit probability for a scenario.
    Analyze(AnalyzeArgs),
    /// Monte-Carlo estimate of the hit probability.
    Simulate(SimulateArgs),
    /// Recompute the built-in reference table.
    Table2(Table2Args),
    /// Check a scenario's fault set.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario JSON file, or `-` for stdin.
    #[arg(short, long)]
    scenario: String,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Decimal places for rendered probabilities; defaults to the scenario's.
    #[arg(long)]
    precision: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long, value_enum)]
    cross_check: Option<CrossCheckArg>,
    /// Work budget: `low`, `default`, `high`, or a number of operations.
    #[arg(long, value_parser = parse_budget)]
    budget: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    obstacles: Option<ObstaclesArg>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    #[arg(long, value_enum)]
    obstacles: Option<ObstaclesArg>,
}

#[derive(Args)]
struct Table2Args {
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, value_parser = parse_budget, default_value = "default")]
    budget: f64,
    #[arg(long)]
    workers: Option<usize>,
    /// Exit with code 5 if any row is skipped.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Det,
    Dp,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum CrossCheckArg {
    Off,
    Sample,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObstaclesArg {
    /// Faulty nodes and their ring.
    Ring,
    /// Faulty nodes only.
    Fault,
}

impl From<ObstaclesArg> for ObstacleModel {
    fn from(o: ObstaclesArg) -> Self {
        match o {
            ObstaclesArg::Ring => ObstacleModel::FaultRing,
            ObstaclesArg::Fault => ObstacleModel::FaultOnly,
        }
    }
}

fn parse_budget(s: &str) -> Result<f64, String> {
    match s {
        "low" => Ok(1e6),
        "default" => Ok(DEFAULT_BUDGET),
        "high" => Ok(f64::INFINITY),
        n => n
            .parse::<f64>()
            .ok()
            .filter(|v| *v >= 0.0)
            .ok_or_else(|| format!("budget must be low, default, high or a non-negative number, got {n:?}")),
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CrossCheck { .. } | Error::NegativeDeterminant { .. } => EXIT_CROSS_CHECK,
            Error::NoPairs | Error::AllNodesFaulty => EXIT_VALIDATION,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

fn load(arg: &ScenarioArg) -> Result<ScenarioConfig, Failure> {
    let text = if arg.scenario == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::new(EXIT_PARSE, format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(&arg.scenario).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", arg.scenario)))?
    };
    parse_scenario(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", arg.scenario)))
}

/// Prints validation findings to stderr; fails with code 3 on violations.
fn check(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let shape = cfg.shape().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let complex = cfg.complex().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let report = validate(&shape, &complex);
    for n in &report.notices {
        eprintln!("note: {n}");
    }
    if report.passed() {
        return Ok(());
    }
    let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
    Err(Failure::new(EXIT_VALIDATION, format!("validation failed: {}", msgs.join("; "))))
}

fn analyze(args: AnalyzeArgs) -> Result<String, Failure> {
    let mut cfg = load(&args.scenario)?;
    if let Some(o) = args.obstacles {
        cfg.analysis.obstacles = Some(o.into());
    }
    check(&cfg)?;
    let shape = cfg.shape().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let complex = cfg.complex().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let mut opts = cfg.analysis_options();
    if let Some(e) = args.engine {
        opts.engine = match e {
            EngineArg::Det => EnginePolicy::Determinant,
            EngineArg::Dp => EnginePolicy::Dp,
            EngineArg::Auto => EnginePolicy::Auto,
        };
    }
    if let Some(c) = args.cross_check {
        opts.cross_check = Some(match c {
            CrossCheckArg::Off => CrossCheck::Off,
            CrossCheckArg::Sample => CrossCheck::Sample,
            CrossCheckArg::Full => CrossCheck::Full,
        });
    }
    if let Some(b) = args.budget {
        opts.budget = b;
    }
    if let Some(w) = args.workers {
        opts.workers = w;
    }
    let cost = predicted_cost(&shape, &complex);
    let needed = match opts.engine {
        EnginePolicy::Determinant => cost.determinant,
        EnginePolicy::Dp => cost.dp,
        EnginePolicy::Auto => cost.cheapest(),
    };
    if needed > opts.budget {
        return Err(Failure::new(
            EXIT_BUDGET,
            format!("predicted cost {needed:.3e} exceeds budget {:.3e}", opts.budget),
        ));
    }
    let start = Instant::now();
    let result = p_miss(&shape, &complex, &opts)?;
    let precision = args.output.precision.unwrap_or(cfg.precision());
    let row = ReportRow::new(
        &shape,
        &complex,
        &result,
        cfg.obstacles(),
        precision,
        start.elapsed().as_millis(),
    );
    Ok(render(&[row], args.output.format.into()))
}

fn simulate(args: SimulateArgs) -> Result<String, Failure> {
    let mut cfg = load(&args.scenario)?;
    if let Some(o) = args.obstacles {
        cfg.analysis.obstacles = Some(o.into());
    }
    check(&cfg)?;
    let shape = cfg.shape().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let complex = cfg.complex().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let mut mc = cfg.mc_config();
    if let Some(s) = args.samples {
        mc.samples = s;
    }
    if let Some(s) = args.seed {
        mc.seed = s;
    }
    if let Some(w) = args.workers {
        mc.workers = w as usize;
    }
    let est = estimate_p_hit(&shape, &complex, &mc)?;
    let precision = args.output.precision.unwrap_or(cfg.precision());
    let row = McRow::new(&shape, &complex, &est, cfg.obstacles(), precision);
    Ok(render(&[row], args.output.format.into()))
}

fn table2(args: Table2Args) -> Result<String, Failure> {
    let mut opts = faultring::AnalysisOptions {
        budget: args.budget,
        ..Default::default()
    };
    if let Some(w) = args.workers {
        opts.workers = w;
    }
    let precision = args.output.precision.unwrap_or(faultring::scenario::DEFAULT_PRECISION);
    let rows = faultring::table2::run_all(&opts, precision)?;
    let out = render(&rows, args.output.format.into());
    if args.strict && rows.iter().any(|r| !r.computed()) {
        print!("{out}");
        return Err(Failure::new(EXIT_BUDGET, "some rows were skipped by the budget"));
    }
    Ok(out)
}

fn validate_cmd(args: ValidateArgs) -> Result<String, Failure> {
    let cfg = load(&args.scenario)?;
    let shape = cfg.shape().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let complex = cfg.complex().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let report = validate(&shape, &complex);
    let text = match Format::from(args.format) {
        Format::Json => {
            let body = serde_json_report(&report);
            format!("{body}\n")
        }
        _ => {
            let mut s = String::new();
            s.push_str(if report.passed() { "PASS\n" } else { "FAIL\n" });
            for v in &report.violations {
                s.push_str(&format!("violation: {v}\n"));
            }
            for n in &report.notices {
                s.push_str(&format!("note: {n}\n"));
            }
            s
        }
    };
    if report.passed() {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::new(EXIT_VALIDATION, "validation failed"))
    }
}

fn serde_json_report(report: &faultring::fault::ValidationReport) -> String {
    let violations: Vec<String> = report.violations.iter().map(|v| format!("{:?}", v.to_string())).collect();
    let notices: Vec<String> = report.notices.iter().map(|n| format!("{:?}", n.to_string())).collect();
    format!(
        "{{\"passed\": {}, \"violations\": [{}], \"notices\": [{}]}}",
        report.passed(),
        violations.join(", "),
        notices.join(", ")
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Table2(a) => table2(a),
        Command::Validate(a) => validate_cmd(a),
    };
    match outcome {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
