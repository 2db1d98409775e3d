//! Command-line front end: outage sweeps, policy comparison, rate regions,
//! schedule traces, rate solving and the self-check suite.
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deadline_bcast::experiments::{self as exp, OutageMethod, OutageSweep};
use deadline_bcast::validate;
use deadline_bcast::{DeadlineConfig, ErasurePattern, ErasureProbs, Error, PolicyId, Result};

const THREADS_ENV: &str = "DEADLINE_BCAST_THREADS";

#[derive(Parser)]
#[command(
    name = "deadline-bcast",
    version,
    about = "Hard-deadline scheduling over a two-user erasure broadcast channel"
)]
#[command(args_override_self = true)]
struct Cli {
    /// JSON object whose keys are flags of the chosen subcommand. Flags given
    /// on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deadline outage probability, at one point or over a sweep
    Outage(OutageArgs),
    /// Full-CSI outage against the two causal policies over a range of T
    PolicyCompare(PolicyCompareArgs),
    /// Boundary vertices of the rate region of one erasure pattern
    Region(RegionArgs),
    /// Per-slot trace of one policy on one erasure pattern
    Schedule(ScheduleArgs),
    /// Largest rates on a ray whose outage stays within a target
    RateSolve(RateSolveArgs),
    /// Run the oracle and invariant suite
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Bruteforce,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Write results here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script for the data file (needs --output)
    #[arg(long, value_name = "FILE")]
    gnuplot: Option<PathBuf>,
}

#[derive(Args)]
struct OutageArgs {
    #[arg(long)]
    t1: Option<u32>,
    /// Defaults to T1
    #[arg(long)]
    t2: Option<u32>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// eps00,eps01,eps10,eps11; repeat for several channels
    #[arg(long, required = true)]
    eps: Vec<ErasureProbs>,
    #[arg(long, value_enum, default_value = "exact")]
    method: MethodArg,
    /// Policy simulated by --method mc
    #[arg(long, default_value = "greedy_full")]
    policy: PolicyId,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep T1 over start:stop; T2 = N * T1
    #[arg(long, value_name = "A:B")]
    t_range: Option<String>,
    /// Blocks per frame for --t-range
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Sweep λ2 = λ and λ1 = m·λ over start:stop:step
    #[arg(long, value_name = "A:B:STEP")]
    lambda_range: Option<String>,
    /// Sweep λ2 over start:stop:step at fixed --lambda1
    #[arg(long, value_name = "A:B:STEP")]
    lambda2_range: Option<String>,
    /// Ray slopes λ1/λ2 for --lambda-range
    #[arg(long, value_delimiter = ',', default_value = "1")]
    m: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct PolicyCompareArgs {
    #[arg(long, value_name = "A:B", default_value = "1:10")]
    t_range: String,
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda2: f64,
    #[arg(long)]
    eps: ErasureProbs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct RegionArgs {
    /// Comma-separated two-bit symbols, e.g. 10,11,00
    #[arg(long)]
    pattern: ErasurePattern,
    /// Block length; defaults to the pattern length
    #[arg(long)]
    t1: Option<u32>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value = "greedy_full")]
    policy: PolicyId,
    #[arg(long)]
    pattern: ErasurePattern,
    /// Defaults to the pattern length
    #[arg(long)]
    t1: Option<u32>,
    /// Defaults to the pattern length
    #[arg(long)]
    t2: Option<u32>,
    #[arg(long)]
    lambda1: f64,
    #[arg(long)]
    lambda2: f64,
    /// Needed by the causal policies
    #[arg(long)]
    eps: Option<ErasureProbs>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RateSolveArgs {
    #[arg(long)]
    eps: ErasureProbs,
    #[arg(long)]
    t1: Option<u32>,
    /// Defaults to T1
    #[arg(long)]
    t2: Option<u32>,
    /// Target outage
    #[arg(long)]
    p: Option<f64>,
    /// Ray slope λ1/λ2; a list gives one row per slope
    #[arg(long, value_delimiter = ',', default_value = "1")]
    m: Vec<f64>,
    /// Sweep the target over start:stop:step (CSV output)
    #[arg(long, value_name = "A:B:STEP")]
    p_range: Option<String>,
    /// Sweep T1 over start:stop with T2 = N * T1 (CSV output)
    #[arg(long, value_name = "A:B")]
    t_range: Option<String>,
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ValidateArgs {
    /// Reduced domains
    #[arg(long)]
    quick: bool,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn json_to_flag_value(key: &str, v: &serde_json::Value) -> Result<Option<String>> {
    use serde_json::Value;
    let scalar = |v: &Value| -> Result<String> {
        match v {
            Value::Number(n) => Ok(n.to_string()),
            Value::String(s) => Ok(s.clone()),
            _ => Err(invalid(format!(
                "config key {key:?}: expected a number or string"
            ))),
        }
    };
    match v {
        Value::Bool(true) => Ok(None),
        Value::Array(items) => Ok(Some(
            items
                .iter()
                .map(scalar)
                .collect::<Result<Vec<_>>>()?
                .join(","),
        )),
        other => scalar(other).map(Some),
    }
}

/// Splices the keys of a `--config` file into the argument list right after
/// the subcommand, so later command-line flags override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => {
                path = Some(it.next().ok_or_else(|| invalid("--config needs a file"))?);
            }
            Some(s) if s.starts_with("--config=") => {
                path = Some(OsString::from(&s["--config=".len()..]))
            }
            _ => rest.push(a),
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| {
        invalid(format!(
            "cannot read config {}: {e}",
            Path::new(&path).display()
        ))
    })?;
    let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("config {}: {e}", Path::new(&path).display())))?;

    let mut sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 1);
    let mut flags = Vec::new();
    for (key, value) in &obj {
        if key == "command" {
            if sub.is_none() {
                let name = value
                    .as_str()
                    .ok_or_else(|| invalid("config key \"command\": expected a string"))?;
                rest.insert(1, name.into());
                sub = Some(1);
            }
            continue;
        }
        if value == &serde_json::Value::Bool(false) || value.is_null() {
            continue;
        }
        flags.push(OsString::from(format!("--{}", key.replace('_', "-"))));
        if let Some(v) = json_to_flag_value(key, value)? {
            flags.push(v.into());
        }
    }
    let at = sub.ok_or_else(|| invalid("no subcommand given"))? + 1;
    rest.splice(at..at, flags);
    Ok(rest)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(format!("{THREADS_ENV}={raw:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| invalid(format!("thread pool: {e}")))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_with_plot(text: &str, out: &Output, script: fn(&str) -> String) -> Result<()> {
    if out.gnuplot.is_some() && out.output.is_none() {
        return Err(invalid("--gnuplot needs --output for the data file"));
    }
    emit(text, out.output.as_deref())?;
    if let (Some(g), Some(data)) = (&out.gnuplot, &out.output) {
        let body = script(&data.display().to_string());
        fs::write(g, format!("{}\n{body}", exp::metadata_line(None)))?;
    }
    Ok(())
}

fn deadlines(
    t1: Option<u32>,
    t2: Option<u32>,
    t_range: Option<&str>,
    n: u32,
) -> Result<Vec<(u32, u32)>> {
    match t_range {
        Some(r) => Ok(exp::parse_int_range(r)?
            .into_iter()
            .map(|t| (t, t * n))
            .collect()),
        None => {
            let t1 = t1.ok_or_else(|| invalid("--t1 or --t-range is required"))?;
            Ok(vec![(t1, t2.unwrap_or(t1))])
        }
    }
}

fn run_outage(a: OutageArgs) -> Result<()> {
    let rates: Vec<(f64, f64)> = match (&a.lambda_range, &a.lambda2_range) {
        (Some(_), Some(_)) => {
            return Err(invalid("--lambda-range and --lambda2-range are exclusive"))
        }
        (Some(r), None) => {
            let ls = exp::parse_range(r)?;
            a.m.iter()
                .flat_map(|&m| ls.iter().map(move |&l| (m * l, l)))
                .collect()
        }
        (None, Some(r)) => {
            let l1 = a
                .lambda1
                .ok_or_else(|| invalid("--lambda2-range needs --lambda1"))?;
            exp::parse_range(r)?
                .into_iter()
                .map(|l2| (l1, l2))
                .collect()
        }
        (None, None) => vec![(
            a.lambda1.ok_or_else(|| invalid("--lambda1 is required"))?,
            a.lambda2.ok_or_else(|| invalid("--lambda2 is required"))?,
        )],
    };
    let sweep = OutageSweep {
        eps: a.eps,
        deadlines: deadlines(a.t1, a.t2, a.t_range.as_deref(), a.n)?,
        rates,
    };
    let method = match a.method {
        MethodArg::Exact => OutageMethod::Exact,
        MethodArg::Bruteforce => OutageMethod::BruteForce,
        MethodArg::Mc => OutageMethod::MonteCarlo {
            policy: a.policy,
            trials: a.trials,
            seed: a.seed,
        },
    };
    let text = exp::cmd_outage(&sweep, method, a.format == Format::Json)?;
    emit_with_plot(&text, &a.out, exp::gnuplot_outage)
}

fn run_policy_compare(a: PolicyCompareArgs) -> Result<()> {
    let ts = exp::parse_int_range(&a.t_range)?;
    let rows = exp::policy_compare(&ts, a.lambda1, a.lambda2, &a.eps, a.trials, a.seed)?;
    emit_with_plot(
        &exp::policy_compare_csv(&rows, a.seed),
        &a.out,
        exp::gnuplot_policy_compare,
    )
}

fn run_region(a: RegionArgs) -> Result<()> {
    let t1 = a.t1.unwrap_or(a.pattern.len() as u32);
    emit_with_plot(
        &exp::cmd_region(&a.pattern, t1)?,
        &a.out,
        exp::gnuplot_region,
    )
}

fn run_schedule(a: ScheduleArgs) -> Result<()> {
    let len = a.pattern.len() as u32;
    let t1 = a.t1.unwrap_or(len);
    let config = DeadlineConfig::new(a.lambda1, a.lambda2, t1, a.t2.unwrap_or(len))?;
    let text = exp::cmd_schedule(a.policy, &a.pattern, &config, a.eps.as_ref())?;
    emit(&text, a.output.as_deref())
}

fn run_rate_solve(a: RateSolveArgs) -> Result<()> {
    if a.p_range.is_none() && a.t_range.is_none() && a.m.len() == 1 {
        let t1 = a.t1.ok_or_else(|| invalid("--t1 is required"))?;
        let p = a.p.ok_or_else(|| invalid("--p or --p-range is required"))?;
        let text = exp::cmd_rate_solve(&a.eps, t1, a.t2.unwrap_or(t1), p, a.m[0])?;
        if a.out.gnuplot.is_some() {
            return Err(invalid("--gnuplot applies to swept output only"));
        }
        return emit(&text, a.out.output.as_deref());
    }
    let ps = match (&a.p_range, a.p) {
        (Some(r), _) => exp::parse_range(r)?,
        (None, Some(p)) => vec![p],
        (None, None) => return Err(invalid("--p or --p-range is required")),
    };
    let ds = deadlines(a.t1, a.t2, a.t_range.as_deref(), a.n)?;
    emit_with_plot(
        &exp::rate_sweep_csv(&a.eps, &ds, &a.m, &ps)?,
        &a.out,
        exp::gnuplot_rate,
    )
}

fn run_validate(a: ValidateArgs) -> Result<()> {
    let reports = validate::run_checks(&validate::suite(a.quick));
    emit(&validate::render_table(&reports), None)?;
    match reports.iter().filter(|r| !r.passed).count() {
        0 => Ok(()),
        n => Err(Error::OracleMismatch(format!(
            "{n} validation checks failed"
        ))),
    }
}

fn run() -> Result<()> {
    let args = expand_config(std::env::args_os().collect())?;
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    configure_threads()?;
    match cli.command {
        Command::Outage(a) => run_outage(a),
        Command::PolicyCompare(a) => run_policy_compare(a),
        Command::Region(a) => run_region(a),
        Command::Schedule(a) => run_schedule(a),
        Command::RateSolve(a) => run_rate_solve(a),
        Command::Validate(a) => run_validate(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
