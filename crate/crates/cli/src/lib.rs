//! Command-line front end for the schatten-lab inequality and channel
//! experiments.

pub mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schatten_lab::blockmat::{BlockInput, BlockWire};
use schatten_lab::channel::{
    entangled_lower_bound, multiplicativity_gap, nu_p, s_min, scan_threshold, ChannelSpec, KrausChannel, OptConfig,
};
use schatten_lab::inequality::{
    check_gross, check_hanner_form, check_holder, check_theorem1, check_theorem2, fuzz_suite, run_trial, summarize,
    CheckRecord, FuzzSpec, FuzzTarget, SamplerChoice,
};
use schatten_lab::{Error, SchattenExponent};
use serde::Serialize;
use serde_json::json;

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Violation = 1,
    Config = 2,
    Numerical = 3,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("{0}")]
    Lab(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn config(field: &'static str, message: impl Into<String>) -> Self {
        Self::Config { field, message: message.into() }
    }

    pub fn status(&self) -> Status {
        match self {
            Self::Lab(e) if e.is_numerical() => Status::Numerical,
            _ => Status::Config,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "schatten-lab", version, about = "Numerical checks of Schatten-norm block inequalities and channel p-norms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seeded fuzz campaign over one inequality.
    Fuzz(FuzzArgs),
    /// Evaluate one instance, from a block file or regenerated from a trial seed.
    Check(CheckArgs),
    /// Maximal output p-norm of a channel.
    NuP(NuArgs),
    /// Minimal output entropy of a channel.
    Smin(ChannelArgs),
    /// Multiplicativity gap of a product channel.
    Gap(GapArgs),
    /// Scan the entangled witness against the product value over a p range.
    ScanThreshold(ScanArgs),
    /// Aggregate JSONL record files into a min-margin table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed; drawn at random and printed when absent.
    #[arg(long, env = "SCHATTEN_LAB_SEED")]
    pub seed: Option<u64>,
    /// Output file (written atomically); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub inequality: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value = "1,2,3,4")]
    pub dims: String,
    /// Comma list of exponents ("inf" allowed) or "default".
    #[arg(long, default_value = "default")]
    pub p_grid: String,
    #[arg(long, default_value = "mixed")]
    pub sampler: String,
    #[arg(long, default_value_t = schatten_lab::tolerance::MARGIN_REL)]
    pub tol_rel: f64,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub inequality: String,
    /// Comma list of exponents ("inf" allowed) or "default".
    #[arg(long, default_value = "default")]
    pub p_grid: String,
    /// Block JSON file `{"n", "X", "Y", "W"?, "Z"}`.
    #[arg(long, conflicts_with_all = ["a", "n"])]
    pub input: Option<PathBuf>,
    /// Scalars for the two-point inequality.
    #[arg(long, requires = "b", allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, requires = "a", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Dimension of a regenerated trial.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "mixed")]
    pub sampler: String,
    #[arg(long, default_value_t = schatten_lab::tolerance::MARGIN_REL)]
    pub tol_rel: f64,
}

#[derive(Debug, Args)]
pub struct OptArgs {
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[command(flatten)]
    pub common: Common,
    /// Channel JSON, e.g. '{"kind":"depolarizing","lambda":0.5}'.
    #[arg(long)]
    pub channel: String,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Debug, Args)]
pub struct NuArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub p: String,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Second factor; defaults to the first.
    #[arg(long)]
    pub channel2: Option<String>,
    #[arg(long)]
    pub p: String,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub p_from: f64,
    #[arg(long)]
    pub p_to: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSONL record files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: ReportFormat,
}

pub fn parse_p_grid(s: &str, target: FuzzTarget) -> CliResult<Vec<SchattenExponent>> {
    if s.trim().eq_ignore_ascii_case("default") {
        return Ok(target.default_grid());
    }
    s.split(',')
        .map(|t| t.parse::<SchattenExponent>().map_err(|e| CliError::config("--p-grid", e.to_string())))
        .collect()
}

pub fn parse_dims(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config("--dims", format!("invalid dimension {t:?}")))
        })
        .collect()
}

fn parse_exponent(field: &'static str, s: &str) -> CliResult<SchattenExponent> {
    s.parse().map_err(|e: Error| CliError::config(field, e.to_string()))
}

fn parse_channel(field: &'static str, s: &str) -> CliResult<KrausChannel> {
    let spec: ChannelSpec = s.parse().map_err(|e: Error| CliError::config(field, e.to_string()))?;
    spec.build().map_err(|e| CliError::config(field, e.to_string()))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

/// Writes `body` to `path` through a temporary file in the same
/// directory, or to stdout.
pub fn write_output(path: Option<&Path>, body: &str) -> CliResult<()> {
    let Some(path) = path else {
        io::stdout().write_all(body.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        return Ok(());
    };
    let io_err = |source| CliError::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(body.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn header(command: &str, seed: Option<u64>, extra: serde_json::Value) -> String {
    let mut h = json!({
        "command": command,
        "created": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    });
    if let Some(s) = seed {
        h["seed"] = json!(s);
    }
    if let (Some(h), Some(extra)) = (h.as_object_mut(), extra.as_object()) {
        h.extend(extra.clone());
    }
    json!({ "header": h }).to_string()
}

fn jsonl(header: String, records: &[CheckRecord]) -> String {
    let mut out = header;
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

fn status_of(records: &[CheckRecord]) -> Status {
    if records.iter().any(|r| !r.pass && r.error.is_none()) {
        Status::Violation
    } else if records.iter().any(|r| r.is_numerical_error()) {
        Status::Numerical
    } else if records.iter().any(|r| !r.pass) {
        Status::Violation
    } else {
        Status::Ok
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::config("--jobs", "must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::config("--jobs", e.to_string())),
    }
}

fn fuzz(args: &FuzzArgs) -> CliResult<Status> {
    let target: FuzzTarget = args.inequality.parse().map_err(|e: Error| CliError::config("--inequality", e.to_string()))?;
    let sampler: SamplerChoice = args.sampler.parse().map_err(|e: Error| CliError::config("--sampler", e.to_string()))?;
    if args.common.jobs == Some(0) {
        return Err(CliError::config("--jobs", "must be at least 1"));
    }
    let dims = parse_dims(&args.dims)?;
    let p_grid = parse_p_grid(&args.p_grid, target)?;
    let seed = resolve_seed(args.common.seed);
    let spec = FuzzSpec {
        target,
        trials: args.trials,
        dims,
        p_grid,
        seed,
        sampler,
        tol_rel: args.tol_rel,
        jobs: args.common.jobs,
    };
    spec.validate().map_err(|e| CliError::config("fuzz", e.to_string()))?;
    let records = fuzz_suite(&spec)?;
    let summary = summarize(&spec, &records);
    let body = match args.format {
        Format::Jsonl => jsonl(header("fuzz", Some(seed), json!({ "spec": spec })), &records),
        Format::Csv => report::csv(&report::aggregate(&records)),
    };
    write_output(args.common.out.as_deref(), &body)?;
    eprintln!(
        "{}",
        json!({
            "inequality_id": summary.inequality_id,
            "trials": summary.trials,
            "failures": summary.failures,
            "min_margin": summary.min_margin,
            "p_grid": summary.p_grid,
            "seed": seed,
        })
    );
    Ok(status_of(&records))
}

fn check(args: &CheckArgs) -> CliResult<Status> {
    let target: FuzzTarget = args.inequality.parse().map_err(|e: Error| CliError::config("--inequality", e.to_string()))?;
    let grid = parse_p_grid(&args.p_grid, target)?;
    let mut seed_used = None;
    let records: Vec<CheckRecord> = if let Some(path) = &args.input {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let wire: BlockWire = serde_json::from_str(&text).map_err(|e| CliError::config("--input", e.to_string()))?;
        let block = wire.into_block().map_err(|e| CliError::config("--input", e.to_string()))?;
        grid.iter()
            .map(|&p| check_block(target, &block, p))
            .collect::<CliResult<Vec<_>>>()?
    } else if let (Some(a), Some(b)) = (args.a, args.b) {
        if target != FuzzTarget::Gross {
            return Err(CliError::config("--a", "scalar inputs apply to the gross inequality only"));
        }
        grid.iter()
            .map(|&p| check_gross(a, b, p.value()).map(|r| r.rejudge(args.tol_rel)).map_err(CliError::from))
            .collect::<CliResult<Vec<_>>>()?
    } else {
        let n = args.n.ok_or_else(|| CliError::config("--n", "give --input, --a/--b, or --n with --seed"))?;
        let sampler: SamplerChoice = args.sampler.parse().map_err(|e: Error| CliError::config("--sampler", e.to_string()))?;
        let seed = resolve_seed(args.common.seed);
        seed_used = Some(seed);
        run_trial(target, sampler, n, seed, &grid, args.tol_rel)
    };
    let records: Vec<CheckRecord> = records.into_iter().map(|r| r.rejudge(args.tol_rel)).collect();
    let body = jsonl(header("check", seed_used, json!({ "inequality": target })), &records);
    write_output(args.common.out.as_deref(), &body)?;
    Ok(status_of(&records))
}

fn check_block(target: FuzzTarget, block: &BlockInput, p: SchattenExponent) -> CliResult<CheckRecord> {
    let mismatch = || CliError::config("--input", format!("{target} needs a {} block", if target == FuzzTarget::Thm2 { "general (with W)" } else { "positive (without W)" }));
    match (target, block) {
        (FuzzTarget::Thm1, BlockInput::Positive(b)) => Ok(check_theorem1(b, p)),
        (FuzzTarget::Holder, BlockInput::Positive(b)) => Ok(check_holder(b, p)),
        (FuzzTarget::Hanner, BlockInput::Positive(b)) => Ok(check_hanner_form(b, p)?),
        (FuzzTarget::Thm2, BlockInput::General(b)) => Ok(check_theorem2(b, p.value())?),
        (FuzzTarget::Thm2, BlockInput::Positive(b)) => Ok(check_theorem2(&b.to_general(), p.value())?),
        (FuzzTarget::Thm1 | FuzzTarget::Holder | FuzzTarget::Hanner, _) => Err(mismatch()),
        _ => Err(CliError::config("--inequality", format!("{target} cannot be checked from a block file; use --n and --seed"))),
    }
}

fn opt_config(opt: &OptArgs, seed: u64) -> CliResult<OptConfig> {
    if opt.restarts == 0 {
        return Err(CliError::config("--restarts", "must be at least 1"));
    }
    if opt.tol.is_nan() || opt.tol < 0.0 {
        return Err(CliError::config("--tol", "must be nonnegative"));
    }
    Ok(OptConfig { restarts: opt.restarts, max_iters: opt.max_iters, tol: opt.tol, seed })
}

fn emit<T: Serialize>(common: &Common, command: &str, seed: u64, value: &T) -> CliResult<()> {
    let mut v = serde_json::to_value(value).expect("results serialize");
    v["seed"] = json!(seed);
    v["command"] = json!(command);
    write_output(common.out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&v).expect("json")))
}

fn nu(args: &NuArgs) -> CliResult<Status> {
    let c = &args.channel;
    let channel = parse_channel("--channel", &c.channel)?;
    let p = parse_exponent("--p", &args.p)?;
    let seed = resolve_seed(c.common.seed);
    let cfg = opt_config(&c.opt, seed)?;
    let result = with_pool(c.common.jobs, || nu_p(&channel, p, &cfg))??;
    emit(&c.common, "nu-p", seed, &json!({ "p": p, "result": result }))?;
    Ok(if result.converged { Status::Ok } else { Status::Numerical })
}

fn smin(args: &ChannelArgs) -> CliResult<Status> {
    let channel = parse_channel("--channel", &args.channel)?;
    let seed = resolve_seed(args.common.seed);
    let cfg = opt_config(&args.opt, seed)?;
    let result = with_pool(args.common.jobs, || s_min(&channel, &cfg))??;
    emit(&args.common, "smin", seed, &json!({ "result": result }))?;
    Ok(if result.converged { Status::Ok } else { Status::Numerical })
}

fn gap(args: &GapArgs) -> CliResult<Status> {
    let c = &args.channel;
    let first = parse_channel("--channel", &c.channel)?;
    let second = match &args.channel2 {
        Some(s) => parse_channel("--channel2", s)?,
        None => first.clone(),
    };
    let p = parse_exponent("--p", &args.p)?;
    let seed = resolve_seed(c.common.seed);
    let cfg = opt_config(&c.opt, seed)?;
    let record = with_pool(c.common.jobs, || multiplicativity_gap(&first, &second, p, &cfg))??;
    let witness = entangled_lower_bound(&first, &second, p).ok();
    emit(&c.common, "gap", seed, &json!({ "gap": record, "entangled_lower_bound": witness }))?;
    Ok(Status::Ok)
}

fn scan(args: &ScanArgs) -> CliResult<Status> {
    let c = &args.channel;
    let channel = parse_channel("--channel", &c.channel)?;
    let seed = resolve_seed(c.common.seed);
    let cfg = opt_config(&c.opt, seed)?;
    let result = with_pool(c.common.jobs, || scan_threshold(&channel, args.p_from, args.p_to, args.step, &cfg))?
        .map_err(|e| match e {
            Error::Parse(m) => CliError::config("--p-from/--p-to/--step", m),
            e => e.into(),
        })?;
    match result.first_positive {
        Some(p) => eprintln!("first p with positive gap: {p:.2}"),
        None => eprintln!("no positive gap on the scanned range"),
    }
    emit(&c.common, "scan-threshold", seed, &result)?;
    Ok(Status::Ok)
}

fn report_cmd(args: &ReportArgs) -> CliResult<Status> {
    let mut records = Vec::new();
    let mut seeds = Vec::new();
    for path in &args.inputs {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let (mut r, s) = report::parse_jsonl(&text).map_err(|m| CliError::config("report", format!("{}: {m}", path.display())))?;
        records.append(&mut r);
        seeds.extend(s);
    }
    let rows = report::aggregate(&records);
    let body = match args.format {
        ReportFormat::Markdown => report::markdown(&rows, &seeds),
        ReportFormat::Csv => report::csv(&rows),
    };
    write_output(args.out.as_deref(), &body)?;
    Ok(status_of(&records))
}

pub fn run(cli: &Cli) -> CliResult<Status> {
    match &cli.command {
        Command::Fuzz(a) => fuzz(a),
        Command::Check(a) => check(a),
        Command::NuP(a) => nu(a),
        Command::Smin(a) => smin(a),
        Command::Gap(a) => gap(a),
        Command::ScanThreshold(a) => scan(a),
        Command::Report(a) => report_cmd(a),
    }
}

/// Runs the CLI and maps errors to exit codes.
pub fn main_with(cli: Cli) -> ExitCode {
    match run(&cli) {
        Ok(s) => s.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.status().into()
        }
    }
}
