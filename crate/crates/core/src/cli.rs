//! Command-line front end. Every subcommand reads its inputs, calls into the
//! library and writes canonical JSON or CSV; files written with `--out` get
//! a `<out>.manifest.json` next to them.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::canonical::to_canonical_string;
use crate::channels::{
    blahut_arimoto_capacity, blahut_arimoto_capacity_with_cost, CostFunction, DEFAULT_CAPACITY_TOL, DEFAULT_MAX_ITER,
};
use crate::codec::{effective_support_audit, feasibility_report, representation_rate, EmbeddingSpace, FeasibilityInputs};
use crate::collapse::{collapse_report, DEFAULT_COLLAPSE_TOL};
use crate::formats::{self, format_float};
use crate::prob::entropy;
use crate::rate_distortion::rd_curve;
use crate::sims::{simulate, ExperimentConfig, ExperimentReport, Theorem};
use crate::sources::{empirical_entropy_rate, Source};
use crate::typicality::enumerate_typical_set;
use crate::Error;

/// Environment variable that redirects relative `--out` paths.
pub const OUT_DIR_ENV: &str = "REPCAP_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "repcap", version, about = "Information-theoretic limits of representations, computed and simulated")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy rate of an i.i.d. or Markov source.
    Entropy(EntropyArgs),
    /// Enumerate the typical set and check the AEP bounds.
    TypicalSet(TypicalSetArgs),
    /// Channel capacity by Blahut-Arimoto.
    Capacity(CapacityArgs),
    /// Rate-distortion curve.
    RdCurve(RdCurveArgs),
    /// Representation rate of an embedding space, with optional feasibility checks.
    Rate(RateArgs),
    /// Effective support of an embedding dump.
    AuditSupport(AuditArgs),
    /// Collapse and simplex-ETF diagnostics of labeled embeddings.
    CollapseAudit(CollapseArgs),
    /// Run a random-coding experiment from a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when absent.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct EntropyArgs {
    #[arg(long)]
    source: PathBuf,
    /// Read the source file as a transition matrix.
    #[arg(long)]
    markov: bool,
    /// Block length for a Monte Carlo estimate alongside the exact rate.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct TypicalSetArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    markov: bool,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    /// Member list as CSV; the summary JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CAPACITY_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Per-input cost table, "symbol,cost".
    #[arg(long, requires = "budget")]
    cost: Option<PathBuf>,
    #[arg(long, requires = "cost")]
    budget: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RdCurveArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    distortion: PathBuf,
    #[arg(long, default_value_t = 33)]
    points: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RateArgs {
    /// Embedding dimension.
    #[arg(long)]
    q: usize,
    /// Bits per coordinate.
    #[arg(long)]
    bits: u32,
    /// Input length.
    #[arg(long)]
    n: usize,
    /// Source entropy rate in bits per symbol; enables the feasibility checks.
    #[arg(long)]
    entropy: Option<f64>,
    /// Slack added to the entropy in the coverage check.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    channel_mi: Option<f64>,
    #[arg(long)]
    rd_mi: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CollapseArgs {
    #[arg(long)]
    embeddings: PathBuf,
    /// Collapse tolerance relative to the global embedding scale.
    #[arg(long, default_value_t = DEFAULT_COLLAPSE_TOL)]
    collapse_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(value_enum)]
    theorem: TheoremArg,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Plot-ready curve, one row per (n, rate).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TheoremArg {
    Thm3,
    Thm4,
    Thm5,
    Thm6,
    Thm7,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::Thm3 => Theorem::Thm3,
            TheoremArg::Thm4 => Theorem::Thm4,
            TheoremArg::Thm5 => Theorem::Thm5,
            TheoremArg::Thm6 => Theorem::Thm6,
            TheoremArg::Thm7 => Theorem::Thm7,
        }
    }
}

/// Provenance written next to every output file.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    /// sha256 of the exact bytes read, by path.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

enum Failure {
    Usage(String),
    Computation(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Computation(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Run {
    manifest: RunManifest,
    stdout: Vec<u8>,
}

impl Run {
    fn new(subcommand: &str) -> Self {
        Run {
            manifest: RunManifest {
                subcommand: subcommand.into(),
                config: Value::Null,
                seed: None,
                tool_version: env!("CARGO_PKG_VERSION"),
                inputs: BTreeMap::new(),
                outputs: Vec::new(),
            },
            stdout: Vec::new(),
        }
    }

    fn read(&mut self, path: &Path) -> Outcome<String> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let digest = Sha256::digest(&bytes);
        let hex = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        self.manifest.inputs.insert(path.display().to_string(), hex);
        String::from_utf8(bytes)
            .map_err(|_| Failure::Computation(Error::Parse(format!("{}: not valid UTF-8", path.display()))))
    }

    /// Writes `content` to `out` (and a manifest beside it) or to stdout.
    fn emit(&mut self, out: Option<&Path>, content: &str) -> Outcome<()> {
        match out {
            None => {
                self.stdout.extend_from_slice(content.as_bytes());
                Ok(())
            }
            Some(p) => {
                let path = resolve_out(p);
                write_file(&path, content)?;
                self.manifest.outputs.push(path.display().to_string());
                Ok(())
            }
        }
    }

    fn finish(&self) -> Outcome<()> {
        let Some(first) = self.manifest.outputs.first() else { return Ok(()) };
        let path = PathBuf::from(format!("{first}.manifest.json"));
        write_file(&path, &to_canonical_string(&self.manifest)?)
    }
}

fn write_file(path: &Path, content: &str) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn resolve_out(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() && !dir.is_empty() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn format_of(o: &OutputArgs, allowed_csv: bool) -> Outcome<Format> {
    let f = o.format.unwrap_or_else(|| match o.out.as_ref().and_then(|p| p.extension()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
        _ => Format::Json,
    });
    if f == Format::Csv && !allowed_csv {
        return Err(Failure::Usage("this subcommand only writes JSON".into()));
    }
    Ok(f)
}

fn source_json(source: &Source) -> Value {
    json!({
        "kind": if source.is_memoryless() { "iid" } else { "markov" },
        "alphabet": source.alphabet().symbols(),
        "marginal": source.marginal().probs(),
    })
}

fn cmd_entropy(a: EntropyArgs, run: &mut Run) -> Outcome<()> {
    format_of(&a.output, false)?;
    let text = run.read(&a.source)?;
    let source = formats::parse_source(&text, a.markov)?;
    let mut report = json!({
        "source": source_json(&source),
        "entropy_rate": source.entropy_rate(),
        "marginal_entropy": entropy(source.marginal()),
    });
    if let Some(n) = a.n {
        let emp = empirical_entropy_rate(&source, n, a.trials, a.seed)?;
        report["empirical"] = json!({"n": n, "trials": a.trials, "seed": a.seed, "mean": emp.mean, "std": emp.std});
        run.manifest.seed = Some(a.seed);
    }
    run.manifest.config = json!({"markov": a.markov, "n": a.n, "trials": a.trials});
    run.emit(a.output.out.as_deref(), &to_canonical_string(&report)?)
}

fn cmd_typical_set(a: TypicalSetArgs, run: &mut Run) -> Outcome<()> {
    let text = run.read(&a.source)?;
    let source = formats::parse_source(&text, a.markov)?;
    let set = enumerate_typical_set(&source, a.n, a.epsilon)?;
    let aep = set.check_aep();
    if let Some(out) = &a.out {
        run.emit(Some(out), &formats::typical_set_csv(&set, source.alphabet()))?;
    }
    run.manifest.config = json!({"markov": a.markov, "n": a.n, "epsilon": a.epsilon});
    let summary = json!({
        "n": a.n,
        "epsilon": a.epsilon,
        "entropy_rate": set.source_entropy_rate,
        "size": set.len(),
        "mass": set.total_prob,
        "aep": aep,
        "all_bounds_hold": aep.all_hold(),
    });
    run.emit(None, &to_canonical_string(&summary)?)
}

fn cmd_capacity(a: CapacityArgs, run: &mut Run) -> Outcome<()> {
    format_of(&a.output, false)?;
    let text = run.read(&a.channel)?;
    let channel = formats::parse_channel(&text)?;
    run.manifest.config = json!({"tol": a.tol, "max_iter": a.max_iter, "budget": a.budget});
    let symbols = json!({
        "input_symbols": channel.input_alphabet().symbols(),
        "output_symbols": channel.output_alphabet().symbols(),
    });
    let mut failed = None;
    let mut report = match (&a.cost, a.budget) {
        (Some(cost_path), Some(budget)) => {
            let cost_text = run.read(cost_path)?;
            let cost = formats::parse_cost(&cost_text, channel.input_alphabet())?;
            let cost = CostFunction::per_input(&channel, &cost);
            serde_json::to_value(blahut_arimoto_capacity_with_cost(&channel, &cost, budget, a.tol, a.max_iter)?)
                .map_err(|e| Error::Parse(e.to_string()))?
        }
        _ => match blahut_arimoto_capacity(&channel, a.tol, a.max_iter) {
            Ok(r) => serde_json::to_value(r).map_err(|e| Error::Parse(e.to_string()))?,
            Err(Error::CapacityNotConverged(best)) => {
                failed = Some(Error::CapacityNotConverged(best.clone()));
                let mut v = serde_json::to_value(*best).map_err(|e| Error::Parse(e.to_string()))?;
                // the bracket is kept; the point estimate is not trustworthy
                v["capacity_bits"] = Value::Null;
                v
            }
            Err(e) => return Err(e.into()),
        },
    };
    report["converged"] = Value::Bool(failed.is_none());
    report["channel"] = symbols;
    let mut text = to_canonical_string(&report)?;
    if let Some(e) = &failed {
        let mut v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        v["warnings"] = json!([format!("{e}; capacity_bits written as null")]);
        text = to_canonical_string(&v)?;
    }
    run.emit(a.output.out.as_deref(), &text)?;
    match failed {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn cmd_rd_curve(a: RdCurveArgs, run: &mut Run) -> Outcome<()> {
    let format = format_of(&a.output, true)?;
    let source = formats::parse_pmf(&run.read(&a.source)?)?;
    let measure = formats::parse_distortion(&run.read(&a.distortion)?)?;
    let points = rd_curve(&source, &measure, a.points)?;
    run.manifest.config = json!({"points": a.points});
    let text = match format {
        Format::Csv => formats::rd_curve_csv(&points),
        Format::Json => to_canonical_string(&json!({ "points": points }))?,
    };
    run.emit(a.output.out.as_deref(), &text)
}

fn cmd_rate(a: RateArgs, run: &mut Run) -> Outcome<()> {
    let space = EmbeddingSpace::new(a.q, a.bits)?;
    let rate = representation_rate(&space, a.n)?;
    run.manifest.config = json!({"q": a.q, "bits": a.bits, "n": a.n, "entropy": a.entropy});
    let Some(format) = a.output.format.or(a.entropy.map(|_| Format::Json)) else {
        return run.emit(a.output.out.as_deref(), &format!("{}\n", format_float(rate)));
    };
    if format == Format::Csv {
        return Err(Failure::Usage("rate writes JSON or a bare number".into()));
    }
    let mut report = json!({
        "q": a.q,
        "bits_per_coord": a.bits,
        "n": a.n,
        "embedding_bits": space.capacity_bits(),
        "representation_rate": rate,
    });
    if let Some(h) = a.entropy {
        let inputs = FeasibilityInputs {
            source_entropy: h,
            epsilon_z: a.epsilon,
            channel_mutual_information: a.channel_mi,
            rd_mutual_information: a.rd_mi,
            output: None,
        };
        report["feasibility"] =
            serde_json::to_value(feasibility_report(&space, a.n, &inputs)?).map_err(|e| Error::Parse(e.to_string()))?;
    }
    run.emit(a.output.out.as_deref(), &to_canonical_string(&report)?)
}

fn cmd_audit(a: AuditArgs, run: &mut Run) -> Outcome<()> {
    format_of(&a.output, false)?;
    let data = formats::parse_embeddings(&run.read(&a.embeddings)?)?;
    let z: Vec<&[f64]> = data.rows().iter().map(|r| r.z.as_slice()).collect();
    let audit = effective_support_audit(&z)?;
    run.emit(a.output.out.as_deref(), &to_canonical_string(&audit)?)
}

fn cmd_collapse(a: CollapseArgs, run: &mut Run) -> Outcome<()> {
    format_of(&a.output, false)?;
    let data = formats::parse_embeddings(&run.read(&a.embeddings)?)?;
    let report = collapse_report(&data, a.collapse_tol)?;
    run.manifest.config = json!({"collapse_tol": a.collapse_tol});
    run.emit(a.output.out.as_deref(), &to_canonical_string(&report)?)
}

/// Plot-ready rows: one per (n, rate).
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out =
        String::from("n,rate,error_rate,error_ci_low,error_ci_high,mean_distortion,distortion_ci_low,distortion_ci_high\n");
    let f = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            format_float(r.rate),
            format_float(r.error_rate),
            format_float(r.error_ci.low),
            format_float(r.error_ci.high),
            f(r.mean_distortion),
            f(r.distortion_ci.map(|c| c.low)),
            f(r.distortion_ci.map(|c| c.high)),
        ));
    }
    out
}

fn cmd_simulate(a: SimulateArgs, run: &mut Run) -> Outcome<()> {
    let format = format_of(&a.output, true)?;
    let text = run.read(&a.config)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    let wanted: Theorem = a.theorem.into();
    if config.theorem != wanted {
        return Err(Failure::Usage(format!(
            "config is for {} but the subcommand asked for {}",
            config.theorem.name(),
            wanted.name()
        )));
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(e) = a.epsilon {
        config.epsilon = Some(e);
    }
    config.validate()?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let report = simulate(&config, workers)?;
    run.manifest.seed = Some(config.seed);
    run.manifest.config = serde_json::to_value(&config).map_err(|e| Error::Parse(e.to_string()))?;
    let body = match format {
        Format::Json => to_canonical_string(&report)?,
        Format::Csv => report_csv(&report),
    };
    run.emit(a.output.out.as_deref(), &body)?;
    if let Some(csv) = &a.csv {
        run.emit(Some(csv), &report_csv(&report))?;
    }
    Ok(())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
/// Standard output and error go to the given writers.
pub fn run_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, stdout: &mut impl std::io::Write, stderr: &mut impl std::io::Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let (name, result, run) = dispatch(cli);
    let result = result.and_then(|_| run.finish());
    let _ = stdout.write_all(&run.stdout);
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nUsage: repcap {name} --help");
            EXIT_USAGE
        }
        Err(Failure::Computation(e)) => {
            let _ = run.finish();
            let _ = writeln!(stderr, "error: {e}");
            EXIT_COMPUTATION
        }
    }
}

fn dispatch(cli: Cli) -> (&'static str, Outcome<()>, Run) {
    macro_rules! go {
        ($name:literal, $f:ident, $a:expr) => {{
            let mut run = Run::new($name);
            let r = $f($a, &mut run);
            ($name, r, run)
        }};
    }
    match cli.command {
        Command::Entropy(a) => go!("entropy", cmd_entropy, a),
        Command::TypicalSet(a) => go!("typical-set", cmd_typical_set, a),
        Command::Capacity(a) => go!("capacity", cmd_capacity, a),
        Command::RdCurve(a) => go!("rd-curve", cmd_rd_curve, a),
        Command::Rate(a) => go!("rate", cmd_rate, a),
        Command::AuditSupport(a) => go!("audit-support", cmd_audit, a),
        Command::CollapseAudit(a) => go!("collapse-audit", cmd_collapse, a),
        Command::Simulate(a) => go!("simulate", cmd_simulate, a),
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
