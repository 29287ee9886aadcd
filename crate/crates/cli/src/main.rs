//! `entrokit` command-line tool.
//!
//! Computes generalized Tsallis entropies, divergences and metrics of
//! distributions given as JSON or CSV, and runs seeded property sweeps.
//!
//! # Usage
//!
//! ```text
//! entrokit entropy     --k 0.25 --r 1 --input '{"p":[0.25,0.25,0.25,0.25]}'
//! entrokit joint       --k 0.25 --r 1 --input joint.csv
//! entrokit conditional --k 0.25 --r 1 --input '{"m":[[0.5,0],[0.25,0.25]]}' --direction x-given-y
//! entrokit mutual      --k 0.25 --r 1 --input joint.json --kind divergence
//! entrokit divergence  --k 0.25 --r 1 --p p.json --q q.json
//! entrokit metric      --k 0.25 --r 1 --input p.json --convention shifted --fd-step 1e-4
//! entrokit reduce      --k 0.25 --r 0.25 --p p.json --q q.json --target tsallis
//! entrokit verify      --trials 100 --seed 42
//! ```
//!
//! Inputs are inline JSON (anything starting with `{`), `-` for stdin, or a
//! file path; files ending in `.csv` are read as CSV.
//!
//! # Exit codes
//!
//! | Code | Meaning |
//! |------|---------|
//! | 0 | success, or every verified property passed |
//! | 1 | usage or configuration error |
//! | 2 | invalid data, parameters outside their domain, unreadable files |
//! | 3 | a verification sweep found a violation |
//!
//! Results go to stdout (or `--output`); diagnostics go to stderr. Nothing is
//! written to stdout when the exit code is nonzero.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entrokit::io::{self as eio, Format};
use entrokit::{
    Conditioning3, Convention, DeformParams, Direction, Distribution, JointDistribution2, JointDistribution3,
    ReferenceDivergence, ReferenceEntropy, RngSeed, SweepConfig,
};
use serde_json::{json, Map, Value};

#[derive(Debug, Parser)]
#[command(name = "entrokit", version, about = "Generalized Tsallis entropies, divergences and property sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy of a distribution.
    Entropy(SingleInput),
    /// Joint entropy of a two- or three-variable joint.
    Joint(SingleInput),
    /// Conditional entropy of a joint.
    Conditional(ConditionalArgs),
    /// Mutual information of a two-variable joint.
    Mutual(MutualArgs),
    /// Divergence D(P || Q).
    Divergence(PairInput),
    /// Metric diagonal at a point of the simplex.
    Metric(MetricArgs),
    /// Compare a generalized value with its Tsallis, Shannon or Kullback-Leibler counterpart.
    Reduce(ReduceArgs),
    /// Run a seeded property sweep.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    k: f64,
    #[arg(long, allow_hyphen_values = true)]
    r: f64,
    /// Accept any finite k != 0 and any finite r.
    #[arg(long)]
    relaxed: bool,
    /// Rescale non-negative weights to sum to one.
    #[arg(long)]
    normalize: bool,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SingleInput {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: String,
}

#[derive(Debug, Args)]
struct PairInput {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p: String,
    #[arg(long)]
    q: String,
}

#[derive(Debug, Args)]
struct ConditionalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: String,
    /// Conditioning for two-variable joints.
    #[arg(long, value_enum, conflicts_with = "mode")]
    direction: Option<DirectionArg>,
    /// Conditioning for three-variable joints.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
struct MutualArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value_t = MutualKind::Entropy)]
    kind: MutualKind,
}

#[derive(Debug, Args)]
struct MetricArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value_t = ConventionArg::Derived)]
    convention: ConventionArg,
    /// Also report the central-difference Hessian of the divergence with this step.
    #[arg(long)]
    fd_step: Option<f64>,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p: String,
    /// Second distribution; switches from entropy to divergence.
    #[arg(long)]
    q: Option<String>,
    #[arg(long, value_enum)]
    target: Target,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, env = "ENTROKIT_SEED")]
    seed: Option<u64>,
    /// Tolerance for both identities and inequalities.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    identity_tol: Option<f64>,
    #[arg(long)]
    inequality_tol: Option<f64>,
    /// Comma-separated property names; all when omitted.
    #[arg(long, value_delimiter = ',')]
    properties: Vec<String>,
    #[arg(long)]
    size_min: Option<usize>,
    #[arg(long)]
    size_max: Option<usize>,
    #[arg(long)]
    k_min: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    max_failures: Option<usize>,
    /// Sweep configuration as JSON; flags override its fields.
    #[arg(long)]
    config: Option<String>,
    /// Print the property registry and exit.
    #[arg(long)]
    list: bool,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    YGivenX,
    XGivenY,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    XyGivenZ,
    YGivenXz,
    XGivenZ,
    YGivenZ,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MutualKind {
    Entropy,
    Divergence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Derived,
    Shifted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Target {
    Tsallis,
    Shannon,
    Kl,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Violation { report: String, output: Option<PathBuf> },
}

impl From<entrokit::Error> for CliError {
    fn from(e: entrokit::Error) -> Self {
        match e {
            entrokit::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Violation { report, output }) => {
            match output {
                Some(path) => {
                    if let Err(e) = fs::write(&path, report) {
                        eprintln!("error: writing {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    eprintln!("verification failed; report written to {}", path.display());
                }
                None => eprint!("{report}"),
            }
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Entropy(a) => {
            let params = params(&a.common)?;
            let p = read_distribution(&a.input, a.common.normalize)?;
            let mut rec = Map::new();
            rec.insert("value".into(), json!(entrokit::entropy(&p, &params).value));
            emit(&rec, &a.common)
        }
        Command::Joint(a) => {
            let params = params(&a.common)?;
            let value = match read_joint(&a.input, a.common.normalize)? {
                Joint::Two(j) => entrokit::joint_entropy(&j, &params).value,
                Joint::Three(t) => entrokit::joint_entropy(&t, &params).value,
            };
            let mut rec = Map::new();
            rec.insert("value".into(), json!(value));
            emit(&rec, &a.common)
        }
        Command::Conditional(a) => {
            let params = params(&a.common)?;
            let value = match (read_joint(&a.input, a.common.normalize)?, a.direction, a.mode) {
                (Joint::Two(_), _, Some(_)) => {
                    return Err(CliError::Usage("--mode applies to three-variable joints; use --direction".into()))
                }
                (Joint::Two(j), d, None) => {
                    let d = match d.unwrap_or(DirectionArg::YGivenX) {
                        DirectionArg::YGivenX => Direction::YGivenX,
                        DirectionArg::XGivenY => Direction::XGivenY,
                    };
                    entrokit::conditional_entropy(&j, &params, d).value
                }
                (Joint::Three(_), Some(_), _) => {
                    return Err(CliError::Usage("--direction applies to two-variable joints; use --mode".into()))
                }
                (Joint::Three(t), None, m) => {
                    let m = match m.ok_or_else(|| CliError::Usage("three-variable joints need --mode".into()))? {
                        ModeArg::XyGivenZ => Conditioning3::XYGivenZ,
                        ModeArg::YGivenXz => Conditioning3::YGivenXZ,
                        ModeArg::XGivenZ => Conditioning3::XGivenZ,
                        ModeArg::YGivenZ => Conditioning3::YGivenZ,
                    };
                    entrokit::conditional_entropy3(&t, &params, m).value
                }
            };
            let mut rec = Map::new();
            rec.insert("value".into(), json!(value));
            emit(&rec, &a.common)
        }
        Command::Mutual(a) => {
            let params = params(&a.common)?;
            let j = match read_joint(&a.input, a.common.normalize)? {
                Joint::Two(j) => j,
                Joint::Three(_) => return Err(CliError::Usage("mutual information needs a two-variable joint".into())),
            };
            let mut rec = Map::new();
            match a.kind {
                MutualKind::Entropy => {
                    rec.insert("value".into(), json!(entrokit::mutual_entropy(&j, &params)));
                }
                MutualKind::Divergence => {
                    let d = entrokit::mutual_divergence(&j, &params)?;
                    warn_degenerate(&d);
                    rec.insert("value".into(), json!(d.value));
                    rec.insert("support".into(), json!(d.support));
                }
            }
            emit(&rec, &a.common)
        }
        Command::Divergence(a) => {
            let params = params(&a.common)?;
            let p = read_distribution(&a.p, a.common.normalize)?;
            let q = read_distribution(&a.q, a.common.normalize)?;
            let d = entrokit::divergence(&p, &q, &params)?;
            warn_degenerate(&d);
            let mut rec = Map::new();
            rec.insert("value".into(), json!(d.value));
            rec.insert("support".into(), json!(d.support));
            emit(&rec, &a.common)
        }
        Command::Metric(a) => {
            let params = params(&a.common)?;
            let p = read_distribution(&a.input, a.common.normalize)?;
            let convention = match a.convention {
                ConventionArg::Derived => Convention::Derived,
                ConventionArg::Shifted => Convention::Shifted,
            };
            let metric = entrokit::fisher_metric(&p, &params, convention)?;
            let mut rec = Map::new();
            rec.insert("g".into(), json!(metric.g));
            rec.insert("convention".into(), json!(metric.convention));
            if let Some(step) = a.fd_step {
                rec.insert("fd_hessian".into(), json!(entrokit::fd_hessian(&p, &params, step)?));
            }
            emit(&rec, &a.common)
        }
        Command::Reduce(a) => reduce(a),
        Command::Verify(a) => verify(a),
    }
}

fn reduce(a: ReduceArgs) -> CliResult<()> {
    let params = params(&a.common)?;
    let p = read_distribution(&a.p, a.common.normalize)?;
    let q = a.q.as_deref().map(|q| read_distribution(q, a.common.normalize)).transpose()?;
    let (k, r) = (params.k(), params.r());
    let (generalized, reference, index) = match (a.target, &q) {
        (Target::Tsallis, _) if k != r => {
            return Err(CliError::Data(format!("parameter error: Tsallis reduction needs k = r, got k={k}, r={r}")))
        }
        (Target::Tsallis, None) => {
            let q_index = 1.0 + 2.0 * k;
            let reference = entrokit::reference_entropy(&p, ReferenceEntropy::Tsallis(q_index))?;
            (entrokit::entropy(&p, &params).value, reference, Some(q_index))
        }
        (Target::Tsallis, Some(q)) => {
            let q_index = 1.0 - 2.0 * k;
            let reference = entrokit::reference_divergence(&p, q, ReferenceDivergence::Tsallis(q_index))?;
            (entrokit::divergence(&p, q, &params)?.value, reference, Some(q_index))
        }
        (Target::Shannon, None) => {
            let reference = entrokit::reference_entropy(&p, ReferenceEntropy::Shannon)?;
            (entrokit::entropy(&p, &params).value, reference, None)
        }
        (Target::Shannon, Some(_)) => {
            return Err(CliError::Usage("--target shannon compares entropies; drop --q or use --target kl".into()))
        }
        (Target::Kl, Some(q)) => {
            let reference = entrokit::reference_divergence(&p, q, ReferenceDivergence::Kl)?;
            (entrokit::divergence(&p, q, &params)?.value, reference, None)
        }
        (Target::Kl, None) => return Err(CliError::Usage("--target kl needs --q".into())),
    };
    let mut rec = Map::new();
    rec.insert("generalized_value".into(), json!(generalized));
    rec.insert("reference_value".into(), json!(reference));
    rec.insert("abs_diff".into(), json!((generalized - reference).abs()));
    if let Some(qi) = index {
        rec.insert("q".into(), json!(qi));
    }
    emit(&rec, &a.common)
}

fn verify(a: VerifyArgs) -> CliResult<()> {
    if a.list {
        let list = entrokit::list_properties();
        let text = match Format::from(a.format) {
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&list).map_err(|e| CliError::Data(e.to_string()))?),
            Format::Csv => {
                let mut out = String::from("name,module,kind\n");
                for p in &list {
                    out.push_str(&format!("{},{},{}\n", p.name, p.module, kind_name(p.kind)));
                }
                out
            }
        };
        return write_out(&text, a.output.as_deref());
    }
    let mut cfg = match &a.config {
        Some(src) => {
            let text = load(src)?;
            serde_json::from_str::<SweepConfig>(&text).map_err(|e| CliError::Usage(format!("sweep config: {e}")))?
        }
        None => SweepConfig::default(),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = RngSeed(s);
    }
    if let Some(t) = a.tol {
        cfg.identity_tol = t;
        cfg.inequality_tol = t;
    }
    if let Some(t) = a.identity_tol {
        cfg.identity_tol = t;
    }
    if let Some(t) = a.inequality_tol {
        cfg.inequality_tol = t;
    }
    if !a.properties.is_empty() {
        cfg.properties = a.properties.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    cfg.size_range = (a.size_min.unwrap_or(cfg.size_range.0), a.size_max.unwrap_or(cfg.size_range.1));
    cfg.k_range = (a.k_min.unwrap_or(cfg.k_range.0), a.k_max.unwrap_or(cfg.k_range.1));
    cfg.r_range = (a.r_min.unwrap_or(cfg.r_range.0), a.r_max.unwrap_or(cfg.r_range.1));
    if let Some(m) = a.max_failures {
        cfg.max_failures = m;
    }

    let report = entrokit::run_suite(&cfg)?;
    let text = match Format::from(a.format) {
        Format::Json => format!("{}\n", report.to_json_pretty()),
        Format::Csv => {
            let mut out = String::from("name,kind,pass,fail,worst_slack\n");
            for p in &report.properties {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.name,
                    kind_name(p.kind),
                    p.pass,
                    p.fail,
                    eio::format_f64(p.worst_slack)
                ));
            }
            out
        }
    };
    if report.all_passed() {
        write_out(&text, a.output.as_deref())
    } else {
        for p in report.properties.iter().filter(|p| p.fail > 0) {
            log::warn!("{}: {} of {} trials failed", p.name, p.fail, p.pass + p.fail);
        }
        Err(CliError::Violation { report: text, output: a.output })
    }
}

fn kind_name(kind: entrokit::PropertyKind) -> &'static str {
    match kind {
        entrokit::PropertyKind::Identity => "identity",
        entrokit::PropertyKind::Inequality => "inequality",
    }
}

fn params(c: &Common) -> CliResult<DeformParams> {
    let p = if c.relaxed { DeformParams::relaxed(c.k, c.r) } else { DeformParams::new(c.k, c.r) };
    Ok(p?)
}

fn warn_degenerate(d: &entrokit::DivergenceValue) {
    if d.is_degenerate() {
        log::warn!("k = 1/2: the divergence vanishes on the common support and does not separate distributions");
    }
}

/// Reads an input argument: inline JSON, `-` for stdin, or a file path.
fn load(src: &str) -> CliResult<String> {
    if src.trim_start().starts_with('{') {
        return Ok(src.to_string());
    }
    if src == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf).map_err(|e| CliError::Data(format!("reading stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read_to_string(src).map_err(|e| CliError::Data(format!("reading {src}: {e}")))
}

/// Format implied by an input argument.
fn input_format(src: &str, text: &str) -> Format {
    let by_name = Path::new(src).extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if by_name || (src == "-" && !text.trim_start().starts_with('{')) {
        Format::Csv
    } else {
        Format::Json
    }
}

fn read_distribution(src: &str, normalize: bool) -> CliResult<Distribution> {
    let text = load(src)?;
    Ok(eio::read_distribution(&text, input_format(src, &text), normalize)?)
}

enum Joint {
    Two(JointDistribution2),
    Three(JointDistribution3),
}

fn read_joint(src: &str, normalize: bool) -> CliResult<Joint> {
    let text = load(src)?;
    let format = input_format(src, &text);
    let three = match format {
        Format::Json => serde_json::from_str::<Value>(&text)
            .map(|v| v.get("t").is_some())
            .map_err(|e| CliError::Data(format!("validation error: joint JSON: {e}")))?,
        Format::Csv => text.lines().any(|l| l.trim_start().strip_prefix('#').is_some_and(|c| c.trim().starts_with("shape="))),
    };
    Ok(if three {
        Joint::Three(eio::read_joint3(&text, format, normalize)?)
    } else {
        Joint::Two(eio::read_joint2(&text, format, normalize)?)
    })
}

fn emit(rec: &Map<String, Value>, c: &Common) -> CliResult<()> {
    let text = eio::render_record(rec, c.format.into())?;
    write_out(&text, c.output.as_deref())
}

fn write_out(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Data(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
