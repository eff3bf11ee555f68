use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rtseval::ingest::{
    emit_clusters, emit_epoch, emit_qrels, emit_run, load_epoch, load_ground_truth, load_run, merge_epochs,
    write_report, DiagnosticKind, ParseDiagnostic, ReportFormat,
};
use rtseval::model::validate_ground_truth;
use rtseval::reusability::{audit_epoch, compare_modes, leave_one_out};
use rtseval::strategies::{sweep, GoldPadding, Strategy, SweepSpec};
use rtseval::synth::{gen_corpus, system_population, SynthSpec};
use rtseval::{
    evaluate_runs, Alpha, EpochMap, EvalConfig, EvalError, GroundTruth, MetricKey, Mode, Run, Variant, Windowing,
};

const USAGE: u8 = 1;
const INVALID: u8 = 2;
const DATA: u8 = 3;

/// A failure carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type Outcome<T = ()> = Result<T, Failure>;

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Outcome<T> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn fail<T>(code: u8, error: anyhow::Error) -> Outcome<T> {
    Err(Failure { code, error })
}

fn eval_code(e: &EvalError) -> u8 {
    match e {
        EvalError::MissingEpochs { .. } | EvalError::PushBeforeCreation { .. } => DATA,
        EvalError::MetricNotComputed(_) | EvalError::BadRestriction { .. } | EvalError::Config(_) => USAGE,
    }
}

fn eval_err<T>(r: Result<T, EvalError>) -> Outcome<T> {
    r.map_err(|e| Failure {
        code: eval_code(&e),
        error: e.into(),
    })
}

/// Evaluation of real-time push notification runs (TREC RTS scenario A).
///
/// Exit status: 0 success, 1 usage error, 2 invalid ground truth or input,
/// 3 data error (missing creation epochs, push before creation, unreadable
/// files, incomplete epoch audit).
#[derive(Parser, Debug)]
#[command(name = "rtseval", version)]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score runs and write per-cell, per-profile and aggregate metrics.
    Evaluate(EvaluateArgs),
    /// Mean score of the runs restricted to N pushes per profile and day,
    /// for every N in a range.
    SweepN(SweepArgs),
    /// Rank shift of each run when its unique tweets leave the pool.
    LeaveOneOut(AnalysisArgs),
    /// List pushed tweets that have no creation epoch.
    AuditEpoch(AuditArgs),
    /// Score and rank every run in both strict and official-2016 mode.
    CompareModes(AnalysisArgs),
    /// Check ground-truth files (and optionally runs) for consistency.
    Validate(ValidateArgs),
    /// Write a seeded synthetic collection and population of runs.
    GenSynth(SynthArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Year {
    #[value(name = "2016")]
    Y2016,
    #[value(name = "2017")]
    Y2017,
}

impl Year {
    fn start_epoch(self) -> i64 {
        match self {
            Year::Y2016 => 1_470_096_000,
            Year::Y2017 => 1_501_286_400,
        }
    }

    fn days(self) -> usize {
        match self {
            Year::Y2016 => 10,
            Year::Y2017 => 8,
        }
    }

    fn headline(self) -> MetricKey {
        match self {
            Year::Y2016 => MetricKey::Eg(Variant::One),
            Year::Y2017 => MetricKey::Eg(Variant::Proportional),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Strict,
    #[value(name = "official-2016")]
    Official2016,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Official2016 => Mode::Official2016,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Tsv,
    Json,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Relevance judgments: `profile Q0 tweet grade` per line.
    #[arg(long, value_name = "FILE")]
    qrels: PathBuf,
    /// Cluster assignments: `profile cluster tweet` per line.
    #[arg(long, value_name = "FILE")]
    clusters: PathBuf,
    /// Creation epochs: `tweet epoch` per line.
    #[arg(long, value_name = "FILE")]
    epoch: PathBuf,
    /// Run file (`profile tweet push_epoch tag`) or a directory of `*.txt`
    /// run files. Repeatable.
    #[arg(long = "run", value_name = "PATH", required = true)]
    runs: Vec<PathBuf>,
    /// Extra creation epochs (for example the full stream); entries of
    /// --epoch win on conflict.
    #[arg(long, value_name = "FILE")]
    stream_epoch: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Task preset for the period, window count and headline metric.
    #[arg(long, value_enum, default_value = "2017")]
    year: Year,
    /// First window start (Unix seconds). Defaults to the preset.
    #[arg(long, value_name = "EPOCH", allow_negative_numbers = true)]
    start_epoch: Option<i64>,
    /// Window length in seconds.
    #[arg(long, value_name = "SECS", default_value_t = 86_400)]
    window_seconds: i64,
    /// Number of windows. Defaults to the preset's day count.
    #[arg(long, value_name = "COUNT")]
    windows: Option<usize>,
    /// Maximum pushes per profile and day.
    #[arg(long, value_name = "N", default_value_t = 10)]
    cap: usize,
    /// strict: missing epochs are errors and over-cap pushes are truncated.
    /// official-2016: pushes without epoch are ignored and over-cap pushes
    /// are counted without gain.
    #[arg(long, value_enum, default_value = "strict")]
    mode: ModeArg,
    /// GMP trade-off weight with at most two decimals. Repeatable; defaults
    /// to 0.33, 0.50 and 0.66.
    #[arg(long = "alpha", value_name = "A")]
    alphas: Vec<Alpha>,
}

impl ConfigArgs {
    fn config(&self) -> Outcome<EvalConfig> {
        let windowing = Windowing::new(
            self.start_epoch.unwrap_or(self.year.start_epoch()),
            self.window_seconds,
            self.windows.unwrap_or(self.year.days()),
        )
        .exit_with(USAGE)?;
        let mut cfg = EvalConfig::new(windowing)
            .with_cap(self.cap)
            .with_mode(self.mode.into());
        if !self.alphas.is_empty() {
            let mut alphas = self.alphas.clone();
            alphas.sort();
            alphas.dedup();
            cfg.alphas = alphas;
        }
        cfg.validate().exit_with(USAGE)?;
        Ok(cfg)
    }

    fn metric(&self, explicit: Option<MetricKey>) -> MetricKey {
        explicit.unwrap_or(self.year.headline())
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value = "tsv")]
    format: FormatArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// How N pushes are chosen from each profile and day.
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Metric to average. Defaults to the preset's headline metric.
    #[arg(long, value_name = "NAME")]
    metric: Option<MetricKey>,
    #[arg(long, value_name = "N", default_value_t = 1)]
    n_min: usize,
    /// Largest N; at most --cap.
    #[arg(long, value_name = "N", default_value_t = 10)]
    n_max: usize,
    /// Seed for the random strategy.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random draws per run and N.
    #[arg(long, default_value_t = 100)]
    draws: usize,
    /// Whether gold tops up with non-relevant pushes after the new clusters.
    #[arg(long, value_enum, default_value = "always")]
    gold_padding: PaddingArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    First,
    Gold,
    Random,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::First => Strategy::First,
            StrategyArg::Gold => Strategy::Gold,
            StrategyArg::Random => Strategy::Random,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PaddingArg {
    Always,
    Never,
}

impl From<PaddingArg> for GoldPadding {
    fn from(p: PaddingArg) -> GoldPadding {
        match p {
            PaddingArg::Always => GoldPadding::Always,
            PaddingArg::Never => GoldPadding::Never,
        }
    }
}

#[derive(Args, Debug)]
struct AnalysisArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Ranking metric. Defaults to the preset's headline metric.
    #[arg(long, value_name = "NAME")]
    metric: Option<MetricKey>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_name = "FILE")]
    qrels: PathBuf,
    #[arg(long, value_name = "FILE")]
    clusters: PathBuf,
    #[arg(long, value_name = "FILE")]
    epoch: PathBuf,
    /// Run files or directories to parse as well. Repeatable.
    #[arg(long = "run", value_name = "PATH")]
    runs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    profiles: usize,
    #[arg(long, default_value_t = 10)]
    windows: usize,
    #[arg(long, default_value_t = 10)]
    systems: usize,
    #[arg(long, default_value_t = 10)]
    cap: usize,
    /// Share of (profile, window) pairs without relevant tweets.
    #[arg(long, default_value_t = 0.3)]
    silent_rate: f64,
    #[arg(long, value_name = "EPOCH", default_value_t = 1_501_286_400)]
    start_epoch: i64,
    #[arg(long, value_name = "SECS", default_value_t = 86_400)]
    window_seconds: i64,
    /// Directory receiving qrels.txt, clusters.txt, epoch.txt, runs/ and
    /// manifest.json.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn warn_diagnostics(diags: &[ParseDiagnostic]) {
    for d in diags {
        eprintln!("warning: {d}");
    }
}

fn run_files(paths: &[PathBuf]) -> Outcome<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("{}", p.display()))
                .exit_with(DATA)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "txt"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return fail(USAGE, anyhow!("no run files given"));
    }
    Ok(files)
}

fn load_runs(paths: &[PathBuf]) -> Outcome<(Vec<Run>, Vec<ParseDiagnostic>)> {
    let mut runs: Vec<Run> = Vec::new();
    let mut diags = Vec::new();
    for f in run_files(paths)? {
        let (run, d) = load_run(&f).exit_with(DATA)?;
        diags.extend(d);
        if runs.iter().any(|r| r.tag == run.tag) {
            return fail(INVALID, anyhow!("duplicate run tag `{}` ({})", run.tag, f.display()));
        }
        runs.push(run);
    }
    Ok((runs, diags))
}

fn load_gt(qrels: &Path, clusters: &Path, epoch: &Path) -> Outcome<(GroundTruth, Vec<ParseDiagnostic>)> {
    load_ground_truth(qrels, clusters, epoch).exit_with(DATA)
}

struct Loaded {
    gt: GroundTruth,
    runs: Vec<Run>,
    stream: Option<EpochMap>,
}

/// Loads everything, reports diagnostics and rejects invalid ground truth.
fn load_inputs(input: &InputArgs) -> Outcome<Loaded> {
    let (gt, diags) = load_gt(&input.qrels, &input.clusters, &input.epoch)?;
    warn_diagnostics(&diags);
    let violations = validate_ground_truth(&gt);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("error: {v}");
        }
        return fail(INVALID, anyhow!("ground truth has {} violation(s)", violations.len()));
    }
    let (runs, diags) = load_runs(&input.runs)?;
    warn_diagnostics(&diags);
    let stream = match &input.stream_epoch {
        Some(p) => {
            let (map, diags) = load_epoch(p).exit_with(DATA)?;
            warn_diagnostics(&diags);
            Some(map)
        }
        None => None,
    };
    Ok(Loaded { gt, runs, stream })
}

impl Loaded {
    /// Ground truth with the stream epochs merged in.
    fn merged(&self) -> GroundTruth {
        match &self.stream {
            Some(s) => {
                let mut gt = self.gt.clone();
                let (epochs, conflicts) = merge_epochs(&gt.epochs, s);
                for c in conflicts {
                    eprintln!(
                        "warning: stream epoch {} for {} ignored, keeping {}",
                        c.ignored, c.tweet, c.kept
                    );
                }
                gt.epochs = epochs;
                gt
            }
            None => self.gt.clone(),
        }
    }
}

fn emit(out: &OutArgs, text: &str) -> Outcome {
    match &out.out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .exit_with(DATA),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .exit_with(DATA)
        }
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> Outcome {
    let cfg = args.config.config()?;
    let loaded = load_inputs(&args.input)?;
    let report = eval_err(evaluate_runs(&loaded.runs, &loaded.merged(), &cfg))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let format = match args.format {
        FormatArg::Tsv => ReportFormat::Tsv,
        FormatArg::Json => ReportFormat::Json,
    };
    emit(&args.out, &write_report(&report, format))
}

fn cmd_sweep(args: &SweepArgs) -> Outcome {
    let cfg = args.config.config()?;
    if args.n_min == 0 || args.n_min > args.n_max || args.n_max > cfg.cap {
        return fail(
            USAGE,
            anyhow!(
                "need 1 <= --n-min <= --n-max <= --cap ({}), got {}..{}",
                cfg.cap,
                args.n_min,
                args.n_max
            ),
        );
    }
    if args.strategy == StrategyArg::Random && args.draws == 0 {
        return fail(USAGE, anyhow!("--draws must be at least 1"));
    }
    let loaded = load_inputs(&args.input)?;
    let spec = SweepSpec {
        seed: args.seed,
        draws: args.draws,
        padding: args.gold_padding.into(),
        ..SweepSpec::new(
            args.strategy.into(),
            args.config.metric(args.metric),
            args.n_min,
            args.n_max,
        )
    };
    let result = eval_err(sweep(&loaded.runs, &loaded.merged(), &cfg, &spec))?;
    emit(&args.out, &result.to_tsv())
}

fn cmd_leave_one_out(args: &AnalysisArgs) -> Outcome {
    let cfg = args.config.config()?;
    let loaded = load_inputs(&args.input)?;
    let report = eval_err(leave_one_out(
        &loaded.runs,
        &loaded.gt,
        &cfg,
        args.config.metric(args.metric),
        loaded.stream.as_ref(),
    ))?;
    emit(&args.out, &report.to_tsv())
}

fn cmd_compare_modes(args: &AnalysisArgs) -> Outcome {
    let cfg = args.config.config()?;
    let loaded = load_inputs(&args.input)?;
    let cmp = eval_err(compare_modes(
        &loaded.runs,
        &loaded.gt,
        &cfg,
        args.config.metric(args.metric),
        loaded.stream.as_ref(),
    ))?;
    emit(&args.out, &cmp.to_tsv())
}

fn cmd_audit(args: &AuditArgs) -> Outcome {
    let loaded = load_inputs(&args.input)?;
    let audit = audit_epoch(&loaded.merged(), &loaded.runs);
    emit(&args.out, &audit.to_tsv())?;
    if audit.is_clean() {
        Ok(())
    } else {
        fail(
            DATA,
            anyhow!("{} pushed tweet(s) lack a creation epoch", audit.missing.len()),
        )
    }
}

fn cmd_validate(args: &ValidateArgs) -> Outcome {
    let (gt, mut diags) = load_gt(&args.qrels, &args.clusters, &args.epoch)?;
    let mut runs = 0;
    if !args.runs.is_empty() {
        let (loaded, d) = load_runs(&args.runs)?;
        runs = loaded.len();
        diags.extend(d);
    }
    let violations = validate_ground_truth(&gt);
    let mut out = String::new();
    for d in &diags {
        out.push_str(&format!("{d}\n"));
    }
    for v in &violations {
        out.push_str(&format!("{v}\n"));
    }
    let malformed = diags.iter().filter(|d| d.kind == DiagnosticKind::Malformed).count();
    out.push_str(&format!(
        "#summary\tjudgments={}\tclusters={}\tepochs={}\truns={runs}\tviolations={}\tdiagnostics={}\tmalformed={malformed}\n",
        gt.qrels.len(),
        gt.clusters.len(),
        gt.epochs.len(),
        violations.len(),
        diags.len(),
    ));
    emit(&OutArgs { out: None }, &out)?;
    if violations.is_empty() && malformed == 0 {
        Ok(())
    } else {
        fail(
            INVALID,
            anyhow!("{} violation(s), {malformed} malformed line(s)", violations.len()),
        )
    }
}

fn cmd_gen_synth(args: &SynthArgs) -> Outcome {
    let spec = SynthSpec {
        profiles: args.profiles,
        windows: args.windows,
        silent_rate: args.silent_rate,
        start_epoch: args.start_epoch,
        window_seconds: args.window_seconds,
        ..SynthSpec::new(args.seed)
    };
    spec.validate().exit_with(USAGE)?;
    if args.cap == 0 {
        return fail(USAGE, anyhow!("--cap must be at least 1"));
    }
    let systems = system_population(args.seed, args.systems, args.cap, args.window_seconds);
    let corpus = gen_corpus(&spec, systems, args.cap).exit_with(USAGE)?;

    let dir = &args.out_dir;
    let write = |name: &Path, text: &str| {
        fs::write(dir.join(name), text)
            .with_context(|| format!("writing {}", dir.join(name).display()))
            .exit_with(DATA)
    };
    fs::create_dir_all(dir.join("runs"))
        .with_context(|| format!("creating {}", dir.display()))
        .exit_with(DATA)?;
    write(Path::new("qrels.txt"), &emit_qrels(&corpus.gt.qrels))?;
    write(Path::new("clusters.txt"), &emit_clusters(&corpus.gt.clusters))?;
    write(Path::new("epoch.txt"), &emit_epoch(&corpus.gt.epochs))?;
    for run in &corpus.runs {
        write(&Path::new("runs").join(format!("{}.txt", run.tag)), &emit_run(run))?;
    }
    let manifest = serde_json::to_string_pretty(&corpus.manifest).exit_with(DATA)?;
    write(Path::new("manifest.json"), &(manifest + "\n"))
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::SweepN(a) => cmd_sweep(a),
        Command::LeaveOneOut(a) => cmd_leave_one_out(a),
        Command::AuditEpoch(a) => cmd_audit(a),
        Command::CompareModes(a) => cmd_compare_modes(a),
        Command::Validate(a) => cmd_validate(a),
        Command::GenSynth(a) => cmd_gen_synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.jobs {
        Some(0) => fail(USAGE, anyhow!("--jobs must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => fail(USAGE, e.into()),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
