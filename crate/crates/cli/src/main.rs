use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use edocs_core::designs::Constants;
use edocs_core::foreach::{build_ee, decode_ee, EeScheme};
use edocs_core::harness::{
    draw_signal, run_sweep_with, run_trials_with, SchemeChoice, SignalModel, SupportSize, TrialConfig,
};
use edocs_core::oracle::{
    bib_simulate_with, check_distinguishable, check_list_uf, check_strongly_distinguishable, check_strongly_list_uf,
    BibConfig, VerdictRecord, VerifyOptions,
};
use edocs_core::splitting::DEFAULT_TESTS_PER_DEFECTIVE;
use edocs_core::universal::{build_aa, build_ae, decode, BuildOptions, UniversalScheme, Verification};
use edocs_core::{BinaryDesign, Exec, MeasurementBits, SparseSignal, Tolerance};

#[derive(Parser)]
#[command(name = "edocs", version, about = "One-bit compressed sensing support recovery")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a universal scheme (AA or AE) and write it in the text format.
    BuildUniversal(BuildUniversalArgs),
    /// Build a probabilistic exact (EE) scheme and write its configuration.
    BuildEe(BuildEeArgs),
    /// Measure a signal with a stored scheme.
    Encode(EncodeArgs),
    /// Recover a support from stored measurements.
    Decode(DecodeArgs),
    /// Check a combinatorial property of a stored design.
    VerifyDesign(VerifyArgs),
    /// Run seeded encode/decode trials; one CSV row per trial.
    Trial(TrialArgs),
    /// Run a grid of trials; one CSV row per grid point.
    Sweep(SweepArgs),
    /// Balls-into-bins overflow simulation.
    BibSim(BibArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum UniversalKindArg {
    Aa,
    Ae,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Aa,
    Ae,
    Ee,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyArg {
    Auto,
    Always,
    Never,
}

impl From<VerifyArg> for Verification {
    fn from(v: VerifyArg) -> Self {
        match v {
            VerifyArg::Auto => Verification::Auto,
            VerifyArg::Always => Verification::Always,
            VerifyArg::Never => Verification::Never,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalArg {
    Gaussian,
    Unit,
    Adversarial,
}

impl From<SignalArg> for SignalModel {
    fn from(s: SignalArg) -> Self {
        match s {
            SignalArg::Gaussian => SignalModel::Gaussian,
            SignalArg::Unit => SignalModel::Unit,
            SignalArg::Adversarial => SignalModel::Adversarial,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Distinguishable,
    StronglyDistinguishable,
    ListUf,
    StronglyListUf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    First,
    Second,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long, default_value_t = 4.0)]
    c_rows: f64,
    #[arg(long, default_value_t = 4.0)]
    c_weight: f64,
    #[arg(long, default_value_t = 32.0)]
    c_rows_uf: f64,
    #[arg(long, default_value_t = 4.0)]
    c_weight_uf: f64,
}

impl ConstantArgs {
    fn constants(&self) -> Constants {
        Constants {
            c_rows: self.c_rows,
            c_weight: self.c_weight,
            c_rows_uf: self.c_rows_uf,
            c_weight_uf: self.c_weight_uf,
        }
    }
}

#[derive(Args)]
struct BuildUniversalArgs {
    #[arg(long, value_enum)]
    kind: UniversalKindArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Approximation parameter (AA only).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    verify: VerifyArg,
    #[arg(long, default_value_t = 16)]
    max_retries: usize,
    #[command(flatten)]
    constants: ConstantArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BuildEeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_TESTS_PER_DEFECTIVE)]
    tests_per_defective: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EncodeArgs {
    /// Scheme file written by build-universal or build-ee.
    #[arg(long)]
    scheme: PathBuf,
    /// CSV of `index,value` rows.
    #[arg(long, conflicts_with = "random")]
    signal: Option<PathBuf>,
    /// Draw a Gaussian signal with this many support items from `--seed`.
    #[arg(long)]
    random: Option<usize>,
    /// Magnitudes at or below this count as zero.
    #[arg(long, default_value_t = 0.0)]
    tolerance: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// File holding the 0/1 measurement string.
    #[arg(long)]
    measurements: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    /// A design in the text format, or a universal scheme file.
    #[arg(long)]
    design: PathBuf,
    /// Which stage of a universal scheme file to check.
    #[arg(long, value_enum, default_value = "first")]
    stage: StageArg,
    #[arg(long, value_enum)]
    property: PropertyArg,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 10_000_000)]
    budget: u128,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TrialShape {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "gaussian")]
    signal: SignalArg,
    /// Plant exactly k items instead of a uniform size in 1..=k.
    #[arg(long)]
    exact_size: bool,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value = "auto")]
    verify: VerifyArg,
    #[arg(long, default_value_t = DEFAULT_TESTS_PER_DEFECTIVE)]
    tests_per_defective: usize,
    #[command(flatten)]
    constants: ConstantArgs,
    /// Fill the decode time column (wall clock, not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// eps for AA.
    #[arg(long)]
    eps: Option<f64>,
    /// alpha for EE.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    shape: TrialShape,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated signal lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Comma-separated sparsities.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Comma-separated eps (AA) or alpha (EE) values.
    #[arg(long, value_delimiter = ',')]
    param: Vec<f64>,
    #[command(flatten)]
    shape: TrialShape,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BibArgs {
    #[arg(long)]
    balls: usize,
    #[arg(long)]
    bins: usize,
    /// Count trials whose fullest bin holds more than this many balls.
    #[arg(long)]
    threshold: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[command(flatten)]
    output: Output,
}

enum StoredScheme {
    Universal(Box<UniversalScheme>),
    Ee(EeScheme),
}

impl StoredScheme {
    fn n(&self) -> usize {
        match self {
            StoredScheme::Universal(s) => s.n(),
            StoredScheme::Ee(s) => s.n(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_scheme(path: &Path) -> Result<StoredScheme> {
    let text = read(path)?;
    match text.lines().next().map(str::trim) {
        Some("edocs-universal v1") => Ok(StoredScheme::Universal(Box::new(UniversalScheme::parse_text(&text)?))),
        Some("edocs-ee v1") => Ok(StoredScheme::Ee(EeScheme::from_config(&text)?)),
        _ => bail!("{} is not a scheme file", path.display()),
    }
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn parse_signal(text: &str, n: usize) -> Result<SparseSignal> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            bail!("signal line {}: expected index,value", i + 1);
        }
        let (index, value) = (&record[0], &record[1]);
        if i == 0 && index.parse::<usize>().is_err() {
            continue;
        }
        entries.push((
            index.parse().with_context(|| format!("signal line {}: index", i + 1))?,
            value.parse().with_context(|| format!("signal line {}: value", i + 1))?,
        ));
    }
    Ok(SparseSignal::new(n, entries)?)
}

fn scheme_choice(kind: SchemeArg, eps: Option<f64>, alpha: Option<f64>, tests_per_defective: usize) -> Result<SchemeChoice> {
    Ok(match kind {
        SchemeArg::Aa => SchemeChoice::Aa { eps: eps.context("--eps is required for aa")? },
        SchemeArg::Ae => SchemeChoice::Ae,
        SchemeArg::Ee => SchemeChoice::Ee { alpha: alpha.context("--alpha is required for ee")?, tests_per_defective },
    })
}

fn trial_config(shape: &TrialShape, scheme: SchemeChoice, n: usize, k: usize, seed: u64) -> TrialConfig {
    TrialConfig {
        signal: shape.signal.into(),
        support_size: if shape.exact_size { SupportSize::Exactly(k) } else { SupportSize::UpToK },
        verification: shape.verify.into(),
        constants: shape.constants.constants(),
        ..TrialConfig::new(scheme, n, k, shape.trials, seed)
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let seed = cli.seed;
    match cli.command {
        Command::BuildUniversal(a) => {
            let opts = BuildOptions {
                constants: a.constants.constants(),
                verification: a.verify.into(),
                max_retries: a.max_retries,
                exec,
                ..BuildOptions::default()
            };
            let scheme = match a.kind {
                UniversalKindArg::Aa => build_aa(a.n, a.k, a.eps.context("--eps is required for aa")?, seed, &opts)?,
                UniversalKindArg::Ae => {
                    if a.eps.is_some() {
                        bail!("--eps applies only to aa");
                    }
                    build_ae(a.n, a.k, seed, &opts)?
                }
            };
            log::info!(
                "m = {} (m' = {}, m'' = {}), verified = {}",
                scheme.num_measurements(),
                scheme.first_design().rows(),
                scheme.second_design().rows(),
                scheme.is_verified()
            );
            emit(&a.output, &scheme.to_text())
        }
        Command::BuildEe(a) => {
            let scheme = build_ee(a.n, a.k, a.alpha, a.tests_per_defective, seed)?;
            log::info!("m = {}, k_alpha = {}", scheme.num_measurements(), scheme.k_alpha());
            emit(&a.output, &scheme.to_config())
        }
        Command::Encode(a) => {
            let scheme = load_scheme(&a.scheme)?;
            let n = scheme.n();
            let x = match (&a.signal, a.random) {
                (Some(path), None) => parse_signal(&read(path)?, n)?,
                (None, Some(k)) => {
                    let cfg = TrialConfig {
                        support_size: SupportSize::Exactly(k),
                        ..TrialConfig::new(SchemeChoice::Ae, n, k.max(1), 1, seed)
                    };
                    if k == 0 || k > n {
                        bail!("--random must be in 1..={n}");
                    }
                    let x = draw_signal(&cfg, 0)?;
                    log::info!("support: {:?}", x.support_set());
                    x
                }
                _ => bail!("give exactly one of --signal or --random"),
            };
            let tol = Tolerance(a.tolerance);
            let y = match &scheme {
                StoredScheme::Universal(s) => s.measure_with(&x, tol)?,
                StoredScheme::Ee(s) => s.measure(&x, tol)?,
            };
            emit(&a.output, &format!("{y}\n"))
        }
        Command::Decode(a) => {
            let scheme = load_scheme(&a.scheme)?;
            let y = MeasurementBits::parse(&read(&a.measurements)?)?;
            let indices = match &scheme {
                StoredScheme::Universal(s) => {
                    let r = decode(s, &y)?;
                    log::info!("stage-1 candidates = {}, column_reads = {}", r.stage1_size, r.column_reads);
                    r.indices
                }
                StoredScheme::Ee(s) => {
                    let r = decode_ee(s, &y)?;
                    log::info!("node_visits = {}, measurement_reads = {}", r.node_visits, r.measurement_reads);
                    if r.failed {
                        bail!("decoder hit its candidate cap");
                    }
                    r.positives
                }
            };
            emit(&a.output, &csv_string(&["index"], indices.into_iter().map(|i| vec![i.to_string()]))?)
        }
        Command::VerifyDesign(a) => {
            let text = read(&a.design)?;
            let design = if text.lines().next().map(str::trim) == Some("edocs-universal v1") {
                let s = UniversalScheme::parse_text(&text)?;
                match a.stage {
                    StageArg::First => s.first_design().clone(),
                    StageArg::Second => s.second_design().clone(),
                }
            } else {
                BinaryDesign::parse_text(&text)?
            };
            let opts = VerifyOptions { budget: a.budget, exec };
            let kv = |k: &str, v: String| (k.to_string(), v);
            let (name, params, verdict) = match a.property {
                PropertyArg::Distinguishable => (
                    "distinguishable",
                    vec![kv("k", a.k.to_string()), kv("l", a.l.to_string())],
                    check_distinguishable(&design, a.k, a.l, opts)?,
                ),
                PropertyArg::StronglyDistinguishable => (
                    "strongly-distinguishable",
                    vec![kv("k", a.k.to_string()), kv("eps", a.eps.to_string())],
                    check_strongly_distinguishable(&design, a.k, a.eps, opts)?,
                ),
                PropertyArg::ListUf => (
                    "list-uf",
                    vec![kv("k", a.k.to_string()), kv("l", a.l.to_string()), kv("alpha", a.alpha.to_string())],
                    check_list_uf(&design, a.k, a.l, a.alpha, opts)?,
                ),
                PropertyArg::StronglyListUf => (
                    "strongly-list-uf",
                    vec![kv("k", a.k.to_string()), kv("eps", a.eps.to_string()), kv("alpha", a.alpha.to_string())],
                    check_strongly_list_uf(&design, a.k, a.eps, a.alpha, opts)?,
                ),
            };
            emit(&a.output, &format!("{}\n", VerdictRecord::new(&design, name, params, verdict)))
        }
        Command::Trial(a) => {
            let choice = scheme_choice(a.shape.scheme, a.eps, a.alpha, a.shape.tests_per_defective)?;
            let cfg = trial_config(&a.shape, choice, a.n, a.k, seed);
            let report = run_trials_with(&cfg, exec)?;
            log::info!("m = {}, successes = {}/{}", report.measurements, report.successes, report.trials());
            let failed: std::collections::BTreeSet<usize> = report.failed_trials.iter().copied().collect();
            let rows = (0..report.trials()).map(|t| {
                vec![
                    t.to_string(),
                    u8::from(!failed.contains(&t)).to_string(),
                    report.column_reads[t].to_string(),
                    report.margins.get(t).map(f64::to_string).unwrap_or_default(),
                    if a.shape.timing { (report.decode_nanos[t] as f64 / 1e3).to_string() } else { String::new() },
                ]
            });
            emit(&a.output, &csv_string(&["trial", "success", "column_reads", "margin", "decode_us"], rows)?)
        }
        Command::Sweep(a) => {
            let params: Vec<Option<f64>> =
                if a.param.is_empty() { vec![None] } else { a.param.iter().copied().map(Some).collect() };
            let mut grid = Vec::new();
            for &n in &a.n {
                for &k in &a.k {
                    for &p in &params {
                        let choice = scheme_choice(a.shape.scheme, p, p, a.shape.tests_per_defective)
                            .context("--param is required for aa and ee")?;
                        grid.push(trial_config(&a.shape, choice, n, k, seed));
                    }
                }
            }
            emit(&a.output, &run_sweep_with(&grid, a.shape.timing, exec)?)
        }
        Command::BibSim(a) => {
            let cfg = BibConfig { balls: a.balls, bins: a.bins, threshold: a.threshold, trials: a.trials, seed };
            let p = bib_simulate_with(&cfg, exec)?;
            let row = vec![a.balls.to_string(), a.bins.to_string(), a.threshold.to_string(), a.trials.to_string(), p.to_string()];
            emit(&a.output, &csv_string(&["balls", "bins", "threshold", "trials", "exceed_fraction"], [row])?)
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
