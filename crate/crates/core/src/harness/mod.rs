//! Seeded trial runner and CSV sweeps over all three schemes.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::designs::Constants;
use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::foreach::{build_ee, decode_ee, EeScheme};
use crate::rng;
use crate::sensing::{SparseSignal, Tolerance};
use crate::splitting::DEFAULT_TESTS_PER_DEFECTIVE;
use crate::universal::{build_aa, build_ae, decode, BuildOptions, UniversalScheme, Verification};

const TRIAL_STREAM: u64 = 0x7E57;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeChoice {
    Aa { eps: f64 },
    Ae,
    Ee { alpha: f64, tests_per_defective: usize },
}

impl SchemeChoice {
    pub fn ee(alpha: f64) -> Self {
        SchemeChoice::Ee { alpha, tests_per_defective: DEFAULT_TESTS_PER_DEFECTIVE }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SchemeChoice::Aa { .. } => "aa",
            SchemeChoice::Ae => "ae",
            SchemeChoice::Ee { .. } => "ee",
        }
    }

    /// eps for AA, alpha for EE, empty for AE.
    pub fn param(&self) -> String {
        match self {
            SchemeChoice::Aa { eps } => eps.to_string(),
            SchemeChoice::Ae => String::new(),
            SchemeChoice::Ee { alpha, .. } => alpha.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalModel {
    /// i.i.d. standard normal values.
    #[default]
    Gaussian,
    /// Every value equal to 1.
    Unit,
    /// Support items paired up with values `+v` and `-v`, so any row holding
    /// exactly one pair measures zero.
    Adversarial,
}

/// How many support items each trial plants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportSize {
    /// Uniform in `1..=k`.
    #[default]
    UpToK,
    Exactly(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub scheme: SchemeChoice,
    pub n: usize,
    pub k: usize,
    pub signal: SignalModel,
    pub support_size: SupportSize,
    pub trials: usize,
    pub seed: u64,
    pub verification: Verification,
    pub constants: Constants,
}

impl TrialConfig {
    pub fn new(scheme: SchemeChoice, n: usize, k: usize, trials: usize, seed: u64) -> Self {
        Self {
            scheme,
            n,
            k,
            signal: SignalModel::Gaussian,
            support_size: SupportSize::UpToK,
            trials,
            seed,
            verification: Verification::Auto,
            constants: Constants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialReport {
    pub measurements: usize,
    pub successes: usize,
    pub failures: usize,
    /// Decoder work per trial: block scans plus column entries for the
    /// universal schemes, tree node visits for EE.
    pub column_reads: Vec<usize>,
    pub decode_nanos: Vec<u64>,
    /// AA only: `eps |supp x| - max(|S \ supp x|, |supp x \ S|)` per trial.
    pub margins: Vec<f64>,
    /// Indices of failed trials.
    pub failed_trials: Vec<usize>,
}

impl TrialReport {
    pub fn trials(&self) -> usize {
        self.successes + self.failures
    }

    pub fn success_rate(&self) -> f64 {
        if self.trials() == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials() as f64
        }
    }

    pub fn mean_column_reads(&self) -> f64 {
        mean(self.column_reads.iter().map(|&c| c as f64))
    }

    pub fn max_column_reads(&self) -> usize {
        self.column_reads.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_decode_us(&self) -> f64 {
        mean(self.decode_nanos.iter().map(|&t| t as f64 / 1e3))
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let len = values.len();
    if len == 0 {
        0.0
    } else {
        values.sum::<f64>() / len as f64
    }
}

/// A built scheme of any kind.
#[derive(Debug, Clone)]
pub enum Scheme {
    Universal(Box<UniversalScheme>),
    Ee(EeScheme),
}

struct Outcome {
    recovered: BTreeSet<usize>,
    work: usize,
}

impl Scheme {
    pub fn build(cfg: &TrialConfig, exec: Exec) -> Result<Self> {
        let opts = BuildOptions {
            constants: cfg.constants,
            verification: cfg.verification,
            exec,
            ..BuildOptions::default()
        };
        Ok(match cfg.scheme {
            SchemeChoice::Aa { eps } => Scheme::Universal(Box::new(build_aa(cfg.n, cfg.k, eps, cfg.seed, &opts)?)),
            SchemeChoice::Ae => Scheme::Universal(Box::new(build_ae(cfg.n, cfg.k, cfg.seed, &opts)?)),
            SchemeChoice::Ee { alpha, tests_per_defective } => {
                Scheme::Ee(build_ee(cfg.n, cfg.k, alpha, tests_per_defective, cfg.seed)?)
            }
        })
    }

    pub fn num_measurements(&self) -> usize {
        match self {
            Scheme::Universal(s) => s.num_measurements(),
            Scheme::Ee(s) => s.num_measurements(),
        }
    }

    fn run(&self, x: &SparseSignal) -> Result<Outcome> {
        Ok(match self {
            Scheme::Universal(s) => {
                let r = decode(s, &s.measure_with(x, Tolerance::FLOAT)?)?;
                Outcome { recovered: r.indices, work: r.column_reads }
            }
            Scheme::Ee(s) => {
                let r = decode_ee(s, &s.measure(x, Tolerance::FLOAT)?)?;
                let recovered = if r.failed { BTreeSet::new() } else { r.positives };
                Outcome { recovered, work: r.node_visits }
            }
        })
    }
}

/// Planted signal for trial `trial`, drawn from its own stream.
pub fn draw_signal(cfg: &TrialConfig, trial: usize) -> Result<SparseSignal> {
    let mut rng = rng::stream(cfg.seed, &[TRIAL_STREAM, trial as u64]);
    let size = match cfg.support_size {
        SupportSize::UpToK => rng.random_range(1..=cfg.k),
        SupportSize::Exactly(s) => s,
    };
    let mut support = sample(&mut rng, cfg.n, size).into_vec();
    support.sort_unstable();
    let values: Vec<f64> = match cfg.signal {
        SignalModel::Gaussian => (0..size).map(|_| rng.sample(StandardNormal)).collect(),
        SignalModel::Unit => vec![1.0; size],
        SignalModel::Adversarial => {
            let mut v = Vec::with_capacity(size);
            while v.len() < size {
                let mag: f64 = 0.5 + rng.random::<f64>();
                v.push(mag);
                if v.len() < size {
                    v.push(-mag);
                }
            }
            v
        }
    };
    SparseSignal::new(cfg.n, support.into_iter().zip(values))
}

fn score(scheme: SchemeChoice, truth: &BTreeSet<usize>, got: &BTreeSet<usize>) -> (bool, Option<f64>) {
    match scheme {
        SchemeChoice::Aa { eps } => {
            let extra = got.difference(truth).count();
            let missed = truth.difference(got).count();
            let slack = eps * truth.len() as f64;
            let margin = slack - extra.max(missed) as f64;
            (margin >= 0.0, Some(margin))
        }
        _ => (got == truth, None),
    }
}

fn validate(cfg: &TrialConfig) -> Result<()> {
    if cfg.k == 0 || cfg.k >= cfg.n {
        return Err(invalid(format!("need 1 <= k < n, got k={}, n={}", cfg.k, cfg.n)));
    }
    if let SupportSize::Exactly(s) = cfg.support_size {
        if s == 0 || s > cfg.k {
            return Err(invalid(format!("support size {s} outside 1..={}", cfg.k)));
        }
    }
    Ok(())
}

pub fn run_trials(cfg: &TrialConfig) -> Result<TrialReport> {
    run_trials_with(cfg, Exec::default())
}

/// Builds the scheme once from `cfg.seed`, then runs independent trials.
/// Everything except `decode_nanos` is a function of `cfg` alone.
pub fn run_trials_with(cfg: &TrialConfig, exec: Exec) -> Result<TrialReport> {
    validate(cfg)?;
    let scheme = Scheme::build(cfg, exec)?;
    run_trials_on(&scheme, cfg, exec)
}

/// Runs the trials of `cfg` against an already built scheme.
pub fn run_trials_on(scheme: &Scheme, cfg: &TrialConfig, exec: Exec) -> Result<TrialReport> {
    validate(cfg)?;
    let per_trial = exec.map(cfg.trials, |t| -> Result<(bool, Option<f64>, usize, u64)> {
        let x = draw_signal(cfg, t)?;
        let start = Instant::now();
        let out = scheme.run(&x)?;
        let nanos = start.elapsed().as_nanos() as u64;
        let (ok, margin) = score(cfg.scheme, &x.support_set(), &out.recovered);
        Ok((ok, margin, out.work, nanos))
    });
    let mut report = TrialReport { measurements: scheme.num_measurements(), ..TrialReport::default() };
    for (t, r) in per_trial.into_iter().enumerate() {
        let (ok, margin, work, nanos) = r?;
        if ok {
            report.successes += 1;
        } else {
            report.failures += 1;
            report.failed_trials.push(t);
        }
        report.column_reads.push(work);
        report.decode_nanos.push(nanos);
        report.margins.extend(margin);
    }
    Ok(report)
}

pub const SWEEP_HEADER: [&str; 9] =
    ["scheme", "n", "k", "param", "m", "mean_column_reads", "success_rate", "mean_decode_us", "error"];

#[derive(Debug, Serialize)]
struct SweepRow {
    scheme: &'static str,
    n: usize,
    k: usize,
    param: String,
    m: Option<usize>,
    mean_column_reads: Option<f64>,
    success_rate: Option<f64>,
    mean_decode_us: Option<f64>,
    error: String,
}

/// One CSV row per grid point. A cell whose config fails records the error
/// in the `error` column. Decode times are left empty unless `timing` is set,
/// so the default output is byte-identical across runs.
pub fn run_sweep(grid: &[TrialConfig], timing: bool) -> Result<String> {
    run_sweep_with(grid, timing, Exec::default())
}

pub fn run_sweep_with(grid: &[TrialConfig], timing: bool, exec: Exec) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for cfg in grid {
        let mut row = SweepRow {
            scheme: cfg.scheme.label(),
            n: cfg.n,
            k: cfg.k,
            param: cfg.scheme.param(),
            m: None,
            mean_column_reads: None,
            success_rate: None,
            mean_decode_us: None,
            error: String::new(),
        };
        match run_trials_with(cfg, exec) {
            Ok(r) => {
                row.m = Some(r.measurements);
                row.mean_column_reads = Some(r.mean_column_reads());
                row.success_rate = Some(r.success_rate());
                row.mean_decode_us = timing.then(|| r.mean_decode_us());
            }
            Err(e) => row.error = e.to_string(),
        }
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| invalid(format!("csv: {e}")))
}

fn csv_err(e: csv::Error) -> crate::error::EdocsError {
    invalid(format!("csv: {e}"))
}
