//! Brute-force ground truth.
//!
//! Exhaustive verifiers for distinguishability and list union-freeness, a
//! definite-negatives group-testing decoder, and the balls-into-bins Monte
//! Carlo. Enumeration is bounded by a subset budget so an oversized request
//! fails with [`EdocsError::BudgetExceeded`] instead of running indefinitely.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::designs::floor_fraction;
use crate::error::{invalid, EdocsError, Result};
use crate::exec::Exec;
use crate::rng;
use crate::sensing::{BinaryDesign, MeasurementBits};

pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest number of subsets (or subset pairs) a verifier may enumerate.
    pub budget: u128,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, exec: Exec::default() }
    }
}

impl VerifyOptions {
    pub fn with_budget(budget: u128) -> Self {
        Self { budget, ..Self::default() }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(EdocsError::BudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}

/// Visit every `k`-combination of `pool` (in lexicographic order) appended to
/// `prefix`. Stops early and returns `false` as soon as `f` does.
fn all_combinations<F>(pool: &[usize], k: usize, prefix: &mut Vec<usize>, f: &mut F) -> bool
where
    F: FnMut(&[usize]) -> bool,
{
    if k == 0 {
        return f(prefix);
    }
    if pool.len() < k {
        return true;
    }
    for start in 0..=pool.len() - k {
        prefix.push(pool[start]);
        let ok = all_combinations(&pool[start + 1..], k - 1, prefix, f);
        prefix.pop();
        if !ok {
            return false;
        }
    }
    true
}

/// Runs `f` over every `k`-subset of `0..n`, parallelised over the smallest
/// element.
fn all_subsets<F>(n: usize, k: usize, exec: Exec, f: F) -> bool
where
    F: Fn(&[usize]) -> bool + Sync + Send,
{
    if k == 0 {
        return f(&[]);
    }
    let pool: Vec<usize> = (0..n).collect();
    exec.all(n, |first| {
        let mut prefix = vec![first];
        let mut g = |s: &[usize]| f(s);
        all_combinations(&pool[first + 1..], k - 1, &mut prefix, &mut g)
    })
}

fn or_into(acc: &mut [u64], bits: &[u64]) {
    for (a, b) in acc.iter_mut().zip(bits) {
        *a |= b;
    }
}

/// Number of support members of `subset` that own a private row, i.e. a row
/// whose intersection with `subset` is exactly that member.
fn private_count(cols: &[Vec<u64>], subset: &[usize], scratch: &mut [u64]) -> usize {
    subset
        .iter()
        .enumerate()
        .filter(|&(pos, &i)| {
            scratch.fill(0);
            for (q, &o) in subset.iter().enumerate() {
                if q != pos {
                    or_into(scratch, &cols[o]);
                }
            }
            cols[i].iter().zip(scratch.iter()).any(|(c, s)| c & !s != 0)
        })
        .count()
}

/// (k, l)-distinguishability: for every `k`-subset of columns, more than
/// `k - l` of its members own a private row.
pub fn check_distinguishable(m: &BinaryDesign, k: usize, l: usize, opts: VerifyOptions) -> Result<bool> {
    if k == 0 || k > m.cols() {
        return Err(invalid(format!("support size {k} outside 1..={}", m.cols())));
    }
    check_budget(binomial(m.cols(), k), opts.budget)?;
    let cols = m.column_bitsets();
    let words = m.rows().div_ceil(64);
    let need = k.saturating_sub(l) + 1;
    Ok(all_subsets(m.cols(), k, opts.exec, |subset| {
        let mut scratch = vec![0u64; words];
        private_count(&cols, subset, &mut scratch) >= need
    }))
}

/// (k, eps)-strong distinguishability: (k', max(1, floor(eps k')))-distinguishable
/// for every `k' <= k`.
pub fn check_strongly_distinguishable(m: &BinaryDesign, k: usize, eps: f64, opts: VerifyOptions) -> Result<bool> {
    let total: u128 = (1..=k).map(|kp| binomial(m.cols(), kp)).fold(0u128, u128::saturating_add);
    check_budget(total, opts.budget)?;
    for kp in 1..=k {
        let l = floor_fraction(eps, kp).max(1);
        if !check_distinguishable(m, kp, l, opts)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// (n, m, d, k, l, alpha) list union-freeness: for all disjoint `S` (|S| = l)
/// and `T` (|T| = k), some `j` in `S` overlaps the union of the other listed
/// columns in fewer than `alpha * |B_j|` rows.
pub fn check_list_uf(m: &BinaryDesign, k: usize, l: usize, alpha: f64, opts: VerifyOptions) -> Result<bool> {
    let n = m.cols();
    if l == 0 || l + k > n {
        return Err(invalid(format!("need l >= 1 and l + k <= n, got l={l}, k={k}, n={n}")));
    }
    let required = binomial(n, l).saturating_mul(binomial(n - l, k));
    check_budget(required, opts.budget)?;
    let cols = m.column_bitsets();
    let words = m.rows().div_ceil(64);
    let weights: Vec<usize> = m.columns().iter().map(Vec::len).collect();
    Ok(all_subsets(n, l, opts.exec, |s| {
        let complement: Vec<usize> = (0..n).filter(|i| !s.contains(i)).collect();
        let mut scratch = vec![0u64; words];
        let mut prefix = Vec::with_capacity(k);
        let mut check_t = |t: &[usize]| {
            s.iter().any(|&j| {
                scratch.fill(0);
                for &o in s.iter().chain(t) {
                    if o != j {
                        or_into(&mut scratch, &cols[o]);
                    }
                }
                let overlap: u32 = cols[j].iter().zip(&scratch).map(|(c, u)| (c & u).count_ones()).sum();
                (overlap as f64) < alpha * weights[j] as f64
            })
        };
        all_combinations(&complement, k, &mut prefix, &mut check_t)
    }))
}

/// Strong list union-freeness: (k', max(1, floor(eps k')), alpha) list UF for
/// every `k' <= k` with room for both lists.
pub fn check_strongly_list_uf(m: &BinaryDesign, k: usize, eps: f64, alpha: f64, opts: VerifyOptions) -> Result<bool> {
    for kp in 1..=k {
        let l = floor_fraction(eps, kp).max(1);
        if l + kp > m.cols() {
            continue;
        }
        if !check_list_uf(m, kp, l, alpha, opts)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Definite-negatives elimination: every item all of whose tests are positive.
/// Under OR semantics this is the largest set consistent with the outcomes.
pub fn exhaustive_gt_decode(b: &BinaryDesign, y: &MeasurementBits) -> Result<BTreeSet<usize>> {
    if y.len() != b.rows() {
        return Err(EdocsError::DimensionMismatch { expected: b.rows(), actual: y.len() });
    }
    Ok((0..b.cols()).filter(|&j| b.column(j).iter().all(|&r| y.get(r as usize))).collect())
}

/// Balls-into-bins experiment: `balls` balls thrown uniformly into `bins`
/// bins, counting trials whose fullest bin holds more than `threshold` balls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BibConfig {
    pub balls: usize,
    pub bins: usize,
    pub threshold: usize,
    pub trials: usize,
    pub seed: u64,
}

impl BibConfig {
    fn validate(&self) -> Result<()> {
        if self.balls == 0 || self.bins == 0 || self.trials == 0 {
            return Err(invalid("balls, bins and trials must be positive"));
        }
        Ok(())
    }
}

const BIB_STREAM: u64 = 0xB1B0;

/// Maximum bin load of each trial. Trial `t` draws from its own stream, so the
/// result does not depend on the threshold or on scheduling.
pub fn bib_max_loads(cfg: &BibConfig, exec: Exec) -> Result<Vec<usize>> {
    cfg.validate()?;
    Ok(exec.map(cfg.trials, |t| {
        let mut rng = rng::stream(cfg.seed, &[BIB_STREAM, t as u64]);
        let mut bins: Vec<usize> = (0..cfg.balls).map(|_| rng.random_range(0..cfg.bins)).collect();
        bins.sort_unstable();
        let mut best = 0;
        let mut run = 0;
        for w in 0..bins.len() {
            run = if w > 0 && bins[w] == bins[w - 1] { run + 1 } else { 1 };
            best = best.max(run);
        }
        best
    }))
}

/// Empirical probability that some bin exceeds the threshold.
pub fn bib_simulate(cfg: &BibConfig) -> Result<f64> {
    bib_simulate_with(cfg, Exec::default())
}

pub fn bib_simulate_with(cfg: &BibConfig, exec: Exec) -> Result<f64> {
    let loads = bib_max_loads(cfg, exec)?;
    Ok(exceed_fraction(&loads, cfg.threshold))
}

pub fn exceed_fraction(max_loads: &[usize], threshold: usize) -> f64 {
    if max_loads.is_empty() {
        return 0.0;
    }
    max_loads.iter().filter(|&&l| l > threshold).count() as f64 / max_loads.len() as f64
}

/// Per-level overflow bound `(C k)^(1 - alpha)` for `k` defectives in `C k` tests.
pub fn overflow_level_bound(k: usize, alpha: f64, tests_per_defective: usize) -> f64 {
    ((tests_per_defective * k) as f64).powf(1.0 - alpha)
}

/// Whole-tree overflow bound `log2(n) (16k)^(1 - alpha)`.
pub fn overflow_tree_bound(n: usize, k: usize, alpha: f64) -> f64 {
    (n as f64).log2() * overflow_level_bound(k, alpha, 16)
}

/// Error bound of the binary-splitting decoder: `e^-k + n^-k + 5 k^-3`.
pub fn splitting_error_bound(n: usize, k: usize) -> f64 {
    let kf = k as f64;
    (-kf).exp() + (n as f64).powf(-kf) + 5.0 * kf.powi(-3)
}

/// One machine-readable verifier verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictRecord {
    pub design_hash: u64,
    pub property: String,
    pub params: Vec<(String, String)>,
    pub verdict: bool,
}

impl VerdictRecord {
    pub fn new(design: &BinaryDesign, property: &str, params: Vec<(String, String)>, verdict: bool) -> Self {
        Self {
            design_hash: rng::fingerprint(design.to_text().as_bytes()),
            property: property.to_string(),
            params,
            verdict,
        }
    }
}

impl fmt::Display for VerdictRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "design={:016x} property={}", self.design_hash, self.property)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        write!(f, " verdict={}", if self.verdict { "pass" } else { "fail" })
    }
}
