//! Probabilistic exact recovery: every binary-splitting test is expanded into
//! a block of `k_alpha` real-valued rows (an AsTIM block) so that a test that
//! contains between 1 and `k_alpha` support items never measures all-zero.
//! Decoding collapses each block to one group-testing bit and hands the
//! result to the splitting decoder.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, EdocsError, Result};
use crate::rng;
use crate::sensing::{MeasurementBits, SparseSignal, Tolerance};
use crate::splitting::{build_fbs, fbs_decode_with, pad_pow2, FbsDesign, GtResult, DEFAULT_CAP};

const ASTIM_STREAM: u64 = 0xA571;
const BLOCK_SEED: u64 = 0xB10C;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AstimKind {
    /// I.i.d. standard normal coefficients.
    Gaussian,
    /// `1 / (r + c + 1)` over the support columns.
    Hilbert,
}

/// `l` rows whose nonzero pattern is exactly `support`, stored as an
/// `l x |support|` row-major coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AstimBlock {
    support: Vec<usize>,
    rows: usize,
    coeffs: Vec<f64>,
}

/// Coefficient column of `item` in a Gaussian block seeded with `seed`.
/// Exact zeros are redrawn so the nonzero pattern matches the support.
pub(crate) fn gaussian_column(seed: u64, item: usize, rows: usize) -> impl Iterator<Item = f64> {
    let mut rng = rng::stream(seed, &[ASTIM_STREAM, item as u64]);
    (0..rows).map(move |_| loop {
        let v: f64 = rng.sample(StandardNormal);
        if v != 0.0 {
            break v;
        }
    })
}

pub fn build_astim(support: &[usize], rows: usize, seed: u64, kind: AstimKind) -> Result<AstimBlock> {
    if support.is_empty() {
        return Err(invalid("AsTIM support must be nonempty"));
    }
    if rows == 0 {
        return Err(invalid("AsTIM needs at least one row"));
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    if support.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("AsTIM support has duplicate items"));
    }
    Ok(AstimBlock::generate(support, rows, seed, kind))
}

impl AstimBlock {
    fn generate(support: Vec<usize>, rows: usize, seed: u64, kind: AstimKind) -> Self {
        let width = support.len();
        let mut coeffs = vec![0.0; rows * width];
        match kind {
            AstimKind::Gaussian => {
                for (c, &item) in support.iter().enumerate() {
                    for (r, v) in gaussian_column(seed, item, rows).enumerate() {
                        coeffs[r * width + c] = v;
                    }
                }
            }
            AstimKind::Hilbert => {
                for r in 0..rows {
                    for c in 0..width {
                        coeffs[r * width + c] = 1.0 / (r + c + 1) as f64;
                    }
                }
            }
        }
        Self { support, rows, coeffs }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Coefficient at row `r` of the `c`-th support column.
    #[inline]
    pub fn coeff(&self, r: usize, c: usize) -> f64 {
        self.coeffs[r * self.support.len() + c]
    }

    pub fn column_position(&self, item: usize) -> Option<usize> {
        self.support.binary_search(&item).ok()
    }

    /// Dense `rows x dim` expansion.
    pub fn to_dense(&self, dim: usize) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| {
                let mut row = vec![0.0; dim];
                for (c, &item) in self.support.iter().enumerate() {
                    row[item] = self.coeff(r, c);
                }
                row
            })
            .collect()
    }
}

/// A vertical stack of AsTIM blocks over a common signal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSensingMatrix {
    dim: usize,
    blocks: Vec<AstimBlock>,
}

impl BlockSensingMatrix {
    pub fn new(dim: usize, blocks: Vec<AstimBlock>) -> Result<Self> {
        for b in &blocks {
            if let Some(&last) = b.support.last() {
                if last >= dim {
                    return Err(EdocsError::IndexOutOfRange { index: last, dim });
                }
            }
        }
        Ok(Self { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[AstimBlock] {
        &self.blocks
    }

    pub fn total_rows(&self) -> usize {
        self.blocks.iter().map(AstimBlock::rows).sum()
    }
}

/// `k_alpha = ceil(alpha ln(v) / ln ln(v))` with `v = C k` tests per band.
pub fn k_alpha(alpha: f64, k: usize, tests_per_defective: usize) -> Result<usize> {
    let v = (tests_per_defective * k) as f64;
    if v <= std::f64::consts::E {
        return Err(invalid(format!("C k = {v} too small for k_alpha")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok((alpha * v.ln() / v.ln().ln()).ceil() as usize)
}

/// Whether `k` clears `(ln n)^(1/(alpha-1))`, below which the overflow
/// probability does not vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCheck {
    pub threshold: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EeScheme {
    n: usize,
    k: usize,
    alpha: f64,
    k_alpha: usize,
    fbs: FbsDesign,
    seed: u64,
    regime: RegimeCheck,
}

pub fn build_ee(n: usize, k: usize, alpha: f64, tests_per_defective: usize, seed: u64) -> Result<EeScheme> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    if k == 0 || k >= n {
        return Err(invalid(format!("need 1 <= k < n, got k={k}, n={n}")));
    }
    let (n_pad, k_pad) = pad_pow2(n, k);
    let fbs = build_fbs(n_pad, k_pad, tests_per_defective, seed)?;
    let k_alpha = k_alpha(alpha, k_pad, tests_per_defective)?;
    let threshold = (n as f64).ln().powf(1.0 / (alpha - 1.0));
    let regime = RegimeCheck { threshold, satisfied: (k as f64) > threshold };
    if !regime.satisfied {
        log::warn!(
            "k = {k} is below the regime threshold (ln n)^(1/(alpha-1)) = {threshold:.3e}; \
             the overflow probability bound does not vanish"
        );
    }
    Ok(EeScheme { n, k, alpha, k_alpha, fbs, seed, regime })
}

impl EeScheme {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_alpha(&self) -> usize {
        self.k_alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fbs(&self) -> &FbsDesign {
        &self.fbs
    }

    pub fn regime(&self) -> RegimeCheck {
        self.regime
    }

    /// Number of AsTIM blocks, one per group test.
    pub fn num_blocks(&self) -> usize {
        self.fbs.num_tests()
    }

    /// Total measurements `k_alpha * C k log2 n`.
    pub fn num_measurements(&self) -> usize {
        self.k_alpha * self.num_blocks()
    }

    fn block_seed(&self, test: usize) -> u64 {
        rng::derive(self.seed, &[BLOCK_SEED, test as u64])
    }

    /// Block of test `test`, restricted to real items (padding items dropped).
    /// `None` when the test holds only padding.
    pub fn block(&self, test: usize) -> Result<Option<AstimBlock>> {
        let support: Vec<usize> = self.fbs.row_support(test)?.into_iter().filter(|&j| j < self.n).collect();
        if support.is_empty() {
            return Ok(None);
        }
        build_astim(&support, self.k_alpha, self.block_seed(test), AstimKind::Gaussian).map(Some)
    }

    /// Every block materialised; intended for small `n`.
    pub fn materialize(&self) -> Result<BlockSensingMatrix> {
        let blocks = (0..self.num_blocks())
            .map(|t| {
                Ok(self.block(t)?.unwrap_or_else(|| AstimBlock {
                    support: Vec::new(),
                    rows: self.k_alpha,
                    coeffs: Vec::new(),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        BlockSensingMatrix::new(self.n, blocks)
    }

    /// `nz(Ax)` computed column-sparsely: each support item touches its
    /// `log2 n` tests, `k_alpha` coefficients each.
    pub fn measure(&self, x: &SparseSignal, tol: Tolerance) -> Result<MeasurementBits> {
        if x.dim() != self.n {
            return Err(EdocsError::DimensionMismatch { expected: self.n, actual: x.dim() });
        }
        let ka = self.k_alpha;
        let mut acc = vec![0.0; self.num_measurements()];
        for &(j, v) in x.entries() {
            for t in self.fbs.item_tests(j) {
                let block = &mut acc[t * ka..(t + 1) * ka];
                for (a, c) in block.iter_mut().zip(gaussian_column(self.block_seed(t), j, ka)) {
                    *a += c * v;
                }
            }
        }
        Ok(MeasurementBits::from_accumulator(&acc, tol))
    }

    pub fn to_config(&self) -> String {
        let mut out = String::from("edocs-ee v1\n");
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "k={}", self.k);
        let _ = writeln!(out, "alpha={}", self.alpha);
        let _ = writeln!(out, "tests_per_defective={}", self.fbs.tests_per_defective());
        let _ = writeln!(out, "k_alpha={}", self.k_alpha);
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }

    pub fn from_config(text: &str) -> Result<Self> {
        let kv = crate::universal::parse_kv(text, "edocs-ee v1")?;
        let get = |key: &str| {
            kv.get(key)
                .ok_or_else(|| EdocsError::Parse { line: 0, message: format!("missing key {key}") })
        };
        let num = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|e| EdocsError::Parse { line: 0, message: format!("{key}: {e}") })
        };
        let alpha: f64 = get("alpha")?
            .parse()
            .map_err(|e| EdocsError::Parse { line: 0, message: format!("alpha: {e}") })?;
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|e| EdocsError::Parse { line: 0, message: format!("seed: {e}") })?;
        let scheme = build_ee(num("n")?, num("k")?, alpha, num("tests_per_defective")?, seed)?;
        if scheme.k_alpha != num("k_alpha")? {
            return Err(EdocsError::Parse { line: 0, message: "k_alpha does not match parameters".into() });
        }
        Ok(scheme)
    }
}

pub fn decode_ee(scheme: &EeScheme, y: &MeasurementBits) -> Result<GtResult> {
    decode_ee_with(scheme, y, DEFAULT_CAP)
}

/// Collapse each length-`k_alpha` block to `1` iff it is not all-zero, then
/// run the splitting decoder. Each bit is read at most once; reading a block
/// stops at its first set bit.
pub fn decode_ee_with(scheme: &EeScheme, y: &MeasurementBits, cap: usize) -> Result<GtResult> {
    if y.len() != scheme.num_measurements() {
        return Err(EdocsError::DimensionMismatch { expected: scheme.num_measurements(), actual: y.len() });
    }
    let mut reads = 0usize;
    let gt: Vec<bool> = y
        .blocks(scheme.k_alpha)
        .map(|block| {
            for &b in block {
                reads += 1;
                if b {
                    return true;
                }
            }
            false
        })
        .collect();
    let mut out = fbs_decode_with(&scheme.fbs, &MeasurementBits::new(gt), cap)?;
    out.positives.retain(|&j| j < scheme.n);
    out.measurement_reads = reads;
    Ok(out)
}
