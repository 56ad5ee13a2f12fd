//! Universal approximate (AA) and exact (AE) schemes.
//!
//! The sensing matrix stacks two designs. The first is the U-magnification of
//! a distinguishable matrix `M` (`m'` rows, so `2L m'` measurements), which
//! lets the decoder spot singleton blocks and read off their index. The second
//! is a list union-free matrix `A''` (`m''` rows, weight `d''`) used to prune
//! false candidates by reading only the candidates' columns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::designs::{
    build_random_cw_design_with, build_signature, ceil_log2, decode_singleton, signature_rows, sizing_aa,
    sizing_ae, Constants, DesignParams, SignatureMatrix, SizingKind,
};
use crate::error::{invalid, EdocsError, Result};
use crate::exec::Exec;
use crate::oracle::{
    check_distinguishable, check_list_uf, check_strongly_distinguishable, check_strongly_list_uf, VerifyOptions,
};
use crate::rng;
use crate::sensing::{BinaryDesign, MeasurementBits, SparseSignal, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Aa,
    Ae,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Aa => "aa",
            SchemeKind::Ae => "ae",
        }
    }
}

/// When to run the exhaustive property checks on a freshly drawn design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Verification {
    /// Verify only at desk scale: `n <= 64` and `k <= 3`.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub constants: Constants,
    pub verification: Verification,
    /// Redraws allowed after a failed verification.
    pub max_retries: usize,
    pub budget: u128,
    pub exec: Exec,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            constants: Constants::default(),
            verification: Verification::Auto,
            max_retries: 16,
            budget: 10_000_000,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalScheme {
    kind: SchemeKind,
    params: DesignParams,
    signature: SignatureMatrix,
    /// Distinguishable matrix M; the first measurement stage is its U-magnification.
    first: BinaryDesign,
    /// List union-free matrix A''.
    second: BinaryDesign,
    /// Seed of the accepted draw (differs from `params.seed` after retries).
    draw_seed: u64,
    verified: bool,
}

/// Output of the two-stage decoder.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RecoveredSupport {
    pub indices: BTreeSet<usize>,
    /// Stage-one candidate set S'.
    pub candidates: BTreeSet<usize>,
    pub stage1_size: usize,
    /// Blocks scanned in stage one plus A'' entries read in stage two.
    pub column_reads: usize,
}

const RETRY_STREAM: u64 = 0x5EED;

pub fn build_aa(n: usize, k: usize, eps: f64, seed: u64, opts: &BuildOptions) -> Result<UniversalScheme> {
    let params = sizing_aa(n, k, eps, &opts.constants)?;
    build(SchemeKind::Aa, params, seed, opts)
}

pub fn build_ae(n: usize, k: usize, seed: u64, opts: &BuildOptions) -> Result<UniversalScheme> {
    let params = sizing_ae(n, k, &opts.constants)?;
    build(SchemeKind::Ae, params, seed, opts)
}

fn build(kind: SchemeKind, mut params: DesignParams, seed: u64, opts: &BuildOptions) -> Result<UniversalScheme> {
    params.seed = seed;
    let signature = build_signature(params.n)?;
    let verify = match opts.verification {
        Verification::Auto => params.n <= 64 && params.k <= 3,
        Verification::Always => true,
        Verification::Never => false,
    };
    let attempts = if verify { opts.max_retries + 1 } else { 1 };
    let mut failed_property = String::new();
    for attempt in 0..attempts {
        let draw_seed = if attempt == 0 { seed } else { rng::derive(seed, &[RETRY_STREAM, attempt as u64]) };
        let (first, second) = draw(&params, draw_seed, opts.exec)?;
        let scheme = UniversalScheme {
            kind,
            params: params.clone(),
            signature: signature.clone(),
            first,
            second,
            draw_seed,
            verified: false,
        };
        if !verify {
            return Ok(scheme);
        }
        match scheme.verify(VerifyOptions { budget: opts.budget, exec: opts.exec })? {
            None => return Ok(UniversalScheme { verified: true, ..scheme }),
            Some(property) => {
                log::debug!("draw {attempt} (seed {draw_seed}) failed {property}");
                failed_property = property;
            }
        }
    }
    Err(EdocsError::VerificationFailed { attempts, property: failed_property })
}

fn draw(params: &DesignParams, draw_seed: u64, exec: Exec) -> Result<(BinaryDesign, BinaryDesign)> {
    let first = build_random_cw_design_with(
        params.rows_first,
        params.n,
        params.weight_first,
        rng::derive(draw_seed, &[1]),
        exec,
    )?;
    let second = build_random_cw_design_with(
        params.rows_second,
        params.n,
        params.weight_second,
        rng::derive(draw_seed, &[2]),
        exec,
    )?;
    Ok((first, second))
}

impl UniversalScheme {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn eps(&self) -> Option<f64> {
        self.params.eps
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    /// L = ceil(log2 n).
    pub fn bits(&self) -> usize {
        self.signature.bits()
    }

    pub fn seed(&self) -> u64 {
        self.params.seed
    }

    pub fn draw_seed(&self) -> u64 {
        self.draw_seed
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn signature(&self) -> &SignatureMatrix {
        &self.signature
    }

    /// The distinguishable matrix M (before magnification).
    pub fn first_design(&self) -> &BinaryDesign {
        &self.first
    }

    pub fn second_design(&self) -> &BinaryDesign {
        &self.second
    }

    /// Materialised magnified matrix A'. Memory is `2L` times that of M.
    pub fn a_prime(&self) -> Result<BinaryDesign> {
        crate::designs::magnify(&self.first, &self.signature)
    }

    /// Rows of A' (`2L m'`).
    pub fn first_rows(&self) -> usize {
        2 * self.bits() * self.first.rows()
    }

    pub fn num_measurements(&self) -> usize {
        self.first_rows() + self.second.rows()
    }

    /// Runs the exhaustive property checks. Returns the first failing property.
    pub fn verify(&self, opts: VerifyOptions) -> Result<Option<String>> {
        let k = self.params.k;
        match self.kind {
            SchemeKind::Ae => {
                if !check_distinguishable(&self.first, k, 1, opts)? {
                    return Ok(Some(format!("({k},1)-distinguishable")));
                }
                if !check_list_uf(&self.second, k, 1, self.params.alpha_uf, opts)? {
                    return Ok(Some(format!("({k},1,{})-list-uf", self.params.alpha_uf)));
                }
            }
            SchemeKind::Aa => {
                let half = self.params.eps.expect("approximate scheme has eps") / 2.0;
                if !check_strongly_distinguishable(&self.first, k, half, opts)? {
                    return Ok(Some(format!("({k},{half})-strongly-distinguishable")));
                }
                if !check_strongly_list_uf(&self.second, k, half, self.params.alpha_uf, opts)? {
                    return Ok(Some(format!("({k},{half},{})-strongly-list-uf", self.params.alpha_uf)));
                }
            }
        }
        Ok(None)
    }

    pub fn measure(&self, x: &SparseSignal) -> Result<MeasurementBits> {
        self.measure_with(x, Tolerance::EXACT)
    }

    /// `nz([A'; A''] x)`, touching only the columns in `supp(x)`.
    pub fn measure_with(&self, x: &SparseSignal, tol: Tolerance) -> Result<MeasurementBits> {
        if x.dim() != self.n() {
            return Err(EdocsError::DimensionMismatch { expected: self.n(), actual: x.dim() });
        }
        let band = 2 * self.bits();
        let offset = self.first_rows();
        let mut acc = vec![0.0; self.num_measurements()];
        for &(j, v) in x.entries() {
            for &i in self.first.column(j) {
                let base = i as usize * band;
                for r in signature_rows(j, self.bits()) {
                    acc[base + r as usize] += v;
                }
            }
            for &r in self.second.column(j) {
                acc[offset + r as usize] += v;
            }
        }
        Ok(MeasurementBits::from_accumulator(&acc, tol))
    }

    /// Stage one alone: singleton indices found in the magnified blocks.
    pub fn decode_stage1(&self, y: &MeasurementBits) -> Result<(BTreeSet<usize>, usize)> {
        self.check_len(y)?;
        let band = 2 * self.bits();
        let mut candidates = BTreeSet::new();
        let mut reads = 0;
        for block in y.as_slice()[..self.first_rows()].chunks(band) {
            reads += 1;
            if let Some(j) = decode_singleton(block, self.n())? {
                candidates.insert(j);
            }
        }
        Ok((candidates, reads))
    }

    fn check_len(&self, y: &MeasurementBits) -> Result<()> {
        if y.len() != self.num_measurements() {
            return Err(EdocsError::DimensionMismatch { expected: self.num_measurements(), actual: y.len() });
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::from("edocs-universal v1\n");
        let _ = writeln!(out, "kind={}", self.kind.as_str());
        let _ = writeln!(out, "n={}", p.n);
        let _ = writeln!(out, "k={}", p.k);
        let _ = writeln!(out, "eps={}", p.eps.map_or_else(|| "-".to_string(), |e| e.to_string()));
        let _ = writeln!(out, "L={}", self.bits());
        let _ = writeln!(out, "seed={}", p.seed);
        let _ = writeln!(out, "draw_seed={}", self.draw_seed);
        let _ = writeln!(out, "c_rows={}", p.constants.c_rows);
        let _ = writeln!(out, "c_weight={}", p.constants.c_weight);
        let _ = writeln!(out, "c_rows_uf={}", p.constants.c_rows_uf);
        let _ = writeln!(out, "c_weight_uf={}", p.constants.c_weight_uf);
        let _ = writeln!(out, "verified={}", self.verified);
        out.push_str("[first]\n");
        out.push_str(&self.first.to_text());
        out.push_str("[second]\n");
        out.push_str(&self.second.to_text());
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let kv = parse_kv(text, "edocs-universal v1")?;
        let field = |key: &str| -> Result<&str> {
            kv.get(key)
                .map(String::as_str)
                .ok_or_else(|| EdocsError::Parse { line: 0, message: format!("missing key {key}") })
        };
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| EdocsError::Parse { line: 0, message: format!("{key}: {e}") })
        }
        let kind = match field("kind")? {
            "aa" => SchemeKind::Aa,
            "ae" => SchemeKind::Ae,
            other => return Err(EdocsError::Parse { line: 0, message: format!("unknown kind {other:?}") }),
        };
        let n: usize = num("n", field("n")?)?;
        let k: usize = num("k", field("k")?)?;
        let constants = Constants {
            c_rows: num("c_rows", field("c_rows")?)?,
            c_weight: num("c_weight", field("c_weight")?)?,
            c_rows_uf: num("c_rows_uf", field("c_rows_uf")?)?,
            c_weight_uf: num("c_weight_uf", field("c_weight_uf")?)?,
        };
        let mut params = match kind {
            SchemeKind::Aa => sizing_aa(n, k, num("eps", field("eps")?)?, &constants)?,
            SchemeKind::Ae => sizing_ae(n, k, &constants)?,
        };
        params.seed = num("seed", field("seed")?)?;
        let bits: usize = num("L", field("L")?)?;
        if bits != ceil_log2(n) {
            return Err(EdocsError::Parse { line: 0, message: format!("L={bits} does not match n={n}") });
        }

        let mut lines = text.lines().enumerate().skip_while(|(_, l)| l.trim() != "[first]");
        lines.next().ok_or_else(|| EdocsError::Parse { line: 0, message: "missing [first] section".into() })?;
        let (first, _) = BinaryDesign::parse_lines(&mut lines)?;
        let (ln, marker) = lines
            .next()
            .ok_or_else(|| EdocsError::Parse { line: 0, message: "missing [second] section".into() })?;
        if marker.trim() != "[second]" {
            return Err(EdocsError::Parse { line: ln + 1, message: format!("expected [second], found {marker:?}") });
        }
        let (second, _) = BinaryDesign::parse_lines(&mut lines)?;

        let expect = |d: &BinaryDesign, rows: usize, weight: usize, name: &str| {
            if d.cols() != n || d.rows() != rows || d.col_weight() != Some(weight) {
                Err(invalid(format!("{name} design does not match its declared sizing")))
            } else {
                Ok(())
            }
        };
        expect(&first, params.rows_first, params.weight_first, "first")?;
        expect(&second, params.rows_second, params.weight_second, "second")?;
        debug_assert_eq!(
            params.kind,
            if kind == SchemeKind::Aa { SizingKind::Approximate } else { SizingKind::Exact }
        );
        Ok(Self {
            kind,
            params,
            signature: build_signature(n)?,
            first,
            second,
            draw_seed: num("draw_seed", field("draw_seed")?)?,
            verified: num("verified", field("verified")?)?,
        })
    }
}

/// Two-stage decoding. Stage one keeps every index decoded from a singleton
/// block; stage two drops a candidate `j` when fewer than `d''/2` rows of
/// `A''_j` are set in `y''` (ties are kept).
pub fn decode(scheme: &UniversalScheme, y: &MeasurementBits) -> Result<RecoveredSupport> {
    let (candidates, mut column_reads) = scheme.decode_stage1(y)?;
    let tail = &y.as_slice()[scheme.first_rows()..];
    let weight = scheme.params.weight_second;
    let mut indices = BTreeSet::new();
    for &j in &candidates {
        let column = scheme.second.column(j);
        column_reads += column.len();
        let hits = column.iter().filter(|&&r| tail[r as usize]).count();
        if 2 * hits >= weight {
            indices.insert(j);
        }
    }
    Ok(RecoveredSupport { stage1_size: candidates.len(), indices, candidates, column_reads })
}

/// `key=value` lines after a magic first line, up to the first `[section]`.
pub(crate) fn parse_kv(text: &str, magic: &str) -> Result<BTreeMap<String, String>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == magic => {}
        _ => return Err(EdocsError::Parse { line: 1, message: format!("expected header {magic:?}") }),
    }
    let mut out = BTreeMap::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.starts_with('[') {
            break;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| EdocsError::Parse { line: ln + 1, message: format!("expected key=value, found {line:?}") })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}
