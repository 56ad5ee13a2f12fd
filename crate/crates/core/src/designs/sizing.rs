use std::fmt::Write as _;

use crate::error::{invalid, EdocsError, Result};

/// Multipliers in the row and weight formulas of both design stages.
///
/// The first stage (distinguishable matrix) uses `c_rows`/`c_weight`; the
/// second stage (list union-free matrix) uses `c_rows_uf`/`c_weight_uf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub c_rows: f64,
    pub c_weight: f64,
    pub c_rows_uf: f64,
    pub c_weight_uf: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c_rows: 4.0, c_weight: 4.0, c_rows_uf: 32.0, c_weight_uf: 4.0 }
    }
}

impl Constants {
    fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("c_rows", self.c_rows),
            ("c_weight", self.c_weight),
            ("c_rows_uf", self.c_rows_uf),
            ("c_weight_uf", self.c_weight_uf),
        ] {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizingKind {
    Approximate,
    Exact,
}

/// Dimensions of the two combinatorial designs behind a universal scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignParams {
    pub kind: SizingKind,
    pub n: usize,
    pub k: usize,
    /// Approximation parameter; `None` for exact recovery.
    pub eps: Option<f64>,
    /// Overlap fraction of the list union-free stage.
    pub alpha_uf: f64,
    pub constants: Constants,
    pub seed: u64,
    /// Rows m' and column weight d' of the distinguishable matrix.
    pub rows_first: usize,
    pub weight_first: usize,
    /// Rows m'' and column weight d'' of the list union-free matrix.
    pub rows_second: usize,
    pub weight_second: usize,
}

impl DesignParams {
    /// `l` used for the second-stage list union-free check at support size
    /// `k'`: `max(1, floor(eps/2 * k'))` for AA, 1 for AE.
    pub fn list_size(&self, k_prime: usize) -> usize {
        match self.eps {
            Some(eps) => floor_fraction(eps / 2.0, k_prime).max(1),
            None => 1,
        }
    }

    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            SizingKind::Approximate => "aa",
            SizingKind::Exact => "ae",
        };
        let _ = writeln!(out, "kind={kind}");
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "k={}", self.k);
        match self.eps {
            Some(e) => {
                let _ = writeln!(out, "eps={e}");
            }
            None => {
                let _ = writeln!(out, "eps=-");
            }
        }
        let _ = writeln!(out, "alpha_uf={}", self.alpha_uf);
        let _ = writeln!(out, "c_rows={}", self.constants.c_rows);
        let _ = writeln!(out, "c_weight={}", self.constants.c_weight);
        let _ = writeln!(out, "c_rows_uf={}", self.constants.c_rows_uf);
        let _ = writeln!(out, "c_weight_uf={}", self.constants.c_weight_uf);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "rows_first={}", self.rows_first);
        let _ = writeln!(out, "weight_first={}", self.weight_first);
        let _ = writeln!(out, "rows_second={}", self.rows_second);
        let _ = writeln!(out, "weight_second={}", self.weight_second);
        out
    }
}

/// `floor(frac * k)` with a small guard against products like `0.29 * 100`
/// landing just under an integer.
pub(crate) fn floor_fraction(frac: f64, k: usize) -> usize {
    (frac * k as f64 + 1e-9).floor() as usize
}

fn check_domain(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(invalid(format!("need 1 <= k < n, got k={k}, n={n}")));
    }
    Ok((n as f64 / k as f64).ln())
}

fn ceil_pos(v: f64) -> usize {
    (v.ceil() as usize).max(1)
}

fn finish(p: DesignParams) -> Result<DesignParams> {
    if p.weight_first > p.rows_first {
        return Err(EdocsError::Infeasible { weight: p.weight_first, rows: p.rows_first });
    }
    if p.weight_second > p.rows_second {
        return Err(EdocsError::Infeasible { weight: p.weight_second, rows: p.rows_second });
    }
    Ok(p)
}

/// Sizes for approximate recovery: both stages are built for `eps/2`, so
/// `m' = ceil(c_rows k (2/eps) ln(n/k))` and `d' = ceil(c_weight (2/eps) ln(n/k))`.
pub fn sizing_aa(n: usize, k: usize, eps: f64, constants: &Constants) -> Result<DesignParams> {
    let log_ratio = check_domain(n, k)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    constants.validate()?;
    let inv = 2.0 / eps;
    let kf = k as f64;
    finish(DesignParams {
        kind: SizingKind::Approximate,
        n,
        k,
        eps: Some(eps),
        alpha_uf: 0.5,
        constants: *constants,
        seed: 0,
        rows_first: ceil_pos(constants.c_rows * kf * inv * log_ratio),
        weight_first: ceil_pos(constants.c_weight * inv * log_ratio),
        rows_second: ceil_pos(constants.c_rows_uf * kf * inv * log_ratio),
        weight_second: ceil_pos(constants.c_weight_uf * inv * log_ratio),
    })
}

/// Sizes for exact recovery: `m' = ceil(c_rows k^2 ln(n/k))`, `d' = ceil(c_weight k ln(n/k))`.
pub fn sizing_ae(n: usize, k: usize, constants: &Constants) -> Result<DesignParams> {
    let log_ratio = check_domain(n, k)?;
    constants.validate()?;
    let kf = k as f64;
    finish(DesignParams {
        kind: SizingKind::Exact,
        n,
        k,
        eps: None,
        alpha_uf: 0.5,
        constants: *constants,
        seed: 0,
        rows_first: ceil_pos(constants.c_rows * kf * kf * log_ratio),
        weight_first: ceil_pos(constants.c_weight * kf * log_ratio),
        rows_second: ceil_pos(constants.c_rows_uf * kf * kf * log_ratio),
        weight_second: ceil_pos(constants.c_weight_uf * kf * log_ratio),
    })
}
