//! Sparse signals, one-bit measurements and the sign / nonzero quantizers.

mod design;

pub use design::BinaryDesign;

use std::fmt;

use crate::error::{EdocsError, Result};
use crate::foreach::BlockSensingMatrix;

/// Magnitude at or below which a measurement counts as zero. `Tolerance(0.0)`
/// is exact comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Tolerance {
    pub const EXACT: Tolerance = Tolerance(0.0);
    /// Cutoff used for floating-point trials.
    pub const FLOAT: Tolerance = Tolerance(1e-12);

    #[inline]
    pub fn is_zero(self, a: f64) -> bool {
        a.abs() <= self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::EXACT
    }
}

/// `+1` for `a >= 0`, `-1` otherwise.
pub fn sign_scalar(a: f64) -> Result<i8> {
    if !a.is_finite() {
        return Err(EdocsError::NonFinite(a));
    }
    Ok(if a >= 0.0 { 1 } else { -1 })
}

/// `1` iff `a != 0`.
pub fn nz_scalar(a: f64) -> Result<u8> {
    nz_scalar_with(a, Tolerance::EXACT)
}

pub fn nz_scalar_with(a: f64, tol: Tolerance) -> Result<u8> {
    if !a.is_finite() {
        return Err(EdocsError::NonFinite(a));
    }
    Ok(u8::from(!tol.is_zero(a)))
}

/// A k-sparse real vector: dimension plus sorted `(index, value)` pairs with
/// nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseSignal {
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(EdocsError::InvalidParameter("signal dimension must be positive".into()));
        }
        let mut entries: Vec<(usize, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(EdocsError::InvalidParameter(format!("duplicate index {}", w[0].0)));
            }
        }
        for &(i, v) in &entries {
            if i >= dim {
                return Err(EdocsError::IndexOutOfRange { index: i, dim });
            }
            if !v.is_finite() {
                return Err(EdocsError::NonFinite(v));
            }
            if v == 0.0 {
                return Err(EdocsError::InvalidParameter(format!("zero value stored at index {i}")));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, std::iter::empty())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// Support size k'.
    pub fn sparsity(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn support_set(&self) -> std::collections::BTreeSet<usize> {
        self.support().collect()
    }

    pub fn value(&self, index: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .ok()
            .map(|p| self.entries[p].1)
    }
}

/// The one-bit result vector `nz(Ax)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeasurementBits {
    bits: Vec<bool>,
}

impl MeasurementBits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Consecutive blocks of `block_len` bits.
    pub fn blocks(&self, block_len: usize) -> std::slice::Chunks<'_, bool> {
        self.bits.chunks(block_len)
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| u8::from(b)).collect()
    }

    pub fn from_u8(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(EdocsError::InvalidParameter(format!("bit value {other}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Parse a string of `0`/`1` characters; whitespace is ignored.
    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(EdocsError::Parse { line: 1, message: format!("bit {i}: {other:?}") }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub(crate) fn from_accumulator(acc: &[f64], tol: Tolerance) -> Self {
        Self { bits: acc.iter().map(|&a| !tol.is_zero(a)).collect() }
    }
}

impl fmt::Display for MeasurementBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `nz(Ax)` for a binary design, computed by scattering each support column.
pub fn measure_binary(design: &BinaryDesign, x: &SparseSignal) -> Result<MeasurementBits> {
    measure_binary_with(design, x, Tolerance::EXACT)
}

pub fn measure_binary_with(
    design: &BinaryDesign,
    x: &SparseSignal,
    tol: Tolerance,
) -> Result<MeasurementBits> {
    let mut acc = vec![0.0; design.rows()];
    accumulate_binary(design, x, &mut acc)?;
    Ok(MeasurementBits::from_accumulator(&acc, tol))
}

/// Adds `Ax` into `acc`, touching only the columns in `supp(x)`.
pub(crate) fn accumulate_binary(design: &BinaryDesign, x: &SparseSignal, acc: &mut [f64]) -> Result<()> {
    if design.cols() != x.dim() {
        return Err(EdocsError::DimensionMismatch { expected: design.cols(), actual: x.dim() });
    }
    for &(j, v) in x.entries() {
        for &r in design.column(j) {
            acc[r as usize] += v;
        }
    }
    Ok(())
}

/// Concatenation over blocks of `nz(C_i x)`.
pub fn measure_blocks(matrix: &BlockSensingMatrix, x: &SparseSignal) -> Result<MeasurementBits> {
    measure_blocks_with(matrix, x, Tolerance::EXACT)
}

pub fn measure_blocks_with(
    matrix: &BlockSensingMatrix,
    x: &SparseSignal,
    tol: Tolerance,
) -> Result<MeasurementBits> {
    if matrix.dim() != x.dim() {
        return Err(EdocsError::DimensionMismatch { expected: matrix.dim(), actual: x.dim() });
    }
    let mut bits = Vec::with_capacity(matrix.total_rows());
    let mut acc = Vec::new();
    for block in matrix.blocks() {
        acc.clear();
        acc.resize(block.rows(), 0.0);
        for &(j, v) in x.entries() {
            if let Some(col) = block.column_position(j) {
                for (r, a) in acc.iter_mut().enumerate() {
                    *a += block.coeff(r, col) * v;
                }
            }
        }
        bits.extend(acc.iter().map(|&a| !tol.is_zero(a)));
    }
    Ok(MeasurementBits::new(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::example1;
    use crate::foreach::{build_astim, AstimKind};
    use proptest::prelude::*;

    #[test]
    fn sign_examples() {
        assert_eq!(sign_scalar(0.0).unwrap(), 1);
        assert_eq!(sign_scalar(-3.5).unwrap(), -1);
        assert_eq!(sign_scalar(7.0).unwrap(), 1);
        assert!(sign_scalar(f64::NAN).is_err());
        assert!(sign_scalar(f64::INFINITY).is_err());
    }

    #[test]
    fn nz_examples() {
        assert_eq!(nz_scalar(0.0).unwrap(), 0);
        assert_eq!(nz_scalar(-3.0).unwrap(), 1);
        assert_eq!(nz_scalar(1e-300).unwrap(), 1);
        assert_eq!(nz_scalar_with(1e-300, Tolerance::FLOAT).unwrap(), 0);
        assert_eq!(nz_scalar(-0.0).unwrap(), 0);
        assert!(nz_scalar(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn nz_from_two_signs() {
        let grid = [-1e9, -2.5, -1e-300, -0.0, 0.0, 1e-300, 0.3, 4.0, 1e300];
        for a in grid {
            let both_nonneg = sign_scalar(a).unwrap() == 1 && sign_scalar(-a).unwrap() == 1;
            assert_eq!(nz_scalar(a).unwrap(), u8::from(!both_nonneg), "a = {a}");
        }
    }

    #[test]
    fn signal_validation() {
        assert!(SparseSignal::new(4, [(4, 1.0)]).is_err());
        assert!(SparseSignal::new(4, [(1, 0.0)]).is_err());
        assert!(SparseSignal::new(4, [(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseSignal::new(0, []).is_err());
        let x = SparseSignal::new(8, [(5, -1.0), (3, 2.0)]).unwrap();
        assert_eq!(x.support().collect::<Vec<_>>(), vec![3, 5]);
        assert_eq!(x.value(5), Some(-1.0));
        assert_eq!(x.value(4), None);
        assert_eq!(x.sparsity(), 2);
    }

    #[test]
    fn measure_binary_single_row() {
        let a = BinaryDesign::from_dense_rows(&[vec![0, 0, 0, 1, 0, 1, 0, 0]]).unwrap();
        let x = SparseSignal::new(8, [(3, 1.0), (5, 1.0)]).unwrap();
        assert_eq!(measure_binary(&a, &x).unwrap().to_u8(), vec![1]);
        let x = SparseSignal::new(8, [(3, 1.0), (5, -1.0)]).unwrap();
        assert_eq!(measure_binary(&a, &x).unwrap().to_u8(), vec![0]);
        let wrong = SparseSignal::new(9, [(3, 1.0)]).unwrap();
        assert!(matches!(measure_binary(&a, &wrong), Err(EdocsError::DimensionMismatch { .. })));
    }

    #[test]
    fn measure_binary_reads_column_of_example_a_prime() {
        let a_prime = example1::a_prime();
        let x = SparseSignal::new(8, [(3, 2.0)]).unwrap();
        let bits = measure_binary(&a_prime, &x).unwrap().to_u8();
        let col4: Vec<u8> = a_prime.to_dense_rows().iter().map(|r| r[3]).collect();
        assert_eq!(bits, col4);
    }

    #[test]
    fn measure_blocks_examples() {
        let v = build_astim(&[1, 2, 4, 7], 3, 0, AstimKind::Hilbert).unwrap();
        let m = BlockSensingMatrix::new(8, vec![v.clone()]).unwrap();
        let zero = SparseSignal::zero(8).unwrap();
        assert_eq!(measure_blocks(&m, &zero).unwrap().to_u8(), vec![0, 0, 0]);
        let x = SparseSignal::new(8, [(1, 1.0)]).unwrap();
        assert_eq!(measure_blocks(&m, &x).unwrap().to_u8(), vec![1, 1, 1]);
        let disjoint = SparseSignal::new(8, [(0, 1.0), (3, -2.0), (6, 0.5)]).unwrap();
        assert_eq!(measure_blocks(&m, &disjoint).unwrap().to_u8(), vec![0, 0, 0]);
        let wrong = SparseSignal::new(9, [(1, 1.0)]).unwrap();
        assert!(measure_blocks(&m, &wrong).is_err());
    }

    #[test]
    fn bits_text_roundtrip() {
        let b = MeasurementBits::parse("0110 1\n").unwrap();
        assert_eq!(b.to_string(), "01101");
        assert_eq!(b.weight(), 3);
        assert!(MeasurementBits::parse("012").is_err());
    }

    proptest! {
        // No false ones: a row disjoint from supp(x) always measures zero.
        #[test]
        fn disjoint_rows_measure_zero(
            cols in prop::collection::vec(prop::collection::btree_set(0u32..12, 0..5), 10),
            entries in prop::collection::btree_map(0usize..10, -5.0f64..5.0, 0..4),
        ) {
            let design = BinaryDesign::from_supports(12, cols.into_iter().map(|s| s.into_iter().collect()).collect()).unwrap();
            let entries: Vec<_> = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
            let x = SparseSignal::new(10, entries).unwrap();
            let bits = measure_binary(&design, &x).unwrap();
            let rows = design.row_supports();
            for (r, row) in rows.iter().enumerate() {
                if row.iter().all(|&c| x.value(c as usize).is_none()) {
                    prop_assert!(!bits.get(r));
                }
            }
        }
    }
}
