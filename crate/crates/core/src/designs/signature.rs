use crate::error::{invalid, EdocsError, Result};
use crate::sensing::BinaryDesign;

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Signature matrix: column `j` is the L-bit binary form of `j` (MSB first)
/// stacked on its bitwise complement, so every column has weight exactly L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureMatrix {
    n: usize,
    bits: usize,
    design: BinaryDesign,
}

impl SignatureMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// L = ceil(log2 n).
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Row count 2L.
    pub fn rows(&self) -> usize {
        2 * self.bits
    }

    pub fn design(&self) -> &BinaryDesign {
        &self.design
    }

    pub fn column(&self, j: usize) -> &[u32] {
        self.design.column(j)
    }
}

/// Rows set in signature column `j` for an `L`-bit signature, in ascending
/// order: top-half rows first, then complement rows.
pub fn signature_rows(j: usize, bits: usize) -> impl Iterator<Item = u32> {
    let top = (0..bits).filter(move |&r| (j >> (bits - 1 - r)) & 1 == 1);
    let bottom = (0..bits).filter(move |&r| (j >> (bits - 1 - r)) & 1 == 0).map(move |r| r + bits);
    top.chain(bottom).map(|r| r as u32)
}

pub fn build_signature(n: usize) -> Result<SignatureMatrix> {
    if n < 2 {
        return Err(invalid(format!("signature matrix needs n >= 2, got {n}")));
    }
    let bits = ceil_log2(n);
    let supports = (0..n).map(|j| signature_rows(j, bits).collect()).collect();
    let design = BinaryDesign::from_supports(2 * bits, supports)?;
    Ok(SignatureMatrix { n, bits, design })
}

/// Identify a singleton block. Returns the index whose signature equals
/// `block` when the block has weight exactly L, its lower half is the exact
/// complement of its upper half, and the decoded value is below `n`.
pub fn decode_singleton(block: &[bool], n: usize) -> Result<Option<usize>> {
    let bits = ceil_log2(n);
    if block.len() != 2 * bits {
        return Err(EdocsError::DimensionMismatch { expected: 2 * bits, actual: block.len() });
    }
    let (top, bottom) = block.split_at(bits);
    if block.iter().filter(|&&b| b).count() != bits {
        return Ok(None);
    }
    if top.iter().zip(bottom).any(|(a, b)| a == b) {
        return Ok(None);
    }
    let value = top.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
    Ok((value < n).then_some(value))
}
