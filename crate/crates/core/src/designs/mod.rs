//! Combinatorial designs: the signature matrix, seeded constant-column-weight
//! random designs, U-magnification and the sizing formulas.

mod signature;
mod sizing;

pub use signature::{build_signature, ceil_log2, decode_singleton, signature_rows, SignatureMatrix};
pub use sizing::{sizing_aa, sizing_ae, Constants, DesignParams, SizingKind};

pub(crate) use sizing::floor_fraction;

use rand::seq::index::sample;

use crate::error::{EdocsError, Result};
use crate::exec::Exec;
use crate::rng;
use crate::sensing::BinaryDesign;

const DESIGN_STREAM: u64 = 0xD351_6E00;

/// Random design with `cols` columns, each an independent uniform `weight`-subset
/// of `0..rows`. Column `j` is drawn from its own stream derived from `(seed, j)`.
pub fn build_random_cw_design(rows: usize, cols: usize, weight: usize, seed: u64) -> Result<BinaryDesign> {
    build_random_cw_design_with(rows, cols, weight, seed, Exec::default())
}

pub fn build_random_cw_design_with(
    rows: usize,
    cols: usize,
    weight: usize,
    seed: u64,
    exec: Exec,
) -> Result<BinaryDesign> {
    if weight > rows {
        return Err(EdocsError::Infeasible { weight, rows });
    }
    let supports = exec.map(cols, |j| {
        let mut rng = rng::stream(seed, &[DESIGN_STREAM, j as u64]);
        let mut support: Vec<u32> = sample(&mut rng, rows, weight).into_iter().map(|r| r as u32).collect();
        support.sort_unstable();
        support
    });
    BinaryDesign::from_supports(rows, supports)
}

/// U-magnification: row `i` of `m` becomes a band of `2L` rows whose column `j`
/// is the signature column `U_j` where `m[i][j] = 1` and zero elsewhere.
pub fn magnify(m: &BinaryDesign, u: &SignatureMatrix) -> Result<BinaryDesign> {
    if m.cols() != u.n() {
        return Err(EdocsError::DimensionMismatch { expected: u.n(), actual: m.cols() });
    }
    let band = u.rows() as u32;
    let supports = (0..m.cols())
        .map(|j| {
            let sig = u.column(j);
            m.column(j)
                .iter()
                .flat_map(|&i| sig.iter().map(move |&r| i * band + r))
                .collect()
        })
        .collect();
    BinaryDesign::from_supports(m.rows() * u.rows(), supports)
}

/// The 2x8 matrix M, 6x8 signature U and 12x8 magnified A' printed in the
/// worked toy example, as dense 0/1 rows.
#[cfg(test)]
pub(crate) mod example1 {
    use crate::sensing::BinaryDesign;

    pub fn m_rows() -> Vec<Vec<u8>> {
        vec![vec![0, 0, 0, 1, 0, 1, 0, 0], vec![1, 0, 0, 0, 1, 0, 0, 1]]
    }

    pub fn u_rows() -> Vec<Vec<u8>> {
        vec![
            vec![0, 0, 0, 0, 1, 1, 1, 1],
            vec![0, 0, 1, 1, 0, 0, 1, 1],
            vec![0, 1, 0, 1, 0, 1, 0, 1],
            vec![1, 1, 1, 1, 0, 0, 0, 0],
            vec![1, 1, 0, 0, 1, 1, 0, 0],
            vec![1, 0, 1, 0, 1, 0, 1, 0],
        ]
    }

    pub fn a_prime_rows() -> Vec<Vec<u8>> {
        vec![
            vec![0, 0, 0, 0, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 0, 1, 0, 0],
            vec![0, 0, 0, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 1, 0, 0, 1],
            vec![0, 0, 0, 0, 0, 0, 0, 1],
            vec![0, 0, 0, 0, 0, 0, 0, 1],
            vec![1, 0, 0, 0, 0, 0, 0, 0],
            vec![1, 0, 0, 0, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 1, 0, 0, 0],
        ]
    }

    pub fn a_prime() -> BinaryDesign {
        BinaryDesign::from_dense_rows(&a_prime_rows()).unwrap()
    }
}
