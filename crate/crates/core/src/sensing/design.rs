use std::fmt::Write as _;

use crate::error::{EdocsError, Result};

/// Binary matrix stored column-wise: each column keeps the sorted list of rows
/// where it is 1.
///
/// Text format (all indices 0-based):
///
/// ```text
/// n m d
/// <rows of column 0, space separated>
/// ...
/// <rows of column n-1>
/// ```
///
/// `d` is the constant column weight, or `-` when columns differ in weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDesign {
    rows: usize,
    cols: usize,
    col_supports: Vec<Vec<u32>>,
    col_weight: Option<usize>,
}

impl BinaryDesign {
    /// Build from per-column supports. Supports are sorted; duplicates and
    /// out-of-range rows are rejected. The column weight is recorded when all
    /// columns share it.
    pub fn from_supports(rows: usize, mut col_supports: Vec<Vec<u32>>) -> Result<Self> {
        if rows > u32::MAX as usize {
            return Err(EdocsError::InvalidParameter(format!("row count {rows} too large")));
        }
        for support in col_supports.iter_mut() {
            support.sort_unstable();
            if let Some(w) = support.windows(2).find(|w| w[0] == w[1]) {
                return Err(EdocsError::InvalidParameter(format!("duplicate row {}", w[0])));
            }
            if let Some(&last) = support.last() {
                if last as usize >= rows {
                    return Err(EdocsError::IndexOutOfRange { index: last as usize, dim: rows });
                }
            }
        }
        let cols = col_supports.len();
        let col_weight = match col_supports.first() {
            Some(first) if col_supports.iter().all(|s| s.len() == first.len()) => Some(first.len()),
            _ => None,
        };
        Ok(Self { rows, cols, col_supports, col_weight })
    }

    /// Build from dense rows, each a slice of 0/1 entries.
    pub fn from_dense_rows(dense: &[Vec<u8>]) -> Result<Self> {
        let cols = dense.first().map_or(0, Vec::len);
        let mut supports = vec![Vec::new(); cols];
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(EdocsError::DimensionMismatch { expected: cols, actual: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => supports[c].push(r as u32),
                    other => {
                        return Err(EdocsError::InvalidParameter(format!("entry {other} is not binary")))
                    }
                }
            }
        }
        Self::from_supports(dense.len(), supports)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col_weight(&self) -> Option<usize> {
        self.col_weight
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.col_supports[j]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.col_supports
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.col_supports[col].binary_search(&(row as u32)).is_ok()
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<u8>> {
        let mut dense = vec![vec![0u8; self.cols]; self.rows];
        for (c, support) in self.col_supports.iter().enumerate() {
            for &r in support {
                dense[r as usize][c] = 1;
            }
        }
        dense
    }

    /// Row-major view: for each row, the sorted columns that contain it.
    pub fn row_supports(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.rows];
        for (c, support) in self.col_supports.iter().enumerate() {
            for &r in support {
                out[r as usize].push(c as u32);
            }
        }
        out
    }

    /// Columns as packed row bitsets, used by the brute-force verifiers.
    pub fn column_bitsets(&self) -> Vec<Vec<u64>> {
        let words = self.rows.div_ceil(64);
        self.col_supports
            .iter()
            .map(|support| {
                let mut bits = vec![0u64; words];
                for &r in support {
                    bits[r as usize / 64] |= 1u64 << (r % 64);
                }
                bits
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let weight = self.col_weight.map_or_else(|| "-".to_string(), |d| d.to_string());
        let _ = writeln!(out, "{} {} {}", self.cols, self.rows, weight);
        for support in &self.col_supports {
            let mut first = true;
            for r in support {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{r}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse the text format. Reads exactly `n` column lines after the header
    /// and ignores anything that follows, so a design can be embedded in a
    /// larger file.
    pub fn parse_text(text: &str) -> Result<Self> {
        Self::parse_lines(&mut text.lines().enumerate()).map(|(d, _)| d)
    }

    pub(crate) fn parse_lines<'a, I>(lines: &mut I) -> Result<(Self, usize)>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let (hline, header) = lines
            .next()
            .ok_or(EdocsError::Parse { line: 1, message: "missing header".into() })?;
        let perr = |line: usize, message: String| EdocsError::Parse { line: line + 1, message };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(perr(hline, format!("expected `n m d`, found {header:?}")));
        }
        let cols: usize = fields[0].parse().map_err(|e| perr(hline, format!("n: {e}")))?;
        let rows: usize = fields[1].parse().map_err(|e| perr(hline, format!("m: {e}")))?;
        let declared = match fields[2] {
            "-" => None,
            s => Some(s.parse::<usize>().map_err(|e| perr(hline, format!("d: {e}")))?),
        };
        let mut supports = Vec::with_capacity(cols);
        let mut last_line = hline;
        for c in 0..cols {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| perr(last_line + 1, format!("missing column {c}")))?;
            last_line = ln;
            let support = line
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|e| perr(ln, format!("row index {t:?}: {e}"))))
                .collect::<Result<Vec<u32>>>()?;
            supports.push(support);
        }
        let design = Self::from_supports(rows, supports).map_err(|e| perr(hline, e.to_string()))?;
        let consistent = match (declared, design.col_weight) {
            (None, None) => true,
            (Some(d), Some(w)) => d == w,
            // An empty design has weight Some(0) only if it has columns.
            (None, Some(_)) | (Some(_), None) => false,
        };
        if !consistent {
            return Err(perr(hline, "declared column weight does not match columns".into()));
        }
        Ok((design, last_line))
    }
}
