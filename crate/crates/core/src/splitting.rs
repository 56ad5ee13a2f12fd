//! Fast binary splitting: a nonadaptive group-testing design over the binary
//! prefix tree of item indices, decodable in `O(k log n)`.
//!
//! Nodes at level `l` are the `2^l` prefixes of length `l` of the `log2 n`-bit
//! item index. The grow-and-prune phase has one band of `C k` tests for each
//! level `log2 k + 1 ..= log2 n`; every node of the level goes to one test of
//! the band chosen by a seeded hash. The leaf-trimming phase adds `log2 k`
//! further bands in which every leaf is hashed again. Assignments are never
//! stored: the decoder recomputes them in O(1) per candidate.

use std::collections::BTreeSet;

use crate::error::{invalid, EdocsError, Result};
use crate::rng;
use crate::sensing::{BinaryDesign, MeasurementBits};

pub const DEFAULT_TESTS_PER_DEFECTIVE: usize = 16;
pub const DEFAULT_CAP: usize = 8;

const GROW_STREAM: u64 = 0x6120;
const TRIM_STREAM: u64 = 0x7217;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FbsDesign {
    n: usize,
    k: usize,
    log_n: u32,
    log_k: u32,
    tests_per_defective: usize,
    seed: u64,
}

/// Which part of the design a test id belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSlot {
    /// Grow-and-prune test for nodes at the given prefix length.
    Level(u32),
    /// Leaf-trimming test of the given group.
    Trim(u32),
}

pub fn is_pow2(v: usize) -> bool {
    v.is_power_of_two()
}

/// Smallest powers of two covering `n` and `k`, with `k >= 2`.
pub fn pad_pow2(n: usize, k: usize) -> (usize, usize) {
    (n.next_power_of_two(), k.max(2).next_power_of_two())
}

pub fn build_fbs(n: usize, k: usize, tests_per_defective: usize, seed: u64) -> Result<FbsDesign> {
    if !is_pow2(n) || !is_pow2(k) {
        return Err(invalid(format!("n and k must be powers of two (pad first), got n={n}, k={k}")));
    }
    if k < 2 || k >= n {
        return Err(invalid(format!("need 2 <= k < n, got k={k}, n={n}")));
    }
    if tests_per_defective == 0 {
        return Err(invalid("tests per defective must be positive"));
    }
    Ok(FbsDesign {
        n,
        k,
        log_n: n.trailing_zeros(),
        log_k: k.trailing_zeros(),
        tests_per_defective,
        seed,
    })
}

impl FbsDesign {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    pub fn tests_per_defective(&self) -> usize {
        self.tests_per_defective
    }

    /// Tests in each band, `C k`.
    pub fn band_size(&self) -> usize {
        self.tests_per_defective * self.k
    }

    pub fn grow_levels(&self) -> std::ops::RangeInclusive<u32> {
        self.log_k + 1..=self.log_n
    }

    pub fn trim_groups(&self) -> u32 {
        self.log_k
    }

    pub fn grow_tests(&self) -> usize {
        self.band_size() * (self.log_n - self.log_k) as usize
    }

    pub fn trim_tests(&self) -> usize {
        self.band_size() * self.log_k as usize
    }

    /// Total test count `C k log2 n`.
    pub fn num_tests(&self) -> usize {
        self.grow_tests() + self.trim_tests()
    }

    /// Test holding the node with the given prefix at prefix length `level`.
    #[inline]
    pub fn level_test(&self, level: u32, node: usize) -> usize {
        debug_assert!(self.grow_levels().contains(&level));
        let band = (level - self.log_k - 1) as usize;
        let h = rng::derive(self.seed, &[GROW_STREAM, level as u64, node as u64]);
        band * self.band_size() + rng::reduce(h, self.band_size() as u64) as usize
    }

    /// Test holding `leaf` in trimming group `group`.
    #[inline]
    pub fn trim_test(&self, group: u32, leaf: usize) -> usize {
        let band = (self.log_n - self.log_k + group) as usize;
        let h = rng::derive(self.seed, &[TRIM_STREAM, group as u64, leaf as u64]);
        band * self.band_size() + rng::reduce(h, self.band_size() as u64) as usize
    }

    pub fn slot(&self, test: usize) -> Result<TestSlot> {
        if test >= self.num_tests() {
            return Err(EdocsError::IndexOutOfRange { index: test, dim: self.num_tests() });
        }
        let band = (test / self.band_size()) as u32;
        let grow = self.log_n - self.log_k;
        Ok(if band < grow { TestSlot::Level(self.log_k + 1 + band) } else { TestSlot::Trim(band - grow) })
    }

    /// The `log2 n` tests containing `item`, in ascending order: one per
    /// grow level, then one per trimming group.
    pub fn item_tests(&self, item: usize) -> impl Iterator<Item = usize> + '_ {
        let grow = self.grow_levels().map(move |l| self.level_test(l, item >> (self.log_n - l)));
        let trim = (0..self.trim_groups()).map(move |g| self.trim_test(g, item));
        grow.chain(trim)
    }

    /// Items in test `test`: every leaf under the nodes hashed to it, or the
    /// leaves hashed to it for a trimming test. Costs `O(2^level)`.
    pub fn row_support(&self, test: usize) -> Result<Vec<usize>> {
        Ok(match self.slot(test)? {
            TestSlot::Level(level) => {
                let shift = self.log_n - level;
                (0..1usize << level)
                    .filter(|&node| self.level_test(level, node) == test)
                    .flat_map(|node| (node << shift)..((node + 1) << shift))
                    .collect()
            }
            TestSlot::Trim(group) => (0..self.n).filter(|&leaf| self.trim_test(group, leaf) == test).collect(),
        })
    }

    /// Materialise the full test matrix; every column has weight `log2 n`.
    pub fn to_binary_design(&self) -> BinaryDesign {
        let supports = (0..self.n).map(|j| self.item_tests(j).map(|t| t as u32).collect()).collect();
        BinaryDesign::from_supports(self.num_tests(), supports).expect("item tests are distinct and in range")
    }

    /// Noiseless OR-semantics outcomes for a defective set.
    pub fn simulate_or(&self, defectives: &[usize]) -> Result<MeasurementBits> {
        let mut bits = vec![false; self.num_tests()];
        for &d in defectives {
            if d >= self.n {
                return Err(EdocsError::IndexOutOfRange { index: d, dim: self.n });
            }
            for t in self.item_tests(d) {
                bits[t] = true;
            }
        }
        Ok(MeasurementBits::new(bits))
    }

    pub fn to_config(&self) -> String {
        format!(
            "n={}\nk={}\ntests_per_defective={}\nseed={}\n",
            self.n, self.k, self.tests_per_defective, self.seed
        )
    }
}

/// Output of the binary-splitting decoder.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GtResult {
    pub positives: BTreeSet<usize>,
    /// Set when the candidate cap or the visit budget was hit.
    pub failed: bool,
    pub candidates_peak: usize,
    /// Child nodes and leaf checks examined.
    pub node_visits: usize,
    /// Measurement bits read before group-testing decoding (zero when the
    /// decoder is handed group-testing outcomes directly).
    pub measurement_reads: usize,
}

pub fn fbs_decode(design: &FbsDesign, y: &MeasurementBits) -> Result<GtResult> {
    fbs_decode_with(design, y, DEFAULT_CAP)
}

/// Grow-and-prune from the `k` prefixes of length `log2 k`, keeping a child
/// iff its test is positive, then keep a leaf iff it is positive in every
/// trimming group. More than `cap * k` candidates at any level, or more than
/// `cap * k * log2 n` visits in total, aborts with `failed` set.
pub fn fbs_decode_with(design: &FbsDesign, y: &MeasurementBits, cap: usize) -> Result<GtResult> {
    if y.len() != design.num_tests() {
        return Err(EdocsError::DimensionMismatch { expected: design.num_tests(), actual: y.len() });
    }
    let max_candidates = cap * design.k;
    let max_visits = max_candidates * design.log_n as usize;
    let mut out = GtResult { candidates_peak: design.k, ..GtResult::default() };
    let fail = |mut out: GtResult| {
        out.failed = true;
        out.positives.clear();
        Ok(out)
    };

    let mut candidates: Vec<usize> = (0..design.k).collect();
    let mut next = Vec::with_capacity(max_candidates);
    for level in design.grow_levels() {
        next.clear();
        for &node in &candidates {
            for child in [node << 1, (node << 1) | 1] {
                if out.node_visits == max_visits {
                    return fail(out);
                }
                out.node_visits += 1;
                if y.get(design.level_test(level, child)) {
                    next.push(child);
                }
            }
        }
        out.candidates_peak = out.candidates_peak.max(next.len());
        if next.len() > max_candidates {
            return fail(out);
        }
        std::mem::swap(&mut candidates, &mut next);
    }

    for leaf in candidates {
        let mut keep = true;
        for group in 0..design.trim_groups() {
            if out.node_visits == max_visits {
                return fail(out);
            }
            out.node_visits += 1;
            if !y.get(design.trim_test(group, leaf)) {
                keep = false;
                break;
            }
        }
        if keep {
            out.positives.insert(leaf);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exhaustive_gt_decode;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_for_n8_k2() {
        let d = build_fbs(8, 2, 16, 1).unwrap();
        assert_eq!(d.num_tests(), 96);
        assert_eq!(d.grow_levels().count(), 2);
        assert_eq!(d.grow_tests(), 64);
        assert_eq!(d.trim_tests(), 32);
    }

    #[test]
    fn build_errors() {
        assert!(build_fbs(12, 2, 16, 0).is_err());
        assert!(build_fbs(16, 3, 16, 0).is_err());
        assert!(build_fbs(16, 16, 16, 0).is_err());
        assert!(build_fbs(16, 1, 16, 0).is_err());
        assert!(build_fbs(16, 2, 0, 0).is_err());
        assert_eq!(pad_pow2(1000, 5), (1024, 8));
        assert_eq!(pad_pow2(8, 1), (8, 2));
    }

    #[test]
    fn seeded_assignment_is_deterministic() {
        let a = build_fbs(64, 4, 16, 5).unwrap();
        let b = build_fbs(64, 4, 16, 5).unwrap();
        assert_eq!(a.to_binary_design(), b.to_binary_design());
        let c = build_fbs(64, 4, 16, 6).unwrap();
        assert_ne!(a.to_binary_design(), c.to_binary_design());
    }

    #[test]
    fn every_item_once_per_band() {
        let d = build_fbs(256, 8, 16, 3).unwrap();
        let band = d.band_size();
        for item in 0..d.n() {
            let tests: Vec<usize> = d.item_tests(item).collect();
            assert_eq!(tests.len(), 8);
            for (b, &t) in tests.iter().enumerate() {
                assert_eq!(t / band, b);
            }
        }
        let design = d.to_binary_design();
        assert_eq!(design.col_weight(), Some(8));
        assert_eq!(design.rows(), d.num_tests());
    }

    #[test]
    fn row_supports_match_materialised_design() {
        let d = build_fbs(64, 4, 16, 9).unwrap();
        let rows = d.to_binary_design().row_supports();
        assert_eq!(rows.len(), d.num_tests());
        for (t, row) in rows.iter().enumerate() {
            let expected: Vec<usize> = row.iter().map(|&c| c as usize).collect();
            assert_eq!(d.row_support(t).unwrap(), expected, "test {t}");
        }
        assert!(d.row_support(d.num_tests()).is_err());
    }

    #[test]
    fn grow_band_covers_all_items() {
        let d = build_fbs(8, 2, 16, 1).unwrap();
        let band = d.band_size();
        let mut covered = BTreeSet::new();
        for t in 0..band {
            covered.extend(d.row_support(t).unwrap());
        }
        assert_eq!(covered, (0..8).collect());
    }

    #[test]
    fn first_level_tests_hold_whole_nodes() {
        // Level 2 of (n=8, k=2): four nodes of two leaves each, spread over 32 tests.
        let d = build_fbs(8, 2, 16, 1).unwrap();
        let nonempty: Vec<Vec<usize>> =
            (0..32).map(|t| d.row_support(t).unwrap()).filter(|s| !s.is_empty()).collect();
        let total: usize = nonempty.iter().map(Vec::len).sum();
        assert_eq!(total, 8);
        for s in &nonempty {
            assert_eq!(s.len() % 2, 0);
            for pair in s.chunks(2) {
                assert_eq!(pair[0] / 2, pair[1] / 2);
                assert_eq!(pair[0] % 2, 0);
            }
        }
        // for this seed the four nodes land in four distinct tests
        assert_eq!(nonempty.len(), 4);
    }

    #[test]
    fn trim_tests_hold_individual_leaves() {
        let d = build_fbs(64, 4, 16, 2).unwrap();
        let start = d.grow_tests();
        for t in start..d.num_tests() {
            for leaf in d.row_support(t).unwrap() {
                let group = ((t - start) / d.band_size()) as u32;
                assert_eq!(d.trim_test(group, leaf), t);
            }
        }
    }

    #[test]
    fn decode_empty_and_single() {
        let d = build_fbs(256, 4, 16, 4).unwrap();
        let r = fbs_decode(&d, &MeasurementBits::zeros(d.num_tests())).unwrap();
        assert!(r.positives.is_empty());
        assert!(!r.failed);
        for item in [0usize, 17, 128, 255] {
            let y = d.simulate_or(&[item]).unwrap();
            let r = fbs_decode(&d, &y).unwrap();
            assert_eq!(r.positives, BTreeSet::from([item]));
        }
        assert!(fbs_decode(&d, &MeasurementBits::zeros(3)).is_err());
    }

    #[test]
    fn all_positive_tests_trip_the_cap() {
        let d = build_fbs(1024, 4, 16, 4).unwrap();
        let r = fbs_decode(&d, &MeasurementBits::new(vec![true; d.num_tests()])).unwrap();
        assert!(r.failed);
        assert!(r.positives.is_empty());
        assert!(r.node_visits <= DEFAULT_CAP * 4 * 10);
    }

    #[test]
    fn planted_k32_has_no_errors() {
        // Error bound e^-32 + n^-32 + 5/32^3 ~ 1.5e-4 per run.
        let n = 1 << 12;
        let k = 32;
        let mut errors = 0;
        for seed in 0..1000u64 {
            let d = build_fbs(n, k, 16, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
            let planted: BTreeSet<usize> = sample(&mut rng, n, k).into_iter().collect();
            let y = d.simulate_or(&planted.iter().copied().collect::<Vec<_>>()).unwrap();
            let r = fbs_decode(&d, &y).unwrap();
            assert!(r.node_visits <= DEFAULT_CAP * k * 12);
            if r.failed || r.positives != planted {
                errors += 1;
            }
        }
        assert_eq!(errors, 0);
    }

    #[test]
    fn decoder_is_inside_definite_negative_set() {
        let d = build_fbs(256, 4, 16, 12).unwrap();
        let b = d.to_binary_design();
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let planted: Vec<usize> = sample(&mut rng, 256, 4).into_vec();
            let y = d.simulate_or(&planted).unwrap();
            let r = fbs_decode(&d, &y).unwrap();
            let comp = exhaustive_gt_decode(&b, &y).unwrap();
            assert!(r.positives.is_subset(&comp));
            assert!(planted.iter().all(|p| r.positives.contains(p)));
        }
    }
}
