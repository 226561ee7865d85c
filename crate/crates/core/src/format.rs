//! Tensor formats, rank profiles, and the index bookkeeping behind mode
//! flattenings.
//!
//! Everything here is exact integer bookkeeping: the scalar invariants of a
//! profile, the lexicographic linearization of multi-indices, and the
//! row/column layout of each mode flattening. All types are immutable after
//! construction and safe to share across threads.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Ambient dimensions `n = (n_1, ..., n_d)` together with componentwise rank
/// bounds `k = (k_1, ..., k_d)`, `1 <= k_i <= n_i`.
///
/// The derived scalars are recomputed on access and never stored:
/// `N = prod(n_i) - 1`, `K = prod(k_i) - 1`, `D = sum(k_i (n_i - k_i))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormatProfile {
    k: Vec<u32>,
    n: Vec<u32>,
}

impl FormatProfile {
    pub fn new(k: Vec<u32>, n: Vec<u32>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::InvalidProfile("need at least one mode".into()));
        }
        if k.len() != n.len() {
            return Err(Error::InvalidProfile(format!(
                "k has {} modes but n has {}",
                k.len(),
                n.len()
            )));
        }
        for (i, (&ki, &ni)) in k.iter().zip(&n).enumerate() {
            if ki == 0 || ni == 0 {
                return Err(Error::InvalidProfile(format!(
                    "mode {}: dimensions must be positive",
                    i + 1
                )));
            }
            if ki > ni {
                return Err(Error::InvalidProfile(format!(
                    "mode {}: rank bound {} exceeds ambient dimension {}",
                    i + 1,
                    ki,
                    ni
                )));
            }
        }
        Ok(FormatProfile { k, n })
    }

    /// Tensor order `d`.
    pub fn order(&self) -> usize {
        self.k.len()
    }

    /// Rank bounds `k`.
    pub fn rank_bounds(&self) -> &[u32] {
        &self.k
    }

    /// Ambient dimensions `n`.
    pub fn ambient_dims(&self) -> &[u32] {
        &self.n
    }

    /// `N = n_1 ... n_d - 1`.
    pub fn scalar_n(&self) -> BigUint {
        product(&self.n) - BigUint::one()
    }

    /// `K = k_1 ... k_d - 1`.
    pub fn scalar_k(&self) -> BigUint {
        product(&self.k) - BigUint::one()
    }

    /// `D = sum_i k_i (n_i - k_i)`, the total Grassmannian dimension.
    ///
    /// A u128 cannot overflow here: each summand is below 2^62 and the number
    /// of modes is bounded by memory.
    pub fn scalar_d(&self) -> u128 {
        self.k
            .iter()
            .zip(&self.n)
            .map(|(&ki, &ni)| ki as u128 * (ni - ki) as u128)
            .sum()
    }

    /// `K + 1 = prod(k_i)` as a usize, when representable.
    pub fn core_len(&self) -> Option<usize> {
        self.k
            .iter()
            .try_fold(1usize, |acc, &ki| acc.checked_mul(ki as usize))
    }

    /// `N + 1 = prod(n_i)` as a usize, when representable.
    pub fn ambient_len(&self) -> Option<usize> {
        self.n
            .iter()
            .try_fold(1usize, |acc, &ni| acc.checked_mul(ni as usize))
    }

    /// Whether some tensor attains multilinear rank exactly `k`: the standard
    /// criterion `k_i <= prod_{j != i} k_j` for every mode (together with
    /// `k_i <= n_i`, which the constructor already guarantees).
    pub fn is_realizable(&self) -> bool {
        (0..self.k.len()).all(|i| {
            let bound = self.k[i] as u64;
            let mut prod = 1u64;
            for (j, &kj) in self.k.iter().enumerate() {
                if j != i {
                    prod = prod.saturating_mul(kj as u64);
                    if prod >= bound {
                        break;
                    }
                }
            }
            prod >= bound
        })
    }

    /// `k == n`: the variety is the whole projective space.
    pub fn is_full_space(&self) -> bool {
        self.k == self.n
    }

    /// Whether the degree/dimension formulas apply: the rank is realizable,
    /// or `k = n` where the variety is trivially all of projective space.
    pub fn formula_applies(&self) -> bool {
        self.is_realizable() || self.is_full_space()
    }

    /// Complex dimension `D + K` of the variety.
    pub fn dimension(&self) -> Result<BigUint> {
        if !self.formula_applies() {
            return Err(Error::RankNotRealizable { k: self.k.clone() });
        }
        Ok(self.scalar_k() + BigUint::from(self.scalar_d()))
    }

    /// The profile with modes reordered by `perm` (`perm[i]` is the source
    /// mode of the new mode `i`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.order(), "permutation length mismatch");
        FormatProfile {
            k: perm.iter().map(|&j| self.k[j]).collect(),
            n: perm.iter().map(|&j| self.n[j]).collect(),
        }
    }
}

fn product(dims: &[u32]) -> BigUint {
    dims.iter().map(|&x| BigUint::from(x)).product()
}

/// A 1-based tensor index `(i_1, ..., i_d)`.
///
/// Linearization is lexicographic with mode 1 varying slowest, i.e. row-major
/// over the bounds vector; `linearize` and `delinearize` are mutually inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(idx: Vec<u32>) -> Self {
        MultiIndex(idx)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    /// Flat offset of this index within `bounds`.
    pub fn linearize(&self, bounds: &[u32]) -> usize {
        assert_eq!(self.0.len(), bounds.len(), "index order mismatch");
        let mut off = 0usize;
        for (&i, &b) in self.0.iter().zip(bounds) {
            debug_assert!(i >= 1 && i <= b, "index component out of bounds");
            off = off * b as usize + (i - 1) as usize;
        }
        off
    }

    /// Inverse of [`MultiIndex::linearize`].
    pub fn delinearize(mut offset: usize, bounds: &[u32]) -> Self {
        let mut idx = vec![0u32; bounds.len()];
        for (slot, &b) in idx.iter_mut().zip(bounds).rev() {
            *slot = (offset % b as usize) as u32 + 1;
            offset /= b as usize;
        }
        debug_assert_eq!(offset, 0, "offset out of range for bounds");
        MultiIndex(idx)
    }
}

/// Row/column layout of a mode flattening.
///
/// Rows of the mode-`mode` flattening (0-based mode) are indexed by that
/// mode's index; columns enumerate the remaining indices lexicographically
/// with earlier modes varying slower. `offset(r, c)` is the flat position of
/// the corresponding entry in the linearized tensor.
#[derive(Clone, Debug)]
pub struct FlatteningIndexer {
    mode: usize,
    rows: usize,
    cols: usize,
    offsets: Vec<u32>,
}

impl FlatteningIndexer {
    pub fn new(bounds: &[u32], mode: usize) -> Self {
        assert!(mode < bounds.len(), "mode {mode} out of range");
        let rows = bounds[mode] as usize;
        let other: Vec<usize> = (0..bounds.len()).filter(|&j| j != mode).collect();
        let cols: usize = other.iter().map(|&j| bounds[j] as usize).product();

        let mut offsets = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut idx = vec![1u32; bounds.len()];
                let mut rem = c;
                for &j in other.iter().rev() {
                    idx[j] = (rem % bounds[j] as usize) as u32 + 1;
                    rem /= bounds[j] as usize;
                }
                idx[mode] = r as u32 + 1;
                offsets.push(MultiIndex::new(idx).linearize(bounds) as u32);
            }
        }
        FlatteningIndexer {
            mode,
            rows,
            cols,
            offsets,
        }
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Linear offset of entry `(r, c)` in the flattened tensor vector.
    pub fn offset(&self, r: usize, c: usize) -> usize {
        debug_assert!(r < self.rows && c < self.cols);
        self.offsets[r * self.cols + c] as usize
    }
}
