//! Symbolic generic tensors, their mode flattenings, and the bilinear Gram
//! matrices built from two variable blocks.

use num_bigint::BigInt;
use num_traits::One;

use crate::format::{FlatteningIndexer, FormatProfile, MultiIndex};
use crate::poly::{ExponentVec, SparsePolynomial};

/// Which variable block a generic tensor draws its entries from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBlock {
    X,
    Y,
}

/// A matrix of sparse polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<SparsePolynomial>,
}

impl SymbolicMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<SparsePolynomial>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        SymbolicMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &SparsePolynomial {
        assert!(r < self.rows && c < self.cols, "entry index out of range");
        &self.entries[r * self.cols + c]
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.entry(r, c).clone());
            }
        }
        SymbolicMatrix::new(self.cols, self.rows, entries)
    }

    /// Exact determinant with the automatic strategy: cofactor expansion for
    /// sizes up to 4, fraction-free elimination beyond, where intermediate
    /// swell matters more than the tiny-matrix overhead.
    pub fn det(&self) -> SparsePolynomial {
        if self.rows <= 4 {
            self.determinant(DetStrategy::Cofactor)
        } else {
            self.determinant(DetStrategy::FractionFree)
        }
    }

    /// Exact determinant with an explicit strategy. Both strategies return
    /// identical polynomials.
    pub fn determinant(&self, strategy: DetStrategy) -> SparsePolynomial {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let arity = self
            .entries
            .first()
            .map(|p| p.arity())
            .unwrap_or_default();
        if self.rows == 0 {
            return SparsePolynomial::one(arity);
        }
        match strategy {
            DetStrategy::Cofactor => det_cofactor(&self.entries, self.rows, arity),
            DetStrategy::FractionFree => det_bareiss(self.entries.clone(), self.rows, arity),
        }
    }
}

/// Determinant expansion strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetStrategy {
    /// Recursive cofactor expansion along the first row.
    Cofactor,
    /// Bareiss-style fraction-free elimination; every division is exact in
    /// the integral polynomial ring.
    FractionFree,
}

fn det_cofactor(m: &[SparsePolynomial], n: usize, arity: usize) -> SparsePolynomial {
    if n == 1 {
        return m[0].clone();
    }
    let mut acc = SparsePolynomial::zero(arity);
    let mut minor = Vec::with_capacity((n - 1) * (n - 1));
    for j in 0..n {
        if m[j].is_zero() {
            continue;
        }
        minor.clear();
        for r in 1..n {
            for c in 0..n {
                if c != j {
                    minor.push(m[r * n + c].clone());
                }
            }
        }
        let cof = m[j].mul(&det_cofactor(&minor, n - 1, arity));
        acc = if j % 2 == 0 { acc.add(&cof) } else { acc.sub(&cof) };
    }
    acc
}

fn det_bareiss(mut m: Vec<SparsePolynomial>, n: usize, arity: usize) -> SparsePolynomial {
    let mut sign_flip = false;
    let mut prev = SparsePolynomial::one(arity);
    for step in 0..n - 1 {
        // Find a nonzero pivot in the current column.
        let pivot_row = match (step..n).find(|&r| !m[r * n + step].is_zero()) {
            Some(r) => r,
            None => return SparsePolynomial::zero(arity),
        };
        if pivot_row != step {
            for c in 0..n {
                m.swap(step * n + c, pivot_row * n + c);
            }
            sign_flip = !sign_flip;
        }
        let pivot = m[step * n + step].clone();
        for r in step + 1..n {
            for c in step + 1..n {
                let top = pivot
                    .mul(&m[r * n + c])
                    .sub(&m[r * n + step].mul(&m[step * n + c]));
                m[r * n + c] = top
                    .div_exact(&prev)
                    .expect("fraction-free elimination divides exactly");
            }
            m[r * n + step] = SparsePolynomial::zero(arity);
        }
        prev = pivot;
    }
    let det = m[(n - 1) * n + (n - 1)].clone();
    if sign_flip {
        det.neg()
    } else {
        det
    }
}

/// The mode-`mode` flattening of the generic tensor whose entries are the
/// chosen block's variables: a `k_mode x prod(k_j, j != mode)` matrix whose
/// `(r, c)` entry is the single variable at the indexer's offset.
pub fn generic_flattening(
    block: VarBlock,
    profile: &FormatProfile,
    mode: usize,
) -> SymbolicMatrix {
    let bounds = profile.rank_bounds();
    assert!(mode < bounds.len(), "mode {mode} out of range");
    let arity = profile
        .core_len()
        .expect("core tensor too large to index");
    let ix = FlatteningIndexer::new(bounds, mode);
    let mut entries = Vec::with_capacity(ix.rows() * ix.cols());
    for r in 0..ix.rows() {
        for c in 0..ix.cols() {
            let off = ix.offset(r, c);
            entries.push(match block {
                VarBlock::X => SparsePolynomial::variable_x(arity, off),
                VarBlock::Y => SparsePolynomial::variable_y(arity, off),
            });
        }
    }
    SymbolicMatrix::new(ix.rows(), ix.cols(), entries)
}

/// The `k_mode x k_mode` bilinear Gram matrix of the mode-`mode` flattenings:
/// entry `(r, s)` is `sum_c x_off(r,c) * y_off(s,c)`.
///
/// Built entry-by-entry from the indexer; the wide flattening intermediates
/// are never materialized.
pub fn gram_product(profile: &FormatProfile, mode: usize) -> SymbolicMatrix {
    let bounds = profile.rank_bounds();
    assert!(mode < bounds.len(), "mode {mode} out of range");
    let arity = profile
        .core_len()
        .expect("core tensor too large to index");
    let ix = FlatteningIndexer::new(bounds, mode);
    let mut entries = Vec::with_capacity(ix.rows() * ix.rows());
    for r in 0..ix.rows() {
        for s in 0..ix.rows() {
            let terms = (0..ix.cols()).map(|c| {
                let e = ExponentVec::unit_x(arity, ix.offset(r, c))
                    .monomial_mul(&ExponentVec::unit_y(arity, ix.offset(s, c)));
                (e, BigInt::one())
            });
            entries.push(SparsePolynomial::from_terms(arity, terms));
        }
    }
    SymbolicMatrix::new(ix.rows(), ix.rows(), entries)
}

/// Renders a flattening in the row/column layout used by `generic_flattening`,
/// with entries shown as subscripted tensor coordinates, e.g. `x_{1,2,1}`.
pub fn flattening_layout(block: VarBlock, profile: &FormatProfile, mode: usize) -> String {
    let bounds = profile.rank_bounds();
    let ix = FlatteningIndexer::new(bounds, mode);
    let name = match block {
        VarBlock::X => 'x',
        VarBlock::Y => 'y',
    };
    let mut out = String::new();
    for r in 0..ix.rows() {
        out.push('[');
        for c in 0..ix.cols() {
            if c > 0 {
                out.push(' ');
            }
            let idx = MultiIndex::delinearize(ix.offset(r, c), bounds);
            let subs: Vec<String> = idx.indices().iter().map(|i| i.to_string()).collect();
            out.push_str(&format!("{}_{{{}}}", name, subs.join(",")));
        }
        out.push_str("]\n");
    }
    out
}
