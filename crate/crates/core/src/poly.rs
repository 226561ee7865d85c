//! Exact sparse polynomial arithmetic in two blocks of variables.
//!
//! Polynomials live in `Z[x_0..x_m, y_0..y_m]` where `m + 1` is the block
//! arity. Coefficients are arbitrary-precision integers; terms are keyed by
//! packed exponent vectors. Term storage is an unordered map during
//! arithmetic; a canonical graded-lexicographic order is imposed only when
//! iterating or serializing. All values are immutable; multiplication may
//! parallelize internally over term chunks with results identical to the
//! sequential path.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

/// Exact rational scalar; enters only at final normalizations.
pub type ExactRational = num_rational::BigRational;

type ExpStorage = SmallVec<[u16; 24]>;

/// Packed exponent vector: the x-block followed by the y-block, each of
/// length `arity`. Ordering is graded lexicographic on the whole vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExponentVec {
    data: ExpStorage,
}

impl ExponentVec {
    pub fn zero(arity: usize) -> Self {
        ExponentVec {
            data: SmallVec::from_elem(0, 2 * arity),
        }
    }

    /// Unit exponent for variable `x_i`.
    pub fn unit_x(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable index out of range");
        let mut e = Self::zero(arity);
        e.data[i] = 1;
        e
    }

    /// Unit exponent for variable `y_i`.
    pub fn unit_y(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable index out of range");
        let mut e = Self::zero(arity);
        e.data[arity + i] = 1;
        e
    }

    pub fn from_blocks(x: &[u16], y: &[u16]) -> Self {
        assert_eq!(x.len(), y.len(), "block length mismatch");
        let mut data = ExpStorage::with_capacity(2 * x.len());
        data.extend_from_slice(x);
        data.extend_from_slice(y);
        ExponentVec { data }
    }

    pub fn arity(&self) -> usize {
        self.data.len() / 2
    }

    pub fn x_block(&self) -> &[u16] {
        &self.data[..self.arity()]
    }

    pub fn y_block(&self) -> &[u16] {
        &self.data[self.arity()..]
    }

    pub fn x_degree(&self) -> u32 {
        self.x_block().iter().map(|&e| e as u32).sum()
    }

    pub fn y_degree(&self) -> u32 {
        self.y_block().iter().map(|&e| e as u32).sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.data.iter().map(|&e| e as u32).sum()
    }

    /// Whether the x-block equals the y-block.
    pub fn is_diagonal(&self) -> bool {
        let m = self.arity();
        self.data[..m] == self.data[m..]
    }

    /// Exponent sum, i.e. the product of the underlying monomials.
    pub fn monomial_mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.data.len(), other.data.len());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a.checked_add(b).expect("monomial exponent exceeds u16"))
            .collect();
        ExponentVec { data }
    }

    /// Componentwise difference, `None` when not divisible.
    pub fn monomial_div(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.data.len(), other.data.len());
        let mut data = ExpStorage::with_capacity(self.data.len());
        for (&a, &b) in self.data.iter().zip(&other.data) {
            data.push(a.checked_sub(b)?);
        }
        Some(ExponentVec { data })
    }
}

impl Ord for ExponentVec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.data.cmp(&other.data))
    }
}

impl PartialOrd for ExponentVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with integer coefficients; no stored zero coefficients.
/// Two polynomials are equal iff their term maps are equal.
#[derive(Clone, Debug)]
pub struct SparsePolynomial {
    arity: usize,
    terms: FxHashMap<ExponentVec, BigInt>,
    // Cached bidegree bounds, recomputed on construction.
    max_x_degree: u32,
    max_y_degree: u32,
}

impl PartialEq for SparsePolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.terms == other.terms
    }
}

impl Eq for SparsePolynomial {}

// Work threshold above which multiplication chunks the left operand across
// the rayon pool.
const PAR_MUL_WORK: u128 = 1 << 20;

impl SparsePolynomial {
    pub fn zero(arity: usize) -> Self {
        SparsePolynomial {
            arity,
            terms: FxHashMap::default(),
            max_x_degree: 0,
            max_y_degree: 0,
        }
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, BigInt::one())
    }

    pub fn constant(arity: usize, c: BigInt) -> Self {
        let mut terms = FxHashMap::default();
        if !c.is_zero() {
            terms.insert(ExponentVec::zero(arity), c);
        }
        SparsePolynomial {
            arity,
            terms,
            max_x_degree: 0,
            max_y_degree: 0,
        }
    }

    /// The single variable `x_i` (coefficient 1).
    pub fn variable_x(arity: usize, i: usize) -> Self {
        Self::monomial(ExponentVec::unit_x(arity, i), BigInt::one())
    }

    /// The single variable `y_i` (coefficient 1).
    pub fn variable_y(arity: usize, i: usize) -> Self {
        Self::monomial(ExponentVec::unit_y(arity, i), BigInt::one())
    }

    pub fn monomial(exp: ExponentVec, coeff: BigInt) -> Self {
        let arity = exp.arity();
        let mut terms = FxHashMap::default();
        let (mx, my) = if coeff.is_zero() {
            (0, 0)
        } else {
            let d = (exp.x_degree(), exp.y_degree());
            terms.insert(exp, coeff);
            d
        };
        SparsePolynomial {
            arity,
            terms,
            max_x_degree: mx,
            max_y_degree: my,
        }
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping
    /// zero coefficients.
    pub fn from_terms(
        arity: usize,
        it: impl IntoIterator<Item = (ExponentVec, BigInt)>,
    ) -> Self {
        let mut map = FxHashMap::default();
        for (e, c) in it {
            assert_eq!(e.arity(), arity, "exponent arity mismatch");
            if c.is_zero() {
                continue;
            }
            *map.entry(e).or_insert_with(BigInt::zero) += c;
        }
        Self::from_map(arity, map)
    }

    fn from_map(arity: usize, mut map: FxHashMap<ExponentVec, BigInt>) -> Self {
        map.retain(|_, c| !c.is_zero());
        let mut mx = 0;
        let mut my = 0;
        for e in map.keys() {
            mx = mx.max(e.x_degree());
            my = my.max(e.y_degree());
        }
        SparsePolynomial {
            arity,
            terms: map,
            max_x_degree: mx,
            max_y_degree: my,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&ExponentVec::zero(self.arity))
                .is_some_and(|c| c.is_one())
    }

    /// Cached upper bounds `(max x-degree, max y-degree)` over all terms.
    pub fn bidegree_bounds(&self) -> (u32, u32) {
        (self.max_x_degree, self.max_y_degree)
    }

    /// `Some((a, b))` when every term has x-degree `a` and y-degree `b`.
    pub fn bihomogeneous_bidegree(&self) -> Option<(u32, u32)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let d = (first.x_degree(), first.y_degree());
        it.all(|e| (e.x_degree(), e.y_degree()) == d).then_some(d)
    }

    pub fn coefficient(&self, exp: &ExponentVec) -> BigInt {
        self.terms.get(exp).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Unordered term iteration; use [`Self::sorted_terms`] for canonical
    /// order.
    pub fn iter(&self) -> impl Iterator<Item = (&ExponentVec, &BigInt)> {
        self.terms.iter()
    }

    /// Terms in descending graded-lexicographic order.
    pub fn sorted_terms(&self) -> Vec<(&ExponentVec, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_unstable_by(|a, b| b.0.cmp(a.0));
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "variable arity mismatch");
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut map = big.terms.clone();
        for (e, c) in &small.terms {
            *map.entry(e.clone()).or_insert_with(BigInt::zero) += c;
        }
        Self::from_map(self.arity, map)
    }

    pub fn neg(&self) -> Self {
        let map = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        Self::from_map(self.arity, map)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        let map = self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect();
        Self::from_map(self.arity, map)
    }

    /// Exact distributive product. Above a work threshold the left operand is
    /// chunked across the rayon pool; partial maps are merged in chunk order,
    /// so the result equals the sequential product exactly.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "variable arity mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.arity);
        }
        let work = self.terms.len() as u128 * other.terms.len() as u128;
        if work >= PAR_MUL_WORK && rayon::current_num_threads() > 1 {
            return self.mul_parallel(other);
        }
        let mut map =
            FxHashMap::with_capacity_and_hasher(self.terms.len().max(other.terms.len()), Default::default());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                *map.entry(e1.monomial_mul(e2)).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        Self::from_map(self.arity, map)
    }

    fn mul_parallel(&self, other: &Self) -> Self {
        let terms: Vec<(&ExponentVec, &BigInt)> = self.terms.iter().collect();
        let chunks = (rayon::current_num_threads() * 4).max(1);
        let chunk_len = terms.len().div_ceil(chunks).max(1);
        let partials: Vec<FxHashMap<ExponentVec, BigInt>> = terms
            .par_chunks(chunk_len)
            .map(|chunk| {
                let mut map = FxHashMap::default();
                for &(e1, c1) in chunk {
                    for (e2, c2) in &other.terms {
                        *map.entry(e1.monomial_mul(e2)).or_insert_with(BigInt::zero) += c1 * c2;
                    }
                }
                map
            })
            .collect();
        let mut acc = FxHashMap::default();
        for map in partials {
            if acc.is_empty() {
                acc = map;
            } else {
                for (e, c) in map {
                    *acc.entry(e).or_insert_with(BigInt::zero) += c;
                }
            }
        }
        Self::from_map(self.arity, acc)
    }

    /// `self^e`; picks repeated multiplication for small exponents where
    /// binary powering's intermediate squares tend to be larger than the
    /// incremental products.
    pub fn pow(&self, e: u32) -> Self {
        if e <= 4 {
            self.pow_iterative(e)
        } else {
            self.pow_binary(e)
        }
    }

    pub fn pow_iterative(&self, e: u32) -> Self {
        let mut acc = Self::one(self.arity);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn pow_binary(&self, e: u32) -> Self {
        let mut acc = Self::one(self.arity);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a
    /// remainder. Division is by the graded-lex leading term.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        assert_eq!(self.arity, divisor.arity, "variable arity mismatch");
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Self::zero(self.arity));
        }
        let mut rem: BTreeMap<ExponentVec, BigInt> = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        let (lead_e, lead_c) = divisor
            .terms
            .iter()
            .max_by(|a, b| a.0.cmp(b.0))
            .map(|(e, c)| (e.clone(), c.clone()))
            .expect("nonzero divisor has a leading term");
        let mut quotient: Vec<(ExponentVec, BigInt)> = Vec::new();
        while let Some((re, rc)) = rem.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            let qe = re.monomial_div(&lead_e)?;
            let (qc, r) = num_integer::div_rem(rc, lead_c.clone());
            if !r.is_zero() {
                return None;
            }
            for (de, dc) in &divisor.terms {
                let target = de.monomial_mul(&qe);
                let v = rem.remove(&target).unwrap_or_else(BigInt::zero) - dc * &qc;
                if !v.is_zero() {
                    rem.insert(target, v);
                }
            }
            quotient.push((qe, qc));
        }
        Some(Self::from_terms(self.arity, quotient))
    }

    /// Evaluates at complex points `x` and `y` (one value per variable).
    pub fn eval_bilinear(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.arity, "x point has wrong length");
        assert_eq!(y.len(), self.arity, "y point has wrong length");
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(c.to_f64().expect("coefficient to f64"), 0.0);
            for (i, &p) in e.x_block().iter().enumerate() {
                if p > 0 {
                    t *= x[i].powi(p as i32);
                }
            }
            for (i, &p) in e.y_block().iter().enumerate() {
                if p > 0 {
                    t *= y[i].powi(p as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Canonical text form: terms in descending graded-lex order with
    /// explicit exponents.
    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (pos, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            if pos == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let mut wrote = false;
            if !mag.is_one() || e.total_degree() == 0 {
                write!(f, "{mag}")?;
                wrote = true;
            }
            for (block, name) in [(e.x_block(), 'x'), (e.y_block(), 'y')] {
                for (i, &p) in block.iter().enumerate() {
                    if p == 0 {
                        continue;
                    }
                    if wrote {
                        write!(f, "*")?;
                    }
                    wrote = true;
                    write!(f, "{name}{i}")?;
                    if p > 1 {
                        write!(f, "^{p}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Exact `m!`.
pub fn factorial(m: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=m {
        acc *= BigUint::from(i);
    }
    acc
}

/// Exact product of `len` consecutive integers starting at `start`.
pub fn rising_product(start: u64, len: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..len {
        acc *= BigUint::from(start + i);
    }
    acc
}
