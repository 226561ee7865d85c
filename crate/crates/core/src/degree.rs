//! The exact degree engine: Grassmannian degrees, the expanded weight
//! polynomial, diagonal coefficient extraction, and the assembled projective
//! degree of a bounded-multilinear-rank variety.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::flatten::gram_product;
use crate::format::FormatProfile;
use crate::poly::{factorial, rising_product, ExactRational, ExponentVec, SparsePolynomial};

/// Default cap on live polynomial terms before the engine aborts.
pub const DEFAULT_TERM_CAP: u64 = 50_000_000;

/// How diagonal coefficients are extracted from the weight polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalStrategy {
    /// Expand the full product, then scan for diagonal terms. Baseline.
    Expand,
    /// Skip the final multiplication: index partial products by the
    /// exponent-difference vector and pair off terms that land on the
    /// diagonal. Produces no full-expansion term count.
    Paired,
}

/// Tunables for the exact engine.
#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// Abort with [`Error::ResourceExceeded`] when an expansion would exceed
    /// this many terms.
    pub term_cap: u64,
    pub diagonal: DiagonalStrategy,
    /// Compute the formula value even for non-realizable rank profiles. The
    /// result is then a formal value with no correctness claim.
    pub allow_unrealizable: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            term_cap: DEFAULT_TERM_CAP,
            diagonal: DiagonalStrategy::Expand,
            allow_unrealizable: false,
        }
    }
}

/// Exact outputs of a degree computation.
#[derive(Clone, Debug)]
pub struct DegreeResult {
    pub profile: FormatProfile,
    /// Grassmannian degree of each mode's `G(k_i, n_i)`.
    pub grass_degrees: Vec<BigUint>,
    /// The diagonal factorial sum `g` over the weight polynomial.
    pub diagonal_sum: BigInt,
    /// `f = g / prod (k_i (n_i - k_i))!` as a reduced rational.
    pub degree_factor: ExactRational,
    /// `deg = prod(grass_degrees) * f`, asserted to be an integer.
    pub degree: BigInt,
    /// Complex dimension `D + K`.
    pub dimension: BigUint,
    /// Term count of the fully expanded weight polynomial; absent under the
    /// paired diagonal strategy.
    pub term_count: Option<u64>,
    pub elapsed: Duration,
}

/// Degree of the Grassmannian of `k`-planes in `n`-space under its canonical
/// projective embedding: `(k(n-k))! / prod_{j=1}^{k} j (j+1) ... (j+n-k-1)`.
/// The quotient is always an integer; this is asserted.
pub fn grassmannian_degree(k: u32, n: u32) -> BigUint {
    assert!(k >= 1 && k <= n, "require 1 <= k <= n, got k={k} n={n}");
    let num = factorial(k as u64 * (n - k) as u64);
    let mut den = BigUint::one();
    for j in 1..=k as u64 {
        den *= rising_product(j, (n - k) as u64);
    }
    let (q, r) = num_integer::div_rem(num, den);
    assert!(r.is_zero(), "Grassmannian degree must be an integer");
    q
}

fn mul_capped(
    p: &SparsePolynomial,
    q: &SparsePolynomial,
    cap: u64,
) -> Result<SparsePolynomial> {
    let projected = p.term_count() as u64 * q.term_count() as u64;
    if projected > cap {
        return Err(Error::ResourceExceeded(format!(
            "product could reach {projected} terms, cap is {cap}"
        )));
    }
    let out = p.mul(q);
    if out.term_count() as u64 > cap {
        return Err(Error::ResourceExceeded(format!(
            "live term count {} exceeds cap {cap}",
            out.term_count()
        )));
    }
    Ok(out)
}

fn pow_capped(p: &SparsePolynomial, e: u32, cap: u64) -> Result<SparsePolynomial> {
    let mut acc = SparsePolynomial::one(p.arity());
    if e <= 4 {
        for _ in 0..e {
            acc = mul_capped(&acc, p, cap)?;
        }
        return Ok(acc);
    }
    let mut base = p.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_capped(&acc, &base, cap)?;
        }
        e >>= 1;
        if e > 0 {
            base = mul_capped(&base, &base, cap)?;
        }
    }
    Ok(acc)
}

/// The per-mode Gram determinants raised to their exponents `n_i - k_i`,
/// ordered by estimated expanded size (term count raised to the exponent),
/// smallest first. Modes with `n_i = k_i` are skipped.
fn power_factors(profile: &FormatProfile, cap: u64) -> Result<Vec<SparsePolynomial>> {
    let mut dets: Vec<(SparsePolynomial, u32)> = Vec::new();
    for mode in 0..profile.order() {
        let e = profile.ambient_dims()[mode] - profile.rank_bounds()[mode];
        if e == 0 {
            continue;
        }
        dets.push((gram_product(profile, mode).det(), e));
    }
    dets.sort_by(|a, b| {
        let size = |(p, e): &(SparsePolynomial, u32)| (p.term_count() as f64).powi(*e as i32);
        size(a)
            .partial_cmp(&size(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    dets.into_iter().map(|(p, e)| pow_capped(&p, e, cap)).collect()
}

/// The fully expanded product of powered Gram determinants. Bihomogeneous of
/// bidegree `(D, D)`; the constant 1 when `k = n`.
pub fn weight_polynomial(profile: &FormatProfile, cap: u64) -> Result<SparsePolynomial> {
    let arity = representable_core_len(profile)?;
    if profile.scalar_d() > u16::MAX as u128 {
        return Err(Error::ResourceExceeded(format!(
            "total bidegree {} exceeds the exponent range",
            profile.scalar_d()
        )));
    }
    let mut acc = SparsePolynomial::one(arity);
    for factor in power_factors(profile, cap)? {
        acc = mul_capped(&acc, &factor, cap)?;
    }
    Ok(acc)
}

fn representable_core_len(profile: &FormatProfile) -> Result<usize> {
    profile.core_len().ok_or_else(|| {
        Error::ResourceExceeded("core tensor is too large to index".into())
    })
}

/// Factorials 0..=max as a lookup table.
fn factorial_table(max: u32) -> Vec<BigInt> {
    let mut table = Vec::with_capacity(max as usize + 1);
    let mut acc = BigInt::one();
    table.push(acc.clone());
    for i in 1..=max as u64 {
        acc *= BigInt::from(i);
        table.push(acc.clone());
    }
    table
}

/// Sum over diagonal terms (equal x- and y-exponent vectors) of the
/// coefficient times the product of factorials of the exponents.
pub fn diagonal_factorial_sum(p: &SparsePolynomial) -> BigInt {
    let (max_x, _) = p.bidegree_bounds();
    let fact = factorial_table(max_x);
    let mut acc = BigInt::zero();
    for (e, c) in p.iter() {
        if !e.is_diagonal() {
            continue;
        }
        let mut term = c.clone();
        for &exp in e.x_block() {
            if exp > 1 {
                term *= &fact[exp as usize];
            }
        }
        acc += term;
    }
    acc
}

/// Diagonal factorial sum of `left * right`, computed without materializing
/// the product: terms are grouped by the exponent-difference vector
/// `x - y`, and only groups with opposite differences can pair to a diagonal
/// term.
pub fn paired_diagonal_factorial_sum(
    left: &SparsePolynomial,
    right: &SparsePolynomial,
) -> BigInt {
    assert_eq!(left.arity(), right.arity(), "variable arity mismatch");
    let diff = |e: &ExponentVec| -> Vec<i32> {
        e.x_block()
            .iter()
            .zip(e.y_block())
            .map(|(&a, &b)| a as i32 - b as i32)
            .collect()
    };
    let mut groups: FxHashMap<Vec<i32>, Vec<(&ExponentVec, &BigInt)>> = FxHashMap::default();
    for (e, c) in left.iter() {
        groups.entry(diff(e)).or_default().push((e, c));
    }
    let (lx, _) = left.bidegree_bounds();
    let (rx, _) = right.bidegree_bounds();
    let fact = factorial_table(lx + rx);
    let mut acc = BigInt::zero();
    for (e_r, c_r) in right.iter() {
        let want: Vec<i32> = diff(e_r).iter().map(|&v| -v).collect();
        let Some(group) = groups.get(&want) else {
            continue;
        };
        for (e_l, c_l) in group {
            let mut term = *c_l * c_r;
            for (&a, &b) in e_l.x_block().iter().zip(e_r.x_block()) {
                let total = a as usize + b as usize;
                if total > 1 {
                    term *= &fact[total];
                }
            }
            acc += term;
        }
    }
    acc
}

/// The diagonal factorial sum `g` for a profile, with the expanded term count
/// when the strategy produces one.
fn diagonal_sum_for(
    profile: &FormatProfile,
    opts: &EngineOptions,
) -> Result<(BigInt, Option<u64>)> {
    if profile.scalar_d() == 0 {
        // Empty product: the weight polynomial is the constant 1.
        return Ok((BigInt::one(), Some(1)));
    }
    match opts.diagonal {
        DiagonalStrategy::Expand => {
            let p = weight_polynomial(profile, opts.term_cap)?;
            let g = diagonal_factorial_sum(&p);
            Ok((g, Some(p.term_count() as u64)))
        }
        DiagonalStrategy::Paired => {
            let factors = power_factors(profile, opts.term_cap)?;
            let (last, rest) = factors.split_last().expect("D > 0 yields factors");
            let arity = representable_core_len(profile)?;
            let mut acc = SparsePolynomial::one(arity);
            for f in rest {
                acc = mul_capped(&acc, f, opts.term_cap)?;
            }
            Ok((paired_diagonal_factorial_sum(&acc, last), None))
        }
    }
}

/// Product of `(k_i (n_i - k_i))!` over all modes.
fn mode_dimension_factorials(profile: &FormatProfile) -> BigInt {
    profile
        .rank_bounds()
        .iter()
        .zip(profile.ambient_dims())
        .map(|(&k, &n)| BigInt::from(factorial(k as u64 * (n - k) as u64)))
        .product()
}

/// The normalized diagonal sum `f = g / prod (k_i (n_i - k_i))!`.
pub fn degree_factor(profile: &FormatProfile, opts: &EngineOptions) -> Result<ExactRational> {
    let (g, _) = diagonal_sum_for(profile, opts)?;
    Ok(ExactRational::new(g, mode_dimension_factorials(profile)))
}

/// Exact degree of the variety of tensors with multilinear rank bounded by
/// the profile, computed with default options.
pub fn subspace_degree(profile: &FormatProfile) -> Result<DegreeResult> {
    subspace_degree_with(profile, &EngineOptions::default())
}

/// Exact degree with explicit options.
pub fn subspace_degree_with(
    profile: &FormatProfile,
    opts: &EngineOptions,
) -> Result<DegreeResult> {
    let start = Instant::now();
    if !profile.formula_applies() && !opts.allow_unrealizable {
        return Err(Error::RankNotRealizable {
            k: profile.rank_bounds().to_vec(),
        });
    }
    let grass_degrees: Vec<BigUint> = profile
        .rank_bounds()
        .iter()
        .zip(profile.ambient_dims())
        .map(|(&k, &n)| grassmannian_degree(k, n))
        .collect();
    let (diagonal_sum, term_count) = diagonal_sum_for(profile, opts)?;
    let degree_factor = ExactRational::new(
        diagonal_sum.clone(),
        mode_dimension_factorials(profile),
    );
    let grass_product: BigUint = grass_degrees.iter().product();
    let degree_rational = degree_factor.clone() * BigInt::from(grass_product);
    if !degree_rational.is_integer() {
        return Err(Error::IntegralityViolation {
            value: degree_rational.to_string(),
        });
    }
    let degree = degree_rational.to_integer();
    let dimension = profile.scalar_k() + BigUint::from(profile.scalar_d());
    Ok(DegreeResult {
        profile: profile.clone(),
        grass_degrees,
        diagonal_sum,
        degree_factor,
        degree,
        dimension,
        term_count,
        elapsed: start.elapsed(),
    })
}

/// Closed-form degree of the rank-one (Segre) case: the multinomial
/// `D! / prod (n_i - 1)!` with `D = sum (n_i - 1)`.
pub fn segre_degree(dims: &[u32]) -> BigUint {
    assert!(dims.iter().all(|&n| n >= 1), "dimensions must be positive");
    let d: u64 = dims.iter().map(|&n| (n - 1) as u64).sum();
    let mut den = BigUint::one();
    for &n in dims {
        den *= factorial((n - 1) as u64);
    }
    let (q, r) = num_integer::div_rem(factorial(d), den);
    assert!(r.is_zero(), "multinomial coefficient must be an integer");
    q
}

/// Classical closed-form degree of the variety of `rows x cols` matrices of
/// rank at most `rank`: `prod_{i=0}^{rows-rank-1} (cols+i)! i! / ((rank+i)!
/// (cols-rank+i)!)`. Individual factors may be non-integers; the product is
/// an integer and this is asserted.
pub fn determinantal_degree(rank: u32, rows: u32, cols: u32) -> BigUint {
    assert!(
        rank >= 1 && rank <= rows.min(cols),
        "require 1 <= rank <= min(rows, cols)"
    );
    let mut acc = ExactRational::one();
    for i in 0..(rows - rank) as u64 {
        let num = BigInt::from(factorial(cols as u64 + i) * factorial(i));
        let den = BigInt::from(
            factorial(rank as u64 + i) * factorial((cols - rank) as u64 + i),
        );
        acc *= ExactRational::new(num, den);
    }
    assert!(acc.is_integer(), "determinantal degree must be an integer");
    assert!(!acc.numer().is_negative());
    acc.to_integer().to_biguint().expect("non-negative degree")
}
