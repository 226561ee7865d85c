//! Shared helpers and randomized invariant suites for the integration tests.
//!
//! The reference multiplier and the numeric rank check live here, in test
//! code, so they stay independent of the library paths they validate.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use subvar::{
    gram_product, weight_polynomial, DetStrategy, ExponentVec, FlatteningIndexer, FormatProfile,
    SparsePolynomial, SymbolicMatrix, DEFAULT_TERM_CAP,
};

/// All permutations of `0..d`.
pub fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for sub in permutations(d - 1) {
        for pos in 0..d {
            let mut p: Vec<usize> = sub.iter().map(|&x| x + 1).collect();
            p.insert(pos, 0);
            out.push(p);
        }
    }
    out
}

/// All tuples of length `d` with entries >= `min` and product <= `cap`.
pub fn tuples_with_product_at_most(d: usize, cap: u64, min: u32) -> Vec<Vec<u32>> {
    fn go(d: usize, cap: u64, min: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if d == 0 {
            out.push(prefix.clone());
            return;
        }
        let mut v = min;
        while (v as u64) <= cap {
            prefix.push(v);
            go(d - 1, cap / v as u64, min, prefix, out);
            prefix.pop();
            v += 1;
        }
    }
    let mut out = Vec::new();
    go(d, cap, min, &mut Vec::new(), &mut out);
    out
}

/// Reference multiplier: quadratic double loop, then sort and merge adjacent
/// terms. No hash maps, no chunking.
pub fn naive_mul(p: &SparsePolynomial, q: &SparsePolynomial) -> SparsePolynomial {
    assert_eq!(p.arity(), q.arity());
    let mut prods: Vec<(ExponentVec, BigInt)> = Vec::with_capacity(p.term_count() * q.term_count());
    for (e1, c1) in p.iter() {
        for (e2, c2) in q.iter() {
            prods.push((e1.monomial_mul(e2), c1 * c2));
        }
    }
    prods.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(ExponentVec, BigInt)> = Vec::new();
    for (e, c) in prods {
        match merged.last_mut() {
            Some((le, lc)) if *le == e => *lc += c,
            _ => merged.push((e, c)),
        }
    }
    SparsePolynomial::from_terms(p.arity(), merged)
}

/// A random sparse polynomial with up to `max_terms` terms, exponents <= 3,
/// and small nonzero coefficients.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, arity: usize, max_terms: usize) -> SparsePolynomial {
    let terms = rng.random_range(0..=max_terms);
    let mut list = Vec::with_capacity(terms);
    for _ in 0..terms {
        let x: Vec<u16> = (0..arity).map(|_| rng.random_range(0..=3)).collect();
        let y: Vec<u16> = (0..arity).map(|_| rng.random_range(0..=3)).collect();
        let mut c = 0i64;
        while c == 0 {
            c = rng.random_range(-9..=9);
        }
        list.push((ExponentVec::from_blocks(&x, &y), BigInt::from(c)));
    }
    SparsePolynomial::from_terms(arity, list)
}

/// Ring axioms on random triples: commutativity, associativity,
/// distributivity.
pub fn ring_axiom_suite(cases: usize, seed: u64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for i in 0..cases {
        let arity = rng.random_range(1..=4);
        let p = random_poly(&mut rng, arity, 20);
        let q = random_poly(&mut rng, arity, 20);
        let r = random_poly(&mut rng, arity, 20);
        assert_eq!(p.add(&q), q.add(&p), "case {i}: additive commutativity");
        assert_eq!(p.mul(&q), q.mul(&p), "case {i}: multiplicative commutativity");
        assert_eq!(
            p.add(&q).add(&r),
            p.add(&q.add(&r)),
            "case {i}: additive associativity"
        );
        assert_eq!(
            p.mul(&q).mul(&r),
            p.mul(&q.mul(&r)),
            "case {i}: multiplicative associativity"
        );
        assert_eq!(
            p.mul(&q.add(&r)),
            p.mul(&q).add(&p.mul(&r)),
            "case {i}: distributivity"
        );
    }
}

/// The production multiplier against the sort-merge reference.
pub fn mul_matches_naive_suite(cases: usize, seed: u64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for i in 0..cases {
        let arity = rng.random_range(1..=4);
        let p = random_poly(&mut rng, arity, 20);
        let q = random_poly(&mut rng, arity, 20);
        assert_eq!(p.mul(&q), naive_mul(&p, &q), "case {i}");
    }
}

/// Cofactor and fraction-free determinants agree on random small matrices.
pub fn det_strategy_suite(cases: usize, seed: u64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for i in 0..cases {
        let n = rng.random_range(1..=4);
        let arity = 2;
        let entries: Vec<SparsePolynomial> = (0..n * n)
            .map(|_| random_poly(&mut rng, arity, 3))
            .collect();
        let m = SymbolicMatrix::new(n, n, entries);
        assert_eq!(
            m.determinant(DetStrategy::Cofactor),
            m.determinant(DetStrategy::FractionFree),
            "case {i} (size {n})"
        );
    }
}

/// Small (k, n) pairs used for structural polynomial scans.
pub fn small_scan_profiles(core_cap: u64) -> Vec<FormatProfile> {
    let mut out = Vec::new();
    for d in 1..=3usize {
        for k in tuples_with_product_at_most(d, core_cap, 1) {
            let mut candidates: Vec<Vec<u32>> = vec![
                k.iter().map(|&x| x + 1).collect(),
                k.clone(),
            ];
            let mut bumped = k.clone();
            bumped[0] += 2;
            candidates.push(bumped);
            if d >= 2 {
                let mut mixed = k.clone();
                mixed[1] += 1;
                candidates.push(mixed);
            }
            for n in candidates {
                let profile = FormatProfile::new(k.clone(), n).unwrap();
                // Restrict to profiles the engine accepts: for the rest the
                // generic core drops rank and the product degenerates to 0.
                if profile.formula_applies() {
                    out.push(profile);
                }
            }
        }
    }
    out
}

/// Every term of the expanded weight polynomial has bidegree exactly (D, D).
pub fn bihomogeneity_suite(core_cap: u64) {
    for profile in small_scan_profiles(core_cap) {
        let d = profile.scalar_d() as u32;
        let p = weight_polynomial(&profile, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(
            p.bihomogeneous_bidegree(),
            Some((d, d)),
            "k={:?} n={:?}",
            profile.rank_bounds(),
            profile.ambient_dims()
        );
    }
}

/// Coefficient symmetry under swapping the two variable blocks, by full term
/// scan.
pub fn swap_symmetry_suite(core_cap: u64) {
    for profile in small_scan_profiles(core_cap) {
        let p = weight_polynomial(&profile, DEFAULT_TERM_CAP).unwrap();
        for (e, c) in p.iter() {
            let swapped = ExponentVec::from_blocks(e.y_block(), e.x_block());
            assert_eq!(
                &p.coefficient(&swapped),
                c,
                "k={:?} n={:?}",
                profile.rank_bounds(),
                profile.ambient_dims()
            );
        }
    }
}

/// Gram matrices have the right shape: every entry has exactly
/// `prod_{j != mode} k_j` terms, all of bidegree (1, 1).
pub fn gram_structure_suite(core_cap: u64) {
    for d in 1..=3usize {
        for k in tuples_with_product_at_most(d, core_cap, 1) {
            let n: Vec<u32> = k.iter().map(|&x| x + 1).collect();
            let profile = FormatProfile::new(k.clone(), n).unwrap();
            let total: u64 = k.iter().map(|&x| x as u64).product();
            for mode in 0..d {
                let g = gram_product(&profile, mode);
                let expect_terms = (total / k[mode] as u64) as usize;
                assert_eq!(g.rows(), k[mode] as usize);
                for r in 0..g.rows() {
                    for s in 0..g.cols() {
                        let e = g.entry(r, s);
                        assert_eq!(e.term_count(), expect_terms, "k={k:?} mode={mode}");
                        assert_eq!(e.bihomogeneous_bidegree(), Some((1, 1)));
                    }
                }
            }
        }
    }
}

/// Rank of a complex matrix by Gaussian elimination with partial pivoting.
pub fn complex_rank(mut m: Vec<Vec<Complex64>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let scale = m
        .iter()
        .flatten()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let tol = 1e-8 * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some((pivot, pv)) = (row..rows)
            .map(|r| (r, m[r][col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if pv <= tol {
            continue;
        }
        m.swap(row, pivot);
        for r in row + 1..rows {
            let factor = m[r][col] / m[row][col];
            for c in col..cols {
                let sub = factor * m[row][c];
                m[r][c] -= sub;
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Whether random core tensors of shape `k` attain full multilinear rank,
/// checked numerically on the flattenings. Takes the best over a few draws.
pub fn numeric_full_mlrank<R: Rng + ?Sized>(k: &[u32], rng: &mut R) -> bool {
    let len: usize = k.iter().map(|&x| x as usize).product();
    'draw: for _ in 0..3 {
        let t: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random(), rng.random::<f64>()))
            .collect();
        for mode in 0..k.len() {
            let ix = FlatteningIndexer::new(k, mode);
            let mat: Vec<Vec<Complex64>> = (0..ix.rows())
                .map(|r| (0..ix.cols()).map(|c| t[ix.offset(r, c)]).collect())
                .collect();
            if complex_rank(mat) < ix.rows() {
                continue 'draw;
            }
        }
        return true;
    }
    false
}
