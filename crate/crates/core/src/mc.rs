//! Statistical cross-validation of the exact engine.
//!
//! Draws standard complex Gaussian core tensors, evaluates the product of
//! powered Gram determinants of their flattenings, and converts the sample
//! mean into a degree estimate through an exactly computed normalization
//! chain (big-integer powers of two, factorials, and Grassmannian degrees,
//! with a single float division at the end).
//!
//! Sampling is split into fixed-size chunks, each driven by its own counter
//! stream of the seeded generator and merged in chunk order, so estimates are
//! bit-identical regardless of how many worker threads run the chunks.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use smallvec::SmallVec;

use crate::degree::grassmannian_degree;
use crate::format::{FlatteningIndexer, FormatProfile};
use crate::poly::{factorial, rising_product, ExactRational, SparsePolynomial};

/// Samples per worker chunk. Fixed so that the chunk layout, and therefore
/// the merged estimate, depends only on the total sample count.
const SAMPLE_CHUNK: u64 = 1 << 14;

/// Relative tolerance below which a negative Gram pivot is treated as
/// rounding at the semidefinite boundary; anything worse indicates a bug in
/// the flattening layout.
const PIVOT_TOLERANCE: f64 = 1e-8;

/// Monte Carlo estimate of the degree and its normalized integrand mean.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub samples: u64,
    /// Raw mean of the sampled weights.
    pub mean: f64,
    /// Sample standard deviation of the weights divided by sqrt(samples).
    pub std_error: f64,
    /// Batch-means standard error over the worker chunks; a tail diagnostic
    /// to compare against `std_error`.
    pub batch_std_error: f64,
    /// Exact conversion factor from the raw mean to degree units.
    pub degree_scale: f64,
    pub derived_f: f64,
    pub derived_degree: f64,
    pub exact_degree: Option<BigInt>,
    /// `(derived_degree - exact) / (degree-scale standard error)`, present
    /// once an exact value is attached.
    pub z_score: Option<f64>,
    pub seed: u64,
}

impl McEstimate {
    /// Attaches the exact degree and fills in the z-score.
    pub fn with_exact(mut self, exact: &BigInt) -> Self {
        let exact_f = exact.to_f64().expect("exact degree to f64");
        let se_degree = self.std_error * self.degree_scale;
        let z = if se_degree == 0.0 {
            if self.derived_degree == exact_f {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.derived_degree - exact_f) / se_degree
        };
        self.exact_degree = Some(exact.clone());
        self.z_score = Some(z);
        self
    }
}

/// Single-pass mean/variance accumulator with an order-stable merge.
#[derive(Clone, Copy, Debug, Default)]
struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        RunningMoments { count, mean, m2 }
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, buf: &mut [Complex64]) {
    for z in buf {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im);
    }
}

/// A fresh core tensor with i.i.d. standard complex normal entries (real and
/// imaginary parts are independent unit-variance Gaussians).
pub fn sample_gaussian_tensor<R: Rng + ?Sized>(
    profile: &FormatProfile,
    rng: &mut R,
) -> Vec<Complex64> {
    let len = profile
        .core_len()
        .expect("core tensor too large to sample");
    let mut t = vec![Complex64::new(0.0, 0.0); len];
    fill_gaussian(rng, &mut t);
    t
}

struct ModePlan {
    rows: usize,
    cols: usize,
    exponent: i32,
    offsets: Vec<u32>,
}

impl ModePlan {
    /// Determinant of the Hermitian positive semidefinite Gram matrix of one
    /// numeric flattening, via a root-free symmetric factorization.
    fn gram_det(&self, t: &[Complex64]) -> f64 {
        let n = self.rows;
        let mut gram: SmallVec<[Complex64; 36]> =
            SmallVec::from_elem(Complex64::new(0.0, 0.0), n * n);
        let mut scale = 0.0f64;
        for r in 0..n {
            for s in r..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..self.cols {
                    acc += t[self.offsets[r * self.cols + c] as usize]
                        * t[self.offsets[s * self.cols + c] as usize].conj();
                }
                gram[r * n + s] = acc;
                gram[s * n + r] = acc.conj();
            }
            scale = scale.max(gram[r * n + r].re);
        }

        let mut lower: SmallVec<[Complex64; 36]> =
            SmallVec::from_elem(Complex64::new(0.0, 0.0), n * n);
        let mut pivots: SmallVec<[f64; 8]> = SmallVec::from_elem(0.0, n);
        let mut det = 1.0f64;
        for j in 0..n {
            let mut dj = gram[j * n + j].re;
            for m in 0..j {
                dj -= lower[j * n + m].norm_sqr() * pivots[m];
            }
            assert!(
                dj >= -PIVOT_TOLERANCE * scale.max(1.0),
                "Gram pivot {dj} is negative beyond tolerance; flattening layout bug"
            );
            let dj = dj.max(0.0);
            pivots[j] = dj;
            det *= dj;
            if dj > 0.0 {
                for i in j + 1..n {
                    let mut v = gram[i * n + j];
                    for m in 0..j {
                        v -= lower[i * n + m] * lower[j * n + m].conj() * pivots[m];
                    }
                    lower[i * n + j] = v / dj;
                }
            }
        }
        det
    }
}

/// Evaluates the sampling weight `prod_l det(T_l T_l^*)^(n_l - k_l)` for
/// numeric core tensors of a fixed profile. Precomputes the flattening
/// layouts once.
pub struct WeightEvaluator {
    plans: Vec<ModePlan>,
}

impl WeightEvaluator {
    pub fn new(profile: &FormatProfile) -> Self {
        let mut plans = Vec::new();
        for mode in 0..profile.order() {
            let e = profile.ambient_dims()[mode] - profile.rank_bounds()[mode];
            if e == 0 {
                continue;
            }
            let ix = FlatteningIndexer::new(profile.rank_bounds(), mode);
            let mut offsets = Vec::with_capacity(ix.rows() * ix.cols());
            for r in 0..ix.rows() {
                for c in 0..ix.cols() {
                    offsets.push(ix.offset(r, c) as u32);
                }
            }
            plans.push(ModePlan {
                rows: ix.rows(),
                cols: ix.cols(),
                exponent: e as i32,
                offsets,
            });
        }
        WeightEvaluator { plans }
    }

    /// The weight of one sampled core tensor; non-negative, and exactly 1
    /// for full-space profiles (empty product).
    pub fn weight(&self, t: &[Complex64]) -> f64 {
        self.plans
            .iter()
            .map(|p| p.gram_det(t).powi(p.exponent))
            .product()
    }
}

/// One-off weight evaluation; see [`WeightEvaluator`] for repeated use.
pub fn weight(profile: &FormatProfile, t: &[Complex64]) -> f64 {
    WeightEvaluator::new(profile).weight(t)
}

/// Monte Carlo estimate of the normalized diagonal sum `f` and the degree.
///
/// Reproducible: the same `(profile, samples, seed)` produce a bit-identical
/// estimate, independent of the number of worker threads.
pub fn estimate_f(profile: &FormatProfile, samples: u64, seed: u64) -> McEstimate {
    assert!(samples >= 2, "need at least two samples");
    let evaluator = WeightEvaluator::new(profile);
    let len = profile
        .core_len()
        .expect("core tensor too large to sample");
    let chunk_count = samples.div_ceil(SAMPLE_CHUNK);

    let chunks: Vec<RunningMoments> = (0..chunk_count)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(ci);
            let lo = ci * SAMPLE_CHUNK;
            let hi = (lo + SAMPLE_CHUNK).min(samples);
            let mut buf = vec![Complex64::new(0.0, 0.0); len];
            let mut acc = RunningMoments::default();
            for _ in lo..hi {
                fill_gaussian(&mut rng, &mut buf);
                acc.push(evaluator.weight(&buf));
            }
            acc
        })
        .collect();

    let total = chunks
        .iter()
        .copied()
        .fold(RunningMoments::default(), RunningMoments::merge);
    debug_assert_eq!(total.count, samples);

    // Batch-means diagnostic over the full-size chunks.
    let full: Vec<f64> = chunks
        .iter()
        .filter(|c| c.count == SAMPLE_CHUNK)
        .map(|c| c.mean)
        .collect();
    let batch_std_error = if full.len() >= 2 {
        let bm = full.iter().sum::<f64>() / full.len() as f64;
        let var =
            full.iter().map(|m| (m - bm) * (m - bm)).sum::<f64>() / (full.len() - 1) as f64;
        (var / full.len() as f64).sqrt()
    } else {
        0.0
    };

    // Exact normalization chain; floats enter only at the final conversions.
    let d = profile.scalar_d();
    let mode_factorials: BigUint = profile
        .rank_bounds()
        .iter()
        .zip(profile.ambient_dims())
        .map(|(&k, &n)| factorial(k as u64 * (n - k) as u64))
        .product();
    let f_denominator =
        BigUint::from(2u32).pow(u32::try_from(d).expect("D fits u32")) * &mode_factorials;
    let grass: BigUint = profile
        .rank_bounds()
        .iter()
        .zip(profile.ambient_dims())
        .map(|(&k, &n)| grassmannian_degree(k, n))
        .product();
    let degree_scale = ExactRational::new(
        BigInt::from(grass),
        BigInt::from(f_denominator.clone()),
    )
    .to_f64()
    .expect("degree scale to f64");

    let mean = total.mean;
    let std_error = total.std_error();
    McEstimate {
        samples,
        mean,
        std_error,
        batch_std_error,
        degree_scale,
        derived_f: mean / f_denominator.to_f64().expect("denominator to f64"),
        derived_degree: mean * degree_scale,
        exact_degree: None,
        z_score: None,
        seed,
    }
}

/// Exact `E[rho^k]` for `rho` chi-squared with `2n` degrees of freedom:
/// `2^k (k+n-1)! / (n-1)!`.
pub fn chi_squared_moment(n: u32, k: u32) -> BigUint {
    assert!(n >= 1, "need at least one complex coordinate");
    BigUint::from(2u32).pow(k) * rising_product(n as u64, k as u64)
}

/// Outcome of comparing a polynomial's empirical Gaussian expectation with
/// its exact diagonal-formula value.
#[derive(Clone, Debug)]
pub struct MomentCheck {
    pub empirical: f64,
    pub exact: ExactRational,
    pub std_error: f64,
    pub z_score: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Exact `E f(Z, conj(Z))` for an integer-coefficient polynomial in matched
/// variable blocks: only diagonal terms survive, each contributing
/// `c * 2^|alpha| * prod(alpha_i!)`.
pub fn gaussian_expectation_exact(poly: &SparsePolynomial) -> BigInt {
    let mut acc = BigInt::from(0);
    for (e, c) in poly.iter() {
        if !e.is_diagonal() {
            continue;
        }
        let mut term = c * BigInt::from(2).pow(e.x_degree());
        for &exp in e.x_block() {
            if exp > 1 {
                term *= BigInt::from(factorial(exp as u64));
            }
        }
        acc += term;
    }
    acc
}

/// Monte Carlo check of the bi-variate Gaussian expectation identity: the
/// polynomial is evaluated at `(Z, conj(Z))` for complex Gaussian `Z` and the
/// empirical mean of the real part is compared with the exact value.
pub fn gaussian_moment_check(
    poly: &SparsePolynomial,
    samples: u64,
    seed: u64,
) -> MomentCheck {
    assert!(samples >= 2, "need at least two samples");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut z = vec![Complex64::new(0.0, 0.0); poly.arity()];
    let mut zbar = vec![Complex64::new(0.0, 0.0); poly.arity()];
    let mut acc = RunningMoments::default();
    for _ in 0..samples {
        fill_gaussian(&mut rng, &mut z);
        for (w, v) in zbar.iter_mut().zip(&z) {
            *w = v.conj();
        }
        acc.push(poly.eval_bilinear(&z, &zbar).re);
    }
    let exact = ExactRational::from(gaussian_expectation_exact(poly));
    let exact_f = exact.to_f64().expect("exact moment to f64");
    let se = acc.std_error();
    let z_score = if se == 0.0 {
        if acc.mean == exact_f {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (acc.mean - exact_f) / se
    };
    MomentCheck {
        empirical: acc.mean,
        exact,
        std_error: se,
        z_score,
        samples,
        seed,
    }
}

/// Applies a `k_mode x k_mode` matrix (row-major) to one mode of a numeric
/// core tensor.
pub fn mode_product(
    profile: &FormatProfile,
    t: &[Complex64],
    mode: usize,
    matrix: &[Complex64],
) -> Vec<Complex64> {
    let ix = FlatteningIndexer::new(profile.rank_bounds(), mode);
    let k = ix.rows();
    assert_eq!(matrix.len(), k * k, "matrix shape mismatch");
    assert_eq!(t.len(), ix.rows() * ix.cols(), "tensor length mismatch");
    let mut out = vec![Complex64::new(0.0, 0.0); t.len()];
    for c in 0..ix.cols() {
        for r in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..k {
                acc += matrix[r * k + s] * t[ix.offset(s, c)];
            }
            out[ix.offset(r, c)] = acc;
        }
    }
    out
}

/// A Haar-ish random unitary matrix (row-major), from Gram-Schmidt applied
/// to a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            fill_gaussian(rng, &mut v);
            v
        })
        .collect();
    for j in 0..dim {
        for m in 0..j {
            let proj: Complex64 = (0..dim).map(|i| cols[m][i].conj() * cols[j][i]).sum();
            for i in 0..dim {
                let sub = proj * cols[m][i];
                cols[j][i] -= sub;
            }
        }
        let norm: f64 = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "degenerate Gaussian draw");
        for v in &mut cols[j] {
            *v /= norm;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            out[r * dim + c] = cols[c][r];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn profile(k: &[u32], n: &[u32]) -> FormatProfile {
        FormatProfile::new(k.to_vec(), n.to_vec()).unwrap()
    }

    #[test]
    fn chi_squared_moments() {
        assert_eq!(chi_squared_moment(1, 1), BigUint::from(2u32));
        assert_eq!(chi_squared_moment(5, 0), BigUint::one());
        assert_eq!(chi_squared_moment(2, 2), BigUint::from(24u32));
        assert_eq!(chi_squared_moment(1, 3), BigUint::from(48u32));
    }

    #[test]
    fn weight_of_full_space_is_one() {
        let p = profile(&[2, 2], &[2, 2]);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let t = sample_gaussian_tensor(&p, &mut rng);
        assert_eq!(weight(&p, &t), 1.0);
    }

    #[test]
    fn weight_of_rank_one_profile() {
        // Single-entry core: the weight is |t0|^(2D).
        let p = profile(&[1, 1, 1], &[2, 3, 4]);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let t = sample_gaussian_tensor(&p, &mut rng);
        let d = p.scalar_d() as i32;
        let expect = t[0].norm_sqr().powi(d);
        let got = weight(&p, &t);
        assert!((got - expect).abs() <= 1e-12 * expect.abs());
    }

    #[test]
    fn weight_is_phase_invariant() {
        let p = profile(&[2, 2, 2], &[3, 4, 3]);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = sample_gaussian_tensor(&p, &mut rng);
            let w = weight(&p, &t);
            let theta: f64 = rng.sample(rand_distr::Uniform::new(0.0, 6.28).unwrap());
            let phase = Complex64::new(theta.cos(), theta.sin());
            let rotated: Vec<Complex64> = t.iter().map(|&v| v * phase).collect();
            let wr = weight(&p, &rotated);
            assert!((w - wr).abs() <= 1e-10 * w.abs().max(1.0));
        }
    }

    #[test]
    fn estimates_are_reproducible() {
        let p = profile(&[1, 2, 2], &[3, 3, 3]);
        let a = estimate_f(&p, 40_000, 99);
        let b = estimate_f(&p, 40_000, 99);
        assert_eq!(a, b);
        // A different seed moves the mean.
        let c = estimate_f(&p, 40_000, 100);
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn full_space_estimate_has_zero_variance() {
        let p = profile(&[2, 2, 2], &[2, 2, 2]);
        let est = estimate_f(&p, 1000, 5);
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.derived_f, 1.0);
        assert_eq!(est.derived_degree, 1.0);
        let est = est.with_exact(&BigInt::one());
        assert_eq!(est.z_score, Some(0.0));
    }

    #[test]
    fn rank_one_mean_matches_chi_squared_moment() {
        // Weight reduces to rho^D with rho chi-squared of 2 dof.
        let p = profile(&[1, 1, 1], &[2, 2, 2]);
        let est = estimate_f(&p, 200_000, 42);
        let exact_mean = chi_squared_moment(1, 3).to_f64().unwrap();
        let z = (est.mean - exact_mean) / est.std_error;
        assert!(z.abs() < 4.0, "z = {z}");
        // derived_f should estimate 6 (the rank-one closed form).
        assert!((est.derived_f - 6.0).abs() < 4.0 * est.std_error / 8.0);
    }

    #[test]
    fn moment_check_examples() {
        let x0y0 = SparsePolynomial::variable_x(1, 0)
            .mul(&SparsePolynomial::variable_y(1, 0));
        assert_eq!(
            gaussian_expectation_exact(&x0y0),
            BigInt::from(2),
            "mean of chi-squared with 2 dof"
        );
        let sq = x0y0.pow(2);
        assert_eq!(gaussian_expectation_exact(&sq), BigInt::from(8));

        let x0y1 = SparsePolynomial::variable_x(2, 0)
            .mul(&SparsePolynomial::variable_y(2, 1));
        assert!(gaussian_expectation_exact(&x0y1).is_zero());

        let check = gaussian_moment_check(&x0y0, 30_000, 12345);
        assert!(check.z_score.abs() < 4.0, "z = {}", check.z_score);
    }

    #[test]
    fn unitary_matrices_are_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for dim in 1..=4 {
            let u = random_unitary(dim, &mut rng);
            for r in 0..dim {
                for s in 0..dim {
                    let dot: Complex64 = (0..dim)
                        .map(|c| u[r * dim + c] * u[s * dim + c].conj())
                        .sum();
                    let expect = if r == s { 1.0 } else { 0.0 };
                    assert!((dot.re - expect).abs() < 1e-10);
                    assert!(dot.im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn weight_is_unitarily_invariant() {
        let p = profile(&[2, 2, 2], &[3, 3, 4]);
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..10 {
            let t = sample_gaussian_tensor(&p, &mut rng);
            let w = weight(&p, &t);
            for mode in 0..3 {
                let u = random_unitary(p.rank_bounds()[mode] as usize, &mut rng);
                let rotated = mode_product(&p, &t, mode, &u);
                let wr = weight(&p, &rotated);
                assert!(
                    (w - wr).abs() <= 1e-10 * w.abs().max(1.0),
                    "mode {mode}: {w} vs {wr}"
                );
            }
        }
    }
}
