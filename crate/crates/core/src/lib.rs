//! Exact projective degrees of tensor varieties with bounded multilinear
//! rank, plus an independent Monte Carlo cross-check.
//!
//! The exact pipeline builds the bilinear Gram matrices of the mode
//! flattenings of two generic core tensors, expands the product of their
//! determinants raised to the codimension exponents, extracts the diagonal
//! coefficients weighted by factorials, and combines the normalized result
//! with Grassmannian degrees into the integer degree of the variety. The
//! statistical pipeline estimates the same quantity as a Gaussian
//! expectation over numeric core tensors.
//!
//! ```
//! use subvar::{subspace_degree, FormatProfile};
//!
//! let profile = FormatProfile::new(vec![1, 2, 2], vec![3, 3, 3]).unwrap();
//! let result = subspace_degree(&profile).unwrap();
//! assert_eq!(result.degree.to_string(), "108");
//! ```

pub mod degree;
pub mod error;
pub mod flatten;
pub mod format;
pub mod mc;
pub mod poly;

pub use degree::{
    degree_factor, determinantal_degree, diagonal_factorial_sum, grassmannian_degree,
    paired_diagonal_factorial_sum, segre_degree, subspace_degree, subspace_degree_with,
    weight_polynomial, DegreeResult, DiagonalStrategy, EngineOptions, DEFAULT_TERM_CAP,
};
pub use error::{Error, Result};
pub use flatten::{
    flattening_layout, generic_flattening, gram_product, DetStrategy, SymbolicMatrix, VarBlock,
};
pub use format::{FlatteningIndexer, FormatProfile, MultiIndex};
pub use mc::{
    chi_squared_moment, estimate_f, gaussian_expectation_exact, gaussian_moment_check,
    mode_product, random_unitary, sample_gaussian_tensor, weight, McEstimate, MomentCheck,
    WeightEvaluator,
};
pub use poly::{factorial, ExactRational, ExponentVec, SparsePolynomial};

pub use num_bigint::{BigInt, BigUint};
pub use num_complex::Complex64;
