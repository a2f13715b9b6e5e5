//! Inner-outer style factorization of truncated free holomorphic
//! functions on the Fock space over d letters, with pushdowns to
//! commuting variables (Drury-Arveson norm) and to finite samples of the
//! unit ball.
//!
//! The central operation takes a column of free polynomials
//! `h_1, …, h_k` and a truncation degree `n` and produces a canonical
//! pair `(a; b_1, …, b_k)` with `b_i = h_i · a`: the stacked column is an
//! isometric multiplier up to certified truncation tails, the denominator
//! `a` never vanishes on the open matrix ball, and
//! `||a^{-1}||^2 -> 1 + sum_i ||h_i||^2` as `n` grows. See
//! [`smirnov::canonical_pair`] for the entry point,
//! [`commutative::commutative_smirnov`] for the commuting-variable
//! version, and [`cnp::restrict_smirnov`] for finite-sample checks.
//!
//! Conventions used throughout:
//! - words are sequences of 1-based letters, and every graded basis is
//!   ordered by degree first, then lexicographically;
//! - series are canonical sparse coefficient maps; operations return new
//!   values and validate ambient dimensions;
//! - dense operator blocks are exact: a multiplication block always keeps
//!   its full codomain degree, so operator identities hold without
//!   clipping artifacts.

pub mod cnp;
pub mod commutative;
mod error;
pub mod operators;
pub mod series;
pub mod smirnov;
pub mod words;

/// Cap on sparse coefficient supports produced by closure constructions
/// (series inversion, free lifts). Keeps runaway inputs from exhausting
/// memory; desk-scale problems stay far below it.
pub(crate) const MAX_SPARSE_SUPPORT: usize = 1 << 14;

pub use num_complex::Complex64;

pub use cnp::{outer_restriction_check, restrict_smirnov, CnpSample, RestrictionReport};
pub use commutative::{
    commutative_smirnov, da_mult_matrix, enumerate_multi_indices, multi_index_count,
    multinomial_weight, symmetrize, CommutativePair, MultiIndexSeries,
};
pub use error::{Error, Result};
pub use operators::{
    creation_matrix, gram_apply, gram_defect, left_mult_matrix, right_mult_matrix,
    transpose_unitary, Side, TruncatedOperator,
};
pub use series::{FreeSeries, MatrixTuple};
pub use smirnov::{
    a_inverse, canonical_pair, fejer_riesz_degree1, graph_representer, isometry_defect_bound,
    verify_pair, Phase, SmirnovPair, VerificationReport,
};
pub use words::{enumerate_words, word_count, word_index, MultiIndex, Word};
