//! Dense matrix models on graded bases: creation operators, the transpose
//! unitary, left/right multiplication blocks, and the defect Gram matrix.
//!
//! Every matrix here is an exact rectangular block between a domain basis
//! of words of degree <= `domain_degree` and a codomain basis of degree <=
//! `codomain_degree`, both in graded-lexicographic order. Multiplication
//! blocks keep their full codomain, so no product coefficient is clipped;
//! operator identities that hold on the full Fock space then hold exactly
//! on these blocks.
//!
//! Dense models are for desk-scale truncations. The matrix-free
//! [`gram_apply`] action is what the factorization engine uses at larger
//! degrees.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::FreeSeries;
use crate::words::{enumerate_words, word_count, word_index, Word};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hard cap on dense graded bases; beyond this the dense model would not
/// be a desk-scale object any more.
pub(crate) const MAX_DENSE_BASIS: usize = 1 << 14;

fn dense_basis_len(d: usize, degree: usize) -> usize {
    let len = word_count(d, degree);
    assert!(
        len <= MAX_DENSE_BASIS,
        "graded basis of {len} words exceeds the dense cap {MAX_DENSE_BASIS}"
    );
    len
}

/// Which side a creation operator appends its letter on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A dense operator block between graded bases.
///
/// The basis is contextual: word bases for the Fock-space models in this
/// module, multi-index bases for the commutative models. Serialization
/// emits the matrix row-major with `[re, im]` entries, for debugging.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    d: usize,
    domain_degree: usize,
    codomain_degree: usize,
    matrix: DMatrix<Complex64>,
}

impl TruncatedOperator {
    pub(crate) fn new(
        d: usize,
        domain_degree: usize,
        codomain_degree: usize,
        matrix: DMatrix<Complex64>,
    ) -> Self {
        TruncatedOperator {
            d,
            domain_degree,
            codomain_degree,
            matrix,
        }
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn domain_degree(&self) -> usize {
        self.domain_degree
    }

    pub fn codomain_degree(&self) -> usize {
        self.codomain_degree
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }
}

impl Serialize for TruncatedOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.matrix.nrows())
            .map(|i| {
                (0..self.matrix.ncols())
                    .map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im])
                    .collect()
            })
            .collect();
        let mut s = serializer.serialize_struct("TruncatedOperator", 4)?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("domain_degree", &self.domain_degree)?;
        s.serialize_field("codomain_degree", &self.codomain_degree)?;
        s.serialize_field("rows", &rows)?;
        s.end()
    }
}

/// The creation operator appending `letter` on the chosen side, as an
/// isometric block from degree <= `n` into degree <= `n + 1`.
pub fn creation_matrix(d: usize, letter: u8, n: usize, side: Side) -> Result<TruncatedOperator> {
    if letter == 0 || letter as usize > d {
        return Err(Error::LetterOutOfRange { letter, d });
    }
    let rows = dense_basis_len(d, n + 1);
    let cols = dense_basis_len(d, n);
    let single = Word::new(vec![letter]);
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for (j, w) in enumerate_words(d, n).iter().enumerate() {
        let image = match side {
            Side::Left => single.concat(w),
            Side::Right => w.concat(&single),
        };
        m[(word_index(&image, d), j)] = Complex64::new(1.0, 0.0);
    }
    Ok(TruncatedOperator::new(d, n, n + 1, m))
}

/// The transpose unitary on degree <= `n`: the self-inverse permutation
/// sending each basis word to its reversal.
pub fn transpose_unitary(d: usize, n: usize) -> TruncatedOperator {
    let len = dense_basis_len(d, n);
    let mut m = DMatrix::<Complex64>::zeros(len, len);
    for (j, w) in enumerate_words(d, n).iter().enumerate() {
        m[(word_index(&w.transpose(), d), j)] = Complex64::new(1.0, 0.0);
    }
    TruncatedOperator::new(d, n, n, m)
}

/// Left multiplication by the polynomial `f` as an exact block from degree
/// <= `n` into degree <= `n + deg f`.
pub fn left_mult_matrix(f: &FreeSeries, n: usize) -> TruncatedOperator {
    let d = f.dimension();
    let rows = dense_basis_len(d, n + f.degree());
    let cols = dense_basis_len(d, n);
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for (j, w) in enumerate_words(d, n).iter().enumerate() {
        for (u, cu) in f.terms() {
            m[(word_index(&u.concat(w), d), j)] += cu;
        }
    }
    TruncatedOperator::new(d, n, n + f.degree(), m)
}

/// Right multiplication by the polynomial `f` as an exact block from degree
/// <= `n` into degree <= `n + deg f`.
pub fn right_mult_matrix(f: &FreeSeries, n: usize) -> TruncatedOperator {
    let d = f.dimension();
    let rows = dense_basis_len(d, n + f.degree());
    let cols = dense_basis_len(d, n);
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for (j, w) in enumerate_words(d, n).iter().enumerate() {
        for (u, cu) in f.terms() {
            m[(word_index(&w.concat(u), d), j)] += cu;
        }
    }
    TruncatedOperator::new(d, n, n + f.degree(), m)
}

fn check_family(d: usize, h_list: &[FreeSeries]) -> Result<()> {
    for h in h_list {
        if h.dimension() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: h.dimension(),
            });
        }
    }
    Ok(())
}

/// The defect Gram matrix `G = I + sum_i M_i^H M_i` on degree <= `n`,
/// where `M_i` is the exact left-multiplication block of `h_list[i]`.
///
/// `G` is Hermitian and `G >= I`; its graph representer drives the
/// factorization engine.
pub fn gram_defect(d: usize, h_list: &[FreeSeries], n: usize) -> Result<DMatrix<Complex64>> {
    check_family(d, h_list)?;
    let len = dense_basis_len(d, n);
    let mut g = DMatrix::<Complex64>::identity(len, len);
    for h in h_list {
        let m = left_mult_matrix(h, n);
        g += m.matrix().adjoint() * m.matrix();
    }
    Ok(g)
}

/// Applies `M_h^H` to a sparse coefficient vector, truncating the result at
/// degree `n`: the coefficient of `v` in the image is
/// `sum_u conj(h_u) w_{u v}`.
pub(crate) fn mult_adjoint_apply(h: &FreeSeries, w: &FreeSeries, n: usize) -> FreeSeries {
    let mut out: BTreeMap<Word, Complex64> = BTreeMap::new();
    for (omega, c_omega) in w.terms() {
        for (u, c_u) in h.terms() {
            if u.len() > omega.len() {
                break;
            }
            if let Some(v) = omega.strip_prefix(u) {
                if v.len() <= n {
                    *out.entry(v).or_insert(ZERO) += c_u.conj() * c_omega;
                }
            }
        }
    }
    FreeSeries::from_terms(h.dimension(), out).expect("letters come from valid words")
}

/// Matrix-free action of the defect Gram matrix:
/// `gram_apply(d, H, v, n) = v + sum_i M_i^H (M_i v)`, with each product
/// kept to its exact degree before the adjoint truncates back to `n`.
///
/// Agrees column-for-column with [`gram_defect`] and scales to truncation
/// degrees where the dense basis is unthinkable.
pub fn gram_apply(d: usize, h_list: &[FreeSeries], v: &FreeSeries, n: usize) -> Result<FreeSeries> {
    check_family(d, h_list)?;
    if v.dimension() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: v.dimension(),
        });
    }
    if v.degree() > n {
        return Err(Error::DegreeTooLarge {
            degree: v.degree(),
            max_degree: n,
        });
    }
    let mut acc = v.clone();
    for h in h_list {
        let image = h.cauchy_product(v, n + h.degree())?;
        acc = acc.add(&mult_adjoint_apply(h, &image, n))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::series::tests::random_series;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Coefficient vector of a series over the degree <= `n` basis.
    fn coeff_vector(f: &FreeSeries, n: usize) -> DVector<Complex64> {
        let d = f.dimension();
        let mut v = DVector::zeros(word_count(d, n));
        for (w, cw) in f.terms() {
            v[word_index(w, d)] = cw;
        }
        v
    }

    #[test]
    fn creation_columns_are_orthonormal_and_disjoint() {
        for d in 1..=3usize {
            for n in 0..=3usize {
                for i in 1..=d as u8 {
                    let li = creation_matrix(d, i, n, Side::Left).unwrap();
                    for j in 1..=d as u8 {
                        let lj = creation_matrix(d, j, n, Side::Left).unwrap();
                        let prod = li.matrix().adjoint() * lj.matrix();
                        let expect = if i == j {
                            DMatrix::identity(prod.nrows(), prod.ncols())
                        } else {
                            DMatrix::zeros(prod.nrows(), prod.ncols())
                        };
                        assert_eq!(prod, expect, "d={d} n={n} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn creation_rejects_foreign_letters() {
        assert_eq!(
            creation_matrix(2, 3, 1, Side::Left),
            Err(Error::LetterOutOfRange { letter: 3, d: 2 })
        );
        assert!(creation_matrix(2, 0, 1, Side::Right).is_err());
    }

    #[test]
    fn range_projection_misses_only_the_vacuum() {
        // sum_j L_j L_j^H = I - (vacuum projection) on degree <= n.
        let (d, n) = (2usize, 3usize);
        let len = word_count(d, n);
        let mut s = DMatrix::<Complex64>::zeros(len, len);
        for j in 1..=d as u8 {
            let l = creation_matrix(d, j, n - 1, Side::Left).unwrap();
            s += l.matrix() * l.matrix().adjoint();
        }
        let mut expect = DMatrix::<Complex64>::identity(len, len);
        expect[(0, 0)] = ZERO;
        assert_eq!(s, expect);
    }

    #[test]
    fn transpose_unitary_is_a_symmetric_involution() {
        for d in 1..=3usize {
            let w = transpose_unitary(d, 4);
            let m = w.matrix();
            assert_eq!(m * m, DMatrix::identity(m.nrows(), m.ncols()));
            assert_eq!(m.adjoint(), m.clone_owned());
        }
    }

    #[test]
    fn transpose_unitary_conjugates_left_to_right() {
        // W L_w W = R_{w transposed}, as exact blocks.
        let d = 2usize;
        let n = 3usize;
        for letters in [vec![1u8], vec![1, 2], vec![2, 2, 1]] {
            let f = FreeSeries::monomial(d, &letters, c(1.0));
            let ft = f.transposed();
            let left = left_mult_matrix(&f, n);
            let right = right_mult_matrix(&ft, n);
            let w_out = transpose_unitary(d, n + letters.len());
            let w_in = transpose_unitary(d, n);
            let conj = w_out.matrix() * left.matrix() * w_in.matrix();
            assert_eq!(conj, *right.matrix());
        }
    }

    #[test]
    fn right_mult_is_conjugated_left_mult_for_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let f = random_series(&mut rng, 2, 3, 4);
            let n = 2usize;
            let right = right_mult_matrix(&f, n);
            let left_t = left_mult_matrix(&f.transposed(), n);
            let w_out = transpose_unitary(2, n + f.degree());
            let w_in = transpose_unitary(2, n);
            let conj = w_out.matrix() * left_t.matrix() * w_in.matrix();
            assert!((conj - right.matrix()).norm() <= 1e-12);
        }
    }

    #[test]
    fn left_mult_matches_cauchy_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            let f = random_series(&mut rng, 2, 2, 3);
            let g = random_series(&mut rng, 2, 3, 4);
            let n = 3usize;
            let m = left_mult_matrix(&f, n);
            let by_matrix = m.matrix() * coeff_vector(&g.truncated(n), n);
            let by_series = f.cauchy_product(&g.truncated(n), n + f.degree()).unwrap();
            assert!((by_matrix - coeff_vector(&by_series, n + f.degree())).norm() <= 1e-13);
        }
    }

    #[test]
    fn left_and_right_mult_by_distinct_letters_commute() {
        let n = 3usize;
        let x1 = FreeSeries::monomial(2, &[1], c(1.0));
        let x2 = FreeSeries::monomial(2, &[2], c(1.0));
        let first = left_mult_matrix(&x1, n + 1).matrix() * right_mult_matrix(&x2, n).matrix();
        let second = right_mult_matrix(&x2, n + 1).matrix() * left_mult_matrix(&x1, n).matrix();
        assert_eq!(first, second);
    }

    #[test]
    fn left_mult_blocks_are_graded() {
        // Block (out-degree k, in-degree j) vanishes unless 0 <= k - j <=
        // deg f, and the k = j block is f_empty · I.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = random_series(&mut rng, 2, 2, 4);
        let n = 3usize;
        let m = left_mult_matrix(&f, n);
        let d = 2usize;
        let words_in = enumerate_words(d, n);
        let words_out = enumerate_words(d, n + f.degree());
        let f0 = f.constant_term();
        for (i, wo) in words_out.iter().enumerate() {
            for (j, wi) in words_in.iter().enumerate() {
                let entry = m.matrix()[(i, j)];
                if wo.len() < wi.len() || wo.len() > wi.len() + f.degree() {
                    assert_eq!(entry, ZERO);
                }
                if wo.len() == wi.len() {
                    let expect = if wo == wi { f0 } else { ZERO };
                    assert_eq!(entry, expect);
                }
            }
        }
    }

    #[test]
    fn gram_is_three_i_for_the_left_shifted_pair() {
        // H = X1 + X2 X1 has pairwise-orthogonal images of the basis:
        // G = 3I exactly.
        let h = FreeSeries::monomial(2, &[1], c(1.0))
            .add(&FreeSeries::monomial(2, &[2, 1], c(1.0)))
            .unwrap();
        for n in 0..=4usize {
            let g = gram_defect(2, std::slice::from_ref(&h), n).unwrap();
            let len = word_count(2, n);
            assert_eq!(g, DMatrix::<Complex64>::identity(len, len) * c(3.0));
        }
    }

    #[test]
    fn gram_for_right_shifted_pair_is_tridiagonal_in_grade() {
        // H = X1 + X1 X2: G = 3I + T + T^H with T the degree-<= n
        // compression of left multiplication by X2.
        let h = FreeSeries::monomial(2, &[1], c(1.0))
            .add(&FreeSeries::monomial(2, &[1, 2], c(1.0)))
            .unwrap();
        let n = 4usize;
        let g = gram_defect(2, &[h], n).unwrap();
        let len = word_count(2, n);
        let x2 = FreeSeries::monomial(2, &[2], c(1.0));
        let t_full = left_mult_matrix(&x2, n);
        let t = t_full.matrix().view((0, 0), (len, len)).clone_owned();
        let expect = DMatrix::<Complex64>::identity(len, len) * c(3.0) + &t + t.adjoint();
        assert!((g - expect).norm() == 0.0);
    }

    #[test]
    fn gram_for_symmetrized_numerator() {
        // H = X1 + (X1 X2 + X2 X1)/2: G = 2.5 I + (T + T^H)/2.
        let h = FreeSeries::monomial(2, &[1], c(1.0))
            .add(&FreeSeries::monomial(2, &[1, 2], c(0.5)))
            .unwrap()
            .add(&FreeSeries::monomial(2, &[2, 1], c(0.5)))
            .unwrap();
        let n = 4usize;
        let g = gram_defect(2, &[h], n).unwrap();
        let len = word_count(2, n);
        let x2 = FreeSeries::monomial(2, &[2], c(1.0));
        let t_full = left_mult_matrix(&x2, n);
        let t = t_full.matrix().view((0, 0), (len, len)).clone_owned();
        let expect =
            DMatrix::<Complex64>::identity(len, len) * c(2.5) + (&t + t.adjoint()) * c(0.5);
        assert!((g - expect).norm() <= 1e-14);
    }

    #[test]
    fn gram_without_multipliers_is_identity() {
        let g = gram_defect(2, &[], 3).unwrap();
        let len = word_count(2, 3);
        assert_eq!(g, DMatrix::<Complex64>::identity(len, len));
        let zero = FreeSeries::zero(2);
        let g0 = gram_defect(2, &[zero], 3).unwrap();
        assert_eq!(g0, DMatrix::<Complex64>::identity(len, len));
    }

    #[test]
    fn gram_is_hermitian_and_at_least_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let h1 = random_series(&mut rng, 2, 2, 3);
            let h2 = random_series(&mut rng, 2, 2, 3);
            let g = gram_defect(2, &[h1, h2], 3).unwrap();
            assert!((g.clone() - g.adjoint()).norm() <= 1e-13);
            let eig = g.symmetric_eigen().eigenvalues;
            assert!(eig.min() >= 1.0 - 1e-12, "G >= I fails: {}", eig.min());
        }
    }

    #[test]
    fn gram_apply_matches_dense_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..6 {
            let h1 = random_series(&mut rng, 2, 2, 3);
            let h2 = random_series(&mut rng, 2, 2, 2);
            let v = random_series(&mut rng, 2, 3, 4);
            let n = 3usize;
            let h_list = vec![h1, h2];
            let dense = gram_defect(2, &h_list, n).unwrap();
            let by_matrix = &dense * coeff_vector(&v.truncated(n), n);
            let by_action = gram_apply(2, &h_list, &v.truncated(n), n).unwrap();
            assert!((by_matrix - coeff_vector(&by_action, n)).norm() <= 1e-13);
        }
    }

    #[test]
    fn gram_apply_rejects_deep_input() {
        let h = FreeSeries::monomial(2, &[1], c(1.0));
        let v = FreeSeries::monomial(2, &[1, 1, 1], c(1.0));
        assert_eq!(
            gram_apply(2, &[h], &v, 2),
            Err(Error::DegreeTooLarge {
                degree: 3,
                max_degree: 2
            })
        );
    }

    #[test]
    fn multiplier_graph_is_right_shift_invariant() {
        // (R_j ⊕ R_j) sends the graph column of a word to the graph column
        // of the shifted word, exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let h = random_series(&mut rng, 2, 2, 3);
            for alpha in enumerate_words(2, 2) {
                for j in 1..=2u8 {
                    let e_alpha = FreeSeries::monomial(2, alpha.letters(), c(1.0));
                    let shifted = FreeSeries::monomial(
                        2,
                        alpha.concat(&Word::new(vec![j])).letters(),
                        c(1.0),
                    );
                    // Top component: e_alpha · X_j = e_{alpha j}. Bottom:
                    // (H e_alpha) · X_j = H e_{alpha j}.
                    let xj = FreeSeries::monomial(2, &[j], c(1.0));
                    let top = e_alpha.cauchy_product(&xj, 8).unwrap();
                    assert_eq!(top, shifted);
                    let bottom_shifted = h
                        .cauchy_product(&e_alpha, 8)
                        .unwrap()
                        .cauchy_product(&xj, 8)
                        .unwrap();
                    let graph_of_shifted = h.cauchy_product(&shifted, 8).unwrap();
                    assert_eq!(bottom_shifted.sup_diff(&graph_of_shifted).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn multiplier_graph_is_local() {
        // For graph vectors with vanishing vacuum component, the backward
        // shift R_j^H stays inside the graph: stripping a trailing j
        // commutes with left multiplication.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let strip = |f: &FreeSeries, j: u8| -> FreeSeries {
            let terms: Vec<(Word, Complex64)> = f
                .terms()
                .filter_map(|(w, cw)| {
                    if w.is_empty() || *w.letters().last().unwrap() != j {
                        None
                    } else {
                        Some((w.prefix(w.len() - 1), cw))
                    }
                })
                .collect();
            FreeSeries::from_terms(2, terms).unwrap()
        };
        for _ in 0..6 {
            let h = random_series(&mut rng, 2, 3, 4);
            let f_raw = random_series(&mut rng, 2, 4, 5);
            let f = f_raw
                .sub(&FreeSeries::constant(2, f_raw.constant_term()))
                .unwrap(); // vacuum component removed
            for j in 1..=2u8 {
                let lhs = strip(&h.cauchy_product(&f, 16).unwrap(), j);
                let rhs = h.cauchy_product(&strip(&f, j), 16).unwrap();
                assert!(lhs.sup_diff(&rhs).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn operator_serializes_row_major_pairs() {
        let f = FreeSeries::monomial(1, &[1], c(2.0));
        let m = left_mult_matrix(&f, 1);
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["d"], 1);
        assert_eq!(json["domain_degree"], 1);
        assert_eq!(json["codomain_degree"], 2);
        // Basis e, 1, 11; column of e maps to word "1".
        assert_eq!(json["rows"][1][0][0], 2.0);
        assert_eq!(json["rows"][1][0][1], 0.0);
    }
}
