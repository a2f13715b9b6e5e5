//! Commuting-variable polynomials with the weighted norm of the
//! Drury-Arveson space, and the transfer back and forth to free series.
//!
//! The squared norm of a monomial `z^n` is the multinomial weight
//! `n! / |n|!`. [`MultiIndexSeries::free_lift`] sends `z^n` to the
//! weighted average of all words with letter count `n`; it is an isometry
//! onto the symmetric part of the Fock space and agrees with the original
//! polynomial at commuting scalar points. [`symmetrize`] is its adjoint
//! (summing coefficients over letter-count classes) and a left inverse.
//!
//! [`commutative_smirnov`] factors a commuting-variable column by lifting
//! it, running the free engine, and pushing the result back down.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operators::{TruncatedOperator, MAX_DENSE_BASIS};
use crate::series::FreeSeries;
use crate::smirnov::{canonical_pair, verify_pair, SmirnovPair, VerificationReport};
use crate::words::{MultiIndex, Word};
use crate::MAX_SPARSE_SUPPORT;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Squared norm of the monomial `z^n`: `n! / |n|!`, the reciprocal of the
/// multinomial coefficient.
pub fn multinomial_weight(idx: &MultiIndex) -> f64 {
    let mut weight = 1.0f64;
    let mut seen = 0u64;
    for &c in idx.counts() {
        for j in 1..=u64::from(c) {
            seen += 1;
            weight *= j as f64 / seen as f64;
        }
    }
    weight
}

/// Number of multi-indices in dimension `d` with total degree at most
/// `max_total`: `C(max_total + d, d)`.
pub fn multi_index_count(d: usize, max_total: usize) -> usize {
    assert!(d >= 1, "a multi-index needs at least one slot");
    let mut count: usize = 1;
    for k in 1..=d {
        count = count
            .checked_mul(max_total + k)
            .expect("multi-index count overflows usize")
            / k;
    }
    count
}

/// All multi-indices of total degree at most `max_total`, in the graded
/// order of `MultiIndex` (total degree first, then entries
/// lexicographically).
pub fn enumerate_multi_indices(d: usize, max_total: usize) -> Vec<MultiIndex> {
    assert!(d >= 1, "a multi-index needs at least one slot");
    fn fill(out: &mut Vec<MultiIndex>, counts: &mut [u32], slot: usize, remaining: usize) {
        if slot + 1 == counts.len() {
            counts[slot] = remaining as u32;
            out.push(MultiIndex::new(counts.to_vec()));
            counts[slot] = 0;
            return;
        }
        for v in 0..=remaining {
            counts[slot] = v as u32;
            fill(out, counts, slot + 1, remaining - v);
        }
        counts[slot] = 0;
    }
    let mut out = Vec::with_capacity(multi_index_count(d, max_total));
    let mut counts = vec![0u32; d];
    for total in 0..=max_total {
        fill(&mut out, &mut counts, 0, total);
    }
    out
}

/// A finitely supported polynomial `sum_n c_n z^n` in `d` commuting
/// variables, normed as an element of the Drury-Arveson space.
///
/// Same canonical-form conventions as [`FreeSeries`]: zero coefficients
/// are dropped and terms iterate in graded order.
#[derive(Clone, PartialEq)]
pub struct MultiIndexSeries {
    d: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl MultiIndexSeries {
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "need at least one variable");
        MultiIndexSeries {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, value: Complex64) -> Self {
        let mut s = MultiIndexSeries::zero(d);
        if value != ZERO {
            s.coeffs.insert(MultiIndex::zeros(d), value);
        }
        s
    }

    pub fn one(d: usize) -> Self {
        MultiIndexSeries::constant(d, Complex64::new(1.0, 0.0))
    }

    /// A single term `value · z^counts`. Panics when `counts` has the
    /// wrong number of slots; use [`MultiIndexSeries::from_terms`] for
    /// checked input.
    pub fn monomial(d: usize, counts: &[u32], value: Complex64) -> Self {
        assert_eq!(counts.len(), d, "counts must have one slot per variable");
        let mut s = MultiIndexSeries::zero(d);
        if value != ZERO {
            s.coeffs.insert(MultiIndex::new(counts.to_vec()), value);
        }
        s
    }

    /// Builds a polynomial from (index, coefficient) terms, validating
    /// index dimensions. Duplicate indices accumulate.
    pub fn from_terms(
        d: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        assert!(d >= 1, "need at least one variable");
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (idx, c) in terms {
            if idx.dimension() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: idx.dimension(),
                });
            }
            *coeffs.entry(idx).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c| *c != ZERO);
        Ok(MultiIndexSeries { d, coeffs })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Largest total degree carrying a nonzero coefficient (0 for zero).
    pub fn degree(&self) -> usize {
        self.coeffs
            .keys()
            .next_back()
            .map(MultiIndex::total)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Complex64 {
        self.coeffs.get(idx).copied().unwrap_or(ZERO)
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&MultiIndex::zeros(self.d))
    }

    /// Terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(idx, c)| (idx, *c))
    }

    fn check_dimension(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dimension(other)?;
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in &other.coeffs {
            *coeffs.entry(idx.clone()).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c| *c != ZERO);
        Ok(MultiIndexSeries { d: self.d, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        if factor == ZERO {
            return MultiIndexSeries::zero(self.d);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(idx, c)| (idx.clone(), c * factor))
            .filter(|(_, c)| *c != ZERO)
            .collect();
        MultiIndexSeries { d: self.d, coeffs }
    }

    /// Product truncated at total degree `max_total`.
    pub fn multiply(&self, other: &Self, max_total: usize) -> Result<Self> {
        self.check_dimension(other)?;
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (m, cm) in &self.coeffs {
            if m.total() > max_total {
                break;
            }
            for (k, ck) in &other.coeffs {
                if m.total() + k.total() > max_total {
                    continue;
                }
                *coeffs.entry(m.plus(k)).or_insert(ZERO) += cm * ck;
            }
        }
        coeffs.retain(|_, c| *c != ZERO);
        Ok(MultiIndexSeries { d: self.d, coeffs })
    }

    /// Squared Drury-Arveson norm: `sum_n |c_n|^2 · n!/|n|!`.
    pub fn da_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(idx, c)| c.norm_sqr() * multinomial_weight(idx))
            .sum()
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn sup_diff(&self, other: &Self) -> Result<f64> {
        self.check_dimension(other)?;
        let mut m: f64 = 0.0;
        for (idx, c) in &self.coeffs {
            m = m.max((c - other.coeff(idx)).norm());
        }
        for (idx, c) in &other.coeffs {
            m = m.max((c - self.coeff(idx)).norm());
        }
        Ok(m)
    }

    /// Evaluates at a point of `C^d`.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: point.len(),
            });
        }
        let mut acc = ZERO;
        for (idx, c) in &self.coeffs {
            let mut term = *c;
            for (z, &count) in point.iter().zip(idx.counts()) {
                if count > 0 {
                    term *= z.powu(count);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// The isometric free lift: `z^n` becomes `(n!/|n|!) · sum X^alpha`
    /// over all words `alpha` with letter count `n`.
    ///
    /// Preserves the norm (Drury-Arveson to Fock) and evaluates to the
    /// same values at commuting scalar tuples. Errs when the number of
    /// lifted words would exceed the sparse-support cap.
    pub fn free_lift(&self) -> Result<FreeSeries> {
        let mut terms: Vec<(Word, Complex64)> = Vec::new();
        for (idx, c) in &self.coeffs {
            let value = c * Complex64::new(multinomial_weight(idx), 0.0);
            let mut remaining: Vec<u32> = idx.counts().to_vec();
            let mut letters: Vec<u8> = Vec::with_capacity(idx.total());
            push_arrangements(&mut terms, &mut remaining, &mut letters, idx.total(), value)?;
        }
        FreeSeries::from_terms(self.d, terms)
    }
}

/// Appends every word using each letter `l` exactly `remaining[l-1]` more
/// times, in lexicographic order, bailing out at the sparse-support cap.
fn push_arrangements(
    terms: &mut Vec<(Word, Complex64)>,
    remaining: &mut [u32],
    letters: &mut Vec<u8>,
    left: usize,
    value: Complex64,
) -> Result<()> {
    if left == 0 {
        if terms.len() >= MAX_SPARSE_SUPPORT {
            return Err(Error::SupportTooLarge {
                degree: letters.len(),
                max: MAX_SPARSE_SUPPORT,
            });
        }
        terms.push((Word::new(letters.clone()), value));
        return Ok(());
    }
    for l in 0..remaining.len() {
        if remaining[l] == 0 {
            continue;
        }
        remaining[l] -= 1;
        letters.push((l + 1) as u8);
        push_arrangements(terms, remaining, letters, left - 1, value)?;
        letters.pop();
        remaining[l] += 1;
    }
    Ok(())
}

impl std::fmt::Debug for MultiIndexSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MultiIndexSeries(d = {}", self.d)?;
        for (idx, c) in &self.coeffs {
            write!(f, ", {idx}: {c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct IndexTermDto {
    index: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct MultiIndexSeriesDto {
    d: usize,
    terms: Vec<IndexTermDto>,
}

impl Serialize for MultiIndexSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = MultiIndexSeriesDto {
            d: self.d,
            terms: self
                .coeffs
                .iter()
                .map(|(idx, c)| IndexTermDto {
                    index: idx.counts().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiIndexSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let dto = MultiIndexSeriesDto::deserialize(deserializer)?;
        if dto.d < 1 {
            return Err(D::Error::custom("need at least one variable"));
        }
        let mut terms = Vec::with_capacity(dto.terms.len());
        for t in dto.terms {
            if t.index.len() != dto.d {
                return Err(D::Error::custom(format!(
                    "index {:?} does not have {} slots",
                    t.index, dto.d
                )));
            }
            terms.push((MultiIndex::new(t.index), Complex64::new(t.re, t.im)));
        }
        MultiIndexSeries::from_terms(dto.d, terms).map_err(D::Error::custom)
    }
}

/// Sums free coefficients over letter-count classes: the adjoint of
/// [`MultiIndexSeries::free_lift`] and a left inverse of it. An algebra
/// map onto commuting-variable polynomials that preserves values at
/// commuting scalar tuples.
pub fn symmetrize(f: &FreeSeries) -> MultiIndexSeries {
    let d = f.dimension();
    let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    for (w, c) in f.terms() {
        *coeffs.entry(w.letter_count(d)).or_insert(ZERO) += c;
    }
    coeffs.retain(|_, c| *c != ZERO);
    MultiIndexSeries { d, coeffs }
}

/// Multiplication by `f` on the Drury-Arveson space, as an exact block
/// between normalized monomial bases of total degree <= `n` and
/// <= `n + deg f`: the entry at `(k + m, m)` is
/// `f_k · sqrt(w(k + m) / w(m))`.
pub fn da_mult_matrix(f: &MultiIndexSeries, n: usize) -> TruncatedOperator {
    let d = f.dimension();
    let codomain = n + f.degree();
    let rows = enumerate_multi_indices(d, codomain);
    assert!(
        rows.len() <= MAX_DENSE_BASIS,
        "monomial basis of {} indices exceeds the dense cap {MAX_DENSE_BASIS}",
        rows.len()
    );
    let index: BTreeMap<MultiIndex, usize> = rows
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, idx)| (idx, i))
        .collect();
    let cols = enumerate_multi_indices(d, n);
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
    for (j, mu) in cols.iter().enumerate() {
        let w_mu = multinomial_weight(mu);
        for (k, ck) in f.terms() {
            let target = k.plus(mu);
            let i = index[&target];
            let ratio = (multinomial_weight(&target) / w_mu).sqrt();
            m[(i, j)] = ck * Complex64::new(ratio, 0.0);
        }
    }
    TruncatedOperator::new(d, n, codomain, m)
}

/// A commuting-variable factorization, carrying the free pair it was
/// pushed down from.
#[derive(Clone, Debug, Serialize)]
pub struct CommutativePair {
    free_pair: SmirnovPair,
    a: MultiIndexSeries,
    b_list: Vec<MultiIndexSeries>,
    a_inverse: MultiIndexSeries,
    truncation: usize,
    report: VerificationReport,
    da_norm_sq_a_inverse: f64,
    da_norm_sq_budget: f64,
}

impl CommutativePair {
    /// The free factorization behind this one.
    pub fn free_pair(&self) -> &SmirnovPair {
        &self.free_pair
    }

    /// The pushed-down denominator.
    pub fn a(&self) -> &MultiIndexSeries {
        &self.a
    }

    /// The pushed-down numerators.
    pub fn b_list(&self) -> &[MultiIndexSeries] {
        &self.b_list
    }

    /// Pushdown of the free denominator's inverse (truncated).
    pub fn a_inverse(&self) -> &MultiIndexSeries {
        &self.a_inverse
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Residuals of the underlying free factorization.
    pub fn report(&self) -> &VerificationReport {
        &self.report
    }

    /// Squared Drury-Arveson norm of [`CommutativePair::a_inverse`].
    pub fn da_norm_sq_a_inverse(&self) -> f64 {
        self.da_norm_sq_a_inverse
    }

    /// `1 + sum_i ||h_i||^2` in the Drury-Arveson norm; the limit of the
    /// inverse-norm as the truncation degree grows, whenever the free
    /// denominator stays supported on singleton letter-count classes.
    pub fn da_norm_sq_budget(&self) -> f64 {
        self.da_norm_sq_budget
    }
}

/// Factors a column of commuting-variable polynomials: lifts each `h_i`
/// isometrically to a free polynomial, runs the free engine at truncation
/// degree `n`, verifies it (`tol`, `seed`), and pushes denominator,
/// numerators, and inverse back down by symmetrization.
pub fn commutative_smirnov(
    d: usize,
    h_list: &[MultiIndexSeries],
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<CommutativePair> {
    let mut lifted = Vec::with_capacity(h_list.len());
    for h in h_list {
        if h.dimension() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: h.dimension(),
            });
        }
        lifted.push(h.free_lift()?);
    }
    let free_pair = canonical_pair(d, &lifted, n)?;
    let report = verify_pair(&lifted, &free_pair, tol, seed)?;
    let a = symmetrize(free_pair.a());
    let b_list = free_pair.b_list().iter().map(symmetrize).collect();
    let a_inverse = symmetrize(&free_pair.a().invert(n)?);
    let da_norm_sq_a_inverse = a_inverse.da_norm_sq();
    let da_norm_sq_budget = 1.0 + h_list.iter().map(MultiIndexSeries::da_norm_sq).sum::<f64>();
    Ok(CommutativePair {
        free_pair,
        a,
        b_list,
        a_inverse,
        truncation: n,
        report,
        da_norm_sq_a_inverse,
        da_norm_sq_budget,
    })
}
