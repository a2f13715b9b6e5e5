//! Sparse free power series and their evaluation at matrix tuples.
//!
//! A [`FreeSeries`] is a finitely supported coefficient map `word -> C`,
//! i.e. a polynomial (or truncated power series) in d noncommuting
//! indeterminates. Products are Cauchy products over word concatenation;
//! the squared Fock norm is the plain `l^2` sum of the coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::words::Word;
use crate::MAX_SPARSE_SUPPORT;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A finitely supported free power series `sum_a c_a X^a` over `d` letters.
///
/// Kept in canonical sparse form: zero coefficients are dropped and terms
/// iterate in graded-lexicographic word order. All operations return fresh
/// values; a series is never mutated through the public API.
#[derive(Clone, PartialEq)]
pub struct FreeSeries {
    d: usize,
    coeffs: BTreeMap<Word, Complex64>,
}

impl FreeSeries {
    /// The zero series in dimension `d`.
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "the alphabet must have at least one letter");
        FreeSeries {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    /// A constant series.
    pub fn constant(d: usize, value: Complex64) -> Self {
        let mut s = FreeSeries::zero(d);
        if value != ZERO {
            s.coeffs.insert(Word::empty(), value);
        }
        s
    }

    /// The multiplicative unit.
    pub fn one(d: usize) -> Self {
        FreeSeries::constant(d, Complex64::new(1.0, 0.0))
    }

    /// A single term `value · X^letters`. Panics when a letter falls
    /// outside `1..=d`; use [`FreeSeries::from_terms`] for checked input.
    pub fn monomial(d: usize, letters: &[u8], value: Complex64) -> Self {
        let mut s = FreeSeries::zero(d);
        let w = Word::new(letters);
        assert!(
            w.max_letter() as usize <= d,
            "letter outside the alphabet 1..={d}"
        );
        if value != ZERO {
            s.coeffs.insert(w, value);
        }
        s
    }

    /// Builds a series from (word, coefficient) terms, validating letters
    /// against the alphabet. Duplicate words accumulate.
    pub fn from_terms(
        d: usize,
        terms: impl IntoIterator<Item = (Word, Complex64)>,
    ) -> Result<Self> {
        assert!(d >= 1, "the alphabet must have at least one letter");
        let mut coeffs: BTreeMap<Word, Complex64> = BTreeMap::new();
        for (w, c) in terms {
            if w.max_letter() as usize > d {
                return Err(Error::LetterOutOfRange {
                    letter: w.max_letter(),
                    d,
                });
            }
            *coeffs.entry(w).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c| *c != ZERO);
        Ok(FreeSeries { d, coeffs })
    }

    /// Ambient number of letters.
    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Largest word length carrying a nonzero coefficient (0 for the zero
    /// series).
    pub fn degree(&self) -> usize {
        // Graded order: the last key is a longest word.
        self.coeffs.keys().next_back().map(Word::len).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `word` (zero when absent).
    pub fn coeff(&self, word: &Word) -> Complex64 {
        self.coeffs.get(word).copied().unwrap_or(ZERO)
    }

    /// Coefficient of the empty word.
    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&Word::empty())
    }

    /// Terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, Complex64)> + '_ {
        self.coeffs.iter().map(|(w, c)| (w, *c))
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

    /// Coefficientwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dimension(other)?;
        let mut coeffs = self.coeffs.clone();
        for (w, c) in &other.coeffs {
            *coeffs.entry(w.clone()).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c| *c != ZERO);
        Ok(FreeSeries { d: self.d, coeffs })
    }

    /// Coefficientwise difference.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: Complex64) -> Self {
        if factor == ZERO {
            return FreeSeries::zero(self.d);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(w, c)| (w.clone(), c * factor))
            .filter(|(_, c)| *c != ZERO)
            .collect();
        FreeSeries { d: self.d, coeffs }
    }

    /// Drops every term of degree above `max_degree`.
    pub fn truncated(&self, max_degree: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .take_while(|(w, _)| w.len() <= max_degree)
            .map(|(w, c)| (w.clone(), *c))
            .collect();
        FreeSeries { d: self.d, coeffs }
    }

    /// Cauchy product truncated at `max_degree`:
    /// the coefficient of `w` in `self · other` is
    /// `sum_{u v = w} self_u · other_v`.
    pub fn cauchy_product(&self, other: &Self, max_degree: usize) -> Result<Self> {
        self.check_dimension(other)?;
        let mut coeffs: BTreeMap<Word, Complex64> = BTreeMap::new();
        for (u, cu) in &self.coeffs {
            if u.len() > max_degree {
                break;
            }
            for (v, cv) in &other.coeffs {
                if u.len() + v.len() > max_degree {
                    continue;
                }
                *coeffs.entry(u.concat(v)).or_insert(ZERO) += cu * cv;
            }
        }
        coeffs.retain(|_, c| *c != ZERO);
        Ok(FreeSeries { d: self.d, coeffs })
    }

    /// Termwise word reversal. An involutive anti-homomorphism of the
    /// Cauchy algebra that preserves the Fock norm.
    pub fn transposed(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(w, c)| (w.transpose(), *c))
            .collect();
        FreeSeries { d: self.d, coeffs }
    }

    /// Squared Fock-space norm: the `l^2` sum of squared coefficient
    /// moduli.
    pub fn fock_norm_sq(&self) -> f64 {
        self.coeffs.values().map(Complex64::norm_sqr).sum()
    }

    /// Largest absolute coefficient difference against `other`, over the
    /// union of their supports.
    pub fn sup_diff(&self, other: &Self) -> Result<f64> {
        self.check_dimension(other)?;
        let mut m: f64 = 0.0;
        for (w, c) in &self.coeffs {
            m = m.max((c - other.coeff(w)).norm());
        }
        for (w, c) in &other.coeffs {
            m = m.max((c - self.coeff(w)).norm());
        }
        Ok(m)
    }

    /// Multiplicative inverse truncated at `max_degree`, via the graded
    /// recursion
    /// `g_e = 1/c_e`, `g_w = -(1/c_e) · sum_{u v = w, u nonempty} c_u g_v`.
    ///
    /// Requires a nonzero constant term. The recursion runs only over the
    /// multiplicative closure of the nonconstant support, which carries the
    /// entire support of the inverse, so chain-supported series stay sparse
    /// at large truncation degrees.
    pub fn invert(&self, max_degree: usize) -> Result<Self> {
        let c0 = self.constant_term();
        if c0 == ZERO {
            return Err(Error::ZeroConstantTerm);
        }
        let generators: Vec<&Word> = self.coeffs.keys().filter(|w| !w.is_empty()).collect();

        // Words reachable as concatenations of nonconstant support words.
        let mut support: BTreeSet<Word> = BTreeSet::new();
        support.insert(Word::empty());
        let mut frontier = vec![Word::empty()];
        while let Some(w) = frontier.pop() {
            for g in &generators {
                if w.len() + g.len() > max_degree {
                    continue;
                }
                let u = w.concat(g);
                if support.insert(u.clone()) {
                    if support.len() > MAX_SPARSE_SUPPORT {
                        return Err(Error::SupportTooLarge {
                            degree: max_degree,
                            max: MAX_SPARSE_SUPPORT,
                        });
                    }
                    frontier.push(u);
                }
            }
        }

        let inv_c0 = Complex64::new(1.0, 0.0) / c0;
        let mut inv: BTreeMap<Word, Complex64> = BTreeMap::new();
        inv.insert(Word::empty(), inv_c0);
        // Graded iteration: every suffix is shorter, hence already done.
        for w in support.iter().skip(1) {
            let mut s = ZERO;
            for k in 1..=w.len() {
                let cu = self.coeff(&w.prefix(k));
                if cu == ZERO {
                    continue;
                }
                if let Some(gv) = inv.get(&w.suffix_from(k)) {
                    s += cu * gv;
                }
            }
            let val = -inv_c0 * s;
            if val != ZERO {
                inv.insert(w.clone(), val);
            }
        }
        Ok(FreeSeries {
            d: self.d,
            coeffs: inv,
        })
    }

    /// Evaluates the series at a tuple of square matrices, substituting
    /// `X^w -> X_{w_1} · X_{w_2} · …` (empty word -> identity).
    pub fn eval(&self, point: &MatrixTuple) -> Result<DMatrix<Complex64>> {
        if point.dimension() != self.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: point.dimension(),
            });
        }
        let n = point.size();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (w, c) in &self.coeffs {
            let mut m = DMatrix::<Complex64>::identity(n, n);
            for &l in w.letters() {
                m *= point.matrix((l - 1) as usize);
            }
            acc += m * *c;
        }
        Ok(acc)
    }
}

impl fmt::Debug for FreeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeSeries(d = {}", self.d)?;
        for (w, c) in &self.coeffs {
            write!(f, ", {w}: {c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct TermDto {
    word: Vec<u8>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FreeSeriesDto {
    d: usize,
    terms: Vec<TermDto>,
}

impl Serialize for FreeSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = FreeSeriesDto {
            d: self.d,
            terms: self
                .coeffs
                .iter()
                .map(|(w, c)| TermDto {
                    word: w.letters().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FreeSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let dto = FreeSeriesDto::deserialize(deserializer)?;
        if dto.d < 1 {
            return Err(D::Error::custom(
                "the alphabet must have at least one letter",
            ));
        }
        let mut terms = Vec::with_capacity(dto.terms.len());
        for t in dto.terms {
            if let Some(&l) = t.word.iter().find(|&&l| l == 0 || l as usize > dto.d) {
                return Err(D::Error::custom(format!(
                    "letter {l} outside the alphabet 1..={}",
                    dto.d
                )));
            }
            terms.push((Word::new(t.word), Complex64::new(t.re, t.im)));
        }
        FreeSeries::from_terms(dto.d, terms).map_err(D::Error::custom)
    }
}

/// A d-tuple of square complex matrices of one shared size: an evaluation
/// point for free series.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    matrices: Vec<DMatrix<Complex64>>,
}

impl MatrixTuple {
    /// Validates that the tuple is non-empty and its entries are square of
    /// one shared size.
    pub fn new(matrices: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let n = match matrices.first() {
            None => return Err(Error::MatrixShapeMismatch),
            Some(m) => m.nrows(),
        };
        if n == 0 || matrices.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::MatrixShapeMismatch);
        }
        Ok(MatrixTuple { matrices })
    }

    /// A scalar tuple (size-1 matrices).
    pub fn scalars(values: &[Complex64]) -> Self {
        assert!(!values.is_empty(), "a tuple needs at least one entry");
        MatrixTuple {
            matrices: values
                .iter()
                .map(|&v| DMatrix::from_element(1, 1, v))
                .collect(),
        }
    }

    /// The zero tuple of `d` matrices of size `n`.
    pub fn zeros(d: usize, n: usize) -> Self {
        assert!(d >= 1 && n >= 1);
        MatrixTuple {
            matrices: vec![DMatrix::zeros(n, n); d],
        }
    }

    /// Number of matrices in the tuple.
    pub fn dimension(&self) -> usize {
        self.matrices.len()
    }

    /// Shared matrix size.
    pub fn size(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrix(&self, i: usize) -> &DMatrix<Complex64> {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.matrices
    }

    /// Scales every matrix by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        MatrixTuple {
            matrices: self
                .matrices
                .iter()
                .map(|m| m * Complex64::new(factor, 0.0))
                .collect(),
        }
    }

    /// Membership in the open free matrix ball:
    /// returns `(inside, 1 - lambda_max(sum_j X_j X_j^H))`, with `inside`
    /// true exactly when the margin is strictly positive.
    pub fn ball_margin(&self) -> (bool, f64) {
        let n = self.size();
        let mut s = DMatrix::<Complex64>::zeros(n, n);
        for m in &self.matrices {
            s += m * m.adjoint();
        }
        let top = s.symmetric_eigen().eigenvalues.max();
        let margin = 1.0 - top;
        (margin > 0.0, margin)
    }
}

/// Draws a d-tuple of size-n matrices with entries uniform on the complex
/// unit square, rescaled so that `lambda_max(sum_j X_j X_j^H) = 0.81`: a
/// generic point of the matrix ball with comfortable interior margin.
pub(crate) fn random_ball_tuple<R: Rng>(rng: &mut R, d: usize, n: usize) -> MatrixTuple {
    let matrices = (0..d)
        .map(|_| {
            DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        })
        .collect();
    let tuple = MatrixTuple::new(matrices).unwrap();
    let (_, margin) = tuple.ball_margin();
    let top = 1.0 - margin;
    if top <= 0.0 {
        return tuple;
    }
    tuple.scaled((0.81 / top).sqrt())
}
