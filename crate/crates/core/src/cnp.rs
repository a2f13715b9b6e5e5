//! Finite point samples of the unit ball, their Pick kernels, and
//! finite-sample restriction checks for factorizations.
//!
//! A [`CnpSample`] is a labeled list of points in the open unit ball of
//! `C^d`. Its kernel matrix `K[i][j] = 1 / (1 - <u_i, u_j>)` is the Gram
//! matrix of the sampled reproducing kernel; it is positive semidefinite
//! for every choice of points. [`restrict_smirnov`] factors a
//! commuting-variable column and then checks, on the sample only, that
//! the denominator stays away from zero and the factorization identity
//! holds pointwise — hence every verdict it returns is tagged
//! "finite-sample" rather than claiming anything off the sampled set.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::commutative::{commutative_smirnov, MultiIndexSeries};
use crate::error::{Error, Result};

/// A labeled finite subset of the open unit ball of `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CnpSample {
    d: usize,
    labels: Vec<String>,
    points: Vec<Vec<Complex64>>,
}

impl CnpSample {
    /// Builds a sample with default labels `p0, p1, …`.
    ///
    /// Every point must have `d` coordinates and lie strictly inside the
    /// unit ball.
    pub fn new(d: usize, points: Vec<Vec<Complex64>>) -> Result<Self> {
        let labels = (0..points.len()).map(|i| format!("p{i}")).collect();
        CnpSample::with_labels(d, labels, points)
    }

    /// Builds a sample with caller-provided labels (one per point).
    pub fn with_labels(d: usize, labels: Vec<String>, points: Vec<Vec<Complex64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if labels.len() != points.len() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: points.len(),
            });
        }
        for u in &points {
            if u.len() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: u.len(),
                });
            }
            let norm_sq: f64 = u.iter().map(Complex64::norm_sqr).sum();
            // Negated so that a NaN norm is rejected too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(norm_sq < 1.0) {
                return Err(Error::PointOutsideBall { norm_sq });
            }
        }
        Ok(CnpSample { d, labels, points })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.points[i]
    }

    /// The sampled kernel matrix `K[i][j] = 1 / (1 - <u_i, u_j>)` with
    /// `<u, v> = sum_k u_k conj(v_k)`. Hermitian, and positive
    /// semidefinite for points of the open ball.
    pub fn kernel_matrix(&self) -> DMatrix<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        DMatrix::from_fn(self.points.len(), self.points.len(), |i, j| {
            let inner: Complex64 = self.points[i]
                .iter()
                .zip(&self.points[j])
                .map(|(u, v)| u * v.conj())
                .sum();
            one / (one - inner)
        })
    }

    /// Smallest eigenvalue of the sampled kernel matrix.
    pub fn min_kernel_eigenvalue(&self) -> f64 {
        self.kernel_matrix().symmetric_eigen().eigenvalues.min()
    }
}

#[derive(Serialize, Deserialize)]
struct CnpPointDto {
    #[serde(default)]
    label: Option<String>,
    u: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CnpSampleDto {
    d: usize,
    points: Vec<CnpPointDto>,
}

impl Serialize for CnpSample {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = CnpSampleDto {
            d: self.d,
            points: self
                .labels
                .iter()
                .zip(&self.points)
                .map(|(label, u)| CnpPointDto {
                    label: Some(label.clone()),
                    u: u.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CnpSample {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let dto = CnpSampleDto::deserialize(deserializer)?;
        let mut labels = Vec::with_capacity(dto.points.len());
        let mut points = Vec::with_capacity(dto.points.len());
        for (i, p) in dto.points.into_iter().enumerate() {
            labels.push(p.label.unwrap_or_else(|| format!("p{i}")));
            points.push(
                p.u.into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect(),
            );
        }
        CnpSample::with_labels(dto.d, labels, points).map_err(D::Error::custom)
    }
}

/// Evaluates the denominator on the sample: returns
/// `(nonvanishing, min_i |a(u_i)|)`, where the boolean only certifies the
/// sampled points.
pub fn outer_restriction_check(a: &MultiIndexSeries, sample: &CnpSample) -> Result<(bool, f64)> {
    if a.dimension() != sample.dimension() {
        return Err(Error::DimensionMismatch {
            left: a.dimension(),
            right: sample.dimension(),
        });
    }
    let mut margin = f64::INFINITY;
    for u in sample.points() {
        margin = margin.min(a.eval(u)?.norm());
    }
    Ok((margin > 0.0, margin))
}

/// Outcome of restricting a factorization to a point sample. All verdicts
/// are finite-sample: they certify the sampled points and nothing else.
#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    /// Largest `|h_i(u) a(u) - b_i(u)|` over the sample.
    pub max_factorization_residual: f64,
    /// Smallest `|a(u)|` over the sample.
    pub denominator_margin: f64,
    /// Whether the denominator margin is strictly positive.
    pub denominator_nonvanishing: bool,
    /// Truncation degree of the underlying factorization.
    pub truncation: usize,
    /// Scope of the verdicts; always `"finite-sample"`.
    pub criterion: String,
}

/// Factors `h_1, …, h_k` with [`commutative_smirnov`] and checks the
/// result on the sampled points: the factorization identity
/// `h_i(u) a(u) = b_i(u)` and the nonvanishing of the denominator.
pub fn restrict_smirnov(
    d: usize,
    h_list: &[MultiIndexSeries],
    sample: &CnpSample,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<RestrictionReport> {
    if sample.dimension() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: sample.dimension(),
        });
    }
    let pair = commutative_smirnov(d, h_list, n, tol, seed)?;
    let mut max_residual = 0.0f64;
    let mut margin = f64::INFINITY;
    for u in sample.points() {
        let a_u = pair.a().eval(u)?;
        margin = margin.min(a_u.norm());
        for (h, b) in h_list.iter().zip(pair.b_list()) {
            let residual = (h.eval(u)? * a_u - b.eval(u)?).norm();
            max_residual = max_residual.max(residual);
        }
    }
    Ok(RestrictionReport {
        max_factorization_residual: max_residual,
        denominator_margin: margin,
        denominator_nonvanishing: margin > 0.0,
        truncation: n,
        criterion: "finite-sample".to_string(),
    })
}
