//! Shared input builders for the benchmark suite.

use fock_smirnov::{Complex64, FreeSeries, MultiIndexSeries};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The two-letter polynomial `X1 + X1 X2`, whose graph representer is
/// supported on an infinite chain of words.
pub fn chain_polynomial() -> FreeSeries {
    FreeSeries::monomial(2, &[1], Complex64::new(1.0, 0.0))
        .add(&FreeSeries::monomial(2, &[1, 2], Complex64::new(1.0, 0.0)))
        .unwrap()
}

/// The planar polynomial `z1 + z1 z2` whose free lift drives the
/// commutative pipeline.
pub fn planar_polynomial() -> MultiIndexSeries {
    MultiIndexSeries::monomial(2, &[1, 0], Complex64::new(1.0, 0.0))
        .add(&MultiIndexSeries::monomial(
            2,
            &[1, 1],
            Complex64::new(1.0, 0.0),
        ))
        .unwrap()
}

/// A reproducible dense-ish free polynomial for arithmetic benchmarks.
pub fn random_series(seed: u64, d: usize, degree: usize, terms: usize) -> FreeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letter = Uniform::new_inclusive(1, d as u8);
    let length = Uniform::new_inclusive(0, degree);
    let value = Uniform::new(-1.0f64, 1.0);
    let mut out = FreeSeries::zero(d);
    for _ in 0..terms {
        let len = length.sample(&mut rng);
        let word: Vec<u8> = (0..len).map(|_| letter.sample(&mut rng)).collect();
        let coeff = Complex64::new(value.sample(&mut rng), value.sample(&mut rng));
        out = out.add(&FreeSeries::monomial(d, &word, coeff)).unwrap();
    }
    out
}

/// Reproducible points strictly inside the unit ball of C^d.
pub fn ball_points(seed: u64, d: usize, count: usize) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = Uniform::new(-1.0f64, 1.0);
    (0..count)
        .map(|_| {
            let raw: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(value.sample(&mut rng), value.sample(&mut rng)))
                .collect();
            let norm_sq: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
            let scale = if norm_sq > 0.0 {
                0.9 / norm_sq.sqrt()
            } else {
                0.0
            };
            raw.into_iter().map(|z| z * scale).collect()
        })
        .collect()
}
