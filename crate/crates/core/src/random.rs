//! Seeded sampling of skew matrices, tuples and orthogonal matrices.
//!
//! Every sampler takes the generator explicitly. [`trial_rng`] derives an
//! independent stream per trial from a root seed so that parallel loops stay
//! reproducible regardless of scheduling.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::skew::{SkewMatrix, SkewTuple};

/// Generator for trial `index` under `seed`; distinct indices give distinct streams.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Independent standard normal upper-triangular entries.
pub fn random_skew<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SkewMatrix {
    let mut m = DMatrix::zeros(n, n);
    for j in 1..n {
        for i in 0..j {
            let v: f64 = rng.sample(StandardNormal);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    SkewMatrix::antisymmetrize(m)
}

pub fn random_tuple<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> SkewTuple {
    SkewTuple::new((0..m).map(|_| random_skew(n, rng)).collect()).expect("m >= 1 members of order n")
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `diag(R)` folded into `Q`.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian_matrix(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        if r[(k, k)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// Uniform point on the probability simplex of dimension `len`.
pub fn random_simplex_point<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}
