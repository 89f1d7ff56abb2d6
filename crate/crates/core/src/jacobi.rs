//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by descending eigenvalue; eigenvectors are the columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Diagonalises the symmetric part of `a`.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls below
/// `rel_tol · max(scale, ‖a‖_F)`; pass `scale = 0` to use the matrix norm alone.
pub fn symmetric_eigen(a: &DMatrix<f64>, rel_tol: f64, scale: f64) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::invalid("eigensolver needs a square matrix"));
    }
    let n = a.nrows();
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = rel_tol * scale.max(m.norm());

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > threshold {
        return Err(Error::NumericFailure(format!(
            "Jacobi did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their column order
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| m[(k, k)]));
    let vectors = DMatrix::from_fn(n, n, |i, c| v[(i, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.nrows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, trial_rng};

    #[test]
    fn matches_reference_solver() {
        for n in 1..=12 {
            let g = gaussian_matrix(n, n, &mut trial_rng(11, n as u64));
            let a = &g + g.transpose();
            let ours = symmetric_eigen(&a, 1e-14, 0.0).unwrap();
            let mut reference: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in ours.values.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12 * a.norm().max(1.0), "{x} vs {y}");
            }
            let recon = &ours.vectors * DMatrix::from_diagonal(&ours.values) * ours.vectors.transpose();
            assert!((recon - &a).amax() < 1e-12 * a.norm().max(1.0));
            let gram = ours.vectors.transpose() * &ours.vectors;
            assert!((gram - DMatrix::identity(n, n)).amax() < 1e-13);
        }
    }

    #[test]
    fn zero_and_identity_keep_standard_vectors() {
        let z = symmetric_eigen(&DMatrix::zeros(3, 3), 1e-14, 0.0).unwrap();
        assert_eq!(z.vectors, DMatrix::identity(3, 3));
        let i = symmetric_eigen(&(DMatrix::identity(4, 4) * 2.0), 1e-14, 0.0).unwrap();
        assert_eq!(i.vectors, DMatrix::identity(4, 4));
    }
}
