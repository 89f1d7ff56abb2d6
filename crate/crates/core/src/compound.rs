//! Second compound matrices and Gram matrices of commutators.
//!
//! Rows and columns of both objects are indexed by ordered pairs `(i, j)`,
//! `i < j`, in the same rank order as the standard basis of `o(n)`.

use nalgebra::DMatrix;

use crate::skew::{commutator, coefficients_of, frobenius_inner, pair_count, pairs, standard_basis};
use crate::{Error, Result, SkewMatrix, SkewTuple};

/// `φ(A)`: all 2×2 minors of an `m × n` matrix, a `C(m,2) × C(n,2)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundMatrix {
    pub source_shape: (usize, usize),
    pub entries: DMatrix<f64>,
}

/// `φ(A)_{(i,j),(k,l)} = a_ik a_jl - a_il a_jk`.
pub fn second_compound(a: &DMatrix<f64>) -> Result<CompoundMatrix> {
    let (m, n) = a.shape();
    if m < 2 || n < 2 {
        return Err(Error::invalid(format!(
            "second compound needs at least 2x2, got {m}x{n}"
        )));
    }
    let rows: Vec<_> = pairs(m).collect();
    let cols: Vec<_> = pairs(n).collect();
    let entries = DMatrix::from_fn(rows.len(), cols.len(), |x, y| {
        let (i, j) = (rows[x].i - 1, rows[x].j - 1);
        let (k, l) = (cols[y].i - 1, cols[y].j - 1);
        a[(i, k)] * a[(j, l)] - a[(i, l)] * a[(j, k)]
    });
    Ok(CompoundMatrix {
        source_shape: (m, n),
        entries,
    })
}

/// Symmetric matrix of `⟨[B_r, B_s], [B_u, B_v]⟩` over ordered pairs `r < s`, `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorGram {
    pub entries: DMatrix<f64>,
}

impl CommutatorGram {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn gram_of_commutators(ms: &[SkewMatrix]) -> Result<CommutatorGram> {
    if let Some(first) = ms.first() {
        if ms.iter().any(|b| b.dim() != first.dim()) {
            return Err(Error::invalid("gram_of_commutators: dimension mismatch"));
        }
    }
    let k = pair_count(ms.len());
    if k == 0 {
        return Ok(CommutatorGram {
            entries: DMatrix::zeros(0, 0),
        });
    }
    let comms = pairs(ms.len())
        .map(|p| commutator(&ms[p.i - 1], &ms[p.j - 1]))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = DMatrix::zeros(k, k);
    for x in 0..k {
        for y in x..k {
            let v = frobenius_inner(&comms[x], &comms[y])?;
            entries[(x, y)] = v;
            entries[(y, x)] = v;
        }
    }
    Ok(CommutatorGram { entries })
}

/// `C(Ẽ)` for the ordered standard basis of `o(n)`.
pub fn standard_gram(n: usize) -> Result<CommutatorGram> {
    gram_of_commutators(&standard_basis(n)?)
}

/// `2 Tr(φ(BBᵗ) C(Ẽ))` with `B` the coefficient matrix of `t`.
///
/// Equals `Σ_{r,s} ‖[B_r, B_s]‖²`; returns 0 when `o(n)` has fewer than two basis elements.
pub fn lhs_via_trace(t: &SkewTuple) -> Result<f64> {
    let n = t.dim();
    if pair_count(n) < 2 {
        return Ok(0.0);
    }
    let b = coefficients_of(t);
    let phi = second_compound(&(&b * b.transpose()))?;
    let gram = standard_gram(n)?;
    Ok(2.0 * phi.entries.component_mul(&gram.entries).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::so3_triple;
    use crate::random::{gaussian_matrix, random_orthogonal, random_tuple, trial_rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_and_determinant() {
        let phi = second_compound(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(phi.entries, DMatrix::identity(3, 3));
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 3.0, 5.0, 7.0]);
        let phi = second_compound(&a).unwrap();
        assert_eq!(phi.entries.shape(), (1, 1));
        assert_eq!(phi.entries[(0, 0)], 2.0 * 7.0 - 3.0 * 5.0);
        assert!(second_compound(&DMatrix::zeros(1, 4)).is_err());
    }

    #[test]
    fn homomorphism_and_transpose() {
        let mut rng = trial_rng(3, 0);
        let a = gaussian_matrix(3, 4, &mut rng);
        let b = gaussian_matrix(4, 3, &mut rng);
        let lhs = second_compound(&(&a * &b)).unwrap().entries;
        let rhs = second_compound(&a).unwrap().entries * second_compound(&b).unwrap().entries;
        assert!((lhs - rhs).norm() < 1e-10);
        let at = second_compound(&a.transpose()).unwrap().entries;
        assert!((at - second_compound(&a).unwrap().entries.transpose()).amax() < 1e-12);
    }

    #[test]
    fn gram_examples() {
        let g = standard_gram(3).unwrap();
        assert!((g.entries - DMatrix::identity(3, 3) * 0.5).amax() < 1e-15);
        let single = gram_of_commutators(&standard_basis(3).unwrap()[..1]).unwrap();
        assert_eq!(single.dim(), 0);
        let c = gram_of_commutators(so3_triple(1.0).members()).unwrap();
        assert!((c.entries - DMatrix::identity(3, 3) * 2.0).amax() < 1e-14);
        let mixed = [SkewMatrix::zeros(3).unwrap(), SkewMatrix::zeros(4).unwrap()];
        assert!(gram_of_commutators(&mixed).is_err());
    }

    #[test]
    fn trace_examples() {
        let e = standard_basis(4).unwrap();
        let single = SkewTuple::new(vec![e[0].clone()]).unwrap();
        assert_eq!(lhs_via_trace(&single).unwrap(), 0.0);
        assert_abs_diff_eq!(lhs_via_trace(&so3_triple(1.0)).unwrap(), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn gram_transformation_law() {
        // C(B) = φ(Bᵗ) C(Ẽ) φ(B)
        for n in 3..=5 {
            let t = random_tuple(n, 4, &mut trial_rng(9, n as u64));
            let b = coefficients_of(&t);
            let direct = gram_of_commutators(t.members()).unwrap().entries;
            let pb = second_compound(&b).unwrap().entries;
            let via = pb.transpose() * standard_gram(n).unwrap().entries * &pb;
            assert!((&direct - via).norm() < 1e-8 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn diagonalised_reduction() {
        // with BBᵗ = Q diag(x) Qᵗ: 2 Tr φ(diag x) C(Q) = Σ x_α x_β ‖[Q̃_α, Q̃_β]‖²
        let n = 4;
        let big_n = pair_count(n);
        let mut rng = trial_rng(10, 0);
        let q = random_orthogonal(big_n, &mut rng);
        let x: Vec<f64> = (0..big_n).map(|k| (k as f64 + 1.0) / 7.0).collect();
        let basis: Vec<SkewMatrix> = (0..big_n)
            .map(|a| SkewMatrix::from_basis_coefficients(n, q.column(a).as_slice()).unwrap())
            .collect();
        let cq = gram_of_commutators(&basis).unwrap().entries;
        let phi = second_compound(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(x.clone()))).unwrap();
        let lhs = 2.0 * (phi.entries * cq).trace();
        let mut rhs = 0.0;
        for a in 0..big_n {
            for b in 0..big_n {
                rhs += x[a] * x[b] * crate::skew::commutator_norm_sq(&basis[a], &basis[b]).unwrap();
            }
        }
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-8 * rhs.abs().max(1.0));
    }
}
