//! The commutator bound for tuples, its equality configurations, and the
//! simplex quadratic form attached to an orthonormal basis of `o(n)`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::canonical::{canonical_form, orthogonal_factor};
use crate::forms::{extremal_tuple, quaternion_member, FormKind};
use crate::random::{random_tuple, trial_rng};
use crate::skew::{
    apply_k_action, coefficients_of, commutator_norm_sq, frobenius_inner, is_orthogonal, pair_count,
    ORTHOGONALITY_TOLERANCE,
};
use crate::{Error, Result, SkewMatrix, SkewTuple};

/// Relative tolerance of the equality flag.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;
/// Accepted normal-form residual of [`equality_canonicalize`], relative to the tuple norm.
pub const NORMAL_FORM_TOLERANCE: f64 = 1e-6;

/// `d(3) = 1/3`, `d(n ≥ 4) = 2/3`.
pub fn bound_constant(n: usize) -> Result<f64> {
    match n {
        0..=2 => Err(Error::UnsupportedDimension {
            n,
            reason: "all commutators vanish for n = 2; the bound is stated for n >= 3",
        }),
        3 => Ok(1.0 / 3.0),
        _ => Ok(2.0 / 3.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `Σ_{r,s} ‖[B_r, B_s]‖²`
    pub lhs: f64,
    /// `d(n) (Σ_r ‖B_r‖²)²`
    pub rhs: f64,
    /// `lhs / (Σ_r ‖B_r‖²)²`, 0 for the zero tuple.
    pub ratio: f64,
    pub d: f64,
    pub equality: bool,
}

/// Evaluates both sides of the bound. The zero tuple reports ratio 0 and no equality.
pub fn commutator_bound_report(t: &SkewTuple) -> Result<BoundReport> {
    let d = bound_constant(t.dim())?;
    let norm_sq = t.norm_sq_sum();
    let lhs = t.commutator_sum();
    let denom = norm_sq * norm_sq;
    let rhs = d * denom;
    let ratio = if denom > 0.0 { lhs / denom } else { 0.0 };
    Ok(BoundReport {
        lhs,
        rhs,
        ratio,
        d,
        equality: norm_sq > 0.0 && rhs - lhs <= EQUALITY_TOLERANCE * rhs.max(1.0),
    })
}

/// Reports for `trials` tuples with independent standard normal entries; trial
/// `k` draws from `trial_rng(seed, k)`, so results do not depend on scheduling.
pub fn sample_reports(n: usize, m: usize, trials: usize, seed: u64) -> Result<Vec<BoundReport>> {
    bound_constant(n)?;
    if m == 0 {
        return Err(Error::invalid("need at least one member"));
    }
    (0..trials)
        .into_par_iter()
        .map(|k| commutator_bound_report(&random_tuple(n, m, &mut trial_rng(seed, k as u64))))
        .collect()
}

/// `(P, R)` moving an equality tuple onto the extremal triple with parameter `lambda`,
/// padded with zero members.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityForm {
    pub p: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub lambda: f64,
    pub kind: FormKind,
    /// `‖(P,R)·t - normal form‖ / ‖t‖`.
    pub residual: f64,
}

/// Recovers the `O(n) × O(m)` element bringing an equality tuple to normal form.
///
/// Returns `None` when the tuple is not an equality configuration or the
/// reconstruction does not reach [`NORMAL_FORM_TOLERANCE`].
pub fn equality_canonicalize(t: &SkewTuple) -> Result<Option<EqualityForm>> {
    let report = commutator_bound_report(t)?;
    if !report.equality || t.len() < 3 {
        return Ok(None);
    }
    let n = t.dim();
    let m = t.len();
    let kind = FormKind::for_dim(n);

    // P moves the span of the members onto the span of the extremal triple, and
    // `coeffs` (3 × m) are the members' coordinates in that triple at λ = 1
    let (p, coeffs) = match kind {
        FormKind::So3 => {
            // C_k(1) = √2 Ẽ_k in rank order
            let b = coefficients_of(t) / std::f64::consts::SQRT_2;
            (DMatrix::identity(3, 3), b)
        }
        FormKind::Quaternion => {
            let lead = t
                .members()
                .iter()
                .max_by(|x, y| x.norm_sq().total_cmp(&y.norm_sq()))
                .expect("nonempty tuple");
            let p = canonical_form(lead)?.p;
            let units = (1..=3)
                .map(|k| quaternion_member(k, 1.0, n))
                .collect::<Result<Vec<_>>>()?;
            let mut c = DMatrix::zeros(3, m);
            for (s, b) in t.members().iter().enumerate() {
                let pb = b.conjugate(&p)?;
                for (k, u) in units.iter().enumerate() {
                    c[(k, s)] = frobenius_inner(&pb, u)? / u.norm_sq();
                }
            }
            (p, c)
        }
    };

    let lambda = (coeffs.norm_squared() / 3.0).sqrt();
    let mut target = DMatrix::zeros(3, m);
    for k in 0..3 {
        target[(k, k)] = lambda;
    }
    let Some(r) = orthogonal_factor(&target, &coeffs) else {
        return Ok(None);
    };
    if !is_orthogonal(&r, ORTHOGONALITY_TOLERANCE) {
        return Ok(None);
    }
    let moved = apply_k_action(&p, &r, t)?;
    let normal = extremal_tuple(kind, lambda, n, m)?;
    let residual = moved.distance(&normal)? / t.norm_sq_sum().sqrt();
    if residual >= NORMAL_FORM_TOLERANCE {
        return Ok(None);
    }
    Ok(Some(EqualityForm {
        p,
        r,
        lambda,
        kind,
        residual,
    }))
}

fn check_basis_matrix(n: usize, q: &DMatrix<f64>) -> Result<()> {
    let big_n = pair_count(n);
    if n < 2 || q.shape() != (big_n, big_n) {
        return Err(Error::invalid(format!(
            "expected an orthogonal {big_n}x{big_n} matrix for n = {n}, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    if !is_orthogonal(q, ORTHOGONALITY_TOLERANCE) {
        return Err(Error::invalid("basis matrix is not orthogonal"));
    }
    Ok(())
}

/// `Q̃_α = Σ_β q_βα Ẽ_β`: the columns of `Q` read as coordinates in the standard basis.
pub fn basis_from_orthogonal(n: usize, q: &DMatrix<f64>) -> Result<Vec<SkewMatrix>> {
    check_basis_matrix(n, q)?;
    (0..q.ncols())
        .map(|a| SkewMatrix::from_basis_coefficients(n, q.column(a).as_slice()))
        .collect()
}

/// `f(x) = xᵗ M x - d (Σ x)²` with `M_αβ = ‖[Q̃_α, Q̃_β]‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexQuadratic {
    pub n: usize,
    pub q: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub d: f64,
}

pub fn simplex_quadratic(n: usize, q: &DMatrix<f64>) -> Result<SimplexQuadratic> {
    let d = bound_constant(n)?;
    let basis = basis_from_orthogonal(n, q)?;
    let big_n = basis.len();
    let mut m = DMatrix::zeros(big_n, big_n);
    for a in 0..big_n {
        for b in a + 1..big_n {
            let v = commutator_norm_sq(&basis[a], &basis[b])?;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(SimplexQuadratic {
        n,
        q: q.clone(),
        m,
        d,
    })
}

impl SimplexQuadratic {
    pub fn len(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::invalid(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.len()
            )));
        }
        if x.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::invalid("point must be componentwise nonnegative"));
        }
        Ok(())
    }

    /// `xᵗ M x` without validation.
    pub(crate) fn quadratic(&self, x: &[f64]) -> f64 {
        let k = self.len();
        let mut total = 0.0;
        for a in 0..k {
            let mut row = 0.0;
            for b in 0..k {
                row += self.m[(a, b)] * x[b];
            }
            total += x[a] * row;
        }
        total
    }

    /// `f(x) = xᵗ M x - d (Σ x)²` for `x ≥ 0`.
    pub fn deficit(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let s: f64 = x.iter().sum();
        Ok(self.quadratic(x) - self.d * s * s)
    }

    fn check_index(&self, alpha: usize) -> Result<usize> {
        if alpha == 0 || alpha > self.len() {
            return Err(Error::invalid(format!(
                "index {alpha} outside 1..={}",
                self.len()
            )));
        }
        Ok(alpha - 1)
    }

    /// `Σ_β M_αβ` for a 1-based `alpha`; always `n - 2`.
    pub fn row_sum(&self, alpha: usize) -> Result<f64> {
        let a = self.check_index(alpha)?;
        Ok(self.m.row(a).sum())
    }

    /// `Σ_{β ∈ J} (M_αβ - 2/3)` for 1-based indices; at most `2/3`.
    pub fn excess_row_sum(&self, alpha: usize, subset: &[usize]) -> Result<f64> {
        let a = self.check_index(alpha)?;
        let mut total = 0.0;
        for &beta in subset {
            let b = self.check_index(beta)?;
            total += self.m[(a, b)] - 2.0 / 3.0;
        }
        Ok(total)
    }
}
