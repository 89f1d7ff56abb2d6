//! Fixed normal forms: the extremal triples and padded variants.

use nalgebra::DMatrix;

use crate::skew::{SkewMatrix, SkewTuple};
use crate::{Error, Result};

/// Which extremal triple a configuration is equivalent to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// `λ(E₁₂ - E₂₁), λ(E₁₃ - E₃₁), λ(E₂₃ - E₃₂)` in `o(3)`.
    So3,
    /// The quaternion triple in the leading 4×4 block of `o(n)`, `n ≥ 4`.
    Quaternion,
}

impl FormKind {
    pub fn for_dim(n: usize) -> FormKind {
        if n == 3 {
            FormKind::So3
        } else {
            FormKind::Quaternion
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            FormKind::So3 => "C",
            FormKind::Quaternion => "D",
        }
    }
}

fn from_upper(n: usize, entries: &[(usize, usize, f64)]) -> SkewMatrix {
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, v) in entries {
        m[(i - 1, j - 1)] = v;
        m[(j - 1, i - 1)] = -v;
    }
    SkewMatrix::antisymmetrize(m)
}

/// The `k`-th member (`k ∈ {1,2,3}`) of the `so(3)` triple with parameter `λ`.
pub fn so3_member(k: usize, lambda: f64) -> SkewMatrix {
    match k {
        1 => from_upper(3, &[(1, 2, lambda)]),
        2 => from_upper(3, &[(1, 3, lambda)]),
        3 => from_upper(3, &[(2, 3, lambda)]),
        _ => panic!("so(3) triple has members 1..=3, got {k}"),
    }
}

pub fn so3_triple(lambda: f64) -> SkewTuple {
    SkewTuple::new((1..=3).map(|k| so3_member(k, lambda)).collect()).expect("three 3x3 members")
}

/// The `k`-th quaternion member embedded as `diag(D_k, 0)` in `o(n)`.
pub fn quaternion_member(k: usize, lambda: f64, n: usize) -> Result<SkewMatrix> {
    if n < 4 {
        return Err(Error::invalid("quaternion forms need n >= 4"));
    }
    let l = lambda;
    Ok(match k {
        1 => from_upper(n, &[(1, 2, l), (3, 4, l)]),
        2 => from_upper(n, &[(1, 3, l), (2, 4, -l)]),
        3 => from_upper(n, &[(1, 4, l), (2, 3, l)]),
        _ => return Err(Error::invalid(format!("quaternion triple has members 1..=3, got {k}"))),
    })
}

pub fn quaternion_triple(lambda: f64, n: usize) -> Result<SkewTuple> {
    SkewTuple::new(
        (1..=3)
            .map(|k| quaternion_member(k, lambda, n))
            .collect::<Result<_>>()?,
    )
}

/// The extremal triple of the given kind, padded with zero members up to `m`.
pub fn extremal_tuple(kind: FormKind, lambda: f64, n: usize, m: usize) -> Result<SkewTuple> {
    if m < 3 {
        return Err(Error::invalid("extremal tuples have three nonzero members"));
    }
    let triple = match kind {
        FormKind::So3 if n == 3 => so3_triple(lambda),
        FormKind::So3 => return Err(Error::invalid("the so(3) triple lives in n = 3")),
        FormKind::Quaternion => quaternion_triple(lambda, n)?,
    };
    pad_with_zeros(&triple, m)
}

pub fn pad_with_zeros(t: &SkewTuple, m: usize) -> Result<SkewTuple> {
    if m < t.len() {
        return Err(Error::invalid("cannot pad to fewer members"));
    }
    let mut members = t.members().to_vec();
    members.extend((t.len()..m).map(|_| SkewMatrix::zeros(t.dim()).expect("n >= 2")));
    SkewTuple::new(members)
}

/// `diag([[0,λ₁],[-λ₁,0]], …, [0])` of order `n`.
pub fn block_diagonal(lambdas: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (k, &l) in lambdas.iter().enumerate().take(n / 2) {
        m[(2 * k, 2 * k + 1)] = l;
        m[(2 * k + 1, 2 * k)] = -l;
    }
    m
}
