//! Dense skew-symmetric matrices, tuples of them, the ordered standard basis of
//! `o(n)` and the `O(n) × O(m)` action on tuples.
//!
//! Pair indices `(i, j)` with `1 ≤ i < j ≤ n` are 1-based and ranked by the
//! lexicographic order `(i, j) < (k, l)` iff `i < k`, or `i = k` and `j < l`.
//! Ranks run over `1..=N` with `N = n(n-1)/2`. Matrix entries themselves are
//! addressed through [`nalgebra`] and are 0-based.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Largest tolerated `|a_ij + a_ji|`, relative to `max(1, max |a_ij|)`.
pub const SKEW_TOLERANCE: f64 = 1e-12;

/// Largest tolerated entry of `QQᵗ - I` for matrices treated as orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Number of index pairs `N = n(n-1)/2`.
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// An index pair `(i, j)`, `1 ≤ i < j ≤ n`, together with its rank in `1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
    pub rank: usize,
}

impl PairIndex {
    pub fn new(n: usize, i: usize, j: usize) -> Result<Self> {
        Ok(PairIndex {
            i,
            j,
            rank: pair_rank(n, i, j)?,
        })
    }

    /// True when the two pairs share exactly one index.
    pub fn shares_one_index(&self, other: &PairIndex) -> bool {
        let shared = [self.i == other.i, self.i == other.j, self.j == other.i, self.j == other.j]
            .iter()
            .filter(|&&b| b)
            .count();
        shared == 1
    }
}

impl fmt::Display for PairIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Rank of `(i, j)` in `1..=N`.
pub fn pair_rank(n: usize, i: usize, j: usize) -> Result<usize> {
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::invalid(format!(
            "pair ({i},{j}) is not in 1 <= i < j <= {n}"
        )));
    }
    // pairs with first index below i: sum_{k<i} (n - k)
    Ok((i - 1) * (2 * n - i) / 2 + (j - i))
}

/// Inverse of [`pair_rank`].
pub fn rank_pair(n: usize, rank: usize) -> Result<PairIndex> {
    let total = pair_count(n);
    if rank == 0 || rank > total {
        return Err(Error::invalid(format!(
            "rank {rank} outside 1..={total} for n = {n}"
        )));
    }
    let mut remaining = rank;
    for i in 1..n {
        let row = n - i;
        if remaining <= row {
            return Ok(PairIndex {
                i,
                j: i + remaining,
                rank,
            });
        }
        remaining -= row;
    }
    unreachable!("rank was range checked")
}

/// All pairs of `1..=n` in rank order.
pub fn pairs(n: usize) -> impl Iterator<Item = PairIndex> {
    (1..n).flat_map(move |i| {
        (i + 1..=n).map(move |j| PairIndex {
            i,
            j,
            rank: (i - 1) * (2 * n - i) / 2 + (j - i),
        })
    })
}

/// A real skew-symmetric `n × n` matrix, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    data: DMatrix<f64>,
}

impl SkewMatrix {
    /// Validates skew symmetry within [`SKEW_TOLERANCE`] and stores `(A - Aᵗ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() < 2 {
            return Err(Error::invalid("skew matrices need n >= 2"));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let defect = skew_defect(&m);
        let scale = m.amax().max(1.0);
        if defect > SKEW_TOLERANCE * scale {
            return Err(Error::invalid(format!(
                "skew defect {defect:e} exceeds tolerance"
            )));
        }
        Ok(Self::antisymmetrize(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows are not all of length n"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("skew matrices need n >= 2"));
        }
        Ok(SkewMatrix {
            data: DMatrix::zeros(n, n),
        })
    }

    /// `(A - Aᵗ)/2` without any tolerance check.
    pub(crate) fn antisymmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SkewMatrix {
            data: (m - t) * 0.5,
        }
    }

    /// The unit basis element `Ẽ_ij = (E_ij - E_ji)/√2`.
    pub fn basis_element(n: usize, p: PairIndex) -> Result<Self> {
        pair_rank(n, p.i, p.j)?;
        let mut data = DMatrix::zeros(n, n);
        data[(p.i - 1, p.j - 1)] = FRAC_1_SQRT_2;
        data[(p.j - 1, p.i - 1)] = -FRAC_1_SQRT_2;
        Ok(SkewMatrix { data })
    }

    /// `Σ_α c_α Ẽ_α` for coefficients in rank order.
    pub fn from_basis_coefficients(n: usize, coeffs: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("skew matrices need n >= 2"));
        }
        if coeffs.len() != pair_count(n) {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                pair_count(n),
                coeffs.len()
            )));
        }
        let mut data = DMatrix::zeros(n, n);
        for (p, c) in pairs(n).zip(coeffs) {
            data[(p.i - 1, p.j - 1)] = c * FRAC_1_SQRT_2;
            data[(p.j - 1, p.i - 1)] = -c * FRAC_1_SQRT_2;
        }
        Ok(SkewMatrix { data })
    }

    /// Coefficients in the ordered standard basis.
    pub fn basis_coefficients(&self) -> Vec<f64> {
        pairs(self.dim())
            .map(|p| std::f64::consts::SQRT_2 * self.data[(p.i - 1, p.j - 1)])
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn scale(&self, s: f64) -> SkewMatrix {
        SkewMatrix {
            data: &self.data * s,
        }
    }

    pub fn add(&self, other: &SkewMatrix) -> Result<SkewMatrix> {
        check_same_dim(self, other)?;
        Ok(SkewMatrix {
            data: &self.data + &other.data,
        })
    }

    /// `P A Pᵗ` for an arbitrary square `P` of the same order.
    pub fn conjugate(&self, p: &DMatrix<f64>) -> Result<SkewMatrix> {
        if p.nrows() != self.dim() || p.ncols() != self.dim() {
            return Err(Error::invalid("conjugating matrix has the wrong shape"));
        }
        Ok(Self::antisymmetrize(p * &self.data * p.transpose()))
    }
}

/// Largest `|a_ij + a_ji|`.
pub fn skew_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    worst
}

fn check_same_dim(a: &SkewMatrix, b: &SkewMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `AB - BA`.
pub fn commutator(a: &SkewMatrix, b: &SkewMatrix) -> Result<SkewMatrix> {
    check_same_dim(a, b)?;
    // for skew A, B: BA = (AB)ᵗ
    let ab = &a.data * &b.data;
    let ba = ab.transpose();
    Ok(SkewMatrix { data: ab - ba })
}

/// `Σ_ij A_ij B_ij`.
pub fn frobenius_inner(a: &SkewMatrix, b: &SkewMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(a.data.dot(&b.data))
}

/// `‖[A, B]‖²` without forming the commutator.
pub fn commutator_norm_sq(a: &SkewMatrix, b: &SkewMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(commutator_norm_sq_kernel(
        a.dim(),
        a.data.as_slice(),
        b.data.as_slice(),
    ))
}

// Column-major slices. The commutator is skew, so only i < j is summed.
fn commutator_norm_sq_kernel(n: usize, a: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for j in 1..n {
        let a_col_j = &a[j * n..(j + 1) * n];
        let b_col_j = &b[j * n..(j + 1) * n];
        for i in 0..j {
            let mut c = 0.0;
            for k in 0..n {
                // a_ik b_kj - b_ik a_kj
                c += a[i + k * n] * b_col_j[k] - b[i + k * n] * a_col_j[k];
            }
            total += c * c;
        }
    }
    2.0 * total
}

/// The orthonormal basis `Ẽ_α` of `o(n)`, `α = 1..=N` in rank order.
pub fn standard_basis(n: usize) -> Result<Vec<SkewMatrix>> {
    if n < 2 {
        return Err(Error::invalid("standard basis needs n >= 2"));
    }
    pairs(n).map(|p| SkewMatrix::basis_element(n, p)).collect()
}

/// Entry-wise check `‖QQᵗ - I‖_max ≤ tol`.
pub fn is_orthogonal(q: &DMatrix<f64>, tol: f64) -> bool {
    if !q.is_square() {
        return false;
    }
    let defect = q * q.transpose() - DMatrix::identity(q.nrows(), q.ncols());
    defect.amax() <= tol
}

/// An ordered family of `m ≥ 1` skew matrices of a common order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewTuple {
    members: Vec<SkewMatrix>,
}

impl SkewTuple {
    pub fn new(members: Vec<SkewMatrix>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::invalid("a tuple needs at least one member"));
        };
        let n = first.dim();
        if members.iter().any(|b| b.dim() != n) {
            return Err(Error::invalid("tuple members differ in dimension"));
        }
        Ok(SkewTuple { members })
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(
            (0..m)
                .map(|_| SkewMatrix::zeros(n))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn members(&self) -> &[SkewMatrix] {
        &self.members
    }

    pub fn into_members(self) -> Vec<SkewMatrix> {
        self.members
    }

    /// `Σ_r ‖B_r‖²`.
    pub fn norm_sq_sum(&self) -> f64 {
        self.members.iter().map(SkewMatrix::norm_sq).sum()
    }

    /// `Σ_{r,s} ‖[B_r, B_s]‖²` over ordered pairs.
    pub fn commutator_sum(&self) -> f64 {
        let n = self.dim();
        let mut total = 0.0;
        for (r, a) in self.members.iter().enumerate() {
            for b in &self.members[r + 1..] {
                total += commutator_norm_sq_kernel(n, a.data.as_slice(), b.data.as_slice());
            }
        }
        2.0 * total
    }

    pub fn scale(&self, s: f64) -> SkewTuple {
        SkewTuple {
            members: self.members.iter().map(|b| b.scale(s)).collect(),
        }
    }

    /// Frobenius distance `sqrt(Σ_r ‖B_r - C_r‖²)`.
    pub fn distance(&self, other: &SkewTuple) -> Result<f64> {
        if self.dim() != other.dim() || self.len() != other.len() {
            return Err(Error::invalid("tuples differ in shape"));
        }
        Ok(self
            .members
            .iter()
            .zip(&other.members)
            .map(|(a, b)| (&a.data - &b.data).norm_squared())
            .sum::<f64>()
            .sqrt())
    }
}

/// `(P, R) · (B_1, …, B_m) = (P B_1 Pᵗ, …, P B_m Pᵗ) · R`; member `s` of the
/// result is `Σ_r R_rs P B_r Pᵗ`.
pub fn apply_k_action(p: &DMatrix<f64>, r: &DMatrix<f64>, t: &SkewTuple) -> Result<SkewTuple> {
    let n = t.dim();
    let m = t.len();
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::invalid(format!("P must be {n}x{n}")));
    }
    if r.nrows() != m || r.ncols() != m {
        return Err(Error::invalid(format!("R must be {m}x{m}")));
    }
    if !is_orthogonal(p, ORTHOGONALITY_TOLERANCE) {
        return Err(Error::invalid("P is not orthogonal"));
    }
    if !is_orthogonal(r, ORTHOGONALITY_TOLERANCE) {
        return Err(Error::invalid("R is not orthogonal"));
    }
    let pt = p.transpose();
    let conjugated: Vec<DMatrix<f64>> = t.members.iter().map(|b| p * &b.data * &pt).collect();
    let members = (0..m)
        .map(|s| {
            let mut acc = DMatrix::zeros(n, n);
            for (rr, c) in conjugated.iter().enumerate() {
                acc += c * r[(rr, s)];
            }
            SkewMatrix::antisymmetrize(acc)
        })
        .collect();
    Ok(SkewTuple { members })
}

/// The `N × m` coefficient matrix `B` with `(B_1, …, B_m) = (Ẽ_1, …, Ẽ_N) B`.
pub fn coefficients_of(t: &SkewTuple) -> DMatrix<f64> {
    let n = t.dim();
    let cols: Vec<Vec<f64>> = t.members.iter().map(|b| b.basis_coefficients()).collect();
    DMatrix::from_fn(pair_count(n), t.len(), |alpha, r| cols[r][alpha])
}

/// Inverse of [`coefficients_of`].
pub fn tuple_from_coefficients(n: usize, b: &DMatrix<f64>) -> Result<SkewTuple> {
    if b.nrows() != pair_count(n) {
        return Err(Error::invalid(format!(
            "coefficient matrix has {} rows, expected {}",
            b.nrows(),
            pair_count(n)
        )));
    }
    let members = (0..b.ncols())
        .map(|r| SkewMatrix::from_basis_coefficients(n, b.column(r).as_slice()))
        .collect::<Result<Vec<_>>>()?;
    SkewTuple::new(members)
}
