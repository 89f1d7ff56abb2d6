//! Canonical block-diagonal form of a skew matrix and the tools built on it.
//!
//! Every `A ∈ o(n)` is orthogonally conjugate to
//!
//! ```text
//! P A Pᵗ = diag([[0, λ₁], [-λ₁, 0]], …, [[0, λ_h], [-λ_h, 0]], [0]),   λ₁ ≥ … ≥ λ_h ≥ 0,
//! ```
//!
//! with `h = ⌊n/2⌋` and the trailing zero present only for odd `n`. The frame is
//! computed from the eigenvectors of the positive semidefinite `-A² = AᵗA`
//! (cyclic Jacobi). Eigenvalue clusters are resolved recursively by restricting
//! `A` to each cluster's eigenspace; inside an isotropic cluster the 2-planes are
//! picked greedily, starting from the original basis direction with the largest
//! projection (lowest index on ties).
//!
//! Conjugating further by the unitary `U = diag(W, …, W, [1])`,
//! `W = [[1, i], [i, 1]]/√2`, turns `i·PAPᵗ` into the real diagonal
//! `diag(λ₁, -λ₁, …, λ_h, -λ_h, [0])`; [`conjugated_complex_entries`] evaluates
//! `U (i·PBPᵗ) U*` for a second matrix entry by entry in closed form.

use nalgebra::{DMatrix, DVector};

use crate::forms::{block_diagonal, quaternion_member, so3_member};
use crate::jacobi::symmetric_eigen;
use crate::skew::{commutator_norm_sq, frobenius_inner, SkewMatrix};
use crate::{Error, Result};

/// Relative gap below which eigenvalues of `-A²` are treated as one cluster.
pub const CLUSTER_GAP: f64 = 1e-8;
/// Relative off-diagonal threshold for the Jacobi sweeps on `-A²`.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
/// Restricted forms with norm below this fraction of `‖A‖` are treated as zero.
const ZERO_BLOCK: f64 = 1e-14;
/// Relative tolerance of the pairwise equality flag.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;
/// Normal-form residual accepted by [`pair_equality_frame`].
pub const FRAME_TOLERANCE: f64 = 1e-7;

/// An orthogonal frame `P` and sorted block parameters with `P A Pᵗ` block diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub p: DMatrix<f64>,
    pub lambdas: Vec<f64>,
}

impl CanonicalForm {
    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    /// `diag([[0,λ₁],[-λ₁,0]], …)` of order `n`.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        block_diagonal(&self.lambdas, self.dim())
    }

    /// `‖Pᵗ · blocks · P - A‖_F`.
    pub fn residual(&self, a: &SkewMatrix) -> f64 {
        (self.p.transpose() * self.block_matrix() * &self.p - a.matrix()).norm()
    }
}

/// Canonical block form of `a`; deterministic for a fixed input.
pub fn canonical_form(a: &SkewMatrix) -> Result<CanonicalForm> {
    let n = a.dim();
    let norm = a.norm();
    let identity = DMatrix::<f64>::identity(n, n);
    let mut blocks = Vec::new();
    let mut kernel = Vec::new();
    decompose(a.matrix(), &identity, norm, &mut blocks, &mut kernel)?;

    // clusters carry identical λ values, so the stable sort keeps their greedy order
    blocks.sort_by(|x: &Block, y: &Block| y.lambda.total_cmp(&x.lambda));
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n / 2);
    for b in blocks {
        rows.push(b.first);
        rows.push(b.second);
        lambdas.push(b.lambda);
    }
    lambdas.resize(n / 2, 0.0);
    rows.extend(kernel);
    if rows.len() != n {
        return Err(Error::NumericFailure(format!(
            "canonical frame has {} vectors for n = {n}",
            rows.len()
        )));
    }
    let p = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(CanonicalForm { p, lambdas })
}

struct Block {
    first: DVector<f64>,
    second: DVector<f64>,
    lambda: f64,
}

/// Splits `a` (the restriction of `A` to the span of `lift`'s columns) into
/// 2-planes and kernel directions, reported in original coordinates.
fn decompose(
    a: &DMatrix<f64>,
    lift: &DMatrix<f64>,
    global_norm: f64,
    blocks: &mut Vec<Block>,
    kernel: &mut Vec<DVector<f64>>,
) -> Result<()> {
    let d = a.nrows();
    if d == 0 {
        return Ok(());
    }
    if a.norm() <= ZERO_BLOCK * global_norm || global_norm == 0.0 {
        kernel.extend(lift.column_iter().map(|c| c.into_owned()));
        return Ok(());
    }
    let s = a.transpose() * a;
    let eig = symmetric_eigen(&s, JACOBI_TOLERANCE, global_norm * global_norm)?;
    let top = eig.values[0];

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..d {
        if eig.values[k - 1] - eig.values[k] > CLUSTER_GAP * top {
            clusters.push((start, k));
            start = k;
        }
    }
    clusters.push((start, d));

    if clusters.len() == 1 {
        return split_isotropic(a, lift, blocks);
    }
    for (lo, hi) in clusters {
        let v = eig.vectors.columns(lo, hi - lo).into_owned();
        let restricted = v.transpose() * a * &v;
        let restricted = (&restricted - restricted.transpose()) * 0.5;
        decompose(&restricted, &(lift * &v), global_norm, blocks, kernel)?;
    }
    Ok(())
}

/// `a` with `aᵗa ≈ μ I`, `μ > 0`: a scaled complex structure on an even-dimensional space.
fn split_isotropic(a: &DMatrix<f64>, lift: &DMatrix<f64>, blocks: &mut Vec<Block>) -> Result<()> {
    let d = a.nrows();
    if d % 2 == 1 {
        return Err(Error::NumericFailure(format!(
            "isotropic cluster of odd dimension {d}"
        )));
    }
    let mut remaining = DMatrix::<f64>::identity(d, d);
    let mut found = Vec::with_capacity(d / 2);
    for _ in 0..d / 2 {
        // candidate directions are the original basis vectors seen in cluster coordinates
        let mut best = 0;
        let mut best_norm = -1.0;
        for i in 0..lift.nrows() {
            let c = &remaining * lift.row(i).transpose();
            let nrm = c.norm();
            if nrm > best_norm * (1.0 + 1e-9) {
                best = i;
                best_norm = nrm;
            }
        }
        let mut v = &remaining * lift.row(best).transpose();
        v /= v.norm();
        let mut w = -(&remaining * (a * &v));
        w -= &v * v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return Err(Error::NumericFailure("degenerate isotropic cluster".into()));
        }
        w /= wn;
        let lambda = v.dot(&(a * &w));
        remaining -= &v * v.transpose() + &w * w.transpose();
        found.push((v, w, lambda));
    }
    let mean = found.iter().map(|f| f.2).sum::<f64>() / found.len() as f64;
    for (v, w, _) in found {
        blocks.push(Block {
            first: lift * v,
            second: lift * w,
            lambda: mean,
        });
    }
    Ok(())
}

/// The diagonal `u` of `U (i·PAPᵗ) U*`: `(λ₁, -λ₁, …, λ_h, -λ_h, [0])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDiagonal {
    pub u: Vec<f64>,
}

pub fn complex_diagonal(c: &CanonicalForm) -> ComplexDiagonal {
    let n = c.dim();
    let mut u = Vec::with_capacity(n);
    for &l in &c.lambdas {
        u.push(l);
        u.push(-l);
    }
    if n % 2 == 1 {
        u.push(0.0);
    }
    ComplexDiagonal { u }
}

/// A complex matrix as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl ComplexMatrix {
    pub fn norm_sq(&self) -> f64 {
        self.re.norm_squared() + self.im.norm_squared()
    }

    pub fn modulus_sq(&self, i: usize, j: usize) -> f64 {
        self.re[(i, j)].powi(2) + self.im[(i, j)].powi(2)
    }

    /// Largest entry of `|M* - M|`.
    pub fn hermitian_defect(&self) -> f64 {
        let dre = (&self.re - self.re.transpose()).amax();
        let dim = (&self.im + self.im.transpose()).amax();
        dre.max(dim)
    }
}

/// `B̌ = U (i·PBPᵗ) U*` for the frame `P` of `c`, evaluated entry by entry.
///
/// Writing `b` for `PBPᵗ`, the 2×2 block `(k, l)` of `B̌` built from
/// `[[p, q], [r, s]] = b[2k-1..2k, 2l-1..2l]` is
///
/// ```text
/// ½ [ (q - r) + i(p + s)    (p - s) + i(q + r) ]
///   [ (s - p) + i(q + r)    (r - q) + i(p + s) ]
/// ```
///
/// and for odd `n` the last column holds `((-y + ix), (-x + iy))/√2` with
/// `(x, y) = (b_{2k-1,n}, b_{2k,n})`; the last row is its conjugate transpose.
pub fn conjugated_complex_entries(c: &CanonicalForm, b: &SkewMatrix) -> Result<ComplexMatrix> {
    let n = c.dim();
    if b.dim() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: frame is {n}, matrix is {}",
            b.dim()
        )));
    }
    let pb = b.conjugate(&c.p)?;
    let bm = pb.matrix();
    let mut re = DMatrix::zeros(n, n);
    let mut im = DMatrix::zeros(n, n);
    let h = n / 2;
    for k in 0..h {
        for l in 0..h {
            let (r0, c0) = (2 * k, 2 * l);
            let p = bm[(r0, c0)];
            let q = bm[(r0, c0 + 1)];
            let r = bm[(r0 + 1, c0)];
            let s = bm[(r0 + 1, c0 + 1)];
            re[(r0, c0)] = 0.5 * (q - r);
            im[(r0, c0)] = 0.5 * (p + s);
            re[(r0, c0 + 1)] = 0.5 * (p - s);
            im[(r0, c0 + 1)] = 0.5 * (q + r);
            re[(r0 + 1, c0)] = 0.5 * (s - p);
            im[(r0 + 1, c0)] = 0.5 * (q + r);
            re[(r0 + 1, c0 + 1)] = 0.5 * (r - q);
            im[(r0 + 1, c0 + 1)] = 0.5 * (p + s);
        }
    }
    if n % 2 == 1 {
        let last = n - 1;
        let f = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..h {
            let x = bm[(2 * k, last)];
            let y = bm[(2 * k + 1, last)];
            re[(2 * k, last)] = -f * y;
            im[(2 * k, last)] = f * x;
            re[(2 * k + 1, last)] = -f * x;
            im[(2 * k + 1, last)] = f * y;
            re[(last, 2 * k)] = -f * y;
            im[(last, 2 * k)] = -f * x;
            re[(last, 2 * k + 1)] = -f * x;
            im[(last, 2 * k + 1)] = -f * y;
        }
    }
    Ok(ComplexMatrix { re, im })
}

/// `‖[diag(u), B̌]‖² = Σ_ij (u_i - u_j)² |b̌_ij|²`.
pub fn diagonal_commutator_norm_sq(u: &ComplexDiagonal, b: &ComplexMatrix) -> f64 {
    let n = u.u.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = u.u[i] - u.u[j];
            total += d * d * b.modulus_sq(i, j);
        }
    }
    total
}

/// Pairwise bound `‖[A,B]‖² ≤ c(n) ‖A‖² ‖B‖²` with `c(3) = 1/2`, `c(n ≥ 4) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBound {
    pub lhs: f64,
    pub bound: f64,
    pub residual: f64,
    pub equality: bool,
}

pub fn pair_constant(n: usize) -> Result<f64> {
    match n {
        0..=2 => Err(Error::UnsupportedDimension {
            n,
            reason: "commutators of 2x2 skew matrices vanish; the pairwise bound starts at n = 3",
        }),
        3 => Ok(0.5),
        _ => Ok(1.0),
    }
}

/// Equality is reported only for a positive bound, i.e. both matrices nonzero.
pub fn pair_bound(a: &SkewMatrix, b: &SkewMatrix) -> Result<PairBound> {
    let lhs = commutator_norm_sq(a, b)?;
    let bound = pair_constant(a.dim())? * a.norm_sq() * b.norm_sq();
    let residual = bound - lhs;
    Ok(PairBound {
        lhs,
        bound,
        residual,
        equality: bound > 0.0 && residual <= EQUALITY_TOLERANCE * bound,
    })
}

/// Frame realising pairwise equality: `P A Pᵗ` is the first extremal member with
/// parameter `lambda` and `P B Pᵗ = a·second + b·third`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFrame {
    pub p: DMatrix<f64>,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    /// `‖PAPᵗ - X₁‖/‖A‖ + ‖PBPᵗ - (aX₂ + bX₃)‖/‖B‖`.
    pub residual: f64,
}

/// `None` when the pair does not attain the bound.
pub fn pair_equality_frame(a: &SkewMatrix, b: &SkewMatrix) -> Result<Option<PairFrame>> {
    let report = pair_bound(a, b)?;
    if !report.equality {
        return Ok(None);
    }
    let n = a.dim();
    let cf = canonical_form(a)?;
    let (lambda, members) = if n == 3 {
        let l = cf.lambdas[0];
        (l, [so3_member(1, l), so3_member(2, l), so3_member(3, l)])
    } else {
        let l = 0.5 * (cf.lambdas[0] + cf.lambdas[1]);
        (
            l,
            [
                quaternion_member(1, l, n)?,
                quaternion_member(2, l, n)?,
                quaternion_member(3, l, n)?,
            ],
        )
    };
    let pa = a.conjugate(&cf.p)?;
    let pb = b.conjugate(&cf.p)?;
    let unit = members[1].norm_sq();
    let coef_a = frobenius_inner(&pb, &members[1])? / unit;
    let coef_b = frobenius_inner(&pb, &members[2])? / unit;
    let target_b = members[1].scale(coef_a).add(&members[2].scale(coef_b))?;
    let residual = (pa.matrix() - members[0].matrix()).norm() / a.norm()
        + (pb.matrix() - target_b.matrix()).norm() / b.norm();
    if residual >= FRAME_TOLERANCE {
        return Ok(None);
    }
    Ok(Some(PairFrame {
        p: cf.p,
        lambda,
        a: coef_a,
        b: coef_b,
        residual,
    }))
}

/// Precondition tolerance on `‖AAᵗ - BBᵗ‖_F`, relative to `max(1, ‖A‖²)`.
pub const FACTOR_GRAM_TOLERANCE: f64 = 1e-8;
/// Accepted `‖A - BR‖_F`, relative to `max(1, ‖A‖)`.
pub const FACTOR_TOLERANCE: f64 = 1e-7;

/// An orthogonal `R` with `A = BR`, which exists exactly when `AAᵗ = BBᵗ`.
///
/// `R` is the orthogonal Procrustes solution `UVᵗ` from the SVD `BᵗA = UΣVᵗ`; when
/// the Gram matrices agree the Procrustes minimum is zero, so any minimiser works.
pub fn orthogonal_factor(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if a.shape() != b.shape() || a.ncols() == 0 {
        return None;
    }
    let scale = a.norm_squared().max(1.0);
    let gram_gap = (a * a.transpose() - b * b.transpose()).norm();
    if gram_gap >= FACTOR_GRAM_TOLERANCE * scale {
        return None;
    }
    let svd = (b.transpose() * a).svd(true, true);
    let r = svd.u? * svd.v_t?;
    let err = (a - b * &r).norm();
    (err < FACTOR_TOLERANCE * a.norm().max(1.0)).then_some(r)
}

/// Block parameters normalised to `Σ λ_i² = 1/2`, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaVector(Vec<f64>);

pub const LAMBDA_NORM_TOLERANCE: f64 = 1e-10;

impl LambdaVector {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::invalid("empty lambda vector"));
        }
        if lambdas.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::invalid("lambdas must be nonnegative"));
        }
        if lambdas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("lambdas must be sorted descending"));
        }
        let total: f64 = lambdas.iter().map(|l| l * l).sum();
        if (total - 0.5).abs() > LAMBDA_NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "sum of squares is {total}, expected 1/2"
            )));
        }
        Ok(LambdaVector(lambdas))
    }

    /// Sorts and rescales arbitrary nonnegative values onto `Σ λ² = 1/2`.
    pub fn normalized(mut raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::invalid("lambdas must be nonnegative"));
        }
        let total: f64 = raw.iter().map(|l| l * l).sum();
        if total == 0.0 {
            return Err(Error::invalid("cannot normalise a zero lambda vector"));
        }
        let s = (0.5 / total).sqrt();
        raw.iter_mut().for_each(|l| *l *= s);
        raw.sort_by(|x, y| y.total_cmp(x));
        Self::new(raw)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Pairs `(i, j)`, `1 ≤ i < j ≤ len`, with `(λ_i + λ_j)² > 2/3`.
///
/// Whenever the set is nonempty it is `{1} × {2, …, n₀ + 1}`.
pub fn excess_pairs(v: &LambdaVector) -> Vec<(usize, usize)> {
    let l = v.values();
    let mut out = Vec::new();
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            if (l[i] + l[j]).powi(2) > 2.0 / 3.0 {
                out.push((i + 1, j + 1));
            }
        }
    }
    debug_assert!(out.iter().enumerate().all(|(k, &(i, j))| i == 1 && j == k + 2));
    out
}

/// `Σ_{(i,j) ∈ I} ((λ_i + λ_j)² - 2/3)`, at most `1/3`.
pub fn lambda_excess(v: &LambdaVector) -> f64 {
    let l = v.values();
    excess_pairs(v)
        .into_iter()
        .map(|(i, j)| (l[i - 1] + l[j - 1]).powi(2) - 2.0 / 3.0)
        .sum()
}
