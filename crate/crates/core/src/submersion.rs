//! Pointwise curvature of a Riemannian submersion `M → B` in an adapted
//! orthonormal frame: horizontal indices `i, j ∈ 1..=n`, vertical indices
//! `r, s ∈ 1..=m` (stored 0-based).
//!
//! The O'Neill tensors enter through `A^r_ij` (a skew matrix per vertical index)
//! and `T^i_rs` (symmetric in `r, s`). With `T = 0`:
//!
//! ```text
//! K_rs = K̂_rs,   K_ir = Σ_j (A^r_ij)²,   K_ij = Ǩ_ij - 3 Σ_r (A^r_ij)²,
//! R_rs = R̂_rs + Σ_ij A^r_ij A^s_ij,   R_ij = Ř_ij - 2 Σ_{r,k} A^r_ik A^r_jk,
//! ```
//!
//! and `R_ir = 0` for a Yang–Mills horizontal distribution.

use nalgebra::DMatrix;

use crate::forms::{quaternion_member, so3_member};
use crate::skew::SkewTuple;
use crate::{Error, Result, SkewMatrix};

const TABLE_TOLERANCE: f64 = 1e-12;
/// Relative tolerance of the spectral consistency flags.
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

/// Second fundamental form of the fibres, `t[i][(r, s)] = T^i_rs`, plus the
/// optional derivative table `T^i_rri` (`n × m`) needed for the mixed curvatures.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreTensor {
    pub t: Vec<DMatrix<f64>>,
    pub derivative: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmersionPointData {
    pub n: usize,
    pub m: usize,
    pub a: SkewTuple,
    pub fibre_tensor: Option<FibreTensor>,
    /// `R̂_rs`
    pub fiber_ricci: DMatrix<f64>,
    /// `K̂_rs`
    pub fiber_sectional: DMatrix<f64>,
    /// `Ǩ_ij`
    pub base_sectional: DMatrix<f64>,
    /// `Ř_ij`
    pub base_ricci: DMatrix<f64>,
    /// Largest eigenvalue of the fibre Ricci tensor.
    pub mu_hat: f64,
    /// Largest eigenvalue of the base curvature operator.
    pub kappa_check: f64,
    /// Lowest eigenvalue of the base Ricci tensor.
    pub lambda_check: f64,
}

fn check_table(name: &str, m: &DMatrix<f64>, size: usize, zero_diagonal: bool) -> Result<()> {
    if m.shape() != (size, size) {
        return Err(Error::invalid(format!(
            "{name} must be {size}x{size}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{name} has non-finite entries")));
    }
    let tol = TABLE_TOLERANCE * m.amax().max(1.0);
    if (m - m.transpose()).amax() > tol {
        return Err(Error::invalid(format!("{name} is not symmetric")));
    }
    if zero_diagonal && m.diagonal().amax() > tol {
        return Err(Error::invalid(format!("{name} must have a zero diagonal")));
    }
    Ok(())
}

impl SubmersionPointData {
    /// Validated point data with totally geodesic fibres (`T = 0`).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: SkewTuple,
        fiber_sectional: DMatrix<f64>,
        fiber_ricci: DMatrix<f64>,
        base_sectional: DMatrix<f64>,
        base_ricci: DMatrix<f64>,
        mu_hat: f64,
        kappa_check: f64,
        lambda_check: f64,
    ) -> Result<Self> {
        let n = a.dim();
        let m = a.len();
        check_table("fiber_sectional", &fiber_sectional, m, true)?;
        check_table("fiber_ricci", &fiber_ricci, m, false)?;
        check_table("base_sectional", &base_sectional, n, true)?;
        check_table("base_ricci", &base_ricci, n, false)?;
        if ![mu_hat, kappa_check, lambda_check].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("spectral scalars must be finite"));
        }
        Ok(SubmersionPointData {
            n,
            m,
            a,
            fibre_tensor: None,
            fiber_ricci,
            fiber_sectional,
            base_sectional,
            base_ricci,
            mu_hat,
            kappa_check,
            lambda_check,
        })
    }

    /// Attaches `T^i_rs` (one symmetric `m × m` matrix per horizontal index) and
    /// optionally the `n × m` table of `T^i_rri`.
    pub fn with_fibre_tensor(mut self, t: Vec<DMatrix<f64>>, derivative: Option<DMatrix<f64>>) -> Result<Self> {
        if t.len() != self.n {
            return Err(Error::invalid(format!(
                "expected {} T-matrices, got {}",
                self.n,
                t.len()
            )));
        }
        for (i, ti) in t.iter().enumerate() {
            check_table(&format!("T^{}", i + 1), ti, self.m, false)?;
        }
        if let Some(der) = &derivative {
            if der.shape() != (self.n, self.m) {
                return Err(Error::invalid(format!("T derivative table must be {}x{}", self.n, self.m)));
            }
        }
        self.fibre_tensor = Some(FibreTensor { t, derivative });
        Ok(self)
    }

    /// `|A|² = Σ_{r,i,j} (A^r_ij)²`.
    pub fn a_norm_sq(&self) -> f64 {
        self.a.norm_sq_sum()
    }

    fn totally_geodesic(&self) -> bool {
        self.fibre_tensor
            .as_ref()
            .is_none_or(|f| f.t.iter().all(|t| t.iter().all(|&v| v == 0.0)))
    }

    fn a_entry(&self, r: usize, i: usize, j: usize) -> f64 {
        self.a.members()[r].matrix()[(i, j)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionalTables {
    pub k_rs: DMatrix<f64>,
    /// `None` when `T ≠ 0` and no derivative table was supplied.
    pub k_ir: Option<DMatrix<f64>>,
    pub k_ij: DMatrix<f64>,
}

impl SectionalTables {
    pub fn k_ir(&self) -> Result<&DMatrix<f64>> {
        self.k_ir.as_ref().ok_or_else(|| {
            Error::UnsupportedInput("mixed curvatures need T = 0 or the T^i_rri table".into())
        })
    }
}

pub fn sectional_curvatures(d: &SubmersionPointData) -> SectionalTables {
    let (n, m) = (d.n, d.m);
    let t = d.fibre_tensor.as_ref();
    let k_rs = DMatrix::from_fn(m, m, |r, s| {
        if r == s {
            return 0.0;
        }
        let correction: f64 = t.map_or(0.0, |f| {
            f.t.iter().map(|ti| ti[(r, s)].powi(2) - ti[(r, r)] * ti[(s, s)]).sum()
        });
        d.fiber_sectional[(r, s)] + correction
    });
    let a_row = |i: usize, r: usize| (0..n).map(|j| d.a_entry(r, i, j).powi(2)).sum::<f64>();
    let k_ir = if d.totally_geodesic() {
        Some(DMatrix::from_fn(n, m, a_row))
    } else {
        let f = t.expect("nonzero T is present");
        f.derivative.as_ref().map(|der| {
            DMatrix::from_fn(n, m, |i, r| {
                let ti = &f.t[i];
                der[(i, r)] - (0..m).map(|s| ti[(r, s)].powi(2)).sum::<f64>() + a_row(i, r)
            })
        })
    };
    let k_ij = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        d.base_sectional[(i, j)] - 3.0 * (0..m).map(|r| d.a_entry(r, i, j).powi(2)).sum::<f64>()
    });
    SectionalTables { k_rs, k_ir, k_ij }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicciTables {
    pub r_rs: DMatrix<f64>,
    pub r_ij: DMatrix<f64>,
    /// Zero under the Yang–Mills assumption.
    pub r_ir: DMatrix<f64>,
}

pub fn ricci_curvatures(d: &SubmersionPointData) -> Result<RicciTables> {
    if !d.totally_geodesic() {
        return Err(Error::UnsupportedInput(
            "Ricci tables are only available for totally geodesic fibres".into(),
        ));
    }
    let (n, m) = (d.n, d.m);
    let members: Vec<&DMatrix<f64>> = d.a.members().iter().map(SkewMatrix::matrix).collect();
    let r_rs = DMatrix::from_fn(m, m, |r, s| {
        d.fiber_ricci[(r, s)] + members[r].component_mul(members[s]).sum()
    });
    let mut aat = DMatrix::zeros(n, n);
    for a in &members {
        aat += *a * a.transpose();
    }
    let r_ij = &d.base_ricci - aat * 2.0;
    Ok(RicciTables {
        r_rs,
        r_ij,
        r_ir: DMatrix::zeros(n, m),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTables {
    pub k_rs: DMatrix<f64>,
    pub k_ir: DMatrix<f64>,
    pub k_ij: DMatrix<f64>,
    pub r_rs: DMatrix<f64>,
    pub r_ij: DMatrix<f64>,
    pub r_ir: DMatrix<f64>,
}

impl CurvatureTables {
    /// `(name, table)` in a fixed order.
    pub fn named(&self) -> [(&'static str, &DMatrix<f64>); 6] {
        [
            ("K_rs", &self.k_rs),
            ("K_ir", &self.k_ir),
            ("K_ij", &self.k_ij),
            ("R_rs", &self.r_rs),
            ("R_ij", &self.r_ij),
            ("R_ir", &self.r_ir),
        ]
    }

    /// Largest entrywise deviation from `other`, relative to `max(1, |entry|)`.
    pub fn max_deviation(&self, other: &CurvatureTables) -> f64 {
        self.named()
            .iter()
            .zip(other.named().iter())
            .flat_map(|((_, x), (_, y))| {
                x.iter().zip(y.iter()).map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            })
            .fold(0.0, f64::max)
    }
}

pub fn curvature_tables(d: &SubmersionPointData) -> Result<CurvatureTables> {
    let s = sectional_curvatures(d);
    let k_ir = s.k_ir()?.clone();
    let r = ricci_curvatures(d)?;
    Ok(CurvatureTables {
        k_rs: s.k_rs,
        k_ir,
        k_ij: s.k_ij,
        r_rs: r.r_rs,
        r_ij: r.r_ij,
        r_ir: r.r_ir,
    })
}

/// The four integral inequalities, by the dimensions they cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimonsCase {
    /// `n = 2`: `|A|² μ̂`
    I,
    /// `m = 1`: `|A|² (κ̌ - λ̌)`
    II,
    /// `m ≥ 2, n = 3`: `|A|² (|A|²/6 + 2μ̂ + κ̌ - λ̌)`
    III,
    /// `m ≥ 2, n ≥ 4`: `|A|² (|A|²/3 + 2μ̂ + κ̌ - λ̌)`
    IV,
}

impl SimonsCase {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "i" => Ok(SimonsCase::I),
            "ii" => Ok(SimonsCase::II),
            "iii" => Ok(SimonsCase::III),
            "iv" => Ok(SimonsCase::IV),
            _ => Err(Error::invalid(format!("unknown case {tag:?}, expected i, ii, iii or iv"))),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SimonsCase::I => "i",
            SimonsCase::II => "ii",
            SimonsCase::III => "iii",
            SimonsCase::IV => "iv",
        }
    }

    /// The case covering fibre dimension `m` over a base of dimension `n`, preferring
    /// `m = 1` over `n = 2` when both apply.
    pub fn for_dims(n: usize, m: usize) -> Result<Self> {
        match (n, m) {
            (_, 1) => Ok(SimonsCase::II),
            (2, _) => Ok(SimonsCase::I),
            (3, _) => Ok(SimonsCase::III),
            (n, _) if n >= 4 => Ok(SimonsCase::IV),
            _ => Err(Error::invalid(format!("no integrand for n = {n}, m = {m}"))),
        }
    }

    fn applies(self, n: usize, m: usize) -> bool {
        match self {
            SimonsCase::I => n == 2 && m >= 1,
            SimonsCase::II => m == 1,
            SimonsCase::III => m >= 2 && n == 3,
            SimonsCase::IV => m >= 2 && n >= 4,
        }
    }

    /// `raw ≤ factor · cased` whenever the commutator bound holds and, for (i),
    /// `κ̌ = λ̌` (surfaces), for (ii), `μ̂ = 0` (curves).
    pub fn raw_factor(self) -> f64 {
        match self {
            SimonsCase::I => 4.0,
            _ => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimonsIntegrand {
    pub case: SimonsCase,
    pub value: f64,
    /// `Σ‖[A^r, A^s]‖² + 4μ̂|A|² + 2κ̌|A|² - 2λ̌|A|²`
    pub raw: f64,
    /// `raw ≤ raw_factor · value` up to rounding.
    pub raw_consistent: bool,
}

pub fn simons_integrand(case: SimonsCase, d: &SubmersionPointData) -> Result<SimonsIntegrand> {
    if !case.applies(d.n, d.m) {
        return Err(Error::invalid(format!(
            "case {} does not cover n = {}, m = {}",
            case.tag(),
            d.n,
            d.m
        )));
    }
    let a2 = d.a_norm_sq();
    let spread = d.kappa_check - d.lambda_check;
    let value = match case {
        SimonsCase::I => a2 * d.mu_hat,
        SimonsCase::II => a2 * spread,
        SimonsCase::III => a2 * (a2 / 6.0 + 2.0 * d.mu_hat + spread),
        SimonsCase::IV => a2 * (a2 / 3.0 + 2.0 * d.mu_hat + spread),
    };
    let raw = d.a.commutator_sum() + 4.0 * d.mu_hat * a2 + 2.0 * spread * a2;
    let scale = a2 * (a2 + d.mu_hat.abs() + d.kappa_check.abs() + d.lambda_check.abs()).max(1.0);
    Ok(SimonsIntegrand {
        case,
        value,
        raw,
        raw_consistent: raw <= case.raw_factor() * value + 1e-10 * scale,
    })
}

/// Agreement of the supplied spectral scalars with the tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCheck {
    /// `μ̂` equals the top eigenvalue of `R̂`.
    pub mu_hat: bool,
    /// `λ̌` equals the lowest eigenvalue of `Ř`.
    pub lambda_check: bool,
    /// `κ̌ ≥ max Ǩ_ij`; sectional values only bound the curvature operator from below.
    pub kappa_check: bool,
}

impl SpectralCheck {
    pub fn all(&self) -> bool {
        self.mu_hat && self.lambda_check && self.kappa_check
    }
}

pub fn spectral_check(d: &SubmersionPointData) -> SpectralCheck {
    let close = |x: f64, y: f64| (x - y).abs() <= SPECTRAL_TOLERANCE * x.abs().max(y.abs()).max(1.0);
    let top = d.fiber_ricci.clone().symmetric_eigen().eigenvalues.max();
    let low = d.base_ricci.clone().symmetric_eigen().eigenvalues.min();
    let sect = d.base_sectional.max();
    SpectralCheck {
        mu_hat: close(d.mu_hat, top),
        lambda_check: close(d.lambda_check, low),
        kappa_check: d.kappa_check >= sect - SPECTRAL_TOLERANCE * sect.abs().max(1.0),
    }
}

/// Off-diagonal constant table.
fn constant_sectional(size: usize, value: f64) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| if i == j { 0.0 } else { value })
}

fn check_scale(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("curvature scale must be positive, got {a}")))
    }
}

/// Point data whose fibre (`m`-dim) and base (`n`-dim) have constant curvatures
/// `fibre` and `base`.
fn constant_curvature_data(a: SkewTuple, fibre: f64, base: f64) -> Result<SubmersionPointData> {
    let (n, m) = (a.dim(), a.len());
    let fibre_ricci = (m as f64 - 1.0) * fibre;
    let base_ricci = (n as f64 - 1.0) * base;
    SubmersionPointData::new(
        a,
        constant_sectional(m, fibre),
        DMatrix::identity(m, m) * fibre_ricci,
        constant_sectional(n, base),
        DMatrix::identity(n, n) * base_ricci,
        fibre_ricci,
        base,
        base_ricci,
    )
}

/// Equality model over a 3-dimensional base: `A^r = 2√a C_r`, `|A|² = 24a`, fibre
/// curvature `a`, base curvature `8a`.
pub fn equality_model_case3(a: f64) -> Result<SubmersionPointData> {
    check_scale(a)?;
    let scale = 2.0 * a.sqrt();
    let members = (1..=3).map(|k| so3_member(k, scale)).collect();
    constant_curvature_data(SkewTuple::new(members)?, a, 8.0 * a)
}

/// Base curvature of the quaternion equality model; `4a` for `n = 4`, `8a/3` for `n = 5`.
pub fn case4_base_curvature(a: f64, n: usize) -> f64 {
    8.0 * a / (n as f64 - 2.0)
}

/// Equality model over an `n`-dimensional base, `n ≥ 4`: `A^r = √a diag(D_r, 0)`,
/// `|A|² = 12a`, fibre curvature `a`, base curvature `8a/(n-2)`.
pub fn equality_model_case4(a: f64, n: usize) -> Result<SubmersionPointData> {
    check_scale(a)?;
    if n < 4 {
        return Err(Error::invalid(format!("the quaternion model needs n >= 4, got {n}")));
    }
    let members = (1..=3)
        .map(|k| quaternion_member(k, a.sqrt(), n))
        .collect::<Result<Vec<_>>>()?;
    constant_curvature_data(SkewTuple::new(members)?, a, case4_base_curvature(a, n))
}

/// Left multiplication by the imaginary unit `k ∈ {1, 2, 3}` (`i, j, k`) on
/// quaternions, in the basis `1, i, j, k`.
pub fn quaternion_left_multiplication(unit: usize) -> Result<DMatrix<f64>> {
    // e_p e_q = sign · e_index, basis 0 = 1, 1 = i, 2 = j, 3 = k
    const TABLE: [[(f64, usize); 4]; 4] = [
        [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
        [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
        [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
        [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
    ];
    if !(1..=3).contains(&unit) {
        return Err(Error::invalid(format!("imaginary unit index must be 1..=3, got {unit}")));
    }
    let mut m = DMatrix::zeros(4, 4);
    for q in 0..4 {
        let (sign, idx) = TABLE[unit][q];
        m[(idx, q)] = sign;
    }
    Ok(m)
}

/// Point model of `S⁷(1/√a) → S⁴(1/(2√a))`: `A^r = √a L_r` for left multiplication
/// by `i, j, k`, round fibres of curvature `a`, base curvature `4a`.
pub fn hopf_point_model(a: f64) -> Result<SubmersionPointData> {
    check_scale(a)?;
    let members = (1..=3)
        .map(|k| SkewMatrix::new(quaternion_left_multiplication(k)? * a.sqrt()))
        .collect::<Result<Vec<_>>>()?;
    constant_curvature_data(SkewTuple::new(members)?, a, 4.0 * a)
}

/// Point model of `S³ → S²`: `n = 2`, `m = 1`, `A¹ = √a [[0, 1], [-1, 0]]`, flat
/// one-dimensional fibre, base curvature `4a`.
pub fn hopf_s3_model(a: f64) -> Result<SubmersionPointData> {
    check_scale(a)?;
    let s = a.sqrt();
    let a1 = SkewMatrix::from_rows(&[vec![0.0, s], vec![-s, 0.0]])?;
    let mut d = constant_curvature_data(SkewTuple::new(vec![a1])?, 0.0, 4.0 * a)?;
    d.mu_hat = 0.0;
    Ok(d)
}

/// The point models with closed-form curvature tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointModel {
    Case3,
    Case4 { n: usize },
    Hopf,
    HopfS3,
}

impl PointModel {
    pub fn build(self, a: f64) -> Result<SubmersionPointData> {
        match self {
            PointModel::Case3 => equality_model_case3(a),
            PointModel::Case4 { n } => equality_model_case4(a, n),
            PointModel::Hopf => hopf_point_model(a),
            PointModel::HopfS3 => hopf_s3_model(a),
        }
    }

    pub fn simons_case(self) -> SimonsCase {
        match self {
            PointModel::Case3 => SimonsCase::III,
            PointModel::Case4 { .. } | PointModel::Hopf => SimonsCase::IV,
            PointModel::HopfS3 => SimonsCase::I,
        }
    }

    /// The tables written out in closed form, independently of the curvature formulas.
    pub fn expected_tables(self, a: f64) -> Result<CurvatureTables> {
        check_scale(a)?;
        let diag = |size: usize, f: &dyn Fn(usize) -> f64| {
            DMatrix::from_fn(size, size, |i, j| if i == j { f(i) } else { 0.0 })
        };
        Ok(match self {
            PointModel::Case3 => CurvatureTables {
                k_rs: constant_sectional(3, a),
                k_ir: DMatrix::from_fn(3, 3, |i, r| if i + r == 2 { 0.0 } else { 4.0 * a }),
                k_ij: constant_sectional(3, -4.0 * a),
                r_rs: DMatrix::identity(3, 3) * (10.0 * a),
                r_ij: DMatrix::zeros(3, 3),
                r_ir: DMatrix::zeros(3, 3),
            },
            PointModel::Case4 { n } => {
                if n < 4 {
                    return Err(Error::invalid("the quaternion model needs n >= 4"));
                }
                let c = case4_base_curvature(a, n);
                let ric = (n as f64 - 1.0) * c;
                CurvatureTables {
                    k_rs: constant_sectional(3, a),
                    k_ir: DMatrix::from_fn(n, 3, |i, _| if i < 4 { a } else { 0.0 }),
                    k_ij: DMatrix::from_fn(n, n, |i, j| match (i == j, i < 4 && j < 4) {
                        (true, _) => 0.0,
                        (false, true) => c - 3.0 * a,
                        (false, false) => c,
                    }),
                    r_rs: DMatrix::identity(3, 3) * (6.0 * a),
                    r_ij: diag(n, &|i| if i < 4 { ric - 6.0 * a } else { ric }),
                    r_ir: DMatrix::zeros(n, 3),
                }
            }
            PointModel::Hopf => CurvatureTables {
                k_rs: constant_sectional(3, a),
                k_ir: DMatrix::from_element(4, 3, a),
                k_ij: constant_sectional(4, a),
                r_rs: DMatrix::identity(3, 3) * (6.0 * a),
                r_ij: DMatrix::identity(4, 4) * (6.0 * a),
                r_ir: DMatrix::zeros(4, 3),
            },
            PointModel::HopfS3 => CurvatureTables {
                k_rs: DMatrix::zeros(1, 1),
                k_ir: DMatrix::from_element(2, 1, a),
                k_ij: constant_sectional(2, a),
                r_rs: DMatrix::from_element(1, 1, 2.0 * a),
                r_ij: DMatrix::identity(2, 2) * (2.0 * a),
                r_ir: DMatrix::zeros(2, 1),
            },
        })
    }
}
