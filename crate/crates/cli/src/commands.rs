use std::path::Path;

use rayon::prelude::*;
use skewbound::canonical::canonical_form;
use skewbound::compound::lhs_via_trace;
use skewbound::inequality::{bound_constant, commutator_bound_report, equality_canonicalize};
use skewbound::optimize::{round_to_extremal, sharpness_search, OptimizerConfig};
use skewbound::random::{random_tuple, trial_rng};
use skewbound::submersion::{curvature_tables, simons_integrand, PointModel};

use crate::input::read_skew_matrices;
use crate::report::{CliError, Field, RunReport};

/// Largest `n` accepted by commands that build second compounds.
pub const MAX_COMPOUND_DIM: usize = 16;
/// Relative disagreement allowed between the direct and the trace-identity sums.
pub const TRACE_TOLERANCE: f64 = 1e-8;
/// Relative normal-form residual accepted by `canonical`.
pub const CANONICAL_TOLERANCE: f64 = 1e-8;
/// Relative table deviation accepted by `submersion`.
pub const TABLE_TOLERANCE: f64 = 1e-12;
/// Simons integrand magnitude, relative to `|A|⁴`, still counted as zero.
pub const INTEGRAND_TOLERANCE: f64 = 1e-10;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_dims(n: usize, m: usize) -> Result<(), CliError> {
    if n < 3 {
        return Err(usage(format!("--n must be at least 3, got {n}")));
    }
    if m < 1 {
        return Err(usage("--m must be at least 1"));
    }
    Ok(())
}

fn check_tolerance(tolerance: f64) -> Result<(), CliError> {
    if tolerance.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--tolerance must be finite, got {tolerance}")))
    }
}

struct Trial {
    lhs: f64,
    rhs: f64,
    ratio: f64,
    trace_lhs: f64,
    trace_err: f64,
}

pub fn verify(n: usize, m: usize, trials: usize, seed: u64, tolerance: f64) -> Result<RunReport, CliError> {
    check_dims(n, m)?;
    if n > MAX_COMPOUND_DIM {
        return Err(usage(format!("--n is capped at {MAX_COMPOUND_DIM} for the trace cross-check")));
    }
    if trials < 1 {
        return Err(usage("--trials must be at least 1"));
    }
    check_tolerance(tolerance)?;
    let mut report = RunReport::new("verify", vec!["trial", "lhs", "rhs", "ratio", "trace_lhs", "trace_err"]);
    let d = bound_constant(n)?;

    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let t = random_tuple(n, m, &mut trial_rng(seed, k as u64));
            let report = commutator_bound_report(&t)?;
            let trace_lhs = lhs_via_trace(&t)?;
            let scale = t.norm_sq_sum().powi(2);
            let trace_err = if scale > 0.0 {
                (trace_lhs - report.lhs).abs() / scale
            } else {
                (trace_lhs - report.lhs).abs()
            };
            Ok(Trial {
                lhs: report.lhs,
                rhs: report.rhs,
                ratio: report.ratio,
                trace_lhs,
                trace_err,
            })
        })
        .collect::<Result<_, skewbound::Error>>()?;

    report.seed = Some(seed);
    report.param("n", n);
    report.param("m", m);
    report.param("trials", trials);
    report.param("tolerance", tolerance);
    let mut max_ratio = 0.0f64;
    let mut max_trace_err = 0.0f64;
    let mut bound_violations = 0;
    let mut trace_violations = 0;
    for (k, r) in results.iter().enumerate() {
        max_ratio = max_ratio.max(r.ratio);
        max_trace_err = max_trace_err.max(r.trace_err);
        if r.ratio > d + tolerance {
            bound_violations += 1;
        }
        if r.trace_err > TRACE_TOLERANCE {
            trace_violations += 1;
        }
        report.push_row(vec![
            k.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.ratio.into(),
            r.trace_lhs.into(),
            r.trace_err.into(),
        ]);
    }
    report.violations = bound_violations + trace_violations;
    report.notes.push(format!("d(n) = {d}"));
    report.notes.push(format!("max ratio = {max_ratio:.17e}"));
    report.notes.push(format!("max trace error = {max_trace_err:.3e}"));
    report.notes.push(format!(
        "bound violations = {bound_violations}, trace violations = {trace_violations}"
    ));
    Ok(report)
}

pub fn canonical(input: &Path) -> Result<RunReport, CliError> {
    let matrices = read_skew_matrices(input)?;
    let mut report = RunReport::new("canonical", vec!["matrix", "quantity", "i", "j", "value"]);
    report.param("input", input.display());
    for (k, a) in matrices.iter().enumerate() {
        let index = k + 1;
        let form = canonical_form(a)?;
        let residual = form.residual(a);
        for (b, lambda) in form.lambdas.iter().enumerate() {
            report.push_row(vec![index.into(), "lambda".into(), (b + 1).into(), Field::Empty, (*lambda).into()]);
        }
        let p = &form.p;
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                report.push_row(vec![index.into(), "p".into(), (i + 1).into(), (j + 1).into(), p[(i, j)].into()]);
            }
        }
        report.push_row(vec![index.into(), "residual".into(), Field::Empty, Field::Empty, residual.into()]);
        if residual > CANONICAL_TOLERANCE * a.norm().max(1.0) {
            report.violations += 1;
        }
        let lambdas: Vec<String> = form.lambdas.iter().map(|l| format!("{l:.17e}")).collect();
        report.notes.push(format!(
            "matrix {index} (n = {}): lambdas [{}], residual {residual:.3e}",
            a.dim(),
            lambdas.join(", ")
        ));
    }
    Ok(report)
}

pub fn sharpness(n: usize, m: usize, restarts: usize, seed: u64, tolerance: f64) -> Result<RunReport, CliError> {
    check_dims(n, m)?;
    if restarts < 1 {
        return Err(usage("--restarts must be at least 1"));
    }
    check_tolerance(tolerance)?;
    let mut report = RunReport::new("sharpness", vec!["restart", "ratio", "best_so_far"]);
    let cfg = OptimizerConfig {
        seed,
        restarts,
        ..OptimizerConfig::default()
    };
    let result = sharpness_search(n, m, &cfg)?;
    let gap = result.d - result.ratio;

    report.seed = Some(seed);
    report.param("n", n);
    report.param("m", m);
    report.param("restarts", restarts);
    report.param("tolerance", tolerance);
    for (k, (ratio, best)) in result.restart_ratios.iter().zip(&result.history).enumerate() {
        report.push_row(vec![k.into(), (*ratio).into(), (*best).into()]);
    }
    report.notes.push(format!("d(n) = {}", result.d));
    report.notes.push(format!("best ratio = {:.17e} (restart {})", result.ratio, result.restart));
    report.notes.push(format!("gap to d(n) = {gap:.3e}"));
    report.notes.push(format!("iterations of the best restart = {}", result.iterations));

    match &result.warning {
        Some(w) => report.notes.push(format!("warning: {w}")),
        None => {
            let form = match round_to_extremal(&result.tuple)? {
                Some(rounded) => equality_canonicalize(&rounded)?,
                None => None,
            };
            match form {
                Some(f) => report.notes.push(format!(
                    "rounded optimum canonicalized: lambda = {:.6e}, residual = {:.3e}",
                    f.lambda, f.residual
                )),
                None => {
                    report.notes.push("rounded optimum did not canonicalize".into());
                    report.violations += 1;
                }
            }
            if gap >= tolerance {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Case3,
    Case4,
    Hopf,
    HopfS3,
}

impl ModelChoice {
    fn tag(self) -> &'static str {
        match self {
            ModelChoice::Case3 => "case3",
            ModelChoice::Case4 => "case4",
            ModelChoice::Hopf => "hopf",
            ModelChoice::HopfS3 => "hopf-s3",
        }
    }

    /// Resolves the base dimension: only the quaternion model lets it vary.
    fn resolve(self, n: Option<usize>) -> Result<PointModel, CliError> {
        let (model, fixed) = match self {
            ModelChoice::Case3 => (PointModel::Case3, Some(3)),
            ModelChoice::Case4 => {
                let n = n.unwrap_or(5);
                if n < 4 {
                    return Err(usage(format!("case4 needs --n of at least 4, got {n}")));
                }
                (PointModel::Case4 { n }, None)
            }
            ModelChoice::Hopf => (PointModel::Hopf, Some(4)),
            ModelChoice::HopfS3 => (PointModel::HopfS3, Some(2)),
        };
        match (fixed, n) {
            (Some(f), Some(n)) if f != n => Err(usage(format!("{} has base dimension {f}, got --n {n}", self.tag()))),
            _ => Ok(model),
        }
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn submersion(choice: ModelChoice, a: f64, n: Option<usize>) -> Result<RunReport, CliError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(usage(format!("--a must be positive, got {a}")));
    }
    let mut report = RunReport::new("submersion", vec!["table", "i", "j", "value", "expected", "deviation"]);
    let model = choice.resolve(n)?;
    let data = model.build(a)?;
    let tables = curvature_tables(&data)?;
    let expected = model.expected_tables(a)?;

    report.param("case", choice.tag());
    report.param("a", a);
    report.param("n", data.n);
    report.param("m", data.m);
    let mut max_deviation = 0.0f64;
    for ((name, got), (_, want)) in tables.named().into_iter().zip(expected.named()) {
        for i in 0..got.nrows() {
            for j in 0..got.ncols() {
                let (v, e) = (got[(i, j)], want[(i, j)]);
                let deviation = (v - e).abs();
                max_deviation = max_deviation.max(deviation / e.abs().max(1.0));
                if deviation > TABLE_TOLERANCE * e.abs().max(1.0) {
                    report.violations += 1;
                }
                report.push_row(vec![name.into(), (i + 1).into(), (j + 1).into(), v.into(), e.into(), deviation.into()]);
            }
        }
    }

    let integrand = simons_integrand(model.simons_case(), &data)?;
    let scale = data.a_norm_sq().powi(2).max(1.0);
    report.push_row(vec![
        "integrand".into(),
        Field::Empty,
        Field::Empty,
        integrand.value.into(),
        0.0.into(),
        integrand.value.abs().into(),
    ]);
    report.push_row(vec![
        "raw_integrand".into(),
        Field::Empty,
        Field::Empty,
        integrand.raw.into(),
        Field::Empty,
        Field::Empty,
    ]);
    if integrand.value.abs() > INTEGRAND_TOLERANCE * scale {
        report.violations += 1;
    }
    if !integrand.raw_consistent {
        report.violations += 1;
    }

    report.notes.push(format!("max deviation = {max_deviation:.3e}"));
    report.notes.push(format!(
        "integrand ({}) = {:.3e}, raw = {:.3e}, raw consistent = {}",
        integrand.case.tag(),
        integrand.value,
        integrand.raw,
        integrand.raw_consistent
    ));
    if matches!(model, PointModel::Hopf | PointModel::HopfS3) {
        let off_diag = |t: &nalgebra::DMatrix<f64>| {
            let mut v = Vec::new();
            for i in 0..t.nrows() {
                for j in 0..t.ncols() {
                    if i != j {
                        v.push(t[(i, j)]);
                    }
                }
            }
            v
        };
        let mut total = off_diag(&tables.k_rs);
        total.extend(tables.k_ir.iter().copied());
        total.extend(off_diag(&tables.k_ij));
        let (lo, hi) = range(total.into_iter());
        let (blo, bhi) = range(off_diag(&data.base_sectional).into_iter());
        report.notes.push(format!("total space sectional curvature in [{lo}, {hi}]"));
        report.notes.push(format!("base sectional curvature in [{blo}, {bhi}]"));
    }
    Ok(report)
}
