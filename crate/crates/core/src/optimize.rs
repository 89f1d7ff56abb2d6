//! Numerical sharpness checks: maximising the simplex quadratic for a fixed
//! basis, KKT certificates at simplex points, and multi-restart ascent of the
//! tuple ratio `Σ‖[B_r, B_s]‖² / (Σ‖B_r‖²)²`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::inequality::{bound_constant, commutator_bound_report, SimplexQuadratic};
use crate::random::{random_simplex_point, random_tuple, trial_rng};
use crate::skew::{coefficients_of, tuple_from_coefficients};
use crate::{Error, Result, SkewMatrix, SkewTuple};

/// Coordinates above this value count as the support of a simplex point.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;
/// Slack allowed above `d(n)` before an iterate is reported as a violation.
pub const BOUND_SLACK: f64 = 1e-9;
/// Initial step of the tuple-space ascent.
pub const INITIAL_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stops a run once the iterate moves (simplex) or the Riemannian gradient
    /// (tuple ascent) falls below this size.
    pub step_tolerance: f64,
    /// Relative objective gain under which a run is considered stalled.
    pub value_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 0,
            restarts: 32,
            max_iterations: 10_000,
            step_tolerance: 1e-10,
            value_tolerance: 1e-10,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::invalid("restarts and max_iterations must be positive"));
        }
        if !(self.step_tolerance > 0.0 && self.value_tolerance > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// The best run stopped on its tolerance rather than on the iteration budget.
    pub converged: bool,
    pub restart: usize,
}

/// Euclidean projection onto `{x ≥ 0, Σx = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&u| (u - theta).max(0.0)).collect()
}

fn objective(sq: &SimplexQuadratic, x: &[f64]) -> f64 {
    let s: f64 = x.iter().sum();
    sq.quadratic(x) - sq.d * s * s
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|a| (0..m.ncols()).map(|b| m[(a, b)] * x[b]).sum())
        .collect()
}

/// Maximises `f(x) = xᵗMx - d(Σx)²` over the probability simplex.
///
/// Each restart runs replicator updates `x ← x ∘ (Px) / xᵗPx` on the payoff
/// `P = M + c𝟙𝟙ᵗ`, `c = 1 + max|M|` (constant on the simplex, so maximisers are
/// unchanged), then polishes with projected gradient ascent. Restart 0 starts at
/// the barycentre, the others at random interior points. The best value wins,
/// lowest restart index on ties.
pub fn simplex_maximize(sq: &SimplexQuadratic, cfg: &OptimizerConfig) -> Result<SimplexOptimum> {
    cfg.validate()?;
    if sq.is_empty() {
        return Err(Error::invalid("empty simplex quadratic"));
    }
    let runs: Vec<SimplexOptimum> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let len = sq.len();
            let start = if k == 0 {
                vec![1.0 / len as f64; len]
            } else {
                random_simplex_point(len, &mut trial_rng(cfg.seed, k as u64))
            };
            simplex_run(sq, cfg, start, k)
        })
        .collect();
    Ok(runs
        .into_iter()
        .reduce(|best, r| if r.value > best.value { r } else { best })
        .expect("at least one restart"))
}

fn simplex_run(sq: &SimplexQuadratic, cfg: &OptimizerConfig, mut x: Vec<f64>, restart: usize) -> SimplexOptimum {
    let len = x.len();
    let c = 1.0 + sq.m.amax();
    let payoff = sq.m.map(|v| v + c);
    let warm_budget = cfg.max_iterations / 2;
    let mut iterations = 0;

    while iterations < warm_budget {
        iterations += 1;
        let px = mat_vec(&payoff, &x);
        let mean: f64 = x.iter().zip(&px).map(|(a, b)| a * b).sum();
        let mut next: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a * b / mean).collect();
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= s);
        let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if moved < cfg.step_tolerance {
            break;
        }
    }

    let mut value = objective(sq, &x);
    let mut step = 1.0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let grad: Vec<f64> = mat_vec(&sq.m, &x).into_iter().map(|g| 2.0 * g).collect();
        let mut accepted = None;
        let mut t = step;
        while t > 1e-16 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + t * g).collect();
            let y = project_to_simplex(&trial);
            let fy = objective(sq, &y);
            if fy >= value {
                accepted = Some((y, fy, t));
                break;
            }
            t *= 0.5;
        }
        let Some((y, fy, t)) = accepted else {
            converged = true;
            break;
        };
        let moved: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        value = fy;
        step = (2.0 * t).min(1.0);
        if moved < cfg.step_tolerance * len as f64 {
            converged = true;
            break;
        }
    }
    SimplexOptimum {
        x,
        value,
        iterations,
        converged,
        restart,
    }
}

/// Stationarity data at a simplex point: on the support the values
/// `g_α = (Mx)_α - d Σx` share a common value `a`, off the support they stay below it.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    /// Mean of `g_α` over the support.
    pub active_value: f64,
    /// 1-based support indices.
    pub support: Vec<usize>,
    /// `(α, g_α)` for the coordinates outside the support (1-based).
    pub inactive_values: Vec<(usize, f64)>,
    /// `max(max_{support} |g_α - a|, max_{off support} (g_α - a)⁺)`.
    pub max_violation: f64,
}

pub fn kkt_certificate(sq: &SimplexQuadratic, x: &[f64]) -> Result<KktCertificate> {
    sq.deficit(x)?;
    let s: f64 = x.iter().sum();
    let g: Vec<f64> = mat_vec(&sq.m, x).into_iter().map(|v| v - sq.d * s).collect();
    let support: Vec<usize> = (0..x.len()).filter(|&a| x[a] > SUPPORT_THRESHOLD).collect();
    if support.is_empty() {
        return Err(Error::invalid("point has empty support"));
    }
    let active_value = support.iter().map(|&a| g[a]).sum::<f64>() / support.len() as f64;
    let mut max_violation: f64 = 0.0;
    for &a in &support {
        max_violation = max_violation.max((g[a] - active_value).abs());
    }
    let inactive_values: Vec<(usize, f64)> = (0..x.len())
        .filter(|&a| x[a] <= SUPPORT_THRESHOLD)
        .map(|a| (a + 1, g[a]))
        .collect();
    for &(_, b) in &inactive_values {
        max_violation = max_violation.max(b - active_value);
    }
    Ok(KktCertificate {
        active_value,
        support: support.into_iter().map(|a| a + 1).collect(),
        inactive_values,
        max_violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessResult {
    /// Best tuple found, normalised to `Σ‖B_r‖² = 1`.
    pub tuple: SkewTuple,
    pub ratio: f64,
    pub d: f64,
    /// Final ratio of each restart.
    pub restart_ratios: Vec<f64>,
    /// Best ratio over restarts `0..=k`, indexed by `k`.
    pub history: Vec<f64>,
    pub restart: usize,
    pub iterations: usize,
    /// Set when `m < 3`: the extremal triples do not fit and the supremum may not be reached.
    pub warning: Option<String>,
}

struct AscentRun {
    coefficients: Vec<DMatrix<f64>>,
    ratio: f64,
    iterations: usize,
}

/// Multi-restart projected gradient ascent of the ratio on `Σ‖B_r‖² = 1`.
///
/// Every accepted iterate is checked against `d(n) + 1e-9`; exceeding it is
/// reported as [`Error::NumericFailure`] since it would contradict the bound.
pub fn sharpness_search(n: usize, m: usize, cfg: &OptimizerConfig) -> Result<SharpnessResult> {
    cfg.validate()?;
    let d = bound_constant(n)?;
    if m == 0 {
        return Err(Error::invalid("need at least one member"));
    }
    let runs: Vec<AscentRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let start = random_tuple(n, m, &mut trial_rng(cfg.seed, k as u64));
            ascend(start, d, cfg)
        })
        .collect::<Result<_>>()?;

    let mut history = Vec::with_capacity(runs.len());
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.ratio > runs[best].ratio {
            best = k;
        }
        history.push(runs[best].ratio);
    }
    let run = &runs[best];
    let members = run
        .coefficients
        .iter()
        .map(|b| SkewMatrix::new(b.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SharpnessResult {
        tuple: SkewTuple::new(members)?,
        ratio: run.ratio,
        d,
        restart_ratios: runs.iter().map(|r| r.ratio).collect(),
        history,
        restart: best,
        iterations: run.iterations,
        warning: (m < 3).then(|| {
            format!("m = {m} < 3: the extremal configurations need three nonzero members")
        }),
    })
}

fn normalize(bs: &mut [DMatrix<f64>]) {
    let s: f64 = bs.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
    bs.iter_mut().for_each(|b| *b /= s);
}

fn bracket(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y - y * x
}

/// `Σ_{r,s} ‖[B_r, B_s]‖²` and the commutators `[B_r, B_s]`, `r < s`.
fn value_and_brackets(bs: &[DMatrix<f64>]) -> (f64, Vec<Vec<DMatrix<f64>>>) {
    let m = bs.len();
    let mut brackets = vec![Vec::with_capacity(m); m];
    let mut total = 0.0;
    for r in 0..m {
        for s in 0..m {
            if s > r {
                let c = bracket(&bs[r], &bs[s]);
                total += 2.0 * c.norm_squared();
                brackets[r].push(c);
            } else {
                brackets[r].push(DMatrix::zeros(0, 0));
            }
        }
    }
    (total, brackets)
}

fn ascend(start: SkewTuple, d: f64, cfg: &OptimizerConfig) -> Result<AscentRun> {
    let m = start.len();
    let mut bs: Vec<DMatrix<f64>> = start.into_members().into_iter().map(SkewMatrix::into_matrix).collect();
    normalize(&mut bs);
    let (mut value, mut brackets) = value_and_brackets(&bs);
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        // Euclidean gradient 4 Σ_s [B_s, [B_r, B_s]]; ⟨G, B⟩ = 4f by homogeneity
        let mut grad: Vec<DMatrix<f64>> = (0..m)
            .map(|r| {
                let mut g = DMatrix::zeros(bs[r].nrows(), bs[r].ncols());
                for s in 0..m {
                    if s == r {
                        continue;
                    }
                    let c = if r < s { brackets[r][s].clone() } else { -&brackets[s][r] };
                    g += bracket(&bs[s], &c) * 4.0;
                }
                g
            })
            .collect();
        for (g, b) in grad.iter_mut().zip(&bs) {
            *g -= b * (4.0 * value);
        }
        let grad_norm = grad.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if grad_norm < cfg.step_tolerance {
            break;
        }

        let mut t = INITIAL_STEP;
        let mut accepted = None;
        while t > 1e-16 {
            let mut trial: Vec<DMatrix<f64>> = bs.iter().zip(&grad).map(|(b, g)| b + g * t).collect();
            normalize(&mut trial);
            let (v, br) = value_and_brackets(&trial);
            if v > value {
                accepted = Some((trial, v, br));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, v, br)) = accepted else {
            break;
        };
        if v > d + BOUND_SLACK {
            return Err(Error::NumericFailure(format!(
                "ratio {v} exceeds the bound {d} during ascent"
            )));
        }
        bs = trial;
        value = v;
        brackets = br;
    }
    Ok(AscentRun {
        coefficients: bs,
        ratio: value,
        iterations,
    })
}

/// Snaps a near-extremal tuple onto an exact rank-3 configuration: keeps the top
/// three singular directions of the coefficient matrix and equalises their
/// singular values. `None` for fewer than three members or a zero tuple.
pub fn round_to_extremal(t: &SkewTuple) -> Result<Option<SkewTuple>> {
    if t.len() < 3 || t.norm_sq_sum() == 0.0 {
        return Ok(None);
    }
    let b = coefficients_of(t);
    let svd = b.clone().svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::NumericFailure("SVD did not return singular vectors".into()));
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let top = &order[..3.min(order.len())];
    if top.len() < 3 {
        return Ok(None);
    }
    let sigma = (top.iter().map(|&k| svd.singular_values[k].powi(2)).sum::<f64>() / 3.0).sqrt();
    let mut snapped = DMatrix::zeros(b.nrows(), b.ncols());
    for &k in top {
        snapped += u.column(k) * v_t.row(k) * sigma;
    }
    let rounded = tuple_from_coefficients(t.dim(), &snapped)?;
    let scale = (t.norm_sq_sum() / rounded.norm_sq_sum()).sqrt();
    Ok(Some(rounded.scale(scale)))
}

/// Report on the rounded optimum; `None` when rounding is impossible.
pub fn rounded_ratio(t: &SkewTuple) -> Result<Option<f64>> {
    match round_to_extremal(t)? {
        Some(r) => Ok(Some(commutator_bound_report(&r)?.ratio)),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::simplex_quadratic;
    use approx::assert_abs_diff_eq;

    fn small_cfg() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 8,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn projection_onto_simplex() {
        assert_eq!(project_to_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_to_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_to_simplex(&[0.5, 0.5, 0.5]);
        for v in p {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn n3_maximum_is_the_barycentre() {
        let sq = simplex_quadratic(3, &DMatrix::identity(3, 3)).unwrap();
        let opt = simplex_maximize(&sq, &small_cfg()).unwrap();
        assert_abs_diff_eq!(opt.value, 0.0, epsilon = 1e-10);
        for v in &opt.x {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-5);
        }
        let cert = kkt_certificate(&sq, &opt.x).unwrap();
        assert!(cert.max_violation < 1e-5);
    }

    #[test]
    fn n4_maximum_is_negative_and_beats_a_grid() {
        let sq = simplex_quadratic(4, &DMatrix::identity(6, 6)).unwrap();
        let opt = simplex_maximize(&sq, &small_cfg()).unwrap();
        assert!(opt.value < 0.0);
        assert_abs_diff_eq!(opt.x.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(opt.x.iter().all(|&v| v >= 0.0));
        let grid = grid_max(&sq, 20);
        assert!(opt.value >= grid - 1e-10, "{} vs grid {}", opt.value, grid);
        let cert = kkt_certificate(&sq, &opt.x).unwrap();
        assert!(cert.max_violation < 1e-5);
        assert_abs_diff_eq!(cert.active_value, opt.value, epsilon = 1e-8);
    }

    /// Best value over the lattice `{k/res}` on the simplex.
    fn grid_max(sq: &SimplexQuadratic, res: usize) -> f64 {
        fn rec(sq: &SimplexQuadratic, res: usize, x: &mut Vec<f64>, left: usize, best: &mut f64) {
            if x.len() + 1 == sq.len() {
                x.push(left as f64 / res as f64);
                *best = best.max(sq.deficit(x).unwrap());
                x.pop();
                return;
            }
            for k in 0..=left {
                x.push(k as f64 / res as f64);
                rec(sq, res, x, left - k, best);
                x.pop();
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(sq, res, &mut Vec::new(), res, &mut best);
        best
    }

    #[test]
    fn zero_form_gives_minus_d() {
        let mut sq = simplex_quadratic(4, &DMatrix::identity(6, 6)).unwrap();
        sq.m.fill(0.0);
        let opt = simplex_maximize(&sq, &small_cfg()).unwrap();
        assert_abs_diff_eq!(opt.value, -2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn kkt_examples() {
        let sq = simplex_quadratic(3, &DMatrix::identity(3, 3)).unwrap();
        let cert = kkt_certificate(&sq, &[1.0 / 3.0; 3]).unwrap();
        assert_abs_diff_eq!(cert.active_value, 0.0, epsilon = 1e-15);
        assert!(cert.max_violation < 1e-15);

        let cert = kkt_certificate(&sq, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(cert.support, vec![1]);
        assert_abs_diff_eq!(cert.active_value, -1.0 / 3.0, epsilon = 1e-15);
        // off-support values 1/2 - 1/3 exceed a = -1/3: the vertex is not stationary
        assert_abs_diff_eq!(cert.max_violation, 0.5, epsilon = 1e-15);

        let cert = kkt_certificate(&sq, &[0.2, 0.3, 0.5]).unwrap();
        assert!(cert.max_violation > 0.0);
        assert!(kkt_certificate(&sq, &[0.0; 3]).is_err());
    }

    #[test]
    fn simplex_runs_are_deterministic() {
        let q = crate::random::random_orthogonal(6, &mut trial_rng(4, 4));
        let sq = simplex_quadratic(4, &q).unwrap();
        let a = simplex_maximize(&sq, &small_cfg()).unwrap();
        let b = simplex_maximize(&sq, &small_cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sharpness_small_cases() {
        let cfg = small_cfg();
        let r = sharpness_search(3, 3, &cfg).unwrap();
        assert!(r.ratio >= 1.0 / 3.0 - 1e-3);
        assert!(r.ratio <= 1.0 / 3.0 + BOUND_SLACK);
        assert!(r.history.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.warning.is_none());

        let r = sharpness_search(3, 2, &cfg).unwrap();
        assert!(r.warning.is_some());
        assert!(sharpness_search(2, 3, &cfg).is_err());
    }

    #[test]
    fn rounding_keeps_extremal_tuples() {
        let t = crate::forms::extremal_tuple(crate::forms::FormKind::Quaternion, 0.5, 5, 4).unwrap();
        let r = round_to_extremal(&t).unwrap().unwrap();
        assert!(r.distance(&t).unwrap() < 1e-12);
        let two = SkewTuple::zeros(4, 2).unwrap();
        assert!(round_to_extremal(&two).unwrap().is_none());
    }
}
