//! Randomized invariants across the public API, driven by proptest-chosen seeds
//! and dimensions.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use skewbound::canonical::{canonical_form, excess_pairs, lambda_excess, pair_bound, LambdaVector};
use skewbound::compound::{gram_of_commutators, lhs_via_trace, second_compound, standard_gram};
use skewbound::forms::{extremal_tuple, FormKind};
use skewbound::inequality::{
    basis_from_orthogonal, bound_constant, commutator_bound_report, equality_canonicalize, simplex_quadratic,
};
use skewbound::optimize::{kkt_certificate, simplex_maximize, OptimizerConfig};
use skewbound::random::{gaussian_matrix, random_orthogonal, random_skew, random_tuple, trial_rng};
use skewbound::skew::{apply_k_action, coefficients_of, commutator, skew_defect, SkewMatrix};
use skewbound::submersion::{curvature_tables, equality_model_case3, equality_model_case4};

fn rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, 0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutator_stays_skew(seed: u64, n in 2usize..=10) {
        let mut r = rng(seed);
        let (a, b) = (random_skew(n, &mut r), random_skew(n, &mut r));
        let c = commutator(&a, &b).unwrap();
        prop_assert_eq!(skew_defect(c.matrix()), 0.0);
    }

    #[test]
    fn bound_holds(seed: u64, n in 3usize..=8, m in 1usize..=6) {
        let t = random_tuple(n, m, &mut rng(seed));
        let r = commutator_bound_report(&t).unwrap();
        prop_assert!(r.ratio <= bound_constant(n).unwrap() + 1e-9, "ratio {}", r.ratio);
        prop_assert!(r.lhs >= 0.0);
    }

    #[test]
    fn report_is_k_invariant(seed: u64, n in 3usize..=8, m in 1usize..=5) {
        let mut r = rng(seed);
        let t = random_tuple(n, m, &mut r);
        let (p, q) = (random_orthogonal(n, &mut r), random_orthogonal(m, &mut r));
        let moved = apply_k_action(&p, &q, &t).unwrap();
        let (a, b) = (commutator_bound_report(&t).unwrap(), commutator_bound_report(&moved).unwrap());
        prop_assert!(rel(a.rhs, b.rhs) < 1e-9);
        prop_assert!((a.lhs - b.lhs).abs() <= 1e-9 * a.rhs);
        prop_assert!((a.ratio - b.ratio).abs() < 1e-9);
    }

    #[test]
    fn trace_identity(seed: u64, n in 2usize..=8, m in 1usize..=5) {
        let t = random_tuple(n, m, &mut rng(seed));
        let direct = t.commutator_sum();
        let scale = t.norm_sq_sum().powi(2);
        prop_assert!((lhs_via_trace(&t).unwrap() - direct).abs() <= 1e-10 * scale);
    }

    #[test]
    fn canonical_round_trip(seed: u64, n in 1usize..=10) {
        let a = random_skew(n, &mut rng(seed));
        let c = canonical_form(&a).unwrap();
        prop_assert!(c.residual(&a) < 1e-8);
        prop_assert!(c.lambdas.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(c.lambdas.iter().all(|&l| l >= 0.0));
        // λ_k² are the eigenvalues of -A², each twice
        let neg_sq = -(a.matrix() * a.matrix());
        let mut expected: Vec<f64> = neg_sq.symmetric_eigenvalues().iter().copied().collect();
        expected.sort_by(|x, y| y.total_cmp(x));
        for (k, l) in c.lambdas.iter().enumerate() {
            prop_assert!((l * l - expected[2 * k]).abs() < 1e-8 * expected[0].max(1.0));
            prop_assert!((l * l - expected[2 * k + 1]).abs() < 1e-8 * expected[0].max(1.0));
        }
    }

    #[test]
    fn canonical_round_trip_degenerate(seed: u64, n in 4usize..=10, repeat in 2usize..=3) {
        // conjugates of block matrices with repeated λ
        let mut r = rng(seed);
        let blocks = n / 2;
        let lambdas: Vec<f64> = (0..blocks).map(|k| if k < repeat.min(blocks) { 1.5 } else { 0.5 }).collect();
        let d = skewbound::forms::block_diagonal(&lambdas, n);
        let p = random_orthogonal(n, &mut r);
        let a = SkewMatrix::new(&p * d * p.transpose()).unwrap();
        let c = canonical_form(&a).unwrap();
        prop_assert!(c.residual(&a) < 1e-8);
        for (got, want) in c.lambdas.iter().zip(&lambdas) {
            prop_assert!((got - want).abs() < 1e-8);
        }
    }

    #[test]
    fn pair_bound_holds(seed: u64, n in 3usize..=8) {
        let mut r = rng(seed);
        let (a, b) = (random_skew(n, &mut r), random_skew(n, &mut r));
        let p = pair_bound(&a, &b).unwrap();
        prop_assert!(p.residual >= -1e-9 * p.bound.max(1.0));
    }

    #[test]
    fn lambda_excess_bounded(raw in proptest::collection::vec(0.0f64..1.0, 2..=8)) {
        prop_assume!(raw.iter().any(|&v| v > 1e-6));
        let v = LambdaVector::normalized(raw).unwrap();
        let excess = lambda_excess(&v);
        prop_assert!(excess <= 1.0 / 3.0 + 1e-12);
        let pairs = excess_pairs(&v);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            prop_assert_eq!(i, 1);
            prop_assert_eq!(j, k + 2);
        }
        if excess > 1.0 / 3.0 - 1e-6 {
            let l = v.values();
            let dist: f64 = l.iter().enumerate()
                .map(|(k, &x)| (x - if k < 2 { 0.5 } else { 0.0 }).powi(2))
                .sum::<f64>()
                .sqrt();
            prop_assert!(dist < 1e-2);
        }
    }

    #[test]
    fn compound_homomorphism(seed: u64, p in 2usize..=6, q in 2usize..=6, s in 2usize..=6) {
        let mut r = rng(seed);
        let a = gaussian_matrix(p, q, &mut r);
        let b = gaussian_matrix(q, s, &mut r);
        let lhs = second_compound(&(&a * &b)).unwrap().entries;
        let rhs = second_compound(&a).unwrap().entries * second_compound(&b).unwrap().entries;
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        let t = second_compound(&a.transpose()).unwrap().entries;
        prop_assert!((t - second_compound(&a).unwrap().entries.transpose()).norm() <= 1e-12);
    }

    #[test]
    fn gram_transformation_law(seed: u64, n in 3usize..=6, m in 2usize..=5) {
        let t = random_tuple(n, m, &mut rng(seed));
        let b = coefficients_of(&t);
        let c_b = gram_of_commutators(t.members()).unwrap().entries;
        let phi = second_compound(&b).unwrap().entries;
        let phi_t = second_compound(&b.transpose()).unwrap().entries;
        let law = phi_t * standard_gram(n).unwrap().entries * phi;
        prop_assert!((&c_b - &law).norm() <= 1e-8 * c_b.norm().max(1.0));
    }

    #[test]
    fn simplex_rows_and_excess(seed: u64, n in 3usize..=6) {
        let mut r = rng(seed);
        let q = random_orthogonal(n * (n - 1) / 2, &mut r);
        let sq = simplex_quadratic(n, &q).unwrap();
        for alpha in 1..=sq.len() {
            prop_assert!((sq.row_sum(alpha).unwrap() - (n as f64 - 2.0)).abs() < 1e-9);
            for _ in 0..10 {
                let subset: Vec<usize> = (1..=sq.len()).filter(|&b| b != alpha && r.random_bool(0.5)).collect();
                prop_assert!(sq.excess_row_sum(alpha, &subset).unwrap() <= 2.0 / 3.0 + 1e-9);
            }
        }
    }

    #[test]
    fn deficit_negative_inside_simplex_at_identity(seed: u64, n in 4usize..=6) {
        let big_n = n * (n - 1) / 2;
        let sq = simplex_quadratic(n, &DMatrix::identity(big_n, big_n)).unwrap();
        let eps = 1e-3;
        let mut x = skewbound::random::random_simplex_point(big_n, &mut rng(seed));
        // mix with the barycenter so every coordinate is at least ε
        let w = 1.0 - eps * big_n as f64;
        x.iter_mut().for_each(|v| *v = w * *v + eps);
        prop_assert!(sq.deficit(&x).unwrap() < 0.0);
    }

    #[test]
    fn equality_round_trip(seed: u64, n in 3usize..=7, m in 3usize..=5, lambda in 0.1f64..3.0) {
        let mut r = rng(seed);
        let base = extremal_tuple(FormKind::for_dim(n), lambda, n, m).unwrap();
        let (p, q) = (random_orthogonal(n, &mut r), random_orthogonal(m, &mut r));
        let t = apply_k_action(&p, &q, &base).unwrap();
        let form = equality_canonicalize(&t).unwrap();
        prop_assert!(form.is_some());
        let form = form.unwrap();
        prop_assert!(form.residual < 1e-6);
        prop_assert!((form.lambda - lambda).abs() < 1e-6 * lambda.max(1.0));
    }

    #[test]
    fn basis_from_orthogonal_is_orthonormal(seed: u64, n in 2usize..=6) {
        let big_n = n * (n - 1) / 2;
        let q = random_orthogonal(big_n, &mut rng(seed));
        let basis = basis_from_orthogonal(n, &q).unwrap();
        for (a, x) in basis.iter().enumerate() {
            for (b, y) in basis.iter().enumerate() {
                let ip = skewbound::skew::frobenius_inner(x, y).unwrap();
                let delta = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ip - delta).abs() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simplex_maximum_is_nonpositive_and_stationary(seed: u64, n in 3usize..=5) {
        let big_n = n * (n - 1) / 2;
        let q = random_orthogonal(big_n, &mut rng(seed));
        let sq = simplex_quadratic(n, &q).unwrap();
        let cfg = OptimizerConfig { seed, restarts: 4, ..OptimizerConfig::default() };
        let opt = simplex_maximize(&sq, &cfg).unwrap();
        prop_assert!(opt.value <= 1e-9);
        prop_assert!((opt.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let kkt = kkt_certificate(&sq, &opt.x).unwrap();
        prop_assert!(kkt.max_violation < 1e-5, "violation {}", kkt.max_violation);
        let again = simplex_maximize(&sq, &cfg).unwrap();
        prop_assert_eq!(opt.x, again.x);
    }

    #[test]
    fn equality_models_scale_linearly(a in 0.1f64..5.0, n in 4usize..=7) {
        for (one, scaled) in [
            (equality_model_case3(1.0).unwrap(), equality_model_case3(a).unwrap()),
            (equality_model_case4(1.0, n).unwrap(), equality_model_case4(a, n).unwrap()),
        ] {
            prop_assert!((scaled.a_norm_sq() - a * one.a_norm_sq()).abs() < 1e-12 * a.max(1.0) * one.a_norm_sq());
            let (t1, ta) = (curvature_tables(&one).unwrap(), curvature_tables(&scaled).unwrap());
            for ((_, x), (_, y)) in t1.named().into_iter().zip(ta.named()) {
                prop_assert!((x * a - y).norm() <= 1e-12 * a.max(1.0) * x.norm().max(1.0));
            }
        }
    }
}
