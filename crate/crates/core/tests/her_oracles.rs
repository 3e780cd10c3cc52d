mod common;

use common::{exhaustive, naive_v_moments, naive_w_mean_cubic, naive_w_moments, random_matrix, rel_err};
use degree_gof::graph::Graph;
use degree_gof::her_moments::{
    v_moments_er, v_moments_her, v_statistic, w_moments_her, w_moments_null, w_statistic, HerContext,
};
use degree_gof::models::ProbMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn exhaustive_enumeration_n4_and_n5() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [4, 5] {
        for _ in 0..3 {
            let p = random_matrix(n, &mut rng);
            let p0 = random_matrix(n, &mut rng);
            let ctx = HerContext::new(p.clone(), p0.clone()).unwrap();
            let (m, v) = exhaustive(&p, |g| w_statistic(g, &p0).unwrap());
            let w = w_moments_her(&ctx);
            assert!(rel_err(w.mean, m) < 1e-10 && rel_err(w.variance, v) < 1e-10, "{w:?} vs {m} {v}");

            let (m, v) = exhaustive(&p0, |g| w_statistic(g, &p0).unwrap());
            let w = w_moments_null(&p0);
            assert!(rel_err(w.mean, m) < 1e-10 && rel_err(w.variance, v) < 1e-10);

            let (m, v) = exhaustive(&p, v_statistic);
            let dv = v_moments_her(&p);
            assert!(rel_err(dv.mean, m) < 1e-10 && rel_err(dv.variance, v) < 1e-10);
        }
    }
}

#[test]
fn naive_quadratic_forms_agree_with_enumeration() {
    // Checks the reference itself on a case small enough to enumerate.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = random_matrix(5, &mut rng);
    let mu = [1.0, 2.5, 0.0, 3.0, 1.2];
    let (m, v) = exhaustive(&p, |g| {
        g.degrees().iter().zip(&mu).map(|(&d, m)| (d as f64 - m).powi(2)).sum::<f64>() / 5.0
    });
    let (nm, nv) = naive_w_moments(&p, &mu);
    assert!(rel_err(m, nm) < 1e-12 && rel_err(v, nv) < 1e-12);
    let (m, v) = exhaustive(&p, v_statistic);
    let (nm, nv) = naive_v_moments(&p);
    assert!(rel_err(m, nm) < 1e-12 && rel_err(v, nv) < 1e-12);
}

#[test]
fn fast_algebra_matches_naive_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for n in [5, 10, 30] {
        for _ in 0..5 {
            let p = random_matrix(n, &mut rng);
            let p0 = random_matrix(n, &mut rng);
            let w = w_moments_her(&HerContext::new(p.clone(), p0.clone()).unwrap());
            let (m, v) = naive_w_moments(&p, &p0.row_sums());
            assert!(rel_err(w.mean, m) < 1e-10 && rel_err(w.variance, v) < 1e-10, "n = {n}");
            assert!(rel_err(w.mean, naive_w_mean_cubic(&p, &p0)) < 1e-10);
            let dv = v_moments_her(&p);
            let (m, v) = naive_v_moments(&p);
            assert!(rel_err(dv.mean, m) < 1e-10 && rel_err(dv.variance, v) < 1e-10, "n = {n}");
        }
    }
}

#[test]
fn er_closed_form_small_case() {
    let m = v_moments_er(3, 0.5);
    assert!((m.mean - 1.0 / 6.0).abs() < 1e-15);
    assert!((m.variance - 1.0 / 108.0).abs() < 1e-15);
}

fn matrix_strategy(max_n: usize) -> impl Strategy<Value = ProbMatrix> {
    (3..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.0..=1.0f64, n * (n - 1) / 2).prop_map(move |u| ProbMatrix::from_upper(n, u).unwrap())
    })
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |flags| {
            let pairs: Vec<_> = degree_gof::graph::pairs(n).collect();
            Graph::from_edges(n, flags.iter().zip(pairs).filter(|(f, _)| **f).map(|(_, e)| e))
        })
    })
}

proptest! {
    #[test]
    fn moments_are_finite_and_nonnegative(p in matrix_strategy(12), q in 0.0..=1.0f64) {
        let null = w_moments_null(&p);
        prop_assert!(null.mean >= 0.0 && null.variance >= 0.0);
        let v = v_moments_her(&p);
        prop_assert!(v.mean >= -1e-12 && v.variance >= 0.0);
        let er = ProbMatrix::constant(p.n(), q).unwrap();
        let ctx = HerContext::new(p.clone(), er).unwrap();
        let w = w_moments_her(&ctx);
        prop_assert!(w.mean.is_finite() && w.variance >= 0.0);
    }

    #[test]
    fn er_closed_form_matches_general(n in 3usize..60, p in 0.0..=1.0f64) {
        let a = v_moments_er(n, p);
        let b = v_moments_her(&ProbMatrix::constant(n, p).unwrap());
        prop_assert!((a.mean - b.mean).abs() <= 1e-12 * a.mean.abs().max(1.0));
        prop_assert!((a.variance - b.variance).abs() <= 1e-12 * a.variance.abs().max(1.0));
    }

    #[test]
    fn degree_variance_minimises_constant_centring(g in graph_strategy(15), q in 0.0..=1.0f64) {
        // V centres at the mean degree, which minimises the mean square.
        let er = ProbMatrix::constant(g.n(), q).unwrap();
        prop_assert!(v_statistic(&g) <= w_statistic(&g, &er).unwrap() + 1e-12);
    }

    #[test]
    fn mean_exceeds_null_mean_under_misspecification(p in matrix_strategy(10)) {
        // E_p W_{p0} - E_{p0} W_{p0} is sum_i Delta_i^2 / n + (sigma terms), and equals
        // the null mean when p = p0.
        let ctx = HerContext::new(p.clone(), p.clone()).unwrap();
        let a = w_moments_her(&ctx);
        let b = w_moments_null(&p);
        prop_assert!((a.mean - b.mean).abs() <= 1e-12 * b.mean.max(1.0));
        prop_assert!((a.variance - b.variance).abs() <= 1e-12 * b.variance.max(1.0));
    }
}
