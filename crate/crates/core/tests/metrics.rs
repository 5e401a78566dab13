mod common;

use common::oracle;
use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triad_core::eval::{
    average_precision, binary_auc, bootstrap_ci, classification_metrics, ece, mcnemar, pr_auc_dropout, roc_auc_ovr,
};

const COUNT_TOL: f64 = 1e-9;
const AUC_TOL: f64 = 1e-6;

fn check_instance(y: &[usize], p: &Array2<f64>) {
    let m = classification_metrics(y, p.view()).unwrap();
    assert!((m.accuracy - oracle::accuracy(y, p.view())).abs() < COUNT_TOL, "accuracy {y:?}");
    assert!((m.macro_f1 - oracle::macro_f1(y, p.view())).abs() < COUNT_TOL, "macro-F1 {y:?}");
    let (e, _) = ece(y, p.view(), 10).unwrap();
    assert!((e - oracle::ece(y, p.view(), 10)).abs() < COUNT_TOL, "ECE {y:?} {p:?}");
    match (roc_auc_ovr(y, p.view()), oracle::auc_ovr(y, p.view())) {
        (Ok(a), Some(b)) => assert!((a - b).abs() < AUC_TOL, "AUC {y:?}"),
        (Err(_), None) => {}
        (a, b) => panic!("AUC definedness differs: {a:?} vs {b:?} on {y:?}"),
    }
    match (pr_auc_dropout(y, p.view()), oracle::pr_auc_dropout(y, p.view())) {
        (Ok(a), Some(b)) => assert!((a - b).abs() < AUC_TOL, "AP {y:?}"),
        (Err(_), None) => {}
        (a, b) => panic!("AP definedness differs: {a:?} vs {b:?}"),
    }
}

/// Row with argmax `k` and a confidence taken from a coarse grid.
fn row_for(k: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let top = rng.random_range(4..=10) as f64 / 10.0;
    let rest = 1.0 - top;
    let split = rng.random_range(0..=2) as f64 / 4.0;
    let mut r = [rest * split, rest * (1.0 - split), 0.0];
    r.rotate_right(k + 1);
    r[k] = top;
    r
}

fn digits(mut v: usize, base: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = v % base;
            v /= base;
            d
        })
        .collect()
}

#[test]
fn exhaustive_small_cases_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut instances = 0;
    // Every (label, predicted class) pattern up to n = 5.
    for n in 1..=5usize {
        for code in 0..9usize.pow(n as u32) {
            let pairs = digits(code, 9, n);
            let y: Vec<usize> = pairs.iter().map(|d| d % 3).collect();
            let mut p = Array2::zeros((n, 3));
            for (i, d) in pairs.iter().enumerate() {
                let r = row_for(d / 3, &mut rng);
                for c in 0..3 {
                    p[[i, c]] = r[c];
                }
            }
            check_instance(&y, &p);
            instances += 1;
        }
    }
    // Every label vector for n = 6..=8, scores on a tie-heavy grid.
    for n in 6..=8usize {
        for code in 0..3usize.pow(n as u32) {
            let y = digits(code, 3, n);
            check_instance(&y, &oracle::random_probs(&mut rng, n, true));
            instances += 1;
        }
    }
    assert!(instances > 60_000);
}

#[test]
fn random_instances_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..100 {
        let y: Vec<usize> = (0..50).map(|_| rng.random_range(0..3)).collect();
        check_instance(&y, &oracle::random_probs(&mut rng, 50, i % 2 == 0));
    }
}

#[test]
fn ece_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    // Perfect confident predictions.
    let y: Vec<usize> = (0..40).map(|_| rng.random_range(0..3)).collect();
    let mut p = Array2::zeros((40, 3));
    for (i, &t) in y.iter().enumerate() {
        p[[i, t]] = 1.0;
    }
    assert_eq!(ece(&y, p.view(), 10).unwrap().0, 0.0);
    // One bin: |mean confidence - accuracy|.
    for _ in 0..50 {
        let n = rng.random_range(1..60);
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let p = oracle::random_probs(&mut rng, n, false);
        let conf: f64 = (0..n).map(|i| p[[i, oracle::pred(p.view(), i)]]).sum::<f64>() / n as f64;
        let want = (conf - oracle::accuracy(&y, p.view())).abs();
        assert!((ece(&y, p.view(), 1).unwrap().0 - want).abs() < 1e-12);
    }
}

#[test]
fn mcnemar_reference_case() {
    let m = mcnemar(78, 23).unwrap();
    assert!((m.chi2 - 29.95).abs() < 0.01, "{}", m.chi2);
    assert!(m.p_value < 0.001);
    assert!(mcnemar(0, 0).is_err());
    // Symmetric in b and c.
    assert_eq!(mcnemar(5, 9).unwrap().chi2, mcnemar(9, 5).unwrap().chi2);
}

#[test]
fn bootstrap_contains_point_estimate_and_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let y: Vec<usize> = (0..200).map(|_| rng.random_range(0..3)).collect();
    let p = oracle::random_probs(&mut rng, 200, false);
    let acc = |y: &[usize], p: ndarray::ArrayView2<f64>| oracle::accuracy(y, p);
    let a = bootstrap_ci(acc, &y, p.view(), 500, 0.05, 3).unwrap();
    let b = bootstrap_ci(acc, &y, p.view(), 500, 0.05, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.contains(oracle::accuracy(&y, p.view())));
    assert!(a.lo < a.hi);
    let c = bootstrap_ci(acc, &y, p.view(), 500, 0.05, 4).unwrap();
    assert_ne!(a, c);
}

proptest! {
    #[test]
    fn metrics_are_permutation_invariant(
        seed in any::<u64>(),
        n in 2usize..60,
        perm_seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let p = oracle::random_probs(&mut rng, n, seed % 2 == 0);
        let mut order: Vec<usize> = (0..n).collect();
        let mut prng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..n).rev() {
            order.swap(i, prng.random_range(0..=i));
        }
        let y2: Vec<usize> = order.iter().map(|&i| y[i]).collect();
        let p2 = p.select(Axis(0), &order);
        let (m1, m2) = (classification_metrics(&y, p.view()).unwrap(), classification_metrics(&y2, p2.view()).unwrap());
        prop_assert_eq!(m1.confusion, m2.confusion);
        prop_assert!((m1.macro_f1 - m2.macro_f1).abs() < 1e-12);
        prop_assert!((ece(&y, p.view(), 10).unwrap().0 - ece(&y2, p2.view(), 10).unwrap().0).abs() < 1e-12);
        if let (Ok(a), Ok(b)) = (roc_auc_ovr(&y, p.view()), roc_auc_ovr(&y2, p2.view())) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        if let (Ok(a), Ok(b)) = (pr_auc_dropout(&y, p.view()), pr_auc_dropout(&y2, p2.view())) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_scores_match_pair_counting(
        scores in prop::collection::vec(0u8..6, 1..40),
        labels in prop::collection::vec(any::<bool>(), 40),
    ) {
        let s: Vec<f64> = scores.iter().map(|v| *v as f64 / 5.0).collect();
        let pos = &labels[..s.len()];
        match (binary_auc(&s, pos), oracle::auc(&s, pos)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
        match (average_precision(&s, pos), oracle::average_precision(&s, pos)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn metrics_are_bounded(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let p = oracle::random_probs(&mut rng, n, false);
        let m = classification_metrics(&y, p.view()).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.accuracy) && (0.0..=1.0).contains(&m.macro_f1));
        let e = ece(&y, p.view(), 10).unwrap().0;
        prop_assert!((0.0..=1.0).contains(&e));
    }
}
