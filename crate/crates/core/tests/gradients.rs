use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triad_core::fusion::{focal_grad_logits, focal_loss, focal_term, TriadConfig, TriadModel};
use triad_core::models::{LogisticModel, MlpConfig, MlpModel};
use triad_core::nn::{cross_entropy, softmax_rows};

const EPS: f64 = 1e-5;
const MAX_REL: f64 = 1e-4;

fn central_differences(p: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len());
    let mut q = p.to_vec();
    for i in 0..p.len() {
        q[i] = p[i] + EPS;
        let up = f(&q);
        q[i] = p[i] - EPS;
        let down = f(&q);
        q[i] = p[i];
        out.push((up - down) / (2.0 * EPS));
    }
    out
}

fn rel_err(a: &[f64], n: &[f64]) -> f64 {
    a.iter()
        .zip(n)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

fn batch(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, d), || rng.random_range(-1.5..1.5))
}

fn labels(rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..4).map(|_| rng.random_range(0..3)).collect()
}

#[test]
fn focal_reference_value() {
    assert!((focal_term(0.5, 2.0) - 0.25 * std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn focal_with_zero_gamma_is_cross_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n = rng.random_range(1..32);
        let p = softmax_rows(&batch(&mut rng, n, 3).mapv(|v| v * 3.0));
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let ce = -(0..n).map(|i| p[[i, y[i]]].ln()).sum::<f64>() / n as f64;
        assert!((focal_loss(&p, &y, 0.0, &[1.0; 3]) - ce).abs() < 1e-9);
        assert!((cross_entropy(&p, &y) - ce).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn focal_logit_gradient(seed in any::<u64>(), gamma in prop::sample::select(vec![0.0, 0.5, 1.0, 2.0, 3.0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = batch(&mut rng, 4, 3);
        let y = labels(&mut rng);
        let alpha = [0.7, 1.4, 2.1];
        let g = focal_grad_logits(&softmax_rows(&z), &y, gamma, &alpha);
        let flat: Vec<f64> = z.iter().copied().collect();
        let num = central_differences(&flat, |q| {
            let zz = Array2::from_shape_vec((4, 3), q.to_vec()).unwrap();
            focal_loss(&softmax_rows(&zz), &y, gamma, &alpha)
        });
        let analytic: Vec<f64> = g.iter().copied().collect();
        prop_assert!(rel_err(&analytic, &num) < MAX_REL);
    }

    #[test]
    fn logistic_gradient(seed in any::<u64>(), d in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = batch(&mut rng, 4, d);
        let y = labels(&mut rng);
        let m = LogisticModel::random(d, 0.05, seed);
        let (_, g) = m.loss_and_grad(x.view(), &y);
        let num = central_differences(&m.params(), |p| {
            let mut mm = m.clone();
            mm.set_params(p);
            mm.loss(x.view(), &y)
        });
        prop_assert!(rel_err(&g, &num) < MAX_REL, "{}", rel_err(&g, &num));
    }

    #[test]
    fn mlp_gradient(seed in any::<u64>(), d in 1usize..6, h1 in 1usize..7, h2 in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = batch(&mut rng, 4, d);
        let y = labels(&mut rng);
        let hidden = if h2 == 0 { vec![h1] } else { vec![h1, h2] };
        let m = MlpModel::init(d, &MlpConfig { hidden, seed, ..Default::default() });
        let (_, g) = m.loss_and_grad(x.view(), &y);
        let num = central_differences(&m.params(), |p| {
            let mut mm = m.clone();
            mm.set_params(p);
            mm.loss(x.view(), &y)
        });
        prop_assert!(rel_err(&g, &num) < MAX_REL, "{}", rel_err(&g, &num));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn triad_gradient(seed in any::<u64>(), gated in any::<bool>(), gamma in prop::sample::select(vec![0.0, 2.0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dt, dx) = (rng.random_range(2..7), rng.random_range(2..7));
        let cfg = TriadConfig {
            d_model: 8,
            heads: 2,
            head_hidden: 5,
            gamma,
            alpha: [0.9, 1.6, 1.2],
            gated,
            seed,
            ..Default::default()
        };
        let m = TriadModel::init(dt, dx, &cfg).unwrap();
        let (xt, xx) = (batch(&mut rng, 4, dt), batch(&mut rng, 4, dx));
        let y = labels(&mut rng);
        let (_, g) = m.loss_and_grad(xt.view(), xx.view(), &y);
        let num = central_differences(&m.params(), |p| {
            let mut mm = m.clone();
            mm.set_params(p);
            mm.loss(xt.view(), xx.view(), &y)
        });
        prop_assert!(rel_err(&g, &num) < MAX_REL, "{}", rel_err(&g, &num));
    }
}
