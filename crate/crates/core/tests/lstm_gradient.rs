use dualclass_core::lstm::{backward, forward_sequence, lstm_cell_forward, FeatureSample, LstmParams, LstmState};
use dualclass_core::rng::rng_from_seed;
use rand::Rng;

const STEP: f64 = 1e-5;

fn random_instance(seed: u64) -> (LstmParams, FeatureSample) {
    let mut rng = rng_from_seed(seed);
    let hidden = rng.random_range(1..=4);
    let input = rng.random_range(1..=3);
    let lag = rng.random_range(1..=6);
    let mut p = LstmParams::zeros(hidden, input);
    for group in p.groups_mut() {
        group.iter_mut().for_each(|w| *w = rng.random_range(-1.0..1.0));
    }
    let sample = FeatureSample {
        inputs: (0..lag)
            .map(|_| (0..input).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
        target: rng.random_range(-1.0..1.0),
        target_index: lag,
    };
    (p, sample)
}

fn loss(p: &LstmParams, s: &FeatureSample) -> f64 {
    let (pred, _) = forward_sequence(p, s).unwrap();
    (pred - s.target).powi(2)
}

/// Relative error per parameter; gradients below 1e-6 in both estimates are compared on
/// that absolute scale instead.
fn check(seed: u64) -> f64 {
    let (p, s) = random_instance(seed);
    let (pred, cache) = forward_sequence(&p, &s).unwrap();
    let analytic = backward(&p, &s, &cache, 2.0 * (pred - s.target)).unwrap();
    let mut worst: f64 = 0.0;
    for (g, group) in analytic.groups().iter().enumerate() {
        for k in 0..group.len() {
            let mut plus = p.clone();
            plus.groups_mut()[g][k] += STEP;
            let mut minus = p.clone();
            minus.groups_mut()[g][k] -= STEP;
            let numeric = (loss(&plus, &s) - loss(&minus, &s)) / (2.0 * STEP);
            let a = group[k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..50 {
        let rel = check(seed);
        assert!(rel < 1e-4, "instance {seed}: relative error {rel:e}");
    }
}

#[test]
fn zero_loss_gradient_gives_zero_gradients() {
    let (p, s) = random_instance(7);
    let (_, cache) = forward_sequence(&p, &s).unwrap();
    let g = backward(&p, &s, &cache, 0.0).unwrap();
    assert!(g.groups().iter().all(|grp| grp.iter().all(|&v| v == 0.0)));
}

#[test]
fn hand_computed_cells() {
    let p = LstmParams::zeros(1, 1);
    let (state, cache) = lstm_cell_forward(&p, &[3.7], &LstmState::zeros(1)).unwrap();
    assert_eq!(
        (cache.f[0], cache.i[0], cache.o[0], cache.c_hat[0]),
        (0.5, 0.5, 0.5, 0.0)
    );
    assert_eq!((state.c[0], state.h[0]), (0.0, 0.0));

    let prev = LstmState {
        h: vec![0.0],
        c: vec![1.0],
    };
    let (state, _) = lstm_cell_forward(&p, &[-2.0], &prev).unwrap();
    assert!((state.c[0] - 0.5).abs() < 1e-15);
    assert!((state.h[0] - 0.5 * 0.5f64.tanh()).abs() < 1e-15);
    assert!((state.h[0] - 0.231_058_578_630_005).abs() < 1e-12);

    let mut sat = LstmParams::zeros(1, 1);
    sat.input.b[0] = 20.0;
    sat.forget.b[0] = -20.0;
    // weights act on [h_prev, x]; the second entry reads x
    sat.candidate.w[1] = 1.0;
    for x in [-1.5, -0.3, 0.0, 0.8, 2.0] {
        let (state, _) = lstm_cell_forward(&sat, &[x], &prev).unwrap();
        assert!((state.c[0] - f64::tanh(x)).abs() < 1e-8, "x {x}: {}", state.c[0]);
    }
}
