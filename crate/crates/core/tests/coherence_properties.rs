use std::f64::consts::PI;

use dualclass_core::rng::rng_from_seed;
use dualclass_core::wavelet::{coherence, cwt, CoherenceField, MorletSpec, ScaleGrid, SmoothingSpec};
use proptest::prelude::*;
use rand::Rng;

fn field(a: &[f64], b: &[f64], grid: &ScaleGrid) -> CoherenceField {
    let morlet = MorletSpec::default();
    coherence(
        &cwt(a, grid, &morlet).unwrap(),
        &cwt(b, grid, &morlet).unwrap(),
        &SmoothingSpec::default(),
    )
    .unwrap()
}

fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn small_grid(n: usize) -> ScaleGrid {
    ScaleGrid::with_defaults(n, 1.0, 2.0, 0.25, &MorletSpec::default()).unwrap()
}

#[test]
fn rho2_stays_in_unit_interval() {
    let a = noise(1, 200);
    let b = noise(2, 200);
    let f = field(&a, &b, &small_grid(200));
    assert!(f.rho2.iter().all(|&r| (0.0..=1.0).contains(&r)));
    assert!(f.max_clamp_excursion < 1e-9);
}

#[test]
fn self_coherence_is_one() {
    let a = noise(3, 300);
    let f = field(&a, &a, &small_grid(300));
    for &r in f.rho2.iter() {
        assert!((r - 1.0).abs() < 1e-6, "{r}");
    }
    for &t in f.phase.iter() {
        assert!(t.abs() < 1e-6);
    }
}

#[test]
fn symmetric_with_antisymmetric_phase() {
    let a = noise(4, 256);
    let b = noise(5, 256);
    let grid = small_grid(256);
    let ab = field(&a, &b, &grid);
    let ba = field(&b, &a, &grid);
    for (x, y) in ab.rho2.iter().zip(ba.rho2.iter()) {
        assert!((x - y).abs() < 1e-10);
    }
    for j in 0..ab.num_scales() {
        for t in 0..256 {
            if !ab.phase_indeterminate.get(j, t) {
                assert!(wrap(ab.phase.get(j, t) + ba.phase.get(j, t)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn sign_flip_rotates_phase_by_pi() {
    let a = noise(6, 200);
    let b = noise(7, 200);
    let neg: Vec<f64> = b.iter().map(|v| -v).collect();
    let grid = small_grid(200);
    let f = field(&a, &b, &grid);
    let g = field(&a, &neg, &grid);
    for j in 0..f.num_scales() {
        for t in 0..200 {
            assert!((f.rho2.get(j, t) - g.rho2.get(j, t)).abs() < 1e-10);
            assert!(wrap(f.phase.get(j, t) - g.phase.get(j, t) - PI).abs() < 1e-9);
        }
    }
}

#[test]
fn quarter_cycle_shift_gives_plus_half_pi() {
    let n = 512;
    let a: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 32.0).cos()).collect();
    let b: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 32.0).sin()).collect();
    let grid = ScaleGrid::for_length(n, &MorletSpec::default()).unwrap();
    let f = field(&a, &b, &grid);
    for j in grid.band(28.0, 36.0) {
        for t in 0..n {
            if f.inside_coi(j, t) {
                assert!((f.phase.get(j, t) - PI / 2.0).abs() < 0.1);
            }
        }
    }
}

#[test]
fn shift_covariance_in_interior() {
    let n = 400;
    let k = 23;
    let base = noise(8, n + k);
    let other = noise(9, n + k);
    let grid = ScaleGrid::new(2.0, 0.25, 6, 1.0, &MorletSpec::default()).unwrap();
    // same data, observed through windows offset by k
    let f = field(&base[..n], &other[..n], &grid);
    let g = field(&base[k..], &other[k..], &grid);
    let s_max = *grid.scales().last().unwrap();
    let margin = (9.0 * s_max + 7.0 * s_max).ceil() as usize + 2;
    let mut worst: f64 = 0.0;
    for j in 0..grid.len() {
        for t in k + margin..n - margin {
            worst = worst.max((f.rho2.get(j, t) - g.rho2.get(j, t - k)).abs());
        }
    }
    // the windows have different means; the wavelet's tiny DC response leaks that in
    assert!(worst < 1e-6, "{worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn amplitude_scale_invariance(seed in any::<u64>(), ca in 1e-3f64..1e3, cb in 1e-3f64..1e3) {
        let a = noise(seed, 128);
        let b = noise(seed ^ 0x5555, 128);
        let grid = small_grid(128);
        let f = field(&a, &b, &grid);
        let sa: Vec<f64> = a.iter().map(|v| v * ca).collect();
        let sb: Vec<f64> = b.iter().map(|v| v * cb).collect();
        let g = field(&sa, &sb, &grid);
        for (x, y) in f.rho2.iter().zip(g.rho2.iter()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
        for (x, y) in f.phase.iter().zip(g.phase.iter()) {
            prop_assert!(wrap(x - y).abs() < 1e-8);
        }
    }
}
