use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::cwt::Scaleogram;
use super::grid::Grid;
use super::morlet::MorletSpec;
use super::scales::ScaleGrid;
use super::smooth::{Smoother, SmoothingSpec};
use crate::error::{Error, Result};

/// Phase angles of a complex grid plus the cells where the angle is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    pub theta: Grid<f64>,
    pub indeterminate: Grid<bool>,
}

/// `atan2(im, re)` folded into `(-pi, pi]`. Zero-magnitude cells get phase 0 and are
/// flagged indeterminate.
pub fn phase_field(cross_smoothed: &Grid<Complex64>) -> PhaseField {
    let theta = cross_smoothed.map(|z| {
        if z.norm_sqr() == 0.0 {
            0.0
        } else {
            let a = z.im.atan2(z.re);
            if a <= -PI {
                PI
            } else {
                a
            }
        }
    });
    let indeterminate = cross_smoothed.map(|z| z.norm_sqr() == 0.0);
    PhaseField { theta, indeterminate }
}

/// Largest trustworthy Fourier period at each time index.
///
/// Edge effects decay over the Morlet e-folding time `sqrt(2) * s`, so a cell at distance
/// `d` from the nearest end is trusted up to scale `d / sqrt(2)`, i.e. period
/// `fourier_factor * d * dt / sqrt(2)`.
pub fn cone_of_influence(n: usize, dt: f64, morlet: &MorletSpec) -> Vec<f64> {
    let factor = morlet.fourier_factor();
    (0..n)
        .map(|t| {
            let d = t.min(n - 1 - t) as f64;
            factor * d * dt / SQRT_2
        })
        .collect()
}

/// Squared wavelet coherence and phase on a shared scale grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceField {
    pub rho2: Grid<f64>,
    pub phase: Grid<f64>,
    pub grid: ScaleGrid,
    pub n: usize,
    /// Maximum trustworthy period per time index.
    pub coi: Vec<f64>,
    /// Filled by significance testing; all false until then.
    pub significant: Grid<bool>,
    /// Cells whose smoothed auto-spectra multiply to zero; their `rho2` is set to 0.
    pub degenerate: Grid<bool>,
    pub phase_indeterminate: Grid<bool>,
    /// Largest amount by which any raw ratio left `[0, 1]` before clamping.
    pub max_clamp_excursion: f64,
}

impl CoherenceField {
    pub fn inside_coi(&self, scale: usize, time: usize) -> bool {
        self.grid.fourier_periods()[scale] <= self.coi[time]
    }

    pub fn num_scales(&self) -> usize {
        self.grid.len()
    }
}

/// Squared coherence `|Q(W_ab / s)|^2 / (Q(|W_a|^2 / s) Q(|W_b|^2 / s))`, clamped to
/// `[0, 1]`, with phase `arg Q(W_ab / s)`.
pub fn coherence(a: &Scaleogram, b: &Scaleogram, spec: &SmoothingSpec) -> Result<CoherenceField> {
    let smoother = Smoother::new(a.n, &a.grid, spec)?;
    coherence_with(a, b, &smoother)
}

pub(crate) fn coherence_with(a: &Scaleogram, b: &Scaleogram, smoother: &Smoother) -> Result<CoherenceField> {
    if a.n != b.n || a.morlet != b.morlet || a.grid != b.grid || a.values.shape() != b.values.shape() {
        return Err(Error::GridMismatch);
    }
    let scales = a.grid.scales();
    let inv_scale = |j: usize| 1.0 / scales[j];
    let rows = a.grid.len();
    let n = a.n;

    let cross = Grid::from_fn(rows, n, |j, t| {
        a.values.get(j, t) * b.values.get(j, t).conj() * inv_scale(j)
    });
    let pa = Grid::from_fn(rows, n, |j, t| a.values.get(j, t).norm_sqr() * inv_scale(j));
    let pb = Grid::from_fn(rows, n, |j, t| b.values.get(j, t).norm_sqr() * inv_scale(j));

    let sc = smoother.smooth_complex(&cross)?;
    let (sa, sb) = smoother.smooth_real_pair(&pa, &pb)?;

    let mut excursion: f64 = 0.0;
    let mut degenerate = Grid::filled(rows, n, false);
    let mut rho2 = Grid::filled(rows, n, 0.0);
    for j in 0..rows {
        for t in 0..n {
            let denom = sa.get(j, t) * sb.get(j, t);
            if !(denom > 0.0) || !denom.is_finite() {
                degenerate.set(j, t, true);
                continue;
            }
            let raw = sc.get(j, t).norm_sqr() / denom;
            excursion = excursion.max(raw - 1.0).max(-raw);
            rho2.set(j, t, raw.clamp(0.0, 1.0));
        }
    }
    let phase = phase_field(&sc);
    Ok(CoherenceField {
        rho2,
        phase: phase.theta,
        grid: a.grid.clone(),
        n,
        coi: cone_of_influence(n, a.dt, &a.morlet),
        significant: Grid::filled(rows, n, false),
        degenerate,
        phase_indeterminate: phase.indeterminate,
        max_clamp_excursion: excursion.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::cwt;

    #[test]
    fn phase_examples() {
        let g = Grid::from_vec(
            1,
            4,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(-1.0, -0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let p = phase_field(&g);
        assert_eq!(*p.theta.get(0, 0), 0.0);
        assert!((p.theta.get(0, 1) - PI / 2.0).abs() < 1e-15);
        assert_eq!(*p.theta.get(0, 2), PI);
        assert_eq!(*p.theta.get(0, 3), 0.0);
        assert_eq!(p.indeterminate.as_slice(), &[false, false, false, true]);
    }

    #[test]
    fn coi_examples() {
        let spec = MorletSpec::default();
        let coi = cone_of_influence(512, 1.0, &spec);
        assert_eq!(coi[0], 0.0);
        assert_eq!(coi[511], 0.0);
        for t in 0..512 {
            assert_eq!(coi[t], coi[511 - t]);
        }
        assert!(coi[..256].windows(2).all(|w| w[1] >= w[0]));
        assert!((coi[255] - spec.fourier_factor() * 255.0 / SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn zero_series_gives_degenerate_cells() {
        let spec = MorletSpec::default();
        let g = ScaleGrid::new(2.0, 0.25, 4, 1.0, &spec).unwrap();
        let x: Vec<f64> = (0..32).map(|t| (t as f64).sin()).collect();
        let a = cwt(&x, &g, &spec).unwrap();
        let z = cwt(&[0.0; 32], &g, &spec).unwrap();
        let f = coherence(&a, &z, &SmoothingSpec::default()).unwrap();
        assert!(f.degenerate.iter().all(|&d| d));
        assert!(f.rho2.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn grid_mismatch() {
        let spec = MorletSpec::default();
        let x: Vec<f64> = (0..32).map(|t| (t as f64).sin()).collect();
        let a = cwt(&x, &ScaleGrid::new(2.0, 0.25, 4, 1.0, &spec).unwrap(), &spec).unwrap();
        let b = cwt(&x, &ScaleGrid::new(2.0, 0.25, 5, 1.0, &spec).unwrap(), &spec).unwrap();
        assert!(matches!(
            coherence(&a, &b, &SmoothingSpec::default()),
            Err(Error::GridMismatch)
        ));
    }
}
