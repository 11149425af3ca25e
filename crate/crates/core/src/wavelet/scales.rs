use serde::{Deserialize, Serialize};

use super::morlet::MorletSpec;
use crate::error::{Error, Result};

/// Dyadic scale grid `s_j = s0 * 2^(j * dj)` with the matching Morlet Fourier periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    s0: f64,
    dj: f64,
    dt: f64,
    scales: Vec<f64>,
    fourier_periods: Vec<f64>,
}

impl ScaleGrid {
    pub const DEFAULT_DJ: f64 = 1.0 / 12.0;
    pub const MAX_DEFAULT_PERIOD: f64 = 512.0;

    pub fn new(s0: f64, dj: f64, num_scales: usize, dt: f64, morlet: &MorletSpec) -> Result<Self> {
        if !(s0 > 0.0 && dj > 0.0 && dt > 0.0) || !(s0.is_finite() && dj.is_finite() && dt.is_finite()) {
            return Err(Error::Domain(format!(
                "scale grid needs positive s0, dj, dt (got {s0}, {dj}, {dt})"
            )));
        }
        if num_scales == 0 {
            return Err(Error::Domain("scale grid needs at least one scale".into()));
        }
        let factor = morlet.fourier_factor();
        let scales: Vec<f64> = (0..num_scales).map(|j| s0 * (j as f64 * dj).exp2()).collect();
        let fourier_periods = scales.iter().map(|s| s * factor).collect();
        Ok(Self {
            s0,
            dj,
            dt,
            scales,
            fourier_periods,
        })
    }

    /// Default grid for a series of length `n` with unit sampling: `s0 = 2 dt`, twelve
    /// voices per octave, and enough scales for the largest period to reach
    /// `min(n / 3, 512)` sampling intervals.
    pub fn for_length(n: usize, morlet: &MorletSpec) -> Result<Self> {
        Self::with_defaults(n, 1.0, 2.0, Self::DEFAULT_DJ, morlet)
    }

    pub fn with_defaults(n: usize, dt: f64, s0: f64, dj: f64, morlet: &MorletSpec) -> Result<Self> {
        let target = (n as f64 / 3.0).min(Self::MAX_DEFAULT_PERIOD) * dt;
        let smallest = s0 * morlet.fourier_factor();
        let steps = if target > smallest {
            ((target / smallest).log2() / dj - 1e-9).ceil() as usize
        } else {
            0
        };
        Self::new(s0, dj, steps + 1, dt, morlet)
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn dj(&self) -> f64 {
        self.dj
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn fourier_periods(&self) -> &[f64] {
        &self.fourier_periods
    }

    /// Indices of scales whose Fourier period lies in `[lo, hi]`.
    pub fn band(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| (lo..=hi).contains(&self.fourier_periods[j]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periods_follow_fourier_factor() {
        let spec = MorletSpec::default();
        let g = ScaleGrid::new(2.0, 0.25, 10, 1.0, &spec).unwrap();
        for (s, p) in g.scales().iter().zip(g.fourier_periods()) {
            assert!((p - s * 4.0 * PI / (6.0 + 38f64.sqrt())).abs() < 1e-12);
        }
        assert!(g.scales().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.scales()[4], 4.0);
    }

    #[test]
    fn default_grid_reaches_target_period() {
        let spec = MorletSpec::default();
        for n in [64, 512, 1024, 5582] {
            let g = ScaleGrid::for_length(n, &spec).unwrap();
            let target = (n as f64 / 3.0).min(512.0);
            let last = *g.fourier_periods().last().unwrap();
            assert!(last >= target - 1e-9, "n={n}: {last} < {target}");
            let prev = g.fourier_periods()[g.len() - 2];
            assert!(prev < target, "n={n}: grid is longer than needed");
        }
    }

    #[test]
    fn covers_daily_to_yearly_bands() {
        let g = ScaleGrid::for_length(5582, &MorletSpec::default()).unwrap();
        assert!(!g.band(8.0, 16.0).is_empty());
        assert!(!g.band(64.0, 128.0).is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        let spec = MorletSpec::default();
        assert!(ScaleGrid::new(0.0, 0.1, 4, 1.0, &spec).is_err());
        assert!(ScaleGrid::new(2.0, 0.1, 0, 1.0, &spec).is_err());
    }
}
