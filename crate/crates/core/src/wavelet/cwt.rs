use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;
use super::morlet::{morlet_mother, MorletSpec};
use super::scales::ScaleGrid;
use crate::error::{Error, Result};

/// Wavelet kernels are truncated where the Gaussian envelope `exp(-u^2/2)` drops below
/// `exp(-40.5)`, i.e. at `|u| = 9`.
pub const KERNEL_CUTOFF: f64 = 9.0;

/// Complex wavelet coefficients over `(scale, time)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaleogram {
    pub values: Grid<Complex64>,
    pub grid: ScaleGrid,
    pub n: usize,
    pub dt: f64,
    pub morlet: MorletSpec,
}

impl Scaleogram {
    pub fn power(&self) -> Grid<f64> {
        self.values.map(|w| w.norm_sqr())
    }

    fn same_layout(&self, other: &Scaleogram) -> bool {
        self.n == other.n
            && self.morlet == other.morlet
            && self.grid == other.grid
            && self.values.shape() == other.values.shape()
    }
}

/// Precomputed kernel spectra for transforming many series of the same length on the
/// same scale grid.
///
/// `W(s, tau) = sqrt(dt / s) * sum_t x(t) conj(psi((t - tau) dt / s))`, evaluated as a
/// linear convolution with the sampled, truncated kernel. The input is zero-padded to a
/// power of two long enough that the circular convolution never wraps, so the result
/// equals the direct sum at every cell.
pub struct CwtPlan {
    n: usize,
    fft_len: usize,
    grid: ScaleGrid,
    morlet: MorletSpec,
    kernels: Vec<Vec<Complex64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CwtPlan {
    pub fn new(n: usize, grid: &ScaleGrid, morlet: &MorletSpec) -> Result<Self> {
        morlet.validate()?;
        if n < 4 {
            return Err(Error::Length { needed: 4, got: n });
        }
        let dt = grid.dt();
        let s_max = grid.scales().last().copied().unwrap_or(1.0);
        let reach = (KERNEL_CUTOFF * s_max / dt).ceil() as usize;
        let fft_len = (n + reach).next_power_of_two();

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);

        let kernels = grid
            .scales()
            .iter()
            .map(|&s| {
                let half = ((KERNEL_CUTOFF * s / dt).ceil() as usize).min(fft_len / 2 - 1);
                let norm = (dt / s).sqrt();
                let mut k = vec![Complex64::new(0.0, 0.0); fft_len];
                for m in -(half as i64)..=half as i64 {
                    let idx = m.rem_euclid(fft_len as i64) as usize;
                    k[idx] = morlet_mother(-(m as f64) * dt / s, morlet).conj() * norm;
                }
                forward.process(&mut k);
                k
            })
            .collect();

        Ok(Self {
            n,
            fft_len,
            grid: grid.clone(),
            morlet: *morlet,
            kernels,
            forward,
            inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    /// Transforms `x` after removing its mean.
    pub fn transform(&self, x: &[f64]) -> Result<Scaleogram> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.n,
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mean = x.iter().sum::<f64>() / self.n as f64;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (slot, v) in spectrum.iter_mut().zip(x) {
            slot.re = v - mean;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        self.forward.process_with_scratch(&mut spectrum, &mut scratch);

        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        let inv_len = 1.0 / self.fft_len as f64;
        let mut values = Grid::filled(self.grid.len(), self.n, Complex64::new(0.0, 0.0));
        for (j, kernel) in self.kernels.iter().enumerate() {
            for ((b, xs), k) in buf.iter_mut().zip(&spectrum).zip(kernel) {
                *b = xs * k;
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            for (out, b) in values.row_mut(j).iter_mut().zip(&buf) {
                *out = b * inv_len;
            }
        }
        Ok(Scaleogram {
            values,
            grid: self.grid.clone(),
            n: self.n,
            dt: self.grid.dt(),
            morlet: self.morlet,
        })
    }
}

/// Continuous Morlet wavelet transform of `x` on `grid`.
pub fn cwt(x: &[f64], grid: &ScaleGrid, morlet: &MorletSpec) -> Result<Scaleogram> {
    CwtPlan::new(x.len(), grid, morlet)?.transform(x)
}

/// Entrywise `W_a * conj(W_b)`.
pub fn cross_wavelet(a: &Scaleogram, b: &Scaleogram) -> Result<Scaleogram> {
    if !a.same_layout(b) {
        return Err(Error::GridMismatch);
    }
    Ok(Scaleogram {
        values: a.values.zip_map(&b.values, |x, y| x * y.conj()),
        grid: a.grid.clone(),
        n: a.n,
        dt: a.dt,
        morlet: a.morlet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(num: usize) -> ScaleGrid {
        ScaleGrid::new(2.0, 0.25, num, 1.0, &MorletSpec::default()).unwrap()
    }

    #[test]
    fn zeros_give_zeros() {
        let w = cwt(&[0.0; 64], &grid(8), &MorletSpec::default()).unwrap();
        assert!(w.values.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn rejects_short_and_non_finite() {
        let spec = MorletSpec::default();
        assert!(matches!(cwt(&[1.0; 3], &grid(2), &spec), Err(Error::Length { .. })));
        let mut x = vec![0.0; 16];
        x[5] = f64::NAN;
        assert!(matches!(cwt(&x, &grid(2), &spec), Err(Error::NonFinite(5))));
    }

    #[test]
    fn padding_never_wraps() {
        let g = grid(12);
        let plan = CwtPlan::new(100, &g, &MorletSpec::default()).unwrap();
        let reach = (KERNEL_CUTOFF * g.scales()[11]).ceil() as usize;
        assert!(plan.fft_len() >= 100 + reach);
        assert!(plan.fft_len().is_power_of_two());
    }

    #[test]
    fn cross_wavelet_identities() {
        let spec = MorletSpec::default();
        let g = grid(6);
        let x: Vec<f64> = (0..64).map(|t| (t as f64 * 0.4).sin() + 0.1 * t as f64).collect();
        let y: Vec<f64> = (0..64).map(|t| (t as f64 * 0.3).cos()).collect();
        let a = cwt(&x, &g, &spec).unwrap();
        let b = cwt(&y, &g, &spec).unwrap();

        let aa = cross_wavelet(&a, &a).unwrap();
        for (c, w) in aa.values.iter().zip(a.values.iter()) {
            assert_eq!(c.im, 0.0);
            assert!((c.re - w.norm_sqr()).abs() <= 1e-12 * w.norm_sqr().max(1.0));
        }
        let ab = cross_wavelet(&a, &b).unwrap();
        let ba = cross_wavelet(&b, &a).unwrap();
        for (p, q) in ab.values.iter().zip(ba.values.iter()) {
            assert_eq!(*p, q.conj());
        }
        let zero = cwt(&[0.0; 64], &g, &spec).unwrap();
        assert!(cross_wavelet(&a, &zero).unwrap().values.iter().all(|c| c.norm() == 0.0));

        let other = cwt(&x, &grid(5), &spec).unwrap();
        assert!(matches!(cross_wavelet(&a, &other), Err(Error::GridMismatch)));
    }
}
