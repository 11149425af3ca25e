use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::scales::ScaleGrid;
use crate::error::{Error, Result};

/// Time kernels are cut at this many standard deviations.
const GAUSS_CUTOFF: f64 = 7.0;

/// Smoothing operator used for coherence: a Gaussian in time whose standard deviation is
/// `time_sigma * scale`, followed by a boxcar across `scale_window` octaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingSpec {
    pub time_sigma: f64,
    pub scale_window: f64,
}

impl Default for SmoothingSpec {
    fn default() -> Self {
        Self {
            time_sigma: 1.0,
            scale_window: 0.6,
        }
    }
}

impl SmoothingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_sigma > 0.0 && self.time_sigma.is_finite()) {
            return Err(Error::Domain(format!(
                "time_sigma {} must be positive",
                self.time_sigma
            )));
        }
        if !(self.scale_window >= 0.0 && self.scale_window.is_finite()) {
            return Err(Error::Domain(format!(
                "scale_window {} must be non-negative",
                self.scale_window
            )));
        }
        Ok(())
    }
}

/// Boxcar of total width `width` (in grid steps) integrated over unit cells, so a
/// fractional width puts partial weight on the outermost taps.
fn boxcar_weights(width: f64) -> Vec<f64> {
    let half = width / 2.0;
    let reach = (half + 0.5).floor() as usize;
    (0..=2 * reach)
        .map(|i| {
            let o = (i as f64 - reach as f64).abs();
            (half + 0.5 - o).clamp(0.0, 1.0)
        })
        .collect()
}

/// Precomputed kernels for one `(n, grid, spec)` combination.
///
/// Every convolution is renormalised by the kernel mass that falls inside the grid, so
/// the weights applied at each output cell sum to one (constants are preserved at the
/// edges as well as in the interior).
pub struct Smoother {
    n: usize,
    rows: usize,
    fft_len: usize,
    gauss: Vec<Vec<Complex64>>,
    norms: Vec<Vec<f64>>,
    scale_weights: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Smoother {
    pub fn new(n: usize, grid: &ScaleGrid, spec: &SmoothingSpec) -> Result<Self> {
        spec.validate()?;
        if n == 0 {
            return Err(Error::Empty);
        }
        let sigmas: Vec<f64> = grid.scales().iter().map(|s| spec.time_sigma * s / grid.dt()).collect();
        let halves: Vec<usize> = sigmas
            .iter()
            .map(|sig| ((GAUSS_CUTOFF * sig).ceil() as usize).min(n.saturating_sub(1)))
            .collect();
        let fft_len = (n + halves.iter().copied().max().unwrap_or(0)).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);

        let mut gauss = Vec::with_capacity(grid.len());
        let mut norms = Vec::with_capacity(grid.len());
        for (&sigma, &half) in sigmas.iter().zip(&halves) {
            let mut g = vec![Complex64::new(0.0, 0.0); fft_len];
            for m in -(half as i64)..=half as i64 {
                let idx = m.rem_euclid(fft_len as i64) as usize;
                let u = m as f64 / sigma;
                g[idx].re = (-0.5 * u * u).exp();
            }
            forward.process(&mut g);
            // mass of the kernel inside [0, n) for each output position
            let mut ind = vec![Complex64::new(0.0, 0.0); fft_len];
            ind[..n].iter_mut().for_each(|v| v.re = 1.0);
            forward.process(&mut ind);
            ind.iter_mut().zip(&g).for_each(|(a, b)| *a *= b);
            inverse.process(&mut ind);
            norms.push(ind[..n].iter().map(|v| v.re / fft_len as f64).collect());
            gauss.push(g);
        }

        Ok(Self {
            n,
            rows: grid.len(),
            fft_len,
            gauss,
            norms,
            scale_weights: boxcar_weights(spec.scale_window / grid.dj()),
            forward,
            inverse,
        })
    }

    pub fn smooth_complex(&self, input: &Grid<Complex64>) -> Result<Grid<Complex64>> {
        if input.shape() != (self.rows, self.n) {
            return Err(Error::Shape(format!(
                "grid {:?} does not match smoother {:?}",
                input.shape(),
                (self.rows, self.n)
            )));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut time_smoothed = Grid::filled(self.rows, self.n, zero);
        let mut buf = vec![zero; self.fft_len];
        let mut scratch = vec![
            zero;
            self.forward
                .get_inplace_scratch_len()
                .max(self.inverse.get_inplace_scratch_len())
        ];
        let inv_len = 1.0 / self.fft_len as f64;
        for j in 0..self.rows {
            buf.fill(zero);
            buf[..self.n].copy_from_slice(input.row(j));
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            buf.iter_mut().zip(&self.gauss[j]).for_each(|(a, g)| *a *= g);
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            for ((out, b), norm) in time_smoothed.row_mut(j).iter_mut().zip(&buf).zip(&self.norms[j]) {
                *out = b * (inv_len / norm);
            }
        }

        let reach = (self.scale_weights.len() / 2) as i64;
        let mut out = Grid::filled(self.rows, self.n, zero);
        for j in 0..self.rows {
            let mut total = 0.0;
            let row = out.row_mut(j);
            for (k, &w) in self.scale_weights.iter().enumerate() {
                let src = j as i64 + k as i64 - reach;
                if w == 0.0 || src < 0 || src >= self.rows as i64 {
                    continue;
                }
                total += w;
                for (o, v) in row.iter_mut().zip(time_smoothed.row(src as usize)) {
                    *o += v * w;
                }
            }
            row.iter_mut().for_each(|o| *o /= total);
        }
        Ok(out)
    }

    pub fn smooth_real(&self, input: &Grid<f64>) -> Result<Grid<f64>> {
        let z = input.map(|&v| Complex64::new(v, 0.0));
        Ok(self.smooth_complex(&z)?.map(|c| c.re))
    }

    /// Smooths two real grids at once by packing them into the real and imaginary parts.
    ///
    /// The kernels are real, so the channels only mix through rounding. Each channel is
    /// scaled to unit peak first, which keeps that leakage relative to its own magnitude
    /// and leaves an all-zero channel exactly zero.
    pub fn smooth_real_pair(&self, a: &Grid<f64>, b: &Grid<f64>) -> Result<(Grid<f64>, Grid<f64>)> {
        if a.shape() != b.shape() {
            return Err(Error::Shape("real pair shapes differ".into()));
        }
        let peak = |g: &Grid<f64>| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (pa, pb) = (peak(a), peak(b));
        let inv = |p: f64| if p > 0.0 && p.is_finite() { 1.0 / p } else { 1.0 };
        let (ia, ib) = (inv(pa), inv(pb));
        let z = a.zip_map(b, |&x, &y| Complex64::new(x * ia, y * ib));
        let s = self.smooth_complex(&z)?;
        let restore = |v: f64, i: f64, p: f64| if p == 0.0 { 0.0 } else { v / i };
        Ok((s.map(|c| restore(c.re, ia, pa)), s.map(|c| restore(c.im, ib, pb))))
    }
}

/// One-off smoothing of a complex grid laid out on `grid`.
pub fn smooth(input: &Grid<Complex64>, grid: &ScaleGrid, spec: &SmoothingSpec) -> Result<Grid<Complex64>> {
    Smoother::new(input.cols(), grid, spec)?.smooth_complex(input)
}
