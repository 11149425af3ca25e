use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coherence::{coherence_with, CoherenceField};
use super::cwt::CwtPlan;
use super::grid::Grid;
use super::morlet::MorletSpec;
use super::scales::ScaleGrid;
use super::smooth::{Smoother, SmoothingSpec};
use crate::error::{Error, Result};
use crate::rng::{derive_indexed, rng_from_seed};

/// Lag-1 autoregressive red-noise model `x_t - mean = phi (x_{t-1} - mean) + sigma e_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AR1Params {
    pub phi: f64,
    pub sigma: f64,
    pub mean: f64,
}

/// Fits `phi` as the lag-1 sample autocorrelation and `sigma` so the stationary variance
/// matches the sample variance.
pub fn fit_ar1(x: &[f64]) -> Result<AR1Params> {
    let n = x.len();
    if n < 3 {
        return Err(Error::Length { needed: 3, got: n });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let magnitude = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if var <= (1e-12 * magnitude).powi(2) {
        return Err(Error::DegenerateVariance);
    }
    let lag1 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / n as f64;
    let phi = (lag1 / var).clamp(-0.999, 0.999);
    Ok(AR1Params {
        phi,
        sigma: (var * (1.0 - phi * phi)).sqrt(),
        mean,
    })
}

/// Draws `n` values of the stationary process, starting from its stationary distribution.
pub fn simulate_ar1(params: &AR1Params, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let stationary_sd = params.sigma / (1.0 - params.phi * params.phi).sqrt();
    let mut dev = stationary_sd * rng.sample::<f64, _>(StandardNormal);
    for _ in 0..n {
        out.push(params.mean + dev);
        dev = params.phi * dev + params.sigma * rng.sample::<f64, _>(StandardNormal);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloSpec {
    pub iterations: usize,
    pub significance_level: f64,
    pub seed: u64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            iterations: 1000,
            significance_level: 0.05,
            seed: 0,
        }
    }
}

impl MonteCarloSpec {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Domain("at least one Monte-Carlo iteration is required".into()));
        }
        if !(self.significance_level > 0.0 && self.significance_level < 1.0) {
            return Err(Error::Domain(format!(
                "significance level {} must lie in (0, 1)",
                self.significance_level
            )));
        }
        Ok(())
    }

    /// Number of surrogates that must fall strictly below the observed value: the
    /// observed value then exceeds the empirical `1 - level` quantile (inverted-CDF rule).
    pub fn required_exceedances(&self) -> u32 {
        let k = (self.iterations as f64 * (1.0 - self.significance_level) - 1e-9).ceil();
        (k.max(1.0) as u32).min(self.iterations as u32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceResult {
    /// Observed coherence with `significant` filled in.
    pub field: CoherenceField,
    /// Per cell, how many surrogate pairs produced a strictly smaller `rho2`.
    pub exceedances: Grid<u32>,
    pub ar1_a: AR1Params,
    pub ar1_b: AR1Params,
}

/// Pointwise Monte-Carlo test of squared coherence against pairs of independent AR(1)
/// surrogates fitted to `a` and `b`.
///
/// Surrogate `i` is generated from a seed derived from `(mc.seed, i)` and the reduction
/// is an integer sum, so the mask does not depend on thread scheduling.
pub fn significance(
    a: &[f64],
    b: &[f64],
    grid: &ScaleGrid,
    morlet: &MorletSpec,
    smoothing: &SmoothingSpec,
    mc: &MonteCarloSpec,
) -> Result<SignificanceResult> {
    mc.validate()?;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    let ar1_a = fit_ar1(a)?;
    let ar1_b = fit_ar1(b)?;
    let plan = CwtPlan::new(n, grid, morlet)?;
    let smoother = Smoother::new(n, grid, smoothing)?;

    let mut field = coherence_with(&plan.transform(a)?, &plan.transform(b)?, &smoother)?;
    let rows = grid.len();

    let exceedances = (0..mc.iterations)
        .into_par_iter()
        .map(|i| -> Result<Vec<u32>> {
            let mut rng = rng_from_seed(derive_indexed(mc.seed, "ar1-surrogate", i as u64));
            let sa = simulate_ar1(&ar1_a, n, &mut rng);
            let sb = simulate_ar1(&ar1_b, n, &mut rng);
            let sur = coherence_with(&plan.transform(&sa)?, &plan.transform(&sb)?, &smoother)?;
            Ok(sur
                .rho2
                .iter()
                .zip(field.rho2.iter())
                .map(|(s, o)| u32::from(s < o))
                .collect())
        })
        .try_reduce(
            || vec![0u32; rows * n],
            |mut acc, x| {
                acc.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
                Ok(acc)
            },
        )?;
    let exceedances = Grid::from_vec(rows, n, exceedances);
    let needed = mc.required_exceedances();
    field.significant = exceedances.map(|&c| c >= needed);
    Ok(SignificanceResult {
        field,
        exceedances,
        ar1_a,
        ar1_b,
    })
}
