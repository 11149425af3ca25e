use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cell::{forward_sequence, LstmParams};
use super::features::{build_supervised, input_window, FeatureSample};
use super::scaling::{scale_price, unscale};
use super::train::{train, TrainConfig};
use crate::error::{Error, Result};
use crate::rng::derive_indexed;

/// Aligned price history of one ticker and its sibling share classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDataset {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub prices: Vec<f64>,
    pub siblings: Vec<(String, Vec<f64>)>,
}

impl ForecastDataset {
    pub fn new(
        ticker: impl Into<String>,
        dates: Vec<NaiveDate>,
        prices: Vec<f64>,
        siblings: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: prices.len(),
            });
        }
        for (_, s) in &siblings {
            if s.len() != prices.len() {
                return Err(Error::LengthMismatch {
                    left: prices.len(),
                    right: s.len(),
                });
            }
        }
        Ok(Self {
            ticker: ticker.into(),
            dates,
            prices,
            siblings,
        })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    fn scaled_own(&self) -> Result<Vec<f64>> {
        self.prices.iter().map(|&p| scale_price(p)).collect()
    }

    /// Scaled siblings, or nothing at all when dual features are off so the sibling
    /// series are never read.
    fn scaled_siblings(&self, include_dual: bool) -> Result<Vec<Vec<f64>>> {
        if !include_dual {
            return Ok(Vec::new());
        }
        if self.siblings.is_empty() {
            return Err(Error::Config(format!(
                "{} has no sibling series for dual features",
                self.ticker
            )));
        }
        self.siblings
            .iter()
            .map(|(_, s)| s.iter().map(|&p| scale_price(p)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regime {
    /// One model trained on observations `[0, train_size)`.
    Mece { train_size: usize },
    /// A model per origin trained on the `window` observations just before it.
    Rolling { window: usize },
}

impl Regime {
    pub fn label(&self) -> String {
        match self {
            Regime::Mece { .. } => "mece".into(),
            Regime::Rolling { window } => format!("w{window}"),
        }
    }

    pub fn window(&self) -> Option<usize> {
        match self {
            Regime::Mece { .. } => None,
            Regime::Rolling { window } => Some(*window),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    /// Forecast origins are the last `test_size` observations.
    pub test_size: usize,
    /// Rolling only: when false, one model is trained on the window before the first
    /// origin and reused for every origin.
    pub retrain_per_origin: bool,
}

impl RegimeSpec {
    pub fn mece(train_size: usize, test_size: usize) -> Self {
        Self {
            regime: Regime::Mece { train_size },
            test_size,
            retrain_per_origin: true,
        }
    }

    pub fn rolling(window: usize, test_size: usize) -> Self {
        Self {
            regime: Regime::Rolling { window },
            test_size,
            retrain_per_origin: true,
        }
    }
}

/// Identifies one model configuration in the forecasting grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDescriptor {
    pub ticker: String,
    pub lag: usize,
    pub dual: bool,
    pub regime: Regime,
    pub test_size: usize,
    pub retrain_per_origin: bool,
    pub train: TrainConfig,
}

impl RunDescriptor {
    /// File-name friendly key, e.g. `A_lag4_dualno_w5`.
    pub fn key(&self) -> String {
        format!(
            "{}_lag{}_dual{}_{}",
            self.ticker,
            self.lag,
            if self.dual { "yes" } else { "no" },
            self.regime.label()
        )
    }
}

/// Out-of-sample one-step forecasts for one configuration, in price units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRun {
    pub descriptor: RunDescriptor,
    pub origins: Vec<usize>,
    pub dates: Vec<NaiveDate>,
    pub predictions: Vec<f64>,
    pub actuals: Vec<f64>,
    /// Half-open index range of the observations each forecast's model was trained on.
    pub provenance: Vec<(usize, usize)>,
}

struct Prepared<'a> {
    own: Vec<f64>,
    siblings: Vec<Vec<f64>>,
    dataset: &'a ForecastDataset,
    lag: usize,
    dual: bool,
}

impl Prepared<'_> {
    fn sibling_refs(&self, range: std::ops::Range<usize>) -> Vec<&[f64]> {
        self.siblings.iter().map(|s| &s[range.clone()]).collect()
    }

    fn samples(&self, range: std::ops::Range<usize>) -> Result<Vec<FeatureSample>> {
        let sibs = self.sibling_refs(range.clone());
        build_supervised(&self.own[range.clone()], &sibs, self.lag, self.dual, range.start)
    }

    fn predict(&self, params: &LstmParams, origin: usize) -> Result<f64> {
        let sibs = self.sibling_refs(0..self.own.len());
        let sample = FeatureSample {
            inputs: input_window(&self.own, &sibs, origin, self.lag, self.dual)?,
            target: f64::NAN,
            target_index: origin,
        };
        let (y, _) = forward_sequence(params, &sample)?;
        Ok(unscale(y))
    }

    fn finish(
        &self,
        descriptor: RunDescriptor,
        origins: Vec<usize>,
        predictions: Vec<f64>,
        provenance: Vec<(usize, usize)>,
    ) -> ForecastRun {
        ForecastRun {
            descriptor,
            dates: origins.iter().map(|&t| self.dataset.dates[t]).collect(),
            actuals: origins.iter().map(|&t| self.dataset.prices[t]).collect(),
            origins,
            predictions,
            provenance,
        }
    }
}

fn prepare(dataset: &ForecastDataset, lag: usize, include_dual: bool) -> Result<Prepared<'_>> {
    if lag == 0 {
        return Err(Error::Config("lag must be at least 1".into()));
    }
    Ok(Prepared {
        own: dataset.scaled_own()?,
        siblings: dataset.scaled_siblings(include_dual)?,
        dataset,
        lag,
        dual: include_dual,
    })
}

fn test_origins(n: usize, test_size: usize) -> Result<std::ops::Range<usize>> {
    if test_size == 0 || test_size > n {
        return Err(Error::InsufficientData(format!(
            "test size {test_size} with {n} observations"
        )));
    }
    Ok(n - test_size..n)
}

/// Trains a single model on `[0, train_size)` and forecasts each of the last
/// `test_size` observations from the `lag` actual observations before it.
pub fn forecast_mece(
    dataset: &ForecastDataset,
    lag: usize,
    include_dual: bool,
    train_size: usize,
    test_size: usize,
    cfg: &TrainConfig,
) -> Result<ForecastRun> {
    let n = dataset.len();
    if n < train_size + test_size {
        return Err(Error::InsufficientData(format!(
            "{}: MECE needs {train_size} + {test_size} observations, have {n}",
            dataset.ticker
        )));
    }
    if train_size <= lag {
        return Err(Error::InsufficientData(format!(
            "train size {train_size} must exceed lag {lag}"
        )));
    }
    let prep = prepare(dataset, lag, include_dual)?;
    let origins: Vec<usize> = test_origins(n, test_size)?.collect();
    let samples = prep.samples(0..train_size)?;
    let model = train(&samples, cfg)?.params;
    let predictions = origins
        .iter()
        .map(|&t| prep.predict(&model, t))
        .collect::<Result<Vec<_>>>()?;
    let descriptor = RunDescriptor {
        ticker: dataset.ticker.clone(),
        lag,
        dual: include_dual,
        regime: Regime::Mece { train_size },
        test_size,
        retrain_per_origin: false,
        train: *cfg,
    };
    let provenance = vec![(0, train_size); origins.len()];
    Ok(prep.finish(descriptor, origins, predictions, provenance))
}

/// For each of the last `test_size` observations, trains a fresh model on exactly the
/// `window` observations before it (the `window - lag` lag samples inside that range)
/// and forecasts it.
///
/// Each origin's model is seeded from `(cfg.seed, origin)`, so a forecast depends only on
/// its own window.
pub fn forecast_rolling(
    dataset: &ForecastDataset,
    window: usize,
    lag: usize,
    include_dual: bool,
    test_size: usize,
    retrain_per_origin: bool,
    cfg: &TrainConfig,
) -> Result<ForecastRun> {
    if window <= lag {
        return Err(Error::WindowTooSmall { window, lag });
    }
    let n = dataset.len();
    let origins: Vec<usize> = test_origins(n, test_size)?.collect();
    if origins[0] < window {
        return Err(Error::InsufficientData(format!(
            "{}: first origin {} has fewer than {window} observations before it",
            dataset.ticker, origins[0]
        )));
    }
    let prep = prepare(dataset, lag, include_dual)?;

    let fit = |origin: usize| -> Result<LstmParams> {
        let samples = prep.samples(origin - window..origin)?;
        let cfg = TrainConfig {
            seed: derive_indexed(cfg.seed, "rolling-origin", origin as u64),
            ..*cfg
        };
        Ok(train(&samples, &cfg)?.params)
    };

    let (predictions, provenance): (Vec<f64>, Vec<(usize, usize)>) = if retrain_per_origin {
        let out = origins
            .par_iter()
            .map(|&t| Ok((prep.predict(&fit(t)?, t)?, (t - window, t))))
            .collect::<Result<Vec<_>>>()?;
        out.into_iter().unzip()
    } else {
        let first = origins[0];
        let model = fit(first)?;
        let preds = origins
            .iter()
            .map(|&t| prep.predict(&model, t))
            .collect::<Result<Vec<_>>>()?;
        (preds, vec![(first - window, first); origins.len()])
    };

    let descriptor = RunDescriptor {
        ticker: dataset.ticker.clone(),
        lag,
        dual: include_dual,
        regime: Regime::Rolling { window },
        test_size,
        retrain_per_origin,
        train: *cfg,
    };
    Ok(prep.finish(descriptor, origins, predictions, provenance))
}

pub fn run_regime(
    dataset: &ForecastDataset,
    spec: &RegimeSpec,
    lag: usize,
    include_dual: bool,
    cfg: &TrainConfig,
) -> Result<ForecastRun> {
    match spec.regime {
        Regime::Mece { train_size } => forecast_mece(dataset, lag, include_dual, train_size, spec.test_size, cfg),
        Regime::Rolling { window } => forecast_rolling(
            dataset,
            window,
            lag,
            include_dual,
            spec.test_size,
            spec.retrain_per_origin,
            cfg,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(n: usize) -> ForecastDataset {
        let start = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        let dates = (0..n).map(|i| start + chrono::Days::new(i as u64)).collect();
        let prices: Vec<f64> = (0..n).map(|i| 20.0 + (i as f64 * 0.3).sin()).collect();
        let sib: Vec<f64> = prices.iter().map(|p| p * 1.1).collect();
        ForecastDataset::new("A", dates, prices, vec![("B".into(), sib.clone()), ("C".into(), sib)]).unwrap()
    }

    fn quick() -> TrainConfig {
        TrainConfig {
            epochs: 5,
            hidden_size: 4,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn mece_bookkeeping() {
        let run = forecast_mece(&dataset(60), 4, true, 40, 20, &quick()).unwrap();
        assert_eq!(run.predictions.len(), 20);
        assert_eq!(run.origins, (40..60).collect::<Vec<_>>());
        assert!(run.provenance.iter().all(|&p| p == (0, 40)));
        assert!(matches!(
            forecast_mece(&dataset(50), 4, false, 40, 20, &quick()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn rolling_bookkeeping() {
        let run = forecast_rolling(&dataset(40), 5, 4, false, 10, true, &quick()).unwrap();
        for (t, p) in run.origins.iter().zip(&run.provenance) {
            assert_eq!(*p, (t - 5, *t));
        }
        assert!(matches!(
            forecast_rolling(&dataset(40), 5, 9, false, 10, true, &quick()),
            Err(Error::WindowTooSmall { window: 5, lag: 9 })
        ));
        assert!(forecast_rolling(&dataset(12), 5, 4, false, 10, true, &quick()).is_err());
    }

    #[test]
    fn train_once_mode() {
        let run = forecast_rolling(&dataset(40), 10, 4, false, 10, false, &quick()).unwrap();
        assert!(run.provenance.iter().all(|&p| p == (20, 30)));
    }

    #[test]
    fn dual_without_siblings_fails() {
        let mut d = dataset(40);
        d.siblings.clear();
        assert!(forecast_rolling(&d, 5, 4, true, 5, true, &quick()).is_err());
        assert!(forecast_rolling(&d, 5, 4, false, 5, true, &quick()).is_ok());
    }
}
