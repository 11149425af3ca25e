//! Forecast accuracy metrics and the regime x (lag, dual) comparison grid.
//!
//! Metrics are computed on prices (not scaled values). MAPE is in percent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstm::{ForecastRun, Regime};

/// Actuals at or below this magnitude make MAPE undefined.
pub const MAPE_ZERO_TOLERANCE: f64 = 1e-9;

fn check_pair(pred: &[f64], actual: &[f64]) -> Result<()> {
    if pred.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: actual.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(pred, actual)?;
    let sse: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(pred, actual)?;
    let sae: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(sae / pred.len() as f64)
}

/// `(100 / n) * sum |pred - actual| / |actual|`
pub fn mape(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(pred, actual)?;
    if let Some(index) = actual.iter().position(|a| !(a.abs() > MAPE_ZERO_TOLERANCE)) {
        return Err(Error::NearZeroActual {
            index,
            value: actual[index],
        });
    }
    let s: f64 = pred.iter().zip(actual).map(|(p, a)| ((p - a) / a).abs()).sum();
    Ok(100.0 * s / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub rmse: f64,
    pub mae: f64,
    /// Percent.
    pub mape: f64,
}

impl MetricTriple {
    pub fn compute(pred: &[f64], actual: &[f64]) -> Result<Self> {
        Ok(Self {
            rmse: rmse(pred, actual)?,
            mae: mae(pred, actual)?,
            mape: mape(pred, actual)?,
        })
    }

    pub fn of_run(run: &ForecastRun) -> Result<Self> {
        Self::compute(&run.predictions, &run.actuals)
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Rmse => self.rmse,
            Metric::Mae => self.mae,
            Metric::Mape => self.mape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "RMSE")]
    Rmse,
    #[serde(rename = "MAE")]
    Mae,
    #[serde(rename = "MAPE")]
    Mape,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Rmse, Metric::Mae, Metric::Mape];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Rmse => "RMSE",
            Metric::Mae => "MAE",
            Metric::Mape => "MAPE",
        }
    }
}

/// Row block of the comparison table. Rolling windows sort before the single split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeRow {
    Window(usize),
    Mece,
}

impl RegimeRow {
    pub fn of(regime: &Regime) -> Self {
        match regime {
            Regime::Mece { .. } => RegimeRow::Mece,
            Regime::Rolling { window } => RegimeRow::Window(*window),
        }
    }

    pub fn label(&self) -> String {
        match self {
            RegimeRow::Window(w) => format!("window={w}"),
            RegimeRow::Mece => "MECE".into(),
        }
    }

    pub fn window(&self) -> Option<usize> {
        match self {
            RegimeRow::Window(w) => Some(*w),
            RegimeRow::Mece => None,
        }
    }
}

/// One metric triple per scored configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRun {
    pub ticker: String,
    pub regime: RegimeRow,
    pub lag: usize,
    pub dual: bool,
    pub metrics: MetricTriple,
}

impl ScoredRun {
    pub fn from_run(run: &ForecastRun) -> Result<Self> {
        Ok(Self {
            ticker: run.descriptor.ticker.clone(),
            regime: RegimeRow::of(&run.descriptor.regime),
            lag: run.descriptor.lag,
            dual: run.descriptor.dual,
            metrics: MetricTriple::of_run(run)?,
        })
    }
}

/// Comparison table for one ticker: rows are regime x metric, columns lag x dual.
/// Cells without a run stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportGrid {
    pub ticker: String,
    pub regimes: Vec<RegimeRow>,
    pub lags: Vec<usize>,
    pub duals: Vec<bool>,
    cells: Vec<Option<MetricTriple>>,
}

impl ReportGrid {
    pub const DEFAULT_WINDOWS: [usize; 4] = [5, 10, 20, 50];
    pub const DEFAULT_LAGS: [usize; 2] = [4, 9];

    fn empty(ticker: &str, regimes: Vec<RegimeRow>, lags: Vec<usize>) -> Self {
        let duals = vec![false, true];
        let cells = vec![None; regimes.len() * lags.len() * duals.len()];
        Self {
            ticker: ticker.to_string(),
            regimes,
            lags,
            duals,
            cells,
        }
    }

    fn index(&self, regime: RegimeRow, lag: usize, dual: bool) -> Option<usize> {
        let r = self.regimes.iter().position(|x| *x == regime)?;
        let l = self.lags.iter().position(|x| *x == lag)?;
        let d = self.duals.iter().position(|x| *x == dual)?;
        Some((r * self.lags.len() + l) * self.duals.len() + d)
    }

    pub fn cell(&self, regime: RegimeRow, lag: usize, dual: bool) -> Option<&MetricTriple> {
        self.index(regime, lag, dual).and_then(|i| self.cells[i].as_ref())
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_missing(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Column keys in table order.
    pub fn columns(&self) -> Vec<(usize, bool)> {
        self.lags
            .iter()
            .flat_map(|&l| self.duals.iter().map(move |&d| (l, d)))
            .collect()
    }

    /// Table-shaped CSV: one row per (regime, metric), values to 4 decimals, `NA` for
    /// missing cells.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("ticker,regime,metric");
        for (lag, dual) in self.columns() {
            let _ = write!(out, ",lag{lag}_dual{}", yes_no(dual));
        }
        out.push('\n');
        for &regime in &self.regimes {
            for metric in Metric::ALL {
                let _ = write!(out, "{},{},{}", self.ticker, regime.label(), metric.name());
                for (lag, dual) in self.columns() {
                    match self.cell(regime, lag, dual) {
                        Some(m) => {
                            let _ = write!(out, ",{:.4}", m.get(metric));
                        }
                        None => out.push_str(",NA"),
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    /// JSON mirror of [`to_table_csv`](Self::to_table_csv).
    pub fn to_table_json(&self) -> serde_json::Value {
        let columns: Vec<_> = self
            .columns()
            .into_iter()
            .map(|(lag, dual)| serde_json::json!({"lag": lag, "dual": yes_no(dual)}))
            .collect();
        let mut rows = Vec::new();
        for &regime in &self.regimes {
            for metric in Metric::ALL {
                let values: Vec<Option<String>> = self
                    .columns()
                    .into_iter()
                    .map(|(lag, dual)| self.cell(regime, lag, dual).map(|m| format!("{:.4}", m.get(metric))))
                    .collect();
                rows.push(serde_json::json!({
                    "regime": regime.label(),
                    "window": regime.window(),
                    "metric": metric.name(),
                    "values": values,
                }));
            }
        }
        serde_json::json!({"ticker": self.ticker, "columns": columns, "rows": rows})
    }

    /// Long format: `ticker,regime,window,lag,dual,metric,value` with unrounded values;
    /// missing cells are omitted.
    pub fn long_rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for &regime in &self.regimes {
            for (lag, dual) in self.columns() {
                if let Some(m) = self.cell(regime, lag, dual) {
                    for metric in Metric::ALL {
                        rows.push(format!(
                            "{},{},{},{},{},{},{}",
                            self.ticker,
                            regime.label(),
                            regime.window().map(|w| w.to_string()).unwrap_or_default(),
                            lag,
                            yes_no(dual),
                            metric.name(),
                            m.get(metric)
                        ));
                    }
                }
            }
        }
        rows
    }
}

pub const LONG_HEADER: &str = "ticker,regime,window,lag,dual,metric,value";

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Groups scored runs into one grid per ticker (tickers in order of first appearance).
///
/// Every grid has at least the rolling windows 5/10/20/50, the MECE row and lags 4 and 9;
/// any other window or lag present in the runs is added. Two runs for the same cell are an
/// error.
pub fn assemble_grid(runs: &[ScoredRun]) -> Result<Vec<ReportGrid>> {
    let mut tickers: Vec<&str> = Vec::new();
    for r in runs {
        if !tickers.contains(&r.ticker.as_str()) {
            tickers.push(&r.ticker);
        }
    }
    let mut grids = Vec::with_capacity(tickers.len());
    for ticker in tickers {
        let mine: Vec<&ScoredRun> = runs.iter().filter(|r| r.ticker == ticker).collect();
        let mut regimes: BTreeSet<RegimeRow> = ReportGrid::DEFAULT_WINDOWS
            .iter()
            .map(|&w| RegimeRow::Window(w))
            .chain([RegimeRow::Mece])
            .collect();
        let mut lags: BTreeSet<usize> = ReportGrid::DEFAULT_LAGS.into_iter().collect();
        for r in &mine {
            regimes.insert(r.regime);
            lags.insert(r.lag);
        }
        let mut grid = ReportGrid::empty(ticker, regimes.into_iter().collect(), lags.into_iter().collect());
        let mut seen = BTreeMap::new();
        for r in mine {
            let key = (r.regime, r.lag, r.dual);
            if seen.insert(key, ()).is_some() {
                return Err(Error::DuplicateConfig(format!(
                    "{} {} lag {} dual {}",
                    ticker,
                    r.regime.label(),
                    r.lag,
                    yes_no(r.dual)
                )));
            }
            let idx = grid.index(r.regime, r.lag, r.dual).expect("layout covers every run");
            grid.cells[idx] = Some(r.metrics);
        }
        grids.push(grid);
    }
    Ok(grids)
}
