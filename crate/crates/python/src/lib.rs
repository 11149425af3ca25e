//! Python bindings: price series and premiums, wavelet coherence with significance,
//! rolling/MECE LSTM forecasts, metrics and the batch pipeline.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use dualclass_core::lstm::{run_regime, ForecastDataset, Regime, RegimeSpec, TrainConfig};
use dualclass_core::pipeline::{self, Analysis, HeatmapStyle, RunConfig};
use dualclass_core::wavelet::{
    coherence, cwt, significance, CoherenceField, MonteCarloSpec, MorletSpec, ScaleGrid, SmoothingSpec,
};
use dualclass_core::{ingest, metrics, rng, timeseries, Error};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_dates(dates: &[String]) -> PyResult<Vec<NaiveDate>> {
    dates
        .iter()
        .map(|d| {
            NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|e| PyValueError::new_err(format!("bad date '{d}': {e}")))
        })
        .collect()
}

fn format_dates(dates: &[NaiveDate]) -> Vec<String> {
    dates.iter().map(|d| d.to_string()).collect()
}

/// Daily high/low/mid prices of one ticker.
#[pyclass(name = "PriceSeries", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPriceSeries {
    inner: timeseries::PriceSeries,
}

#[pymethods]
impl PyPriceSeries {
    #[new]
    fn new(ticker: &str, dates: Vec<String>, high: Vec<f64>, low: Vec<f64>) -> PyResult<Self> {
        let inner = timeseries::PriceSeries::new(ticker, parse_dates(&dates)?, high, low).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_mid(ticker: &str, dates: Vec<String>, mid: Vec<f64>) -> PyResult<Self> {
        let inner = timeseries::PriceSeries::from_mid(ticker, parse_dates(&dates)?, mid).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, ticker, date_column = "date", high_column = "high", low_column = "low", date_format = "%Y-%m-%d"))]
    fn from_csv(
        path: &str,
        ticker: &str,
        date_column: &str,
        high_column: &str,
        low_column: &str,
        date_format: &str,
    ) -> PyResult<Self> {
        let format = ingest::CsvFormat {
            date_column: date_column.into(),
            high_column: high_column.into(),
            low_column: low_column.into(),
            date_format: date_format.into(),
            ..ingest::CsvFormat::default()
        };
        let inner = ingest::load_ohlc_csv(path, ticker, &format).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn ticker(&self) -> String {
        self.inner.ticker().to_string()
    }

    #[getter]
    fn dates(&self) -> Vec<String> {
        format_dates(self.inner.dates())
    }

    #[getter]
    fn mid(&self) -> Vec<f64> {
        self.inner.mid().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PriceSeries('{}', {} days)", self.inner.ticker(), self.inner.len())
    }
}

#[pyfunction]
fn mid_price(high: f64, low: f64) -> PyResult<f64> {
    timeseries::mid_price(high, low).map_err(py_err)
}

/// `(dates, returns)` with `r_t = mid_t / mid_{t-1} - 1`.
#[pyfunction]
fn daily_returns(series: &PyPriceSeries) -> PyResult<(Vec<String>, Vec<f64>)> {
    let r = timeseries::daily_returns(&series.inner).map_err(py_err)?;
    Ok((format_dates(&r.dates), r.values))
}

/// `(dates, premiums)` of `a` over `b` on their shared dates.
#[pyfunction]
fn premium_series(a: &PyPriceSeries, b: &PyPriceSeries) -> (Vec<String>, Vec<f64>) {
    let p = timeseries::premium_series(&a.inner, &b.inner);
    (format_dates(&p.dates), p.values)
}

/// Summary statistics as a dict (`min`, `q1`, `median`, `mean`, `q3`, `max` and counts).
#[pyfunction]
fn summarize(values: Vec<f64>) -> PyResult<BTreeMap<&'static str, f64>> {
    let s = timeseries::summarize(&values).map_err(py_err)?;
    Ok(BTreeMap::from([
        ("min", s.minimum),
        ("q1", s.q1),
        ("median", s.median),
        ("mean", s.mean),
        ("q3", s.q3),
        ("max", s.maximum),
        ("count_premium", s.count_premium as f64),
        ("count_discount", s.count_discount as f64),
        ("count_parity", s.count_parity as f64),
        ("n", s.n as f64),
    ]))
}

fn rows<T: Copy>(g: &dualclass_core::wavelet::Grid<T>) -> Vec<Vec<T>> {
    (0..g.rows()).map(|j| g.row(j).to_vec()).collect()
}

/// Squared coherence, phase and significance on a (scale, time) grid.
#[pyclass(name = "CoherenceField", frozen)]
struct PyCoherenceField {
    inner: CoherenceField,
}

#[pymethods]
impl PyCoherenceField {
    #[getter]
    fn rho2(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.rho2)
    }

    #[getter]
    fn phase(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.phase)
    }

    #[getter]
    fn significant(&self) -> Vec<Vec<bool>> {
        rows(&self.inner.significant)
    }

    #[getter]
    fn scales(&self) -> Vec<f64> {
        self.inner.grid.scales().to_vec()
    }

    #[getter]
    fn periods(&self) -> Vec<f64> {
        self.inner.grid.fourier_periods().to_vec()
    }

    #[getter]
    fn coi(&self) -> Vec<f64> {
        self.inner.coi.clone()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.num_scales(), self.inner.n)
    }

    fn inside_coi(&self, scale: usize, time: usize) -> PyResult<bool> {
        if scale >= self.inner.num_scales() || time >= self.inner.n {
            return Err(PyValueError::new_err("cell index out of range"));
        }
        Ok(self.inner.inside_coi(scale, time))
    }

    #[pyo3(signature = (title = ""))]
    fn to_svg(&self, title: &str) -> PyResult<String> {
        let style = HeatmapStyle {
            title: title.into(),
            ..HeatmapStyle::default()
        };
        pipeline::heatmap_svg(&self.inner, &style).map_err(py_err)
    }
}

fn scale_grid(n: usize, s0: f64, dj: f64, num_scales: Option<usize>, morlet: &MorletSpec) -> PyResult<ScaleGrid> {
    match num_scales {
        Some(k) => ScaleGrid::new(s0, dj, k, 1.0, morlet),
        None => ScaleGrid::with_defaults(n, 1.0, s0, dj, morlet),
    }
    .map_err(py_err)
}

/// Wavelet coherence of two equally long series. With `iterations > 0` the field carries
/// a Monte-Carlo significance mask against AR(1) surrogates.
#[pyfunction]
#[pyo3(signature = (a, b, iterations = 0, significance_level = 0.05, seed = 0, s0 = 2.0, dj = 1.0 / 12.0, num_scales = None))]
#[allow(clippy::too_many_arguments)]
fn wavelet_coherence(
    py: Python<'_>,
    a: Vec<f64>,
    b: Vec<f64>,
    iterations: usize,
    significance_level: f64,
    seed: u64,
    s0: f64,
    dj: f64,
    num_scales: Option<usize>,
) -> PyResult<PyCoherenceField> {
    let morlet = MorletSpec::default();
    let grid = scale_grid(a.len(), s0, dj, num_scales, &morlet)?;
    let smoothing = SmoothingSpec::default();
    let field = py
        .detach(|| {
            if iterations == 0 {
                coherence(&cwt(&a, &grid, &morlet)?, &cwt(&b, &grid, &morlet)?, &smoothing)
            } else {
                let mc = MonteCarloSpec {
                    iterations,
                    significance_level,
                    seed,
                };
                significance(&a, &b, &grid, &morlet, &smoothing, &mc).map(|r| r.field)
            }
        })
        .map_err(py_err)?;
    Ok(PyCoherenceField { inner: field })
}

/// `(periods, power)` of the Morlet transform, power as rows per scale.
#[pyfunction]
#[pyo3(signature = (x, s0 = 2.0, dj = 1.0 / 12.0, num_scales = None))]
fn wavelet_power(x: Vec<f64>, s0: f64, dj: f64, num_scales: Option<usize>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let morlet = MorletSpec::default();
    let grid = scale_grid(x.len(), s0, dj, num_scales, &morlet)?;
    let w = cwt(&x, &grid, &morlet).map_err(py_err)?;
    Ok((grid.fourier_periods().to_vec(), rows(&w.power())))
}

/// One forecast run. `regime` is `"rolling"` (uses `window`) or `"mece"` (uses
/// `train_size`). Returns a dict of lists: origins, predictions, actuals, train_start,
/// train_end.
#[pyfunction]
#[pyo3(signature = (prices, siblings = Vec::new(), regime = "rolling", window = 10, train_size = 0, lag = 4, dual = false, test_size = 30, epochs = 200, seed = 0, retrain_per_origin = true))]
#[allow(clippy::too_many_arguments)]
fn forecast(
    py: Python<'_>,
    prices: Vec<f64>,
    siblings: Vec<Vec<f64>>,
    regime: &str,
    window: usize,
    train_size: usize,
    lag: usize,
    dual: bool,
    test_size: usize,
    epochs: usize,
    seed: u64,
    retrain_per_origin: bool,
) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
    let regime = match regime {
        "rolling" => Regime::Rolling { window },
        "mece" => Regime::Mece { train_size },
        other => return Err(PyValueError::new_err(format!("unknown regime '{other}'"))),
    };
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let dates = (0..prices.len()).map(|i| start + chrono::Days::new(i as u64)).collect();
    let siblings = siblings
        .into_iter()
        .enumerate()
        .map(|(k, s)| (format!("sibling{k}"), s))
        .collect();
    let dataset = ForecastDataset::new("series", dates, prices, siblings).map_err(py_err)?;
    let spec = RegimeSpec {
        regime,
        test_size,
        retrain_per_origin,
    };
    let cfg = TrainConfig {
        epochs,
        seed,
        ..TrainConfig::default()
    };
    let run = py
        .detach(|| run_regime(&dataset, &spec, lag, dual, &cfg))
        .map_err(py_err)?;
    let as_f64 = |v: Vec<usize>| v.into_iter().map(|x| x as f64).collect::<Vec<f64>>();
    Ok(BTreeMap::from([
        ("origins", as_f64(run.origins.clone())),
        ("predictions", run.predictions.clone()),
        ("actuals", run.actuals.clone()),
        ("train_start", as_f64(run.provenance.iter().map(|p| p.0).collect())),
        ("train_end", as_f64(run.provenance.iter().map(|p| p.1).collect())),
    ]))
}

#[pyfunction]
fn rmse(pred: Vec<f64>, actual: Vec<f64>) -> PyResult<f64> {
    metrics::rmse(&pred, &actual).map_err(py_err)
}

#[pyfunction]
fn mae(pred: Vec<f64>, actual: Vec<f64>) -> PyResult<f64> {
    metrics::mae(&pred, &actual).map_err(py_err)
}

/// Mean absolute percentage error, in percent.
#[pyfunction]
fn mape(pred: Vec<f64>, actual: Vec<f64>) -> PyResult<f64> {
    metrics::mape(&pred, &actual).map_err(py_err)
}

#[pyfunction]
fn derive_seed(master: u64, label: &str) -> u64 {
    rng::derive_seed(master, label)
}

/// `(analysis, written files, failures)`.
type AnalysisSummary = (String, Vec<String>, Vec<String>);

/// Runs the analyses of a JSON config file. Returns `[(analysis, written, failures)]`.
#[pyfunction]
#[pyo3(signature = (config_path, only = None, seed = None, out = None))]
fn run_pipeline(
    py: Python<'_>,
    config_path: &str,
    only: Option<&str>,
    seed: Option<u64>,
    out: Option<&str>,
) -> PyResult<Vec<AnalysisSummary>> {
    let mut cfg = RunConfig::from_file(config_path).map_err(py_err)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output_dir = out.into();
    }
    let only = match only {
        Some(s) => s.parse::<Analysis>().map_err(py_err)?,
        None => cfg.analysis,
    };
    let reports = py.detach(|| pipeline::run_analysis(&cfg, only)).map_err(py_err)?;
    Ok(reports
        .into_iter()
        .map(|(a, r)| (a.to_string(), r.written, r.failures))
        .collect())
}

#[pymodule]
fn dualclass(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPriceSeries>()?;
    m.add_class::<PyCoherenceField>()?;
    m.add_function(wrap_pyfunction!(mid_price, m)?)?;
    m.add_function(wrap_pyfunction!(daily_returns, m)?)?;
    m.add_function(wrap_pyfunction!(premium_series, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(wavelet_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(wavelet_power, m)?)?;
    m.add_function(wrap_pyfunction!(forecast, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(mae, m)?)?;
    m.add_function(wrap_pyfunction!(mape, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
