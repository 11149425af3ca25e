use std::fmt::Write as _;
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{Analysis, RunConfig};
use super::manifest::{update_manifest, write_output};
use super::svg::{render_heatmap, HeatmapStyle};
use crate::error::{Error, Result};
use crate::ingest::load_ohlc_csv;
use crate::lstm::{run_regime, ForecastDataset, ForecastRun, RegimeSpec, RunDescriptor};
use crate::metrics::{assemble_grid, MetricTriple, ScoredRun, LONG_HEADER};
use crate::rng::derive_seed;
use crate::timeseries::{align_all, align_series, daily_returns, premium_series, summarize, PriceSeries};
use crate::wavelet::{significance, MonteCarloSpec, ScaleGrid, SignificanceResult};

/// What a command wrote and which parts of it failed or were skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandReport {
    pub written: Vec<String>,
    pub failures: Vec<String>,
}

impl CommandReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    fn extend(&mut self, other: CommandReport) {
        self.written.extend(other.written);
        self.failures.extend(other.failures);
    }
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Vec<PriceSeries>> {
    cfg.inputs
        .iter()
        .map(|input| {
            load_ohlc_csv(&input.path, &input.ticker, &cfg.format).map_err(|e| match e {
                Error::Parse { row, message } => Error::Parse {
                    row,
                    message: format!("{}: {message}", input.path.display()),
                },
                Error::Invariant { row, message } => Error::Invariant {
                    row,
                    message: format!("{}: {message}", input.path.display()),
                },
                other => other,
            })
        })
        .collect()
}

fn require_pairs(series: &[PriceSeries]) -> Result<()> {
    if series.len() < 2 {
        return Err(Error::Config(format!(
            "pairwise analyses need at least two tickers, got {}",
            series.len()
        )));
    }
    Ok(())
}

fn pairs(len: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..len).flat_map(move |i| (i + 1..len).map(move |j| (i, j)))
}

pub const SUMMARY_HEADER: &str =
    "numerator,denominator,min,q1,median,mean,q3,max,count_premium,count_discount,count_parity,n";

/// Premium series and summary statistics for every pair `i < j` of inputs (numerator
/// `i`).
pub fn cmd_premiums(cfg: &RunConfig, series: &[PriceSeries]) -> Result<CommandReport> {
    require_pairs(series)?;
    let root = &cfg.output_dir;
    let scale = if cfg.premiums.percent { 100.0 } else { 1.0 };
    let mut report = CommandReport::default();
    let mut csv = format!("{SUMMARY_HEADER}\n");
    let mut json = Vec::new();
    for (i, j) in pairs(series.len()) {
        let p = premium_series(&series[i], &series[j]);
        if p.is_empty() {
            return Err(Error::InsufficientData(format!(
                "{} and {} share no dates",
                series[i].ticker(),
                series[j].ticker()
            )));
        }
        let values: Vec<f64> = p.values.iter().map(|v| v * scale).collect();
        let stats = summarize(&values)?;
        let mut body = String::from("date,premium\n");
        for (d, v) in p.dates.iter().zip(&values) {
            let _ = writeln!(body, "{d},{v}");
        }
        report.written.push(write_output(
            root,
            &format!("premiums/{}_over_{}.csv", p.numerator, p.denominator),
            body,
        )?);
        let _ = writeln!(
            csv,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
            p.numerator,
            p.denominator,
            stats.minimum,
            stats.q1,
            stats.median,
            stats.mean,
            stats.q3,
            stats.maximum,
            stats.count_premium,
            stats.count_discount,
            stats.count_parity,
            stats.n
        );
        json.push(serde_json::json!({
            "numerator": p.numerator,
            "denominator": p.denominator,
            "stats": stats,
        }));
        info!("premium {} over {}: {} days", p.numerator, p.denominator, stats.n);
    }
    report.written.push(write_output(root, "premiums/summary.csv", csv)?);
    let mut text =
        serde_json::to_string_pretty(&serde_json::json!({ "percent": cfg.premiums.percent, "pairs": json }))?;
    text.push('\n');
    report.written.push(write_output(root, "premiums/summary.json", text)?);
    Ok(report)
}

/// Return series of `a` and `b` on shared dates, then coherence and its significance.
pub fn coherence_pair(
    a: &PriceSeries,
    b: &PriceSeries,
    cfg: &RunConfig,
) -> Result<(Vec<chrono::NaiveDate>, SignificanceResult)> {
    let (a, b) = align_series(a, b);
    if a.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} and {} share fewer than two dates",
            a.ticker(),
            b.ticker()
        )));
    }
    let ra = daily_returns(&a)?;
    let rb = daily_returns(&b)?;
    let w = &cfg.wavelet;
    if ra.len() < w.min_length {
        return Err(Error::Length {
            needed: w.min_length,
            got: ra.len(),
        });
    }
    let grid = match w.num_scales {
        Some(k) => ScaleGrid::new(w.s0, w.dj, k, w.dt, &w.morlet)?,
        None => ScaleGrid::with_defaults(ra.len(), w.dt, w.s0, w.dj, &w.morlet)?,
    };
    let mc = MonteCarloSpec {
        seed: derive_seed(cfg.seed, &format!("coherence/{}/{}", a.ticker(), b.ticker())),
        ..w.monte_carlo
    };
    let result = significance(&ra.values, &rb.values, &grid, &w.morlet, &w.smoothing, &mc)?;
    Ok((ra.dates, result))
}

pub const COHERENCE_HEADER: &str = "time_index,date,scale_days,period_days,rho2,phase_rad,significant,inside_coi";

/// Coherence CSV, summary JSON and heatmap SVG for every pair `i < j`. Pairs that are
/// too short are reported as failures and skipped.
pub fn cmd_coherence(cfg: &RunConfig, series: &[PriceSeries]) -> Result<CommandReport> {
    require_pairs(series)?;
    let root = &cfg.output_dir;
    let mut report = CommandReport::default();
    for (i, j) in pairs(series.len()) {
        let (ta, tb) = (series[i].ticker(), series[j].ticker());
        let (dates, result) = match coherence_pair(&series[i], &series[j], cfg) {
            Ok(r) => r,
            Err(e @ (Error::Length { .. } | Error::InsufficientData(_) | Error::DegenerateVariance)) => {
                warn!("coherence {ta}/{tb} skipped: {e}");
                report.failures.push(format!("coherence {ta}/{tb}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let field = &result.field;
        let stem = format!("coherence/{ta}_{tb}");
        let mut csv = format!("{COHERENCE_HEADER}\n");
        let scales = field.grid.scales();
        let periods = field.grid.fourier_periods();
        for j in 0..field.num_scales() {
            for (t, date) in dates.iter().enumerate().take(field.n) {
                let _ = writeln!(
                    csv,
                    "{t},{},{},{},{},{},{},{}",
                    date,
                    scales[j],
                    periods[j],
                    field.rho2.get(j, t),
                    field.phase.get(j, t),
                    u8::from(*field.significant.get(j, t)),
                    u8::from(field.inside_coi(j, t))
                );
            }
        }
        report.written.push(write_output(root, &format!("{stem}.csv"), csv)?);

        let cells = field.num_scales() * field.n;
        let sig = field.significant.iter().filter(|&&s| s).count();
        let (mut coi_cells, mut coi_sig) = (0usize, 0usize);
        for j in 0..field.num_scales() {
            for t in 0..field.n {
                if field.inside_coi(j, t) {
                    coi_cells += 1;
                    coi_sig += usize::from(*field.significant.get(j, t));
                }
            }
        }
        let summary = serde_json::json!({
            "a": ta,
            "b": tb,
            "n": field.n,
            "num_scales": field.num_scales(),
            "first_date": dates.first().map(|d| d.to_string()),
            "last_date": dates.last().map(|d| d.to_string()),
            "surrogates": cfg.wavelet.monte_carlo.iterations,
            "significance_level": cfg.wavelet.monte_carlo.significance_level,
            "ar1_a": result.ar1_a,
            "ar1_b": result.ar1_b,
            "fraction_significant": sig as f64 / cells as f64,
            "fraction_significant_inside_coi": if coi_cells > 0 { coi_sig as f64 / coi_cells as f64 } else { 0.0 },
            "max_clamp_excursion": field.max_clamp_excursion,
        });
        let mut text = serde_json::to_string_pretty(&summary)?;
        text.push('\n');
        report.written.push(write_output(root, &format!("{stem}.json"), text)?);

        let svg_rel = format!("{stem}.svg");
        let style = HeatmapStyle {
            title: format!("Wavelet coherence of {ta} and {tb} daily returns"),
            ..HeatmapStyle::default()
        };
        render_heatmap(field, root.join(&svg_rel), &style)?;
        report.written.push(svg_rel);
        info!("coherence {ta}/{tb}: {sig} of {cells} cells significant");
    }
    Ok(report)
}

/// Per-run record written next to the predictions; `report` rebuilds grids from these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub descriptor: RunDescriptor,
    pub metrics: MetricTriple,
    pub forecasts: usize,
    pub predictions: String,
}

pub const PREDICTIONS_HEADER: &str = "origin_index,date,actual,predicted,train_start,train_end";

/// Forecast datasets on the dates shared by all inputs; every other input is a sibling.
pub fn forecast_datasets(series: &[PriceSeries]) -> Result<Vec<ForecastDataset>> {
    let aligned = align_all(series);
    aligned
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let siblings = aligned
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, o)| (o.ticker().to_string(), o.mid().to_vec()))
                .collect();
            ForecastDataset::new(s.ticker(), s.dates().to_vec(), s.mid().to_vec(), siblings)
        })
        .collect()
}

fn predictions_csv(run: &ForecastRun) -> String {
    let mut csv = format!("{PREDICTIONS_HEADER}\n");
    for k in 0..run.origins.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            run.origins[k], run.dates[k], run.actuals[k], run.predictions[k], run.provenance[k].0, run.provenance[k].1
        );
    }
    csv
}

/// Seed for one forecast configuration, derived from the master seed and the run key.
pub fn run_seed(master: u64, descriptor_key: &str) -> u64 {
    derive_seed(master, &format!("forecast/{descriptor_key}"))
}

/// Runs the declared ticker x lag x dual x regime grid. Configurations the data cannot
/// support are reported as failures and skipped.
pub fn cmd_forecast(cfg: &RunConfig, series: &[PriceSeries]) -> Result<CommandReport> {
    let root = &cfg.output_dir;
    let f = &cfg.forecast;
    let mut report = CommandReport::default();
    let mut scored = Vec::new();
    let datasets = forecast_datasets(series)?;
    let targets = datasets
        .iter()
        .filter(|d| f.tickers.as_ref().is_none_or(|t| t.contains(&d.ticker)));
    for dataset in targets {
        for &lag in &f.lags {
            for &dual in &f.dual {
                for &regime in &f.regimes {
                    let spec = RegimeSpec {
                        regime,
                        test_size: f.test_size,
                        retrain_per_origin: f.retrain_per_origin,
                    };
                    let key = RunDescriptor {
                        ticker: dataset.ticker.clone(),
                        lag,
                        dual,
                        regime,
                        test_size: f.test_size,
                        retrain_per_origin: f.retrain_per_origin,
                        train: f.train,
                    }
                    .key();
                    let train = crate::lstm::TrainConfig {
                        seed: run_seed(cfg.seed, &key),
                        ..f.train
                    };
                    let run = match run_regime(dataset, &spec, lag, dual, &train) {
                        Ok(run) => run,
                        Err(
                            e @ (Error::InsufficientData(_)
                            | Error::WindowTooSmall { .. }
                            | Error::Length { .. }
                            | Error::Config(_)
                            | Error::Divergence { .. }),
                        ) => {
                            warn!("forecast {key} skipped: {e}");
                            report.failures.push(format!("forecast {key}: {e}"));
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let metrics = MetricTriple::of_run(&run)?;
                    let pred_rel = write_output(root, &format!("forecast/runs/{key}.csv"), predictions_csv(&run))?;
                    let manifest = RunManifest {
                        descriptor: run.descriptor.clone(),
                        metrics,
                        forecasts: run.origins.len(),
                        predictions: pred_rel.clone(),
                    };
                    let mut text = serde_json::to_string_pretty(&manifest)?;
                    text.push('\n');
                    report.written.push(pred_rel);
                    report
                        .written
                        .push(write_output(root, &format!("forecast/runs/{key}.json"), text)?);
                    scored.push(ScoredRun::from_run(&run)?);
                    info!(
                        "forecast {key}: RMSE {:.4} MAE {:.4} MAPE {:.4}",
                        metrics.rmse, metrics.mae, metrics.mape
                    );
                }
            }
        }
    }
    report.extend(write_grids(root, &scored)?);
    Ok(report)
}

fn write_grids(root: &Path, scored: &[ScoredRun]) -> Result<CommandReport> {
    let mut report = CommandReport::default();
    let mut long = format!("{LONG_HEADER}\n");
    for grid in assemble_grid(scored)? {
        report.written.push(write_output(
            root,
            &format!("forecast/grid_{}.csv", grid.ticker),
            grid.to_table_csv(),
        )?);
        let mut text = serde_json::to_string_pretty(&grid.to_table_json())?;
        text.push('\n');
        report.written.push(write_output(
            root,
            &format!("forecast/grid_{}.json", grid.ticker),
            text,
        )?);
        for row in grid.long_rows() {
            long.push_str(&row);
            long.push('\n');
        }
    }
    report
        .written
        .push(write_output(root, "forecast/metrics_long.csv", long)?);
    Ok(report)
}

/// Rebuilds the comparison grids from the run records under `output_dir/forecast/runs`.
pub fn cmd_report(output_dir: &Path) -> Result<CommandReport> {
    let dir = output_dir.join("forecast").join("runs");
    let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InsufficientData(format!("no run records in {}", dir.display())));
    }
    let mut scored = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let run: RunManifest = serde_json::from_str(&text)?;
        scored.push(ScoredRun {
            ticker: run.descriptor.ticker.clone(),
            regime: crate::metrics::RegimeRow::of(&run.descriptor.regime),
            lag: run.descriptor.lag,
            dual: run.descriptor.dual,
            metrics: run.metrics,
        });
    }
    // run records sort by file name; grids follow ticker order of first appearance
    write_grids(output_dir, &scored)
}

/// Runs the selected analyses, writes the effective config and updates the output
/// manifest. Returns one report per analysis in the order premiums, coherence, forecast.
pub fn run_analysis(cfg: &RunConfig, only: Analysis) -> Result<Vec<(Analysis, CommandReport)>> {
    cfg.validate()?;
    let series = load_inputs(cfg)?;
    let mut reports = Vec::new();
    let mut written = Vec::new();
    let mut text = cfg.to_json()?;
    text.push('\n');
    written.push(write_output(&cfg.output_dir, &format!("config_{only}.json"), text)?);
    for analysis in [Analysis::Premiums, Analysis::Coherence, Analysis::Forecast] {
        if !only.includes(analysis) {
            continue;
        }
        let report = match analysis {
            Analysis::Premiums => cmd_premiums(cfg, &series),
            Analysis::Coherence => cmd_coherence(cfg, &series),
            Analysis::Forecast => cmd_forecast(cfg, &series),
            Analysis::All => unreachable!(),
        };
        let report = match report {
            Ok(r) => r,
            Err(e) => CommandReport {
                written: Vec::new(),
                failures: vec![format!("{analysis}: {e}")],
            },
        };
        written.extend(report.written.iter().cloned());
        reports.push((analysis, report));
    }
    update_manifest(&cfg.output_dir, &written)?;
    Ok(reports)
}

/// `report` subcommand: grids plus a manifest update.
pub fn run_report(output_dir: &Path) -> Result<CommandReport> {
    let report = cmd_report(output_dir)?;
    update_manifest(output_dir, &report.written)?;
    Ok(report)
}
