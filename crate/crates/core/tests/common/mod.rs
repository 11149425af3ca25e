#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use dualclass_core::pipeline::{RunConfig, TickerInput};
use dualclass_core::rng::{derive_seed, rng_from_seed};
use rand::Rng;
use rand_distr::StandardNormal;

pub struct Bars {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
}

pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().unwrap();
    }
    out
}

/// Share classes following a common log trend plus their own AR(1) deviations. Every
/// ticker after the first misses a handful of dates.
pub fn synthetic_market(tickers: &[&str], n: usize, seed: u64) -> Vec<Bars> {
    let dates = business_days(NaiveDate::from_ymd_opt(2012, 1, 2).unwrap(), n);
    let mut rng = rng_from_seed(seed);
    let mut trend = Vec::with_capacity(n);
    let mut level: f64 = 0.0;
    for t in 0..n {
        level += 0.0004 + 0.012 * rng.sample::<f64, _>(StandardNormal);
        trend.push(level + 0.05 * (t as f64 / 40.0).sin());
    }
    tickers
        .iter()
        .enumerate()
        .map(|(k, &ticker)| {
            let mut rng = rng_from_seed(derive_seed(seed, ticker));
            let base = 20.0 + 4.0 * k as f64;
            let mut dev: f64 = 0.0;
            let (mut ds, mut hs, mut ls) = (Vec::new(), Vec::new(), Vec::new());
            for t in 0..n {
                dev = 0.8 * dev + 0.01 * rng.sample::<f64, _>(StandardNormal);
                let mid = base * (trend[t] + dev).exp();
                let spread = 0.004 + 0.01 * rng.random::<f64>();
                if k > 0 && t > 0 && t % 97 == 13 * k {
                    continue;
                }
                ds.push(dates[t]);
                hs.push(mid * (1.0 + spread));
                ls.push(mid * (1.0 - spread));
            }
            Bars {
                ticker: ticker.to_string(),
                dates: ds,
                high: hs,
                low: ls,
            }
        })
        .collect()
}

pub fn write_bars(dir: &Path, bars: &Bars) -> PathBuf {
    let path = dir.join(format!("{}.csv", bars.ticker));
    let mut text = String::from("Date,Open,High,Low,Close\n");
    for i in 0..bars.dates.len() {
        let (h, l) = (bars.high[i], bars.low[i]);
        text.push_str(&format!(
            "{},{},{h},{l},{}\n",
            bars.dates[i],
            (h + l) / 2.0,
            (h + l) / 2.0
        ));
    }
    std::fs::write(&path, text).unwrap();
    path
}

pub fn config_for(dir: &Path, bars: &[Bars], out: &Path) -> RunConfig {
    let inputs = bars
        .iter()
        .map(|b| TickerInput {
            ticker: b.ticker.clone(),
            path: write_bars(dir, b),
        })
        .collect();
    RunConfig::new(inputs, out)
}

/// Every file under `root` (relative path, bytes), sorted.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}
