//! Daily price series, returns, pairwise premiums and premium summary statistics.
//!
//! Premiums are stored as dimensionless fractions (`0.5` is a 50% premium); percent
//! rendering happens only when reports are written.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mid-price of one trading day, `0.5 * (high + low)`.
pub fn mid_price(high: f64, low: f64) -> Result<f64> {
    if !(high.is_finite() && low.is_finite()) {
        return Err(Error::Domain(format!("non-finite price (high {high}, low {low})")));
    }
    if low <= 0.0 {
        return Err(Error::Domain(format!("low price {low} is not positive")));
    }
    if high < low {
        return Err(Error::Domain(format!("high {high} is below low {low}")));
    }
    Ok(0.5 * (high + low))
}

/// Daily high/low/mid prices for one ticker on strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    ticker: String,
    dates: Vec<NaiveDate>,
    high: Vec<f64>,
    low: Vec<f64>,
    mid: Vec<f64>,
}

impl PriceSeries {
    /// Builds a series from high and low prices. An empty series is allowed (it is the
    /// result of aligning disjoint date sets); everything else must satisfy
    /// `high >= low > 0` on strictly increasing dates.
    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, high: Vec<f64>, low: Vec<f64>) -> Result<Self> {
        if dates.len() != high.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: high.len(),
            });
        }
        if dates.len() != low.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: low.len(),
            });
        }
        check_increasing(&dates)?;
        let mid = high
            .iter()
            .zip(&low)
            .enumerate()
            .map(|(row, (&h, &l))| {
                mid_price(h, l).map_err(|e| Error::Invariant {
                    row,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ticker: ticker.into(),
            dates,
            high,
            low,
            mid,
        })
    }

    /// Series where only a mid-price is known; high and low are set equal to it.
    pub fn from_mid(ticker: impl Into<String>, dates: Vec<NaiveDate>, mid: Vec<f64>) -> Result<Self> {
        Self::new(ticker, dates, mid.clone(), mid)
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn mid(&self) -> &[f64] {
        &self.mid
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Restriction to the given row indices (assumed increasing).
    fn select(&self, rows: &[usize]) -> Self {
        Self {
            ticker: self.ticker.clone(),
            dates: rows.iter().map(|&i| self.dates[i]).collect(),
            high: rows.iter().map(|&i| self.high[i]).collect(),
            low: rows.iter().map(|&i| self.low[i]).collect(),
            mid: rows.iter().map(|&i| self.mid[i]).collect(),
        }
    }
}

fn check_increasing(dates: &[NaiveDate]) -> Result<()> {
    for (row, w) in dates.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::Invariant {
                row: row + 1,
                message: format!("date {} does not follow {}", w[1], w[0]),
            });
        }
    }
    Ok(())
}

/// Fractional returns of the mid-price; one shorter than the source series and dated
/// by the later day of each pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn daily_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Length { needed: 2, got: n });
    }
    let values = series.mid.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    Ok(ReturnSeries {
        dates: series.dates[1..].to_vec(),
        values,
    })
}

/// Restricts both series to the dates they share. Disjoint inputs give two empty series.
pub fn align_series(a: &PriceSeries, b: &PriceSeries) -> (PriceSeries, PriceSeries) {
    let (mut rows_a, mut rows_b) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a.dates[i].cmp(&b.dates[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                rows_a.push(i);
                rows_b.push(j);
                i += 1;
                j += 1;
            }
        }
    }
    (a.select(&rows_a), b.select(&rows_b))
}

/// Restricts every series to the dates common to all of them.
pub fn align_all(series: &[PriceSeries]) -> Vec<PriceSeries> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    let mut common = first.clone();
    for s in &series[1..] {
        common = align_series(&common, s).0;
    }
    series.iter().map(|s| align_series(s, &common).0).collect()
}

/// Relative premium of one ticker over another, `mid_a / mid_b - 1`, on shared dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremiumSeries {
    pub numerator: String,
    pub denominator: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl PremiumSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn premium_series(a: &PriceSeries, b: &PriceSeries) -> PremiumSeries {
    let (a, b) = if a.dates == b.dates {
        (a.clone(), b.clone())
    } else {
        align_series(a, b)
    };
    let values = a.mid.iter().zip(&b.mid).map(|(x, y)| x / y - 1.0).collect();
    PremiumSeries {
        numerator: a.ticker.clone(),
        denominator: b.ticker.clone(),
        dates: a.dates,
        values,
    }
}

/// Distribution summary of a premium series plus premium/discount/parity day counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    #[serde(rename = "min")]
    pub minimum: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    #[serde(rename = "max")]
    pub maximum: f64,
    pub count_premium: usize,
    pub count_discount: usize,
    pub count_parity: usize,
    pub n: usize,
}

/// Quantile of already-sorted data by linear interpolation between the order statistics
/// around position `(n - 1) * q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // summing in sorted order keeps the mean independent of input order
    let mean = sorted.iter().sum::<f64>() / n as f64;
    Ok(SummaryStats {
        minimum: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        mean,
        q3: quantile_sorted(&sorted, 0.75),
        maximum: sorted[n - 1],
        count_premium: values.iter().filter(|&&v| v > 0.0).count(),
        count_discount: values.iter().filter(|&&v| v < 0.0).count(),
        count_parity: values.iter().filter(|&&v| v == 0.0).count(),
        n,
    })
}

pub fn premium_summary(p: &PremiumSeries) -> Result<SummaryStats> {
    summarize(&p.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn day(i: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Days::new(i as u64)
    }

    fn series(ticker: &str, days: &[u32], mid: &[f64]) -> PriceSeries {
        PriceSeries::from_mid(ticker, days.iter().map(|&d| day(d)).collect(), mid.to_vec()).unwrap()
    }

    #[test]
    fn mid_price_examples() {
        assert_eq!(mid_price(10.0, 8.0).unwrap(), 9.0);
        assert_eq!(mid_price(5.0, 5.0).unwrap(), 5.0);
        assert_abs_diff_eq!(mid_price(2.34, 2.10).unwrap(), 2.22, epsilon = 1e-12);
        assert!(matches!(mid_price(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(mid_price(1.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn construction_rejects_bad_rows() {
        let dates = vec![day(0), day(1)];
        assert!(PriceSeries::new("X", dates.clone(), vec![1.0, 2.0], vec![1.0, 3.0]).is_err());
        assert!(PriceSeries::new("X", vec![day(1), day(0)], vec![1.0; 2], vec![1.0; 2]).is_err());
        assert!(PriceSeries::new("X", dates, vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn returns_examples() {
        let r = daily_returns(&series("X", &[0, 1, 2], &[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(r.values, vec![0.0, 0.0]);
        let r = daily_returns(&series("X", &[0, 1], &[1.0, 2.0])).unwrap();
        assert_eq!(r.values, vec![1.0]);
        let r = daily_returns(&series("X", &[0, 1, 2], &[4.0, 5.0, 4.0])).unwrap();
        assert_abs_diff_eq!(r.values[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.values[1], -0.2, epsilon = 1e-15);
        assert_eq!(r.dates, vec![day(1), day(2)]);
        assert!(matches!(
            daily_returns(&series("X", &[0], &[1.0])),
            Err(Error::Length { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn alignment_examples() {
        let a = series("A", &[1, 2, 3], &[1.0, 2.0, 3.0]);
        let b = series("B", &[2, 3, 4], &[5.0, 6.0, 7.0]);
        let (a2, b2) = align_series(&a, &b);
        assert_eq!(a2.dates(), &[day(2), day(3)]);
        assert_eq!(a2.mid(), &[2.0, 3.0]);
        assert_eq!(b2.mid(), &[5.0, 6.0]);

        let (a3, b3) = align_series(&a, &a.clone());
        assert_eq!(a3, a);
        assert_eq!(b3, a);

        let c = series("C", &[10, 11], &[1.0, 1.0]);
        let (a4, c4) = align_series(&a, &c);
        assert!(a4.is_empty() && c4.is_empty());
    }

    #[test]
    fn premium_examples() {
        let a = series("A", &[0, 1], &[1.5, 2.0]);
        let b = series("B", &[0, 1], &[1.0, 2.0]);
        let p = premium_series(&a, &b);
        assert_eq!(p.values, vec![0.5, 0.0]);
        assert!(premium_series(&a, &a).values.iter().all(|&v| v == 0.0));

        // a 361.21% premium is stored as the fraction 3.6121
        let c = series("C", &[0], &[4.6121]);
        let d = series("D", &[0], &[1.0]);
        assert_abs_diff_eq!(premium_series(&c, &d).values[0], 3.6121, epsilon = 1e-12);
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&[0.1]).unwrap();
        for v in [s.minimum, s.q1, s.median, s.mean, s.q3, s.maximum] {
            assert_eq!(v, 0.1);
        }
        assert_eq!((s.count_premium, s.count_discount, s.count_parity), (1, 0, 0));

        let s = summarize(&[-0.1, 0.0, 0.1, 0.2]).unwrap();
        assert_abs_diff_eq!(s.minimum, -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.q1, -0.025, epsilon = 1e-15);
        assert_abs_diff_eq!(s.median, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(s.q3, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(s.maximum, 0.2, epsilon = 1e-15);
        assert_eq!((s.count_premium, s.count_discount, s.count_parity), (2, 1, 1));
        assert_eq!(s.n, 4);

        assert!(matches!(summarize(&[]), Err(Error::Empty)));
    }

    /// Sort-and-interpolate quantile written independently of `quantile_sorted`.
    fn oracle_quantile(values: &[f64], q: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (v.len() as f64 - 1.0) * q;
        let k = h as usize;
        if k + 1 >= v.len() {
            return v[v.len() - 1];
        }
        v[k] * (1.0 - (h - k as f64)) + v[k + 1] * (h - k as f64)
    }

    proptest! {
        #[test]
        fn quartiles_match_oracle(values in prop::collection::vec(-5.0f64..5.0, 1..1000)) {
            let s = summarize(&values).unwrap();
            for (got, q) in [(s.q1, 0.25), (s.median, 0.5), (s.q3, 0.75)] {
                prop_assert!((got - oracle_quantile(&values, q)).abs() < 1e-12);
            }
            prop_assert!(s.minimum <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.maximum);
            prop_assert_eq!(s.count_premium + s.count_discount + s.count_parity, s.n);
        }

        #[test]
        fn summary_is_order_invariant(mut values in prop::collection::vec(-1.0f64..1.0, 1..200), seed in any::<u64>()) {
            let before = summarize(&values).unwrap();
            use rand::seq::SliceRandom;
            values.shuffle(&mut crate::rng::rng_from_seed(seed));
            prop_assert_eq!(before, summarize(&values).unwrap());
        }

        #[test]
        fn premiums_are_antisymmetric(mids in prop::collection::vec((0.1f64..100.0, 0.1f64..100.0), 1..100)) {
            let days: Vec<u32> = (0..mids.len() as u32).collect();
            let a = series("A", &days, &mids.iter().map(|m| m.0).collect::<Vec<_>>());
            let b = series("B", &days, &mids.iter().map(|m| m.1).collect::<Vec<_>>());
            let ab = premium_series(&a, &b);
            let ba = premium_series(&b, &a);
            for (x, y) in ab.values.iter().zip(&ba.values) {
                prop_assert!(((1.0 + x) * (1.0 + y) - 1.0).abs() < 1e-12);
            }
            prop_assert!(premium_series(&a, &a).values.iter().all(|&v| v == 0.0));
        }

        #[test]
        fn cumulative_returns_recover_prices(mids in prop::collection::vec(0.5f64..50.0, 2..300)) {
            let days: Vec<u32> = (0..mids.len() as u32).collect();
            let s = series("A", &days, &mids);
            let r = daily_returns(&s).unwrap();
            let mut level = 1.0;
            for (t, v) in r.values.iter().enumerate() {
                level *= 1.0 + v;
                prop_assert!((level - mids[t + 1] / mids[0]).abs() < 1e-10 * (mids[t + 1] / mids[0]).max(1.0));
            }
        }
    }
}
