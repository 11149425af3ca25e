//! CSV ingestion of daily OHLC (or mid-only) price files.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{mid_price, PriceSeries};

/// What to do with a row whose prices are missing, unparsable or violate `high >= low > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    Skip,
    #[default]
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvFormat {
    pub date_column: String,
    pub high_column: String,
    pub low_column: String,
    /// When set, prices come from this single column and high/low are ignored.
    pub mid_column: Option<String>,
    /// strftime-style pattern.
    pub date_format: String,
    pub missing_policy: MissingPolicy,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self {
            date_column: "date".into(),
            high_column: "high".into(),
            low_column: "low".into(),
            mid_column: None,
            date_format: "%Y-%m-%d".into(),
            missing_policy: MissingPolicy::Fail,
        }
    }
}

pub fn load_ohlc_csv(path: impl AsRef<Path>, ticker: &str, format: &CsvFormat) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_ohlc_csv(file, ticker, format)
}

/// Parses OHLC rows from any reader. Row numbers in errors are 1-based file lines, so
/// the first data row is row 2.
pub fn read_ohlc_csv<R: Read>(reader: R, ticker: &str, format: &CsvFormat) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                row: 1,
                message: format!("missing column `{name}`"),
            })
    };
    let date_idx = column(&format.date_column)?;
    let price_idx = match &format.mid_column {
        Some(mid) => PriceColumns::Mid(column(mid)?),
        None => PriceColumns::HighLow(column(&format.high_column)?, column(&format.low_column)?),
    };

    let (mut dates, mut high, mut low) = (Vec::new(), Vec::new(), Vec::new());
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        match parse_row(&record, row, date_idx, price_idx, &format.date_format) {
            Ok((d, h, l)) => {
                if let Some(prev) = dates.last() {
                    if d <= *prev {
                        return Err(Error::Invariant {
                            row,
                            message: format!("date {d} does not follow {prev}"),
                        });
                    }
                }
                dates.push(d);
                high.push(h);
                low.push(l);
            }
            Err(e) if format.missing_policy == MissingPolicy::Skip => {
                log::debug!("skipping {ticker} {e}");
            }
            Err(e) => return Err(e),
        }
    }
    PriceSeries::new(ticker, dates, high, low)
}

#[derive(Clone, Copy)]
enum PriceColumns {
    Mid(usize),
    HighLow(usize, usize),
}

fn parse_row(
    record: &csv::StringRecord,
    row: usize,
    date_idx: usize,
    prices: PriceColumns,
    date_format: &str,
) -> Result<(NaiveDate, f64, f64)> {
    let field = |idx: usize| record.get(idx).unwrap_or("");
    let date = NaiveDate::parse_from_str(field(date_idx), date_format).map_err(|e| Error::Parse {
        row,
        message: format!("bad date `{}`: {e}", field(date_idx)),
    })?;
    let number = |idx: usize| -> Result<f64> {
        let raw = field(idx);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                row,
                message: format!("bad price `{raw}`"),
            })
    };
    let (h, l) = match prices {
        PriceColumns::Mid(idx) => {
            let m = number(idx)?;
            (m, m)
        }
        PriceColumns::HighLow(hi, lo) => (number(hi)?, number(lo)?),
    };
    mid_price(h, l).map_err(|e| Error::Invariant {
        row,
        message: e.to_string(),
    })?;
    Ok((date, h, l))
}
