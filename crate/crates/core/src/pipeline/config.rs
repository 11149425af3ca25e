use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CsvFormat;
use crate::lstm::{Regime, TrainConfig};
use crate::wavelet::{MonteCarloSpec, MorletSpec, SmoothingSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickerInput {
    pub ticker: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Premiums,
    Coherence,
    Forecast,
    #[default]
    All,
}

impl Analysis {
    pub fn includes(&self, other: Analysis) -> bool {
        *self == Analysis::All || *self == other
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "premiums" => Ok(Analysis::Premiums),
            "coherence" => Ok(Analysis::Coherence),
            "forecast" => Ok(Analysis::Forecast),
            "all" => Ok(Analysis::All),
            other => Err(Error::Config(format!("unknown analysis '{other}'"))),
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Analysis::Premiums => "premiums",
            Analysis::Coherence => "coherence",
            Analysis::Forecast => "forecast",
            Analysis::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PremiumConfig {
    /// Report premiums multiplied by 100.
    pub percent: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for PremiumConfig {
    fn default() -> Self {
        Self { percent: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveletConfig {
    pub morlet: MorletSpec,
    pub s0: f64,
    pub dj: f64,
    pub dt: f64,
    /// Derived from the series length when absent.
    pub num_scales: Option<usize>,
    pub smoothing: SmoothingSpec,
    /// The `seed` field is ignored; each pair gets a seed derived from the master seed.
    pub monte_carlo: MonteCarloSpec,
    pub min_length: usize,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            morlet: MorletSpec::default(),
            s0: 2.0,
            dj: 1.0 / 12.0,
            dt: 1.0,
            num_scales: None,
            smoothing: SmoothingSpec::default(),
            monte_carlo: MonteCarloSpec::default(),
            min_length: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastConfig {
    /// Tickers to forecast; every input when absent. All inputs still serve as siblings.
    pub tickers: Option<Vec<String>>,
    pub lags: Vec<usize>,
    pub dual: Vec<bool>,
    pub regimes: Vec<Regime>,
    pub test_size: usize,
    pub retrain_per_origin: bool,
    /// The `seed` field is ignored; each run gets a seed derived from the master seed.
    pub train: TrainConfig,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            tickers: None,
            lags: vec![4, 9],
            dual: vec![false, true],
            regimes: vec![
                Regime::Rolling { window: 5 },
                Regime::Rolling { window: 10 },
                Regime::Rolling { window: 20 },
                Regime::Rolling { window: 50 },
                Regime::Mece { train_size: 5282 },
            ],
            test_size: 300,
            retrain_per_origin: true,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub inputs: Vec<TickerInput>,
    #[serde(default)]
    pub format: CsvFormat,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub premiums: PremiumConfig,
    #[serde(default)]
    pub wavelet: WaveletConfig,
    #[serde(default)]
    pub forecast: ForecastConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(inputs: Vec<TickerInput>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            inputs,
            format: CsvFormat::default(),
            analysis: Analysis::All,
            premiums: PremiumConfig::default(),
            wavelet: WaveletConfig::default(),
            forecast: ForecastConfig::default(),
            output_dir: output_dir.into(),
            seed: 0,
        }
    }

    /// Reads a JSON config. Relative input paths and output directory are resolved
    /// against the config file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for input in &mut cfg.inputs {
            if input.path.is_relative() {
                input.path = base.join(&input.path);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::Config("no inputs declared".into()));
        }
        for (i, input) in self.inputs.iter().enumerate() {
            if input.ticker.is_empty() || input.ticker.contains(['/', '\\', ',']) {
                return Err(Error::Config(format!("invalid ticker name '{}'", input.ticker)));
            }
            if self.inputs[..i].iter().any(|o| o.ticker == input.ticker) {
                return Err(Error::Config(format!("ticker '{}' declared twice", input.ticker)));
            }
            if !input.path.is_file() {
                return Err(Error::Config(format!(
                    "input file for {} not found: {}",
                    input.ticker,
                    input.path.display()
                )));
            }
        }
        self.wavelet.morlet.validate()?;
        self.wavelet.smoothing.validate()?;
        self.wavelet.monte_carlo.validate()?;
        if !(self.wavelet.s0 > 0.0 && self.wavelet.dj > 0.0 && self.wavelet.dt > 0.0) {
            return Err(Error::Config("wavelet s0, dj and dt must be positive".into()));
        }
        let f = &self.forecast;
        if let Some(targets) = &f.tickers {
            if let Some(t) = targets.iter().find(|t| !self.inputs.iter().any(|i| &i.ticker == *t)) {
                return Err(Error::Config(format!("forecast ticker '{t}' is not an input")));
            }
        }
        if f.lags.is_empty() || f.lags.contains(&0) {
            return Err(Error::Config("forecast lags must be non-empty and positive".into()));
        }
        if f.dual.is_empty() || f.regimes.is_empty() {
            return Err(Error::Config(
                "forecast dual flags and regimes must be non-empty".into(),
            ));
        }
        if f.test_size == 0 {
            return Err(Error::Config("forecast test_size must be positive".into()));
        }
        f.train.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_uses_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"inputs": [{"ticker": "A", "path": "a.csv"}]}"#).unwrap();
        assert_eq!(cfg.analysis, Analysis::All);
        assert_eq!(cfg.forecast.regimes.len(), 5);
        assert_eq!(cfg.forecast.lags, vec![4, 9]);
        assert_eq!(cfg.wavelet.monte_carlo.iterations, 1000);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn full_grid_is_expressible() {
        let json = r#"{
            "inputs": [
                {"ticker": "A", "path": "a.csv"},
                {"ticker": "B", "path": "b.csv"},
                {"ticker": "D", "path": "d.csv"}
            ],
            "forecast": {
                "lags": [4, 9],
                "dual": [false, true],
                "regimes": [
                    {"kind": "rolling", "window": 5},
                    {"kind": "rolling", "window": 10},
                    {"kind": "rolling", "window": 20},
                    {"kind": "rolling", "window": 50},
                    {"kind": "mece", "train_size": 5282}
                ],
                "test_size": 300
            }
        }"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        let runs = cfg.inputs.len() * cfg.forecast.lags.len() * cfg.forecast.dual.len() * cfg.forecast.regimes.len();
        assert_eq!(runs, 60);
        let back: RunConfig = serde_json::from_str(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn validation_catches_missing_files() {
        let cfg = RunConfig::new(
            vec![TickerInput {
                ticker: "A".into(),
                path: "/definitely/not/here.csv".into(),
            }],
            "out",
        );
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::new(vec![], "out").validate(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn analysis_parsing() {
        assert_eq!("coherence".parse::<Analysis>().unwrap(), Analysis::Coherence);
        assert!("plots".parse::<Analysis>().is_err());
        assert!(Analysis::All.includes(Analysis::Forecast));
        assert!(!Analysis::Premiums.includes(Analysis::Forecast));
    }
}
