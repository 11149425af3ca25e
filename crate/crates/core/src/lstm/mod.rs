//! Single-layer LSTM regression on scaled prices.
//!
//! Prices enter the network as `x / 100 - 1` ([`scale_price`]); samples are lag windows
//! of the own series, optionally stacked with the sibling share classes
//! ([`build_supervised`]). [`forecast_mece`] trains once on a fixed prefix and
//! [`forecast_rolling`] retrains on the `w` observations preceding every forecast origin.

mod cell;
mod features;
mod regime;
mod scaling;
mod train;

pub use cell::{backward, forward_sequence, lstm_cell_forward, CellCache, LstmParams, LstmState, SequenceCache};
pub use features::{build_supervised, input_window, FeatureSample};
pub use regime::{
    forecast_mece, forecast_rolling, run_regime, ForecastDataset, ForecastRun, Regime, RegimeSpec, RunDescriptor,
};
pub use scaling::{scale_price, unscale, PRICE_CEILING_WARNING};
pub use train::{train, Optimizer, TrainConfig, TrainOutcome};
