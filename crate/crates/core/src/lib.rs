//! Analytics for dual-class share prices.
//!
//! The crate is organised around the three analyses a paired-listing study needs:
//!
//! * [`timeseries`]: mid-prices, returns, pairwise premiums and their summary statistics,
//!   plus CSV ingestion in [`ingest`].
//! * [`wavelet`]: Morlet continuous wavelet transform, smoothed squared coherence, phase
//!   fields and Monte-Carlo significance against AR(1) red-noise surrogates.
//! * [`lstm`]: a single-layer LSTM regressor trained with backpropagation through time,
//!   driven by a fixed train/test split or by rolling training windows.
//!
//! [`metrics`] scores forecast runs and [`pipeline`] wires everything into the batch
//! command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ingest;
pub mod lstm;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod timeseries;
pub mod wavelet;

pub use error::{Error, Result};
pub use timeseries::{PremiumSeries, PriceSeries, ReturnSeries, SummaryStats};
