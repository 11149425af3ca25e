//! Batch front end: configuration, the `premiums` / `coherence` / `forecast` / `report`
//! commands, SVG plots and the output manifest.

mod commands;
mod config;
mod manifest;
mod svg;

pub use commands::{
    cmd_coherence, cmd_forecast, cmd_premiums, cmd_report, coherence_pair, forecast_datasets, load_inputs,
    run_analysis, run_report, run_seed, CommandReport, RunManifest, COHERENCE_HEADER, PREDICTIONS_HEADER,
    SUMMARY_HEADER,
};
pub use config::{Analysis, ForecastConfig, PremiumConfig, RunConfig, TickerInput, WaveletConfig};
pub use manifest::{sha256_hex, update_manifest, write_output, Manifest, ManifestEntry, MANIFEST_FILE};
pub use svg::{colormap, heatmap_svg, render_heatmap, HeatmapStyle};
