//! Morlet wavelet analysis of paired return series.
//!
//! The pipeline is [`cwt`] for each series, then [`coherence`] (which smooths the
//! cross-wavelet and auto spectra with [`smooth`] and fills the phase field), then
//! [`significance`] against AR(1) surrogate pairs. Grids are indexed `(scale, time)`.

mod coherence;
mod cwt;
mod grid;
mod morlet;
mod scales;
mod significance;
mod smooth;

pub use coherence::{coherence, cone_of_influence, phase_field, CoherenceField, PhaseField};
pub use cwt::{cross_wavelet, cwt, CwtPlan, Scaleogram, KERNEL_CUTOFF};
pub use grid::Grid;
pub use morlet::{morlet_mother, MorletSpec};
pub use scales::ScaleGrid;
pub use significance::{fit_ar1, significance, simulate_ar1, AR1Params, MonteCarloSpec, SignificanceResult};
pub use smooth::{smooth, Smoother, SmoothingSpec};
