use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One supervised example: `lag` input steps and the value that follows them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSample {
    /// `inputs[k]` is the feature vector at time `target_index - lag + k`.
    pub inputs: Vec<Vec<f64>>,
    pub target: f64,
    pub target_index: usize,
}

impl FeatureSample {
    pub fn input_size(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }
}

/// Feature vectors for times `end - lag .. end`: the own value alone, or the own value
/// followed by each sibling when `include_dual` is set. Siblings are not touched otherwise.
pub fn input_window(
    own: &[f64],
    siblings: &[&[f64]],
    end: usize,
    lag: usize,
    include_dual: bool,
) -> Result<Vec<Vec<f64>>> {
    if end < lag || end > own.len() {
        return Err(Error::InsufficientData(format!(
            "window ending at {end} with lag {lag} does not fit {} observations",
            own.len()
        )));
    }
    if include_dual {
        if siblings.is_empty() {
            return Err(Error::Config(
                "dual-stock features requested but no sibling series given".into(),
            ));
        }
        for s in siblings {
            if s.len() != own.len() {
                return Err(Error::LengthMismatch {
                    left: own.len(),
                    right: s.len(),
                });
            }
        }
    }
    Ok((end - lag..end)
        .map(|t| {
            let mut v = Vec::with_capacity(1 + siblings.len());
            v.push(own[t]);
            if include_dual {
                v.extend(siblings.iter().map(|s| s[t]));
            }
            v
        })
        .collect())
}

/// Strictly causal lag samples: the sample for target index `t` reads only indices
/// `t - lag .. t`. `base` is added to every `target_index` so indices can refer to a
/// larger series the slices were cut from.
pub fn build_supervised(
    own: &[f64],
    siblings: &[&[f64]],
    lag: usize,
    include_dual: bool,
    base: usize,
) -> Result<Vec<FeatureSample>> {
    if lag == 0 {
        return Err(Error::Config("lag must be at least 1".into()));
    }
    if own.len() <= lag {
        return Err(Error::Length {
            needed: lag + 1,
            got: own.len(),
        });
    }
    (lag..own.len())
        .map(|t| {
            Ok(FeatureSample {
                inputs: input_window(own, siblings, t, lag, include_dual)?,
                target: own[t],
                target_index: base + t,
            })
        })
        .collect()
}
