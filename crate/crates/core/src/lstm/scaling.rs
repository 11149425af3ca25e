use crate::error::{Error, Result};

/// Prices at or above this level scale to values `>= 1`, outside the tanh range.
pub const PRICE_CEILING_WARNING: f64 = 200.0;

/// `x / 100 - 1`. Logs a warning (but still returns the value) when `x >= 200`.
pub fn scale_price(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("price {x} must be positive and finite")));
    }
    if x >= PRICE_CEILING_WARNING {
        log::warn!("price {x} scales to {} which is outside [-1, 1)", x / 100.0 - 1.0);
    }
    Ok(x / 100.0 - 1.0)
}

/// Inverse of [`scale_price`]: `100 (y + 1)`.
pub fn unscale(y: f64) -> f64 {
    100.0 * (y + 1.0)
}
