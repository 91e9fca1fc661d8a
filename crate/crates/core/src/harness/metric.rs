use crate::bem::ChannelRealization;
use crate::error::{Error, Result};

/// Lowest reported NMSE; exact estimates clamp here.
pub const NMSE_FLOOR_DB: f64 = -120.0;

/// `10 log10(‖ĥ − h‖² / ‖h‖²)` over the whole channel tensor, clamped at
/// [`NMSE_FLOOR_DB`].
pub fn nmse_db(estimate: &ChannelRealization, truth: &ChannelRealization) -> Result<f64> {
    if !estimate.same_shape(truth) {
        return Err(Error::dim("estimate and truth differ in shape"));
    }
    let power: f64 = truth.as_slice().iter().map(|v| v.norm_sqr()).sum();
    if power == 0.0 {
        return Err(Error::Degenerate("true channel is all zero".into()));
    }
    let err: f64 = estimate
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    if err == 0.0 {
        return Ok(NMSE_FLOOR_DB);
    }
    Ok((10.0 * (err / power).log10()).max(NMSE_FLOOR_DB))
}
