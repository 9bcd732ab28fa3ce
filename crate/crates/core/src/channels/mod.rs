//! Channel models for both hops of the forward link.
//!
//! The feeder hop uses Málaga irradiance, the user hop shadowed-Rician
//! fading over a multibeam antenna pattern.

mod geometry;
mod malaga;
mod presets;
mod shadowed_rician;

pub use geometry::{
    beam_gain, build_channel, channel_mean_direction, geo_slant_range, hex_beam_centers,
    random_geometry, steering_vector, steering_vector_phased, BeamGeometry, LayoutSpec,
    EARTH_RADIUS_M, GEO_ALTITUDE_M, SPEED_OF_LIGHT, U_3DB,
};
pub use malaga::{
    malaga_constants, malaga_pdf, malaga_sample, FsoPathLoss, Malaga, MalagaConstants,
    MalagaDraw, MalagaParams,
};
pub use presets::Presets;
pub use shadowed_rician::{
    scaled_sr_ccdf, scaled_sr_cdf, sr_pdf, sr_sample, ShadowedRicianParams, SrDraw,
};
