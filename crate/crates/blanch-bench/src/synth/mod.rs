//! Forward model generating synthetic color-change observations from
//! stress grids.
//!
//! The model encodes the working hypothesis the regression is meant to
//! recover: observed color change is a weighted sum of von Mises stress
//! over depth, plus sensor noise. Because the generating weights are known,
//! the end-to-end pipeline can be validated without human data:
//! [`forward_color_profile`] plants a profile, [`render_radial_map`] and
//! [`synth_frame_stack`] dress it up as camera frames, and the imaging and
//! stats layers must dig the weights back out.

mod forward;
mod stack;

pub use forward::{
    forward_color_profile, noise_sigma_for_snr, papillary_weights, render_radial_map,
    uniform_weights, ForwardModel, PAPILLARY_CENTER_MM, PAPILLARY_SIGMA_MM,
};
pub use stack::{synth_frame_stack, SynthImagingSpec};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("depth weights: expected length {expected}, got {actual}")]
    WeightLengthMismatch { expected: usize, actual: usize },

    #[error(
        "dynamic range overflow: green values span [{low:.1}, {high:.1}] with 3-sigma \
         headroom, outside the 8-bit range"
    )]
    DynamicRangeOverflow { low: f64, high: f64 },

    #[error(transparent)]
    Imaging(#[from] crate::imaging::ImagingError),
}
