//! Green-channel analysis of blanching frame stacks.
//!
//! A measurement is a directory of sequentially numbered RGB frames plus a
//! `manifest.json` describing the capture (frame rate, scale, image center,
//! and which frame ranges are the non-contact and contact phases). Skin
//! blanching shows up strongest in the green channel, so all analysis runs
//! on it: average the green plane over each phase window, subtract the
//! phases into a signed [`ColorChangeMap`], then collapse the map into a
//! radial profile by averaging line segments through the center.

mod frames;
mod image_buf;
mod map;
mod profile;

pub use frames::{load_frame_stack, save_frame_stack, FrameStack, StackManifest};
pub use image_buf::{GrayImage, RgbFrame};
pub use map::{
    color_change_map, extract_green_channel, mean_color_change_maps, phase_mean, ColorChangeMap,
};
pub use profile::{
    fold_profile, radial_profile, HalfProfile, RadialProfile, DEFAULT_ANGLE_STEP_DEG,
    DEFAULT_PROFILE_LENGTH_MM,
};

use thiserror::Error;

/// Errors from frame handling, map construction, and profile extraction.
#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected a 3-channel RGB image, got {got} channels")]
    WrongChannelCount { got: usize },
    #[error("image dimensions differ: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },
    #[error("frame window [{start}, {end}) is empty or exceeds the {frames} available frames")]
    WindowOutOfRange {
        start: usize,
        end: usize,
        frames: usize,
    },
    #[error("profile segment at {angle_deg} degrees leaves the map (sample at ({x:.1}, {y:.1}) px)")]
    SegmentOutOfBounds { angle_deg: f64, x: f64, y: f64 },
    #[error("profile distances are not symmetric about zero")]
    AsymmetricSamples,
    #[error("no input maps given")]
    EmptyInput,
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("image codec failure: {0}")]
    Codec(#[from] image::ImageError),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed file {path}: {message}")]
    MalformedFile { path: String, message: String },
}
