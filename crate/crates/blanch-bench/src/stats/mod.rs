//! Regression layer linking depth-resolved stress to color change.
//!
//! [`build_design_matrix`] pairs a [`VmGrid`](crate::fem::VmGrid) with a
//! [`HalfProfile`](crate::imaging::HalfProfile): one row per shared lateral
//! position, one column per depth. [`pls_fit`] runs NIPALS partial least
//! squares (collinear depth columns are the expected case), [`vip_scores`]
//! attributes importance per depth, and [`ols_fit`] covers single-predictor
//! trends with an F-test p-value backed by [`regularized_incomplete_beta`].

mod dataset;
mod ols;
mod pls;
mod special;

pub use dataset::{build_design_matrix, RegressionDataset, MIN_LATERAL_OVERLAP_MM};
pub use ols::{ols_fit, r_squared, OlsResult, Significance};
pub use pls::{
    pls_fit, pls_fit_cv, pls_predict, select_components_loo, vip_scores, ComponentChoice,
    PlsModel, PlsReport, MAX_CV_COMPONENTS,
};
pub use special::{f_survival, ln_gamma, regularized_incomplete_beta};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{context}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{0} is constant; no variance to fit")]
    ConstantInput(&'static str),

    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },

    #[error("lateral ranges overlap over {overlap_mm} mm, need at least {MIN_LATERAL_OVERLAP_MM} mm")]
    InsufficientOverlap { overlap_mm: f64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("malformed file {path}: {message}")]
    MalformedFile { path: String, message: String },
}
