//! Batch orchestration: mesh, solve, sample, observe, regress, report.
//!
//! [`run_pipeline`] executes every configured indenter condition (width,
//! travel) against one shared mesh, obtains a color-change profile either
//! from recorded frames or from the synthetic forward model, fits the
//! per-condition PLS regression, and writes a deterministic `report.json`
//! plus per-condition artifacts. Wall-clock timings go to a separate
//! `timings.json` so two runs with the same config and seed produce
//! byte-identical reports.

mod config;
mod heatmap;
mod run;

pub use config::{
    standard_conditions, Condition, ContactOptions, FrameSynthOptions, FramesOptions, GridOptions,
    MaterialOverride, MeshOptions, PipelineConfig, ProfileOptions, ProfileSource,
    RegressionOptions, SynthOptions, WeightPreset,
};
pub use heatmap::{render_heatmap_grid, render_heatmap_map, HeatmapSidecar, COLORMAP_NAME};
pub use run::{
    run_pipeline, ConditionReport, PressureColorOls, PressureRow, ReportBundle, THREADS_ENV_VAR,
};

/// Report format version; bump on any breaking change to `report.json`.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Fem(#[from] crate::fem::FemError),

    #[error(transparent)]
    Imaging(#[from] crate::imaging::ImagingError),

    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),

    #[error(transparent)]
    Synth(#[from] crate::synth::SynthError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
