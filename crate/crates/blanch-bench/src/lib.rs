//! Fingertip contact simulation and skin-blanching image analysis.
//!
//! The crate models what happens when a rigid flat-faced object is pressed
//! into the pulp of a finger, and how the resulting subsurface stress relates
//! to the whitening (blanching) visible in video of the nail and surrounding
//! skin. It is organized as four independent stages plus an orchestrator:
//!
//! - [`fem`]: plane-strain finite element model of a layered fingertip
//!   cross-section indented by a rigid flat punch with filleted corners.
//!   Produces displacement, contact pressure, and von Mises stress resampled
//!   onto a regular lateral x depth grid.
//! - [`imaging`]: green-channel analysis of camera frame stacks, producing 2D
//!   color-change maps and angle-averaged radial profiles.
//! - [`stats`]: PLS1 regression of color profiles on depth-resolved stress,
//!   VIP scores for depth attribution, and a univariate OLS F-test.
//! - [`synth`]: forward model that fabricates color profiles and 8-bit frame
//!   stacks from a stress grid, so the full chain can be validated without
//!   measurement hardware.
//! - [`pipeline`]: batch runs over indenter conditions, JSON reports, and
//!   PNG heatmap rendering. The `blanch-bench` binary is a thin wrapper over
//!   this module.
//!
//! Every entry point is deterministic for a fixed input and seed; randomness
//! is confined to explicitly seeded generators in [`synth`] and test code.
//!
//! The `examples/` directory contains one runnable program per capability;
//! start with `cargo run --example indentation_stress`.

pub mod fem;
pub mod imaging;
pub mod pipeline;
pub mod stats;
pub mod synth;
