//! Plane-strain finite element model of a layered fingertip cross-section.
//!
//! The domain is a rectangular slab of soft tissue (epidermis, dermis,
//! subcutaneous fat from the surface down) resting on bone. Coordinates are
//! `(x, y)` in millimetres with `x` lateral (0 at the indenter centerline)
//! and `y` the depth below the nominal skin surface, increasing downward.
//! Papillary ridges are modelled as a cosine corrugation of the surface that
//! fades out across the epidermis.
//!
//! A rigid flat punch with filleted corners is driven vertically into the
//! surface under displacement control. Contact is node-to-rigid with a
//! penalty formulation and Coulomb stick/slip friction; the quasi-static
//! history is traced in equal displacement increments. Linear systems are
//! solved with a Jacobi-preconditioned conjugate gradient on a CSR matrix.
//!
//! Internal units are millimetres and pascals, so stiffness entries carry
//! Pa*mm and nodal forces Pa*mm^2 (= 1e-6 N per mm of thickness). Public
//! outputs convert forces to newtons per millimetre of out-of-plane
//! thickness; stresses and pressures stay in pascals.

mod assembly;
mod contact;
mod grid;
mod material;
mod mesh;
mod sparse;
mod stress;

pub use assembly::{assemble_system, StiffnessSystem};
pub use contact::{
    contact_pressure_summary, solve_indentation, IndentationSolution, IndenterSpec,
    PressureSummary, SolveConfig, SolveLog, SolveStepLog,
};
pub use grid::{resample_vm_grid, GridRegion, VmGrid, DEFAULT_GRID_SPACING_MM};
pub use material::{Layer, MaterialParams, MaterialTable};
pub use mesh::{build_finger_mesh, FingerSectionGeometry, Mesh, Triangle};
pub use sparse::{pcg, CsrMatrix, LinearOperator, PcgOutcome};
pub use stress::{recover_stress_field, von_mises, StressField, StressTensor};

use thiserror::Error;

/// Errors from mesh construction, assembly, and the contact solver.
#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("layer {layer:?} is {thickness_mm} mm thick, thinner than surface_refine {refine_mm} mm")]
    LayerTooThin {
        layer: Layer,
        thickness_mm: f64,
        refine_mm: f64,
    },
    #[error("mesh has no material assigned for layer {0:?}")]
    UnknownMaterial(Layer),
    #[error("element {index} is degenerate (signed doubled area {area2})")]
    DegenerateElement { index: usize, area2: f64 },
    #[error("indenter width {width_mm} mm exceeds domain width {domain_mm} mm")]
    IndenterTooWide { width_mm: f64, domain_mm: f64 },
    #[error("linear solve failed to converge: residual {residual} after {iterations} iterations")]
    LinearSolveFailed { residual: f64, iterations: usize },
    #[error("contact iteration failed to settle after {iterations} outer iterations at load step {step}")]
    ContactNotConverged { step: usize, iterations: usize },
    #[error("contact set is empty; no surface node touches the indenter")]
    EmptyContactSet,
    #[error("grid point ({lateral_mm}, {depth_mm}) mm lies outside the mesh")]
    GridPointOutsideMesh { lateral_mm: f64, depth_mm: f64 },
    #[error("displacement vector has {got} nodes but the mesh has {expected}")]
    DisplacementSizeMismatch { got: usize, expected: usize },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed file {path}: {message}")]
    MalformedFile { path: String, message: String },
}
