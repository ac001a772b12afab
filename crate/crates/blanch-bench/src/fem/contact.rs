use super::sparse::pcg_or_err;
use super::{assemble_system, CsrMatrix, FemError, LinearOperator, MaterialTable, Mesh};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

/// Internal penalty stiffnesses are Pa per mm of penetration; the public
/// configuration uses N/mm^3 (= MPa/mm).
const N_MM3_TO_PA_PER_MM: f64 = 1.0e6;
/// Internal nodal forces are Pa*mm^2 per mm thickness; 1 Pa*mm^2 = 1e-6 N.
const INTERNAL_FORCE_TO_N: f64 = 1.0e-6;

/// Rigid flat punch pressed vertically into the surface, centered on x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndenterSpec {
    /// Face width `d` in mm.
    pub width_mm: f64,
    /// Total prescribed downward travel `h` in mm, measured from first touch.
    pub indent_depth_mm: f64,
    /// Coulomb friction coefficient against skin.
    pub friction: f64,
    /// Corner fillet radius in mm; rounds the face edges so the pressure
    /// singularity of an ideal sharp punch is regularized.
    pub corner_fillet_mm: f64,
}

impl IndenterSpec {
    pub const DEFAULT_FRICTION: f64 = 0.4;
    pub const DEFAULT_CORNER_FILLET_MM: f64 = 0.1;

    pub fn new(width_mm: f64, indent_depth_mm: f64) -> Self {
        IndenterSpec {
            width_mm,
            indent_depth_mm,
            friction: Self::DEFAULT_FRICTION,
            corner_fillet_mm: Self::DEFAULT_CORNER_FILLET_MM,
        }
    }

    pub fn validate(&self) -> Result<(), FemError> {
        if !(self.width_mm.is_finite() && self.width_mm > 0.0) {
            return Err(FemError::InvalidParameter(format!(
                "indenter width must be positive, got {}",
                self.width_mm
            )));
        }
        if !(self.indent_depth_mm.is_finite() && self.indent_depth_mm > 0.0) {
            return Err(FemError::InvalidParameter(format!(
                "indent depth must be positive, got {}",
                self.indent_depth_mm
            )));
        }
        if !(self.friction.is_finite() && self.friction >= 0.0) {
            return Err(FemError::InvalidParameter(format!(
                "friction must be nonnegative, got {}",
                self.friction
            )));
        }
        if !(self.corner_fillet_mm.is_finite()
            && self.corner_fillet_mm >= 0.0
            && self.corner_fillet_mm <= 0.5 * self.width_mm)
        {
            return Err(FemError::InvalidParameter(format!(
                "corner fillet must lie in [0, width/2], got {}",
                self.corner_fillet_mm
            )));
        }
        Ok(())
    }

    /// Height of the punch face above its lowest (flat) part at lateral
    /// position `x_mm`, or `None` outside the face. Zero on the flat part,
    /// rising along the quarter-circle fillet to the fillet radius at the
    /// face edge.
    pub fn face_lift_mm(&self, x_mm: f64) -> Option<f64> {
        let half = 0.5 * self.width_mm;
        let ax = x_mm.abs();
        if ax > half + 1e-12 {
            return None;
        }
        let r = self.corner_fillet_mm;
        let flat = (half - r).max(0.0);
        if ax <= flat || r == 0.0 {
            Some(0.0)
        } else {
            let s = (ax - flat).min(r);
            Some(r - (r * r - s * s).max(0.0).sqrt())
        }
    }
}

/// Numerical controls for [`solve_indentation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Number of equal displacement increments tracing the loading history.
    pub load_steps: usize,
    /// Normal penalty stiffness in N/mm^3. `None` derives
    /// `0.001 * E_max / nominal_edge` from the stiffest meshed layer, which
    /// keeps penetration errors far below the mesh resolution without
    /// wrecking the conditioning.
    pub penalty_normal_n_mm3: Option<f64>,
    /// Tangential penalty stiffness in N/mm^3; `None` copies the normal one.
    pub penalty_tangent_n_mm3: Option<f64>,
    /// Relative residual tolerance of the conjugate gradient solver.
    pub linear_rel_tol: f64,
    pub max_linear_iters: usize,
    /// Cap on contact-state fixed-point iterations per load step.
    pub max_outer_iters: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            load_steps: 20,
            penalty_normal_n_mm3: None,
            penalty_tangent_n_mm3: None,
            linear_rel_tol: 1e-8,
            max_linear_iters: 50_000,
            max_outer_iters: 200,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), FemError> {
        if self.load_steps == 0 {
            return Err(FemError::InvalidParameter("load_steps must be >= 1".into()));
        }
        for (name, p) in [
            ("penalty_normal_n_mm3", self.penalty_normal_n_mm3),
            ("penalty_tangent_n_mm3", self.penalty_tangent_n_mm3),
        ] {
            if let Some(v) = p {
                if !(v.is_finite() && v > 0.0) {
                    return Err(FemError::InvalidParameter(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        if !(self.linear_rel_tol.is_finite() && self.linear_rel_tol > 0.0) {
            return Err(FemError::InvalidParameter(format!(
                "linear_rel_tol must be positive, got {}",
                self.linear_rel_tol
            )));
        }
        Ok(())
    }
}

/// Convergence trace of one displacement increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStepLog {
    pub step: usize,
    /// Depth of the lowest face point at the end of the step, mm.
    pub face_depth_mm: f64,
    pub outer_iterations: usize,
    /// Conjugate gradient iterations summed over the outer loop.
    pub linear_iterations: usize,
    /// Relative residual of the last linear solve.
    pub relative_residual: f64,
    pub contact_nodes: usize,
    pub total_reaction_n_per_mm: f64,
}

/// Full convergence log of a quasi-static solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveLog {
    pub dof_count: usize,
    pub penalty_normal_n_mm3: f64,
    pub penalty_tangent_n_mm3: f64,
    pub load_steps: Vec<SolveStepLog>,
}

impl SolveLog {
    pub fn write_json(&self, path: &Path) -> Result<(), FemError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| FemError::MalformedFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        std::fs::write(path, text).map_err(FemError::Io)
    }
}

/// Converged state of the indentation at full prescribed depth.
#[derive(Debug, Clone)]
pub struct IndentationSolution {
    /// Nodal displacement (mm), same order as the mesh nodes.
    pub displacement: Vec<[f64; 2]>,
    /// Nodes in contact, ascending by index.
    pub contact_set: Vec<usize>,
    /// Lateral position of each contact node, parallel to `contact_set`.
    pub contact_x_mm: Vec<f64>,
    /// Lateral tributary length of each contact node.
    pub contact_tributary_mm: Vec<f64>,
    /// Normal force per contact node, N per mm of out-of-plane thickness.
    pub normal_forces: Vec<f64>,
    /// Residual penalty penetration per contact node, mm.
    pub penetrations_mm: Vec<f64>,
    /// Sum of the normal forces, N per mm of thickness.
    pub total_reaction: f64,
    pub log: SolveLog,
}

/// Aggregate contact pressure metrics of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureSummary {
    /// Total reaction divided by the contact width, Pa.
    pub mean_pressure_pa: f64,
    /// Largest nodal force divided by its tributary length, Pa.
    pub peak_pressure_pa: f64,
    /// Tributary width of the contact set, mm.
    pub contact_width_mm: f64,
    pub total_reaction_n_per_mm: f64,
}

/// Stiffness operator with contact springs on the diagonal and constrained
/// dofs replaced by identity rows.
struct MaskedOperator<'a> {
    matrix: &'a CsrMatrix,
    extra_diag: &'a [f64],
    free: &'a [bool],
}

impl LinearOperator for MaskedOperator<'_> {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        let mut masked = x.to_vec();
        for i in 0..n {
            if !self.free[i] {
                masked[i] = 0.0;
            }
        }
        self.matrix.matvec(&masked, y);
        for i in 0..n {
            if self.free[i] {
                y[i] += self.extra_diag[i] * x[i];
            } else {
                y[i] = x[i];
            }
        }
    }
}

/// Per-candidate contact state carried across the fixed-point iteration.
///
/// The tangential spring stays in the system for sliding nodes as well; the
/// anchor is dragged so the spring force sits exactly on the Coulomb cone.
/// Keeping the stiffness damps the force update and avoids the limit cycles
/// a frozen slip force produces.
struct ContactState {
    active: Vec<bool>,
    stick: Vec<bool>,
    /// Tangential anchor position (mm) the spring pulls towards.
    anchor: Vec<f64>,
    /// Last anchor correction of a slipping node; zero when the node was
    /// not slipping. Fuels the extrapolation in [`update_contact_state`].
    slip_delta: Vec<f64>,
}

impl ContactState {
    /// Only activity enters the stability check: at the Coulomb boundary the
    /// stick spring and the capped slip force coincide, so stick/slip flips
    /// there do not change the system and must not stall convergence.
    fn signature(&self) -> Vec<bool> {
        self.active.clone()
    }
}

/// Solves quasi-static displacement-controlled indentation.
///
/// Contact is node-to-rigid with a vertical gap function: a surface node at
/// `(x, y)` penetrates when it lies above the punch face sheet
/// `face_depth - lift(x)`. Active nodes get a normal penalty spring; with
/// friction, a tangential spring sticks the node to an anchor until the
/// Coulomb limit, then the force is capped at `mu * f_n` (return mapping)
/// with the normal force frozen from the previous outer iterate. The punch
/// travels from first touch to `indent_depth_mm` in equal increments, and
/// every linear solve warm-starts from the previous displacement.
pub fn solve_indentation(
    mesh: &Mesh,
    materials: &MaterialTable,
    indenter: &IndenterSpec,
    config: &SolveConfig,
) -> Result<IndentationSolution, FemError> {
    indenter.validate()?;
    config.validate()?;
    let ([x_min, x_max], _) = mesh.bounds();
    let domain_mm = x_max - x_min;
    if indenter.width_mm > domain_mm + 1e-12 {
        return Err(FemError::IndenterTooWide {
            width_mm: indenter.width_mm,
            domain_mm,
        });
    }

    let system = assemble_system(mesh, materials)?;
    let n_dof = system.matrix.dim();
    let base_diag = system.matrix.diagonal();

    // Kinematic constraints: bone interface fully fixed, lateral rollers.
    let mut free = vec![true; n_dof];
    for &i in mesh.bottom_nodes() {
        free[2 * i] = false;
        free[2 * i + 1] = false;
    }
    for &i in mesh.side_nodes() {
        free[2 * i] = false;
    }

    // Contact candidates: surface nodes under the punch face.
    let tributary = mesh.surface_tributary_mm();
    let mut candidates = Vec::new();
    for (k, &node) in mesh.surface_nodes().iter().enumerate() {
        let x = mesh.nodes()[node][0];
        if let Some(lift) = indenter.face_lift_mm(x) {
            candidates.push(Candidate {
                node,
                x_mm: x,
                rest_depth_mm: mesh.nodes()[node][1],
                lift_mm: lift,
                tributary_mm: tributary[k],
            });
        }
    }
    if candidates.is_empty() {
        return Err(FemError::EmptyContactSet);
    }

    let meshed_layers: BTreeSet<_> = mesh.elements().iter().map(|t| t.layer).collect();
    let e_max = materials.max_modulus_of(meshed_layers)?;
    let penalty_normal = config
        .penalty_normal_n_mm3
        .unwrap_or(1e-3 * e_max / mesh.nominal_edge_mm());
    let penalty_tangent = config.penalty_tangent_n_mm3.unwrap_or(penalty_normal);
    let kn = penalty_normal * N_MM3_TO_PA_PER_MM;
    let kt = penalty_tangent * N_MM3_TO_PA_PER_MM;

    // First touch: the face depth at which the highest candidate grazes it.
    let touch_depth = candidates
        .iter()
        .map(|c| c.rest_depth_mm + c.lift_mm)
        .fold(f64::INFINITY, f64::min);

    let nc = candidates.len();
    let mut state = ContactState {
        active: vec![false; nc],
        stick: vec![false; nc],
        anchor: vec![0.0; nc],
        slip_delta: vec![0.0; nc],
    };
    let mut u = vec![0.0; n_dof];
    let mut u_prev = u.clone();
    let mut steps = Vec::with_capacity(config.load_steps);
    // Displacement stability threshold of the outer fixed point; it must sit
    // above the noise floor of the linear tolerance but far below any
    // physically meaningful displacement.
    let du_tol = 1e-6 * indenter.indent_depth_mm;

    for step in 1..=config.load_steps {
        let face_depth =
            touch_depth + indenter.indent_depth_mm * step as f64 / config.load_steps as f64;
        let mut converged = false;
        let mut outer_done = 0;
        let mut linear_total = 0;
        let mut last_residual = 0.0;
        let mut last_sig = state.signature();

        for outer in 1..=config.max_outer_iters {
            update_contact_state(&mut state, &candidates, &u, face_depth, indenter.friction, kn, kt);
            let sig = state.signature();

            let mut extra_diag = vec![0.0; n_dof];
            let mut rhs = vec![0.0; n_dof];
            for (i, c) in candidates.iter().enumerate() {
                if !state.active[i] {
                    continue;
                }
                let kn_i = kn * c.tributary_mm;
                let dy = 2 * c.node + 1;
                extra_diag[dy] += kn_i;
                rhs[dy] += kn_i * (face_depth - c.lift_mm - c.rest_depth_mm);
                if indenter.friction > 0.0 {
                    let dx = 2 * c.node;
                    let kt_i = kt * c.tributary_mm;
                    extra_diag[dx] += kt_i;
                    rhs[dx] += kt_i * state.anchor[i];
                }
            }
            for i in 0..n_dof {
                if !free[i] {
                    rhs[i] = 0.0;
                }
            }
            let mut precond = vec![1.0; n_dof];
            for i in 0..n_dof {
                if free[i] {
                    precond[i] = base_diag[i] + extra_diag[i];
                }
            }
            let op = MaskedOperator {
                matrix: &system.matrix,
                extra_diag: &extra_diag,
                free: &free,
            };
            let outcome = pcg_or_err(
                &op,
                &rhs,
                &mut u,
                &precond,
                config.linear_rel_tol,
                config.max_linear_iters,
            )?;
            linear_total += outcome.iterations;
            last_residual = outcome.relative_residual;
            outer_done = outer;

            let du = u
                .iter()
                .zip(&u_prev)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            u_prev.copy_from_slice(&u);
            if std::env::var_os("BLANCH_CONTACT_TRACE").is_some() {
                let flips = sig
                    .iter()
                    .zip(&last_sig)
                    .filter(|(a, b)| a != b)
                    .count();
                eprintln!(
                    "step {step} outer {outer}: active {} stick {} flips {flips} du {du:.3e} cg {}",
                    sig.iter().filter(|&&a| a).count(),
                    state.stick.iter().filter(|&&s| s).count(),
                    outcome.iterations,
                );
            }
            if sig == last_sig && du <= du_tol {
                converged = true;
                break;
            }
            last_sig = sig;
        }
        if !converged {
            return Err(FemError::ContactNotConverged {
                step,
                iterations: outer_done,
            });
        }

        let reaction: f64 = candidates
            .iter()
            .map(|c| kn * c.tributary_mm * penetration(c, &u, face_depth).max(0.0))
            .sum();
        steps.push(SolveStepLog {
            step,
            face_depth_mm: face_depth,
            outer_iterations: outer_done,
            linear_iterations: linear_total,
            relative_residual: last_residual,
            contact_nodes: state.active.iter().filter(|&&a| a).count(),
            total_reaction_n_per_mm: reaction * INTERNAL_FORCE_TO_N,
        });
    }

    // Report from the final displacement field.
    let face_depth = touch_depth + indenter.indent_depth_mm;
    let mut order: Vec<usize> = (0..nc).filter(|&i| state.active[i]).collect();
    order.sort_by_key(|&i| candidates[i].node);
    let mut contact_set = Vec::with_capacity(order.len());
    let mut contact_x = Vec::with_capacity(order.len());
    let mut contact_trib = Vec::with_capacity(order.len());
    let mut forces = Vec::with_capacity(order.len());
    let mut penetrations = Vec::with_capacity(order.len());
    let mut total = 0.0;
    for &i in &order {
        let c = &candidates[i];
        let pen = penetration(c, &u, face_depth).max(0.0);
        let force = kn * c.tributary_mm * pen * INTERNAL_FORCE_TO_N;
        contact_set.push(c.node);
        contact_x.push(c.x_mm);
        contact_trib.push(c.tributary_mm);
        forces.push(force);
        penetrations.push(pen);
        total += force;
    }
    if contact_set.is_empty() {
        return Err(FemError::EmptyContactSet);
    }

    let displacement = (0..mesh.node_count())
        .map(|i| [u[2 * i], u[2 * i + 1]])
        .collect();
    Ok(IndentationSolution {
        displacement,
        contact_set,
        contact_x_mm: contact_x,
        contact_tributary_mm: contact_trib,
        normal_forces: forces,
        penetrations_mm: penetrations,
        total_reaction: total,
        log: SolveLog {
            dof_count: n_dof,
            penalty_normal_n_mm3: penalty_normal,
            penalty_tangent_n_mm3: penalty_tangent,
            load_steps: steps,
        },
    })
}

struct Candidate {
    node: usize,
    x_mm: f64,
    rest_depth_mm: f64,
    lift_mm: f64,
    tributary_mm: f64,
}

fn penetration(c: &Candidate, u: &[f64], face_depth: f64) -> f64 {
    face_depth - c.lift_mm - c.rest_depth_mm - u[2 * c.node + 1]
}

fn update_contact_state(
    state: &mut ContactState,
    candidates: &[Candidate],
    u: &[f64],
    face_depth: f64,
    friction: f64,
    kn: f64,
    kt: f64,
) {
    for (i, c) in candidates.iter().enumerate() {
        let pen = penetration(c, u, face_depth);
        if pen <= 0.0 {
            state.active[i] = false;
            state.stick[i] = false;
            state.slip_delta[i] = 0.0;
            continue;
        }
        let ux = u[2 * c.node];
        if !state.active[i] {
            state.active[i] = true;
            state.stick[i] = true;
            state.anchor[i] = ux;
            state.slip_delta[i] = 0.0;
        }
        if friction > 0.0 {
            let kt_i = kt * c.tributary_mm;
            let normal_force = kn * c.tributary_mm * pen;
            let trial = -kt_i * (ux - state.anchor[i]);
            let limit = friction * normal_force;
            if trial.abs() <= limit * (1.0 + 1e-12) {
                state.stick[i] = true;
                state.slip_delta[i] = 0.0;
            } else {
                // Return mapping: drag the anchor so the spring force sits
                // exactly on the Coulomb cone. Because the spring is much
                // stiffer than the structure, plain re-dragging contracts
                // at a rate just below one; successive corrections form a
                // near-geometric series (alternating when slip nodes couple
                // through the bulk), so once two consecutive corrections
                // contract, sum the series and jump the anchor to its limit
                // instead of crawling there.
                state.stick[i] = false;
                let target = ux + limit * trial.signum() / kt_i;
                let delta = target - state.anchor[i];
                let rate = if state.slip_delta[i] != 0.0 {
                    delta / state.slip_delta[i]
                } else {
                    0.0
                };
                state.anchor[i] = if rate != 0.0 && rate.abs() < 0.999 {
                    target + delta * rate / (1.0 - rate)
                } else {
                    target
                };
                state.slip_delta[i] = delta;
            }
        }
    }
}

/// Derives pressure metrics from a converged solution.
///
/// Contact width is the summed tributary length of the contact nodes; mean
/// pressure spreads the total reaction over that width, peak pressure is the
/// largest nodal force over its own tributary.
pub fn contact_pressure_summary(
    solution: &IndentationSolution,
    indenter: &IndenterSpec,
) -> Result<PressureSummary, FemError> {
    if solution.contact_set.is_empty() {
        return Err(FemError::EmptyContactSet);
    }
    let width: f64 = solution.contact_tributary_mm.iter().sum();
    let max_extent = indenter.width_mm + 2.0 * solution.contact_tributary_mm.iter().cloned().fold(0.0, f64::max);
    debug_assert!(width <= max_extent + 1e-9);
    let mut peak = 0.0_f64;
    for (force, trib) in solution
        .normal_forces
        .iter()
        .zip(&solution.contact_tributary_mm)
    {
        peak = peak.max(force / trib);
    }
    // N/mm over mm gives N/mm^2 = MPa.
    let to_pa = 1.0e6;
    Ok(PressureSummary {
        mean_pressure_pa: solution.total_reaction / width * to_pa,
        peak_pressure_pa: peak * to_pa,
        contact_width_mm: width,
        total_reaction_n_per_mm: solution.total_reaction,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{
        build_finger_mesh, recover_stress_field, FingerSectionGeometry, Layer, MaterialParams,
        Triangle,
    };
    use super::*;
    use approx::assert_relative_eq;

    fn uniform_table(e_pa: f64, nu: f64) -> MaterialTable {
        let p = MaterialParams::new(e_pa, nu).unwrap();
        MaterialTable::new(vec![
            (Layer::Epidermis, p),
            (Layer::Dermis, p),
            (Layer::Subcutaneous, p),
        ])
        .unwrap()
    }

    /// Full-width frictionless flat punch on a homogeneous slab is confined
    /// compression: eyy = -h/H everywhere, exx = 0. For E = 100 kPa,
    /// nu = 0.3, H = 6 mm, h = 0.3 mm the analytic plane-strain state is
    /// syy = -6730.769 Pa, sxx = szz = -2884.615 Pa, vm = 3846.154 Pa.
    #[test]
    fn confined_compression_matches_analytic_solution() {
        let geometry = FingerSectionGeometry {
            domain_width_mm: 6.0,
            epidermis_mm: 0.7,
            dermis_mm: 1.2,
            subcutaneous_mm: 4.1,
            ridges_enabled: false,
            ..FingerSectionGeometry::default()
        };
        let mesh = build_finger_mesh(&geometry, 0.5, 0.25).unwrap();
        let table = uniform_table(100.0e3, 0.3);
        let indenter = IndenterSpec {
            width_mm: 6.0,
            indent_depth_mm: 0.3,
            friction: 0.0,
            corner_fillet_mm: 0.0,
        };
        let config = SolveConfig {
            load_steps: 3,
            ..SolveConfig::default()
        };
        let solution = solve_indentation(&mesh, &table, &indenter, &config).unwrap();

        // Every surface node touches the full-width punch.
        assert_eq!(solution.contact_set.len(), mesh.surface_nodes().len());

        let syy = -6730.7692307692305_f64;
        let sxx = -2884.615384615385_f64;
        let vm = 3846.1538461538457_f64;
        let reaction = -syy * 6.0 * 1e-6; // N per mm thickness
        assert_relative_eq!(solution.total_reaction, reaction, max_relative = 1e-3);

        let field = recover_stress_field(&mesh, &table, &solution.displacement).unwrap();
        for (i, s) in field.element_stress.iter().enumerate() {
            assert_relative_eq!(s.syy, syy, max_relative = 1e-3);
            assert_relative_eq!(s.sxx, sxx, max_relative = 1e-3);
            assert!(s.sxy.abs() < 1e-3 * syy.abs(), "element {i} shear {}", s.sxy);
            assert_relative_eq!(field.von_mises[i], vm, max_relative = 1e-3);
        }

        // Residual penetration is far below the prescribed travel.
        let max_pen = solution
            .penetrations_mm
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        assert!(max_pen < 1e-3 * indenter.indent_depth_mm);
    }

    fn quick_mesh() -> Mesh {
        build_finger_mesh(
            &FingerSectionGeometry {
                domain_width_mm: 8.0,
                ..FingerSectionGeometry::default()
            },
            0.5,
            0.25,
        )
        .unwrap()
    }

    fn quick_config() -> SolveConfig {
        SolveConfig {
            load_steps: 5,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn solution_is_mirror_symmetric_without_friction() {
        let mesh = quick_mesh();
        let table = MaterialTable::standard();
        let indenter = IndenterSpec {
            friction: 0.0,
            ..IndenterSpec::new(2.0, 0.6)
        };
        let solution = solve_indentation(&mesh, &table, &indenter, &quick_config()).unwrap();

        let scale = solution
            .displacement
            .iter()
            .flat_map(|d| d.iter())
            .fold(0.0_f64, |m, &v| m.max(v.abs()));
        // x == 0 mirrors onto itself; normalize so -0.0 and 0.0 share a key.
        let key = |x: f64| if x == 0.0 { 0.0_f64.to_bits() } else { x.to_bits() };
        let mut mirror = std::collections::HashMap::new();
        for (i, &[x, y]) in mesh.nodes().iter().enumerate() {
            mirror.insert((key(x), y.to_bits()), i);
        }
        for (i, &[x, y]) in mesh.nodes().iter().enumerate() {
            let j = mirror[&(key(-x), y.to_bits())];
            let [uxi, uyi] = solution.displacement[i];
            let [uxj, uyj] = solution.displacement[j];
            assert!(
                (uxi + uxj).abs() <= 1e-7 * scale && (uyi - uyj).abs() <= 1e-7 * scale,
                "asymmetry at node {i}: ({uxi}, {uyi}) vs ({uxj}, {uyj})"
            );
        }
    }

    #[test]
    fn reaction_and_contact_grow_with_depth() {
        let mesh = quick_mesh();
        let table = MaterialTable::standard();
        let config = quick_config();
        let shallow = solve_indentation(
            &mesh,
            &table,
            &IndenterSpec::new(2.0, 0.5),
            &config,
        )
        .unwrap();
        let deep = solve_indentation(&mesh, &table, &IndenterSpec::new(2.0, 1.0), &config).unwrap();
        assert!(deep.total_reaction > shallow.total_reaction);
        let width = |s: &IndentationSolution| s.contact_tributary_mm.iter().sum::<f64>();
        assert!(width(&deep) >= width(&shallow));

        // Per-step reactions rise monotonically under displacement control.
        for pair in deep.log.load_steps.windows(2) {
            assert!(
                pair[1].total_reaction_n_per_mm >= pair[0].total_reaction_n_per_mm * (1.0 - 1e-9)
            );
        }
        assert_eq!(deep.log.load_steps.len(), config.load_steps);
    }

    #[test]
    fn friction_limits_outward_surface_slip() {
        let mesh = quick_mesh();
        let table = MaterialTable::standard();
        let config = quick_config();
        let slip_extent = |friction: f64| {
            let indenter = IndenterSpec {
                friction,
                ..IndenterSpec::new(2.0, 0.8)
            };
            let solution = solve_indentation(&mesh, &table, &indenter, &config).unwrap();
            mesh.surface_nodes()
                .iter()
                .filter(|&&n| mesh.nodes()[n][0].abs() <= 1.2)
                .map(|&n| solution.displacement[n][0].abs())
                .fold(0.0_f64, f64::max)
        };
        let free = slip_extent(0.0);
        let gripped = slip_extent(0.8);
        assert!(
            gripped < free,
            "friction should reduce lateral slip: {gripped} vs {free}"
        );
    }

    #[test]
    fn indenter_wider_than_domain_is_rejected() {
        let mesh = quick_mesh();
        let table = MaterialTable::standard();
        let indenter = IndenterSpec::new(9.0, 0.5);
        assert!(matches!(
            solve_indentation(&mesh, &table, &indenter, &quick_config()),
            Err(FemError::IndenterTooWide { .. })
        ));
    }

    #[test]
    fn punch_missing_all_surface_nodes_is_rejected() {
        // Hand-built slab whose surface nodes sit at x = +-1, so a 0.5 mm
        // punch centered at 0 touches nothing.
        let nodes = vec![[-1.0, 0.0], [1.0, 0.0], [1.0, 1.0], [-1.0, 1.0]];
        let elements = vec![
            Triangle {
                nodes: [0, 1, 2],
                layer: Layer::Dermis,
            },
            Triangle {
                nodes: [0, 2, 3],
                layer: Layer::Dermis,
            },
        ];
        let mesh = Mesh::from_parts(nodes, elements, vec![0, 1], vec![3, 2], vec![], 1.0).unwrap();
        let table = uniform_table(1.0e5, 0.3);
        assert!(matches!(
            solve_indentation(&mesh, &table, &IndenterSpec::new(0.5, 0.1), &quick_config()),
            Err(FemError::EmptyContactSet)
        ));
    }

    #[test]
    fn penalty_override_is_recorded_and_penetration_scales() {
        let mesh = quick_mesh();
        let table = MaterialTable::standard();
        let indenter = IndenterSpec::new(2.0, 0.5);
        let soft = SolveConfig {
            penalty_normal_n_mm3: Some(0.2),
            ..quick_config()
        };
        let stiff = SolveConfig {
            penalty_normal_n_mm3: Some(2.0),
            ..quick_config()
        };
        let soft_solution = solve_indentation(&mesh, &table, &indenter, &soft).unwrap();
        let stiff_solution = solve_indentation(&mesh, &table, &indenter, &stiff).unwrap();
        assert_eq!(soft_solution.log.penalty_normal_n_mm3, 0.2);
        assert_eq!(stiff_solution.log.penalty_normal_n_mm3, 2.0);
        let max_pen = |s: &IndentationSolution| {
            s.penetrations_mm.iter().cloned().fold(0.0_f64, f64::max)
        };
        assert!(max_pen(&stiff_solution) < max_pen(&soft_solution));
    }

    #[test]
    fn pressure_summary_reflects_forces() {
        let mesh = quick_mesh();
        let table = MaterialTable::standard();
        let indenter = IndenterSpec::new(2.0, 0.8);
        let solution = solve_indentation(&mesh, &table, &indenter, &quick_config()).unwrap();
        let summary = contact_pressure_summary(&solution, &indenter).unwrap();
        assert!(summary.total_reaction_n_per_mm > 0.0);
        assert!(summary.peak_pressure_pa >= summary.mean_pressure_pa);
        assert!(summary.contact_width_mm > 0.0);
        assert_relative_eq!(
            summary.mean_pressure_pa,
            summary.total_reaction_n_per_mm / summary.contact_width_mm * 1e6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn face_lift_shape() {
        let indenter = IndenterSpec::new(3.0, 1.0);
        assert_eq!(indenter.face_lift_mm(0.0), Some(0.0));
        assert_eq!(indenter.face_lift_mm(1.4), Some(0.0)); // flat until w/2 - r
        let edge = indenter.face_lift_mm(1.5).unwrap();
        assert_relative_eq!(edge, indenter.corner_fillet_mm, epsilon = 1e-12);
        assert_eq!(indenter.face_lift_mm(1.6), None);
        // Lift is even in x.
        assert_eq!(indenter.face_lift_mm(-1.45), indenter.face_lift_mm(1.45));
    }
}
