use super::assembly::{element_b, plane_strain_d};
use super::{FemError, MaterialTable, Mesh};

/// In-plane stress components plus the plane-strain out-of-plane normal
/// stress, all in pascals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressTensor {
    pub sxx: f64,
    pub syy: f64,
    pub sxy: f64,
    pub szz: f64,
}

/// Piecewise-constant stress over the mesh, one tensor per element.
#[derive(Debug, Clone)]
pub struct StressField {
    pub element_stress: Vec<StressTensor>,
    pub von_mises: Vec<f64>,
}

/// Von Mises equivalent stress for a plane-strain state (zero out-of-plane
/// shear).
pub fn von_mises(s: &StressTensor) -> f64 {
    let dev = 0.5
        * ((s.sxx - s.syy).powi(2) + (s.syy - s.szz).powi(2) + (s.szz - s.sxx).powi(2))
        + 3.0 * s.sxy * s.sxy;
    dev.max(0.0).sqrt()
}

/// Recovers element stresses from a nodal displacement field (mm). Strains
/// are constant per triangle, so each element carries a single tensor;
/// `szz = nu (sxx + syy)` by the plane-strain constraint.
pub fn recover_stress_field(
    mesh: &Mesh,
    materials: &MaterialTable,
    displacement: &[[f64; 2]],
) -> Result<StressField, FemError> {
    if displacement.len() != mesh.node_count() {
        return Err(FemError::DisplacementSizeMismatch {
            got: displacement.len(),
            expected: mesh.node_count(),
        });
    }
    let mut element_stress = Vec::with_capacity(mesh.element_count());
    let mut vm = Vec::with_capacity(mesh.element_count());
    for (index, tri) in mesh.elements().iter().enumerate() {
        let params = materials
            .get(tri.layer)
            .ok_or(FemError::UnknownMaterial(tri.layer))?;
        let coords = [
            mesh.nodes()[tri.nodes[0]],
            mesh.nodes()[tri.nodes[1]],
            mesh.nodes()[tri.nodes[2]],
        ];
        let (b, area2) = element_b(&coords);
        if !(area2.is_finite() && area2 > 0.0) {
            return Err(FemError::DegenerateElement { index, area2 });
        }
        let u: [f64; 6] = [
            displacement[tri.nodes[0]][0],
            displacement[tri.nodes[0]][1],
            displacement[tri.nodes[1]][0],
            displacement[tri.nodes[1]][1],
            displacement[tri.nodes[2]][0],
            displacement[tri.nodes[2]][1],
        ];
        let mut strain = [0.0; 3];
        for r in 0..3 {
            strain[r] = (0..6).map(|c| b[r][c] * u[c]).sum();
        }
        let d = plane_strain_d(params.elastic_modulus_pa, params.poisson_ratio);
        let sxx = d[0][0] * strain[0] + d[0][1] * strain[1];
        let syy = d[1][0] * strain[0] + d[1][1] * strain[1];
        let sxy = d[2][2] * strain[2];
        let szz = params.poisson_ratio * (sxx + syy);
        let tensor = StressTensor { sxx, syy, sxy, szz };
        vm.push(von_mises(&tensor));
        element_stress.push(tensor);
    }
    Ok(StressField {
        element_stress,
        von_mises: vm,
    })
}
