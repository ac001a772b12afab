use super::mesh::signed_area2;
use super::{CsrMatrix, FemError, MaterialTable, Mesh};

/// Plane-strain constitutive matrix relating `[exx, eyy, gxy]` to
/// `[sxx, syy, sxy]`.
pub(super) fn plane_strain_d(e_pa: f64, nu: f64) -> [[f64; 3]; 3] {
    let f = e_pa / ((1.0 + nu) * (1.0 - 2.0 * nu));
    [
        [f * (1.0 - nu), f * nu, 0.0],
        [f * nu, f * (1.0 - nu), 0.0],
        [0.0, 0.0, f * (1.0 - 2.0 * nu) / 2.0],
    ]
}

/// Strain-displacement matrix of a 3-node triangle and its doubled area.
/// Row order `[exx, eyy, gxy]`, column order `[ux1, uy1, ux2, uy2, ux3, uy3]`.
pub(super) fn element_b(coords: &[[f64; 2]; 3]) -> ([[f64; 6]; 3], f64) {
    let [p1, p2, p3] = *coords;
    let area2 = signed_area2(p1, p2, p3);
    let b = [p2[1] - p3[1], p3[1] - p1[1], p1[1] - p2[1]];
    let c = [p3[0] - p2[0], p1[0] - p3[0], p2[0] - p1[0]];
    let mut mat = [[0.0; 6]; 3];
    for k in 0..3 {
        mat[0][2 * k] = b[k] / area2;
        mat[1][2 * k + 1] = c[k] / area2;
        mat[2][2 * k] = c[k] / area2;
        mat[2][2 * k + 1] = b[k] / area2;
    }
    (mat, area2)
}

/// Element stiffness `area * t * B' D B` for unit out-of-plane thickness.
/// Units: Pa * mm (coordinates in mm, modulus in Pa).
pub(super) fn element_stiffness(
    coords: &[[f64; 2]; 3],
    e_pa: f64,
    nu: f64,
) -> Result<[[f64; 6]; 6], f64> {
    let (b, area2) = element_b(coords);
    if !(area2.is_finite() && area2 > 0.0) {
        return Err(area2);
    }
    let d = plane_strain_d(e_pa, nu);
    // db = D * B
    let mut db = [[0.0; 6]; 3];
    for i in 0..3 {
        for j in 0..6 {
            db[i][j] = (0..3).map(|k| d[i][k] * b[k][j]).sum();
        }
    }
    let area_t = 0.5 * area2;
    let mut k = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            k[i][j] = area_t * (0..3).map(|m| b[m][i] * db[m][j]).sum::<f64>();
        }
    }
    Ok(k)
}

/// Assembled global stiffness with two dofs per node, ordered
/// `[ux0, uy0, ux1, uy1, ...]`. Boundary conditions are not applied here;
/// the contact solver masks constrained dofs.
#[derive(Debug, Clone)]
pub struct StiffnessSystem {
    pub matrix: CsrMatrix,
}

/// Assembles the global plane-strain stiffness matrix.
///
/// Errors if the material table lacks a layer present in the mesh or if an
/// element has nonpositive area.
pub fn assemble_system(mesh: &Mesh, materials: &MaterialTable) -> Result<StiffnessSystem, FemError> {
    let n_dof = 2 * mesh.node_count();
    let mut pattern: Vec<Vec<u32>> = vec![Vec::new(); n_dof];
    for tri in mesh.elements() {
        let dofs = element_dofs(tri.nodes);
        for &a in &dofs {
            for &b in &dofs {
                pattern[a].push(b as u32);
            }
        }
    }
    let mut matrix = CsrMatrix::from_pattern(pattern);

    for (index, tri) in mesh.elements().iter().enumerate() {
        let params = materials
            .get(tri.layer)
            .ok_or(FemError::UnknownMaterial(tri.layer))?;
        let coords = [
            mesh.nodes()[tri.nodes[0]],
            mesh.nodes()[tri.nodes[1]],
            mesh.nodes()[tri.nodes[2]],
        ];
        let ke = element_stiffness(&coords, params.elastic_modulus_pa, params.poisson_ratio)
            .map_err(|area2| FemError::DegenerateElement { index, area2 })?;
        let dofs = element_dofs(tri.nodes);
        for i in 0..6 {
            for j in 0..6 {
                matrix.add(dofs[i], dofs[j], ke[i][j]);
            }
        }
    }
    Ok(StiffnessSystem { matrix })
}

fn element_dofs(nodes: [usize; 3]) -> [usize; 6] {
    [
        2 * nodes[0],
        2 * nodes[0] + 1,
        2 * nodes[1],
        2 * nodes[1] + 1,
        2 * nodes[2],
        2 * nodes[2] + 1,
    ]
}

#[cfg(test)]
mod tests {
    use super::super::{build_finger_mesh, FingerSectionGeometry, Layer, MaterialParams};
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::HashSet;

    /// Hand-computed stiffness of the unit right triangle (0,0)-(1,0)-(0,1)
    /// with E = 1, nu = 0: D = diag(1, 1, 1/2), area = 1/2.
    #[test]
    fn unit_triangle_stiffness_matches_reference() {
        let coords = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let k = element_stiffness(&coords, 1.0, 0.0).unwrap();
        let expected = [
            [0.75, 0.25, -0.5, -0.25, -0.25, 0.0],
            [0.25, 0.75, 0.0, -0.25, -0.25, -0.5],
            [-0.5, 0.0, 0.5, 0.0, 0.0, 0.0],
            [-0.25, -0.25, 0.0, 0.25, 0.25, 0.0],
            [-0.25, -0.25, 0.0, 0.25, 0.25, 0.0],
            [0.0, -0.5, 0.0, 0.0, 0.0, 0.5],
        ];
        for i in 0..6 {
            for j in 0..6 {
                assert_relative_eq!(k[i][j], expected[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn element_stiffness_rejects_degenerate_triangle() {
        let coords = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        assert!(element_stiffness(&coords, 1.0, 0.3).is_err());
        // Negative orientation is rejected too.
        let flipped = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        assert!(element_stiffness(&flipped, 1.0, 0.3).is_err());
    }

    fn small_mesh() -> Mesh {
        build_finger_mesh(
            &FingerSectionGeometry {
                domain_width_mm: 4.0,
                ridges_enabled: false,
                ..FingerSectionGeometry::default()
            },
            0.8,
            0.4,
        )
        .unwrap()
    }

    #[test]
    fn assembled_matrix_is_symmetric_with_positive_diagonal() {
        let mesh = small_mesh();
        let system = assemble_system(&mesh, &MaterialTable::standard()).unwrap();
        assert!(system.matrix.asymmetry() <= 1e-12);
        assert!(system.matrix.diagonal().iter().all(|&d| d > 0.0));
        assert_eq!(system.matrix.dim(), 2 * mesh.node_count());
    }

    #[test]
    fn missing_layer_material_is_reported() {
        let mesh = small_mesh();
        let p = MaterialParams::new(1.0e5, 0.3).unwrap();
        let table = MaterialTable::new(vec![(Layer::Epidermis, p), (Layer::Dermis, p)]).unwrap();
        match assemble_system(&mesh, &table) {
            Err(FemError::UnknownMaterial(layer)) => assert_eq!(layer, Layer::Subcutaneous),
            other => panic!("expected UnknownMaterial, got {other:?}"),
        }
    }

    /// Patch test: on a homogeneous body a linear displacement field
    /// produces zero residual force at interior nodes, because
    /// constant-strain triangles reproduce constant stress exactly.
    #[test]
    fn linear_field_patch_test() {
        let mesh = small_mesh();
        let p = MaterialParams::new(1.0e5, 0.3).unwrap();
        let table = MaterialTable::new(vec![
            (Layer::Epidermis, p),
            (Layer::Dermis, p),
            (Layer::Subcutaneous, p),
        ])
        .unwrap();
        let system = assemble_system(&mesh, &table).unwrap();
        let n = mesh.node_count();
        let mut u = vec![0.0; 2 * n];
        for (i, &[x, y]) in mesh.nodes().iter().enumerate() {
            u[2 * i] = 1e-3 * x + 2e-3 * y;
            u[2 * i + 1] = -0.5e-3 * x + 1.5e-3 * y;
        }
        let mut f = vec![0.0; 2 * n];
        system.matrix.matvec(&u, &mut f);

        let boundary: HashSet<usize> = mesh
            .surface_nodes()
            .iter()
            .chain(mesh.bottom_nodes())
            .chain(mesh.side_nodes())
            .copied()
            .collect();
        let f_scale = f.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        for i in 0..n {
            if boundary.contains(&i) {
                continue;
            }
            assert!(
                f[2 * i].abs() <= 1e-10 * f_scale && f[2 * i + 1].abs() <= 1e-10 * f_scale,
                "interior node {i} has residual ({}, {})",
                f[2 * i],
                f[2 * i + 1]
            );
        }
    }
}
