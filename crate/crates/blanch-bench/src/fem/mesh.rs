use super::{FemError, Layer};
use std::f64::consts::TAU;
use std::path::Path;

/// Geometry of the modelled cross-section.
///
/// The slab spans `[-domain_width_mm/2, domain_width_mm/2]` laterally and
/// the three soft-tissue layers from the nominal surface (depth 0) down to
/// the bone, which is the fixed bottom boundary. When ridges are enabled the
/// surface is a cosine corrugation with a crest on the centerline; the
/// corrugation fades linearly to zero across the epidermis so the deeper
/// layer interfaces stay flat.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FingerSectionGeometry {
    pub domain_width_mm: f64,
    pub epidermis_mm: f64,
    pub dermis_mm: f64,
    pub subcutaneous_mm: f64,
    pub ridge_pitch_mm: f64,
    /// Crest-to-valley height of the corrugation.
    pub ridge_amplitude_mm: f64,
    pub ridges_enabled: bool,
}

impl Default for FingerSectionGeometry {
    /// Fingertip pulp defaults: 0.7 mm epidermis, 1.2 mm dermis, 4.0 mm
    /// subcutaneous fat, ridges of 0.35 mm pitch and 0.1 mm height, and a
    /// 20 mm wide domain (4x the widest standard indenter).
    fn default() -> Self {
        FingerSectionGeometry {
            domain_width_mm: 20.0,
            epidermis_mm: 0.7,
            dermis_mm: 1.2,
            subcutaneous_mm: 4.0,
            ridge_pitch_mm: 0.35,
            ridge_amplitude_mm: 0.1,
            ridges_enabled: true,
        }
    }
}

impl FingerSectionGeometry {
    pub fn total_depth_mm(&self) -> f64 {
        self.epidermis_mm + self.dermis_mm + self.subcutaneous_mm
    }

    pub fn validate(&self) -> Result<(), FemError> {
        let positive = [
            ("domain_width_mm", self.domain_width_mm),
            ("epidermis_mm", self.epidermis_mm),
            ("dermis_mm", self.dermis_mm),
            ("subcutaneous_mm", self.subcutaneous_mm),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(FemError::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.ridges_enabled {
            for (name, value) in [
                ("ridge_pitch_mm", self.ridge_pitch_mm),
                ("ridge_amplitude_mm", self.ridge_amplitude_mm),
            ] {
                if !(value.is_finite() && value > 0.0) {
                    return Err(FemError::InvalidParameter(format!(
                        "{name} must be positive when ridges are enabled, got {value}"
                    )));
                }
            }
            if self.ridge_amplitude_mm >= self.epidermis_mm {
                return Err(FemError::InvalidParameter(format!(
                    "ridge amplitude {} mm must be smaller than the epidermis thickness {} mm",
                    self.ridge_amplitude_mm, self.epidermis_mm
                )));
            }
        }
        Ok(())
    }

    /// Checks that the domain is wide enough (>= 4x) for every indenter
    /// width in `widths_mm`, so the lateral roller boundaries stay far from
    /// the contact.
    pub fn validate_for_indenter_widths(&self, widths_mm: &[f64]) -> Result<(), FemError> {
        for &w in widths_mm {
            if self.domain_width_mm < 4.0 * w {
                return Err(FemError::InvalidParameter(format!(
                    "domain width {} mm is less than 4x the indenter width {} mm",
                    self.domain_width_mm, w
                )));
            }
        }
        Ok(())
    }

    /// Signed vertical surface offset at lateral position `x_mm`, in mm of
    /// depth (negative = above the nominal surface). Zero when ridges are
    /// off. The crest sits on the centerline so the profile is even in `x`.
    pub fn ridge_offset_mm(&self, x_mm: f64) -> f64 {
        if !self.ridges_enabled {
            return 0.0;
        }
        let a = self.ridge_amplitude_mm;
        // |x| keeps the evaluation bitwise symmetric in x.
        let phase = TAU * (x_mm.abs() / self.ridge_pitch_mm);
        -0.5 * a * (1.0 + phase.cos())
    }
}

/// Three-node triangle with a positive signed area in (x, depth) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub nodes: [usize; 3],
    pub layer: Layer,
}

/// Conforming triangle mesh of the cross-section with boundary tags.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    elements: Vec<Triangle>,
    /// Surface node indices ordered by increasing x.
    surface: Vec<usize>,
    /// Bottom (bone interface) node indices.
    bottom: Vec<usize>,
    /// Lateral boundary node indices (both sides).
    sides: Vec<usize>,
    /// Edge-length target the mesh was built for; sizes contact penalties.
    nominal_edge_mm: f64,
}

pub(super) fn signed_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl Mesh {
    /// Assembles a mesh from raw parts, verifying node indices and element
    /// orientation.
    pub fn from_parts(
        nodes: Vec<[f64; 2]>,
        elements: Vec<Triangle>,
        surface: Vec<usize>,
        bottom: Vec<usize>,
        sides: Vec<usize>,
        nominal_edge_mm: f64,
    ) -> Result<Self, FemError> {
        let n = nodes.len();
        for (index, tri) in elements.iter().enumerate() {
            if tri.nodes.iter().any(|&i| i >= n) {
                return Err(FemError::InvalidParameter(format!(
                    "element {index} references a node beyond {n}"
                )));
            }
            let area2 = signed_area2(
                nodes[tri.nodes[0]],
                nodes[tri.nodes[1]],
                nodes[tri.nodes[2]],
            );
            if !(area2.is_finite() && area2 > 0.0) {
                return Err(FemError::DegenerateElement { index, area2 });
            }
        }
        for &i in surface.iter().chain(&bottom).chain(&sides) {
            if i >= n {
                return Err(FemError::InvalidParameter(format!(
                    "boundary tag references node {i} beyond {n}"
                )));
            }
        }
        Ok(Mesh {
            nodes,
            elements,
            surface,
            bottom,
            sides,
            nominal_edge_mm,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Triangle] {
        &self.elements
    }

    pub fn surface_nodes(&self) -> &[usize] {
        &self.surface
    }

    pub fn bottom_nodes(&self) -> &[usize] {
        &self.bottom
    }

    pub fn side_nodes(&self) -> &[usize] {
        &self.sides
    }

    pub fn nominal_edge_mm(&self) -> f64 {
        self.nominal_edge_mm
    }

    pub fn element_area(&self, index: usize) -> f64 {
        let t = &self.elements[index];
        0.5 * signed_area2(
            self.nodes[t.nodes[0]],
            self.nodes[t.nodes[1]],
            self.nodes[t.nodes[2]],
        )
    }

    /// Lateral tributary length of each surface node (half the span of its
    /// neighbouring surface segments), parallel to [`Mesh::surface_nodes`].
    pub fn surface_tributary_mm(&self) -> Vec<f64> {
        let xs: Vec<f64> = self.surface.iter().map(|&i| self.nodes[i][0]).collect();
        let n = xs.len();
        let mut trib = vec![0.0; n];
        if n < 2 {
            return trib;
        }
        trib[0] = 0.5 * (xs[1] - xs[0]);
        trib[n - 1] = 0.5 * (xs[n - 1] - xs[n - 2]);
        for i in 1..n - 1 {
            trib[i] = 0.5 * (xs[i + 1] - xs[i - 1]);
        }
        trib
    }

    /// `((x_min, x_max), (y_min, y_max))` over all nodes.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut xb = [f64::INFINITY, f64::NEG_INFINITY];
        let mut yb = [f64::INFINITY, f64::NEG_INFINITY];
        for &[x, y] in &self.nodes {
            xb[0] = xb[0].min(x);
            xb[1] = xb[1].max(x);
            yb[0] = yb[0].min(y);
            yb[1] = yb[1].max(y);
        }
        (xb, yb)
    }

    /// Writes the mesh as a CSV pair: nodes as `id,x,y` and elements as
    /// `id,n1,n2,n3,material` with lowercase layer names.
    pub fn write_csv(&self, nodes_path: &Path, elements_path: &Path) -> Result<(), FemError> {
        let mut nodes = csv::Writer::from_path(nodes_path)?;
        nodes.write_record(["id", "x", "y"])?;
        for (id, [x, y]) in self.nodes.iter().enumerate() {
            nodes.write_record([id.to_string(), x.to_string(), y.to_string()])?;
        }
        nodes.flush().map_err(FemError::Io)?;

        let mut elements = csv::Writer::from_path(elements_path)?;
        elements.write_record(["id", "n1", "n2", "n3", "material"])?;
        for (id, tri) in self.elements.iter().enumerate() {
            elements.write_record([
                id.to_string(),
                tri.nodes[0].to_string(),
                tri.nodes[1].to_string(),
                tri.nodes[2].to_string(),
                tri.layer.name().to_string(),
            ])?;
        }
        elements.flush().map_err(FemError::Io)?;
        Ok(())
    }
}

/// Builds a structured crisscross mesh of the cross-section.
///
/// Every grid cell is split into four triangles around its center node, which
/// keeps the mesh exactly mirror-symmetric about x = 0. Column spacing is at
/// most `surface_refine_mm`; with ridges enabled it is locked to an even
/// divisor of the ridge pitch so crest and valley lines fall on mesh columns
/// (the half-width then grows by less than one column to fit). Row spacing is
/// `surface_refine_mm` down to 0.5 mm depth and `target_edge_mm` below, with
/// rows forced onto the layer interfaces.
///
/// Preconditions: `target_edge_mm > surface_refine_mm > 0`, and every layer
/// must be at least `surface_refine_mm` thick so it resolves to one row.
pub fn build_finger_mesh(
    geometry: &FingerSectionGeometry,
    target_edge_mm: f64,
    surface_refine_mm: f64,
) -> Result<Mesh, FemError> {
    geometry.validate()?;
    if !(target_edge_mm.is_finite() && surface_refine_mm.is_finite())
        || !(surface_refine_mm > 0.0)
        || !(target_edge_mm > surface_refine_mm)
    {
        return Err(FemError::InvalidParameter(format!(
            "need target_edge_mm > surface_refine_mm > 0, got {target_edge_mm} and {surface_refine_mm}"
        )));
    }
    let layers = [
        (Layer::Epidermis, geometry.epidermis_mm),
        (Layer::Dermis, geometry.dermis_mm),
        (Layer::Subcutaneous, geometry.subcutaneous_mm),
    ];
    for (layer, thickness_mm) in layers {
        if thickness_mm < surface_refine_mm {
            return Err(FemError::LayerTooThin {
                layer,
                thickness_mm,
                refine_mm: surface_refine_mm,
            });
        }
    }

    // Lateral columns, built on the positive half and mirrored bitwise.
    let half_width = 0.5 * geometry.domain_width_mm;
    let (dx, half_cols) = if geometry.ridges_enabled {
        let per_half_pitch = (geometry.ridge_pitch_mm / (2.0 * surface_refine_mm)).ceil() as usize;
        let dx = geometry.ridge_pitch_mm / (2.0 * per_half_pitch as f64);
        let cols = (half_width / dx - 1e-9).ceil() as usize;
        (dx, cols.max(1))
    } else {
        let cols = (half_width / surface_refine_mm - 1e-9).ceil() as usize;
        (half_width / cols.max(1) as f64, cols.max(1))
    };
    let mut xs = Vec::with_capacity(2 * half_cols + 1);
    for i in -(half_cols as i64)..=(half_cols as i64) {
        xs.push(i as f64 * dx);
    }

    // Depth rows: per-segment uniform subdivision between breakpoints at
    // the fine-zone floor (0.5 mm) and the layer interfaces.
    let fine_zone = 0.5_f64;
    let d1 = geometry.epidermis_mm;
    let d2 = d1 + geometry.dermis_mm;
    let d3 = d2 + geometry.subcutaneous_mm;
    let mut breaks = vec![0.0, d1, d2, d3];
    if fine_zone < d3 && breaks.iter().all(|&b| (b - fine_zone).abs() > 1e-9) {
        breaks.push(fine_zone);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ys = vec![0.0];
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let allowed = if b <= fine_zone + 1e-9 {
            surface_refine_mm
        } else {
            target_edge_mm
        };
        let steps = ((b - a) / allowed - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=steps {
            ys.push(a + (b - a) * k as f64 / steps as f64);
        }
    }

    let n_cols = xs.len();
    let n_rows = ys.len();
    let n_grid = n_cols * n_rows;
    let grid_id = |r: usize, c: usize| r * n_cols + c;
    let center_id = |r: usize, c: usize| n_grid + r * (n_cols - 1) + c;

    // Grid nodes with the corrugation applied; it fades out at the bottom of
    // the epidermis so the dermis interface row stays flat.
    let mut nodes = Vec::with_capacity(n_grid + (n_cols - 1) * (n_rows - 1));
    for &y in &ys {
        let fade = (1.0 - y / geometry.epidermis_mm).max(0.0);
        for &x in &xs {
            nodes.push([x, y + fade * geometry.ridge_offset_mm(x)]);
        }
    }
    for r in 0..n_rows - 1 {
        for c in 0..n_cols - 1 {
            let tl = nodes[grid_id(r, c)];
            let tr = nodes[grid_id(r, c + 1)];
            let br = nodes[grid_id(r + 1, c + 1)];
            let bl = nodes[grid_id(r + 1, c)];
            // Average row pairs first so a mirrored cell sums the same pairs
            // in the same order and the center comes out bitwise symmetric.
            let cx = 0.5 * (0.5 * (tl[0] + tr[0]) + 0.5 * (bl[0] + br[0]));
            let cy = 0.5 * (0.5 * (tl[1] + tr[1]) + 0.5 * (bl[1] + br[1]));
            nodes.push([cx, cy]);
        }
    }

    let layer_of = |depth: f64| {
        if depth < d1 {
            Layer::Epidermis
        } else if depth < d2 {
            Layer::Dermis
        } else {
            Layer::Subcutaneous
        }
    };
    let mut elements = Vec::with_capacity(4 * (n_cols - 1) * (n_rows - 1));
    for r in 0..n_rows - 1 {
        for c in 0..n_cols - 1 {
            let tl = grid_id(r, c);
            let tr = grid_id(r, c + 1);
            let br = grid_id(r + 1, c + 1);
            let bl = grid_id(r + 1, c);
            let ct = center_id(r, c);
            for corner_pair in [[tl, tr], [tr, br], [br, bl], [bl, tl]] {
                let tri = [corner_pair[0], corner_pair[1], ct];
                let depth = (nodes[tri[0]][1] + nodes[tri[1]][1] + nodes[tri[2]][1]) / 3.0;
                elements.push(Triangle {
                    nodes: tri,
                    layer: layer_of(depth),
                });
            }
        }
    }

    let surface = (0..n_cols).map(|c| grid_id(0, c)).collect();
    let bottom = (0..n_cols).map(|c| grid_id(n_rows - 1, c)).collect();
    let mut sides = Vec::with_capacity(2 * n_rows);
    for r in 0..n_rows {
        sides.push(grid_id(r, 0));
        sides.push(grid_id(r, n_cols - 1));
    }

    Mesh::from_parts(nodes, elements, surface, bottom, sides, target_edge_mm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn default_mesh() -> Mesh {
        build_finger_mesh(&FingerSectionGeometry::default(), 0.2, 0.1).unwrap()
    }

    #[test]
    fn elements_are_positively_oriented_and_conforming() {
        let mesh = default_mesh();
        for i in 0..mesh.element_count() {
            assert!(mesh.element_area(i) > 0.0, "element {i} inverted");
        }
        // Every edge is shared by exactly two elements, or one on the hull.
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in mesh.elements() {
            for k in 0..3 {
                let a = tri.nodes[k];
                let b = tri.nodes[(k + 1) % 3];
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        assert!(edge_count.values().all(|&c| c == 1 || c == 2));
        let hull_edges = edge_count.values().filter(|&&c| c == 1).count();
        // The hull of the structured grid: top + bottom + two sides.
        let n_cols = mesh.surface_nodes().len();
        let n_rows = mesh.bottom_nodes()[0] / n_cols + 1;
        assert_eq!(hull_edges, 2 * (n_cols - 1) + 2 * (n_rows - 1));
    }

    #[test]
    fn mesh_is_mirror_symmetric() {
        let mesh = default_mesh();
        // For every node (x, y) the node (-x, y) exists bitwise; x == 0
        // mirrors onto itself, so -0.0 and 0.0 must share a key.
        let key = |x: f64| if x == 0.0 { 0.0_f64.to_bits() } else { x.to_bits() };
        let mut lookup = HashMap::new();
        for &[x, y] in mesh.nodes() {
            lookup.insert((key(x), y.to_bits()), ());
        }
        for &[x, y] in mesh.nodes() {
            assert!(
                lookup.contains_key(&(key(-x), y.to_bits())),
                "missing mirror of ({x}, {y})"
            );
        }
    }

    #[test]
    fn ridge_surface_spans_exactly_the_amplitude() {
        let geometry = FingerSectionGeometry::default();
        let mesh = build_finger_mesh(&geometry, 0.2, 0.1).unwrap();
        let ys: Vec<f64> = mesh
            .surface_nodes()
            .iter()
            .map(|&i| mesh.nodes()[i][1])
            .collect();
        let min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (max - min - geometry.ridge_amplitude_mm).abs() < 1e-12,
            "span {} != amplitude {}",
            max - min,
            geometry.ridge_amplitude_mm
        );
        assert!((max - 0.0).abs() < 1e-12, "valleys must sit at depth 0");
    }

    #[test]
    fn flat_mesh_assigns_layers_by_centroid_depth() {
        let geometry = FingerSectionGeometry {
            ridges_enabled: false,
            ..FingerSectionGeometry::default()
        };
        let mesh = build_finger_mesh(&geometry, 0.2, 0.1).unwrap();
        for (i, tri) in mesh.elements().iter().enumerate() {
            let depth = tri
                .nodes
                .iter()
                .map(|&n| mesh.nodes()[n][1])
                .sum::<f64>()
                / 3.0;
            let expected = if depth < geometry.epidermis_mm {
                Layer::Epidermis
            } else if depth < geometry.epidermis_mm + geometry.dermis_mm {
                Layer::Dermis
            } else {
                Layer::Subcutaneous
            };
            assert_eq!(tri.layer, expected, "element {i} at depth {depth}");
        }
        // All three layers are present.
        for layer in [Layer::Epidermis, Layer::Dermis, Layer::Subcutaneous] {
            assert!(mesh.elements().iter().any(|t| t.layer == layer));
        }
    }

    #[test]
    fn near_surface_edges_respect_refinement() {
        let refine = 0.1;
        let mesh = build_finger_mesh(&FingerSectionGeometry::default(), 0.2, refine).unwrap();
        for tri in mesh.elements() {
            for k in 0..3 {
                let a = mesh.nodes()[tri.nodes[k]];
                let b = mesh.nodes()[tri.nodes[(k + 1) % 3]];
                if a[1] < 0.5 && b[1] < 0.5 {
                    let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                    // Ridge slope stretches edges slightly; allow sqrt(2)+
                    // of the axis-aligned refinement bound.
                    assert!(
                        len <= refine * 1.6,
                        "edge of length {len} at depth < 0.5 mm"
                    );
                }
            }
        }
    }

    #[test]
    fn layer_thinner_than_refinement_is_rejected() {
        let geometry = FingerSectionGeometry {
            epidermis_mm: 0.05,
            ridge_amplitude_mm: 0.02,
            ..FingerSectionGeometry::default()
        };
        match build_finger_mesh(&geometry, 0.2, 0.1) {
            Err(FemError::LayerTooThin { layer, .. }) => assert_eq!(layer, Layer::Epidermis),
            other => panic!("expected LayerTooThin, got {other:?}"),
        }
    }

    #[test]
    fn interfaces_fall_on_node_rows() {
        let geometry = FingerSectionGeometry::default();
        let mesh = build_finger_mesh(&geometry, 0.2, 0.1).unwrap();
        for interface in [
            geometry.epidermis_mm,
            geometry.epidermis_mm + geometry.dermis_mm,
        ] {
            assert!(
                mesh.nodes().iter().any(|&[_, y]| (y - interface).abs() < 1e-12),
                "no node row at interface depth {interface}"
            );
        }
    }

    #[test]
    fn csv_export_writes_expected_headers_and_counts() {
        let mesh = build_finger_mesh(
            &FingerSectionGeometry {
                domain_width_mm: 4.0,
                ridges_enabled: false,
                ..FingerSectionGeometry::default()
            },
            1.0,
            0.5,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let nodes_path = dir.path().join("nodes.csv");
        let elements_path = dir.path().join("elements.csv");
        mesh.write_csv(&nodes_path, &elements_path).unwrap();

        let nodes = std::fs::read_to_string(&nodes_path).unwrap();
        let mut lines = nodes.lines();
        assert_eq!(lines.next(), Some("id,x,y"));
        assert_eq!(lines.count(), mesh.node_count());

        let elements = std::fs::read_to_string(&elements_path).unwrap();
        let mut lines = elements.lines();
        assert_eq!(lines.next(), Some("id,n1,n2,n3,material"));
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), mesh.element_count());
        assert!(body[0].ends_with(",epidermis"));
    }
}
