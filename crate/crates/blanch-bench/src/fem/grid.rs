use super::{FemError, Mesh, StressField};
use std::path::Path;

/// Extents of the regular sampling window: lateral from the centerline out
/// to `lateral_mm`, depth from the nominal surface down to `depth_mm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRegion {
    pub lateral_mm: f64,
    pub depth_mm: f64,
}

impl Default for GridRegion {
    /// 7 mm x 2 mm window: wide enough to cover the largest indenter's
    /// influence zone, deep enough to span all of epidermis and dermis.
    fn default() -> Self {
        GridRegion {
            lateral_mm: 7.0,
            depth_mm: 2.0,
        }
    }
}

/// Default grid spacing in mm (71 x 21 points for the default region).
pub const DEFAULT_GRID_SPACING_MM: f64 = 0.1;

/// Von Mises stress sampled on a regular lateral x depth grid.
///
/// Values are stored row-major with depth varying fastest, so
/// `value(i, j) = values[i * n_depth + j]`. Lateral starts at 0: samples at
/// `+x` and `-x` are averaged during resampling, which pins the mirror
/// symmetry of the half-grid exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct VmGrid {
    lateral_mm: Vec<f64>,
    depth_mm: Vec<f64>,
    values: Vec<f64>,
}

impl VmGrid {
    pub fn new(
        lateral_mm: Vec<f64>,
        depth_mm: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, FemError> {
        if lateral_mm.is_empty() || depth_mm.is_empty() {
            return Err(FemError::InvalidParameter("grid axes must be non-empty".into()));
        }
        for axis in [&lateral_mm, &depth_mm] {
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(FemError::InvalidParameter(
                    "grid axes must be strictly increasing".into(),
                ));
            }
        }
        if values.len() != lateral_mm.len() * depth_mm.len() {
            return Err(FemError::InvalidParameter(format!(
                "expected {} grid values, got {}",
                lateral_mm.len() * depth_mm.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FemError::InvalidParameter("grid values must be finite".into()));
        }
        Ok(VmGrid {
            lateral_mm,
            depth_mm,
            values,
        })
    }

    pub fn lateral_mm(&self) -> &[f64] {
        &self.lateral_mm
    }

    pub fn depth_mm(&self) -> &[f64] {
        &self.depth_mm
    }

    pub fn n_lateral(&self) -> usize {
        self.lateral_mm.len()
    }

    pub fn n_depth(&self) -> usize {
        self.depth_mm.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i_lateral: usize, j_depth: usize) -> f64 {
        self.values[i_lateral * self.depth_mm.len() + j_depth]
    }

    /// Depth profile under one lateral position (contiguous slice).
    pub fn depth_column(&self, i_lateral: usize) -> &[f64] {
        let nd = self.depth_mm.len();
        &self.values[i_lateral * nd..(i_lateral + 1) * nd]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `lateral_mm,depth_mm,von_mises_pa` rows, depth varying fastest.
    pub fn write_csv(&self, path: &Path) -> Result<(), FemError> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["lateral_mm", "depth_mm", "von_mises_pa"])?;
        for (i, &lat) in self.lateral_mm.iter().enumerate() {
            for (j, &dep) in self.depth_mm.iter().enumerate() {
                writer.write_record([
                    lat.to_string(),
                    dep.to_string(),
                    self.value(i, j).to_string(),
                ])?;
            }
        }
        writer.flush().map_err(FemError::Io)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, FemError> {
        let malformed = |message: String| FemError::MalformedFile {
            path: path.display().to_string(),
            message,
        };
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["lateral_mm", "depth_mm", "von_mises_pa"] {
            return Err(malformed(format!("unexpected header {headers:?}")));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let parse = |k: usize| {
                record
                    .get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| malformed(format!("bad row {record:?}")))
            };
            rows.push((parse(0)?, parse(1)?, parse(2)?));
        }
        if rows.is_empty() {
            return Err(malformed("no data rows".into()));
        }
        let mut depth = Vec::new();
        for &(_, d, _) in &rows {
            if !depth.is_empty() && d == depth[0] {
                break;
            }
            depth.push(d);
        }
        let nd = depth.len();
        if rows.len() % nd != 0 {
            return Err(malformed(format!(
                "{} rows not divisible by {} depth levels",
                rows.len(),
                nd
            )));
        }
        let mut lateral = Vec::with_capacity(rows.len() / nd);
        let mut values = Vec::with_capacity(rows.len());
        for (r, &(lat, dep, val)) in rows.iter().enumerate() {
            if r % nd == 0 {
                lateral.push(lat);
            } else if lat != lateral[r / nd] {
                return Err(malformed(format!("row {r} breaks depth-fastest order")));
            }
            if dep != depth[r % nd] {
                return Err(malformed(format!("row {r} has off-grid depth {dep}")));
            }
            values.push(val);
        }
        VmGrid::new(lateral, depth, values)
    }
}

/// Resamples an element-wise stress field onto a regular half-grid.
///
/// Element values are first averaged to nodes (area-weighted), then each
/// grid point is evaluated by linear interpolation inside its containing
/// triangle at `(+lateral, depth)` and `(-lateral, depth)`; the two samples
/// are averaged so the output is exactly mirror-symmetric. Sampling happens
/// in reference (undeformed) coordinates.
pub fn resample_vm_grid(
    field: &StressField,
    mesh: &Mesh,
    region: GridRegion,
    spacing_mm: f64,
) -> Result<VmGrid, FemError> {
    if field.von_mises.len() != mesh.element_count() {
        return Err(FemError::InvalidParameter(format!(
            "stress field has {} elements, mesh has {}",
            field.von_mises.len(),
            mesh.element_count()
        )));
    }
    if !(spacing_mm.is_finite() && spacing_mm > 0.0) {
        return Err(FemError::InvalidParameter(format!(
            "grid spacing must be positive, got {spacing_mm}"
        )));
    }
    if !(region.lateral_mm >= 0.0 && region.depth_mm >= 0.0) {
        return Err(FemError::InvalidParameter(
            "grid region extents must be nonnegative".into(),
        ));
    }

    // Area-weighted nodal average of the element von Mises values.
    let mut nodal = vec![0.0; mesh.node_count()];
    let mut weight = vec![0.0; mesh.node_count()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = mesh.element_area(e);
        for &n in &tri.nodes {
            nodal[n] += area * field.von_mises[e];
            weight[n] += area;
        }
    }
    for (v, w) in nodal.iter_mut().zip(&weight) {
        if *w > 0.0 {
            *v /= w;
        }
    }

    let locator = Locator::build(mesh);
    let axis = |extent: f64| -> Vec<f64> {
        let n = (extent / spacing_mm + 1e-9).floor() as usize + 1;
        (0..n).map(|k| k as f64 * spacing_mm).collect()
    };
    let lateral = axis(region.lateral_mm);
    let depth = axis(region.depth_mm);

    let mut values = Vec::with_capacity(lateral.len() * depth.len());
    for &lat in &lateral {
        for &dep in &depth {
            let right = locator.interpolate(mesh, &nodal, [lat, dep]).ok_or(
                FemError::GridPointOutsideMesh {
                    lateral_mm: lat,
                    depth_mm: dep,
                },
            )?;
            let left = locator.interpolate(mesh, &nodal, [-lat, dep]).ok_or(
                FemError::GridPointOutsideMesh {
                    lateral_mm: -lat,
                    depth_mm: dep,
                },
            )?;
            values.push(0.5 * (right + left));
        }
    }
    VmGrid::new(lateral, depth, values)
}

/// Uniform-bin spatial index over element bounding boxes.
struct Locator {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl Locator {
    fn build(mesh: &Mesh) -> Self {
        let ([x_min, x_max], [y_min, y_max]) = mesh.bounds();
        let cell = (2.0 * mesh.nominal_edge_mm()).max(1e-6);
        let nx = (((x_max - x_min) / cell).ceil() as usize).max(1);
        let ny = (((y_max - y_min) / cell).ceil() as usize).max(1);
        let mut bins = vec![Vec::new(); nx * ny];
        let clamp = |v: f64, hi: usize| (v.max(0.0) as usize).min(hi - 1);
        for (e, tri) in mesh.elements().iter().enumerate() {
            let xs = tri.nodes.map(|n| mesh.nodes()[n][0]);
            let ys = tri.nodes.map(|n| mesh.nodes()[n][1]);
            let (ex0, ex1) = (
                xs.iter().cloned().fold(f64::INFINITY, f64::min),
                xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            );
            let (ey0, ey1) = (
                ys.iter().cloned().fold(f64::INFINITY, f64::min),
                ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            );
            let ix0 = clamp((ex0 - x_min) / cell, nx);
            let ix1 = clamp((ex1 - x_min) / cell, nx);
            let iy0 = clamp((ey0 - y_min) / cell, ny);
            let iy1 = clamp((ey1 - y_min) / cell, ny);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    bins[iy * nx + ix].push(e as u32);
                }
            }
        }
        Locator {
            origin: [x_min, y_min],
            cell,
            nx,
            ny,
            bins,
        }
    }

    /// Linear interpolation of nodal values at `point`, or `None` if no
    /// triangle contains it.
    fn interpolate(&self, mesh: &Mesh, nodal: &[f64], point: [f64; 2]) -> Option<f64> {
        let ix = (((point[0] - self.origin[0]) / self.cell).floor() as i64)
            .clamp(0, self.nx as i64 - 1) as usize;
        let iy = (((point[1] - self.origin[1]) / self.cell).floor() as i64)
            .clamp(0, self.ny as i64 - 1) as usize;
        // Search the point's bin first, then its neighbourhood for points
        // that sit on bin borders.
        for ring in 0..2 {
            for dy in -(ring as i64)..=ring as i64 {
                for dx in -(ring as i64)..=ring as i64 {
                    if ring == 1 && dx.abs() != 1 && dy.abs() != 1 {
                        continue;
                    }
                    let bx = ix as i64 + dx;
                    let by = iy as i64 + dy;
                    if bx < 0 || by < 0 || bx >= self.nx as i64 || by >= self.ny as i64 {
                        continue;
                    }
                    let bin = &self.bins[by as usize * self.nx + bx as usize];
                    if let Some(v) = interpolate_in_bin(mesh, nodal, bin, point) {
                        return Some(v);
                    }
                }
            }
        }
        None
    }
}

fn interpolate_in_bin(
    mesh: &Mesh,
    nodal: &[f64],
    bin: &[u32],
    point: [f64; 2],
) -> Option<f64> {
    for &e in bin {
        let tri = &mesh.elements()[e as usize];
        let [a, b, c] = tri.nodes.map(|n| mesh.nodes()[n]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if det.abs() < f64::MIN_POSITIVE {
            continue;
        }
        let l1 = ((b[0] - point[0]) * (c[1] - point[1])
            - (c[0] - point[0]) * (b[1] - point[1]))
            / det;
        let l2 = ((c[0] - point[0]) * (a[1] - point[1])
            - (a[0] - point[0]) * (c[1] - point[1]))
            / det;
        let l3 = 1.0 - l1 - l2;
        let tol = -1e-9;
        if l1 >= tol && l2 >= tol && l3 >= tol {
            return Some(
                l1 * nodal[tri.nodes[0]] + l2 * nodal[tri.nodes[1]] + l3 * nodal[tri.nodes[2]],
            );
        }
    }
    None
}
