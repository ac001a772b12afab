use super::StatsError;
use crate::fem::VmGrid;
use crate::imaging::HalfProfile;
use nalgebra::{DMatrix, DVector};
use std::path::Path;

/// Minimum shared lateral span required to pair a grid with a profile.
pub const MIN_LATERAL_OVERLAP_MM: f64 = 5.0;

/// Paired explanatory/objective data for one indentation condition:
/// one row per lateral position, one stress column per depth.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    /// Von Mises stress, Pa; rows follow `lateral_mm`, columns `depth_mm`.
    pub x: DMatrix<f64>,
    /// Color change at the matching lateral positions, intensity units.
    pub y: DVector<f64>,
    pub lateral_mm: Vec<f64>,
    pub depth_mm: Vec<f64>,
}

impl RegressionDataset {
    pub fn from_parts(
        x: DMatrix<f64>,
        y: DVector<f64>,
        lateral_mm: Vec<f64>,
        depth_mm: Vec<f64>,
    ) -> Result<Self, StatsError> {
        if x.nrows() != y.len() || x.nrows() != lateral_mm.len() {
            return Err(StatsError::DimensionMismatch {
                context: "dataset rows",
                expected: x.nrows(),
                actual: y.len().min(lateral_mm.len()),
            });
        }
        if x.ncols() != depth_mm.len() {
            return Err(StatsError::DimensionMismatch {
                context: "dataset columns",
                expected: x.ncols(),
                actual: depth_mm.len(),
            });
        }
        if lateral_mm.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(StatsError::InvalidParameter(
                "lateral coordinates must be strictly increasing".into(),
            ));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(StatsError::InvalidParameter(
                "dataset values must be finite".into(),
            ));
        }
        Ok(RegressionDataset {
            x,
            y,
            lateral_mm,
            depth_mm,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_depths(&self) -> usize {
        self.x.ncols()
    }

    /// Writes `lateral_mm, depth_<d>mm ..., color_change` rows.
    pub fn write_csv(&self, path: &Path) -> Result<(), StatsError> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec!["lateral_mm".to_string()];
        header.extend(self.depth_mm.iter().map(|d| format!("depth_{d}mm")));
        header.push("color_change".to_string());
        writer.write_record(&header)?;
        for (i, &lateral) in self.lateral_mm.iter().enumerate() {
            let mut record = vec![lateral.to_string()];
            record.extend((0..self.n_depths()).map(|j| self.x[(i, j)].to_string()));
            record.push(self.y[i].to_string());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, StatsError> {
        let malformed = |message: String| StatsError::MalformedFile {
            path: path.display().to_string(),
            message,
        };
        let mut reader = csv::Reader::from_path(path)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.len() < 3
            || header.first().map(String::as_str) != Some("lateral_mm")
            || header.last().map(String::as_str) != Some("color_change")
        {
            return Err(malformed(
                "expected header lateral_mm, depth_<d>mm ..., color_change".into(),
            ));
        }
        let mut depth_mm = Vec::with_capacity(header.len() - 2);
        for name in &header[1..header.len() - 1] {
            let depth = name
                .strip_prefix("depth_")
                .and_then(|s| s.strip_suffix("mm"))
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| malformed(format!("bad depth column name {name:?}")))?;
            depth_mm.push(depth);
        }
        let mut lateral_mm = Vec::new();
        let mut rows: Vec<f64> = Vec::new();
        let mut y = Vec::new();
        for record in reader.records() {
            let record = record?;
            if record.len() != header.len() {
                return Err(malformed(format!("row width {} != header", record.len())));
            }
            let parse = |k: usize| {
                record
                    .get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| malformed(format!("bad numeric field in row {record:?}")))
            };
            lateral_mm.push(parse(0)?);
            for k in 1..header.len() - 1 {
                rows.push(parse(k)?);
            }
            y.push(parse(header.len() - 1)?);
        }
        let x = DMatrix::from_row_slice(lateral_mm.len(), depth_mm.len(), &rows);
        RegressionDataset::from_parts(x, DVector::from_vec(y), lateral_mm, depth_mm)
    }
}

/// Pairs grid columns with profile values over the shared lateral range:
/// the profile is linearly interpolated onto the grid's lateral coordinates.
pub fn build_design_matrix(
    grid: &VmGrid,
    profile: &HalfProfile,
) -> Result<RegressionDataset, StatsError> {
    if profile.distance_mm.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 3, actual: 0 });
    }
    let grid_lateral = grid.lateral_mm();
    let lo = grid_lateral[0].max(profile.distance_mm[0]);
    let hi = grid_lateral[grid_lateral.len() - 1]
        .min(profile.distance_mm[profile.distance_mm.len() - 1]);
    let overlap = hi - lo;
    if !(overlap >= MIN_LATERAL_OVERLAP_MM) {
        return Err(StatsError::InsufficientOverlap {
            overlap_mm: overlap.max(0.0),
        });
    }
    let pad = 1e-9;
    let mut lateral_mm = Vec::new();
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for (i, &l) in grid_lateral.iter().enumerate() {
        if l < lo - pad || l > hi + pad {
            continue;
        }
        let query = l.clamp(
            profile.distance_mm[0],
            profile.distance_mm[profile.distance_mm.len() - 1],
        );
        let value = profile
            .interp_at(query)
            .expect("clamped query lies inside the profile range");
        lateral_mm.push(l);
        y.push(value);
        rows.extend_from_slice(grid.depth_column(i));
    }
    if lateral_mm.len() < 3 {
        return Err(StatsError::TooFewSamples {
            needed: 3,
            actual: lateral_mm.len(),
        });
    }
    let x = DMatrix::from_row_slice(lateral_mm.len(), grid.n_depth(), &rows);
    RegressionDataset::from_parts(x, DVector::from_vec(y), lateral_mm, grid.depth_mm().to_vec())
}
