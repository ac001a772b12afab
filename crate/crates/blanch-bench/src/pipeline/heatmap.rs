use super::PipelineError;
use crate::fem::VmGrid;
use crate::imaging::{ColorChangeMap, RgbFrame};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Identifier of the fixed palette written to sidecars.
pub const COLORMAP_NAME: &str = "blue-cyan-yellow";

/// Scale metadata written next to each heatmap as `<image>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSidecar {
    pub min: f64,
    pub max: f64,
    pub colormap: String,
    pub width: usize,
    pub height: usize,
}

/// Piecewise-linear palette: deep blue through cyan to yellow, so larger
/// values read as brighter and warmer.
fn palette(t: f64) -> [u8; 3] {
    const ANCHORS: [[f64; 3]; 3] = [[0.0, 0.0, 96.0], [0.0, 180.0, 255.0], [255.0, 235.0, 59.0]];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, s) = if t <= 1.0 {
        (ANCHORS[0], ANCHORS[1], t)
    } else {
        (ANCHORS[1], ANCHORS[2], t - 1.0)
    };
    let mut rgb = [0u8; 3];
    for (k, channel) in rgb.iter_mut().enumerate() {
        *channel = (a[k] + (b[k] - a[k]) * s).round().clamp(0.0, 255.0) as u8;
    }
    rgb
}

fn render(
    values: &[f64],
    width: usize,
    height: usize,
    scale: Option<(f64, f64)>,
    path: &Path,
) -> Result<HeatmapSidecar, PipelineError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PipelineError::InvalidConfig(
            "heatmap values must be finite".into(),
        ));
    }
    let (min, max) = match scale {
        Some((min, max)) => {
            if !(max > min) {
                return Err(PipelineError::InvalidConfig(format!(
                    "color scale needs max > min, got ({min}, {max})"
                )));
            }
            (min, max)
        }
        None => {
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // Constant fields render uniformly at the palette bottom.
            if hi > lo {
                (lo, hi)
            } else {
                (lo, lo + 1.0)
            }
        }
    };
    let span = max - min;
    let mut data = Vec::with_capacity(width * height * 3);
    for &v in values {
        data.extend_from_slice(&palette((v - min) / span));
    }
    RgbFrame::new(width, height, 3, data)
        .map_err(PipelineError::Imaging)?
        .write_png(path)
        .map_err(PipelineError::Imaging)?;
    let sidecar = HeatmapSidecar {
        min,
        max,
        colormap: COLORMAP_NAME.to_string(),
        width,
        height,
    };
    let json_path = path.with_extension("json");
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    std::fs::write(json_path, text)?;
    Ok(sidecar)
}

/// Renders a stress grid, lateral across and depth downward. `scale` of
/// `None` stretches the data range.
pub fn render_heatmap_grid(
    grid: &VmGrid,
    scale: Option<(f64, f64)>,
    path: &Path,
) -> Result<HeatmapSidecar, PipelineError> {
    // Grid storage is depth-fastest; image rows are depth slices.
    let (w, h) = (grid.n_lateral(), grid.n_depth());
    let mut values = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            values.push(grid.value(i, j));
        }
    }
    render(&values, w, h, scale, path)
}

/// Renders a color-change map in image orientation.
pub fn render_heatmap_map(
    map: &ColorChangeMap,
    scale: Option<(f64, f64)>,
    path: &Path,
) -> Result<HeatmapSidecar, PipelineError> {
    render(
        map.values.data(),
        map.values.width(),
        map.values.height(),
        scale,
        path,
    )
}
