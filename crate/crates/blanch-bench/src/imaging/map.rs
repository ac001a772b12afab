use super::{FrameStack, GrayImage, ImagingError, RgbFrame};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Extracts the green plane unchanged (as exact integer values).
pub fn extract_green_channel(frame: &RgbFrame) -> Result<GrayImage, ImagingError> {
    if frame.channels() != 3 {
        return Err(ImagingError::WrongChannelCount {
            got: frame.channels(),
        });
    }
    let mut data = Vec::with_capacity(frame.width() * frame.height());
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            data.push(frame.get(x, y, 1) as f64);
        }
    }
    GrayImage::new(frame.width(), frame.height(), data)
}

/// Pixelwise mean of the green channel over the half-open frame window.
pub fn phase_mean(stack: &FrameStack, window: [usize; 2]) -> Result<GrayImage, ImagingError> {
    let [start, end] = window;
    if start >= end || end > stack.frame_count() {
        return Err(ImagingError::WindowOutOfRange {
            start,
            end,
            frames: stack.frame_count(),
        });
    }
    let first = &stack.frames[0];
    let mut acc = GrayImage::zeros(first.width(), first.height())?;
    for frame in &stack.frames[start..end] {
        let green = extract_green_channel(frame)?;
        for (a, g) in acc.data_mut().iter_mut().zip(green.data()) {
            *a += g;
        }
    }
    let count = (end - start) as f64;
    for a in acc.data_mut() {
        *a /= count;
    }
    Ok(acc)
}

/// Signed per-pixel color change (contact minus non-contact green mean)
/// with the physical scale needed to extract radial profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorChangeMap {
    pub values: GrayImage,
    pub mm_per_pixel: f64,
    pub center_px: [f64; 2],
}

/// Subtracts the phase means into a change map. Blanching (skin getting
/// lighter under load) shows up as positive values.
pub fn color_change_map(
    contact_mean: &GrayImage,
    noncontact_mean: &GrayImage,
    mm_per_pixel: f64,
    center_px: [f64; 2],
) -> Result<ColorChangeMap, ImagingError> {
    if contact_mean.width() != noncontact_mean.width()
        || contact_mean.height() != noncontact_mean.height()
    {
        return Err(ImagingError::DimensionMismatch {
            a_width: contact_mean.width(),
            a_height: contact_mean.height(),
            b_width: noncontact_mean.width(),
            b_height: noncontact_mean.height(),
        });
    }
    if !(mm_per_pixel > 0.0 && mm_per_pixel.is_finite()) {
        return Err(ImagingError::InvalidParameter(format!(
            "mm_per_pixel must be positive, got {mm_per_pixel}"
        )));
    }
    let data: Vec<f64> = contact_mean
        .data()
        .iter()
        .zip(noncontact_mean.data())
        .map(|(c, n)| c - n)
        .collect();
    Ok(ColorChangeMap {
        values: GrayImage::new(contact_mean.width(), contact_mean.height(), data)?,
        mm_per_pixel,
        center_px,
    })
}

/// Pixelwise mean of several change maps, e.g. across participants. All
/// maps must share dimensions and scale.
pub fn mean_color_change_maps(maps: &[ColorChangeMap]) -> Result<ColorChangeMap, ImagingError> {
    let first = maps.first().ok_or(ImagingError::EmptyInput)?;
    let (w, h) = (first.values.width(), first.values.height());
    for m in maps {
        if m.values.width() != w || m.values.height() != h {
            return Err(ImagingError::DimensionMismatch {
                a_width: w,
                a_height: h,
                b_width: m.values.width(),
                b_height: m.values.height(),
            });
        }
        if m.mm_per_pixel != first.mm_per_pixel || m.center_px != first.center_px {
            return Err(ImagingError::InvalidParameter(
                "maps disagree on scale or center".into(),
            ));
        }
    }
    let mut data = vec![0.0; w * h];
    for m in maps {
        for (acc, v) in data.iter_mut().zip(m.values.data()) {
            *acc += v;
        }
    }
    let count = maps.len() as f64;
    for v in &mut data {
        *v /= count;
    }
    Ok(ColorChangeMap {
        values: GrayImage::new(w, h, data)?,
        mm_per_pixel: first.mm_per_pixel,
        center_px: first.center_px,
    })
}

/// Sidecar describing the raw f32 grid on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSidecar {
    pub width: usize,
    pub height: usize,
    pub mm_per_pixel: f64,
    pub center_px: [f64; 2],
    pub dtype: String,
}

fn sidecar_path(bin_path: &Path) -> PathBuf {
    bin_path.with_extension("json")
}

impl ColorChangeMap {
    /// Writes the map as little-endian row-major f32 plus a JSON sidecar
    /// (same stem, `.json` extension).
    pub fn write_binary(&self, bin_path: &Path) -> Result<(), ImagingError> {
        let mut bytes = Vec::with_capacity(4 * self.values.data().len());
        for &v in self.values.data() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        std::fs::write(bin_path, bytes)?;
        let sidecar = MapSidecar {
            width: self.values.width(),
            height: self.values.height(),
            mm_per_pixel: self.mm_per_pixel,
            center_px: self.center_px,
            dtype: "f32le".to_string(),
        };
        let path = sidecar_path(bin_path);
        let text = serde_json::to_string_pretty(&sidecar).map_err(|e| {
            ImagingError::MalformedFile {
                path: path.display().to_string(),
                message: e.to_string(),
            }
        })?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_binary(bin_path: &Path) -> Result<Self, ImagingError> {
        let sidecar_file = sidecar_path(bin_path);
        let malformed = |path: &Path, message: String| ImagingError::MalformedFile {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(&sidecar_file)?;
        let sidecar: MapSidecar =
            serde_json::from_str(&text).map_err(|e| malformed(&sidecar_file, e.to_string()))?;
        if sidecar.dtype != "f32le" {
            return Err(malformed(
                &sidecar_file,
                format!("unsupported dtype {}", sidecar.dtype),
            ));
        }
        let bytes = std::fs::read(bin_path)?;
        if bytes.len() != 4 * sidecar.width * sidecar.height {
            return Err(malformed(
                bin_path,
                format!(
                    "expected {} bytes for {}x{} f32, got {}",
                    4 * sidecar.width * sidecar.height,
                    sidecar.width,
                    sidecar.height,
                    bytes.len()
                ),
            ));
        }
        let data: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        Ok(ColorChangeMap {
            values: GrayImage::new(sidecar.width, sidecar.height, data)?,
            mm_per_pixel: sidecar.mm_per_pixel,
            center_px: sidecar.center_px,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{FrameStack, StackManifest};
    use super::*;

    fn gradient_frame(width: usize, height: usize, green_offset: u8) -> RgbFrame {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.push(10);
                data.push((x + y) as u8 + green_offset);
                data.push(20);
            }
        }
        RgbFrame::new(width, height, 3, data).unwrap()
    }

    #[test]
    fn green_channel_is_copied_unchanged() {
        let frame = gradient_frame(5, 4, 3);
        let green = extract_green_channel(&frame).unwrap();
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(green.get(x, y), frame.get(x, y, 1) as f64);
            }
        }
    }

    #[test]
    fn non_rgb_input_is_rejected() {
        let rgba = RgbFrame::new(2, 2, 4, vec![0; 16]).unwrap();
        assert!(matches!(
            extract_green_channel(&rgba),
            Err(ImagingError::WrongChannelCount { got: 4 })
        ));
    }

    #[test]
    fn phase_mean_averages_the_window() {
        let frames = vec![
            gradient_frame(4, 3, 0),
            gradient_frame(4, 3, 10),
            gradient_frame(4, 3, 200),
        ];
        let stack = FrameStack::new(
            frames,
            StackManifest {
                fps: 60.0,
                mm_per_pixel: 0.1,
                center_px: [1.5, 1.0],
                noncontact_window: [0, 2],
                contact_window: [2, 3],
            },
        )
        .unwrap();
        let mean = phase_mean(&stack, [0, 2]).unwrap();
        // Mean of offsets 0 and 10 is 5 on top of the gradient.
        assert_eq!(mean.get(0, 0), 5.0);
        assert_eq!(mean.get(3, 2), (3 + 2) as f64 + 5.0);
        assert!(matches!(
            phase_mean(&stack, [2, 9]),
            Err(ImagingError::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn change_map_subtracts_phases() {
        let contact = GrayImage::new(2, 2, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        let noncontact = GrayImage::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let map = color_change_map(&contact, &noncontact, 0.05, [1.0, 1.0]).unwrap();
        assert_eq!(map.values.data(), &[9.0, 18.0, 27.0, 36.0]);

        let small = GrayImage::new(1, 2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            color_change_map(&contact, &small, 0.05, [1.0, 1.0]),
            Err(ImagingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn binary_round_trip_preserves_f32_values() {
        let data: Vec<f64> = (0..12).map(|i| i as f64 * 0.37 - 2.0).collect();
        let map = ColorChangeMap {
            values: GrayImage::new(4, 3, data.clone()).unwrap(),
            mm_per_pixel: 0.05,
            center_px: [2.0, 1.5],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.f32");
        map.write_binary(&path).unwrap();
        assert!(dir.path().join("map.json").exists());
        assert_eq!(
            std::fs::metadata(&path).unwrap().len(),
            4 * 12
        );

        let back = ColorChangeMap::read_binary(&path).unwrap();
        assert_eq!(back.mm_per_pixel, 0.05);
        assert_eq!(back.center_px, [2.0, 1.5]);
        for (orig, round) in data.iter().zip(back.values.data()) {
            assert_eq!(*orig as f32 as f64, *round);
        }
    }

    #[test]
    fn mean_maps_averages_and_validates() {
        let mk = |offset: f64| ColorChangeMap {
            values: GrayImage::new(2, 1, vec![offset, offset + 1.0]).unwrap(),
            mm_per_pixel: 0.1,
            center_px: [0.5, 0.0],
        };
        let mean = mean_color_change_maps(&[mk(0.0), mk(10.0)]).unwrap();
        assert_eq!(mean.values.data(), &[5.0, 6.0]);
        assert!(matches!(
            mean_color_change_maps(&[]),
            Err(ImagingError::EmptyInput)
        ));
    }
}
