use super::{ImagingError, RgbFrame};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Capture metadata stored next to the frames as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackManifest {
    pub fps: f64,
    pub mm_per_pixel: f64,
    /// Pixel coordinates of the anatomical center the radial profile fans
    /// out from.
    pub center_px: [f64; 2],
    /// Half-open frame index range `[start, end)` of the unloaded phase.
    pub noncontact_window: [usize; 2],
    /// Half-open frame index range of the loaded phase.
    pub contact_window: [usize; 2],
}

/// A sequence of frames plus its manifest, loaded into memory.
#[derive(Debug, Clone)]
pub struct FrameStack {
    pub frames: Vec<RgbFrame>,
    pub manifest: StackManifest,
}

impl FrameStack {
    pub fn new(frames: Vec<RgbFrame>, manifest: StackManifest) -> Result<Self, ImagingError> {
        if frames.is_empty() {
            return Err(ImagingError::InvalidParameter("no frames given".into()));
        }
        let (w, h) = (frames[0].width(), frames[0].height());
        for f in &frames {
            if f.width() != w || f.height() != h {
                return Err(ImagingError::DimensionMismatch {
                    a_width: w,
                    a_height: h,
                    b_width: f.width(),
                    b_height: f.height(),
                });
            }
        }
        for window in [manifest.noncontact_window, manifest.contact_window] {
            let [start, end] = window;
            if start >= end || end > frames.len() {
                return Err(ImagingError::WindowOutOfRange {
                    start,
                    end,
                    frames: frames.len(),
                });
            }
        }
        if !(manifest.fps > 0.0 && manifest.mm_per_pixel > 0.0) {
            return Err(ImagingError::InvalidParameter(
                "fps and mm_per_pixel must be positive".into(),
            ));
        }
        Ok(FrameStack { frames, manifest })
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }
}

fn frame_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

/// Loads `manifest.json` plus the contiguous `frame_000000.png...` series
/// from `dir`.
pub fn load_frame_stack(dir: &Path) -> Result<FrameStack, ImagingError> {
    let manifest_path = dir.join("manifest.json");
    let malformed = |message: String| ImagingError::MalformedFile {
        path: manifest_path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| malformed(e.to_string()))?;
    let manifest: StackManifest =
        serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    let mut frames = Vec::new();
    loop {
        let path = dir.join(frame_name(frames.len()));
        if !path.exists() {
            break;
        }
        frames.push(RgbFrame::read_png(&path)?);
    }
    FrameStack::new(frames, manifest)
}

/// Writes the stack as numbered PNGs plus `manifest.json`.
pub fn save_frame_stack(stack: &FrameStack, dir: &Path) -> Result<(), ImagingError> {
    std::fs::create_dir_all(dir)?;
    for (i, frame) in stack.frames.iter().enumerate() {
        frame.write_png(&dir.join(frame_name(i)))?;
    }
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&stack.manifest).map_err(|e| {
        ImagingError::MalformedFile {
            path: manifest_path.display().to_string(),
            message: e.to_string(),
        }
    })?;
    std::fs::write(manifest_path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_frame(level: u8) -> RgbFrame {
        RgbFrame::new(4, 2, 3, vec![level; 4 * 2 * 3]).unwrap()
    }

    fn manifest(frames: usize) -> StackManifest {
        StackManifest {
            fps: 60.0,
            mm_per_pixel: 0.05,
            center_px: [2.0, 1.0],
            noncontact_window: [0, frames / 2],
            contact_window: [frames / 2, frames],
        }
    }

    #[test]
    fn stack_round_trips_through_directory() {
        let frames: Vec<RgbFrame> = (0..4).map(|i| tiny_frame(i * 10)).collect();
        let stack = FrameStack::new(frames, manifest(4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_frame_stack(&stack, dir.path()).unwrap();

        let names: Vec<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert!(names.contains(&"manifest.json".to_string()));
        assert!(names.contains(&"frame_000000.png".to_string()));
        assert!(names.contains(&"frame_000003.png".to_string()));

        let back = load_frame_stack(dir.path()).unwrap();
        assert_eq!(back.frame_count(), 4);
        assert_eq!(back.manifest, stack.manifest);
        assert_eq!(back.frames[2], stack.frames[2]);
    }

    #[test]
    fn window_beyond_frames_is_rejected() {
        let frames = vec![tiny_frame(0), tiny_frame(1)];
        let mut m = manifest(2);
        m.contact_window = [1, 5];
        assert!(matches!(
            FrameStack::new(frames, m),
            Err(ImagingError::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn empty_window_is_rejected() {
        let frames = vec![tiny_frame(0), tiny_frame(1)];
        let mut m = manifest(2);
        m.noncontact_window = [1, 1];
        assert!(matches!(
            FrameStack::new(frames, m),
            Err(ImagingError::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn mismatched_frame_sizes_are_rejected() {
        let frames = vec![
            tiny_frame(0),
            RgbFrame::new(2, 2, 3, vec![0; 12]).unwrap(),
        ];
        assert!(matches!(
            FrameStack::new(frames, manifest(2)),
            Err(ImagingError::DimensionMismatch { .. })
        ));
    }
}
