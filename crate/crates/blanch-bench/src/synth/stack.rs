use super::SynthError;
use crate::imaging::{ColorChangeMap, FrameStack, RgbFrame, StackManifest};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Camera parameters for synthesized stacks. Windows default to the
/// 100-frame phases the analysis averages over.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthImagingSpec {
    pub fps: f64,
    pub noncontact_frames: usize,
    pub contact_frames: usize,
}

impl Default for SynthImagingSpec {
    fn default() -> Self {
        SynthImagingSpec {
            fps: 30.0,
            noncontact_frames: 100,
            contact_frames: 100,
        }
    }
}

/// Renders a planted change map as an 8-bit RGB frame sequence: noncontact
/// frames carry `baseline` plus noise in the green channel, contact frames
/// add the map on top, and red/blue stay constant.
///
/// The green excursion must keep 3-sigma headroom inside [0, 255]; beyond
/// that, rare noise tails are clamped.
pub fn synth_frame_stack(
    profile_2d: &ColorChangeMap,
    baseline: f64,
    imaging: &SynthImagingSpec,
    frame_noise: f64,
    seed: u64,
) -> Result<FrameStack, SynthError> {
    if !(baseline.is_finite() && (0.0..=255.0).contains(&baseline)) {
        return Err(SynthError::InvalidParameter(format!(
            "baseline must lie in [0, 255], got {baseline}"
        )));
    }
    if !(frame_noise.is_finite() && frame_noise >= 0.0) {
        return Err(SynthError::InvalidParameter(format!(
            "frame noise must be nonnegative, got {frame_noise}"
        )));
    }
    if imaging.noncontact_frames == 0 || imaging.contact_frames == 0 {
        return Err(SynthError::InvalidParameter(
            "both phases need at least one frame".into(),
        ));
    }
    if !(imaging.fps.is_finite() && imaging.fps > 0.0) {
        return Err(SynthError::InvalidParameter(format!(
            "fps must be positive, got {}",
            imaging.fps
        )));
    }
    let (min_signal, max_signal) = profile_2d
        .values
        .data()
        .iter()
        .fold((0.0_f64, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let low = baseline + min_signal - 3.0 * frame_noise;
    let high = baseline + max_signal + 3.0 * frame_noise;
    if low < 0.0 || high > 255.0 {
        return Err(SynthError::DynamicRangeOverflow { low, high });
    }

    let width = profile_2d.values.width();
    let height = profile_2d.values.height();
    let red_blue = baseline.round().clamp(0.0, 255.0) as u8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, frame_noise.max(f64::MIN_POSITIVE)).expect("validated sigma");
    let sample_noise = |rng: &mut ChaCha8Rng| {
        if frame_noise > 0.0 {
            normal.sample(rng)
        } else {
            0.0
        }
    };

    let total = imaging.noncontact_frames + imaging.contact_frames;
    let mut frames = Vec::with_capacity(total);
    for index in 0..total {
        let in_contact = index >= imaging.noncontact_frames;
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                let signal = if in_contact {
                    profile_2d.values.get(x, y)
                } else {
                    0.0
                };
                let green = (baseline + signal + sample_noise(&mut rng))
                    .round()
                    .clamp(0.0, 255.0) as u8;
                data.extend_from_slice(&[red_blue, green, red_blue]);
            }
        }
        frames.push(RgbFrame::new(width, height, 3, data)?);
    }

    let manifest = StackManifest {
        fps: imaging.fps,
        mm_per_pixel: profile_2d.mm_per_pixel,
        center_px: profile_2d.center_px,
        noncontact_window: [0, imaging.noncontact_frames],
        contact_window: [imaging.noncontact_frames, total],
    };
    Ok(FrameStack::new(frames, manifest)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{color_change_map, phase_mean, GrayImage};

    fn planted_map(width: usize, height: usize) -> ColorChangeMap {
        let cx = (width - 1) as f64 / 2.0;
        let cy = (height - 1) as f64 / 2.0;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                data.push(20.0 * (-r2 / 120.0).exp());
            }
        }
        ColorChangeMap {
            values: GrayImage::new(width, height, data).unwrap(),
            mm_per_pixel: 0.1,
            center_px: [cx, cy],
        }
    }

    fn recovered(stack: &FrameStack) -> ColorChangeMap {
        let nc = phase_mean(stack, stack.manifest.noncontact_window).unwrap();
        let c = phase_mean(stack, stack.manifest.contact_window).unwrap();
        color_change_map(&c, &nc, stack.manifest.mm_per_pixel, stack.manifest.center_px).unwrap()
    }

    #[test]
    fn noiseless_round_trip_is_exact_up_to_quantization() {
        let map = planted_map(41, 31);
        let spec = SynthImagingSpec {
            fps: 30.0,
            noncontact_frames: 3,
            contact_frames: 3,
        };
        let stack = synth_frame_stack(&map, 120.0, &spec, 0.0, 9).unwrap();
        assert_eq!(stack.frame_count(), 6);
        let got = recovered(&stack);
        for (a, b) in got.values.data().iter().zip(map.values.data()) {
            assert!((a - b).abs() <= 0.5 + 1e-12, "{a} vs {b}");
        }
        // Red and blue are flat.
        for frame in &stack.frames {
            assert!(frame.data().chunks(3).all(|px| px[0] == 120 && px[2] == 120));
        }
    }

    #[test]
    fn hundred_frame_windows_average_noise_down() {
        let map = planted_map(33, 33);
        let stack =
            synth_frame_stack(&map, 120.0, &SynthImagingSpec::default(), 4.0, 11).unwrap();
        assert_eq!(stack.frame_count(), 200);
        let got = recovered(&stack);
        let n = got.values.data().len() as f64;
        let rms = (got
            .values
            .data()
            .iter()
            .zip(map.values.data())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        // sigma 4 averaged over 100 frames and differenced: ~0.57 expected,
        // plus quantization; the contract allows 1.0.
        assert!(rms <= 1.0, "rms {rms}");
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let map = planted_map(9, 9);
        let spec = SynthImagingSpec {
            fps: 60.0,
            noncontact_frames: 2,
            contact_frames: 2,
        };
        let a = synth_frame_stack(&map, 100.0, &spec, 2.0, 5).unwrap();
        let b = synth_frame_stack(&map, 100.0, &spec, 2.0, 5).unwrap();
        assert_eq!(a.frames, b.frames);
        let c = synth_frame_stack(&map, 100.0, &spec, 2.0, 6).unwrap();
        assert_ne!(a.frames, c.frames);
    }

    #[test]
    fn dynamic_range_is_enforced() {
        let map = planted_map(9, 9); // max signal 20
        let spec = SynthImagingSpec::default();
        assert!(matches!(
            synth_frame_stack(&map, 250.0, &spec, 0.0, 0),
            Err(SynthError::DynamicRangeOverflow { .. })
        ));
        assert!(matches!(
            synth_frame_stack(&map, 10.0, &spec, 4.0, 0),
            Err(SynthError::DynamicRangeOverflow { .. })
        ));
        assert!(synth_frame_stack(&map, 300.0, &spec, 0.0, 0).is_err());
        assert!(synth_frame_stack(&map, 100.0, &spec, -1.0, 0).is_err());
        let empty = SynthImagingSpec {
            noncontact_frames: 0,
            ..SynthImagingSpec::default()
        };
        assert!(synth_frame_stack(&map, 100.0, &empty, 0.0, 0).is_err());
    }
}
