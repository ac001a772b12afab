use super::SynthError;
use crate::fem::VmGrid;
use crate::imaging::{ColorChangeMap, GrayImage, HalfProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Depth of the papillary capillary loops the preset centers on, mm.
pub const PAPILLARY_CENTER_MM: f64 = 0.1;
/// Spread of the papillary weight bump, mm.
pub const PAPILLARY_SIGMA_MM: f64 = 0.07;

/// Ground-truth mapping from depth-resolved stress to color change:
/// value(x) = gain * sum_d weight(d) * vm(x, d) + Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardModel {
    /// Nonnegative weight per grid depth, dimensionless.
    pub depth_weights: Vec<f64>,
    /// Intensity units per Pa.
    pub gain: f64,
    /// Observation noise, intensity units.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl ForwardModel {
    pub fn new(
        depth_weights: Vec<f64>,
        gain: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Result<Self, SynthError> {
        if depth_weights.is_empty() || depth_weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(SynthError::InvalidParameter(
                "depth weights must be nonnegative and finite".into(),
            ));
        }
        if depth_weights.iter().all(|&w| w == 0.0) {
            return Err(SynthError::InvalidParameter(
                "depth weights must not all be zero".into(),
            ));
        }
        if !(gain.is_finite() && gain > 0.0) {
            return Err(SynthError::InvalidParameter(format!(
                "gain must be positive, got {gain}"
            )));
        }
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(SynthError::InvalidParameter(format!(
                "noise sigma must be nonnegative, got {noise_sigma}"
            )));
        }
        Ok(ForwardModel {
            depth_weights,
            gain,
            noise_sigma,
            seed,
        })
    }
}

/// Gaussian weight bump over the papillary capillaries: peaks at
/// [`PAPILLARY_CENTER_MM`], falls off with [`PAPILLARY_SIGMA_MM`].
pub fn papillary_weights(depth_mm: &[f64]) -> Vec<f64> {
    depth_mm
        .iter()
        .map(|&d| (-0.5 * ((d - PAPILLARY_CENTER_MM) / PAPILLARY_SIGMA_MM).powi(2)).exp())
        .collect()
}

/// Flat control weights: every depth contributes equally.
pub fn uniform_weights(n_depths: usize) -> Vec<f64> {
    vec![1.0; n_depths]
}

/// Noise level hitting a target signal-to-noise ratio:
/// sigma = std(signal) / 10^(snr_db / 20), population standard deviation.
pub fn noise_sigma_for_snr(signal: &[f64], snr_db: f64) -> Result<f64, SynthError> {
    if signal.len() < 2 {
        return Err(SynthError::InvalidParameter(
            "need at least 2 signal samples to set an SNR".into(),
        ));
    }
    if !snr_db.is_finite() {
        return Err(SynthError::InvalidParameter(format!(
            "SNR must be finite, got {snr_db} dB"
        )));
    }
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let var = signal.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / signal.len() as f64;
    let std = var.sqrt();
    if std == 0.0 {
        return Err(SynthError::InvalidParameter(
            "signal is constant; SNR is undefined".into(),
        ));
    }
    Ok(std / 10f64.powf(snr_db / 20.0))
}

/// Evaluates the forward model on a stress grid. The profile lives on the
/// grid's lateral axis; deterministic for a given seed.
pub fn forward_color_profile(
    grid: &VmGrid,
    model: &ForwardModel,
) -> Result<HalfProfile, SynthError> {
    if model.depth_weights.len() != grid.n_depth() {
        return Err(SynthError::WeightLengthMismatch {
            expected: grid.n_depth(),
            actual: model.depth_weights.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let normal = Normal::new(0.0, model.noise_sigma.max(f64::MIN_POSITIVE))
        .expect("validated sigma");
    let mut value = Vec::with_capacity(grid.n_lateral());
    for i in 0..grid.n_lateral() {
        let weighted: f64 = grid
            .depth_column(i)
            .iter()
            .zip(&model.depth_weights)
            .map(|(&vm, &w)| w * vm)
            .sum();
        let noise = if model.noise_sigma > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        };
        value.push(model.gain * weighted + noise);
    }
    Ok(HalfProfile {
        distance_mm: grid.lateral_mm().to_vec(),
        value,
    })
}

/// Spins a half profile into a radially symmetric 2D map: each pixel takes
/// the profile value at its distance from the center, holding the edge
/// value beyond the last sample.
pub fn render_radial_map(
    profile: &HalfProfile,
    width: usize,
    height: usize,
    mm_per_pixel: f64,
) -> Result<ColorChangeMap, SynthError> {
    if profile.distance_mm.is_empty() {
        return Err(SynthError::InvalidParameter("empty profile".into()));
    }
    if !(mm_per_pixel.is_finite() && mm_per_pixel > 0.0) {
        return Err(SynthError::InvalidParameter(format!(
            "mm_per_pixel must be positive, got {mm_per_pixel}"
        )));
    }
    let cx = (width.saturating_sub(1)) as f64 / 2.0;
    let cy = (height.saturating_sub(1)) as f64 / 2.0;
    let last = profile.distance_mm[profile.distance_mm.len() - 1];
    let first = profile.distance_mm[0];
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let r = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt() * mm_per_pixel;
            let v = profile
                .interp_at(r.clamp(first, last))
                .expect("clamped radius lies inside the profile");
            data.push(v);
        }
    }
    Ok(ColorChangeMap {
        values: GrayImage::new(width, height, data)?,
        mm_per_pixel,
        center_px: [cx, cy],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n_lateral: usize, n_depth: usize, f: impl Fn(usize, usize) -> f64) -> VmGrid {
        let lateral: Vec<f64> = (0..n_lateral).map(|i| 0.1 * i as f64).collect();
        let depth: Vec<f64> = (0..n_depth).map(|j| 0.1 * j as f64).collect();
        let mut values = Vec::new();
        for i in 0..n_lateral {
            for j in 0..n_depth {
                values.push(f(i, j));
            }
        }
        VmGrid::new(lateral, depth, values).unwrap()
    }

    #[test]
    fn delta_weights_select_the_shallowest_row() {
        let g = grid(11, 4, |i, j| (10 * i + j) as f64);
        let mut weights = vec![0.0; 4];
        weights[0] = 1.0;
        let model = ForwardModel::new(weights, 2.0, 0.0, 1).unwrap();
        let profile = forward_color_profile(&g, &model).unwrap();
        assert_eq!(profile.distance_mm, g.lateral_mm());
        for (i, &v) in profile.value.iter().enumerate() {
            assert_eq!(v, 2.0 * (10 * i) as f64);
        }
    }

    #[test]
    fn zero_grid_yields_noise_at_the_requested_sigma() {
        let g = grid(71, 3, |_, _| 0.0);
        let model = ForwardModel::new(vec![1.0; 3], 5.0, 2.5, 42).unwrap();
        let profile = forward_color_profile(&g, &model).unwrap();
        let mean = profile.value.iter().sum::<f64>() / profile.value.len() as f64;
        let var = profile.value.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / profile.value.len() as f64;
        let std = var.sqrt();
        assert!(
            (std - 2.5).abs() < 0.15 * 2.5,
            "sample sigma {std} too far from 2.5"
        );
    }

    #[test]
    fn same_seed_reproduces_the_profile() {
        let g = grid(31, 3, |i, j| (i * j) as f64);
        let model = ForwardModel::new(vec![0.5, 1.0, 0.2], 1.0, 3.0, 7).unwrap();
        let a = forward_color_profile(&g, &model).unwrap();
        let b = forward_color_profile(&g, &model).unwrap();
        assert_eq!(a, b);
        let other = ForwardModel { seed: 8, ..model };
        assert_ne!(forward_color_profile(&g, &other).unwrap(), a);
    }

    #[test]
    fn profile_is_linear_in_gain_and_grid(){
        let g1 = grid(21, 3, |i, j| (i + j) as f64);
        let g3 = grid(21, 3, |i, j| 3.0 * (i + j) as f64);
        let model = ForwardModel::new(vec![1.0, 0.5, 0.25], 2.0, 0.0, 0).unwrap();
        let doubled = ForwardModel { gain: 4.0, ..model.clone() };
        let base = forward_color_profile(&g1, &model).unwrap();
        let by_gain = forward_color_profile(&g1, &doubled).unwrap();
        let by_grid = forward_color_profile(&g3, &model).unwrap();
        for i in 0..21 {
            assert_relative_eq!(by_gain.value[i], 2.0 * base.value[i], epsilon = 1e-12);
            assert_relative_eq!(by_grid.value[i], 3.0 * base.value[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn model_validation_catches_bad_inputs() {
        assert!(ForwardModel::new(vec![], 1.0, 0.0, 0).is_err());
        assert!(ForwardModel::new(vec![0.0, 0.0], 1.0, 0.0, 0).is_err());
        assert!(ForwardModel::new(vec![1.0, -0.1], 1.0, 0.0, 0).is_err());
        assert!(ForwardModel::new(vec![1.0], 0.0, 0.0, 0).is_err());
        assert!(ForwardModel::new(vec![1.0], 1.0, -1.0, 0).is_err());
        let g = grid(5, 3, |_, _| 1.0);
        let model = ForwardModel::new(vec![1.0, 1.0], 1.0, 0.0, 0).unwrap();
        assert!(matches!(
            forward_color_profile(&g, &model),
            Err(SynthError::WeightLengthMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn weight_presets_have_documented_shape() {
        let depths: Vec<f64> = (0..21).map(|j| 0.1 * j as f64).collect();
        let w = papillary_weights(&depths);
        let peak = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(depths[peak], PAPILLARY_CENTER_MM);
        assert_eq!(w[peak], 1.0);
        // Negligible weight by 1 mm depth.
        assert!(w[10] < 1e-10);
        assert_eq!(uniform_weights(4), vec![1.0; 4]);
    }

    #[test]
    fn snr_sets_sigma_from_signal_spread() {
        let signal = vec![0.0, 2.0, 0.0, 2.0]; // population std = 1
        assert_relative_eq!(
            noise_sigma_for_snr(&signal, 20.0).unwrap(),
            0.1,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            noise_sigma_for_snr(&signal, 0.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(noise_sigma_for_snr(&[1.0, 1.0], 20.0).is_err());
        assert!(noise_sigma_for_snr(&[1.0], 20.0).is_err());
    }

    #[test]
    fn radial_map_matches_profile_at_known_radii() {
        let profile = HalfProfile {
            distance_mm: vec![0.0, 1.0, 2.0],
            value: vec![10.0, 6.0, 4.0],
        };
        let map = render_radial_map(&profile, 81, 81, 0.1).unwrap();
        assert_eq!(map.center_px, [40.0, 40.0]);
        assert_eq!(map.values.get(40, 40), 10.0);
        // 10 px right of center = 1.0 mm.
        assert_relative_eq!(map.values.get(50, 40), 6.0, epsilon = 1e-12);
        assert_relative_eq!(map.values.get(40, 30), 6.0, epsilon = 1e-12);
        // Corner lies beyond 2 mm; edge value is held.
        assert_eq!(map.values.get(0, 0), 4.0);
        assert!(render_radial_map(&profile, 10, 10, 0.0).is_err());
    }
}
