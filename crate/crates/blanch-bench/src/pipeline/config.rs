use super::PipelineError;
use crate::fem::{
    FingerSectionGeometry, Layer, MaterialParams, MaterialTable, SolveConfig,
    DEFAULT_GRID_SPACING_MM,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// One indenter condition: face width `d` and prescribed travel `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub width_mm: f64,
    pub indent_depth_mm: f64,
}

impl Condition {
    /// Directory-friendly label, e.g. `d5_h2`.
    pub fn label(&self) -> String {
        format!("d{}_h{}", self.width_mm, self.indent_depth_mm)
    }
}

/// The eight-condition protocol matrix in its reporting order: widths
/// descending 5..2 mm, the 2 mm travel block before the 1 mm block.
pub fn standard_conditions() -> Vec<Condition> {
    let mut conditions = Vec::with_capacity(8);
    for indent_depth_mm in [2.0, 1.0] {
        for width_mm in [5.0, 4.0, 3.0, 2.0] {
            conditions.push(Condition {
                width_mm,
                indent_depth_mm,
            });
        }
    }
    conditions
}

/// Indenter properties shared by all conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContactOptions {
    pub friction: f64,
    pub corner_fillet_mm: f64,
}

impl Default for ContactOptions {
    fn default() -> Self {
        ContactOptions {
            friction: crate::fem::IndenterSpec::DEFAULT_FRICTION,
            corner_fillet_mm: crate::fem::IndenterSpec::DEFAULT_CORNER_FILLET_MM,
        }
    }
}

/// Mesh resolution: coarse edge target in the bulk, finer near the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshOptions {
    pub target_edge_mm: f64,
    pub surface_refine_mm: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            target_edge_mm: 0.2,
            surface_refine_mm: 0.1,
        }
    }
}

/// Regular stress sampling window under the indenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridOptions {
    pub lateral_mm: f64,
    pub depth_mm: f64,
    pub spacing_mm: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        let region = crate::fem::GridRegion::default();
        GridOptions {
            lateral_mm: region.lateral_mm,
            depth_mm: region.depth_mm,
            spacing_mm: DEFAULT_GRID_SPACING_MM,
        }
    }
}

impl GridOptions {
    pub fn region(&self) -> crate::fem::GridRegion {
        crate::fem::GridRegion {
            lateral_mm: self.lateral_mm,
            depth_mm: self.depth_mm,
        }
    }
}

/// Radial profile extraction parameters (frames and through-frames modes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileOptions {
    pub length_mm: f64,
    pub angle_step_deg: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            length_mm: crate::imaging::DEFAULT_PROFILE_LENGTH_MM,
            angle_step_deg: crate::imaging::DEFAULT_ANGLE_STEP_DEG,
        }
    }
}

/// Material table override for one layer; values in the units the layer
/// tables are usually quoted in (MPa).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialOverride {
    pub layer: Layer,
    pub elastic_modulus_mpa: f64,
    pub poisson_ratio: f64,
}

/// Ground-truth depth weighting used by the synthetic source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPreset {
    /// Gaussian bump over the papillary capillaries (center 0.1 mm).
    #[default]
    Papillary,
    /// Equal weight at every depth; the negative control.
    Uniform,
}

/// Optional detour through rendered camera frames: the planted profile is
/// spun into a 2D map, rendered as a noisy 8-bit stack, and re-extracted
/// with the imaging pipeline before regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameSynthOptions {
    pub baseline: f64,
    pub frame_noise: f64,
    pub mm_per_pixel: f64,
    pub fps: f64,
    pub window_frames: usize,
    /// Half-width of the rendered square map; must exceed half the profile
    /// length so the re-extraction segments stay inside the image.
    pub map_half_width_mm: f64,
}

impl Default for FrameSynthOptions {
    fn default() -> Self {
        FrameSynthOptions {
            baseline: 120.0,
            frame_noise: 4.0,
            mm_per_pixel: 0.05,
            fps: 30.0,
            window_frames: 100,
            map_half_width_mm: 8.0,
        }
    }
}

/// Synthetic observation source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthOptions {
    pub weights: WeightPreset,
    /// Intensity units per Pa of weighted stress.
    pub gain: f64,
    /// Per-condition noise is set to hit this SNR on the clean profile.
    pub snr_db: f64,
    pub through_frames: Option<FrameSynthOptions>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            weights: WeightPreset::Papillary,
            gain: 3.0e-4,
            snr_db: 20.0,
            through_frames: None,
        }
    }
}

/// Recorded observation source: one frame directory per condition, in
/// condition order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramesOptions {
    pub dirs: Vec<PathBuf>,
}

/// Where each condition's color-change profile comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    Synth(SynthOptions),
    Frames(FramesOptions),
}

impl Default for ProfileSource {
    fn default() -> Self {
        ProfileSource::Synth(SynthOptions::default())
    }
}

/// Regression controls: unit-variance column scaling on by default,
/// component count from leave-one-out cross-validation unless pinned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegressionOptions {
    pub scale: bool,
    pub n_components: Option<usize>,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        RegressionOptions {
            scale: true,
            n_components: None,
        }
    }
}

/// Full run description. Every field has a default, so `{}` is a valid
/// config; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub geometry: FingerSectionGeometry,
    /// Layer-by-layer overrides on top of the standard material table.
    pub materials: Vec<MaterialOverride>,
    pub conditions: Vec<Condition>,
    pub contact: ContactOptions,
    pub solve: SolveConfig,
    pub mesh: MeshOptions,
    pub grid: GridOptions,
    pub profile: ProfileOptions,
    pub source: ProfileSource,
    pub regression: RegressionOptions,
    /// Default output directory; the CLI `--out` flag overrides it.
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            geometry: FingerSectionGeometry::default(),
            materials: Vec::new(),
            conditions: standard_conditions(),
            contact: ContactOptions::default(),
            solve: SolveConfig::default(),
            mesh: MeshOptions::default(),
            grid: GridOptions::default(),
            profile: ProfileOptions::default(),
            source: ProfileSource::default(),
            regression: RegressionOptions::default(),
            output_dir: None,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    pub fn read_json(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)?;
        let config: PipelineConfig = serde_json::from_str(&text)?;
        Ok(config)
    }

    /// Standard layer table with this config's overrides applied.
    pub fn material_table(&self) -> Result<MaterialTable, PipelineError> {
        let mut entries = MaterialTable::standard().entries().to_vec();
        for over in &self.materials {
            let params = MaterialParams::new(over.elastic_modulus_mpa * 1.0e6, over.poisson_ratio)?;
            match entries.iter_mut().find(|(layer, _)| *layer == over.layer) {
                Some(entry) => entry.1 = params,
                None => entries.push((over.layer, params)),
            }
        }
        Ok(MaterialTable::new(entries)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Structural checks that do not need the mesh: nonempty condition
    /// list, per-condition frame directories present, sane option ranges.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.conditions.is_empty() {
            return Err(PipelineError::InvalidConfig(
                "condition list must not be empty".into(),
            ));
        }
        for c in &self.conditions {
            if !(c.width_mm.is_finite() && c.width_mm > 0.0)
                || !(c.indent_depth_mm.is_finite() && c.indent_depth_mm > 0.0)
            {
                return Err(PipelineError::InvalidConfig(format!(
                    "condition ({}, {}) must have positive width and depth",
                    c.width_mm, c.indent_depth_mm
                )));
            }
        }
        if !(self.mesh.target_edge_mm > self.mesh.surface_refine_mm
            && self.mesh.surface_refine_mm > 0.0)
        {
            return Err(PipelineError::InvalidConfig(format!(
                "mesh needs target_edge_mm > surface_refine_mm > 0, got {} and {}",
                self.mesh.target_edge_mm, self.mesh.surface_refine_mm
            )));
        }
        if !(self.grid.lateral_mm > 0.0 && self.grid.depth_mm > 0.0 && self.grid.spacing_mm > 0.0)
        {
            return Err(PipelineError::InvalidConfig(
                "grid extents and spacing must be positive".into(),
            ));
        }
        if let Some(a) = self.regression.n_components {
            if a == 0 {
                return Err(PipelineError::InvalidConfig(
                    "n_components must be at least 1 when pinned".into(),
                ));
            }
        }
        match &self.source {
            ProfileSource::Synth(synth) => {
                if !(synth.gain.is_finite() && synth.gain > 0.0) {
                    return Err(PipelineError::InvalidConfig(format!(
                        "synth gain must be positive, got {}",
                        synth.gain
                    )));
                }
                if let Some(frames) = &synth.through_frames {
                    if frames.map_half_width_mm < 0.5 * self.profile.length_mm {
                        return Err(PipelineError::InvalidConfig(format!(
                            "rendered map half-width {} mm cannot contain the {} mm profile",
                            frames.map_half_width_mm, self.profile.length_mm
                        )));
                    }
                }
            }
            ProfileSource::Frames(frames) => {
                // Missing directories are caught per condition at run time,
                // failing that condition without stopping the others.
                if frames.dirs.len() != self.conditions.len() {
                    return Err(PipelineError::InvalidConfig(format!(
                        "{} frame directories for {} conditions",
                        frames.dirs.len(),
                        self.conditions.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_conditions_follow_protocol_order() {
        let c = standard_conditions();
        assert_eq!(c.len(), 8);
        let as_pairs: Vec<(f64, f64)> = c.iter().map(|c| (c.width_mm, c.indent_depth_mm)).collect();
        assert_eq!(
            as_pairs,
            vec![
                (5.0, 2.0),
                (4.0, 2.0),
                (3.0, 2.0),
                (2.0, 2.0),
                (5.0, 1.0),
                (4.0, 1.0),
                (3.0, 1.0),
                (2.0, 1.0),
            ]
        );
        assert_eq!(c[0].label(), "d5_h2");
        assert_eq!(c[7].label(), "d2_h1");
    }

    #[test]
    fn empty_json_object_is_the_default_config() {
        let config: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config, PipelineConfig::default());
        config.validate().unwrap();
        assert_eq!(config.seed, 42);
        assert!(matches!(config.source, ProfileSource::Synth(_)));
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sed": 1}"#).is_err());
        assert!(
            serde_json::from_str::<PipelineConfig>(r#"{"mesh": {"target_edge_mm": 0.3, "fine": 1}}"#)
                .is_err()
        );
        assert!(serde_json::from_str::<PipelineConfig>(
            r#"{"geometry": {"ridge_pitch": 0.35}}"#
        )
        .is_err());
        assert!(serde_json::from_str::<PipelineConfig>(
            r#"{"source": {"synth": {"weights": "papillary", "snr": 20}}}"#
        )
        .is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut config = PipelineConfig::default();
        config.seed = 7;
        config.regression.n_components = Some(3);
        config.source = ProfileSource::Synth(SynthOptions {
            weights: WeightPreset::Uniform,
            gain: 1e-3,
            snr_db: 14.0,
            through_frames: Some(FrameSynthOptions::default()),
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        config.write_json(&path).unwrap();
        assert_eq!(PipelineConfig::read_json(&path).unwrap(), config);
    }

    #[test]
    fn validation_catches_structural_problems() {
        let mut config = PipelineConfig::default();
        config.conditions.clear();
        assert!(config.validate().is_err());

        let mut config = PipelineConfig::default();
        config.mesh.surface_refine_mm = 0.3; // larger than target edge
        assert!(config.validate().is_err());

        let mut config = PipelineConfig::default();
        config.source = ProfileSource::Frames(FramesOptions {
            dirs: vec![PathBuf::from("/definitely/not/here")],
        });
        // One directory for eight conditions.
        assert!(config.validate().is_err());
        let dirs = vec![PathBuf::from("/definitely/not/here"); 8];
        config.source = ProfileSource::Frames(FramesOptions { dirs });
        // Count matches; existence is a per-condition run-time concern.
        assert!(config.validate().is_ok());

        let mut config = PipelineConfig::default();
        config.regression.n_components = Some(0);
        assert!(config.validate().is_err());

        let mut config = PipelineConfig::default();
        config.source = ProfileSource::Synth(SynthOptions {
            through_frames: Some(FrameSynthOptions {
                map_half_width_mm: 3.0,
                ..FrameSynthOptions::default()
            }),
            ..SynthOptions::default()
        });
        assert!(config.validate().is_err());
    }
}
