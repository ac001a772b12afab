use super::config::{
    Condition, FrameSynthOptions, PipelineConfig, ProfileOptions, ProfileSource, SynthOptions,
    WeightPreset,
};
use super::heatmap::render_heatmap_grid;
use super::{PipelineError, REPORT_SCHEMA_VERSION};
use crate::fem::{
    build_finger_mesh, contact_pressure_summary, recover_stress_field, resample_vm_grid,
    solve_indentation, IndenterSpec, MaterialTable, Mesh, PressureSummary, VmGrid,
};
use crate::imaging::{
    color_change_map, fold_profile, load_frame_stack, phase_mean, radial_profile, ColorChangeMap,
    FrameStack, HalfProfile,
};
use crate::stats::{
    build_design_matrix, ols_fit, pls_fit, pls_fit_cv, OlsResult, PlsReport,
};
use crate::synth::{
    forward_color_profile, noise_sigma_for_snr, papillary_weights, render_radial_map,
    synth_frame_stack, uniform_weights, ForwardModel, SynthImagingSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

/// Thread-count override; anything unset or unparsable means "let the pool
/// pick". This is the only environment knob the pipeline reads.
pub const THREADS_ENV_VAR: &str = "BLANCH_BENCH_THREADS";

/// Everything one condition contributes to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub label: String,
    pub width_mm: f64,
    pub indent_depth_mm: f64,
    /// `"ok"` or `"failed"`; failures carry `error` and keep the numeric
    /// fields empty.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure: Option<PressureSummary>,
    /// Largest element von Mises stress over the whole section, Pa.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_von_mises_pa: Option<f64>,
    /// Largest value of the observed color-change profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_color_change: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pls: Option<PlsReport>,
    /// Artifact name to path relative to the output directory.
    pub files: BTreeMap<String, String>,
}

/// One row of the condition-versus-pressure table (the pressure-trend
/// analog of the per-participant color plots).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureRow {
    pub width_mm: f64,
    pub indent_depth_mm: f64,
    pub mean_pressure_pa: f64,
    pub peak_pressure_pa: f64,
    pub total_reaction_n_per_mm: f64,
}

/// Across-condition regression of peak color change on mean contact
/// pressure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureColorOls {
    #[serde(flatten)]
    pub fit: OlsResult,
    pub significance: String,
}

/// Deterministic run summary written as `report.json`. Wall-clock timings
/// are deliberately kept out (see `timings.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub generator: String,
    pub seed: u64,
    pub conditions: Vec<ConditionReport>,
    pub pressure_table: Vec<PressureRow>,
    /// Present when at least three conditions succeeded with distinct
    /// pressures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure_color_ols: Option<PressureColorOls>,
    pub failed_conditions: usize,
}

impl ReportBundle {
    pub fn write_json(&self, path: &Path) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self, PipelineError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Serialize)]
struct Timings {
    total_seconds: f64,
    condition_seconds: BTreeMap<String, f64>,
}

/// Splitmix-style stream derivation: decorrelates per-condition seeds while
/// staying reproducible from the single config seed.
fn sub_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Runs every configured condition and writes `report.json`, `timings.json`
/// and per-condition artifacts under `out_dir`.
///
/// Conditions run in parallel (pool size from `BLANCH_BENCH_THREADS`), each
/// seeded as `sub_seed(seed, index)`, so results do not depend on
/// scheduling and one condition's failure cannot disturb another's numbers.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<ReportBundle, PipelineError> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let started = Instant::now();

    let widths: Vec<f64> = config.conditions.iter().map(|c| c.width_mm).collect();
    config.geometry.validate_for_indenter_widths(&widths)?;
    let materials = config.material_table()?;
    let mesh = build_finger_mesh(
        &config.geometry,
        config.mesh.target_edge_mm,
        config.mesh.surface_refine_mm,
    )?;

    let threads = std::env::var(THREADS_ENV_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PipelineError::InvalidConfig(format!("thread pool: {e}")))?;

    let outcomes: Vec<(ConditionReport, f64)> = pool.install(|| {
        config
            .conditions
            .par_iter()
            .enumerate()
            .map(|(index, condition)| {
                let t0 = Instant::now();
                let report = run_condition(config, &mesh, &materials, condition, index, out_dir);
                (report, t0.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut conditions = Vec::with_capacity(outcomes.len());
    let mut condition_seconds = BTreeMap::new();
    for (report, seconds) in outcomes {
        condition_seconds.insert(report.label.clone(), seconds);
        conditions.push(report);
    }
    let failed_conditions = conditions.iter().filter(|c| c.status != "ok").count();

    let pressure_table: Vec<PressureRow> = conditions
        .iter()
        .filter_map(|c| {
            c.pressure.map(|p| PressureRow {
                width_mm: c.width_mm,
                indent_depth_mm: c.indent_depth_mm,
                mean_pressure_pa: p.mean_pressure_pa,
                peak_pressure_pa: p.peak_pressure_pa,
                total_reaction_n_per_mm: p.total_reaction_n_per_mm,
            })
        })
        .collect();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in &conditions {
        if let (Some(p), Some(peak)) = (c.pressure, c.peak_color_change) {
            xs.push(p.mean_pressure_pa);
            ys.push(peak);
        }
    }
    let pressure_color_ols = ols_fit(&xs, &ys).ok().map(|fit| PressureColorOls {
        significance: fit.significance().label().to_string(),
        fit,
    });

    let bundle = ReportBundle {
        schema_version: REPORT_SCHEMA_VERSION,
        generator: format!("blanch-bench {}", env!("CARGO_PKG_VERSION")),
        seed: config.seed,
        conditions,
        pressure_table,
        pressure_color_ols,
        failed_conditions,
    };
    bundle.write_json(&out_dir.join("report.json"))?;

    let timings = Timings {
        total_seconds: started.elapsed().as_secs_f64(),
        condition_seconds,
    };
    let mut text = serde_json::to_string_pretty(&timings)?;
    text.push('\n');
    fs::write(out_dir.join("timings.json"), text)?;

    Ok(bundle)
}

fn run_condition(
    config: &PipelineConfig,
    mesh: &Mesh,
    materials: &MaterialTable,
    condition: &Condition,
    index: usize,
    out_dir: &Path,
) -> ConditionReport {
    let label = condition.label();
    let mut report = ConditionReport {
        label: label.clone(),
        width_mm: condition.width_mm,
        indent_depth_mm: condition.indent_depth_mm,
        status: "failed".into(),
        error: None,
        pressure: None,
        max_von_mises_pa: None,
        peak_color_change: None,
        pls: None,
        files: BTreeMap::new(),
    };
    let dir = out_dir.join(&label);
    if let Err(e) = fs::create_dir_all(&dir) {
        report.error = Some(format!("creating {}: {e}", dir.display()));
        return report;
    }
    let track = |report: &mut ConditionReport, name: &str, file: &str| {
        report.files.insert(name.to_string(), format!("{label}/{file}"));
    };

    let outcome = (|| -> Result<(), PipelineError> {
        let indenter = IndenterSpec {
            width_mm: condition.width_mm,
            indent_depth_mm: condition.indent_depth_mm,
            friction: config.contact.friction,
            corner_fillet_mm: config.contact.corner_fillet_mm,
        };
        let solution = solve_indentation(mesh, materials, &indenter, &config.solve)?;
        solution.log.write_json(&dir.join("solve_log.json"))?;
        track(&mut report, "solve_log", "solve_log.json");

        let stress = recover_stress_field(mesh, materials, &solution.displacement)?;
        let grid = resample_vm_grid(&stress, mesh, config.grid.region(), config.grid.spacing_mm)?;
        grid.write_csv(&dir.join("vm_grid.csv"))?;
        track(&mut report, "vm_grid", "vm_grid.csv");
        render_heatmap_grid(&grid, None, &dir.join("vm_heatmap.png"))?;
        track(&mut report, "vm_heatmap", "vm_heatmap.png");

        report.pressure = Some(contact_pressure_summary(&solution, &indenter)?);
        // Peak of the nodal-averaged field over the analysis region; the raw
        // element maximum sits on the punch-corner singularity and grows
        // without bound under refinement, so it is not a stable summary.
        report.max_von_mises_pa = Some(grid.max_value());

        let profile = match &config.source {
            ProfileSource::Synth(synth) => condition_synth_profile(
                &grid,
                synth,
                &config.profile,
                config.seed,
                index,
                &dir,
                &mut report,
            )?,
            ProfileSource::Frames(frames) => {
                condition_frames_profile(&frames.dirs[index], &config.profile, &dir, &mut report)?
            }
        };
        profile.write_csv(&dir.join("profile.csv"))?;
        track(&mut report, "profile", "profile.csv");
        report.peak_color_change = profile.value.iter().cloned().reduce(f64::max);

        let dataset = build_design_matrix(&grid, &profile)?;
        dataset.write_csv(&dir.join("dataset.csv"))?;
        track(&mut report, "dataset", "dataset.csv");

        let model = match config.regression.n_components {
            Some(a) => pls_fit(&dataset, a, config.regression.scale)?,
            None => pls_fit_cv(&dataset, config.regression.scale)?,
        };
        let pls = PlsReport::from_model(&model, &dataset.depth_mm)?;
        pls.write_json(&dir.join("pls.json"))?;
        track(&mut report, "pls", "pls.json");
        report.pls = Some(pls);
        Ok(())
    })();

    match outcome {
        Ok(()) => report.status = "ok".into(),
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

fn condition_synth_profile(
    grid: &VmGrid,
    synth: &SynthOptions,
    profile_opts: &ProfileOptions,
    seed: u64,
    index: usize,
    dir: &Path,
    report: &mut ConditionReport,
) -> Result<HalfProfile, PipelineError> {
    let weights = match synth.weights {
        WeightPreset::Papillary => papillary_weights(grid.depth_mm()),
        WeightPreset::Uniform => uniform_weights(grid.n_depth()),
    };
    let clean_model = ForwardModel::new(weights.clone(), synth.gain, 0.0, 0)?;
    let clean = forward_color_profile(grid, &clean_model)?;
    match &synth.through_frames {
        None => {
            let sigma = noise_sigma_for_snr(&clean.value, synth.snr_db)?;
            let model = ForwardModel::new(weights, synth.gain, sigma, sub_seed(seed, 2 * index as u64))?;
            Ok(forward_color_profile(grid, &model)?)
        }
        Some(frame_opts) => {
            let map = plant_frames_map(&clean, frame_opts)?;
            let stack = synth_frame_stack(
                &map,
                frame_opts.baseline,
                &SynthImagingSpec {
                    fps: frame_opts.fps,
                    noncontact_frames: frame_opts.window_frames,
                    contact_frames: frame_opts.window_frames,
                },
                frame_opts.frame_noise,
                sub_seed(seed, 2 * index as u64 + 1),
            )?;
            extract_profile(&stack, profile_opts, dir, report)
        }
    }
}

/// Renders the clean profile as a square map with an exact center pixel.
fn plant_frames_map(
    clean: &HalfProfile,
    frame_opts: &FrameSynthOptions,
) -> Result<ColorChangeMap, PipelineError> {
    let half_px = (frame_opts.map_half_width_mm / frame_opts.mm_per_pixel).ceil() as usize;
    let side = 2 * half_px + 1;
    Ok(render_radial_map(clean, side, side, frame_opts.mm_per_pixel)?)
}

fn condition_frames_profile(
    frames_dir: &Path,
    profile_opts: &ProfileOptions,
    dir: &Path,
    report: &mut ConditionReport,
) -> Result<HalfProfile, PipelineError> {
    let stack = load_frame_stack(frames_dir)?;
    extract_profile(&stack, profile_opts, dir, report)
}

/// Shared imaging tail: phase means, change map (persisted), radial
/// profile folded onto nonnegative distances.
fn extract_profile(
    stack: &FrameStack,
    profile_opts: &ProfileOptions,
    dir: &Path,
    report: &mut ConditionReport,
) -> Result<HalfProfile, PipelineError> {
    let noncontact = phase_mean(stack, stack.manifest.noncontact_window)?;
    let contact = phase_mean(stack, stack.manifest.contact_window)?;
    let change = color_change_map(
        &contact,
        &noncontact,
        stack.manifest.mm_per_pixel,
        stack.manifest.center_px,
    )?;
    change.write_binary(&dir.join("change_map.bin"))?;
    report.files.insert(
        "change_map".to_string(),
        format!("{}/change_map.bin", report.label),
    );
    let radial = radial_profile(
        &change,
        profile_opts.length_mm,
        profile_opts.angle_step_deg,
        None,
    )?;
    Ok(fold_profile(&radial)?)
}
