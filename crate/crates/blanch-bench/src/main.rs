//! Thin command-line front end: every subcommand parses flags, loads the
//! shared JSON config, and calls straight into the library. The pipeline
//! subcommand is the batch entry point; the others run single stages for
//! debugging.

use anyhow::{bail, Context, Result};
use blanch_bench::fem::{
    build_finger_mesh, contact_pressure_summary, recover_stress_field, resample_vm_grid,
    solve_indentation, IndenterSpec, VmGrid,
};
use blanch_bench::imaging::{
    color_change_map, fold_profile, load_frame_stack, phase_mean, radial_profile, ColorChangeMap,
    HalfProfile,
};
use blanch_bench::pipeline::{
    render_heatmap_grid, render_heatmap_map, run_pipeline, Condition, PipelineConfig,
    ProfileSource, WeightPreset,
};
use blanch_bench::stats::{build_design_matrix, pls_fit, pls_fit_cv, PlsReport};
use blanch_bench::synth::{
    forward_color_profile, noise_sigma_for_snr, papillary_weights, render_radial_map,
    synth_frame_stack, uniform_weights, ForwardModel, SynthImagingSpec,
};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "blanch-bench",
    version,
    about = "Fingertip indentation FEM and blanching-image regression toolkit",
    after_help = "Set BLANCH_BENCH_THREADS to cap pipeline parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON pipeline config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<PipelineConfig> {
        match &self.config {
            Some(path) => PipelineConfig::read_json(path)
                .with_context(|| format!("reading config {}", path.display())),
            None => Ok(PipelineConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the finger-section mesh and write node/element CSVs.
    Mesh {
        #[command(flatten)]
        config: ConfigArg,
        /// Output directory for nodes.csv and elements.csv.
        #[arg(long)]
        out: PathBuf,
        /// Override the bulk target edge length, mm.
        #[arg(long)]
        target_edge: Option<f64>,
        /// Override the near-surface edge length, mm.
        #[arg(long)]
        surface_refine: Option<f64>,
    },
    /// Solve one indentation condition and write stress artifacts.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out: PathBuf,
        /// Indenter width d, mm (default: first configured condition).
        #[arg(long)]
        width: Option<f64>,
        /// Indent depth h, mm (default: first configured condition).
        #[arg(long)]
        depth: Option<f64>,
    },
    /// Reduce a captured frame stack to a change map and radial profile.
    AnalyzeFrames {
        #[command(flatten)]
        config: ConfigArg,
        /// Directory with frame_%06d.png and manifest.json.
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the depth-profile PLS regression from a stress grid and profile.
    Regress {
        #[command(flatten)]
        config: ConfigArg,
        /// Stress grid CSV from `simulate`.
        #[arg(long)]
        grid: PathBuf,
        /// Radial profile CSV from `analyze-frames` or `synth`.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pin the component count instead of cross-validating.
        #[arg(long)]
        components: Option<usize>,
    },
    /// Generate a synthetic color profile (and optional frame stack) from a
    /// stress grid.
    Synth {
        #[command(flatten)]
        config: ConfigArg,
        /// Stress grid CSV from `simulate`.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every configured condition end to end and write report.json.
    Pipeline {
        #[command(flatten)]
        config: ConfigArg,
        /// Output directory (falls back to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a stress grid or change map as a PNG heatmap.
    Render {
        /// Stress grid CSV input.
        #[arg(long, conflicts_with = "map")]
        grid: Option<PathBuf>,
        /// Binary change-map input (with JSON sidecar).
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Color scale minimum (requires --max).
        #[arg(long, requires = "max")]
        min: Option<f64>,
        /// Color scale maximum (requires --min).
        #[arg(long, requires = "min")]
        max: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Mesh {
            config,
            out,
            target_edge,
            surface_refine,
        } => {
            let cfg = config.load()?;
            let target = target_edge.unwrap_or(cfg.mesh.target_edge_mm);
            let refine = surface_refine.unwrap_or(cfg.mesh.surface_refine_mm);
            let mesh = build_finger_mesh(&cfg.geometry, target, refine)?;
            std::fs::create_dir_all(&out)?;
            mesh.write_csv(&out.join("nodes.csv"), &out.join("elements.csv"))?;
            println!(
                "mesh: {} nodes, {} elements -> {}",
                mesh.node_count(),
                mesh.element_count(),
                out.display()
            );
        }
        Command::Simulate {
            config,
            out,
            width,
            depth,
        } => {
            let cfg = config.load()?;
            let first = cfg
                .conditions
                .first()
                .context("config has no conditions")?;
            let condition = Condition {
                width_mm: width.unwrap_or(first.width_mm),
                indent_depth_mm: depth.unwrap_or(first.indent_depth_mm),
            };
            simulate_one(&cfg, &condition, &out)?;
        }
        Command::AnalyzeFrames { config, frames, out } => {
            let cfg = config.load()?;
            let stack = load_frame_stack(&frames)?;
            let noncontact = phase_mean(&stack, stack.manifest.noncontact_window)?;
            let contact = phase_mean(&stack, stack.manifest.contact_window)?;
            let change = color_change_map(
                &contact,
                &noncontact,
                stack.manifest.mm_per_pixel,
                stack.manifest.center_px,
            )?;
            std::fs::create_dir_all(&out)?;
            change.write_binary(&out.join("change_map.bin"))?;
            let profile = fold_profile(&radial_profile(
                &change,
                cfg.profile.length_mm,
                cfg.profile.angle_step_deg,
                None,
            )?)?;
            profile.write_csv(&out.join("profile.csv"))?;
            println!(
                "analyzed {} frames -> {} profile samples in {}",
                stack.frame_count(),
                profile.distance_mm.len(),
                out.display()
            );
        }
        Command::Regress {
            config,
            grid,
            profile,
            out,
            components,
        } => {
            let cfg = config.load()?;
            let grid = VmGrid::read_csv(&grid)?;
            let profile = HalfProfile::read_csv(&profile)?;
            let dataset = build_design_matrix(&grid, &profile)?;
            let model = match components.or(cfg.regression.n_components) {
                Some(a) => pls_fit(&dataset, a, cfg.regression.scale)?,
                None => pls_fit_cv(&dataset, cfg.regression.scale)?,
            };
            let report = PlsReport::from_model(&model, &dataset.depth_mm)?;
            report.write_json(&out)?;
            println!(
                "pls: {} components, r2 {:.4} -> {}",
                report.n_components,
                report.r2,
                out.display()
            );
        }
        Command::Synth {
            config,
            grid,
            out,
            seed,
        } => {
            let cfg = config.load()?;
            synth_one(&cfg, &grid, &out, seed.unwrap_or(cfg.seed))?;
        }
        Command::Pipeline { config, out, seed } => {
            let mut cfg = config.load()?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .context("give --out or set output_dir in the config")?;
            let bundle = run_pipeline(&cfg, &out)?;
            for c in &bundle.conditions {
                match &c.error {
                    None => println!("{}: ok", c.label),
                    Some(e) => println!("{}: FAILED ({e})", c.label),
                }
            }
            println!(
                "report: {} ({} conditions, {} failed)",
                out.join("report.json").display(),
                bundle.conditions.len(),
                bundle.failed_conditions
            );
            if bundle.failed_conditions > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Render {
            grid,
            map,
            out,
            min,
            max,
        } => {
            let scale = min.zip(max);
            let sidecar = match (grid, map) {
                (Some(grid), None) => {
                    render_heatmap_grid(&VmGrid::read_csv(&grid)?, scale, &out)?
                }
                (None, Some(map)) => {
                    render_heatmap_map(&ColorChangeMap::read_binary(&map)?, scale, &out)?
                }
                _ => bail!("give exactly one of --grid or --map"),
            };
            println!(
                "rendered {}x{} [{:.4}, {:.4}] -> {}",
                sidecar.width,
                sidecar.height,
                sidecar.min,
                sidecar.max,
                out.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_one(cfg: &PipelineConfig, condition: &Condition, out: &Path) -> Result<()> {
    let materials = cfg.material_table()?;
    let mesh = build_finger_mesh(&cfg.geometry, cfg.mesh.target_edge_mm, cfg.mesh.surface_refine_mm)?;
    let indenter = IndenterSpec {
        width_mm: condition.width_mm,
        indent_depth_mm: condition.indent_depth_mm,
        friction: cfg.contact.friction,
        corner_fillet_mm: cfg.contact.corner_fillet_mm,
    };
    let solution = solve_indentation(&mesh, &materials, &indenter, &cfg.solve)?;
    std::fs::create_dir_all(out)?;
    solution.log.write_json(&out.join("solve_log.json"))?;
    let stress = recover_stress_field(&mesh, &materials, &solution.displacement)?;
    let grid = resample_vm_grid(&stress, &mesh, cfg.grid.region(), cfg.grid.spacing_mm)?;
    grid.write_csv(&out.join("vm_grid.csv"))?;
    render_heatmap_grid(&grid, None, &out.join("vm_heatmap.png"))?;
    let summary = contact_pressure_summary(&solution, &indenter)?;
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(out.join("pressure.json"), text)?;
    println!(
        "{}: reaction {:.4} N/mm, mean pressure {:.1} Pa, contact width {:.2} mm -> {}",
        condition.label(),
        summary.total_reaction_n_per_mm,
        summary.mean_pressure_pa,
        summary.contact_width_mm,
        out.display()
    );
    Ok(())
}

fn synth_one(cfg: &PipelineConfig, grid_path: &Path, out: &Path, seed: u64) -> Result<()> {
    let ProfileSource::Synth(synth) = &cfg.source else {
        bail!("config source is `frames`; synth needs a `synth` source block");
    };
    let grid = VmGrid::read_csv(grid_path)?;
    let weights = match synth.weights {
        WeightPreset::Papillary => papillary_weights(grid.depth_mm()),
        WeightPreset::Uniform => uniform_weights(grid.n_depth()),
    };
    std::fs::create_dir_all(out)?;
    let clean = forward_color_profile(&grid, &ForwardModel::new(weights.clone(), synth.gain, 0.0, 0)?)?;
    let profile = match &synth.through_frames {
        None => {
            let sigma = noise_sigma_for_snr(&clean.value, synth.snr_db)?;
            forward_color_profile(&grid, &ForwardModel::new(weights, synth.gain, sigma, seed)?)?
        }
        Some(frame_opts) => {
            let half_px = (frame_opts.map_half_width_mm / frame_opts.mm_per_pixel).ceil() as usize;
            let side = 2 * half_px + 1;
            let map = render_radial_map(&clean, side, side, frame_opts.mm_per_pixel)?;
            let stack = synth_frame_stack(
                &map,
                frame_opts.baseline,
                &SynthImagingSpec {
                    fps: frame_opts.fps,
                    noncontact_frames: frame_opts.window_frames,
                    contact_frames: frame_opts.window_frames,
                },
                frame_opts.frame_noise,
                seed,
            )?;
            let frames_dir = out.join("frames");
            blanch_bench::imaging::save_frame_stack(&stack, &frames_dir)?;
            println!("wrote {} frames -> {}", stack.frame_count(), frames_dir.display());
            let noncontact = phase_mean(&stack, stack.manifest.noncontact_window)?;
            let contact = phase_mean(&stack, stack.manifest.contact_window)?;
            let change = color_change_map(
                &contact,
                &noncontact,
                stack.manifest.mm_per_pixel,
                stack.manifest.center_px,
            )?;
            change.write_binary(&out.join("change_map.bin"))?;
            fold_profile(&radial_profile(
                &change,
                cfg.profile.length_mm,
                cfg.profile.angle_step_deg,
                None,
            )?)?
        }
    };
    profile.write_csv(&out.join("profile.csv"))?;
    println!(
        "synth profile: {} samples, peak {:.4} -> {}",
        profile.distance_mm.len(),
        profile.value.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        out.display()
    );
    Ok(())
}
