//! Drives the whole batch pipeline from a config built in code: two
//! conditions, synthetic profiles, deterministic report.
//!
//! Run with `cargo run --example run_pipeline`.

use blanch_bench::fem::FingerSectionGeometry;
use blanch_bench::pipeline::{
    run_pipeline, Condition, GridOptions, MeshOptions, PipelineConfig,
};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = PipelineConfig::default();
    // Trimmed domain and mesh so the example runs in seconds; the default
    // config instead covers the full 4 x 2 condition matrix.
    config.geometry = FingerSectionGeometry {
        domain_width_mm: 14.0,
        ridges_enabled: false,
        ..FingerSectionGeometry::default()
    };
    config.mesh = MeshOptions {
        target_edge_mm: 0.5,
        surface_refine_mm: 0.25,
    };
    config.grid = GridOptions {
        lateral_mm: 6.0,
        depth_mm: 2.0,
        spacing_mm: 0.25,
    };
    config.conditions = vec![
        Condition { width_mm: 3.0, indent_depth_mm: 1.0 },
        Condition { width_mm: 2.0, indent_depth_mm: 1.0 },
    ];
    config.seed = 42;

    let out = PathBuf::from("target/example-output/run_pipeline");
    let bundle = run_pipeline(&config, &out)?;

    println!("pipeline seed {}: {} conditions", bundle.seed, bundle.conditions.len());
    for c in &bundle.conditions {
        match (&c.pressure, &c.pls) {
            (Some(p), Some(pls)) => println!(
                "  {}: mean pressure {:.1} kPa, PLS r2 {:.3} with {} components",
                c.label,
                p.mean_pressure_pa / 1e3,
                pls.r2,
                pls.n_components
            ),
            _ => println!("  {}: {}", c.label, c.error.as_deref().unwrap_or("failed")),
        }
    }
    if let Some(ols) = &bundle.pressure_color_ols {
        println!(
            "pressure vs color: slope {:.3e}, p {:.3} ({})",
            ols.fit.slope, ols.fit.p_value, ols.significance
        );
    }
    println!("report: {}", out.join("report.json").display());
    println!("rerun with the same seed and the report bytes will not change.");
    Ok(())
}
