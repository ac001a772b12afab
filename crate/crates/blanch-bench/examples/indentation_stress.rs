//! Presses a 3 mm punch 1 mm into the fingertip section, recovers the von
//! Mises field, and writes the sampled stress grid plus a heatmap.
//!
//! Run with `cargo run --release --example indentation_stress` (a full
//! resolution contact solve takes a little while unoptimized).

use blanch_bench::fem::{
    build_finger_mesh, contact_pressure_summary, recover_stress_field, resample_vm_grid,
    solve_indentation, FingerSectionGeometry, GridRegion, IndenterSpec, MaterialTable,
    SolveConfig, DEFAULT_GRID_SPACING_MM,
};
use blanch_bench::pipeline::render_heatmap_grid;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = FingerSectionGeometry::default();
    let mesh = build_finger_mesh(&geometry, 0.2, 0.1)?;
    let materials = MaterialTable::standard();
    let indenter = IndenterSpec::new(3.0, 1.0);
    println!(
        "solving: {} mm punch, {} mm travel, {} nodes",
        indenter.width_mm,
        indenter.indent_depth_mm,
        mesh.node_count()
    );

    let solution = solve_indentation(&mesh, &materials, &indenter, &SolveConfig::default())?;
    let summary = contact_pressure_summary(&solution, &indenter)?;
    println!(
        "reaction {:.4} N/mm, contact width {:.2} mm ({} nodes)",
        summary.total_reaction_n_per_mm,
        summary.contact_width_mm,
        solution.contact_set.len()
    );
    println!(
        "mean pressure {:.1} kPa, peak pressure {:.1} kPa",
        summary.mean_pressure_pa / 1e3,
        summary.peak_pressure_pa / 1e3
    );

    let stress = recover_stress_field(&mesh, &materials, &solution.displacement)?;
    let max_vm = stress.von_mises.iter().cloned().fold(0.0_f64, f64::max);
    println!("max element von Mises {:.1} kPa", max_vm / 1e3);

    let grid = resample_vm_grid(&stress, &mesh, GridRegion::default(), DEFAULT_GRID_SPACING_MM)?;
    let out = PathBuf::from("target/example-output/indentation_stress");
    std::fs::create_dir_all(&out)?;
    grid.write_csv(&out.join("vm_grid.csv"))?;
    let sidecar = render_heatmap_grid(&grid, None, &out.join("vm_heatmap.png"))?;
    println!(
        "grid {}x{} sampled at {} mm, scale [{:.0}, {:.0}] Pa",
        grid.n_lateral(),
        grid.n_depth(),
        DEFAULT_GRID_SPACING_MM,
        sidecar.min,
        sidecar.max
    );
    println!("wrote {}", out.join("vm_grid.csv").display());
    println!("wrote {}", out.join("vm_heatmap.png").display());
    Ok(())
}
