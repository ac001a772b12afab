//! Renders the fixed blue-cyan-yellow palette over an analytic field, both
//! auto-scaled and with an explicit color scale, and prints the sidecars.
//!
//! Run with `cargo run --example render_heatmap`.

use blanch_bench::fem::VmGrid;
use blanch_bench::pipeline::{render_heatmap_grid, COLORMAP_NAME};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Ripple field with a strong peak under the origin.
    let lateral: Vec<f64> = (0..141).map(|i| i as f64 * 0.05).collect();
    let depth: Vec<f64> = (0..41).map(|j| j as f64 * 0.05).collect();
    let mut values = Vec::with_capacity(lateral.len() * depth.len());
    for &x in &lateral {
        for &z in &depth {
            let r = (x * x + z * z).sqrt();
            values.push(30e3 * (-r / 1.2).exp() * (1.0 + 0.25 * (6.0 * r).cos()));
        }
    }
    let grid = VmGrid::new(lateral, depth, values)?;

    let out = PathBuf::from("target/example-output/render_heatmap");
    std::fs::create_dir_all(&out)?;

    let auto = render_heatmap_grid(&grid, None, &out.join("auto_scale.png"))?;
    println!(
        "auto scale: [{:.0}, {:.0}] Pa, {}x{}, colormap {COLORMAP_NAME}",
        auto.min, auto.max, auto.width, auto.height
    );

    // Clipping scale: everything above 20 kPa saturates to yellow.
    let clipped = render_heatmap_grid(&grid, Some((0.0, 20e3)), &out.join("clipped_scale.png"))?;
    println!("fixed scale: [{:.0}, {:.0}] Pa (values above max clip)", clipped.min, clipped.max);

    for name in ["auto_scale", "clipped_scale"] {
        println!("wrote {}", out.join(format!("{name}.png")).display());
        println!("      {}", out.join(format!("{name}.json")).display());
    }
    Ok(())
}
