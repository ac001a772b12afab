//! Builds the layered finger-section mesh at the default resolution and
//! writes the node/element CSVs.
//!
//! Run with `cargo run --example build_mesh`.

use blanch_bench::fem::{build_finger_mesh, FingerSectionGeometry, Layer};
use std::collections::BTreeMap;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = FingerSectionGeometry::default();
    println!(
        "section: {} mm wide, {} mm deep (epidermis {} / dermis {} / subcutaneous {})",
        geometry.domain_width_mm,
        geometry.total_depth_mm(),
        geometry.epidermis_mm,
        geometry.dermis_mm,
        geometry.subcutaneous_mm,
    );
    println!(
        "ridges: pitch {} mm, amplitude {} mm",
        geometry.ridge_pitch_mm, geometry.ridge_amplitude_mm
    );

    let mesh = build_finger_mesh(&geometry, 0.2, 0.1)?;
    println!(
        "mesh: {} nodes, {} elements, {} surface nodes",
        mesh.node_count(),
        mesh.element_count(),
        mesh.surface_nodes().len()
    );

    let mut per_layer: BTreeMap<Layer, usize> = BTreeMap::new();
    for tri in mesh.elements() {
        *per_layer.entry(tri.layer).or_default() += 1;
    }
    for (layer, count) in &per_layer {
        println!("  {:<14} {count} elements", layer.name());
    }

    let out = PathBuf::from("target/example-output/build_mesh");
    std::fs::create_dir_all(&out)?;
    mesh.write_csv(&out.join("nodes.csv"), &out.join("elements.csv"))?;
    println!("wrote {}", out.join("nodes.csv").display());
    println!("wrote {}", out.join("elements.csv").display());
    Ok(())
}
