//! Evaluates the three-inclusion test conductivity on a mesh and writes it
//! as CSV and VTK.
//!
//! Usage: `cargo run --example phantom -- [vertices] [out_dir]`

use std::path::PathBuf;

use aet_core::io::{write_field_csv, write_vtk};
use aet_core::mesh::generate_disk_mesh;
use aet_core::phantom::default_phantom;

fn main() -> aet_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let vertices = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/phantom".into()));

    let spec = default_phantom();
    spec.validate(0.1)?;
    let mesh = generate_disk_mesh(vertices)?;
    let sigma = spec.on_mesh(&mesh);
    write_field_csv(&out.join("phantom.csv"), &mesh, &sigma)?;
    write_vtk(&out.join("phantom.vtk"), &mesh, "phantom", &[("sigma", &sigma)])?;
    println!(
        "{} vertices, sigma in [{:.3}, {:.3}], written to {}",
        mesh.num_vertices(),
        sigma.min(),
        sigma.max(),
        out.display()
    );
    Ok(())
}
