//! Builds ring meshes of the unit disk at several resolutions and reports
//! their quality.
//!
//! Usage: `cargo run --example mesh_generation -- [out.txt]`

use std::f64::consts::PI;

use aet_core::io::write_mesh;
use aet_core::mesh::generate_disk_mesh;

fn main() -> aet_core::Result<()> {
    println!("target,vertices,triangles,boundary_edges,min_angle_deg,area_error,euler");
    for target in [40, 500, 2000, 8000] {
        let mesh = generate_disk_mesh(target)?;
        println!(
            "{target},{},{},{},{:.2},{:.2e},{}",
            mesh.num_vertices(),
            mesh.num_triangles(),
            mesh.boundary_edges().len(),
            mesh.min_angle_deg(),
            (mesh.area() - PI).abs() / PI,
            mesh.euler_characteristic()
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        write_mesh(path.as_ref(), &generate_disk_mesh(2000)?)?;
    }
    Ok(())
}
