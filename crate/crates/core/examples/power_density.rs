//! Forward solves: power densities for constant conductivities against the
//! closed-form value 1/c, and the gradient determinant for sin/cos currents.
//!
//! Usage: `cargo run --example power_density -- [vertices]`

use aet_core::forward::determinant_diagnostic;
use aet_core::{ForwardModel, MeasurementSet, NodalField};

fn main() -> aet_core::Result<()> {
    let vertices = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let mesh = aet_core::mesh::generate_disk_mesh(vertices)?;
    let model = ForwardModel::new(&mesh, MeasurementSet::special(&[1, 2, 3])?, 0.1)?;

    println!("c,j,relative_l2_error");
    for c in [0.5, 1.0, 2.0] {
        let state = model.solve(&NodalField::constant(&mesh, c))?;
        for (j, e) in state.power_densities().iter().enumerate() {
            let exact = NodalField::constant(&mesh, 1.0 / c);
            let err = model.field_norm(&e.sub(&exact)) / model.field_norm(&exact);
            println!("{c},{},{err:.3e}", j + 1);
        }
    }

    let state = model.solve(&NodalField::constant(&mesh, 1.0))?;
    let u = state.potentials();
    let (det, min_abs) = determinant_diagnostic(&mesh, &u[0], &u[1])?;
    let worst = det.iter().fold(0.0f64, |m, d| m.max((d + 1.0).abs()));
    println!("determinant: min |det| = {min_abs:.4}, max |det + 1| = {worst:.4}");
    Ok(())
}
