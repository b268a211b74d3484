//! Singular spectrum of the linearized operator at one angle and a few
//! right singular vectors as VTK fields.
//!
//! Usage: `cargo run --example singular_vectors -- [vertices] [alpha_radians] [out_dir]`

use std::path::PathBuf;

use aet_core::illposed::{assemble_transfer_matrix, Pairing};
use aet_core::io::{singular_values_csv, write_text, write_vtk};
use aet_core::mesh::generate_disk_mesh;
use aet_core::phantom::default_phantom;
use aet_core::{BoundaryArc, ForwardModel, MeasurementSet};

fn main() -> aet_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let vertices = args.next().and_then(|s| s.parse().ok()).unwrap_or(500);
    let alpha = args.next().and_then(|s| s.parse().ok()).unwrap_or(std::f64::consts::PI);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/svd".into()));

    let mesh = generate_disk_mesh(vertices)?;
    let model = ForwardModel::new(&mesh, MeasurementSet::trig(BoundaryArc::new(alpha)?, &[1, 2, 3])?, 0.1)?;
    let t = assemble_transfer_matrix(&model, &default_phantom().on_mesh(&mesh), Pairing::Exact)?;
    let report = t.svd(true)?;
    write_text(&out.join("singular_values.csv"), &singular_values_csv(&report))?;

    let n = report.singular_values.len();
    let picks = [1, n / 10, n / 2, n].map(|k| k.max(1));
    let fields = picks
        .iter()
        .map(|&k| report.right_singular_vector(k))
        .collect::<aet_core::Result<Vec<_>>>()?;
    let names: Vec<String> = picks.iter().map(|k| format!("v_{k}")).collect();
    let named: Vec<_> = names.iter().map(String::as_str).zip(&fields).collect();
    write_vtk(&out.join("singular_vectors.vtk"), &mesh, "right singular vectors", &named)?;

    println!("T is {} x {}, condition number {:.4e}", t.nrows(), t.ncols(), report.condition_number());
    for k in picks {
        println!("s_{k} = {:.4e}", report.singular_values[k - 1]);
    }
    Ok(())
}
