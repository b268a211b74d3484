//! One Landweber reconstruction from noisy fine-mesh data with the
//! discrepancy-principle stop; writes the result and the iteration log.
//!
//! Usage: `cargo run --example landweber -- [alpha_radians] [noise] [out_dir]`

use std::path::PathBuf;

use aet_core::forward::simulate_on_fine_mesh;
use aet_core::inversion::{add_noise, run_landweber, ReconstructionConfig};
use aet_core::io::{iteration_log_csv, write_text, write_vtk};
use aet_core::mesh::generate_disk_mesh;
use aet_core::phantom::default_phantom;
use aet_core::{BoundaryArc, ForwardModel, MeasurementSet};

fn main() -> aet_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let alpha = args.next().and_then(|s| s.parse().ok()).unwrap_or(std::f64::consts::TAU);
    let noise = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/landweber".into()));

    let config = ReconstructionConfig {
        delta_rel: noise,
        ..Default::default()
    };
    let mesh = generate_disk_mesh(2000)?;
    let fine = generate_disk_mesh(40_000)?;
    let phantom = default_phantom();
    let ms = MeasurementSet::trig(BoundaryArc::new(alpha)?, &[1, 2, 3])?;
    let exact = simulate_on_fine_mesh(&fine, &phantom.on_mesh(&fine), &ms, config.sigma_floor, &mesh)?;
    let model = ForwardModel::new(&mesh, ms, config.sigma_floor)?;
    let (data, delta) = add_noise(&exact, model.mass(), noise, config.rng_seed)?;

    let truth = phantom.on_mesh(&mesh);
    let rec = run_landweber(&config, &model, &data, delta, Some(&truth))?;
    write_text(&out.join("iterations.csv"), &iteration_log_csv(&rec.log))?;
    write_vtk(
        &out.join("reconstruction.vtk"),
        &mesh,
        "landweber",
        &[("sigma", &rec.sigma), ("truth", &truth)],
    )?;
    println!(
        "stop={} after {} iterations, residual {:.4e} (delta {:.4e}), relative error {:.4} -> {:.4}",
        rec.log.stop,
        rec.log.final_index(),
        rec.log.final_residual(),
        delta,
        rec.log.initial_rel_error().unwrap_or(f64::NAN),
        rec.log.final_rel_error().unwrap_or(f64::NAN)
    );
    Ok(())
}
