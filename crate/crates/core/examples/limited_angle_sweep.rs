//! Reconstructs the phantom from noisy fine-mesh data for each limited
//! angle and prints how the final error grows as the accessible arc shrinks.
//!
//! Usage: `cargo run --example limited_angle_sweep -- [vertices] [noise] [max_iter] [l2|h2|h2beta]`

use std::time::Instant;

use aet_core::fem::{InnerProductMode, InnerProductSpec};
use aet_core::forward::{simulate_on_fine_mesh, ForwardModel, MeasurementSet};
use aet_core::illposed::paper_angles;
use aet_core::inversion::{add_noise, run_landweber, ReconstructionConfig};
use aet_core::mesh::{generate_disk_mesh, BoundaryArc};
use aet_core::phantom::default_phantom;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args()
        .nth(i)
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

fn main() -> aet_core::Result<()> {
    let vertices: usize = arg(1, 2000);
    let noise: f64 = arg(2, 0.05);
    let max_iter: usize = arg(3, 300);
    let mode: InnerProductMode = arg(4, InnerProductMode::H2Beta);

    let mesh = generate_disk_mesh(vertices)?;
    let fine = generate_disk_mesh(40_000)?;
    let phantom = default_phantom();
    let truth = phantom.on_mesh(&mesh);
    let config = ReconstructionConfig {
        delta_rel: noise,
        max_iter,
        spec: InnerProductSpec::from_mode(mode, InnerProductSpec::default_h2_beta().weights())?,
        ..Default::default()
    };
    println!("alpha,iterations,stop,residual,delta,initial_error,final_error,seconds");
    for alpha in paper_angles() {
        let start = Instant::now();
        let ms = MeasurementSet::trig(BoundaryArc::new(alpha)?, &[1, 2, 3])?;
        let data = simulate_on_fine_mesh(&fine, &phantom.on_mesh(&fine), &ms, config.sigma_floor, &mesh)?;
        let model = ForwardModel::new(&mesh, ms, config.sigma_floor)?;
        let (noisy, delta) = add_noise(&data, model.mass(), config.delta_rel, config.rng_seed)?;
        let rec = run_landweber(&config, &model, &noisy, delta, Some(&truth))?;
        let log = &rec.log;
        println!(
            "{alpha:.4},{},{},{:.4e},{:.4e},{:.4},{:.4},{:.1}",
            log.final_index(),
            log.stop,
            log.final_residual(),
            delta,
            log.initial_rel_error().unwrap_or(f64::NAN),
            log.final_rel_error().unwrap_or(f64::NAN),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
