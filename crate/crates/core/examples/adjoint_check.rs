//! Checks the Fréchet derivative and its adjoint: the dot-product identity
//! for each inner product, and the second-order Taylor remainder.
//!
//! Usage: `cargo run --example adjoint_check -- [vertices]`

use std::f64::consts::PI;

use aet_core::fem::DomainSpace;
use aet_core::sensitivity::{adjoint_apply, derivative_apply};
use aet_core::{BoundaryArc, ForwardModel, InnerProductSpec, MeasurementSet, NodalField};

fn main() -> aet_core::Result<()> {
    let vertices = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let mesh = aet_core::mesh::generate_disk_mesh(vertices)?;
    let ms = MeasurementSet::trig(BoundaryArc::new(1.5 * PI)?, &[1, 2, 3])?;
    let model = ForwardModel::new(&mesh, ms, 0.1)?;
    let sigma = NodalField::from_fn(&mesh, |[x, y]| 1.5 + 0.3 * x * y);
    let state = model.solve(&sigma)?;

    let h = NodalField::from_fn(&mesh, |[x, y]| (2.0 * x).sin() * (1.0 + y));
    let w: Vec<NodalField> = (0..3)
        .map(|j| NodalField::from_fn(&mesh, |[x, y]| (x + j as f64 * y).cos()))
        .collect();
    let fh = derivative_apply(&state, &h)?;
    let lhs = model.data_inner(&fh, &w);
    for spec in [InnerProductSpec::l2(), InnerProductSpec::h2(), InnerProductSpec::default_h2_beta()] {
        let space = DomainSpace::new(&mesh, spec)?;
        let adj = adjoint_apply(&state, &w, &space)?;
        let rhs = space.inner(h.values(), adj.values());
        let rel = (lhs - rhs).abs() / (model.data_norm(&fh) * model.data_norm(&w));
        println!("{:?}: <F'h, w> = {lhs:.6e}, <h, F'*w> = {rhs:.6e}, relative gap {rel:.2e}", spec.mode());
    }

    let base = state.power_densities().to_vec();
    let mut prev: Option<f64> = None;
    println!("eps,remainder,slope");
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let moved = model.solve(&sigma.axpy(eps, &h))?;
        let rem: Vec<NodalField> = moved
            .power_densities()
            .iter()
            .zip(&base)
            .zip(&fh)
            .map(|((e, e0), d)| e.sub(e0).axpy(-eps, d))
            .collect();
        let r = model.data_norm(&rem);
        let slope = prev.map_or(f64::NAN, |p| (p / r).log10());
        println!("{eps:.0e},{r:.3e},{slope:.3}");
        prev = Some(r);
    }
    Ok(())
}
