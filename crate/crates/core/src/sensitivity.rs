//! Linearization of the power-density map and its adjoint.
//!
//! Everything here is the exact derivative (and exact adjoint) of the
//! discrete forward map in [`crate::forward`]: the same per-triangle
//! averages, gradients and vertex projection are differentiated and then
//! transposed. The adjoint therefore satisfies
//! `<F'h, w>_data = <h, F'^* w>_G` up to solver round-off.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{
    project_to_vertices, project_to_vertices_transpose, triangle_average,
    triangle_average_transpose, triangle_gradients, DomainSpace,
};
use crate::field::NodalField;
use crate::forward::ForwardState;
use crate::mesh::Mesh;

/// One data-space field per measurement.
pub type ResidualField = Vec<NodalField>;

/// `sum_T c_T |T| grad(phi_v) . g_T` for every vertex `v`, i.e. the action of
/// a coefficient-weighted stiffness matrix on a field with gradients `g`.
fn gradient_load(mesh: &Mesh, weights: &[f64], grads: &[[f64; 2]]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.num_vertices()];
    for ((tri, geo), (w, g)) in mesh
        .triangles()
        .iter()
        .zip(mesh.geometry())
        .zip(weights.iter().zip(grads))
    {
        for k in 0..3 {
            out[tri[k]] += w * (geo.grads[k][0] * g[0] + geo.grads[k][1] * g[1]);
        }
    }
    out
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn check_measurement(state: &ForwardState<'_>, j: usize) -> Result<()> {
    if j >= state.num_measurements() {
        return Err(Error::InvalidArgument(format!(
            "measurement index {j} out of range (M = {})",
            state.num_measurements()
        )));
    }
    Ok(())
}

fn wrap(j: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Measurement {
        index: j,
        source: Box::new(e),
    }
}

/// `u'` solving `int sigma grad u' . grad v = -int h grad u_j . grad v` with zero mean.
pub fn linearized_potential(state: &ForwardState<'_>, j: usize, h: &NodalField) -> Result<NodalField> {
    check_measurement(state, j)?;
    let mesh = state.mesh();
    h.check_mesh(mesh)?;
    let h_t = triangle_average(mesh, h.values());
    linearized_from_triangle_values(state, j, &h_t)
}

fn linearized_from_triangle_values(state: &ForwardState<'_>, j: usize, h_t: &[f64]) -> Result<NodalField> {
    let mesh = state.mesh();
    let weights: Vec<f64> = h_t
        .iter()
        .zip(mesh.geometry())
        .map(|(h, g)| -h * g.area)
        .collect();
    let rhs = gradient_load(mesh, &weights, state.gradients(j));
    state
        .solver()
        .solve(&rhs)
        .map(NodalField::from_vec)
        .map_err(wrap(j))
}

/// `F'(sigma) h = { h |grad u_j|^2 + 2 sigma grad u_j . grad u_j' }_j`.
pub fn derivative_apply(state: &ForwardState<'_>, h: &NodalField) -> Result<ResidualField> {
    let mesh = state.mesh();
    h.check_mesh(mesh)?;
    let h_t = triangle_average(mesh, h.values());
    (0..state.num_measurements())
        .into_par_iter()
        .map(|j| {
            let du = linearized_from_triangle_values(state, j, &h_t)?;
            Ok(derivative_component(state, j, &h_t, &du))
        })
        .collect()
}

/// Linearized potentials `u'_j(h)` for many directions at once, one
/// multi-column solve per measurement. Indexed `[direction][measurement]`.
pub(crate) fn linearized_batch(state: &ForwardState<'_>, hs: &[NodalField]) -> Result<Vec<Vec<NodalField>>> {
    let mesh = state.mesh();
    let n = mesh.num_vertices();
    let h_ts: Vec<Vec<f64>> = hs
        .iter()
        .map(|h| {
            h.check_mesh(mesh)?;
            Ok(triangle_average(mesh, h.values()))
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<NodalField>> = vec![Vec::with_capacity(state.num_measurements()); hs.len()];
    for j in 0..state.num_measurements() {
        let mut rhs = faer::Mat::<f64>::zeros(n, hs.len());
        for (c, h_t) in h_ts.iter().enumerate() {
            let weights: Vec<f64> = h_t
                .iter()
                .zip(mesh.geometry())
                .map(|(h, g)| -h * g.area)
                .collect();
            for (i, v) in gradient_load(mesh, &weights, state.gradients(j)).into_iter().enumerate() {
                rhs[(i, c)] = v;
            }
        }
        state.solver().solve_columns(&mut rhs);
        for (c, col) in out.iter_mut().enumerate() {
            col.push(NodalField::new((0..n).map(|i| rhs[(i, c)]).collect()).map_err(wrap(j))?);
        }
    }
    Ok(out)
}

/// `F'(sigma) h` for many directions at once.
pub(crate) fn derivative_batch(state: &ForwardState<'_>, hs: &[NodalField]) -> Result<Vec<ResidualField>> {
    let mesh = state.mesh();
    let du = linearized_batch(state, hs)?;
    Ok(hs
        .iter()
        .zip(du)
        .map(|(h, du)| {
            let h_t = triangle_average(mesh, h.values());
            du.iter()
                .enumerate()
                .map(|(j, d)| derivative_component(state, j, &h_t, d))
                .collect()
        })
        .collect())
}

fn derivative_component(state: &ForwardState<'_>, j: usize, h_t: &[f64], du: &NodalField) -> NodalField {
    let mesh = state.mesh();
    let g = state.gradients(j);
    let dg = triangle_gradients(mesh, du.values());
    let per_triangle: Vec<f64> = (0..mesh.num_triangles())
        .map(|t| h_t[t] * dot2(g[t], g[t]) + 2.0 * state.sigma_per_triangle()[t] * dot2(g[t], dg[t]))
        .collect();
    NodalField::from_vec(project_to_vertices(mesh, &per_triangle))
}

/// Adjoint state with per-triangle weights: zero-mean `a` solving
/// `K(sigma) a = -sum_T sigma_T omega_T B_T^T grad u_j`.
fn adjoint_state_weighted(state: &ForwardState<'_>, j: usize, omega: &[f64]) -> Result<Vec<f64>> {
    let weights: Vec<f64> = omega
        .iter()
        .zip(state.sigma_per_triangle())
        .map(|(o, s)| -o * s)
        .collect();
    let rhs = gradient_load(state.mesh(), &weights, state.gradients(j));
    state.solver().solve(&rhs).map_err(wrap(j))
}

/// `Aw` solving `int sigma grad(Aw) . grad v = -int sigma w grad u_j . grad v`.
pub fn adjoint_state(state: &ForwardState<'_>, j: usize, w: &NodalField) -> Result<NodalField> {
    check_measurement(state, j)?;
    let mesh = state.mesh();
    w.check_mesh(mesh)?;
    let omega: Vec<f64> = triangle_average(mesh, w.values())
        .iter()
        .zip(mesh.geometry())
        .map(|(w, g)| w * g.area)
        .collect();
    adjoint_state_weighted(state, j, &omega).map(NodalField::from_vec)
}

/// `J^T M w`: the derivative's transpose applied to the data-space
/// functional of `w`, returned as a vector of hat-function coefficients.
pub fn adjoint_functional(state: &ForwardState<'_>, w: &[NodalField]) -> Result<Vec<f64>> {
    if w.len() != state.num_measurements() {
        return Err(Error::LengthMismatch {
            expected: state.num_measurements(),
            actual: w.len(),
        });
    }
    let mesh = state.mesh();
    let mass = state.model().mass();
    let parts: Vec<Vec<f64>> = w
        .par_iter()
        .enumerate()
        .map(|(j, wj)| {
            wj.check_mesh(mesh)?;
            // p_T plays the role of int_T w
            let p = project_to_vertices_transpose(mesh, &mass.matvec(wj.values()));
            let aw = adjoint_state_weighted(state, j, &p)?;
            let aw_grad = triangle_gradients(mesh, &aw);
            let g = state.gradients(j);
            let per_triangle: Vec<f64> = (0..mesh.num_triangles())
                .map(|t| {
                    p[t] * dot2(g[t], g[t]) + 2.0 * mesh.geometry()[t].area * dot2(g[t], aw_grad[t])
                })
                .collect();
            Ok(triangle_average_transpose(mesh, &per_triangle))
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; mesh.num_vertices()];
    for part in parts {
        total.iter_mut().zip(part).for_each(|(t, p)| *t += p);
    }
    Ok(total)
}

/// `F'(sigma)^* w` with respect to the data `L2` pairing and the domain
/// inner product of `space`.
pub fn adjoint_apply(state: &ForwardState<'_>, w: &[NodalField], space: &DomainSpace) -> Result<NodalField> {
    let functional = adjoint_functional(state, w)?;
    Ok(NodalField::from_vec(space.riesz(&functional)))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fem::InnerProductSpec;
    use crate::forward::{ForwardModel, MeasurementSet};
    use crate::mesh::{generate_disk_mesh, BoundaryArc};

    fn smooth_direction(mesh: &Mesh, rng: &mut ChaCha8Rng, amplitude: f64) -> NodalField {
        let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let raw = NodalField::from_fn(mesh, |p| {
            c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * (3.0 * p[0] * p[1]).sin()
                + c[4] * (2.0 * p[0]).cos() * p[1]
                + c[5] * (p[0] * p[0] - p[1] * p[1])
        });
        let max = raw.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        raw.scaled(amplitude / max)
    }

    #[test]
    fn zero_direction_gives_zero() {
        let m = generate_disk_mesh(200).unwrap();
        let model = ForwardModel::new(&m, MeasurementSet::special(&[1, 2]).unwrap(), 0.1).unwrap();
        let state = model.solve(&NodalField::constant(&m, 1.3)).unwrap();
        let zero = NodalField::zeros(&m);
        assert!(linearized_potential(&state, 0, &zero).unwrap().values().iter().all(|&v| v == 0.0));
        for d in derivative_apply(&state, &zero).unwrap() {
            assert!(d.values().iter().all(|&v| v == 0.0));
        }
        assert!(adjoint_state(&state, 1, &zero).unwrap().values().iter().all(|&v| v == 0.0));
        let space = DomainSpace::new(&m, InnerProductSpec::l2()).unwrap();
        let adj = adjoint_apply(&state, &[zero.clone(), zero], &space).unwrap();
        assert!(adj.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_direction_identities() {
        let m = generate_disk_mesh(2000).unwrap();
        let (s, c) = (1.5, 0.4);
        let model = ForwardModel::new(&m, MeasurementSet::special(&[1]).unwrap(), 0.1).unwrap();
        let state = model.solve(&NodalField::constant(&m, s)).unwrap();
        let h = NodalField::constant(&m, c);

        // K(c) = (c/s) K(s) on the discrete level
        let du = linearized_potential(&state, 0, &h).unwrap();
        let expect = state.potentials()[0].scaled(-c / s);
        let rel = model.field_norm(&du.sub(&expect)) / model.field_norm(&expect);
        assert!(rel < 1e-8, "{rel}");

        // d/ds (1/s) * c
        let d = &derivative_apply(&state, &h).unwrap()[0];
        let target = NodalField::constant(&m, -c / (s * s));
        let rel = model.field_norm(&d.sub(&target)) / model.field_norm(&target);
        assert!(rel < 0.02, "{rel}");

        // adjoint with w = c and the L2 inner product
        let space = DomainSpace::new(&m, InnerProductSpec::l2()).unwrap();
        let adj = adjoint_apply(&state, std::slice::from_ref(&h), &space).unwrap();
        let rel = model.field_norm(&adj.sub(&target)) / model.field_norm(&target);
        assert!(rel < 0.05, "{rel}");

        let lin = linearized_potential(&state, 0, &h.scaled(2.0)).unwrap();
        assert!(lin.values().iter().zip(du.values()).all(|(a, b)| (a - 2.0 * b).abs() <= 1e-12 * b.abs().max(1e-12)));
    }

    #[test]
    fn adjoint_state_of_linear_potential() {
        let m = generate_disk_mesh(1000).unwrap();
        let model = ForwardModel::new(&m, MeasurementSet::special(&[1]).unwrap(), 0.1).unwrap();
        let state = model.solve(&NodalField::constant(&m, 1.0)).unwrap();
        let c = 0.7;
        let aw = adjoint_state(&state, 0, &NodalField::constant(&m, c)).unwrap();
        let expect = state.potentials()[0].scaled(-c);
        let rel = model.field_norm(&aw.sub(&expect)) / model.field_norm(&expect);
        assert!(rel < 1e-8, "{rel}");
        let aw2 = adjoint_state(&state, 0, &NodalField::constant(&m, 2.0 * c)).unwrap();
        let rel = model.field_norm(&aw2.sub(&aw.scaled(2.0))) / model.field_norm(&aw2);
        assert!(rel < 1e-14);
    }

    #[test]
    fn discrete_adjoint_identity() {
        let m = generate_disk_mesh(300).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma = NodalField::from_fn(&m, |p| 1.2 + 0.3 * (2.0 * p[0]).sin() * p[1]);
        for alpha in [TAU, PI / 2.0] {
            let ms = MeasurementSet::trig(BoundaryArc::new(alpha).unwrap(), &[1, 2]).unwrap();
            let model = ForwardModel::new(&m, ms, 0.1).unwrap();
            let state = model.solve(&sigma).unwrap();
            for spec in [InnerProductSpec::l2(), InnerProductSpec::h2()] {
                let space = DomainSpace::new(&m, spec).unwrap();
                for _ in 0..5 {
                    let h = NodalField::from_vec((0..m.num_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect());
                    let w: Vec<NodalField> = (0..2)
                        .map(|_| NodalField::from_vec((0..m.num_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect()))
                        .collect();
                    let fh = derivative_apply(&state, &h).unwrap();
                    let lhs = model.data_inner(&fh, &w);
                    let adj = adjoint_apply(&state, &w, &space).unwrap();
                    let rhs = space.inner(h.values(), adj.values());
                    assert!((lhs - rhs).abs() <= 1e-8 * model.data_norm(&fh) * model.data_norm(&w));
                }
            }
        }
    }

    #[test]
    fn taylor_remainder_is_second_order() {
        let m = generate_disk_mesh(400).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = ForwardModel::new(&m, MeasurementSet::special(&[1, 2, 3]).unwrap(), 0.1).unwrap();
        let sigma = NodalField::constant(&m, 1.5);
        let h = smooth_direction(&m, &mut rng, 0.1);
        let state = model.solve(&sigma).unwrap();
        let f0 = state.power_densities().to_vec();
        let dh = derivative_apply(&state, &h).unwrap();
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let rem: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let fe = model.solve(&sigma.axpy(e, &h)).unwrap().into_power_densities();
                let r: Vec<NodalField> = (0..3).map(|j| fe[j].sub(&f0[j]).axpy(-e, &dh[j])).collect();
                model.data_norm(&r)
            })
            .collect();
        for w in rem.windows(2) {
            let slope = (w[0] / w[1]).log10();
            assert!((slope - 2.0).abs() < 0.2, "{rem:?}");
        }
    }
}
