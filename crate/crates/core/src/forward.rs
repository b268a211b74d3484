//! Boundary current patterns, potentials and power densities `E_j = sigma |grad u_j|^2`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_load, assemble_mass, assemble_weighted_stiffness, check_admissible,
    project_to_vertices, triangle_average, triangle_gradients, NeumannSolver,
};
use crate::field::{dot, NodalField};
use crate::mesh::{BoundaryArc, Mesh, PointLocator};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentFamily {
    /// `sin(2 j pi theta / alpha)` on `[0, alpha]`, zero elsewhere.
    TrigLimited,
    /// `sin`, `cos` and `(sin + cos) / sqrt 2` on the full circle.
    SpecialFull,
}

impl std::str::FromStr for CurrentFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trig" | "trig_limited" => Ok(Self::TrigLimited),
            "special" | "special_full" => Ok(Self::SpecialFull),
            other => Err(Error::InvalidArgument(format!("unknown current family '{other}'"))),
        }
    }
}

impl std::fmt::Display for CurrentFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TrigLimited => "trig",
            Self::SpecialFull => "special",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCurrent {
    family: CurrentFamily,
    index: usize,
    arc: BoundaryArc,
}

impl BoundaryCurrent {
    pub fn trig(index: usize, arc: BoundaryArc) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidArgument("trig current index must be >= 1".into()));
        }
        Ok(Self {
            family: CurrentFamily::TrigLimited,
            index,
            arc,
        })
    }

    pub fn special(index: usize) -> Result<Self> {
        if !(1..=3).contains(&index) {
            return Err(Error::InvalidArgument(format!(
                "special current index must be 1, 2 or 3, got {index}"
            )));
        }
        Ok(Self {
            family: CurrentFamily::SpecialFull,
            index,
            arc: BoundaryArc::full(),
        })
    }

    pub fn family(&self) -> CurrentFamily {
        self.family
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn arc(&self) -> BoundaryArc {
        self.arc
    }

    /// Current density at polar angle `theta` in `[0, 2pi)`.
    pub fn eval(&self, theta: f64) -> f64 {
        match self.family {
            CurrentFamily::TrigLimited => {
                let alpha = self.arc.alpha();
                if self.arc.contains(theta) {
                    (TAU * self.index as f64 * theta / alpha).sin()
                } else {
                    0.0
                }
            }
            CurrentFamily::SpecialFull => match self.index {
                1 => theta.sin(),
                2 => theta.cos(),
                _ => (theta.sin() + theta.cos()) * FRAC_1_SQRT_2,
            },
        }
    }
}

pub fn boundary_current_eval(bc: &BoundaryCurrent, theta: f64) -> f64 {
    bc.eval(theta)
}

/// Ordered list of boundary currents applied in separate experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    currents: Vec<BoundaryCurrent>,
}

impl MeasurementSet {
    pub fn new(currents: Vec<BoundaryCurrent>) -> Result<Self> {
        if currents.is_empty() {
            return Err(Error::InvalidArgument(
                "a measurement set needs at least one boundary current".into(),
            ));
        }
        let trig_arcs: Vec<_> = currents
            .iter()
            .filter(|c| c.family == CurrentFamily::TrigLimited)
            .map(|c| c.arc)
            .collect();
        if trig_arcs.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidArgument(
                "limited-angle currents in one set must share the same arc".into(),
            ));
        }
        Ok(Self { currents })
    }

    /// Trig currents with the given indices on `arc`.
    pub fn trig(arc: BoundaryArc, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices
                .iter()
                .map(|&j| BoundaryCurrent::trig(j, arc))
                .collect::<Result<_>>()?,
        )
    }

    /// Full-boundary special currents with the given indices.
    pub fn special(indices: &[usize]) -> Result<Self> {
        Self::new(
            indices
                .iter()
                .map(|&j| BoundaryCurrent::special(j))
                .collect::<Result<_>>()?,
        )
    }

    /// First `count` currents of a family.
    pub fn first(family: CurrentFamily, arc: BoundaryArc, count: usize) -> Result<Self> {
        let indices: Vec<usize> = (1..=count).collect();
        match family {
            CurrentFamily::TrigLimited => Self::trig(arc, &indices),
            CurrentFamily::SpecialFull => Self::special(&indices),
        }
    }

    pub fn currents(&self) -> &[BoundaryCurrent] {
        &self.currents
    }

    pub fn len(&self) -> usize {
        self.currents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.currents.is_empty()
    }
}

/// Everything needed to evaluate the power-density map on one mesh.
#[derive(Debug)]
pub struct ForwardModel<'m> {
    mesh: &'m Mesh,
    measurements: MeasurementSet,
    loads: Vec<Vec<f64>>,
    mass: CsrMatrix,
    sigma_floor: f64,
}

impl<'m> ForwardModel<'m> {
    pub fn new(mesh: &'m Mesh, measurements: MeasurementSet, sigma_floor: f64) -> Result<Self> {
        if !(sigma_floor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "conductivity floor must be positive, got {sigma_floor}"
            )));
        }
        let loads = measurements
            .currents()
            .iter()
            .map(|c| assemble_boundary_load(mesh, |th| c.eval(th), &c.arc()))
            .collect();
        Ok(Self {
            mesh,
            measurements,
            loads,
            mass: assemble_mass(mesh),
            sigma_floor,
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn measurements(&self) -> &MeasurementSet {
        &self.measurements
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements.len()
    }

    pub fn loads(&self) -> &[Vec<f64>] {
        &self.loads
    }

    /// Data-space mass matrix (shared with the domain mesh).
    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn sigma_floor(&self) -> f64 {
        self.sigma_floor
    }

    /// Solves all potentials for `sigma` and evaluates the power densities.
    pub fn solve(&self, sigma: &NodalField) -> Result<ForwardState<'_>> {
        sigma.check_mesh(self.mesh)?;
        check_admissible(sigma.values(), self.sigma_floor)?;
        let sigma_t = triangle_average(self.mesh, sigma.values());
        let solver = NeumannSolver::new(self.mesh, assemble_weighted_stiffness(self.mesh, &sigma_t))?;
        let potentials: Vec<NodalField> = self
            .loads
            .par_iter()
            .enumerate()
            .map(|(index, b)| {
                solver
                    .solve(b)
                    .map(NodalField::from_vec)
                    .map_err(|e| Error::Measurement {
                        index,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()?;
        let gradients: Vec<Vec<[f64; 2]>> = potentials
            .iter()
            .map(|u| triangle_gradients(self.mesh, u.values()))
            .collect();
        let power = gradients
            .iter()
            .map(|g| power_from_gradients(self.mesh, &sigma_t, g))
            .collect();
        Ok(ForwardState {
            model: self,
            sigma: sigma.clone(),
            sigma_t,
            solver,
            potentials,
            gradients,
            power,
        })
    }

    /// `sum_j a_j^T M b_j`
    pub fn data_inner(&self, a: &[NodalField], b: &[NodalField]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .map(|(x, y)| dot(x.values(), &self.mass.matvec(y.values())))
            .sum()
    }

    pub fn data_norm(&self, a: &[NodalField]) -> f64 {
        self.data_inner(a, a).max(0.0).sqrt()
    }

    /// `sqrt(x^T M x)` for a single field.
    pub fn field_norm(&self, x: &NodalField) -> f64 {
        dot(x.values(), &self.mass.matvec(x.values())).max(0.0).sqrt()
    }
}

/// Potentials, per-triangle gradients and power densities at one conductivity.
#[derive(Debug)]
pub struct ForwardState<'a> {
    model: &'a ForwardModel<'a>,
    sigma: NodalField,
    sigma_t: Vec<f64>,
    solver: NeumannSolver,
    potentials: Vec<NodalField>,
    gradients: Vec<Vec<[f64; 2]>>,
    power: Vec<NodalField>,
}

impl<'a> ForwardState<'a> {
    pub fn model(&self) -> &'a ForwardModel<'a> {
        self.model
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.model.mesh
    }

    pub fn sigma(&self) -> &NodalField {
        &self.sigma
    }

    /// Conductivity averaged onto triangles.
    pub fn sigma_per_triangle(&self) -> &[f64] {
        &self.sigma_t
    }

    pub fn solver(&self) -> &NeumannSolver {
        &self.solver
    }

    pub fn potentials(&self) -> &[NodalField] {
        &self.potentials
    }

    pub fn gradients(&self, j: usize) -> &[[f64; 2]] {
        &self.gradients[j]
    }

    pub fn power_densities(&self) -> &[NodalField] {
        &self.power
    }

    pub fn into_power_densities(self) -> Vec<NodalField> {
        self.power
    }

    pub fn num_measurements(&self) -> usize {
        self.potentials.len()
    }
}

/// `E = sigma |grad u|^2`, built per triangle and projected to the vertices.
pub fn power_density(mesh: &Mesh, sigma: &NodalField, u: &NodalField) -> Result<NodalField> {
    sigma.check_mesh(mesh)?;
    u.check_mesh(mesh)?;
    let sigma_t = triangle_average(mesh, sigma.values());
    let grads = triangle_gradients(mesh, u.values());
    Ok(power_from_gradients(mesh, &sigma_t, &grads))
}

fn power_from_gradients(mesh: &Mesh, sigma_t: &[f64], grads: &[[f64; 2]]) -> NodalField {
    let per_triangle: Vec<f64> = sigma_t
        .iter()
        .zip(grads)
        .map(|(s, g)| s * (g[0] * g[0] + g[1] * g[1]))
        .collect();
    NodalField::from_vec(project_to_vertices(mesh, &per_triangle))
}

/// Per-triangle `det(grad u1, grad u2)` and the smallest absolute value.
pub fn determinant_diagnostic(mesh: &Mesh, u1: &NodalField, u2: &NodalField) -> Result<(Vec<f64>, f64)> {
    u1.check_mesh(mesh)?;
    u2.check_mesh(mesh)?;
    let g1 = triangle_gradients(mesh, u1.values());
    let g2 = triangle_gradients(mesh, u2.values());
    let det: Vec<f64> = g1
        .iter()
        .zip(&g2)
        .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
        .collect();
    let min = det.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    Ok((det, min))
}

/// Evaluates a field given on `source` at the vertices of `target` by
/// barycentric interpolation.
pub fn interpolate_to_mesh(source: &Mesh, values: &NodalField, target: &Mesh) -> Result<NodalField> {
    values.check_mesh(source)?;
    let locator = PointLocator::new(source);
    Ok(NodalField::from_vec(
        target
            .vertices()
            .par_iter()
            .map(|&p| locator.interpolate(values.values(), p))
            .collect(),
    ))
}

/// Power densities simulated on a fine mesh and transferred to a coarse one,
/// so that data and reconstruction never share a discretization.
pub fn simulate_on_fine_mesh(
    fine: &Mesh,
    sigma_fine: &NodalField,
    measurements: &MeasurementSet,
    sigma_floor: f64,
    target: &Mesh,
) -> Result<Vec<NodalField>> {
    let model = ForwardModel::new(fine, measurements.clone(), sigma_floor)?;
    let state = model.solve(sigma_fine)?;
    state
        .power_densities()
        .iter()
        .map(|e| interpolate_to_mesh(fine, e, target))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;
    use crate::mesh::generate_disk_mesh;

    #[test]
    fn current_values() {
        for alpha in [TAU, PI, 1.0] {
            let arc = BoundaryArc::new(alpha).unwrap();
            assert_eq!(BoundaryCurrent::trig(1, arc).unwrap().eval(0.0), 0.0);
        }
        let full = BoundaryCurrent::trig(1, BoundaryArc::full()).unwrap();
        assert!((full.eval(FRAC_PI_2) - 1.0).abs() < 1e-15);
        let g3 = BoundaryCurrent::special(3).unwrap();
        assert!((g3.eval(FRAC_PI_4) - 1.0).abs() < 1e-15);
        let half = BoundaryCurrent::trig(2, BoundaryArc::new(PI).unwrap()).unwrap();
        assert_eq!(half.eval(4.0), 0.0);
        assert!(BoundaryCurrent::trig(0, BoundaryArc::full()).is_err());
        assert!(BoundaryCurrent::special(4).is_err());
    }

    #[test]
    fn empty_measurement_set_rejected() {
        assert!(MeasurementSet::new(vec![]).is_err());
        let a = BoundaryCurrent::trig(1, BoundaryArc::new(PI).unwrap()).unwrap();
        let b = BoundaryCurrent::trig(2, BoundaryArc::new(FRAC_PI_2).unwrap()).unwrap();
        assert!(MeasurementSet::new(vec![a, b]).is_err());
    }

    #[test]
    fn power_density_of_linear_fields() {
        let m = generate_disk_mesh(300).unwrap();
        let one = NodalField::constant(&m, 1.0);
        let c = power_density(&m, &one, &NodalField::constant(&m, 4.0)).unwrap();
        assert!(c.values().iter().all(|&v| v.abs() < 1e-24));
        let y = NodalField::from_fn(&m, |p| p[1]);
        let e = power_density(&m, &one, &y).unwrap();
        assert!(e.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let two = NodalField::constant(&m, 2.0);
        let e = power_density(&m, &two, &y.scaled(0.5)).unwrap();
        assert!(e.values().iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn determinant_of_coordinate_fields() {
        let m = generate_disk_mesh(300).unwrap();
        let y = NodalField::from_fn(&m, |p| p[1]);
        let x = NodalField::from_fn(&m, |p| p[0]);
        let (det, min) = determinant_diagnostic(&m, &y, &x).unwrap();
        assert!(det.iter().all(|d| (d + 1.0).abs() < 1e-12));
        assert!((min - 1.0).abs() < 1e-12);
        let (det, min) = determinant_diagnostic(&m, &y, &y).unwrap();
        assert!(det.iter().all(|d| d.abs() < 1e-12));
        assert!(min < 1e-12);
    }

    #[test]
    fn special_currents_give_linear_potentials() {
        let m = generate_disk_mesh(2000).unwrap();
        let model = ForwardModel::new(&m, MeasurementSet::special(&[1, 2, 3]).unwrap(), 0.1).unwrap();
        let state = model.solve(&NodalField::constant(&m, 1.0)).unwrap();
        let exact = [
            NodalField::from_fn(&m, |p| p[1]),
            NodalField::from_fn(&m, |p| p[0]),
            NodalField::from_fn(&m, |p| (p[0] + p[1]) * FRAC_1_SQRT_2),
        ];
        for (u, ex) in state.potentials().iter().zip(&exact) {
            let rel = model.field_norm(&u.sub(ex)) / model.field_norm(ex);
            assert!(rel < 0.02, "{rel}");
        }
    }

    #[test]
    fn scaling_laws() {
        let m = generate_disk_mesh(400).unwrap();
        let arc = BoundaryArc::new(1.5 * PI).unwrap();
        let ms = MeasurementSet::trig(arc, &[1, 2]).unwrap();
        let model = ForwardModel::new(&m, ms, 0.1).unwrap();
        let sigma = NodalField::from_fn(&m, |p| 1.0 + 0.5 * p[0] * p[0]);
        let base = model.solve(&sigma).unwrap();
        let scaled = model.solve(&sigma.scaled(4.0)).unwrap();
        for (e, e4) in base.power_densities().iter().zip(scaled.power_densities()) {
            assert!(e.min() >= 0.0);
            for (a, b) in e.values().iter().zip(e4.values()) {
                assert!((a / 4.0 - b).abs() <= 1e-10 * a.abs().max(1e-12));
            }
        }
        // g -> 3 g scales E by 9
        let tripled: Vec<Vec<f64>> = model
            .loads()
            .iter()
            .map(|b| b.iter().map(|v| 3.0 * v).collect())
            .collect();
        for (j, b3) in tripled.iter().enumerate() {
            let u3 = NodalField::from_vec(base.solver().solve(b3).unwrap());
            let e3 = power_density(&m, &sigma, &u3).unwrap();
            for (a, b) in base.power_densities()[j].values().iter().zip(e3.values()) {
                assert!((9.0 * a - b).abs() <= 1e-10 * b.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn inadmissible_sigma_is_rejected() {
        let m = generate_disk_mesh(100).unwrap();
        let model = ForwardModel::new(&m, MeasurementSet::special(&[1]).unwrap(), 0.1).unwrap();
        assert!(model.solve(&NodalField::constant(&m, 0.05)).is_err());
    }
}
