//! P1 finite-element assembly, the zero-mean Neumann solve and the Gram
//! matrices that realize the domain-space inner products.
//!
//! Coefficients (conductivity, directions, weights) enter element integrals
//! as the average of their three vertex values. Gradients of P1 fields are
//! constant per triangle, so every quantity built from them is a
//! piecewise-constant per-triangle array.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{dot, norm2, NodalField};
use crate::mesh::{BoundaryArc, Mesh};
use crate::sparse::{Cholesky, CsrMatrix};

/// Relative residual accepted from the Neumann solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Default admissibility floor for conductivities.
pub const DEFAULT_SIGMA_FLOOR: f64 = 0.1;

/// Mean of the three vertex values on every triangle.
pub fn triangle_average(mesh: &Mesh, values: &[f64]) -> Vec<f64> {
    mesh.triangles()
        .iter()
        .map(|t| (values[t[0]] + values[t[1]] + values[t[2]]) / 3.0)
        .collect()
}

/// Adjoint of [`triangle_average`] with respect to the Euclidean pairing.
pub fn triangle_average_transpose(mesh: &Mesh, per_triangle: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &v in tri {
            out[v] += per_triangle[t] / 3.0;
        }
    }
    out
}

/// Constant gradient of a P1 field on every triangle.
pub fn triangle_gradients(mesh: &Mesh, u: &[f64]) -> Vec<[f64; 2]> {
    mesh.triangles()
        .iter()
        .zip(mesh.geometry())
        .map(|(t, g)| {
            let mut grad = [0.0; 2];
            for k in 0..3 {
                grad[0] += u[t[k]] * g.grads[k][0];
                grad[1] += u[t[k]] * g.grads[k][1];
            }
            grad
        })
        .collect()
}

/// Area-weighted average of per-triangle values over each vertex patch.
pub fn project_to_vertices(mesh: &Mesh, per_triangle: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.num_vertices()];
    for ((t, tri), g) in mesh.triangles().iter().enumerate().zip(mesh.geometry()) {
        for &v in tri {
            out[v] += g.area * per_triangle[t];
        }
    }
    out.iter_mut()
        .zip(mesh.patch_area())
        .for_each(|(o, a)| *o /= a);
    out
}

/// Adjoint of [`project_to_vertices`] with respect to the Euclidean pairing.
pub fn project_to_vertices_transpose(mesh: &Mesh, per_vertex: &[f64]) -> Vec<f64> {
    let patch = mesh.patch_area();
    mesh.triangles()
        .iter()
        .zip(mesh.geometry())
        .map(|(tri, g)| tri.iter().map(|&v| g.area * per_vertex[v] / patch[v]).sum())
        .collect()
}

pub fn check_admissible(sigma: &[f64], floor: f64) -> Result<()> {
    match sigma.iter().position(|&s| !(s >= floor)) {
        Some(vertex) => Err(Error::Inadmissible {
            vertex,
            value: sigma[vertex],
            floor,
        }),
        None => Ok(()),
    }
}

/// `K_ij = sum_T c_T |T| grad(phi_i) . grad(phi_j)` for per-triangle coefficients
/// `c_T` of any sign.
pub fn assemble_weighted_stiffness(mesh: &Mesh, coeff: &[f64]) -> CsrMatrix {
    assert_eq!(coeff.len(), mesh.num_triangles());
    let trips: Vec<(usize, usize, f64)> = mesh
        .triangles()
        .par_iter()
        .zip(mesh.geometry().par_iter())
        .zip(coeff.par_iter())
        .flat_map_iter(|((tri, g), &c)| {
            let mut local = Vec::with_capacity(9);
            for a in 0..3 {
                for b in 0..3 {
                    let gg = g.grads[a][0] * g.grads[b][0] + g.grads[a][1] * g.grads[b][1];
                    local.push((tri[a], tri[b], c * g.area * gg));
                }
            }
            local
        })
        .collect();
    CsrMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), &trips)
}

/// Stiffness matrix of `-div(sigma grad u)`; rejects conductivities below `floor`.
pub fn assemble_stiffness(mesh: &Mesh, sigma: &NodalField, floor: f64) -> Result<CsrMatrix> {
    sigma.check_mesh(mesh)?;
    check_admissible(sigma.values(), floor)?;
    Ok(assemble_weighted_stiffness(
        mesh,
        &triangle_average(mesh, sigma.values()),
    ))
}

/// Stiffness matrix for unit conductivity.
pub fn assemble_laplacian(mesh: &Mesh) -> CsrMatrix {
    assemble_weighted_stiffness(mesh, &vec![1.0; mesh.num_triangles()])
}

/// Consistent P1 mass matrix.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let trips: Vec<(usize, usize, f64)> = mesh
        .triangles()
        .par_iter()
        .zip(mesh.geometry().par_iter())
        .flat_map_iter(|(tri, g)| {
            let mut local = Vec::with_capacity(9);
            for a in 0..3 {
                for b in 0..3 {
                    let w = if a == b { 2.0 } else { 1.0 };
                    local.push((tri[a], tri[b], g.area * w / 12.0));
                }
            }
            local
        })
        .collect();
    CsrMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), &trips)
}

/// `b_i = int_{Gamma(alpha)} g phi_i ds` with two-point Gauss quadrature on
/// every accessible boundary chord. `g` is a function of the polar angle.
pub fn assemble_boundary_load(mesh: &Mesh, g: impl Fn(f64) -> f64, arc: &BoundaryArc) -> Vec<f64> {
    const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];
    let mut b = vec![0.0; mesh.num_vertices()];
    for idx in mesh.accessible_boundary_edges(arc) {
        let e = mesh.boundary_edges()[idx];
        let p = mesh.vertices()[e.start];
        let q = mesh.vertices()[e.end];
        let len = e.length(mesh);
        for s in GAUSS {
            let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            let mut th = x[1].atan2(x[0]);
            if th < 0.0 {
                th += std::f64::consts::TAU;
            }
            let val = g(th) * 0.5 * len;
            b[e.start] += val * (1.0 - s);
            b[e.end] += val * s;
        }
    }
    let total: f64 = b.iter().sum();
    if total.abs() > 1e-8 * norm2(&b) {
        log::warn!(
            "boundary current is not mean-free on the mesh (sum {total:.3e}); projecting it out"
        );
    }
    b
}

/// Factorized Neumann operator enforcing `int u = 0`.
///
/// The bordered system `[K m; m^T 0]` with `m = M 1` has the solution
/// `lambda = sum(b) / |Omega|`, `u` the zero-mean solution of
/// `K u = b - lambda m`. The singular block is handled by pinning one vertex,
/// solving the reduced SPD system and shifting the result to zero mean.
#[derive(Debug)]
pub struct NeumannSolver {
    stiffness: CsrMatrix,
    chol: Cholesky,
    mass_row_sums: Vec<f64>,
    area: f64,
    pin: usize,
}

impl NeumannSolver {
    pub fn new(mesh: &Mesh, stiffness: CsrMatrix) -> Result<Self> {
        if stiffness.nrows() != mesh.num_vertices() {
            return Err(Error::LengthMismatch {
                expected: mesh.num_vertices(),
                actual: stiffness.nrows(),
            });
        }
        let pin = 0;
        let chol = Cholesky::new(&stiffness.without_row_col(pin))?;
        let mass_row_sums: Vec<f64> = mesh.patch_area().iter().map(|a| a / 3.0).collect();
        Ok(Self {
            stiffness,
            chol,
            area: mass_row_sums.iter().sum(),
            mass_row_sums,
            pin,
        })
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    fn project(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let lambda = b.iter().sum::<f64>() / self.area;
        let proj = b
            .iter()
            .zip(&self.mass_row_sums)
            .map(|(bi, mi)| bi - lambda * mi)
            .collect();
        (proj, lambda)
    }

    fn reduced_solve(&self, b: &[f64]) -> Vec<f64> {
        let reduced: Vec<f64> = b
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.pin)
            .map(|(_, &v)| v)
            .collect();
        let x = self.chol.solve(&reduced);
        let mut u = Vec::with_capacity(b.len());
        u.extend_from_slice(&x[..self.pin]);
        u.push(0.0);
        u.extend_from_slice(&x[self.pin..]);
        self.remove_mean(&mut u);
        u
    }

    fn remove_mean(&self, u: &mut [f64]) {
        let mean = dot(u, &self.mass_row_sums) / self.area;
        u.iter_mut().for_each(|x| *x -= mean);
    }

    /// Zero-mean solution of the bordered system; one step of iterative
    /// refinement is applied if the first residual misses the tolerance.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (rhs, _) = self.project(b);
        let scale = norm2(b);
        if scale == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let mut u = self.reduced_solve(&rhs);
        let mut residual = self.residual(&u, &rhs);
        if residual > SOLVE_TOLERANCE * scale {
            let r: Vec<f64> = self
                .stiffness
                .matvec(&u)
                .iter()
                .zip(&rhs)
                .map(|(ku, b)| b - ku)
                .collect();
            let du = self.reduced_solve(&self.project(&r).0);
            u.iter_mut().zip(&du).for_each(|(a, d)| *a += d);
            residual = self.residual(&u, &rhs);
        }
        if residual > SOLVE_TOLERANCE * scale {
            return Err(Error::SolverNotConverged {
                residual: residual / scale,
            });
        }
        Ok(u)
    }

    /// Solves for every column of `rhs` (one column per right-hand side).
    pub fn solve_columns(&self, rhs: &mut faer::Mat<f64>) {
        let n = self.mass_row_sums.len();
        assert_eq!(rhs.nrows(), n);
        let mut reduced = faer::Mat::<f64>::zeros(n - 1, rhs.ncols());
        for c in 0..rhs.ncols() {
            let sum: f64 = (0..n).map(|i| rhs[(i, c)]).sum();
            let lambda = sum / self.area;
            let mut r = 0;
            for i in 0..n {
                if i != self.pin {
                    reduced[(r, c)] = rhs[(i, c)] - lambda * self.mass_row_sums[i];
                    r += 1;
                }
            }
        }
        self.chol.solve_columns(&mut reduced);
        for c in 0..rhs.ncols() {
            let mut u: Vec<f64> = (0..n - 1).map(|r| reduced[(r, c)]).collect();
            u.insert(self.pin, 0.0);
            self.remove_mean(&mut u);
            for (i, v) in u.into_iter().enumerate() {
                rhs[(i, c)] = v;
            }
        }
    }

    fn residual(&self, u: &[f64], b: &[f64]) -> f64 {
        let ku = self.stiffness.matvec(u);
        norm2(
            &ku.iter()
                .zip(b)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    }

    /// `|int u| = |m^T u|` for a candidate solution.
    pub fn mean_integral(&self, u: &[f64]) -> f64 {
        dot(u, &self.mass_row_sums)
    }
}

/// Zero-mean solution of `K u = b` (after projecting `b` onto the range of `K`).
pub fn solve_neumann_zero_mean(mesh: &Mesh, stiffness: &CsrMatrix, b: &[f64]) -> Result<NodalField> {
    let solver = NeumannSolver::new(mesh, stiffness.clone())?;
    Ok(NodalField::from_vec(solver.solve(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerProductMode {
    L2,
    H2,
    H2Beta,
}

impl std::str::FromStr for InnerProductMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Self::L2),
            "h2" => Ok(Self::H2),
            "h2beta" | "h2_beta" | "h2-beta" => Ok(Self::H2Beta),
            other => Err(Error::InvalidArgument(format!("unknown inner product '{other}'"))),
        }
    }
}

impl std::fmt::Display for InnerProductMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::L2 => "l2",
            Self::H2 => "h2",
            Self::H2Beta => "h2beta",
        })
    }
}

/// Domain-space inner product `b0 <u,v> + b1 <grad u, grad v> + b2 <Lu, Lv>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProductSpec {
    mode: InnerProductMode,
    beta: [f64; 3],
}

impl InnerProductSpec {
    pub fn l2() -> Self {
        Self {
            mode: InnerProductMode::L2,
            beta: [1.0, 0.0, 0.0],
        }
    }

    pub fn h2() -> Self {
        Self {
            mode: InnerProductMode::H2,
            beta: [1.0; 3],
        }
    }

    pub fn h2_beta(beta: [f64; 3]) -> Result<Self> {
        if beta.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "inner product weights must be positive, got {beta:?}"
            )));
        }
        Ok(Self {
            mode: InnerProductMode::H2Beta,
            beta,
        })
    }

    /// Weights `(1, 1e-3, 1e-6)` for derivative orders 0, 1, 2.
    pub fn default_h2_beta() -> Self {
        Self::h2_beta([1.0, 1e-3, 1e-6]).expect("positive weights")
    }

    pub fn from_mode(mode: InnerProductMode, beta: [f64; 3]) -> Result<Self> {
        match mode {
            InnerProductMode::L2 => Ok(Self::l2()),
            InnerProductMode::H2 => Ok(Self::h2()),
            InnerProductMode::H2Beta => Self::h2_beta(beta),
        }
    }

    pub fn mode(&self) -> InnerProductMode {
        self.mode
    }

    pub fn weights(&self) -> [f64; 3] {
        self.beta
    }
}

/// Gram matrix of the inner product selected by `spec`.
///
/// The second-order term uses the discrete Laplacian `L = M_lumped^{-1} K_1`,
/// giving `G_2 = L^T M L`.
pub fn gram_matrix(mesh: &Mesh, spec: &InnerProductSpec) -> CsrMatrix {
    let mass = assemble_mass(mesh);
    if spec.mode == InnerProductMode::L2 {
        return mass;
    }
    let [b0, b1, b2] = spec.beta;
    let k1 = assemble_laplacian(mesh);
    let inv_lumped: Vec<f64> = mass.row_sums().iter().map(|m| 1.0 / m).collect();
    let lap = k1.scale_rows(&inv_lumped);
    let second = lap.transpose().mul(&mass).mul(&lap);
    let mut g = mass.add_scaled(b0, &k1, b1).add_scaled(1.0, &second, b2);
    g = symmetrize(&g);
    g
}

fn symmetrize(a: &CsrMatrix) -> CsrMatrix {
    a.add_scaled(0.5, &a.transpose(), 0.5)
}

/// Factorized domain-space inner product: norms, Riesz representers and
/// the embedding adjoint `G x = M w`.
#[derive(Debug)]
pub struct DomainSpace {
    spec: InnerProductSpec,
    gram: CsrMatrix,
    mass: CsrMatrix,
    chol: Cholesky,
}

impl DomainSpace {
    pub fn new(mesh: &Mesh, spec: InnerProductSpec) -> Result<Self> {
        let gram = gram_matrix(mesh, &spec);
        let chol = Cholesky::new(&gram)?;
        Ok(Self {
            spec,
            gram,
            mass: assemble_mass(mesh),
            chol,
        })
    }

    pub fn spec(&self) -> &InnerProductSpec {
        &self.spec
    }

    pub fn gram(&self) -> &CsrMatrix {
        &self.gram
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.gram.matvec(y))
    }

    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        self.inner(x, x)
    }

    /// Representer `x` of a linear functional `r`, i.e. `G x = r`.
    pub fn riesz(&self, functional: &[f64]) -> Vec<f64> {
        self.chol.solve(functional)
    }

    /// `E^* w`: the element with `<E^* w, v>_G = <w, v>_{L2}` for all `v`.
    pub fn embedding_adjoint(&self, w: &NodalField) -> NodalField {
        if self.spec.mode == InnerProductMode::L2 {
            return w.clone();
        }
        NodalField::from_vec(self.riesz(&self.mass.matvec(w.values())))
    }
}

/// One-shot form of [`DomainSpace::embedding_adjoint`].
pub fn embedding_adjoint(mesh: &Mesh, w: &NodalField, spec: &InnerProductSpec) -> Result<NodalField> {
    w.check_mesh(mesh)?;
    Ok(DomainSpace::new(mesh, *spec)?.embedding_adjoint(w))
}
