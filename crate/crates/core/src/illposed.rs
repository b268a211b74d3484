//! Transfer matrix of the linearized power-density map and its singular
//! values.
//!
//! Rows are indexed by the stacked data basis (measurement `j`, vertex `v`
//! at row `j * V + v`), columns by the vertex hat functions of the domain.
//! Entry `(j * V + v, i)` is `<F'(sigma) phi_i, psi_v>_{L2}`.
//!
//! Two pairings are available. [`Pairing::Exact`] integrates the piecewise
//! polynomial `phi_i |grad u_j|^2 + 2 sigma grad u_j . grad u'_j` against
//! `psi_v` exactly, triangle by triangle. [`Pairing::Projected`] first maps
//! the derivative to a vertex field (as the iteration does) and then applies
//! the mass matrix. The projected route averages twice and damps oscillatory
//! vertex patterns, which inflates the condition number considerably.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use faer::{Mat, MatRef};
use log::{debug, info, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::forward::{CurrentFamily, ForwardModel, MeasurementSet};
use crate::mesh::{BoundaryArc, Mesh};
use crate::sensitivity::{derivative_batch, linearized_batch, linearized_potential};
use crate::forward::ForwardState;
use crate::fem::triangle_gradients;

/// Columns solved together in one multi-right-hand-side call.
const COLUMN_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    #[default]
    Exact,
    Projected,
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Pairing::Exact),
            "projected" => Ok(Pairing::Projected),
            other => Err(Error::InvalidArgument(format!(
                "unknown pairing '{other}' (expected exact or projected)"
            ))),
        }
    }
}

impl std::fmt::Display for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pairing::Exact => "exact",
            Pairing::Projected => "projected",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    matrix: Mat<f64>,
    num_vertices: usize,
    measurements: MeasurementSet,
}

impl TransferMatrix {
    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn measurements(&self) -> &MeasurementSet {
        &self.measurements
    }

    pub fn alpha(&self) -> f64 {
        self.measurements.currents()[0].arc().alpha()
    }

    /// `T h` as a stacked vector.
    pub fn apply(&self, h: &NodalField) -> Result<Vec<f64>> {
        if h.len() != self.ncols() {
            return Err(Error::LengthMismatch {
                expected: self.ncols(),
                actual: h.len(),
            });
        }
        Ok((0..self.nrows())
            .map(|r| (0..self.ncols()).map(|c| self.matrix[(r, c)] * h.values()[c]).sum())
            .collect())
    }

    /// The rows belonging to the measurements at `positions` (0-based
    /// positions within this matrix's measurement set).
    pub fn select_measurements(&self, positions: &[usize]) -> Result<TransferMatrix> {
        let currents = self.measurements.currents();
        if let Some(&p) = positions.iter().find(|&&p| p >= currents.len()) {
            return Err(Error::InvalidArgument(format!(
                "measurement position {p} out of range (M = {})",
                currents.len()
            )));
        }
        let n = self.num_vertices;
        let matrix = Mat::from_fn(positions.len() * n, self.ncols(), |r, c| {
            self.matrix[(positions[r / n] * n + r % n, c)]
        });
        Ok(TransferMatrix {
            matrix,
            num_vertices: n,
            measurements: MeasurementSet::new(positions.iter().map(|&p| currents[p]).collect())?,
        })
    }

    /// Multiplies the rows of data-basis function `row` by `factor`.
    pub fn scale_row(&mut self, row: usize, factor: f64) {
        for c in 0..self.ncols() {
            self.matrix[(row, c)] *= factor;
        }
    }

    pub fn svd(&self, with_vectors: bool) -> Result<SvdReport> {
        svd_analyze(self.matrix(), with_vectors)
    }
}

/// Stacks `M f_j` over all measurements: the coefficients of a data field
/// paired against the data basis.
pub fn stack_weighted(model: &ForwardModel<'_>, fields: &[NodalField]) -> Vec<f64> {
    fields.iter().flat_map(|f| model.mass().matvec(f.values())).collect()
}

/// Exact `L2` pairing of `h |grad u_j|^2 + 2 sigma grad u_j . grad u'_j` with
/// every data basis function, stacked over `j`.
fn exact_pairing(state: &ForwardState<'_>, h: &NodalField, du: &[NodalField]) -> Vec<f64> {
    let mesh = state.mesh();
    let n = mesh.num_vertices();
    let sigma = state.sigma().values();
    let mut out = vec![0.0; n * du.len()];
    for (j, d) in du.iter().enumerate() {
        let g = state.gradients(j);
        let dg = triangle_gradients(mesh, d.values());
        let block = &mut out[j * n..(j + 1) * n];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let gg = g[t][0] * g[t][0] + g[t][1] * g[t][1];
            let cross = 2.0 * (g[t][0] * dg[t][0] + g[t][1] * dg[t][1]);
            // nodal values of the linear factor, then the P1 mass matrix
            let f: [f64; 3] = std::array::from_fn(|k| gg * h.values()[tri[k]] + cross * sigma[tri[k]]);
            let sum = f[0] + f[1] + f[2];
            let scale = mesh.geometry()[t].area / 12.0;
            for k in 0..3 {
                block[tri[k]] += scale * (sum + f[k]);
            }
        }
    }
    out
}

/// `<F'(sigma) h, psi_v>_{L2}` for every data basis function, computed
/// directly from the operator with the chosen pairing.
pub fn derivative_pairing(state: &ForwardState<'_>, h: &NodalField, pairing: Pairing) -> Result<Vec<f64>> {
    match pairing {
        Pairing::Exact => {
            let du = (0..state.num_measurements())
                .map(|j| linearized_potential(state, j, h))
                .collect::<Result<Vec<_>>>()?;
            Ok(exact_pairing(state, h, &du))
        }
        Pairing::Projected => Ok(stack_weighted(
            state.model(),
            &crate::sensitivity::derivative_apply(state, h)?,
        )),
    }
}

/// Assembles `T` at `sigma`, one parallel batch of hat-function columns at a
/// time.
pub fn assemble_transfer_matrix(
    model: &ForwardModel<'_>,
    sigma: &NodalField,
    pairing: Pairing,
) -> Result<TransferMatrix> {
    let mesh = model.mesh();
    let n = mesh.num_vertices();
    let m = model.num_measurements();
    let state = model.solve(sigma)?;
    info!("assembling {}x{} transfer matrix", m * n, n);
    let chunks: Vec<(usize, Vec<Vec<f64>>)> = (0..n)
        .step_by(COLUMN_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + COLUMN_CHUNK).min(n);
            let hats: Vec<NodalField> = (start..end)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    NodalField::from_vec(e)
                })
                .collect();
            let wrap = |e| Error::Column {
                column: start,
                source: Box::new(e),
            };
            let columns: Vec<Vec<f64>> = match pairing {
                Pairing::Exact => linearized_batch(&state, &hats)
                    .map_err(wrap)?
                    .iter()
                    .zip(&hats)
                    .map(|(du, h)| exact_pairing(&state, h, du))
                    .collect(),
                Pairing::Projected => derivative_batch(&state, &hats)
                    .map_err(wrap)?
                    .iter()
                    .map(|d| stack_weighted(model, d))
                    .collect(),
            };
            debug!("transfer columns {start}..{end} done");
            Ok((start, columns))
        })
        .collect::<Result<_>>()?;
    let mut matrix = Mat::<f64>::zeros(m * n, n);
    for (start, columns) in chunks {
        for (offset, col) in columns.into_iter().enumerate() {
            let c = start + offset;
            for (r, v) in col.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Column {
                        column: c,
                        source: Box::new(Error::InvalidArgument(format!("non-finite entry in row {r}"))),
                    });
                }
                matrix[(r, c)] = v;
            }
        }
    }
    Ok(TransferMatrix {
        matrix,
        num_vertices: n,
        measurements: model.measurements().clone(),
    })
}

#[derive(Debug, Clone)]
pub struct SvdReport {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    right_vectors: Option<Mat<f64>>,
}

impl SvdReport {
    /// `s_max / s_min`; infinite for a rank-deficient matrix.
    pub fn condition_number(&self) -> f64 {
        let first = self.singular_values.first().copied().unwrap_or(0.0);
        let last = self.singular_values.last().copied().unwrap_or(0.0);
        if last > 0.0 {
            first / last
        } else {
            f64::INFINITY
        }
    }

    /// `s_1 / s_k` with a 1-based `k`.
    pub fn truncated_condition(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.singular_values.len() {
            return Err(Error::InvalidArgument(format!(
                "truncation index {k} outside 1..={}",
                self.singular_values.len()
            )));
        }
        Ok(self.singular_values[0] / self.singular_values[k - 1])
    }

    /// Right singular vector `v_k` (1-based, `v_1` belongs to the largest
    /// singular value).
    pub fn right_singular_vector(&self, k: usize) -> Result<NodalField> {
        let v = self
            .right_vectors
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("singular vectors were not computed".into()))?;
        if k == 0 || k > v.ncols() {
            return Err(Error::InvalidArgument(format!(
                "singular vector index {k} outside 1..={}",
                v.ncols()
            )));
        }
        NodalField::new(v.col(k - 1).iter().copied().collect())
    }
}

/// Singular values (and optionally right singular vectors) of `matrix`.
pub fn svd_analyze(matrix: MatRef<'_, f64>, with_vectors: bool) -> Result<SvdReport> {
    let (singular_values, right_vectors) = if with_vectors {
        let svd = matrix.thin_svd().map_err(|_| Error::Svd)?;
        let s = svd.S().column_vector().iter().copied().collect();
        (s, Some(svd.V().to_owned()))
    } else {
        (matrix.singular_values().map_err(|_| Error::Svd)?, None)
    };
    Ok(SvdReport {
        singular_values,
        right_vectors,
    })
}

/// Limited angles of the paper's condition table: 100%, 75%, 50%, 25%.
pub fn paper_angles() -> [f64; 4] {
    [TAU, 1.5 * PI, PI, FRAC_PI_2]
}

/// Boundary-function combinations of the paper's condition table.
pub fn paper_combinations() -> Vec<Vec<usize>> {
    vec![
        vec![1, 2, 3],
        vec![1, 2],
        vec![2, 3],
        vec![1, 3],
        vec![1],
        vec![2],
        vec![3],
    ]
}

/// Measurement set for 1-based current `indices` of `family` on `arc`.
pub fn measurement_set(family: CurrentFamily, arc: BoundaryArc, indices: &[usize]) -> Result<MeasurementSet> {
    match family {
        CurrentFamily::TrigLimited => MeasurementSet::trig(arc, indices),
        CurrentFamily::SpecialFull => {
            if arc.fraction() < 1.0 {
                return Err(Error::InvalidArgument(
                    "the special current family needs the full boundary".into(),
                ));
            }
            MeasurementSet::special(indices)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub alpha: f64,
    /// 1-based current indices.
    pub functions: Vec<usize>,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionTable {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionTable {
    pub fn get(&self, alpha: f64, functions: &[usize]) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.alpha == alpha && e.functions == functions)
            .map(|e| e.condition)
    }

    /// CSV with header `measurements,functions,alpha,condition`; functions
    /// are joined with `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("measurements,functions,alpha,condition\n");
        for e in &self.entries {
            let f: Vec<String> = e.functions.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{},{},{},{}", e.functions.len(), f.join(";"), e.alpha, e.condition);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSettings {
    pub family: CurrentFamily,
    pub alphas: Vec<f64>,
    /// 1-based current indices per row.
    pub combinations: Vec<Vec<usize>>,
    pub sigma_floor: f64,
    /// Report `s_1 / s_k` instead of `s_1 / s_min`.
    pub truncate: Option<usize>,
    pub pairing: Pairing,
}

impl Default for TableSettings {
    fn default() -> Self {
        Self {
            family: CurrentFamily::TrigLimited,
            alphas: paper_angles().to_vec(),
            combinations: paper_combinations(),
            sigma_floor: crate::fem::DEFAULT_SIGMA_FLOOR,
            truncate: None,
            pairing: Pairing::Exact,
        }
    }
}

/// Condition numbers of `T(sigma)` for every angle and current combination.
/// One matrix is assembled per angle for the union of all requested
/// currents; each combination is a row-block selection of it.
pub fn condition_table(mesh: &Mesh, sigma: &NodalField, settings: &TableSettings) -> Result<ConditionTable> {
    let TableSettings {
        family,
        ref alphas,
        ref combinations,
        sigma_floor,
        truncate,
        pairing,
    } = *settings;
    let mut union: Vec<usize> = combinations.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.is_empty() {
        return Err(Error::InvalidArgument("no current combinations given".into()));
    }
    let mut entries = Vec::new();
    for &alpha in alphas {
        let arc = BoundaryArc::new(alpha)?;
        let model = ForwardModel::new(mesh, measurement_set(family, arc, &union)?, sigma_floor)?;
        let full = assemble_transfer_matrix(&model, sigma, pairing)?;
        for combo in combinations {
            let positions: Vec<usize> = combo
                .iter()
                .map(|i| union.binary_search(i).expect("index is in the union"))
                .collect();
            let report = full.select_measurements(&positions)?.svd(false)?;
            let condition = match truncate {
                Some(k) if k > report.singular_values.len() => {
                    warn!("truncation index {k} exceeds rank bound; using the full spectrum");
                    report.condition_number()
                }
                Some(k) => report.truncated_condition(k)?,
                None => report.condition_number(),
            };
            info!("alpha={alpha:.4} functions={combo:?} cond={condition:.3e}");
            entries.push(ConditionEntry {
                alpha,
                functions: combo.clone(),
                condition,
            });
        }
    }
    Ok(ConditionTable { entries })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::mesh::generate_disk_mesh;
    use crate::phantom::default_phantom;

    fn dense(rows: &[&[f64]]) -> Mat<f64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn identity_and_diagonal() {
        let id = Mat::<f64>::identity(5, 5);
        let r = svd_analyze(id.as_ref(), true).unwrap();
        assert!(r.singular_values.iter().all(|s| (s - 1.0).abs() < 1e-14));
        assert!((r.condition_number() - 1.0).abs() < 1e-14);

        let d = dense(&[&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 0.5]]);
        let r = svd_analyze(d.as_ref(), false).unwrap();
        for (s, e) in r.singular_values.iter().zip([3.0, 1.0, 0.5]) {
            assert!((s - e).abs() < 1e-14);
        }
        assert!((r.condition_number() - 6.0).abs() < 1e-13);
        assert!((r.truncated_condition(2).unwrap() - 3.0).abs() < 1e-13);
        assert!(r.truncated_condition(4).is_err());
        assert!(r.right_singular_vector(1).is_err());
    }

    #[test]
    fn rank_deficient_condition_is_infinite() {
        let d = dense(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(svd_analyze(d.as_ref(), false).unwrap().condition_number().is_infinite());
    }

    fn small_setup<'m>(mesh: &'m Mesh, alpha: f64, indices: &[usize]) -> (ForwardModel<'m>, NodalField) {
        let arc = BoundaryArc::new(alpha).unwrap();
        let model = ForwardModel::new(mesh, MeasurementSet::trig(arc, indices).unwrap(), 0.1).unwrap();
        (model, default_phantom().on_mesh(mesh))
    }

    #[test]
    fn matrix_matches_operator() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, sigma) = small_setup(&mesh, 1.5 * PI, &[1, 2, 3]);
        let state = model.solve(&sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pairing in [Pairing::Exact, Pairing::Projected] {
            let t = assemble_transfer_matrix(&model, &sigma, pairing).unwrap();
            assert_eq!((t.nrows(), t.ncols()), (3 * mesh.num_vertices(), mesh.num_vertices()));
            for _ in 0..3 {
                let h = NodalField::new((0..mesh.num_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .unwrap();
                let direct = derivative_pairing(&state, &h, pairing).unwrap();
                let via_t = t.apply(&h).unwrap();
                let num: f64 = direct.iter().zip(&via_t).map(|(a, b)| (a - b).powi(2)).sum();
                let den: f64 = direct.iter().map(|a| a * a).sum();
                assert!((num / den).sqrt() <= 1e-10, "{pairing}: {}", (num / den).sqrt());
            }
        }
    }

    #[test]
    fn constant_direction_on_constant_conductivity() {
        // F'(c) 1 = -|grad u|^2 per triangle, i.e. -E / c
        let mesh = generate_disk_mesh(300).unwrap();
        let c = 2.0;
        let model = ForwardModel::new(&mesh, MeasurementSet::trig(BoundaryArc::full(), &[1]).unwrap(), 0.1).unwrap();
        let sigma = NodalField::constant(&mesh, c);
        let state = model.solve(&sigma).unwrap();
        let one = NodalField::constant(&mesh, 1.0);

        let mut exact = vec![0.0; mesh.num_vertices()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let g = state.gradients(0)[t];
            for &v in tri {
                exact[v] -= (g[0] * g[0] + g[1] * g[1]) * mesh.geometry()[t].area / 3.0;
            }
        }
        let projected = stack_weighted(&model, &[state.power_densities()[0].scaled(-1.0 / c)]);

        for (pairing, expected) in [(Pairing::Exact, exact), (Pairing::Projected, projected)] {
            let t = assemble_transfer_matrix(&model, &sigma, pairing).unwrap();
            let th = t.apply(&one).unwrap();
            let err: f64 = th.iter().zip(&expected).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = expected.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(err <= 1e-9 * norm, "{pairing}: {}", err / norm);
        }
    }

    #[test]
    fn projected_pairing_is_worse_conditioned() {
        let mesh = generate_disk_mesh(200).unwrap();
        let (model, sigma) = small_setup(&mesh, TAU, &[1, 2, 3]);
        let cond = |p| {
            assemble_transfer_matrix(&model, &sigma, p)
                .unwrap()
                .svd(false)
                .unwrap()
                .condition_number()
        };
        assert!(cond(Pairing::Projected) > 10.0 * cond(Pairing::Exact));
    }

    #[test]
    fn column_norms_and_row_scaling() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, sigma) = small_setup(&mesh, TAU, &[1]);
        let mut t = assemble_transfer_matrix(&model, &sigma, Pairing::Exact).unwrap();
        let norms: Vec<f64> = (0..t.ncols()).map(|c| t.matrix().col(c).norm_l2()).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let center = mesh
            .vertices()
            .iter()
            .position(|p| p[0].hypot(p[1]) < 1e-12)
            .unwrap();
        assert!(norms[center] > 0.0 && norms[center] < max);

        let before: Vec<f64> = (0..t.ncols()).map(|c| t.matrix()[(5, c)]).collect();
        t.scale_row(5, 2.0);
        for (c, b) in before.iter().enumerate() {
            assert_eq!(t.matrix()[(5, c)], 2.0 * b);
        }
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let mesh = generate_disk_mesh(300).unwrap();
        let (model, sigma) = small_setup(&mesh, PI, &[1, 2]);
        let t = assemble_transfer_matrix(&model, &sigma, Pairing::Exact).unwrap();
        let report = t.svd(false).unwrap();
        assert!(report.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(report.singular_values.iter().all(|&s| s >= 0.0));

        let a = t.matrix();
        let mut x = vec![1.0; a.ncols()];
        let mut estimate = 0.0;
        for _ in 0..3000 {
            let y: Vec<f64> = (0..a.nrows())
                .map(|r| (0..a.ncols()).map(|c| a[(r, c)] * x[c]).sum())
                .collect();
            let z: Vec<f64> = (0..a.ncols())
                .map(|c| (0..a.nrows()).map(|r| a[(r, c)] * y[r]).sum())
                .collect();
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            estimate = norm.sqrt();
            x = z.iter().map(|v| v / norm).collect();
        }
        let s_max = report.singular_values[0];
        assert!((estimate - s_max).abs() <= 1e-6 * s_max, "{estimate} {s_max}");
    }

    #[test]
    fn tiny_mesh_matches_eigendecomposition() {
        let mesh = generate_disk_mesh(40).unwrap();
        assert!(mesh.num_vertices() < 50);
        let (model, sigma) = small_setup(&mesh, 1.5 * PI, &[1, 2, 3]);
        let t = assemble_transfer_matrix(&model, &sigma, Pairing::Exact).unwrap();
        let report = t.svd(true).unwrap();
        let a = DMatrix::from_fn(t.nrows(), t.ncols(), |r, c| t.matrix()[(r, c)]);
        let ata = a.transpose() * &a;
        let mut eig: Vec<f64> = ata.symmetric_eigen().eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let s_max = report.singular_values[0];
        for (s, e) in report.singular_values.iter().zip(&eig) {
            assert!((s - e).abs() <= 1e-8 * s_max, "{s} {e}");
        }
        // T v_k = s_k u_k, so |T v_k| = s_k
        for k in [1, 5, mesh.num_vertices()] {
            let v = report.right_singular_vector(k).unwrap();
            let tv = t.apply(&v).unwrap();
            let norm = tv.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - report.singular_values[k - 1]).abs() <= 1e-8 * s_max);
        }
    }

    #[test]
    fn selection_matches_direct_assembly() {
        let mesh = generate_disk_mesh(200).unwrap();
        let (model, sigma) = small_setup(&mesh, PI, &[1, 2, 3]);
        let full = assemble_transfer_matrix(&model, &sigma, Pairing::Exact).unwrap();
        let (model13, _) = small_setup(&mesh, PI, &[1, 3]);
        let direct = assemble_transfer_matrix(&model13, &sigma, Pairing::Exact).unwrap();
        let sel = full.select_measurements(&[0, 2]).unwrap();
        assert_eq!(sel.nrows(), direct.nrows());
        for r in 0..sel.nrows() {
            for c in 0..sel.ncols() {
                let (a, b) = (sel.matrix()[(r, c)], direct.matrix()[(r, c)]);
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
        assert!(full.select_measurements(&[3]).is_err());
    }

    #[test]
    fn condition_table_shape_and_csv() {
        let mesh = generate_disk_mesh(120).unwrap();
        let sigma = default_phantom().on_mesh(&mesh);
        let settings = TableSettings {
            alphas: vec![TAU, PI],
            ..Default::default()
        };
        let table = condition_table(&mesh, &sigma, &settings).unwrap();
        assert_eq!(table.entries.len(), 14);
        assert!(table.entries.iter().all(|e| e.condition >= 1.0));
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 15);
        assert!(csv.starts_with("measurements,functions,alpha,condition\n3,1;2;3,"));
        assert!(table.get(PI, &[2, 3]).is_some());
    }
}
