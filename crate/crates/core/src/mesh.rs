//! Conforming triangulations of the unit disk.
//!
//! The generator lays vertices out on concentric rings whose vertex counts
//! grow linearly with the radius and stitches neighbouring rings together
//! with a greedy angular sweep. Boundary vertices sit exactly on the unit
//! circle, starting at angle 0, so arcs `[0, alpha]` line up with vertices
//! whenever `alpha` is a multiple of the boundary spacing.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Smallest interior angle (degrees) accepted by [`generate_disk_mesh`].
pub const MIN_ANGLE_DEG: f64 = 15.0;

/// An edge on the outer boundary, oriented so the domain lies on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub start: usize,
    pub end: usize,
    /// Polar angle of the chord midpoint, in `[0, 2pi)`.
    pub theta_mid: f64,
}

impl BoundaryEdge {
    pub fn length(&self, mesh: &Mesh) -> f64 {
        let a = mesh.vertices[self.start];
        let b = mesh.vertices[self.end];
        (b[0] - a[0]).hypot(b[1] - a[1])
    }
}

/// Accessible part of the unit circle, `{theta in [0, alpha]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    alpha: f64,
}

impl BoundaryArc {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= TAU + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "arc angle must lie in (0, 2pi], got {alpha}"
            )));
        }
        Ok(Self {
            alpha: alpha.min(TAU),
        })
    }

    pub fn full() -> Self {
        Self { alpha: TAU }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Fraction of the circle that is accessible.
    pub fn fraction(&self) -> f64 {
        self.alpha / TAU
    }

    pub fn contains(&self, theta: f64) -> bool {
        (0.0..=self.alpha).contains(&theta)
    }
}

/// Per-triangle quantities that every assembly routine needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    pub area: f64,
    /// Constant gradients of the three local hat functions.
    pub grads: [[f64; 2]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    geometry: Vec<TriangleGeometry>,
    patch_area: Vec<f64>,
}

impl Mesh {
    /// Builds a mesh from vertices and counterclockwise triangles; the
    /// boundary edges are the edges used by exactly one triangle.
    pub fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let boundary_edges = detect_boundary(&triangles)?
            .into_iter()
            .map(|(start, end)| BoundaryEdge {
                start,
                end,
                theta_mid: midpoint_angle(vertices[start], vertices[end]),
            })
            .collect();
        Self::from_parts(vertices, triangles, boundary_edges)
    }

    /// Builds a mesh with explicitly supplied boundary edges, checking them
    /// against the triangulation.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        if vertices.len() < 3 || triangles.is_empty() {
            return Err(Error::Mesh("mesh needs at least one triangle".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Mesh("non-finite vertex coordinate".into()));
        }
        let mut geometry = Vec::with_capacity(triangles.len());
        let mut patch_area = vec![0.0; vertices.len()];
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} is degenerate")));
            }
            let geo = triangle_geometry([vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
            if !(geo.area > 0.0) {
                return Err(Error::Mesh(format!(
                    "triangle {t} has non-positive signed area {}",
                    geo.area
                )));
            }
            for &v in tri {
                patch_area[v] += geo.area;
            }
            geometry.push(geo);
        }
        if let Some(v) = patch_area.iter().position(|&a| a == 0.0) {
            return Err(Error::Mesh(format!("vertex {v} belongs to no triangle")));
        }

        let mut detected = detect_boundary(&triangles)?;
        detected.sort_unstable();
        let mut given: Vec<(usize, usize)> =
            boundary_edges.iter().map(|e| (e.start, e.end)).collect();
        given.sort_unstable();
        if detected != given {
            return Err(Error::Mesh(
                "boundary edges do not match the edges used by a single triangle".into(),
            ));
        }

        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
            geometry,
            patch_area,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn geometry(&self) -> &[TriangleGeometry] {
        &self.geometry
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Total area of the triangles incident to each vertex.
    pub fn patch_area(&self) -> &[f64] {
        &self.patch_area
    }

    pub fn area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Number of distinct edges.
    pub fn num_edges(&self) -> usize {
        let interior = 3 * self.triangles.len() - self.boundary_edges.len();
        interior / 2 + self.boundary_edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| min_angle([self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]))
            .fold(f64::INFINITY, f64::min)
            .to_degrees()
    }

    /// Vertices that are endpoints of at least one boundary edge.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut on = vec![false; self.num_vertices()];
        for e in &self.boundary_edges {
            on[e.start] = true;
            on[e.end] = true;
        }
        (0..on.len()).filter(|&v| on[v]).collect()
    }

    /// Indices of the boundary edges whose midpoint angle lies in `[0, alpha]`.
    pub fn accessible_boundary_edges(&self, arc: &BoundaryArc) -> Vec<usize> {
        self.boundary_edges
            .iter()
            .enumerate()
            .filter(|(_, e)| arc.contains(e.theta_mid))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Free function form of [`Mesh::accessible_boundary_edges`].
pub fn accessible_boundary_edges(mesh: &Mesh, arc: &BoundaryArc) -> Vec<usize> {
    mesh.accessible_boundary_edges(arc)
}

fn triangle_geometry(p: [Point; 3]) -> TriangleGeometry {
    let d1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
    let d2 = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
    let det = d1[0] * d2[1] - d1[1] * d2[0];
    let area = 0.5 * det;
    // grad(phi_k) = rot90(opposite edge) / (2 area)
    let mut grads = [[0.0; 2]; 3];
    for k in 0..3 {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        grads[k] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
    }
    TriangleGeometry { area, grads }
}

fn min_angle(p: [Point; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let o = p[k];
            let a = p[(k + 1) % 3];
            let b = p[(k + 2) % 3];
            let u = [a[0] - o[0], a[1] - o[1]];
            let v = [b[0] - o[0], b[1] - o[1]];
            let cross = u[0] * v[1] - u[1] * v[0];
            let dot = u[0] * v[0] + u[1] * v[1];
            cross.abs().atan2(dot)
        })
        .fold(f64::INFINITY, f64::min)
}

fn midpoint_angle(a: Point, b: Point) -> f64 {
    let th = (0.5 * (a[1] + b[1])).atan2(0.5 * (a[0] + b[0]));
    if th < 0.0 {
        th + TAU
    } else {
        th
    }
}

/// Directed boundary edges (edges owned by a single triangle), in triangle order.
fn detect_boundary(triangles: &[[usize; 3]]) -> Result<Vec<(usize, usize)>> {
    let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
    let mut order = Vec::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let entry = count.entry(key).or_insert_with(|| {
                order.push(key);
                (0, (a, b))
            });
            entry.0 += 1;
        }
    }
    let mut boundary = Vec::new();
    for key in order {
        let (n, directed) = count[&key];
        match n {
            1 => boundary.push(directed),
            2 => {}
            _ => {
                return Err(Error::Mesh(format!(
                    "edge ({}, {}) is shared by {n} triangles",
                    key.0, key.1
                )))
            }
        }
    }
    Ok(boundary)
}

/// Ring layout: `rings` concentric rings, ring `k` holding `base * k` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingLayout {
    pub rings: usize,
    pub base: usize,
}

impl RingLayout {
    pub fn num_vertices(&self) -> usize {
        1 + self.base * self.rings * (self.rings + 1) / 2
    }

    pub fn boundary_segments(&self) -> usize {
        self.base * self.rings
    }

    /// Picks the layout whose vertex count is closest to `target`, preferring
    /// six vertices on the innermost ring (near-equilateral elements).
    pub fn for_target(target: usize) -> Result<Self> {
        if target < 4 {
            return Err(Error::InvalidArgument(format!(
                "target vertex count must be at least 4, got {target}"
            )));
        }
        let max_rings = ((2 * target) as f64).sqrt() as usize + 2;
        let mut best: Option<(f64, RingLayout)> = None;
        for rings in 1..=max_rings {
            let bases = if rings == 1 { 3..=8 } else { 4..=8 };
            for base in bases {
                let layout = RingLayout { rings, base };
                let miss = (layout.num_vertices() as f64 - target as f64).abs() / target as f64;
                let score = miss + 0.02 * (base as f64 - 6.0).abs();
                if best.is_none_or(|(s, _)| score < s) {
                    best = Some((score, layout));
                }
            }
        }
        Ok(best.expect("non-empty search").1)
    }
}

/// Deterministic ring mesh of the unit disk with roughly `target_vertex_count`
/// vertices.
pub fn generate_disk_mesh(target_vertex_count: usize) -> Result<Mesh> {
    let layout = RingLayout::for_target(target_vertex_count)?;
    let mesh = ring_mesh(layout)?;
    let min_angle = mesh.min_angle_deg();
    if min_angle <= MIN_ANGLE_DEG {
        return Err(Error::Mesh(format!(
            "generated mesh violates the {MIN_ANGLE_DEG} degree quality floor (min angle {min_angle:.2})"
        )));
    }
    Ok(mesh)
}

pub fn ring_mesh(layout: RingLayout) -> Result<Mesh> {
    let RingLayout { rings, base } = layout;
    if rings == 0 || base < 3 {
        return Err(Error::InvalidArgument(format!("invalid ring layout {layout:?}")));
    }
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    for k in 1..=rings {
        ring_start.push(vertices.len());
        let count = base * k;
        let radius = k as f64 / rings as f64;
        for i in 0..count {
            let th = TAU * i as f64 / count as f64;
            if k == rings {
                vertices.push([th.cos(), th.sin()]);
            } else {
                vertices.push([radius * th.cos(), radius * th.sin()]);
            }
        }
    }

    let mut triangles = Vec::new();
    for i in 0..base {
        triangles.push([0, ring_start[1] + i, ring_start[1] + (i + 1) % base]);
    }
    for k in 2..=rings {
        stitch_rings(
            ring_start[k - 1],
            base * (k - 1),
            ring_start[k],
            base * k,
            &mut triangles,
        );
    }

    let outer = ring_start[rings];
    let count = base * rings;
    let boundary_edges = (0..count)
        .map(|i| {
            let start = outer + i;
            let end = outer + (i + 1) % count;
            BoundaryEdge {
                start,
                end,
                theta_mid: PI * (2 * i + 1) as f64 / count as f64,
            }
        })
        .collect();
    Mesh::from_parts(vertices, triangles, boundary_edges)
}

/// Greedy sweep between an inner ring of `n_in` and an outer ring of `n_out`
/// vertices, both starting at angle 0.
fn stitch_rings(
    in_start: usize,
    n_in: usize,
    out_start: usize,
    n_out: usize,
    triangles: &mut Vec<[usize; 3]>,
) {
    let angle = |idx: usize, n: usize| TAU * idx as f64 / n as f64;
    let (mut i, mut o) = (0usize, 0usize);
    while i < n_in || o < n_out {
        let next_in = angle(i + 1, n_in);
        let next_out = angle(o + 1, n_out);
        let advance_outer = i == n_in || (o < n_out && next_out <= next_in);
        if advance_outer {
            triangles.push([
                in_start + i % n_in,
                out_start + o % n_out,
                out_start + (o + 1) % n_out,
            ]);
            o += 1;
        } else {
            triangles.push([
                in_start + i % n_in,
                out_start + o % n_out,
                in_start + (i + 1) % n_in,
            ]);
            i += 1;
        }
    }
}

/// Barycentric point location on a mesh, bucketed on a uniform grid.
pub struct PointLocator<'m> {
    mesh: &'m Mesh,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'m> PointLocator<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let side = ((mesh.num_triangles() as f64).sqrt().ceil() as usize).max(1);
        let cell = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / side as f64).max(f64::EPSILON);
        let nx = ((hi[0] - lo[0]) / cell) as usize + 1;
        let ny = ((hi[1] - lo[1]) / cell) as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let (mut tlo, mut thi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &v in tri {
                for d in 0..2 {
                    tlo[d] = tlo[d].min(mesh.vertices()[v][d]);
                    thi[d] = thi[d].max(mesh.vertices()[v][d]);
                }
            }
            let (x0, y0) = Self::cell_of(lo, cell, nx, ny, tlo);
            let (x1, y1) = Self::cell_of(lo, cell, nx, ny, thi);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    buckets[y * nx + x].push(t);
                }
            }
        }
        Self {
            mesh,
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn cell_of(origin: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let x = ((p[0] - origin[0]) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let y = ((p[1] - origin[1]) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (x, y)
    }

    fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let tri = self.mesh.triangles()[t];
        let geo = &self.mesh.geometry()[t];
        // lambda_k is affine with gradient grads[k] and lambda_k(vertex k) = 1
        let mut lam = [0.0; 3];
        for k in 0..3 {
            let vk = self.mesh.vertices()[tri[k]];
            lam[k] = 1.0 + geo.grads[k][0] * (p[0] - vk[0]) + geo.grads[k][1] * (p[1] - vk[1]);
        }
        lam
    }

    /// Triangle index and barycentric weights of `p`. Points outside the mesh
    /// (e.g. on the true circle between chord endpoints) snap to the nearest
    /// triangle with clamped weights.
    pub fn locate(&self, p: Point) -> (usize, [f64; 3]) {
        let (cx, cy) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, p);
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for radius in 0..self.nx.max(self.ny) {
            let (x0, x1) = (cx.saturating_sub(radius), (cx + radius).min(self.nx - 1));
            let (y0, y1) = (cy.saturating_sub(radius), (cy + radius).min(self.ny - 1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if radius > 0 && x != x0 && x != x1 && y != y0 && y != y1 {
                        continue;
                    }
                    for &t in &self.buckets[y * self.nx + x] {
                        let lam = self.barycentric(t, p);
                        let violation = lam.iter().map(|&l| (-l).max(0.0)).sum::<f64>();
                        if violation <= 1e-12 {
                            return (t, lam);
                        }
                        if best.is_none_or(|(b, _, _)| violation < b) {
                            best = Some((violation, t, lam));
                        }
                    }
                }
            }
            if best.is_some() && radius >= 1 {
                break;
            }
        }
        let (_, t, lam) = best.expect("mesh has at least one triangle");
        let clamped = lam.map(|l| l.max(0.0));
        let s: f64 = clamped.iter().sum();
        (t, clamped.map(|l| l / s))
    }

    /// Evaluates a piecewise-linear vertex field at `p`.
    pub fn interpolate(&self, values: &[f64], p: Point) -> f64 {
        let (t, lam) = self.locate(p);
        let tri = self.mesh.triangles()[t];
        (0..3).map(|k| lam[k] * values[tri[k]]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_triangle() -> Mesh {
        Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn reference_triangle_gradients() {
        let m = reference_triangle();
        let g = m.geometry()[0];
        assert_eq!(g.area, 0.5);
        assert_eq!(g.grads, [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.boundary_edges().len(), 3);
    }

    #[test]
    fn rejects_tiny_target() {
        assert!(matches!(generate_disk_mesh(3), Err(Error::InvalidArgument(_))));
        let m = generate_disk_mesh(4).unwrap();
        assert_eq!(m.num_vertices(), 4);
    }

    #[test]
    fn rejects_clockwise_triangle() {
        let r = Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]);
        assert!(matches!(r, Err(Error::Mesh(_))));
    }

    #[test]
    fn rejects_nonmanifold_edge() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]];
        let t = vec![[0, 1, 2], [0, 3, 1], [0, 1, 4]];
        assert!(Mesh::from_triangles(v, t).is_err());
    }

    #[test]
    fn paper_scale_mesh() {
        let m = generate_disk_mesh(2000).unwrap();
        let v = m.num_vertices();
        assert!((1600..=2400).contains(&v), "{v}");
        assert_eq!(m.euler_characteristic(), 1);
        assert!(m.area() < PI);
        // inscribed polygon with N sides: area defect pi - N/2 sin(2pi/N)
        let n = m.boundary_edges().len() as f64;
        let polygon = 0.5 * n * (TAU / n).sin();
        assert!((m.area() - polygon).abs() < 1e-10);
        assert!((PI - m.area()) / PI < 5e-3);
        for b in m.boundary_vertices() {
            let p = m.vertices()[b];
            assert!((p[0].hypot(p[1]) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn mesh_is_deterministic() {
        assert_eq!(generate_disk_mesh(777).unwrap(), generate_disk_mesh(777).unwrap());
    }

    #[test]
    fn quality_across_targets() {
        for target in [4, 5, 7, 10, 19, 30, 50, 100, 250, 500, 1000, 2000, 5000, 8000] {
            let m = generate_disk_mesh(target).unwrap();
            let v = m.num_vertices() as f64;
            if target >= 50 {
                assert!((v - target as f64).abs() <= 0.2 * target as f64, "{target} -> {v}");
            }
            assert_eq!(m.euler_characteristic(), 1);
            assert!(m.min_angle_deg() > MIN_ANGLE_DEG);
        }
    }

    #[test]
    fn arc_selection() {
        let m = ring_mesh(RingLayout { rings: 60, base: 6 }).unwrap();
        assert_eq!(m.boundary_edges().len(), 360);
        let all = m.accessible_boundary_edges(&BoundaryArc::full());
        assert_eq!(all.len(), 360);
        let half = m.accessible_boundary_edges(&BoundaryArc::new(PI).unwrap());
        assert_eq!(half.len(), 180);
        // oracle: enumerate midpoint angles directly
        let quarter = m.accessible_boundary_edges(&BoundaryArc::new(PI / 2.0).unwrap());
        let expected = (0..360)
            .filter(|i| (2 * i + 1) as f64 * PI / 360.0 <= PI / 2.0)
            .count();
        assert_eq!(quarter.len(), expected);
        assert!((quarter.len() as i64 - 90).abs() <= 1);
    }

    #[test]
    fn arc_validation() {
        assert!(BoundaryArc::new(0.0).is_err());
        assert!(BoundaryArc::new(7.0).is_err());
        assert!(BoundaryArc::new(TAU).is_ok());
    }

    #[test]
    fn locator_reproduces_linear_fields() {
        let m = generate_disk_mesh(300).unwrap();
        let loc = PointLocator::new(&m);
        let f: Vec<f64> = m.vertices().iter().map(|p| 2.0 * p[0] - p[1] + 0.5).collect();
        for p in [[0.1, 0.2], [-0.7, 0.3], [0.0, -0.95], [0.5, 0.5]] {
            let val = loc.interpolate(&f, p);
            assert!((val - (2.0 * p[0] - p[1] + 0.5)).abs() < 1e-12);
        }
        // point on the circle, outside the inscribed polygon
        let th: f64 = 0.0123;
        let val = loc.interpolate(&f, [th.cos(), th.sin()]);
        assert!((val - (2.0 * th.cos() - th.sin() + 0.5)).abs() < 1e-2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn arcs_are_nested(a in 0.01f64..TAU, b in 0.01f64..TAU) {
                let m = generate_disk_mesh(400).unwrap();
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let small = m.accessible_boundary_edges(&BoundaryArc::new(lo).unwrap());
                let large = m.accessible_boundary_edges(&BoundaryArc::new(hi).unwrap());
                prop_assert!(small.iter().all(|e| large.contains(e)));
            }
        }
    }
}
