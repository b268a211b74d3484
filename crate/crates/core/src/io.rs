//! Plain-text file formats.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces every coefficient bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::illposed::SvdReport;
use crate::inversion::IterationLog;
use crate::mesh::{BoundaryEdge, Mesh};

pub const FIELD_HEADER: &str = "x,y,value";

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: '{s}'")))
}

fn parse_usize(path: &Path, line: usize, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("not an index: '{s}'")))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

pub fn field_csv(mesh: &Mesh, field: &NodalField) -> Result<String> {
    field.check_mesh(mesh)?;
    let mut out = String::with_capacity(48 * field.len());
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (p, v) in mesh.vertices().iter().zip(field.values()) {
        let _ = writeln!(out, "{},{},{}", p[0], p[1], v);
    }
    Ok(out)
}

pub fn write_field_csv(path: &Path, mesh: &Mesh, field: &NodalField) -> Result<()> {
    write(path, &field_csv(mesh, field)?)
}

/// Reads a field CSV, returning vertex coordinates and values in file order.
pub fn read_field_csv(path: &Path) -> Result<(Vec<[f64; 2]>, NodalField)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == FIELD_HEADER => {}
        _ => return Err(parse_err(path, 1, format!("expected header '{FIELD_HEADER}'"))),
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(path, i + 1, "expected three columns"));
        }
        points.push([parse_f64(path, i + 1, cols[0])?, parse_f64(path, i + 1, cols[1])?]);
        values.push(parse_f64(path, i + 1, cols[2])?);
    }
    let field = NodalField::new(values).map_err(|e| parse_err(path, 0, e.to_string()))?;
    Ok((points, field))
}

/// Reads a field CSV and checks that its vertices are those of `mesh`.
pub fn read_field_on_mesh(path: &Path, mesh: &Mesh) -> Result<NodalField> {
    let (points, field) = read_field_csv(path)?;
    field.check_mesh(mesh)?;
    if let Some(i) = points
        .iter()
        .zip(mesh.vertices())
        .position(|(a, b)| (a[0] - b[0]).abs() > 1e-12 || (a[1] - b[1]).abs() > 1e-12)
    {
        return Err(parse_err(path, i + 2, "vertex does not match the mesh"));
    }
    Ok(field)
}

/// Legacy VTK unstructured grid with one point-data scalar per field.
pub fn vtk_string(mesh: &Mesh, title: &str, fields: &[(&str, &NodalField)]) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(out, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} 0", p[0], p[1]);
    }
    let t = mesh.num_triangles();
    let _ = writeln!(out, "CELLS {} {}", t, 4 * t);
    for tri in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", tri[0], tri[1], tri[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {t}");
    for _ in 0..t {
        out.push_str("5\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(out, "POINT_DATA {}", mesh.num_vertices());
    }
    for (name, field) in fields {
        field.check_mesh(mesh)?;
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("invalid VTK field name '{name}'")));
        }
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in field.values() {
            let _ = writeln!(out, "{v}");
        }
    }
    Ok(out)
}

pub fn write_vtk(path: &Path, mesh: &Mesh, title: &str, fields: &[(&str, &NodalField)]) -> Result<()> {
    write(path, &vtk_string(mesh, title, fields)?)
}

/// Mesh text format:
///
/// ```text
/// vertices N triangles T boundary_edges B
/// x y            (N lines)
/// i j k          (T lines)
/// i j theta_mid  (B lines)
/// ```
pub fn mesh_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "vertices {} triangles {} boundary_edges {}",
        mesh.num_vertices(),
        mesh.num_triangles(),
        mesh.boundary_edges().len()
    );
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {}", p[0], p[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    for e in mesh.boundary_edges() {
        let _ = writeln!(out, "{} {} {}", e.start, e.end, e.theta_mid);
    }
    out
}

pub fn write_mesh(path: &Path, mesh: &Mesh) -> Result<()> {
    write(path, &mesh_string(mesh))
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty mesh file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 || h[0] != "vertices" || h[2] != "triangles" || h[4] != "boundary_edges" {
        return Err(parse_err(
            path,
            1,
            "expected 'vertices N triangles T boundary_edges B'",
        ));
    }
    let (nv, nt, nb) = (
        parse_usize(path, 1, h[1])?,
        parse_usize(path, 1, h[3])?,
        parse_usize(path, 1, h[5])?,
    );
    let mut next = |expected: usize| -> Result<(usize, Vec<String>)> {
        let (i, l) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unexpected end of mesh file"))?;
        let cols: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
        if cols.len() != expected {
            return Err(parse_err(path, i + 1, format!("expected {expected} columns")));
        }
        Ok((i + 1, cols))
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (i, c) = next(2)?;
        vertices.push([parse_f64(path, i, &c[0])?, parse_f64(path, i, &c[1])?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (i, c) = next(3)?;
        triangles.push([
            parse_usize(path, i, &c[0])?,
            parse_usize(path, i, &c[1])?,
            parse_usize(path, i, &c[2])?,
        ]);
    }
    let mut edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (i, c) = next(3)?;
        edges.push(BoundaryEdge {
            start: parse_usize(path, i, &c[0])?,
            end: parse_usize(path, i, &c[1])?,
            theta_mid: parse_f64(path, i, &c[2])?,
        });
    }
    Mesh::from_parts(vertices, triangles, edges)
}

/// `k,residual,omega,rel_error`; absent values are empty cells.
pub fn iteration_log_csv(log: &IterationLog) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("k,residual,omega,rel_error\n");
    for r in &log.records {
        let _ = writeln!(out, "{},{},{},{}", r.k, r.residual, opt(r.omega), opt(r.rel_error));
    }
    out
}

/// `k,sigma_k` with 1-based `k`.
pub fn singular_values_csv(report: &SvdReport) -> String {
    let mut out = String::from("k,sigma_k\n");
    for (k, s) in report.singular_values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", k + 1, s);
    }
    out
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    write(path, contents)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::inversion::{IterationRecord, StopReason};
    use crate::mesh::generate_disk_mesh;

    #[test]
    fn field_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = generate_disk_mesh(200).unwrap();
        let field = NodalField::from_fn(&mesh, |p| (p[0] * 1e3).sin() / 3.0 + p[1] * 1e-300);
        let path = dir.path().join("sub/f.csv");
        write_field_csv(&path, &mesh, &field).unwrap();
        let back = read_field_on_mesh(&path, &mesh).unwrap();
        for (a, b) in field.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    proptest! {
        #[test]
        fn csv_floats_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            let mesh = generate_disk_mesh(10).unwrap();
            let field = NodalField::constant(&mesh, v);
            let text = field_csv(&mesh, &field).unwrap();
            let line = text.lines().nth(1).unwrap();
            let parsed: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            prop_assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn field_reader_rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "a,b,c\n").unwrap();
        assert_eq!(read_field_csv(&p).unwrap_err().kind(), "parse");
        fs::write(&p, "x,y,value\n0,0\n").unwrap();
        assert_eq!(read_field_csv(&p).unwrap_err().kind(), "parse");
        fs::write(&p, "x,y,value\n0,0,zz\n").unwrap();
        assert_eq!(read_field_csv(&p).unwrap_err().kind(), "parse");
    }

    #[test]
    fn mesh_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = generate_disk_mesh(300).unwrap();
        let path = dir.path().join("m.txt");
        write_mesh(&path, &mesh).unwrap();
        let back = read_mesh(&path).unwrap();
        assert_eq!(back.vertices(), mesh.vertices());
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.boundary_edges(), mesh.boundary_edges());
    }

    #[test]
    fn vtk_layout() {
        let mesh = generate_disk_mesh(50).unwrap();
        let f = NodalField::constant(&mesh, 1.5);
        let s = vtk_string(&mesh, "test", &[("sigma", &f)]).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[4], format!("POINTS {} double", mesh.num_vertices()));
        assert!(s.contains(&format!("CELLS {} {}", mesh.num_triangles(), 4 * mesh.num_triangles())));
        assert!(s.contains("SCALARS sigma double 1\nLOOKUP_TABLE default\n1.5\n"));
        let types = lines.iter().position(|l| l.starts_with("CELL_TYPES")).unwrap();
        assert!(lines[types + 1..=types + mesh.num_triangles()].iter().all(|l| *l == "5"));
        assert!(vtk_string(&mesh, "t", &[("bad name", &f)]).is_err());
    }

    #[test]
    fn log_csv() {
        let log = IterationLog {
            records: vec![
                IterationRecord {
                    k: 0,
                    residual: 2.0,
                    omega: Some(0.5),
                    rel_error: None,
                },
                IterationRecord {
                    k: 1,
                    residual: 1.0,
                    omega: None,
                    rel_error: None,
                },
            ],
            stop: StopReason::MaxIter,
        };
        assert_eq!(iteration_log_csv(&log), "k,residual,omega,rel_error\n0,2,0.5,\n1,1,,\n");
    }
}
