//! Legacy ASCII VTK polydata snapshots.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context};
use surfflow::{SurfaceMesh, VectorField3};

/// Renders a snapshot with point data `velocity`, `pressure` and `vorticity`.
pub fn render(
    mesh: &SurfaceMesh,
    velocity: &VectorField3,
    pressure: &[f64],
    vorticity: &[f64],
    title: &str,
) -> String {
    let n = mesh.num_vertices();
    assert!(velocity.len() == n && pressure.len() == n && vorticity.len() == n);
    let mut s = String::with_capacity(64 * n);
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "{}", title.replace('\n', " ")).unwrap();
    s.push_str("ASCII\nDATASET POLYDATA\n");
    writeln!(s, "POINTS {n} double").unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{} {} {}", p.x, p.y, p.z).unwrap();
    }
    let f = mesh.num_faces();
    writeln!(s, "POLYGONS {f} {}", 4 * f).unwrap();
    for t in mesh.triangles() {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "POINT_DATA {n}").unwrap();
    s.push_str("VECTORS velocity double\n");
    for a in 0..n {
        let v = velocity.at(a);
        writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    for (name, data) in [("pressure", pressure), ("vorticity", vorticity)] {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for x in data {
            writeln!(s, "{x}").unwrap();
        }
    }
    s
}

pub fn write(
    path: &Path,
    mesh: &SurfaceMesh,
    velocity: &VectorField3,
    pressure: &[f64],
    vorticity: &[f64],
    title: &str,
) -> anyhow::Result<()> {
    std::fs::write(path, render(mesh, velocity, pressure, vorticity, title))
        .with_context(|| format!("writing {}", path.display()))
}

/// Counts found by [`check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VtkSummary {
    pub points: usize,
    pub polygons: usize,
    pub arrays: Vec<String>,
}

/// Structural check of a polydata file: counts agree, indices are in range
/// and every point array has one finite entry per point.
pub fn check(text: &str) -> anyhow::Result<VtkSummary> {
    let mut lines = text.lines();
    ensure!(
        lines
            .next()
            .is_some_and(|l| l.starts_with("# vtk DataFile")),
        "missing VTK header"
    );
    lines.next().context("missing title line")?;
    ensure!(lines.next() == Some("ASCII"), "not an ASCII file");
    ensure!(
        lines.next() == Some("DATASET POLYDATA"),
        "not a polydata dataset"
    );
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut next = || tokens.next().context("unexpected end of file");

    ensure!(next()? == "POINTS", "expected POINTS");
    let points: usize = next()?.parse()?;
    next()?;
    for _ in 0..3 * points {
        ensure!(next()?.parse::<f64>()?.is_finite(), "non-finite coordinate");
    }
    ensure!(next()? == "POLYGONS", "expected POLYGONS");
    let polygons: usize = next()?.parse()?;
    let size: usize = next()?.parse()?;
    let mut read = 0;
    for _ in 0..polygons {
        let k: usize = next()?.parse()?;
        read += k + 1;
        for _ in 0..k {
            let i: usize = next()?.parse()?;
            ensure!(i < points, "polygon index {i} out of range");
        }
    }
    ensure!(
        read == size,
        "polygon size {size} does not match the {read} entries read"
    );
    ensure!(next()? == "POINT_DATA", "expected POINT_DATA");
    ensure!(
        next()?.parse::<usize>()? == points,
        "POINT_DATA count differs from POINTS"
    );
    let mut arrays = Vec::new();
    loop {
        let kind = match next() {
            Ok(k) => k,
            Err(_) => break,
        };
        let name = next()?.to_string();
        next()?;
        let width = match kind {
            "VECTORS" => 3,
            "SCALARS" => {
                let c: usize = next()?.parse()?;
                ensure!(next()? == "LOOKUP_TABLE", "expected LOOKUP_TABLE");
                next()?;
                c
            }
            other => bail!("unsupported point data section {other}"),
        };
        for _ in 0..width * points {
            ensure!(
                next()?.parse::<f64>()?.is_finite(),
                "non-finite value in {name}"
            );
        }
        arrays.push(name);
    }
    Ok(VtkSummary {
        points,
        polygons,
        arrays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use surfflow::mesh::generate_torus;

    #[test]
    fn snapshot_passes_structural_check() {
        let mesh = generate_torus(2.0, 0.5, 8, 4).unwrap();
        let n = mesh.num_vertices();
        let v =
            VectorField3::from_interleaved(&(0..3 * n).map(|i| i as f64 * 0.1).collect::<Vec<_>>());
        let text = render(&mesh, &v, &vec![1.5; n], &vec![-0.25; n], "t=0");
        let s = check(&text).unwrap();
        assert_eq!(s.points, 32);
        assert_eq!(s.polygons, 64);
        assert_eq!(s.arrays, ["velocity", "pressure", "vorticity"]);
    }

    #[test]
    fn check_rejects_broken_files() {
        let mesh = generate_torus(2.0, 0.5, 8, 4).unwrap();
        let n = mesh.num_vertices();
        let text = render(
            &mesh,
            &VectorField3::zeros(n),
            &vec![0.0; n],
            &vec![0.0; n],
            "x",
        );
        let mut lines: Vec<&str> = text.lines().collect();
        let k = lines
            .iter()
            .position(|l| l.starts_with("POLYGONS"))
            .unwrap();
        lines[k + 1] = "3 0 1 99";
        let bad_index = lines.join("\n");
        assert!(check(&bad_index).is_err());
        let bad_count = text.replacen("POINT_DATA 32", "POINT_DATA 31", 1);
        assert!(check(&bad_count).is_err());
        let truncated = &text[..text.len() - 20];
        assert!(check(truncated).is_err());
        let nan = text.replacen("LOOKUP_TABLE default\n0", "LOOKUP_TABLE default\nNaN", 1);
        assert!(check(&nan).is_err());
    }
}
