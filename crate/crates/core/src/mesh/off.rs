//! ASCII OFF reading and writing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{SurfaceMesh, Vec3};
use crate::error::{Error, Result};

pub fn load_mesh(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_off(BufReader::new(file), path)
}

pub fn save_mesh(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_off(mesh, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes positions with shortest round-trip formatting, so reading back is lossless.
pub fn write_off(mesh: &SurfaceMesh, w: &mut impl Write) -> Result<()> {
    writeln!(w, "OFF")?;
    writeln!(
        w,
        "{} {} {}",
        mesh.num_vertices(),
        mesh.num_faces(),
        mesh.num_edges()
    )?;
    for p in mesh.vertices() {
        writeln!(w, "{:?} {:?} {:?}", p.x, p.y, p.z)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Parses an OFF stream; `path` is only used in error messages.
pub fn read_off(reader: impl BufRead, path: &Path) -> Result<SurfaceMesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    // Content lines with comments stripped, tagged with 1-based line numbers.
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim().to_string();
        if !content.is_empty() {
            lines.push((i + 1, content));
        }
    }
    let mut it = lines.into_iter();

    let (ln, header) = it.next().ok_or_else(|| err(1, "empty file".into()))?;
    let rest = match header.strip_prefix("OFF") {
        Some(stripped) => stripped.trim(),
        None => return Err(err(ln, format!("expected 'OFF' header, found '{header}'"))),
    };
    let (ln, counts) = if rest.is_empty() {
        it.next()
            .ok_or_else(|| err(ln, "missing counts line".into()))?
    } else {
        (ln, rest.to_string())
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|s| {
            s.parse()
                .map_err(|_| err(ln, format!("invalid count '{s}'")))
        })
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(err(ln, "counts line needs vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = it
            .next()
            .ok_or_else(|| err(ln, "unexpected end of file in vertex list".into()))?;
        let xs: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|s| {
                s.parse()
                    .map_err(|_| err(ln, format!("invalid coordinate '{s}'")))
            })
            .collect::<Result<_>>()?;
        if xs.len() != 3 {
            return Err(err(ln, "vertex line needs three coordinates".into()));
        }
        vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, line) = it
            .next()
            .ok_or_else(|| err(ln, "unexpected end of file in face list".into()))?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|s| {
                s.parse()
                    .map_err(|_| err(ln, format!("invalid index '{s}'")))
            })
            .collect::<Result<_>>()?;
        if ids.first() != Some(&3) || ids.len() < 4 {
            return Err(err(
                ln,
                "only triangular faces ('3 i j k') are supported".into(),
            ));
        }
        triangles.push([ids[1], ids[2], ids[3]]);
    }
    SurfaceMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_torus;

    fn parse(text: &str) -> Result<SurfaceMesh> {
        read_off(text.as_bytes(), Path::new("test.off"))
    }

    #[test]
    fn round_trip_is_identical() {
        let mesh = generate_torus(2.0, 0.5, 17, 7).unwrap();
        let mut buf = Vec::new();
        write_off(&mesh, &mut buf).unwrap();
        let back = read_off(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back.vertices(), mesh.vertices());
        assert_eq!(back.triangles(), mesh.triangles());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.off");
        let mesh = generate_torus(2.0, 0.5, 8, 5).unwrap();
        save_mesh(&mesh, &path).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(back.fingerprint(), mesh.fingerprint());
    }

    const TET: &str = "OFF\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n";

    #[test]
    fn tetrahedron_with_comments() {
        let text = format!("# a comment\n{TET}3 0 1 2\n3 0 3 1 # trailing\n3 0 2 3\n3 1 3 2\n");
        assert_eq!(parse(&text).unwrap().euler_characteristic(), 2);
    }

    #[test]
    fn edge_with_three_faces_is_non_manifold() {
        let text = String::from("OFF\n5 5 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 3 3\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n3 1 0 4\n");
        assert!(matches!(
            parse(&text),
            Err(Error::NonManifold { count: 3, .. })
        ));
    }

    #[test]
    fn flipped_face_is_rejected() {
        let text = format!("{TET}3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 2 3\n");
        assert!(matches!(parse(&text), Err(Error::Orientation { .. })));
    }

    #[test]
    fn parse_errors_report_lines() {
        let text = format!("{TET}3 0 1 x\n");
        match parse(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("PLY\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse("OFF\n4 4 6\n1 1 1\n"),
            Err(Error::Parse { .. })
        ));
    }
}
