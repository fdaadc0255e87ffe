use std::collections::HashMap;

use super::{SurfaceMesh, Vec3};
use crate::error::{Error, Result};

/// Icosahedron subdivided `level` times, vertices pushed to the sphere of `radius`.
///
/// Has `10 * 4^level + 2` vertices.
pub fn generate_icosphere(radius: f64, level: usize) -> Result<SurfaceMesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Parameter(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    if level > 9 {
        return Err(Error::Parameter(format!(
            "subdivision level {level} is too large"
        )));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        let mut refined = Vec::with_capacity(4 * triangles.len());
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            refined.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = refined;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    SurfaceMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        for level in 0..4 {
            let m = generate_icosphere(1.0, level).unwrap();
            assert_eq!(m.num_vertices(), 10 * 4usize.pow(level as u32) + 2);
            assert_eq!(m.euler_characteristic(), 2);
        }
    }

    #[test]
    fn outward_and_on_sphere() {
        let m = generate_icosphere(2.0, 2).unwrap();
        for p in m.vertices() {
            assert!((p.norm() - 2.0).abs() < 1e-14);
        }
        for (t, n) in m.triangles().iter().zip(m.face_normals()) {
            assert!(n.dot(&m.vertices()[t[0]]) > 0.0);
        }
    }
}
