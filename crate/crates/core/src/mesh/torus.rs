use std::f64::consts::TAU;

use super::{SurfaceMesh, Vec3};
use crate::error::{Error, Result};

/// Structured torus whose tube circles the y-axis.
///
/// Vertex `(i, j)` sits at major angle `phi_i = 2 pi i / n_major` and minor
/// angle `theta_j = 2 pi j / n_minor`:
/// `x = (rho cos phi, r sin theta, rho sin phi)` with `rho = R + r cos theta`.
/// Every quad is split into two triangles with outward normals.
pub fn generate_torus(
    major: f64,
    minor: f64,
    n_major: usize,
    n_minor: usize,
) -> Result<SurfaceMesh> {
    if n_major < 3 || n_minor < 3 {
        return Err(Error::Parameter(format!(
            "torus resolution must be at least 3 x 3, got {n_major} x {n_minor}"
        )));
    }
    if !(major > minor && minor > 0.0) || !major.is_finite() {
        return Err(Error::Parameter(format!(
            "torus radii must satisfy R > r > 0, got R = {major}, r = {minor}"
        )));
    }
    let mut vertices = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        let phi = TAU * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let theta = TAU * j as f64 / n_minor as f64;
            let rho = major + minor * theta.cos();
            vertices.push(Vec3::new(
                rho * phi.cos(),
                minor * theta.sin(),
                rho * phi.sin(),
            ));
        }
    }
    let id = |i: usize, j: usize| (i % n_major) * n_minor + j % n_minor;
    let mut triangles = Vec::with_capacity(2 * n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            triangles.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    SurfaceMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Axis, LevelSetNTorus};
    use std::f64::consts::PI;

    #[test]
    fn counts_and_euler_characteristic() {
        let mesh = generate_torus(2.0, 0.5, 64, 16).unwrap();
        assert_eq!(mesh.num_vertices(), 1024);
        assert_eq!(mesh.num_faces(), 2048);
        assert_eq!(mesh.euler_characteristic(), 0);
        mesh.check_genus(1).unwrap();
    }

    #[test]
    fn vertices_lie_on_the_level_set() {
        let mesh = generate_torus(2.0, 0.5, 40, 12).unwrap();
        let ls = LevelSetNTorus::single(2.0, 0.5, Axis::Y).unwrap();
        for p in mesh.vertices() {
            assert!(ls.value(p).abs() < 1e-10 * 16.0);
        }
    }

    #[test]
    fn faces_point_away_from_the_tube_core() {
        let mesh = generate_torus(2.0, 0.5, 24, 8).unwrap();
        for (t, n) in mesh.triangles().iter().zip(mesh.face_normals()) {
            let c = (mesh.vertices()[t[0]] + mesh.vertices()[t[1]] + mesh.vertices()[t[2]]) / 3.0;
            let rho = c.x.hypot(c.z);
            let core = Vec3::new(2.0 * c.x / rho, 0.0, 2.0 * c.z / rho);
            assert!(n.dot(&(c - core)) > 0.0);
        }
    }

    #[test]
    fn area_converges_at_second_order() {
        let exact = 4.0 * PI * PI * 2.0 * 0.5;
        let errs: Vec<f64> = [(32, 8), (64, 16), (128, 32)]
            .iter()
            .map(|&(n, m)| (generate_torus(2.0, 0.5, n, m).unwrap().total_area() - exact).abs())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "observed order {order}");
        }
        assert!(errs[2] / exact < 1e-2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_torus(2.0, 0.5, 2, 8).is_err());
        assert!(generate_torus(0.5, 2.0, 8, 8).is_err());
        assert!(generate_torus(2.0, 0.0, 8, 8).is_err());
    }
}
