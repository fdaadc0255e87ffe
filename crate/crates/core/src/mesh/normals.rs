use super::{LevelSetNTorus, SurfaceMesh, Vec3};
use crate::error::{Error, Result};

/// Unit vertex normals.
///
/// With a level set the normals are `grad L / |grad L|`; otherwise they are the
/// angle-weighted average of incident face normals. Either way the result is
/// checked to agree with the face orientation on average.
pub fn vertex_normals(mesh: &SurfaceMesh, ls: Option<&LevelSetNTorus>) -> Result<Vec<Vec3>> {
    let normals = match ls {
        Some(ls) => mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let g = ls.eval(p).1;
                let n = g.norm();
                if n > 0.0 && n.is_finite() {
                    Ok(g / n)
                } else {
                    Err(Error::Geometry(format!(
                        "level-set gradient vanishes at vertex {i}"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?,
        None => angle_weighted(mesh)?,
    };

    let mut agreement = 0.0;
    for (t, (n, &a)) in mesh
        .triangles()
        .iter()
        .zip(mesh.face_normals().iter().zip(mesh.face_areas()))
    {
        let avg = normals[t[0]] + normals[t[1]] + normals[t[2]];
        agreement += a * avg.dot(n);
    }
    if !(agreement > 0.0) {
        return Err(Error::Geometry(
            "vertex normals disagree with the face orientation".into(),
        ));
    }
    Ok(normals)
}

fn angle_weighted(mesh: &SurfaceMesh) -> Result<Vec<Vec3>> {
    let mut acc = vec![Vec3::zeros(); mesh.num_vertices()];
    for ((t, n), angles) in mesh
        .triangles()
        .iter()
        .zip(mesh.face_normals())
        .zip(mesh.corner_angles())
    {
        for k in 0..3 {
            acc[t[k]] += n * angles[k];
        }
    }
    acc.into_iter()
        .enumerate()
        .map(|(i, n)| {
            let len = n.norm();
            if len > 0.0 {
                Ok(n / len)
            } else {
                Err(Error::Geometry(format!(
                    "vertex {i} has a vanishing normal"
                )))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_icosphere, generate_torus, Axis};

    fn max_angle(a: &[Vec3], b: &[Vec3]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.cross(y).norm().atan2(x.dot(y)))
            .fold(0.0, f64::max)
    }

    #[test]
    fn analytic_normal_on_outer_equator() {
        let mesh = generate_torus(2.0, 0.5, 16, 8).unwrap();
        let ls = LevelSetNTorus::single(2.0, 0.5, Axis::Y).unwrap();
        let n = vertex_normals(&mesh, Some(&ls)).unwrap();
        // Vertex 0 is (2.5, 0, 0).
        assert!((n[0] - Vec3::x()).norm() < 1e-14);
        for v in &n {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn discrete_normals_converge_at_second_order_on_torus() {
        let ls = LevelSetNTorus::single(2.0, 0.5, Axis::Y).unwrap();
        let errs: Vec<f64> = [(32, 8), (64, 16), (128, 32)]
            .iter()
            .map(|&(a, b)| {
                let mesh = generate_torus(2.0, 0.5, a, b).unwrap();
                let d = vertex_normals(&mesh, None).unwrap();
                let e = vertex_normals(&mesh, Some(&ls)).unwrap();
                max_angle(&d, &e)
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.7, "{errs:?}");
        }
    }

    #[test]
    fn sphere_normals_are_radial() {
        // Valence-5 vertices of the icosphere limit the rate to first order.
        let errs: Vec<f64> = (2..6)
            .map(|level| {
                let mesh = generate_icosphere(1.0, level).unwrap();
                let n = vertex_normals(&mesh, None).unwrap();
                let radial: Vec<Vec3> = mesh.vertices().iter().map(|p| p.normalize()).collect();
                max_angle(&n, &radial)
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 0.9, "{errs:?}");
        }
        assert!(errs[3] < 2e-3);
    }
}
