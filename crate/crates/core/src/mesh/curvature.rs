use std::f64::consts::TAU;

use super::{vertex_normals, Axis, LevelSetNTorus, SurfaceMesh};
use crate::error::{Error, Result};

/// Where vertex Gaussian curvature comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureSource {
    /// Closed form for a single origin-centred torus.
    AnalyticTorus { major: f64, minor: f64, axis: Axis },
    /// Implicit-surface formula evaluated on the level set the mesh was extracted from.
    AnalyticLevelSet(LevelSetNTorus),
    /// Angle defect over the lumped vertex area.
    DiscreteAngleDefect,
}

/// Per-vertex Gaussian curvature.
pub fn gaussian_curvature(mesh: &SurfaceMesh, source: &CurvatureSource) -> Result<Vec<f64>> {
    match source {
        CurvatureSource::AnalyticTorus { major, minor, axis } => mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let rho = axis.radial_distance(p);
                if rho == 0.0 {
                    return Err(Error::Geometry(format!(
                        "vertex {i} lies on the torus axis"
                    )));
                }
                Ok((rho - major) / (minor * minor * rho))
            })
            .collect(),
        CurvatureSource::AnalyticLevelSet(ls) => mesh
            .vertices()
            .iter()
            .map(|p| ls.gaussian_curvature(p))
            .collect(),
        CurvatureSource::DiscreteAngleDefect => Ok(angle_defects(mesh)
            .into_iter()
            .zip(mesh.lumped_areas())
            .map(|(d, a)| d / a)
            .collect()),
    }
}

/// `2 pi - sum of incident angles` per vertex.
pub fn angle_defects(mesh: &SurfaceMesh) -> Vec<f64> {
    mesh.vertex_angle_sums()
        .into_iter()
        .map(|s| TAU - s)
        .collect()
}

/// Mean curvature from the cotangent Laplacian of the embedding:
/// `H_i = (K x)_i . nu_i / A_i`. A sphere of radius `a` gives `2 / a`.
pub fn mean_curvature(mesh: &SurfaceMesh) -> Result<Vec<f64>> {
    let normals = vertex_normals(mesh, None)?;
    let p = mesh.vertices();
    let mut kx = vec![super::Vec3::zeros(); mesh.num_vertices()];
    for t in mesh.triangles() {
        for k in 0..3 {
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            // Cotangent of the angle at a, opposite the edge (b, c).
            let u = p[b] - p[a];
            let v = p[c] - p[a];
            let cot = u.dot(&v) / u.cross(&v).norm();
            let w = 0.5 * cot * (p[b] - p[c]);
            kx[b] += w;
            kx[c] -= w;
        }
    }
    Ok(kx
        .iter()
        .zip(&normals)
        .zip(mesh.lumped_areas())
        .map(|((k, n), a)| k.dot(n) / a)
        .collect())
}
