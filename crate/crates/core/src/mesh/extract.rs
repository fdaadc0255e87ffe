//! Triangulating the zero set of a level-set n-torus.
//!
//! The bounding box is sampled on a regular grid, each cube is split into six
//! tetrahedra sharing the main diagonal (a conforming Freudenthal split), and
//! the piecewise-linear zero set is extracted per tetrahedron. Because the
//! interpolant is linear on every tetrahedron, the result is a closed
//! 2-manifold whenever no grid value is exactly zero. The vertices are then
//! projected onto `L = 0` with Newton steps and smoothed tangentially.

use std::collections::HashMap;

use super::{LevelSetNTorus, SurfaceMesh, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionOptions {
    /// Grid cells along the longest side of the bounding box.
    pub resolution: usize,
    pub smoothing_passes: usize,
    /// Tangential smoothing step in (0, 1].
    pub smoothing_weight: f64,
    pub max_newton_iterations: usize,
}

impl ExtractionOptions {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self {
            resolution: 96,
            smoothing_passes: 1,
            smoothing_weight: 0.5,
            max_newton_iterations: 50,
        }
    }
}

/// Kuhn split: each tetrahedron walks from corner 0 to corner 7 along one axis permutation.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// Edge-interpolation parameters are kept this far away from grid points.
const CLAMP: f64 = 0.01;

pub fn extract_levelset_mesh(
    ls: &LevelSetNTorus,
    options: &ExtractionOptions,
) -> Result<SurfaceMesh> {
    if options.resolution < 8 {
        return Err(Error::Parameter(format!(
            "grid resolution must be at least 8, got {}",
            options.resolution
        )));
    }
    if !(options.smoothing_weight > 0.0 && options.smoothing_weight <= 1.0) {
        return Err(Error::Parameter(
            "smoothing weight must lie in (0, 1]".into(),
        ));
    }

    // Glued tori bulge past the union of their tubes, so the box grows until
    // every boundary sample lies outside.
    let mut margin = 0.1 * ls.scale();
    let (lo, h, dims, values) = loop {
        let (lo, hi) = ls.bounding_box(margin);
        let extent = hi - lo;
        let h = extent.max() / options.resolution as f64;
        let dims: [usize; 3] = std::array::from_fn(|k| (extent[k] / h).ceil() as usize + 1);
        let mut values = vec![0.0; dims[0] * dims[1] * dims[2]];
        let mut closed = true;
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let v = ls.value(&(lo + Vec3::new(i as f64, j as f64, k as f64) * h));
                    // Zero counts as outside so the interpolant never touches a grid point.
                    let v = if v == 0.0 { f64::MIN_POSITIVE } else { v };
                    let boundary = i == 0
                        || j == 0
                        || k == 0
                        || i + 1 == dims[0]
                        || j + 1 == dims[1]
                        || k + 1 == dims[2];
                    closed &= !(boundary && v < 0.0);
                    values[(i * dims[1] + j) * dims[2] + k] = v;
                }
            }
        }
        if closed {
            break (lo, h, dims, values);
        }
        if margin > 10.0 * ls.scale() {
            return Err(Error::Extraction(
                "the zero set does not fit in the sampling box".into(),
            ));
        }
        margin *= 2.0;
    };
    let grid_index = |i: usize, j: usize, k: usize| (i * dims[1] + j) * dims[2] + k;
    let grid_point =
        |i: usize, j: usize, k: usize| lo + Vec3::new(i as f64, j as f64, k as f64) * h;

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();

    for i in 0..dims[0] - 1 {
        for j in 0..dims[1] - 1 {
            for k in 0..dims[2] - 1 {
                let corner = |c: usize| (i + (c >> 2 & 1), j + (c >> 1 & 1), k + (c & 1));
                let ids: [usize; 8] = std::array::from_fn(|c| {
                    let (a, b, d) = corner(c);
                    grid_index(a, b, d)
                });
                let inside_count = ids.iter().filter(|&&g| values[g] < 0.0).count();
                if inside_count == 0 || inside_count == 8 {
                    continue;
                }
                for tet in TETS {
                    let g = tet.map(|c| ids[c]);
                    let p = tet.map(|c| {
                        let (a, b, d) = corner(c);
                        grid_point(a, b, d)
                    });
                    let inside: Vec<usize> = (0..4).filter(|&q| values[g[q]] < 0.0).collect();
                    let outside: Vec<usize> = (0..4).filter(|&q| values[g[q]] >= 0.0).collect();
                    if inside.is_empty() || outside.is_empty() {
                        continue;
                    }
                    let mut cut = |a: usize, b: usize| -> usize {
                        let key = (g[a].min(g[b]), g[a].max(g[b]));
                        *edge_vertex.entry(key).or_insert_with(|| {
                            let (va, vb) = (values[g[a]], values[g[b]]);
                            let t = (va / (va - vb)).clamp(CLAMP, 1.0 - CLAMP);
                            vertices.push(p[a] + (p[b] - p[a]) * t);
                            vertices.len() - 1
                        })
                    };
                    let centroid =
                        |qs: &[usize]| qs.iter().map(|&q| p[q]).sum::<Vec3>() / qs.len() as f64;
                    let direction = centroid(&outside) - centroid(&inside);
                    let mut emit = |tri: [usize; 3], vertices: &Vec<Vec3>| {
                        let n = (vertices[tri[1]] - vertices[tri[0]])
                            .cross(&(vertices[tri[2]] - vertices[tri[0]]));
                        if n.dot(&direction) >= 0.0 {
                            triangles.push(tri);
                        } else {
                            triangles.push([tri[0], tri[2], tri[1]]);
                        }
                    };
                    match (inside.len(), outside.len()) {
                        (1, 3) => {
                            let a = inside[0];
                            let tri = [cut(a, outside[0]), cut(a, outside[1]), cut(a, outside[2])];
                            emit(tri, &vertices);
                        }
                        (3, 1) => {
                            let b = outside[0];
                            let tri = [cut(inside[0], b), cut(inside[1], b), cut(inside[2], b)];
                            emit(tri, &vertices);
                        }
                        _ => {
                            let (a, b) = (inside[0], inside[1]);
                            let (c, d) = (outside[0], outside[1]);
                            let (ac, ad, bc, bd) = (cut(a, c), cut(a, d), cut(b, c), cut(b, d));
                            // The quad cycles ac, ad, bd, bc.
                            emit([ac, ad, bd], &vertices);
                            emit([ac, bd, bc], &vertices);
                        }
                    }
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(Error::Extraction(
            "the zero set does not intersect the sampling grid".into(),
        ));
    }

    let tolerance = newton_tolerance(ls);
    for v in vertices.iter_mut() {
        *v = project(ls, *v, h, tolerance, options.max_newton_iterations)?;
    }

    let raw = vertices.clone();
    for _ in 0..options.smoothing_passes {
        vertices = smooth(
            ls,
            &vertices,
            &triangles,
            options.smoothing_weight,
            h,
            tolerance,
            options,
        )?;
    }

    match build(vertices, triangles.clone()) {
        Ok(mesh) => Ok(mesh),
        // Smoothing can fold a sliver; the projected mesh is still valid.
        Err(_) if options.smoothing_passes > 0 => build(raw, triangles),
        Err(e) => Err(e),
    }
}

fn build(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<SurfaceMesh> {
    let mesh = SurfaceMesh::new(vertices, triangles).map_err(|e| match e {
        Error::NonManifold { .. }
        | Error::Orientation { .. }
        | Error::Topology(_)
        | Error::DegenerateFace { .. } => Error::Extraction(e.to_string()),
        other => other,
    })?;
    Ok(mesh)
}

/// `1e-10` in units of `scale^(4n)`, `L` being a product of `n` quartics.
fn newton_tolerance(ls: &LevelSetNTorus) -> f64 {
    1e-10 * ls.scale().powi(4 * ls.genus() as i32)
}

fn project(
    ls: &LevelSetNTorus,
    mut x: Vec3,
    h: f64,
    tolerance: f64,
    max_iter: usize,
) -> Result<Vec3> {
    for _ in 0..max_iter {
        let (value, grad) = ls.eval(&x);
        if value.abs() < tolerance {
            return Ok(x);
        }
        let g2 = grad.norm_squared();
        if !(g2 > 0.0) {
            return Err(Error::Extraction(format!(
                "vanishing gradient while projecting {x:?}"
            )));
        }
        let mut step = grad * (value / g2);
        let len = step.norm();
        if len > h {
            step *= h / len;
        }
        x -= step;
    }
    if ls.value(&x).abs() < tolerance {
        Ok(x)
    } else {
        Err(Error::Extraction(format!(
            "Newton projection did not reach |L| < {tolerance:e} at {x:?}"
        )))
    }
}

fn smooth(
    ls: &LevelSetNTorus,
    vertices: &[Vec3],
    triangles: &[[usize; 3]],
    weight: f64,
    h: f64,
    tolerance: f64,
    options: &ExtractionOptions,
) -> Result<Vec<Vec3>> {
    let mut sum = vec![Vec3::zeros(); vertices.len()];
    let mut count = vec![0usize; vertices.len()];
    for t in triangles {
        for k in 0..3 {
            // Each undirected edge is visited from both of its faces.
            let (a, b) = (t[k], t[(k + 1) % 3]);
            sum[a] += vertices[b];
            sum[b] += vertices[a];
            count[a] += 1;
            count[b] += 1;
        }
    }
    vertices
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let n = ls.eval(&x).1.normalize();
            let d = sum[i] / count[i] as f64 - x;
            let tangential = d - n * n.dot(&d);
            project(
                ls,
                x + tangential * weight,
                h,
                tolerance,
                options.max_newton_iterations,
            )
        })
        .collect()
}
