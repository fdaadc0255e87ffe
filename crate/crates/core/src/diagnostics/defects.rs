//! Zeros of tangent fields and their Poincare-Hopf indices.
//!
//! Each vertex gets a chart in which the corner angles of its one-ring are
//! scaled to sum to `2 pi`. The field's direction at a vertex is measured in
//! that chart, transported along edges, and the winding around every face gives
//! an integer face index. Face indices always sum to the Euler characteristic.

use std::f64::consts::{PI, TAU};

use crate::error::{check_len, Error, Result};
use crate::fields::VectorField3;
use crate::mesh::{SurfaceMesh, Vec3};

/// An isolated zero of a tangent field.
#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    /// Vertex of smallest `|v|` in the defect region.
    pub vertex: usize,
    pub position: Vec3,
    pub index: i32,
}

/// Relative `|v|` below which neighbouring vertices are merged into one defect region.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-3;

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Per-half-edge chart angle and per-vertex angle scale.
struct Charts {
    beta: Vec<f64>,
    scale: Vec<f64>,
}

fn charts(mesh: &SurfaceMesh) -> Charts {
    let angles = mesh.corner_angles();
    let mut beta = vec![0.0; 3 * mesh.num_faces()];
    let mut scale = vec![1.0; mesh.num_vertices()];
    for v in 0..mesh.num_vertices() {
        let ring = mesh.ring(v);
        let total: f64 = ring.iter().map(|&h| angles[h / 3][h % 3]).sum();
        let s = TAU / total;
        let mut acc = 0.0;
        for &h in ring {
            beta[h] = s * acc;
            acc += angles[h / 3][h % 3];
        }
        scale[v] = s;
    }
    Charts { beta, scale }
}

/// Chart angle of `u` at vertex `v`, found by locating `u` in one of the corner sectors.
fn chart_angle(mesh: &SurfaceMesh, charts: &Charts, v: usize, u: &Vec3) -> f64 {
    let p = mesh.vertices();
    let angles = mesh.corner_angles();
    let ring = mesh.ring(v);
    let mut best = (f64::INFINITY, 0.0);
    for &h in ring {
        let f = h / 3;
        let alpha = angles[f][h % 3];
        let e = p[mesh.half_edge_target(h)] - p[v];
        let n = mesh.face_normals()[f];
        let a = e.cross(u).dot(&n).atan2(e.dot(u));
        let miss = if a < 0.0 {
            -a
        } else if a > alpha {
            a - alpha
        } else {
            0.0
        };
        if miss < best.0 {
            best = (miss, charts.beta[h] + charts.scale[v] * a.clamp(0.0, alpha));
            if miss == 0.0 {
                break;
            }
        }
    }
    best.1
}

/// Integer index of every face for the field `v` (summing to the Euler characteristic).
pub fn face_indices(mesh: &SurfaceMesh, v: &VectorField3) -> Result<Vec<i32>> {
    check_len(mesh.num_vertices(), v.len())?;
    if v.is_zero() {
        return Err(Error::Undefined(
            "defects of an identically zero field are undefined".into(),
        ));
    }
    let c = charts(mesh);
    // A vector with no tangential part gets angle 0 as a deterministic tie-break.
    let theta: Vec<f64> = (0..mesh.num_vertices())
        .map(|a| {
            let u = v.at(a);
            if u.norm() == 0.0 {
                0.0
            } else {
                chart_angle(mesh, &c, a, &u)
            }
        })
        .collect();
    let nh = 3 * mesh.num_faces();
    let mut turn = vec![0.0; nh];
    for h in 0..nh {
        let (a, b) = (mesh.half_edge_source(h), mesh.half_edge_target(h));
        if a < b {
            let t = mesh.half_edge_twin(h);
            let rho = c.beta[t] - c.beta[h] + PI;
            let d = wrap(theta[b] - theta[a] - rho);
            turn[h] = d;
            turn[t] = -d;
        }
    }
    let angles = mesh.corner_angles();
    Ok(mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(f, t)| {
            let holonomy: f64 = (0..3).map(|k| c.scale[t[k]] * angles[f][k]).sum::<f64>() - PI;
            let total = turn[3 * f] + turn[3 * f + 1] + turn[3 * f + 2] + holonomy;
            (total / TAU).round() as i32
        })
        .collect())
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Defects of `v`, clustered.
///
/// Faces with a nonzero index are merged when they share a vertex, and across
/// edges whose endpoints both have `|v| < zero_threshold * mean |v|`. Each
/// cluster with a nonzero total index is one defect, placed at its vertex of
/// smallest `|v|`. Defects are sorted by vertex.
pub fn detect_defects(
    mesh: &SurfaceMesh,
    v: &VectorField3,
    zero_threshold: f64,
) -> Result<Vec<Defect>> {
    if !(zero_threshold >= 0.0) {
        return Err(Error::Parameter(format!(
            "zero threshold must be non-negative, got {zero_threshold}"
        )));
    }
    let index = face_indices(mesh, v)?;
    let nv = mesh.num_vertices();
    let mag: Vec<f64> = (0..nv).map(|a| v.at(a).norm()).collect();
    let mean = mag.iter().sum::<f64>() / nv as f64;
    let low = zero_threshold * mean;
    let mut parent: Vec<usize> = (0..nv).collect();
    for (t, &i) in mesh.triangles().iter().zip(&index) {
        if i != 0 {
            union(&mut parent, t[0], t[1]);
            union(&mut parent, t[0], t[2]);
        }
    }
    for &[a, b] in mesh.edges() {
        if mag[a] < low && mag[b] < low {
            union(&mut parent, a, b);
        }
    }
    let mut sums: std::collections::BTreeMap<usize, i32> = Default::default();
    for (t, &i) in mesh.triangles().iter().zip(&index) {
        if i != 0 {
            *sums.entry(find(&mut parent, t[0])).or_default() += i;
        }
    }
    let mut best: std::collections::BTreeMap<usize, usize> = Default::default();
    for a in 0..nv {
        let r = find(&mut parent, a);
        if !sums.contains_key(&r) {
            continue;
        }
        let e = best.entry(r).or_insert(a);
        if mag[a] < mag[*e] {
            *e = a;
        }
    }
    let mut defects: Vec<Defect> = sums
        .into_iter()
        .filter(|&(_, i)| i != 0)
        .map(|(r, index)| {
            let vertex = best[&r];
            Defect {
                vertex,
                position: mesh.vertices()[vertex],
                index,
            }
        })
        .collect();
    defects.sort_by_key(|d| d.vertex);
    Ok(defects)
}
