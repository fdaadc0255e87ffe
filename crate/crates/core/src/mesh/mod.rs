//! Closed, consistently oriented triangle meshes.
//!
//! A [`SurfaceMesh`] is validated on construction (edge manifoldness,
//! orientation, vertex fans, face degeneracy) and then stays immutable. Derived
//! per-face and per-vertex geometry is computed once and cached.
//!
//! Half-edges are implicit: half-edge `3 * f + k` runs from corner `k` of face
//! `f` to corner `k + 1`. Each vertex stores its outgoing half-edges in
//! counter-clockwise order with respect to the outward normal.

mod curvature;
mod extract;
mod levelset;
mod normals;
mod off;
mod sphere;
mod torus;

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub use curvature::{angle_defects, gaussian_curvature, mean_curvature, CurvatureSource};
pub use extract::{extract_levelset_mesh, ExtractionOptions};
pub use levelset::{Axis, LevelSetNTorus, TorusLevelSet};
pub use normals::vertex_normals;
pub use off::{load_mesh, read_off, save_mesh, write_off};
pub use sphere::generate_icosphere;
pub use torus::generate_torus;

pub type Vec3 = Vector3<f64>;

/// Relative area below which a face counts as degenerate.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// Undirected edge id per half-edge.
    half_edge_edge: Vec<usize>,
    twin: Vec<usize>,
    ring_offsets: Vec<usize>,
    ring: Vec<usize>,
    face_normals: Vec<Vec3>,
    face_areas: Vec<f64>,
    corner_angles: Vec<[f64; 3]>,
    lumped_areas: Vec<f64>,
}

impl SurfaceMesh {
    /// Builds a mesh and checks every structural invariant.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::Topology("mesh has no faces".into()));
        }
        for (f, t) in triangles.iter().enumerate() {
            for &v in t {
                if v >= nv {
                    return Err(Error::Topology(format!(
                        "face {f} references vertex {v} but only {nv} vertices exist"
                    )));
                }
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Topology(format!("face {f} repeats a vertex: {t:?}")));
            }
        }
        if let Some(p) = vertices
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::Geometry(format!(
                "vertex {p} has a non-finite coordinate"
            )));
        }

        // Undirected edge incidence.
        let nh = 3 * triangles.len();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::with_capacity(nh);
        let mut edges: Vec<[usize; 2]> = Vec::with_capacity(nh / 2);
        let mut edge_count: Vec<usize> = Vec::with_capacity(nh / 2);
        let mut half_edge_edge = vec![0usize; nh];
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(nh);
        let mut duplicate = None;
        for (f, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_count.push(0);
                    edges.len() - 1
                });
                edge_count[id] += 1;
                half_edge_edge[3 * f + k] = id;
                if let Some(&first) = directed.get(&(a, b)) {
                    duplicate.get_or_insert((a, b, first / 3, f));
                }
                directed.insert((a, b), 3 * f + k);
            }
        }
        if let Some(id) = edge_count.iter().position(|&c| c != 2) {
            return Err(Error::NonManifold {
                a: edges[id][0],
                b: edges[id][1],
                count: edge_count[id],
            });
        }
        if let Some((a, b, first, second)) = duplicate {
            return Err(Error::Orientation {
                a,
                b,
                first,
                second,
            });
        }

        let mut twin = vec![usize::MAX; nh];
        for (f, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                // Closed and oriented, so the reverse half-edge must exist.
                let h = *directed.get(&(b, a)).ok_or(Error::Orientation {
                    a,
                    b,
                    first: f,
                    second: f,
                })?;
                twin[3 * f + k] = h;
            }
        }

        // Vertex fans.
        let mut outgoing = vec![usize::MAX; nv];
        let mut valence = vec![0usize; nv];
        for (f, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                outgoing[t[k]] = 3 * f + k;
                valence[t[k]] += 1;
            }
        }
        if let Some(v) = outgoing.iter().position(|&h| h == usize::MAX) {
            return Err(Error::Topology(format!(
                "vertex {v} is not referenced by any face"
            )));
        }
        let mut ring_offsets = Vec::with_capacity(nv + 1);
        let mut ring = Vec::with_capacity(nh);
        ring_offsets.push(0);
        for v in 0..nv {
            let start = outgoing[v];
            let mut h = start;
            let mut n = 0;
            loop {
                ring.push(h);
                n += 1;
                h = twin[prev(h)];
                if h == start {
                    break;
                }
                if n > valence[v] {
                    break;
                }
            }
            if n != valence[v] {
                return Err(Error::Topology(format!(
                    "vertex {v} is non-manifold: its fan covers {n} of {} incident faces",
                    valence[v]
                )));
            }
            ring_offsets.push(ring.len());
        }

        let mut face_normals = Vec::with_capacity(triangles.len());
        let mut face_areas = Vec::with_capacity(triangles.len());
        let mut corner_angles = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let [p0, p1, p2] = t.map(|i| vertices[i]);
            let c = (p1 - p0).cross(&(p2 - p0));
            let norm = c.norm();
            face_areas.push(0.5 * norm);
            face_normals.push(if norm > 0.0 { c / norm } else { Vec3::zeros() });
            corner_angles.push([
                angle_between(&(p1 - p0), &(p2 - p0)),
                angle_between(&(p2 - p1), &(p0 - p1)),
                angle_between(&(p0 - p2), &(p1 - p2)),
            ]);
        }
        let mean_area = face_areas.iter().sum::<f64>() / face_areas.len() as f64;
        let threshold = DEGENERATE_AREA_RATIO * mean_area;
        if let Some(f) = face_areas.iter().position(|&a| !(a > threshold)) {
            return Err(Error::DegenerateFace {
                face: f,
                area: face_areas[f],
                threshold,
            });
        }

        let mut lumped_areas = vec![0.0; nv];
        for (t, &a) in triangles.iter().zip(&face_areas) {
            for &v in t {
                lumped_areas[v] += a / 3.0;
            }
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            half_edge_edge,
            twin,
            ring_offsets,
            ring,
            face_normals,
            face_areas,
            corner_angles,
            lumped_areas,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Genus of a connected closed orientable surface, from the Euler characteristic.
    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic()) / 2
    }

    /// Errors unless the Euler characteristic matches `2 - 2 * genus`.
    pub fn check_genus(&self, genus: i64) -> Result<()> {
        let chi = self.euler_characteristic();
        if chi == 2 - 2 * genus {
            Ok(())
        } else {
            Err(Error::Topology(format!(
                "expected genus {genus} (chi = {}), found chi = {chi}",
                2 - 2 * genus
            )))
        }
    }

    pub fn face_normals(&self) -> &[Vec3] {
        &self.face_normals
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    /// Interior angles of each face at its three corners.
    pub fn corner_angles(&self) -> &[[f64; 3]] {
        &self.corner_angles
    }

    /// Barycentric (one third of incident face area) vertex areas.
    pub fn lumped_areas(&self) -> &[f64] {
        &self.lumped_areas
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let sum: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| (self.vertices[a] - self.vertices[b]).norm())
            .sum();
        sum / self.edges.len() as f64
    }

    /// Outgoing half-edges of `v` in counter-clockwise order.
    pub fn ring(&self, v: usize) -> &[usize] {
        &self.ring[self.ring_offsets[v]..self.ring_offsets[v + 1]]
    }

    /// Source vertex of a half-edge.
    pub fn half_edge_source(&self, h: usize) -> usize {
        self.triangles[h / 3][h % 3]
    }

    /// Target vertex of a half-edge.
    pub fn half_edge_target(&self, h: usize) -> usize {
        self.triangles[h / 3][(h % 3 + 1) % 3]
    }

    pub fn half_edge_twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    pub fn half_edge_edge(&self, h: usize) -> usize {
        self.half_edge_edge[h]
    }

    /// Vertex neighbours of `v` in counter-clockwise order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.ring(v).iter().map(move |&h| self.half_edge_target(h))
    }

    /// Sum of interior angles incident to each vertex.
    pub fn vertex_angle_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.num_vertices()];
        for (t, angles) in self.triangles.iter().zip(&self.corner_angles) {
            for k in 0..3 {
                sums[t[k]] += angles[k];
            }
        }
        sums
    }

    /// Deterministic content hash of positions and connectivity (FNV-1a, hex).
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for p in &self.vertices {
            for c in p.iter() {
                feed(&c.to_le_bytes());
            }
        }
        for t in &self.triangles {
            for &v in t {
                feed(&(v as u64).to_le_bytes());
            }
        }
        format!("{h:016x}")
    }
}

#[inline]
pub(crate) fn prev(h: usize) -> usize {
    3 * (h / 3) + (h % 3 + 2) % 3
}

pub(crate) fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetrahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
        let v = vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
        ];
        let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        (v, f)
    }

    #[test]
    fn tetrahedron_is_a_sphere() {
        let (v, f) = tetrahedron();
        let mesh = SurfaceMesh::new(v, f).unwrap();
        assert_eq!(mesh.euler_characteristic(), 2);
        assert_eq!(mesh.genus(), 0);
        for v in 0..4 {
            assert_eq!(mesh.ring(v).len(), 3);
        }
        // Outward orientation: normals point away from the centroid.
        for (t, n) in mesh.triangles().iter().zip(mesh.face_normals()) {
            let c = (mesh.vertices()[t[0]] + mesh.vertices()[t[1]] + mesh.vertices()[t[2]]) / 3.0;
            assert!(n.dot(&c) > 0.0);
        }
    }

    #[test]
    fn ring_is_counter_clockwise_and_closed() {
        let (v, f) = tetrahedron();
        let mesh = SurfaceMesh::new(v, f).unwrap();
        for v in 0..4 {
            for &h in mesh.ring(v) {
                assert_eq!(mesh.half_edge_source(h), v);
                let t = mesh.half_edge_twin(h);
                assert_eq!(mesh.half_edge_target(t), v);
            }
        }
    }

    #[test]
    fn flipped_face_is_an_orientation_error() {
        let (v, mut f) = tetrahedron();
        f[3] = [1, 2, 3];
        assert!(matches!(
            SurfaceMesh::new(v, f),
            Err(Error::Orientation { .. })
        ));
    }

    #[test]
    fn open_surface_is_non_manifold() {
        let (v, mut f) = tetrahedron();
        f.pop();
        assert!(matches!(
            SurfaceMesh::new(v, f),
            Err(Error::NonManifold { count: 1, .. })
        ));
    }

    #[test]
    fn degenerate_face_is_rejected() {
        let (mut v, f) = tetrahedron();
        // Collapse vertex 3 onto the segment between 0 and 1.
        v[3] = (v[0] + v[1]) * 0.5;
        let err = SurfaceMesh::new(v, f).unwrap_err();
        assert!(matches!(err, Error::DegenerateFace { .. }), "{err}");
    }

    #[test]
    fn out_of_range_index() {
        let (v, mut f) = tetrahedron();
        f[0] = [0, 1, 7];
        assert!(matches!(SurfaceMesh::new(v, f), Err(Error::Topology(_))));
    }
}
