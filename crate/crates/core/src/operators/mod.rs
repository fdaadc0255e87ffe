//! P1 surface finite element operators.
//!
//! Every scalar unknown is continuous and piecewise linear. On a face `T` with
//! corners `a` the basis gradients are the constant tangent vectors
//! `g_a = n_T x e_a / (2 |T|)`, where `e_a` is the edge opposite `a` traversed
//! counter-clockwise. Zero-order terms with per-vertex coefficients are
//! integrated exactly for the interpolated coefficient; first-order terms use
//! the face centroid.

mod block;
mod terms;

use std::sync::Arc;

use nalgebra::Matrix3;

pub use block::BlockOperator3;
pub use terms::{assemble_terms, graddiv_terms, rotrot_terms, Factor, Term, TermAudit, TermKind};

use crate::error::{check_len, Error, Result};
use crate::fields::{ScalarField, VectorField3};
use crate::mesh::{SurfaceMesh, Vec3};
use crate::sparse::{CsrPattern, SparseMatrix};

/// Constant per-face data.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceGeometry {
    pub vertices: [usize; 3],
    pub area: f64,
    pub normal: Vec3,
    pub gradients: [Vec3; 3],
    /// Mean of the three vertex normals (not renormalized).
    pub centroid_normal: Vec3,
    /// `d_k nu_l` of the interpolated vertex normal field.
    pub normal_gradient: Matrix3<f64>,
}

/// Mesh-dependent data shared by all assembly routines.
#[derive(Debug, Clone)]
pub struct Discretization {
    faces: Vec<FaceGeometry>,
    normals: Vec<Vec3>,
    lumped: Vec<f64>,
    pattern: Arc<CsrPattern>,
    pattern3: Arc<CsrPattern>,
    /// Pattern slot of `(t[a], t[b])` at index `3 a + b`.
    face_slots: Vec<[usize; 9]>,
    total_area: f64,
}

impl Discretization {
    /// `normals` are the per-vertex unit normals used by penalty and rotation terms.
    pub fn new(mesh: &SurfaceMesh, normals: Vec<Vec3>) -> Result<Self> {
        check_len(mesh.num_vertices(), normals.len())?;
        if normals.iter().any(|n| !((n.norm() - 1.0).abs() < 1e-8)) {
            return Err(Error::Geometry(
                "vertex normals must be unit vectors".into(),
            ));
        }
        let pattern = Arc::new(CsrPattern::from_mesh(mesh));
        let pattern3 = Arc::new(pattern.interleaved3());
        let p = mesh.vertices();
        let mut faces = Vec::with_capacity(mesh.num_faces());
        let mut face_slots = Vec::with_capacity(mesh.num_faces());
        for ((t, &n), &area) in mesh
            .triangles()
            .iter()
            .zip(mesh.face_normals())
            .zip(mesh.face_areas())
        {
            let gradients: [Vec3; 3] = std::array::from_fn(|a| {
                let (b, c) = (t[(a + 1) % 3], t[(a + 2) % 3]);
                n.cross(&(p[c] - p[b])) / (2.0 * area)
            });
            let centroid_normal = (normals[t[0]] + normals[t[1]] + normals[t[2]]) / 3.0;
            let mut normal_gradient = Matrix3::zeros();
            for a in 0..3 {
                normal_gradient += gradients[a] * normals[t[a]].transpose();
            }
            faces.push(FaceGeometry {
                vertices: *t,
                area,
                normal: n,
                gradients,
                centroid_normal,
                normal_gradient,
            });
            face_slots.push(std::array::from_fn(|k| {
                pattern
                    .find(t[k / 3], t[k % 3])
                    .expect("face vertices are adjacent in the mesh pattern")
            }));
        }
        Ok(Self {
            faces,
            normals,
            lumped: mesh.lumped_areas().to_vec(),
            pattern,
            pattern3,
            face_slots,
            total_area: mesh.total_area(),
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.normals.len()
    }

    pub fn faces(&self) -> &[FaceGeometry] {
        &self.faces
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    /// Pattern of the interleaved 3V x 3V systems.
    pub fn pattern3(&self) -> &Arc<CsrPattern> {
        &self.pattern3
    }

    pub(crate) fn face_slots(&self) -> &[[usize; 9]] {
        &self.face_slots
    }

    fn check_field(&self, u: &VectorField3) -> Result<()> {
        check_len(self.num_vertices(), u.len())
    }
}

/// `int lambda_a lambda_b lambda_c` over a face, in units of the face area.
fn triple(a: usize, b: usize, c: usize) -> f64 {
    if a == b && b == c {
        1.0 / 10.0
    } else if a == b || b == c || a == c {
        1.0 / 30.0
    } else {
        1.0 / 60.0
    }
}

/// Consistent mass matrix `int phi_a phi_b`.
pub fn assemble_mass(disc: &Discretization) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(disc.pattern.clone());
    let values = m.values_mut();
    for (f, slots) in disc.faces.iter().zip(&disc.face_slots) {
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { 2.0 } else { 1.0 };
                values[slots[3 * a + b]] += f.area * w / 12.0;
            }
        }
    }
    m
}

/// Stiffness (Laplace-Beltrami) matrix `int grad phi_a . grad phi_b`.
pub fn assemble_stiffness(disc: &Discretization) -> SparseMatrix {
    let mut k = SparseMatrix::zeros(disc.pattern.clone());
    let values = k.values_mut();
    for (f, slots) in disc.faces.iter().zip(&disc.face_slots) {
        for a in 0..3 {
            for b in 0..3 {
                values[slots[3 * a + b]] += f.area * f.gradients[a].dot(&f.gradients[b]);
            }
        }
    }
    k
}

/// `int c phi_a phi_b` for a per-vertex coefficient `c`, exact for its P1 interpolant.
pub fn assemble_weighted_mass(disc: &Discretization, c: &[f64]) -> Result<SparseMatrix> {
    check_len(disc.num_vertices(), c.len())?;
    let mut m = SparseMatrix::zeros(disc.pattern.clone());
    let values = m.values_mut();
    for (f, slots) in disc.faces.iter().zip(&disc.face_slots) {
        let t = f.vertices;
        for a in 0..3 {
            for b in 0..3 {
                let s: f64 = (0..3).map(|k| c[t[k]] * triple(a, b, k)).sum();
                values[slots[3 * a + b]] += f.area * s;
            }
        }
    }
    Ok(m)
}

/// Per-face surface gradient of a P1 function (tangent to each face).
pub fn surface_gradient(disc: &Discretization, f: &[f64]) -> Result<Vec<Vec3>> {
    check_len(disc.num_vertices(), f.len())?;
    Ok(disc
        .faces
        .iter()
        .map(|face| {
            (0..3)
                .map(|a| face.gradients[a] * f[face.vertices[a]])
                .sum()
        })
        .collect())
}

/// Area-weighted average of per-face vectors at the vertices.
pub fn face_to_vertex(disc: &Discretization, v: &[Vec3]) -> Result<VectorField3> {
    check_len(disc.faces.len(), v.len())?;
    let mut acc = vec![Vec3::zeros(); disc.num_vertices()];
    let mut weight = vec![0.0; disc.num_vertices()];
    for (face, x) in disc.faces.iter().zip(v) {
        for &a in &face.vertices {
            acc[a] += x * face.area;
            weight[a] += face.area;
        }
    }
    Ok(VectorField3::from_vectors(
        &acc.iter()
            .zip(&weight)
            .map(|(a, w)| a / *w)
            .collect::<Vec<_>>(),
    ))
}

/// Load vector `int u . grad phi_i` with `u` in P1 (exact).
fn weak_gradient_pairing(disc: &Discretization, u: &VectorField3) -> Result<Vec<f64>> {
    disc.check_field(u)?;
    let mut out = vec![0.0; disc.num_vertices()];
    for face in &disc.faces {
        let t = face.vertices;
        let mean = (u.at(t[0]) + u.at(t[1]) + u.at(t[2])) / 3.0;
        for a in 0..3 {
            out[t[a]] += face.area * mean.dot(&face.gradients[a]);
        }
    }
    Ok(out)
}

/// Weak divergence `-(1/A_i) int u . grad phi_i`, normalized by the lumped mass.
pub fn div_h(disc: &Discretization, u: &VectorField3) -> Result<ScalarField> {
    Ok(weak_gradient_pairing(disc, u)?
        .iter()
        .zip(&disc.lumped)
        .map(|(l, m)| -l / m)
        .collect())
}

/// Weak rotation `-div_h(nu x u)` with vertex normals.
pub fn rot_h(disc: &Discretization, u: &VectorField3) -> Result<ScalarField> {
    disc.check_field(u)?;
    let w = u.cross_from_left(&disc.normals);
    Ok(div_h(disc, &w)?.into_iter().map(|d| -d).collect())
}

/// `b(w, u) = int Div w Div u`.
pub fn assemble_graddiv_block(disc: &Discretization) -> (BlockOperator3, TermAudit) {
    assemble_terms(disc, &graddiv_terms())
}

/// `r(v, u) = int Rot v Rot u`.
pub fn assemble_rotrot_block(disc: &Discretization) -> (BlockOperator3, TermAudit) {
    assemble_terms(disc, &rotrot_terms())
}

/// Face-wise rotation coefficients: `Rot v |_T = sum_b q_b . v_b`.
pub fn rotation_coefficients(face: &FaceGeometry) -> [Vec3; 3] {
    let ng = &face.normal_gradient;
    let curl = Vec3::new(
        ng[(1, 2)] - ng[(2, 1)],
        ng[(2, 0)] - ng[(0, 2)],
        ng[(0, 1)] - ng[(1, 0)],
    );
    std::array::from_fn(|b| face.centroid_normal.cross(&face.gradients[b]) - curl / 3.0)
}

/// `alpha int (nu . w)(nu . u)` with vertex quadrature: at vertex `a` the
/// block entry `(i, j)` is `alpha A_a nu_i nu_j`, a normal projector per vertex.
pub fn assemble_penalty(disc: &Discretization, alpha: f64) -> Result<BlockOperator3> {
    if !(alpha >= 0.0) {
        return Err(Error::Parameter(format!(
            "penalty must be non-negative, got {alpha}"
        )));
    }
    let mut op = BlockOperator3::zeros(&disc.pattern);
    let diag: Vec<usize> = (0..disc.num_vertices())
        .map(|a| {
            disc.pattern
                .find(a, a)
                .expect("pattern includes the diagonal")
        })
        .collect();
    for i in 0..3 {
        for j in 0..3 {
            let values = op.block_mut(i, j).values_mut();
            for (a, n) in disc.normals.iter().enumerate() {
                values[diag[a]] = alpha * disc.lumped[a] * n[i] * n[j];
            }
        }
    }
    Ok(op)
}

/// `int 2 kappa w . u`: diagonal blocks only.
pub fn assemble_curvature_term(disc: &Discretization, kappa: &[f64]) -> Result<BlockOperator3> {
    let c: Vec<f64> = kappa.iter().map(|k| 2.0 * k).collect();
    Ok(BlockOperator3::diagonal(&assemble_weighted_mass(disc, &c)?))
}

/// Frozen-coefficient advection for the rotated formulation:
/// `int Div w* (nu x w^n) . u`, coefficient averaged per face.
pub fn assemble_advection_p2(disc: &Discretization, wn: &VectorField3) -> Result<BlockOperator3> {
    disc.check_field(wn)?;
    let coeff = wn.cross_from_left(&disc.normals);
    let mut op = BlockOperator3::zeros(&disc.pattern);
    let trials: Vec<[Vec3; 3]> = disc.faces.iter().map(|f| f.gradients).collect();
    fill_advection(disc, &coeff, &trials, &mut op);
    Ok(op)
}

/// Frozen-coefficient advection for the unrotated formulation:
/// `int Rot v* (nu x v^n) . u`.
pub fn assemble_advection_p1(disc: &Discretization, vn: &VectorField3) -> Result<BlockOperator3> {
    disc.check_field(vn)?;
    let coeff = vn.cross_from_left(&disc.normals);
    let mut op = BlockOperator3::zeros(&disc.pattern);
    let trials: Vec<[Vec3; 3]> = disc.faces.iter().map(rotation_coefficients).collect();
    fill_advection(disc, &coeff, &trials, &mut op);
    Ok(op)
}

/// Row `(a, i)`, column `(b, j)`: `sum_T |T| / 3 c_{T,i} d_{T,b,j}` with `c_T`
/// the face average of the coefficient.
fn fill_advection(
    disc: &Discretization,
    coeff: &VectorField3,
    trials: &[[Vec3; 3]],
    op: &mut BlockOperator3,
) {
    let local: Vec<(Vec3, [Vec3; 3])> = disc
        .faces
        .iter()
        .zip(trials)
        .map(|(face, d)| {
            let t = face.vertices;
            let c = (coeff.at(t[0]) + coeff.at(t[1]) + coeff.at(t[2])) * (face.area / 9.0);
            (c, *d)
        })
        .collect();
    for i in 0..3 {
        for j in 0..3 {
            let values = op.block_mut(i, j).values_mut();
            for ((c, d), slots) in local.iter().zip(&disc.face_slots) {
                for a in 0..3 {
                    for b in 0..3 {
                        values[slots[3 * a + b]] += c[i] * d[b][j];
                    }
                }
            }
        }
    }
}

/// Pressure operator `B P M_L^-1 B^T` of the discrete projection.
///
/// `B` is the weak divergence pairing `int u . grad phi_i`, `M_L` the lumped
/// mass and `P` the vertex tangent projector. The correction
/// `v = v* - tau P M_L^-1 B^T p` then leaves `B v = 0` exactly. The stencil
/// reaches the second vertex ring.
pub fn assemble_projection_laplacian(disc: &Discretization) -> SparseMatrix {
    let n = disc.num_vertices();
    let mut cols: Vec<Vec<(usize, Vec3)>> = vec![Vec::new(); n];
    for face in &disc.faces {
        let t = face.vertices;
        for &j in &t {
            for i in 0..3 {
                let b = face.gradients[i] * (face.area / 3.0);
                match cols[j].iter_mut().find(|e| e.0 == t[i]) {
                    Some(e) => e.1 += b,
                    None => cols[j].push((t[i], b)),
                }
            }
        }
    }
    let mut triplets = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let nu = disc.normals[j];
        let tangent: Vec<Vec3> = col.iter().map(|(_, b)| b - nu * nu.dot(b)).collect();
        for (pi, (i, _)) in tangent.iter().zip(col) {
            for (l, bl) in col {
                triplets.push((*i, *l, pi.dot(bl) / disc.lumped[j]));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets).expect("indices come from the mesh")
}

/// Pressure load for the rotated formulation: `L_i = -int (nu x w*) . grad phi_i`.
pub fn assemble_pressure_rhs_p2(disc: &Discretization, w: &VectorField3) -> Result<ScalarField> {
    let nw = w.cross_from_left(&disc.normals);
    Ok(weak_gradient_pairing(disc, &nw)?
        .into_iter()
        .map(|x| -x)
        .collect())
}

/// Pressure load for the unrotated formulation: `L_i = int v* . grad phi_i`.
pub fn assemble_pressure_rhs_p1(disc: &Discretization, v: &VectorField3) -> Result<ScalarField> {
    weak_gradient_pairing(disc, v)
}
