//! Energies, norms and defect statistics of velocity fields.

mod defects;

pub use defects::{detect_defects, face_indices, Defect, DEFAULT_ZERO_THRESHOLD};

use crate::error::{check_len, Error, Result};
use crate::fields::{ScalarField, VectorField3};
use crate::mesh::{SurfaceMesh, Vec3};
use crate::operators::{div_h, Discretization};
use crate::solver::Simulation;
use crate::sparse::SparseMatrix;

/// `E = 1/2 sum_k v_k^T M v_k`.
pub fn kinetic_energy(v: &VectorField3, mass: &SparseMatrix) -> Result<f64> {
    check_len(mass.nrows(), v.len())?;
    Ok(0.5
        * v.components
            .iter()
            .map(|c| mass.bilinear(c, c))
            .sum::<f64>())
}

/// H1 seminorm of `v / |v|_{L2}`.
pub fn h1_seminorm_rescaled(
    v: &VectorField3,
    mass: &SparseMatrix,
    stiffness: &SparseMatrix,
) -> Result<f64> {
    check_len(mass.nrows(), v.len())?;
    let l2: f64 = v.components.iter().map(|c| mass.bilinear(c, c)).sum();
    if !(l2 > 0.0) {
        return Err(Error::Undefined(
            "rescaled H1 seminorm of a zero field is undefined".into(),
        ));
    }
    let h1: f64 = v.components.iter().map(|c| stiffness.bilinear(c, c)).sum();
    Ok((h1.max(0.0) / l2).sqrt())
}

/// Lumped L2 norm of `v . nu`.
pub fn normal_norm(v: &VectorField3, normals: &[Vec3], lumped: &[f64]) -> Result<f64> {
    check_len(normals.len(), v.len())?;
    check_len(lumped.len(), v.len())?;
    Ok(v.dot_pointwise(normals)
        .iter()
        .zip(lumped)
        .map(|(x, m)| m * x * x)
        .sum::<f64>()
        .sqrt())
}

/// Lumped L2 norm of the weak divergence.
pub fn divergence_norm(disc: &Discretization, v: &VectorField3) -> Result<f64> {
    Ok(div_h(disc, v)?
        .iter()
        .zip(disc.lumped_mass())
        .map(|(d, m)| m * d * d)
        .sum::<f64>()
        .sqrt())
}

/// Lumped-mass weighted mean of the pointwise cosine between `u` and `v`.
///
/// Vertices where either field vanishes contribute zero.
pub fn mean_cosine_similarity(u: &VectorField3, v: &VectorField3, lumped: &[f64]) -> Result<f64> {
    check_len(u.len(), v.len())?;
    check_len(lumped.len(), u.len())?;
    let area: f64 = lumped.iter().sum();
    let mut acc = 0.0;
    for (a, m) in lumped.iter().enumerate() {
        let (x, y) = (u.at(a), v.at(a));
        let d = x.norm() * y.norm();
        if d > 0.0 {
            acc += m * x.dot(&y) / d;
        }
    }
    Ok(acc / area)
}

/// `(int |f|^p dt)^(1/p)` with the trapezoidal rule.
pub fn spacetime_norm(values: &[f64], times: &[f64], p: f64) -> Result<f64> {
    check_len(times.len(), values.len())?;
    if values.len() < 2 {
        return Err(Error::Parameter(
            "a space-time norm needs at least two samples".into(),
        ));
    }
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!(
            "norm exponent must be at least 1, got {p}"
        )));
    }
    let mut acc = 0.0;
    for k in 1..values.len() {
        let dt = times[k] - times[k - 1];
        if !(dt >= 0.0) {
            return Err(Error::Parameter(
                "sample times must be non-decreasing".into(),
            ));
        }
        acc += 0.5 * dt * (values[k - 1].abs().powf(p) + values[k].abs().powf(p));
    }
    Ok(acc.powf(1.0 / p))
}

/// `div_h v - H (v . nu)`.
pub fn full_surface_divergence(
    disc: &Discretization,
    v: &VectorField3,
    mean_curvature: &[f64],
) -> Result<ScalarField> {
    check_len(disc.num_vertices(), mean_curvature.len())?;
    let vn = v.dot_pointwise(disc.normals());
    Ok(div_h(disc, v)?
        .into_iter()
        .zip(vn.iter().zip(mean_curvature))
        .map(|(d, (x, h))| d - h * x)
        .collect())
}

/// Diagnostics of one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub h1: f64,
    pub normal_norm: f64,
    pub div_norm: f64,
    pub defects: Vec<Defect>,
    pub index_sum: i32,
}

impl DiagnosticsRecord {
    /// Diagnostics of the current state. The normal norm is taken of the
    /// solved-for field (`w` for Problem 2), whose normal part the penalty controls.
    pub fn of(mesh: &SurfaceMesh, sim: &Simulation, zero_threshold: f64) -> Result<Self> {
        let ops = sim.operators();
        let v = sim.velocity();
        let (h1, defects) = if v.is_zero() {
            (0.0, Vec::new())
        } else {
            (
                h1_seminorm_rescaled(&v, &ops.mass, &ops.stiffness)?,
                detect_defects(mesh, &v, zero_threshold)?,
            )
        };
        let field = &sim.state().field;
        Ok(Self {
            t: sim.state().time,
            energy: kinetic_energy(&v, &ops.mass)?,
            h1,
            normal_norm: normal_norm(field, ops.normals(), ops.disc.lumped_mass())?,
            div_norm: divergence_norm(&ops.disc, &v)?,
            index_sum: defects.iter().map(|d| d.index).sum(),
            defects,
        })
    }
}
