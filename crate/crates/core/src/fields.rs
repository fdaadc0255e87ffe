//! Per-vertex scalar and vector fields.

use crate::error::{check_len, Result};
use crate::mesh::Vec3;

/// One value per vertex.
pub type ScalarField = Vec<f64>;

/// An R^3-valued per-vertex field, stored as three component arrays.
///
/// Tangency is never enforced here; it is measured by the diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub components: [Vec<f64>; 3],
}

impl VectorField3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            components: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn from_components(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        check_len(x.len(), y.len())?;
        check_len(x.len(), z.len())?;
        Ok(Self {
            components: [x, y, z],
        })
    }

    pub fn from_vectors(v: &[Vec3]) -> Self {
        Self {
            components: std::array::from_fn(|k| v.iter().map(|p| p[k]).collect()),
        }
    }

    /// Inverse of [`Self::interleaved`].
    pub fn from_interleaved(data: &[f64]) -> Self {
        let n = data.len() / 3;
        Self {
            components: std::array::from_fn(|k| (0..n).map(|a| data[3 * a + k]).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, a: usize) -> Vec3 {
        Vec3::new(
            self.components[0][a],
            self.components[1][a],
            self.components[2][a],
        )
    }

    pub fn set(&mut self, a: usize, v: Vec3) {
        for k in 0..3 {
            self.components[k][a] = v[k];
        }
    }

    pub fn to_vectors(&self) -> Vec<Vec3> {
        (0..self.len()).map(|a| self.at(a)).collect()
    }

    /// Layout `[x0, y0, z0, x1, ...]` used by the coupled linear systems.
    pub fn interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.len());
        for a in 0..self.len() {
            out.extend([
                self.components[0][a],
                self.components[1][a],
                self.components[2][a],
            ]);
        }
        out
    }

    /// Pointwise `f(a, v_a)`.
    pub fn map(&self, mut f: impl FnMut(usize, Vec3) -> Vec3) -> Self {
        Self::from_vectors(
            &(0..self.len())
                .map(|a| f(a, self.at(a)))
                .collect::<Vec<_>>(),
        )
    }

    /// Pointwise cross product `n_a x v_a`.
    pub fn cross_from_left(&self, normals: &[Vec3]) -> Self {
        self.map(|a, v| normals[a].cross(&v))
    }

    /// Pointwise `n_a . v_a`.
    pub fn dot_pointwise(&self, normals: &[Vec3]) -> ScalarField {
        (0..self.len())
            .map(|a| normals[a].dot(&self.at(a)))
            .collect()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            components: self
                .components
                .clone()
                .map(|c| c.into_iter().map(|v| v * alpha).collect()),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        Self {
            components: std::array::from_fn(|k| {
                self.components[k]
                    .iter()
                    .zip(&other.components[k])
                    .map(|(a, b)| a + alpha * b)
                    .collect()
            }),
        }
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .map(|a| self.at(a).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.iter().all(|&v| v == 0.0))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaving_round_trip() {
        let f =
            VectorField3::from_components(vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]).unwrap();
        assert_eq!(f.interleaved(), vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        assert_eq!(VectorField3::from_interleaved(&f.interleaved()), f);
        assert_eq!(f.at(1), Vec3::new(2.0, 4.0, 6.0));
    }

    #[test]
    fn mismatched_components() {
        assert!(VectorField3::from_components(vec![1.0], vec![], vec![1.0]).is_err());
    }

    #[test]
    fn rotation_by_normal() {
        let f = VectorField3::from_vectors(&[Vec3::x()]);
        let r = f.cross_from_left(&[Vec3::z()]);
        assert_eq!(r.at(0), Vec3::y());
        assert_eq!(f.dot_pointwise(&[Vec3::x()]), vec![1.0]);
    }
}
