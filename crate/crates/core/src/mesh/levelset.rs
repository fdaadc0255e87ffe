//! Implicit tori and glued n-tori.
//!
//! A single torus with major radius `R` and minor radius `r` whose tube
//! circles the chosen axis is the zero set of
//!
//! ```text
//! T(x) = (|x|^2 + R^2 - r^2)^2 - 4 R^2 rho(x)^2
//! ```
//!
//! where `rho` is the distance to the axis (`rho^2 = x^2 + z^2` for the y-axis).
//! A genus-n surface is obtained from `L(x) = prod_i T(x - m_i) - (n - 1) delta`.

use nalgebra::Matrix3;

use super::Vec3;
use crate::error::{Error, Result};

/// Rotation axis of a torus: the tube circles this coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Axis {
    #[default]
    Y,
    Z,
}

impl Axis {
    /// Coordinates spanning the plane orthogonal to the axis.
    fn plane(self) -> [usize; 2] {
        match self {
            Axis::Y => [0, 2],
            Axis::Z => [0, 1],
        }
    }

    /// Distance of `x` from the axis line.
    pub fn radial_distance(self, x: &Vec3) -> f64 {
        let [i, j] = self.plane();
        x[i].hypot(x[j])
    }
}

/// One torus `T(x - center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusLevelSet {
    pub center: Vec3,
    pub major: f64,
    pub minor: f64,
    pub axis: Axis,
}

impl TorusLevelSet {
    /// Value, gradient and Hessian at `x`.
    pub fn eval_full(&self, x: &Vec3) -> (f64, Vec3, Matrix3<f64>) {
        let p = x - self.center;
        let r2 = self.major * self.major;
        let c = r2 - self.minor * self.minor;
        let s = p.norm_squared() + c;
        let mut radial = Vec3::zeros();
        let mut radial_diag = Matrix3::zeros();
        for k in self.axis.plane() {
            radial[k] = p[k];
            radial_diag[(k, k)] = 1.0;
        }
        let value = s * s - 4.0 * r2 * radial.norm_squared();
        let gradient = 4.0 * s * p - 8.0 * r2 * radial;
        let hessian =
            8.0 * p * p.transpose() + Matrix3::identity() * (4.0 * s) - radial_diag * (8.0 * r2);
        (value, gradient, hessian)
    }
}

/// `L(x) = prod_i T(x - m_i) - (n - 1) delta` for `n` tori sharing radii and axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetNTorus {
    pub midpoints: Vec<Vec3>,
    pub major: f64,
    pub minor: f64,
    pub delta: f64,
    pub axis: Axis,
}

impl LevelSetNTorus {
    pub fn new(
        midpoints: Vec<Vec3>,
        major: f64,
        minor: f64,
        delta: f64,
        axis: Axis,
    ) -> Result<Self> {
        if midpoints.is_empty() {
            return Err(Error::Parameter(
                "an n-torus needs at least one midpoint".into(),
            ));
        }
        if !(major > minor && minor > 0.0) {
            return Err(Error::Parameter(format!(
                "torus radii must satisfy R > r > 0, got R = {major}, r = {minor}"
            )));
        }
        if midpoints.len() >= 2 && !(delta > 0.0) {
            return Err(Error::Parameter(format!(
                "the gluing offset delta must be positive for n >= 2, got {delta}"
            )));
        }
        Ok(Self {
            midpoints,
            major,
            minor,
            delta,
            axis,
        })
    }

    /// A single torus centred at the origin.
    pub fn single(major: f64, minor: f64, axis: Axis) -> Result<Self> {
        Self::new(vec![Vec3::zeros()], major, minor, 0.0, axis)
    }

    pub fn genus(&self) -> usize {
        self.midpoints.len()
    }

    fn tori(&self) -> impl Iterator<Item = TorusLevelSet> + '_ {
        self.midpoints.iter().map(|&center| TorusLevelSet {
            center,
            major: self.major,
            minor: self.minor,
            axis: self.axis,
        })
    }

    fn offset(&self) -> f64 {
        (self.midpoints.len() as f64 - 1.0) * self.delta
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.tori().map(|t| t.eval_full(x).0).product::<f64>() - self.offset()
    }

    /// `L(x)` and its analytic gradient.
    pub fn eval(&self, x: &Vec3) -> (f64, Vec3) {
        let (v, g, _) = self.eval_full(x);
        (v, g)
    }

    /// `L(x)`, gradient and Hessian via the product rule.
    pub fn eval_full(&self, x: &Vec3) -> (f64, Vec3, Matrix3<f64>) {
        let parts: Vec<_> = self.tori().map(|t| t.eval_full(x)).collect();
        let n = parts.len();
        let others = |skip: &[usize]| -> f64 {
            (0..n)
                .filter(|k| !skip.contains(k))
                .map(|k| parts[k].0)
                .product()
        };
        let value = others(&[]) - self.offset();
        let mut gradient = Vec3::zeros();
        let mut hessian = Matrix3::zeros();
        for i in 0..n {
            let wi = others(&[i]);
            gradient += parts[i].1 * wi;
            hessian += parts[i].2 * wi;
            for j in 0..n {
                if j != i {
                    hessian += parts[i].1 * parts[j].1.transpose() * others(&[i, j]);
                }
            }
        }
        (value, gradient, hessian)
    }

    /// Characteristic length used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.major + self.minor
    }

    /// Gaussian curvature of the level surface through `x`:
    /// `grad^T adj(H) grad / |grad|^4`.
    pub fn gaussian_curvature(&self, x: &Vec3) -> Result<f64> {
        let (_, g, h) = self.eval_full(x);
        let g2 = g.norm_squared();
        if !(g2 > 0.0) {
            return Err(Error::Geometry(format!(
                "level-set gradient vanishes at {x:?}"
            )));
        }
        let adj = adjugate(&h);
        Ok((g.transpose() * adj * g)[(0, 0)] / (g2 * g2))
    }

    /// Axis-aligned box containing the zero set, padded by `margin`.
    pub fn bounding_box(&self, margin: f64) -> (Vec3, Vec3) {
        let reach = self.major + self.minor + margin;
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for m in &self.midpoints {
            let mut ext = Vec3::repeat(reach);
            let along = match self.axis {
                Axis::Y => 1,
                Axis::Z => 2,
            };
            ext[along] = self.minor + margin;
            lo = lo.inf(&(m - ext));
            hi = hi.sup(&(m + ext));
        }
        (lo, hi)
    }
}

fn adjugate(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
    };
    Matrix3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn torus() -> LevelSetNTorus {
        LevelSetNTorus::single(2.0, 0.5, Axis::Y).unwrap()
    }

    #[test]
    fn outer_equator_is_on_the_surface() {
        assert_eq!(torus().value(&Vec3::new(2.5, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn origin_value() {
        assert_eq!(torus().value(&Vec3::zeros()), 14.0625);
    }

    #[test]
    fn adjugate_times_matrix_is_determinant() {
        let m = Matrix3::new(2.0, 1.0, 0.5, -1.0, 3.0, 0.25, 0.0, 1.5, 4.0);
        let p = m * adjugate(&m);
        let d = m.determinant();
        assert!((p - Matrix3::identity() * d).abs().max() < 1e-12);
    }

    fn central_difference(ls: &LevelSetNTorus, x: &Vec3, h: f64) -> Vec3 {
        let mut g = Vec3::zeros();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            g[k] = (ls.value(&(x + e)) - ls.value(&(x - e))) / (2.0 * h);
        }
        g
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sets = [
            torus(),
            LevelSetNTorus::new(
                vec![Vec3::new(-1.2, 0.0, 0.0), Vec3::new(1.2, 0.0, 0.0)],
                1.0,
                0.5,
                1.0,
                Axis::Y,
            )
            .unwrap(),
            LevelSetNTorus::new(
                vec![
                    Vec3::new(-1.2, -0.75, 0.0),
                    Vec3::new(1.2, -0.75, 0.0),
                    Vec3::new(0.0, 1.33, 0.0),
                ],
                1.0,
                0.5,
                10.0,
                Axis::Z,
            )
            .unwrap(),
        ];
        for ls in &sets {
            for _ in 0..50 {
                let x = Vec3::new(
                    rng.random_range(-2.5..2.5),
                    rng.random_range(-2.5..2.5),
                    rng.random_range(-2.5..2.5),
                );
                let (_, g) = ls.eval(&x);
                let fd = central_difference(ls, &x, 1e-5);
                assert!(
                    (g - fd).norm() <= 1e-6 * g.norm().max(1.0),
                    "{g:?} vs {fd:?}"
                );
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let ls = LevelSetNTorus::new(
            vec![Vec3::new(-1.2, 0.0, 0.0), Vec3::new(1.2, 0.0, 0.0)],
            1.0,
            0.5,
            1.0,
            Axis::Z,
        )
        .unwrap();
        let x = Vec3::new(0.3, -0.7, 0.4);
        let (_, _, h) = ls.eval_full(&x);
        let eps = 1e-5;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = eps;
            let col = (ls.eval(&(x + e)).1 - ls.eval(&(x - e)).1) / (2.0 * eps);
            for i in 0..3 {
                assert!((h[(i, k)] - col[i]).abs() <= 1e-6 * h.abs().max().max(1.0));
            }
        }
    }

    #[test]
    fn implicit_curvature_matches_torus_formula() {
        let ls = torus();
        // Outer equator: 1 / (r (R + r)); inner equator: -1 / (r (R - r)).
        let k_out = ls.gaussian_curvature(&Vec3::new(2.5, 0.0, 0.0)).unwrap();
        let k_in = ls.gaussian_curvature(&Vec3::new(1.5, 0.0, 0.0)).unwrap();
        assert!((k_out - 0.8).abs() < 1e-12);
        assert!((k_in + 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(LevelSetNTorus::single(0.5, 2.0, Axis::Y).is_err());
        assert!(
            LevelSetNTorus::new(vec![Vec3::zeros(), Vec3::x()], 1.0, 0.5, 0.0, Axis::Y).is_err()
        );
    }
}
