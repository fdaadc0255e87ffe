//! Jacobi-preconditioned Krylov solvers: BiCGStab(l) and conjugate gradients.

use crate::error::{check_len, Error, Result};
use crate::fields::dot;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Target relative residual `|b - A x| / |b|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of minimal-residual steps per BiCGStab(l) cycle.
    pub ell: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
            ell: 2,
        }
    }
}

impl KrylovOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Parameter(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if self.ell == 0 {
            return Err(Error::Parameter("BiCGStab(l) needs l >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final true relative residual.
    pub residual: f64,
    /// Relative residual after every iteration (recursively updated).
    pub history: Vec<f64>,
}

fn jacobi(a: &SparseMatrix) -> Vec<f64> {
    a.diagonal()
        .into_iter()
        .map(|d| {
            if d != 0.0 && d.is_finite() {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn residual(a: &SparseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

fn check_system(a: &SparseMatrix, b: &[f64], x: &[f64]) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    check_len(a.nrows(), b.len())?;
    check_len(a.nrows(), x.len())
}

/// BiCGStab(l) with right Jacobi preconditioning. `x` holds the initial guess
/// on entry and the solution on success.
pub fn bicgstab(
    a: &SparseMatrix,
    b: &[f64],
    x: &mut [f64],
    opts: &KrylovOptions,
) -> Result<SolveStats> {
    opts.validate()?;
    check_system(a, b, x)?;
    let n = b.len();
    let ell = opts.ell;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
            history: vec![],
        });
    }
    let dinv = jacobi(a);
    // A D^{-1} applied to v.
    let mut tmp = vec![0.0; n];
    let mut op = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            tmp[i] = dinv[i] * v[i];
        }
        a.mul_vec_into(&tmp, out);
    };

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut restarts = 0;
    loop {
        // Each (re)start works on the correction y with x = x0 + D^{-1} y.
        let mut r: Vec<Vec<f64>> = vec![residual(a, b, x); ell + 1];
        let rel = norm(&r[0]) / bnorm;
        if rel <= opts.tol {
            return Ok(SolveStats {
                iterations,
                residual: rel,
                history,
            });
        }
        let shadow = r[0].clone();
        let mut u: Vec<Vec<f64>> = vec![vec![0.0; n]; ell + 1];
        let mut y = vec![0.0; n];
        let (mut rho0, mut alpha, mut omega) = (1.0, 0.0, 1.0);
        let mut tau = vec![vec![0.0; ell + 1]; ell + 1];
        let mut sigma = vec![0.0; ell + 1];
        let mut gamma = vec![0.0; ell + 1];
        let mut gamma1 = vec![0.0; ell + 1];
        let mut gamma2 = vec![0.0; ell + 1];
        let mut breakdown = None;

        'cycle: while iterations < opts.max_iter {
            iterations += 1;
            rho0 *= -omega;
            for j in 0..ell {
                let rho1 = dot(&shadow, &r[j]);
                if rho0 == 0.0 || !rho1.is_finite() {
                    breakdown = Some("rho vanished");
                    break 'cycle;
                }
                let beta = alpha * rho1 / rho0;
                rho0 = rho1;
                for i in 0..=j {
                    for k in 0..n {
                        u[i][k] = r[i][k] - beta * u[i][k];
                    }
                }
                let (lo, hi) = u.split_at_mut(j + 1);
                op(&lo[j], &mut hi[0]);
                let s = dot(&shadow, &u[j + 1]);
                if s == 0.0 || !s.is_finite() {
                    breakdown = Some("sigma vanished");
                    break 'cycle;
                }
                alpha = rho0 / s;
                for i in 0..=j {
                    for k in 0..n {
                        r[i][k] -= alpha * u[i + 1][k];
                    }
                }
                let (lo, hi) = r.split_at_mut(j + 1);
                op(&lo[j], &mut hi[0]);
                for k in 0..n {
                    y[k] += alpha * u[0][k];
                }
            }

            // Minimal-residual part: modified Gram-Schmidt on r_1..r_l.
            for j in 1..=ell {
                for i in 1..j {
                    tau[i][j] = dot(&r[j], &r[i]) / sigma[i];
                    let (lo, hi) = r.split_at_mut(j);
                    for k in 0..n {
                        hi[0][k] -= tau[i][j] * lo[i][k];
                    }
                }
                sigma[j] = dot(&r[j], &r[j]);
                if sigma[j] == 0.0 || !sigma[j].is_finite() {
                    // r_j vanished: the BiCG part already solved the system.
                    if norm(&r[0]) / bnorm <= opts.tol || sigma[j] == 0.0 {
                        break 'cycle;
                    }
                    breakdown = Some("minimal-residual step degenerated");
                    break 'cycle;
                }
                gamma1[j] = dot(&r[0], &r[j]) / sigma[j];
            }
            gamma[ell] = gamma1[ell];
            omega = gamma[ell];
            for j in (1..ell).rev() {
                gamma[j] = gamma1[j] - ((j + 1)..=ell).map(|i| tau[j][i] * gamma[i]).sum::<f64>();
            }
            for j in 1..ell {
                gamma2[j] = gamma[j + 1]
                    + ((j + 1)..ell)
                        .map(|i| tau[j][i] * gamma[i + 1])
                        .sum::<f64>();
            }
            for k in 0..n {
                y[k] += gamma[1] * r[0][k];
                r[0][k] -= gamma1[ell] * r[ell][k];
                u[0][k] -= gamma[ell] * u[ell][k];
            }
            for j in 1..ell {
                for k in 0..n {
                    u[0][k] -= gamma[j] * u[j][k];
                    y[k] += gamma2[j] * r[j][k];
                    r[0][k] -= gamma1[j] * r[j][k];
                }
            }
            let rel = norm(&r[0]) / bnorm;
            history.push(rel);
            if !rel.is_finite() {
                breakdown = Some("residual is not finite");
                break;
            }
            if rel <= opts.tol || omega == 0.0 {
                break;
            }
        }

        for k in 0..n {
            x[k] += dinv[k] * y[k];
        }
        let true_rel = norm(&residual(a, b, x)) / bnorm;
        if true_rel <= opts.tol {
            return Ok(SolveStats {
                iterations,
                residual: true_rel,
                history,
            });
        }
        // The recursive residual drifted or the cycle broke down: restart from x.
        if iterations >= opts.max_iter || restarts >= 20 || !true_rel.is_finite() {
            return Err(Error::Solver {
                reason: breakdown
                    .unwrap_or("maximum iterations exceeded")
                    .to_string(),
                iterations,
                residual: true_rel,
                history,
            });
        }
        restarts += 1;
    }
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// (semi-)definite systems with consistent right-hand sides.
pub fn conjugate_gradient(
    a: &SparseMatrix,
    b: &[f64],
    x: &mut [f64],
    opts: &KrylovOptions,
) -> Result<SolveStats> {
    opts.validate()?;
    check_system(a, b, x)?;
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
            history: vec![],
        });
    }
    let dinv = jacobi(a);
    let mut r = residual(a, b, x);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    let mut rel = norm(&r) / bnorm;
    let mut iterations = 0;
    while rel > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::Solver {
                reason: "maximum iterations exceeded".into(),
                iterations,
                residual: rel,
                history,
            });
        }
        iterations += 1;
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                reason: "matrix is not positive definite on the Krylov space".into(),
                iterations,
                residual: rel,
                history,
            });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            z[k] = dinv[k] * r[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        rel = norm(&r) / bnorm;
        history.push(rel);
    }
    Ok(SolveStats {
        iterations,
        residual: norm(&residual(a, b, x)) / bnorm,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn opts(tol: f64) -> KrylovOptions {
        KrylovOptions {
            tol,
            max_iter: 2000,
            ell: 2,
        }
    }

    #[test]
    fn identity_in_one_iteration() {
        let a = SparseMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let mut x = vec![0.0; 5];
        let stats = bicgstab(&a, &b, &mut x, &opts(1e-12)).unwrap();
        assert!(stats.iterations <= 1);
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_is_exact_after_preconditioning() {
        let a =
            SparseMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (1, 1, 5.0), (2, 2, 0.25)]).unwrap();
        let b = vec![1.0, 1.0, 1.0];
        let mut x = vec![0.0; 3];
        let stats = bicgstab(&a, &b, &mut x, &opts(1e-12)).unwrap();
        assert!(stats.residual < 1e-14);
        assert!(stats.iterations <= 1);
        let mut y = vec![0.0; 3];
        conjugate_gradient(&a, &b, &mut y, &opts(1e-12)).unwrap();
        assert!((y[2] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = SparseMatrix::identity(3);
        let mut x = vec![1.0; 3];
        bicgstab(&a, &[0.0; 3], &mut x, &opts(1e-8)).unwrap();
        assert_eq!(x, vec![0.0; 3]);
    }

    /// Sparse non-symmetric, diagonally dominated random matrix.
    fn random_system(n: usize, seed: u64) -> (SparseMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + rng.random::<f64>()));
            for _ in 0..4 {
                let j = rng.random_range(0..n);
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (SparseMatrix::from_triplets(n, n, &t).unwrap(), b)
    }

    #[test]
    fn matches_dense_direct_solve() {
        for seed in 0..5 {
            let (a, b) = random_system(250, seed);
            let mut x = vec![0.0; 250];
            let stats = bicgstab(&a, &b, &mut x, &opts(1e-12)).unwrap();
            let exact = a
                .to_dense()
                .lu()
                .solve(&DVector::from_vec(b.clone()))
                .unwrap();
            let err = (DVector::from_vec(x) - &exact).norm() / exact.norm();
            assert!(
                err < 1e-8,
                "seed {seed}: {err} after {} iterations",
                stats.iterations
            );
        }
    }

    #[test]
    fn max_iterations_is_an_error_with_history() {
        let (a, b) = random_system(200, 3);
        let mut x = vec![0.0; 200];
        let err = bicgstab(
            &a,
            &b,
            &mut x,
            &KrylovOptions {
                tol: 1e-14,
                max_iter: 1,
                ell: 2,
            },
        )
        .unwrap_err();
        match err {
            Error::Solver {
                history,
                iterations,
                ..
            } => {
                assert_eq!(iterations, 1);
                assert_eq!(history.len(), 1);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn cg_on_laplacian_matches_dense() {
        // 1D Dirichlet Laplacian.
        let n = 100;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut x = vec![0.0; n];
        conjugate_gradient(&a, &b, &mut x, &opts(1e-12)).unwrap();
        let exact = a
            .to_dense()
            .cholesky()
            .unwrap()
            .solve(&DVector::from_vec(b));
        assert!((DVector::from_vec(x) - &exact).norm() / exact.norm() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn bicgstab_l_variants_agree_with_lu(n in 5usize..40, seed in 0u64..1000, ell in 1usize..4) {
            let (a, b) = random_system(n, seed);
            let mut x = vec![0.0; n];
            let o = KrylovOptions { tol: 1e-12, max_iter: 500, ell };
            bicgstab(&a, &b, &mut x, &o).unwrap();
            let dense: DMatrix<f64> = a.to_dense();
            let exact = dense.lu().solve(&DVector::from_vec(b)).unwrap();
            prop_assert!((DVector::from_vec(x) - &exact).norm() <= 1e-8 * exact.norm().max(1e-300));
        }
    }
}
