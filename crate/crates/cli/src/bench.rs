//! Assembly timing of the two viscous blocks.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use surfflow::mesh::{generate_torus, vertex_normals};
use surfflow::operators::{assemble_graddiv_block, assemble_rotrot_block};
use surfflow::{Discretization, LevelSetNTorus, TermAudit};

use crate::config::ConfigError;

pub const BENCH_HEADER: &str = "dofs,t_rotrot,t_graddiv,ratio";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dofs: usize,
    pub t_rotrot: f64,
    pub t_graddiv: f64,
    pub ratio: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median wall time of `reps` calls, in seconds.
pub fn time_median(reps: usize, mut f: impl FnMut()) -> f64 {
    median(
        (0..reps)
            .map(|_| {
                let t = Instant::now();
                f();
                t.elapsed().as_secs_f64()
            })
            .collect(),
    )
}

/// Discretization of the R = 2, r = 0.5 torus with `n_major x n_major / 4` vertices.
pub fn torus_discretization(n_major: usize) -> anyhow::Result<Discretization> {
    let mesh = generate_torus(2.0, 0.5, n_major, (n_major / 4).max(3))?;
    let ls = LevelSetNTorus::single(2.0, 0.5, surfflow::mesh::Axis::Y)?;
    Ok(Discretization::new(
        &mesh,
        vertex_normals(&mesh, Some(&ls))?,
    )?)
}

/// Times both blocks on tori with `n_major` in `sizes`.
pub fn bench_assembly(
    sizes: &[usize],
    reps: usize,
    mut progress: impl FnMut(&BenchRow),
) -> anyhow::Result<Vec<BenchRow>> {
    if sizes.len() < 3 {
        return Err(ConfigError(format!(
            "the benchmark needs at least 3 mesh sizes, got {}",
            sizes.len()
        ))
        .into());
    }
    if reps < 5 {
        return Err(ConfigError(format!(
            "the benchmark needs at least 5 repetitions, got {reps}"
        ))
        .into());
    }
    let mut rows = Vec::new();
    for &n in sizes {
        let disc = torus_discretization(n)?;
        let t_rotrot = time_median(reps, || {
            std::hint::black_box(assemble_rotrot_block(&disc));
        });
        let t_graddiv = time_median(reps, || {
            std::hint::black_box(assemble_graddiv_block(&disc));
        });
        let row = BenchRow {
            dofs: 3 * disc.num_vertices(),
            t_rotrot,
            t_graddiv,
            ratio: t_rotrot / t_graddiv,
        };
        progress(&row);
        rows.push(row);
    }
    Ok(rows)
}

/// Term counts of rot-rot and grad-div on a small mesh.
pub fn term_audit() -> anyhow::Result<(TermAudit, TermAudit)> {
    let disc = torus_discretization(8)?;
    Ok((
        assemble_rotrot_block(&disc).1,
        assemble_graddiv_block(&disc).1,
    ))
}

pub fn write_csv(path: &Path, rows: &[BenchRow]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(f, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(f, "{},{},{},{}", r.dofs, r.t_rotrot, r.t_graddiv, r.ratio)?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn rejects_too_few_sizes_or_reps() {
        assert!(bench_assembly(&[8, 16], 5, |_| ()).is_err());
        assert!(bench_assembly(&[8, 16, 32], 3, |_| ()).is_err());
    }

    #[test]
    fn rows_have_dofs_and_ratio() {
        let rows = bench_assembly(&[8, 12, 16], 5, |_| ()).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.dofs).collect::<Vec<_>>(),
            [3 * 24, 3 * 36, 3 * 64]
        );
        for r in &rows {
            assert!((r.ratio - r.t_rotrot / r.t_graddiv).abs() < 1e-12);
        }
        let (rr, gd) = term_audit().unwrap();
        assert!(gd.total() < rr.total());
    }
}
