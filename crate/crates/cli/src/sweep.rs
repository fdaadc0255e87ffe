//! Penalty-parameter convergence against the largest-alpha run.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use surfflow::diagnostics::{normal_norm, spacetime_norm};
use surfflow::solver::run_simulation;
use surfflow::{SurfaceMesh, VectorField3};

use crate::config::{ConfigError, RunConfig};
use crate::manifest::{MeshProvenance, RunManifest};

pub const SWEEP_HEADER: &str = "alpha,error,normal_norm_accum";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    /// `L^{2,2}` distance to the reference trajectory.
    pub error: f64,
    /// `L^{2,2}` norm of the normal component over the run.
    pub normal_norm_accum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// One row per alpha in increasing order; the reference row has error 0.
    pub rows: Vec<SweepRow>,
    pub reference_alpha: f64,
    /// Least-squares slope of `log error` against `log alpha`, reference excluded.
    pub slope: f64,
}

/// Doubling ladder from `lo` to `hi` inclusive.
pub fn doubling_ladder(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    while out.last().unwrap() * 2.0 <= hi * (1.0 + 1e-12) {
        out.push(out.last().unwrap() * 2.0);
    }
    out
}

pub fn validate_alphas(alphas: &[f64]) -> Result<(), ConfigError> {
    if alphas.len() < 3 {
        return Err(ConfigError(format!(
            "a sweep needs at least 3 alpha values, got {}",
            alphas.len()
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(ConfigError(format!(
            "alpha values must be positive, got {a}"
        )));
    }
    for (i, a) in alphas.iter().enumerate() {
        if alphas[..i].contains(a) {
            return Err(ConfigError(format!("alpha {a} appears more than once")));
        }
    }
    Ok(())
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

struct Trajectory {
    times: Vec<f64>,
    velocities: Vec<VectorField3>,
    normal: Vec<f64>,
}

fn reference_run(mesh: &SurfaceMesh, cfg: &RunConfig, alpha: f64) -> anyhow::Result<Trajectory> {
    let mut sim_cfg = cfg.sim_config(mesh.num_vertices())?;
    sim_cfg.alpha = alpha;
    let mut traj = Trajectory {
        times: Vec::new(),
        velocities: Vec::new(),
        normal: Vec::new(),
    };
    run_simulation(mesh, sim_cfg, |sim, _| {
        let ops = sim.operators();
        traj.times.push(sim.state().time);
        traj.normal.push(normal_norm(
            &sim.state().field,
            ops.normals(),
            ops.disc.lumped_mass(),
        )?);
        traj.velocities.push(sim.velocity());
        Ok(())
    })?;
    Ok(traj)
}

/// Runs `cfg` once per alpha and measures each trajectory against the
/// largest-alpha one.
pub fn alpha_sweep(
    cfg: &RunConfig,
    alphas: &[f64],
    mut progress: impl FnMut(&SweepRow),
) -> anyhow::Result<(SweepResult, SurfaceMesh)> {
    validate_alphas(alphas)?;
    let mesh = cfg.mesh.build()?;
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let reference_alpha = *sorted.last().unwrap();
    let reference = reference_run(&mesh, cfg, reference_alpha)?;
    let reference_row = SweepRow {
        alpha: reference_alpha,
        error: 0.0,
        normal_norm_accum: spacetime_norm(&reference.normal, &reference.times, 2.0)?,
    };

    let mut rows = Vec::new();
    for &alpha in &sorted[..sorted.len() - 1] {
        let mut sim_cfg = cfg.sim_config(mesh.num_vertices())?;
        sim_cfg.alpha = alpha;
        let mut diffs = Vec::new();
        let mut normal = Vec::new();
        run_simulation(&mesh, sim_cfg, |sim, _| {
            let ops = sim.operators();
            let k = diffs.len();
            let d = sim.velocity().add_scaled(-1.0, &reference.velocities[k]);
            diffs.push(ops.l2_norm(&d));
            normal.push(normal_norm(
                &sim.state().field,
                ops.normals(),
                ops.disc.lumped_mass(),
            )?);
            Ok(())
        })?;
        let row = SweepRow {
            alpha,
            error: spacetime_norm(&diffs, &reference.times, 2.0)?,
            normal_norm_accum: spacetime_norm(&normal, &reference.times, 2.0)?,
        };
        progress(&row);
        rows.push(row);
    }
    let x: Vec<f64> = rows.iter().map(|r| r.alpha.ln()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r.error.max(f64::MIN_POSITIVE).ln())
        .collect();
    let slope = fit_slope(&x, &y);
    progress(&reference_row);
    rows.push(reference_row);
    Ok((
        SweepResult {
            rows,
            reference_alpha,
            slope,
        },
        mesh,
    ))
}

pub fn write_csv(path: &Path, result: &SweepResult) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(f, "{SWEEP_HEADER}")?;
    for r in &result.rows {
        writeln!(f, "{},{},{}", r.alpha, r.error, r.normal_norm_accum)?;
    }
    f.flush()?;
    Ok(())
}

/// Sweep plus `alpha_sweep.csv` and a manifest in the output directory.
pub fn run_and_write(
    cfg: &RunConfig,
    alphas: &[f64],
    progress: impl FnMut(&SweepRow),
) -> anyhow::Result<SweepResult> {
    validate_alphas(alphas)?;
    let mut manifest = RunManifest::new(
        "alpha-sweep",
        serde_json::json!({ "config": cfg, "alphas": alphas }),
    );
    let (result, mesh) = manifest.time("sweep", || alpha_sweep(cfg, alphas, progress))?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    write_csv(&cfg.output.dir.join("alpha_sweep.csv"), &result)?;
    manifest
        .mesh
        .push(MeshProvenance::of(&mesh, serde_json::to_value(&cfg.mesh)?));
    manifest.write(&cfg.output.dir)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_and_validation() {
        let l = doubling_ladder(32.0, 8192.0);
        assert_eq!(l.len(), 9);
        assert_eq!(l[8], 8192.0);
        assert!(validate_alphas(&[1.0, 2.0, 2.0]).is_err());
        assert!(validate_alphas(&[1.0, 2.0]).is_err());
        assert!(validate_alphas(&[1.0, -2.0, 3.0]).is_err());
        assert!(validate_alphas(&[4.0, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|a| a.ln()).collect();
        let y: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|a| (3.0 / a).ln())
            .collect();
        approx_eq(fit_slope(&x, &y), -1.0);
    }

    fn approx_eq(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn small_sweep_decreases() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::torus_benchmark(24, 8);
        cfg.physics.t_end = 1.0;
        cfg.output.dir = dir.path().to_path_buf();
        let res = run_and_write(&cfg, &[50.0, 100.0, 200.0, 400.0], |_| ()).unwrap();
        assert_eq!(res.rows.len(), 4);
        assert_eq!(res.reference_alpha, 400.0);
        let e: Vec<f64> = res.rows.iter().map(|r| r.error).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
        let text = std::fs::read_to_string(dir.path().join("alpha_sweep.csv")).unwrap();
        assert!(text.starts_with("alpha,error,normal_norm_accum\n50,"));
        assert_eq!(text.lines().count(), 5);
        let err = run_and_write(&cfg, &[50.0, 50.0, 100.0], |_| ()).unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }
}
