//! The `run` command: time stepping with diagnostics, snapshots and a manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use surfflow::diagnostics::divergence_norm;
use surfflow::operators::rot_h;
use surfflow::solver::run_simulation;
use surfflow::{DiagnosticsRecord, Simulation, StepReport, SurfaceMesh, VectorField3};

use crate::config::{ConfigError, RunConfig};
use crate::manifest::{MeshProvenance, RunManifest};
use crate::vtk;

pub const DIAGNOSTICS_HEADER: &str = "t,E,h1,normal_norm,div_norm,n_defects,index_sum";

/// Bound on the corrected divergence.
///
/// Step `n` passes when `div_post <= div_pre` and
/// `div_post <= 10 (tol div_pre + c0 |v^{n+1}|)`, where
/// `c0 = |div_h v^0| / |v^0|` is the divergence the mesh assigns to the
/// starting field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionCheck {
    pub tol: f64,
    pub consistency: f64,
}

impl ProjectionCheck {
    pub fn for_simulation(sim: &Simulation) -> Self {
        let ops = sim.operators();
        let v0 = sim.initial_velocity();
        let norm = ops.l2_norm(v0);
        let consistency = if norm > 0.0 {
            divergence_norm(&ops.disc, v0).expect("field matches mesh") / norm
        } else {
            0.0
        };
        Self {
            tol: sim.config().krylov_tol,
            consistency,
        }
    }

    pub fn bound(&self, report: &StepReport, velocity_norm: f64) -> f64 {
        10.0 * (self.tol * report.div_pre + self.consistency * velocity_norm)
    }

    pub fn passes(&self, report: &StepReport, velocity_norm: f64) -> bool {
        report.div_post <= report.div_pre && report.div_post <= self.bound(report, velocity_norm)
    }
}

/// Results of a run kept in memory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub euler_characteristic: i64,
    pub records: Vec<DiagnosticsRecord>,
    pub reports: Vec<StepReport>,
    pub projection: ProjectionCheck,
    /// Steps whose corrected divergence broke the projection bound.
    pub projection_failures: Vec<usize>,
    /// Times at which the defect index sum differed from the Euler characteristic.
    pub index_failures: Vec<f64>,
    pub final_velocity: VectorField3,
    pub snapshots: usize,
}

/// Writes one diagnostics row; floats use the shortest round-trip form.
pub fn diagnostics_row(r: &DiagnosticsRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.t,
        r.energy,
        r.h1,
        r.normal_norm,
        r.div_norm,
        r.defects.len(),
        r.index_sum
    )
}

fn write_snapshot(dir: &Path, mesh: &SurfaceMesh, sim: &Simulation) -> anyhow::Result<()> {
    let v = sim.velocity();
    let vort = rot_h(&sim.operators().disc, &v)?;
    let state = sim.state();
    let path = dir.join(format!("snapshot_{:06}.vtk", state.step));
    vtk::write(
        &path,
        mesh,
        &v,
        &state.pressure,
        &vort,
        &format!("surfflow t={}", state.time),
    )
}

/// Runs a configuration, writing `diagnostics.csv`, VTK snapshots and
/// `manifest.json` into the configured output directory.
pub fn execute(cfg: &RunConfig) -> anyhow::Result<RunOutcome> {
    let mut manifest = RunManifest::new("run", serde_json::to_value(cfg)?);
    let mesh = manifest.time("mesh", || cfg.mesh.build())?;
    let sim_cfg = cfg.sim_config(mesh.num_vertices())?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    manifest
        .mesh
        .push(MeshProvenance::of(&mesh, serde_json::to_value(&cfg.mesh)?));

    let chi = mesh.euler_characteristic();
    let csv_path = dir.join("diagnostics.csv");
    let mut csv = BufWriter::new(
        File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?,
    );
    writeln!(csv, "{DIAGNOSTICS_HEADER}")?;

    let every = cfg.output.snapshot_every;
    let threshold = cfg.output.zero_threshold;
    let mut records = Vec::new();
    let mut reports = Vec::new();
    let mut projection = None;
    let mut projection_failures = Vec::new();
    let mut index_failures = Vec::new();
    let mut snapshots = 0;
    let mut io_error = None;

    let start = std::time::Instant::now();
    let sim = run_simulation(&mesh, sim_cfg, |sim, report| {
        let check = *projection.get_or_insert_with(|| ProjectionCheck::for_simulation(sim));
        let rec = DiagnosticsRecord::of(&mesh, sim, threshold)?;
        if let Some(r) = report {
            if !check.passes(r, sim.operators().l2_norm(&sim.velocity())) {
                projection_failures.push(r.step);
            }
            reports.push(r.clone());
        }
        if !rec.defects.is_empty() && i64::from(rec.index_sum) != chi {
            index_failures.push(rec.t);
        }
        let mut out = || -> anyhow::Result<()> {
            writeln!(csv, "{}", diagnostics_row(&rec))?;
            if every > 0 && sim.state().step % every == 0 {
                write_snapshot(dir, &mesh, sim)?;
                snapshots += 1;
            }
            Ok(())
        };
        if let Err(e) = out() {
            io_error.get_or_insert(e);
            return Err(surfflow::Error::Parameter("output failed".into()));
        }
        records.push(rec);
        Ok(())
    });
    let sim = match (sim, io_error) {
        (_, Some(e)) => return Err(e),
        (Err(surfflow::Error::Config(m)), None) => return Err(ConfigError(m).into()),
        (r, None) => r?,
    };
    csv.flush()?;
    manifest.phases.push(crate::manifest::Phase {
        name: "simulate".into(),
        seconds: start.elapsed().as_secs_f64(),
    });
    manifest.write(dir)?;

    Ok(RunOutcome {
        euler_characteristic: chi,
        records,
        reports,
        projection: projection.expect("observer runs at least once"),
        projection_failures,
        index_failures,
        final_velocity: sim.velocity(),
        snapshots,
    })
}
