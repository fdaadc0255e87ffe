//! Command-line driver for surfflow.
//!
//! Subcommands: `mesh-gen`, `run`, `alpha-sweep`, `bench-assembly` and
//! `defects`. Exit codes are 0 on success, 1 on runtime failure and 2 on
//! usage or configuration errors. `SURFFLOW_THREADS` sets the worker count.

pub mod bench;
pub mod config;
pub mod defects;
pub mod manifest;
pub mod meshgen;
pub mod runner;
pub mod sweep;
pub mod vtk;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use surfflow::mesh::{load_mesh, save_mesh, Axis, CurvatureSource};
use surfflow::solver::read_field_csv;
use surfflow::InitialCondition;

use crate::config::{ConfigError, RunConfig};
use crate::manifest::{MeshProvenance, RunManifest};
use crate::meshgen::{AxisName, MeshSpec};

pub const THREADS_ENV: &str = "SURFFLOW_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "surfflow",
    version,
    about = "Incompressible Navier-Stokes flow on closed surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a mesh as OFF plus a manifest.
    MeshGen {
        #[command(subcommand)]
        kind: MeshGenKind,
    },
    /// Run a simulation described by a TOML config.
    Run { config: PathBuf },
    /// Penalty convergence sweep of a config.
    AlphaSweep {
        config: PathBuf,
        /// Comma-separated penalty values; default 32, 64, ..., 8192.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Time rot-rot against grad-div assembly on refined tori.
    BenchAssembly {
        /// Comma-separated major-direction resolutions of the benchmark torus.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Print the defects of a tangent field.
    Defects {
        /// OFF mesh.
        #[arg(long)]
        mesh: PathBuf,
        /// `vx,vy,vz` CSV with one row per vertex.
        #[arg(long, conflicts_with = "initial", required_unless_present = "initial")]
        field: Option<PathBuf>,
        /// Named field instead of a file.
        #[arg(long)]
        initial: Option<InitialArg>,
        /// Torus radii for `harmonic-mean`.
        #[arg(long = "R")]
        major: Option<f64>,
        #[arg(long = "r")]
        minor: Option<f64>,
        #[arg(long, value_enum, default_value = "y")]
        axis: AxisName,
        #[arg(long, default_value_t = surfflow::diagnostics::DEFAULT_ZERO_THRESHOLD)]
        zero_threshold: f64,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialArg {
    HarmonicMean,
    RotStream,
    Killing,
}

#[derive(Debug, Subcommand)]
pub enum MeshGenKind {
    /// Structured torus about the y-axis.
    Torus {
        #[arg(long = "R")]
        major: f64,
        #[arg(long = "r")]
        minor: f64,
        #[arg(long)]
        nmajor: usize,
        #[arg(long)]
        nminor: usize,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Glued tori from a level set.
    Ntorus {
        #[arg(long)]
        n: usize,
        /// Gluing offset; defaults to the standard layout's value.
        #[arg(long)]
        delta: Option<f64>,
        /// Semicolon-separated `x,y,z` midpoints; defaults to the standard layout.
        #[arg(long, allow_hyphen_values = true)]
        midpoints: Option<String>,
        #[arg(long = "R", default_value_t = 1.0)]
        major: f64,
        #[arg(long = "r", default_value_t = 0.5)]
        minor: f64,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, value_enum)]
        axis: Option<AxisName>,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
}

fn parse_midpoints(s: &str) -> Result<Vec<[f64; 3]>, ConfigError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let xs: Vec<f64> = p
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| ConfigError(format!("bad midpoint '{p}'")))?;
            <[f64; 3]>::try_from(xs)
                .map_err(|_| ConfigError(format!("midpoint '{p}' needs three coordinates")))
        })
        .collect()
}

fn ntorus_spec(
    n: usize,
    delta: Option<f64>,
    midpoints: Option<&str>,
    major: f64,
    minor: f64,
    resolution: usize,
    axis: Option<AxisName>,
) -> Result<MeshSpec, ConfigError> {
    let standard = MeshSpec::standard_ntorus(n, resolution).ok();
    let (std_mid, std_delta, std_axis) = match standard {
        Some(MeshSpec::Ntorus {
            midpoints,
            delta,
            axis,
            ..
        }) => (Some(midpoints), Some(delta), Some(axis)),
        _ => (None, None, None),
    };
    let midpoints = match midpoints {
        Some(s) => parse_midpoints(s)?,
        None => {
            std_mid.ok_or_else(|| ConfigError(format!("--midpoints is required for n = {n}")))?
        }
    };
    if midpoints.len() != n {
        return Err(ConfigError(format!(
            "--n {n} but {} midpoints given",
            midpoints.len()
        )));
    }
    Ok(MeshSpec::Ntorus {
        midpoints,
        major,
        minor,
        delta: delta.or(std_delta).unwrap_or(1.0),
        resolution,
        axis: axis.or(std_axis).unwrap_or_default(),
    })
}

fn mesh_gen(kind: MeshGenKind, out: &mut dyn Write) -> anyhow::Result<()> {
    let (spec, dir, name) = match kind {
        MeshGenKind::Torus {
            major,
            minor,
            nmajor,
            nminor,
            output,
        } => (
            MeshSpec::Torus {
                major,
                minor,
                n_major: nmajor,
                n_minor: nminor,
            },
            output,
            "torus.off",
        ),
        MeshGenKind::Ntorus {
            n,
            delta,
            midpoints,
            major,
            minor,
            resolution,
            axis,
            output,
        } => (
            ntorus_spec(
                n,
                delta,
                midpoints.as_deref(),
                major,
                minor,
                resolution,
                axis,
            )?,
            output,
            "ntorus.off",
        ),
    };
    let mut manifest = RunManifest::new("mesh-gen", serde_json::to_value(&spec)?);
    let mesh = manifest.time("generate", || spec.build())?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    save_mesh(&mesh, &path)?;
    manifest
        .mesh
        .push(MeshProvenance::of(&mesh, serde_json::to_value(&spec)?));
    manifest.write(&dir)?;
    writeln!(
        out,
        "wrote {} ({} vertices, {} faces, chi {})",
        path.display(),
        mesh.num_vertices(),
        mesh.num_faces(),
        mesh.euler_characteristic()
    )?;
    Ok(())
}

fn run(config: PathBuf, out: &mut dyn Write) -> anyhow::Result<()> {
    let cfg = RunConfig::load(&config)?;
    let outcome = runner::execute(&cfg)?;
    let last = outcome.records.last().expect("at least the initial record");
    writeln!(
        out,
        "{} steps to t = {}: E = {:e}, {} defects (sum {}), chi {}",
        outcome.reports.len(),
        last.t,
        last.energy,
        last.defects.len(),
        last.index_sum,
        outcome.euler_characteristic
    )?;
    writeln!(out, "wrote {}", cfg.output.dir.display())?;
    if !outcome.projection_failures.is_empty() {
        anyhow::bail!(
            "the corrected divergence exceeded its bound at {} steps (first: step {})",
            outcome.projection_failures.len(),
            outcome.projection_failures[0]
        );
    }
    if !outcome.index_failures.is_empty() {
        anyhow::bail!(
            "the defect index sum differed from chi = {} at {} times (first: t = {})",
            outcome.euler_characteristic,
            outcome.index_failures.len(),
            outcome.index_failures[0]
        );
    }
    Ok(())
}

fn alpha_sweep(
    config: PathBuf,
    alphas: Option<Vec<f64>>,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let cfg = RunConfig::load(&config)?;
    let alphas = alphas.unwrap_or_else(|| sweep::doubling_ladder(32.0, 8192.0));
    writeln!(out, "alpha,error,normal_norm_accum")?;
    let result = sweep::run_and_write(&cfg, &alphas, |r| {
        let _ = writeln!(out, "{},{:e},{:e}", r.alpha, r.error, r.normal_norm_accum);
    })?;
    writeln!(
        out,
        "slope {:.4} against reference alpha {}",
        result.slope, result.reference_alpha
    )?;
    Ok(())
}

fn bench_assembly(
    sizes: Vec<usize>,
    reps: usize,
    output: PathBuf,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new(
        "bench-assembly",
        serde_json::json!({ "sizes": sizes, "reps": reps }),
    );
    writeln!(out, "{}", bench::BENCH_HEADER)?;
    let rows = manifest.time("bench", || {
        bench::bench_assembly(&sizes, reps, |r| {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:.2}",
                r.dofs, r.t_rotrot, r.t_graddiv, r.ratio
            );
        })
    })?;
    let (rr, gd) = bench::term_audit()?;
    writeln!(
        out,
        "terms: rot-rot {} ({} local products), grad-div {} ({} local products)",
        rr.total(),
        rr.local_products,
        gd.total(),
        gd.local_products
    )?;
    std::fs::create_dir_all(&output)?;
    bench::write_csv(&output.join("bench_assembly.csv"), &rows)?;
    for &n in &sizes {
        let mesh = surfflow::mesh::generate_torus(2.0, 0.5, n, (n / 4).max(3))?;
        manifest.mesh.push(MeshProvenance::of(
            &mesh,
            serde_json::json!({ "torus": [2.0, 0.5, n, (n / 4).max(3)] }),
        ));
    }
    manifest.write(&output)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn defects_cmd(
    mesh: PathBuf,
    field: Option<PathBuf>,
    initial: Option<InitialArg>,
    major: Option<f64>,
    minor: Option<f64>,
    axis: AxisName,
    zero_threshold: f64,
    csv: Option<PathBuf>,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    if !(zero_threshold > 0.0 && zero_threshold < 1.0) {
        return Err(ConfigError(format!(
            "--zero-threshold must lie in (0, 1), got {zero_threshold}"
        ))
        .into());
    }
    let m = load_mesh(&mesh)?;
    let v = match (field, initial) {
        (Some(path), _) => read_field_csv(&path)?,
        (None, Some(kind)) => {
            let source = match (major, minor) {
                (Some(major), Some(minor)) => CurvatureSource::AnalyticTorus {
                    major,
                    minor,
                    axis: Axis::from(axis),
                },
                (None, None) => CurvatureSource::DiscreteAngleDefect,
                _ => return Err(ConfigError("--R and --r go together".into()).into()),
            };
            let ic = match kind {
                InitialArg::HarmonicMean => InitialCondition::HarmonicMean,
                InitialArg::RotStream => InitialCondition::RotStream,
                InitialArg::Killing => InitialCondition::Killing,
            };
            defects::named_field(&m, &ic, &source)?
        }
        (None, None) => return Err(ConfigError("pass --field or --initial".into()).into()),
    };
    let found = defects::analyze(&m, &v, zero_threshold)?;
    write!(out, "{}", defects::table(&found))?;
    if let Some(path) = csv {
        defects::write_csv(&path, &found)?;
    }
    Ok(())
}

/// Runs one command.
pub fn dispatch(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::MeshGen { kind } => mesh_gen(kind, out),
        Command::Run { config } => run(config, out),
        Command::AlphaSweep { config, alphas } => alpha_sweep(config, alphas, out),
        Command::BenchAssembly {
            sizes,
            reps,
            output,
        } => bench_assembly(sizes, reps, output, out),
        Command::Defects {
            mesh,
            field,
            initial,
            major,
            minor,
            axis,
            zero_threshold,
            csv,
        } => defects_cmd(
            mesh,
            field,
            initial,
            major,
            minor,
            axis,
            zero_threshold,
            csv,
            out,
        ),
    }
}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let usage = err.chain().any(|e| {
        e.is::<ConfigError>()
            || matches!(
                e.downcast_ref::<surfflow::Error>(),
                Some(surfflow::Error::Config(_))
            )
    });
    if usage {
        2
    } else {
        1
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(s) = std::env::var(THREADS_ENV) {
        let n: usize = s.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            ConfigError(format!(
                "{THREADS_ENV} must be a positive integer, got '{s}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match configure_threads().and_then(|_| dispatch(cli, out)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}
