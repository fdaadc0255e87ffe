//! TOML run configuration.
//!
//! ```toml
//! [mesh]
//! kind = "torus"
//! major = 2.0
//! minor = 0.5
//! n_major = 128
//! n_minor = 32
//!
//! [physics]
//! re = 10.0
//! tau = 0.1
//! alpha = 3000.0
//! t_end = 60.0
//! formulation = "problem2"
//! initial = "harmonic_mean"
//!
//! [solver]
//! krylov_tol = 1e-10
//!
//! [output]
//! dir = "out"
//! snapshot_every = 10
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use surfflow::mesh::CurvatureSource;
use surfflow::{Formulation, InitialCondition, SimConfig};

use crate::meshgen::MeshSpec;

/// Error in the user's configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FormulationName {
    Problem1,
    #[default]
    Problem2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialName {
    #[default]
    HarmonicMean,
    RotStream,
    Killing,
    Zero,
    /// Read from `initial_file`.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureName {
    /// Closed form of the generating surface; falls back to error for file meshes.
    #[default]
    Analytic,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub re: f64,
    pub tau: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub formulation: FormulationName,
    pub initial: InitialName,
    pub initial_file: Option<PathBuf>,
    pub curvature: CurvatureName,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            re: d.re,
            tau: d.tau,
            alpha: d.alpha,
            t_end: d.t_end,
            formulation: FormulationName::Problem2,
            initial: InitialName::HarmonicMean,
            initial_file: None,
            curvature: CurvatureName::Analytic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            krylov_tol: d.krylov_tol,
            krylov_max_iter: d.krylov_max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Steps between VTK snapshots; 0 disables them.
    pub snapshot_every: usize,
    /// Relative magnitude below which a vertex counts as a zero of the field.
    pub zero_threshold: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshot_every: 10,
            zero_threshold: surfflow::diagnostics::DEFAULT_ZERO_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let MeshSpec::File { path } = &mut self.mesh {
            fix(path);
        }
        if let Some(p) = &mut self.physics.initial_file {
            fix(p);
        }
        fix(&mut self.output.dir);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    /// Curvature source matching the mesh description.
    pub fn curvature_source(&self) -> Result<CurvatureSource, ConfigError> {
        match (self.physics.curvature, self.mesh.analytic_source()) {
            (CurvatureName::Discrete, _) => Ok(CurvatureSource::DiscreteAngleDefect),
            (CurvatureName::Analytic, Some(src)) => Ok(src),
            (CurvatureName::Analytic, None) => Err(ConfigError(
                "analytic curvature needs a generated mesh; set physics.curvature = \"discrete\" for mesh files".into(),
            )),
        }
    }

    /// Solver configuration for `num_vertices` vertices.
    pub fn sim_config(&self, num_vertices: usize) -> Result<SimConfig, ConfigError> {
        let p = &self.physics;
        let initial_condition = match p.initial {
            InitialName::HarmonicMean => InitialCondition::HarmonicMean,
            InitialName::RotStream => InitialCondition::RotStream,
            InitialName::Killing => InitialCondition::Killing,
            InitialName::Zero => {
                InitialCondition::Field(surfflow::VectorField3::zeros(num_vertices))
            }
            InitialName::File => match &p.initial_file {
                Some(path) => InitialCondition::FromFile(path.clone()),
                None => {
                    return Err(ConfigError(
                        "physics.initial = \"file\" needs physics.initial_file".into(),
                    ))
                }
            },
        };
        if p.initial != InitialName::File && p.initial_file.is_some() {
            return Err(ConfigError(
                "physics.initial_file is only used with physics.initial = \"file\"".into(),
            ));
        }
        let cfg = SimConfig {
            re: p.re,
            tau: p.tau,
            alpha: p.alpha,
            t_end: p.t_end,
            formulation: match p.formulation {
                FormulationName::Problem1 => Formulation::Problem1,
                FormulationName::Problem2 => Formulation::Problem2,
            },
            krylov_tol: self.solver.krylov_tol,
            krylov_max_iter: self.solver.krylov_max_iter,
            output_every: self.output.snapshot_every.max(1),
            curvature_source: self.curvature_source()?,
            initial_condition,
        };
        cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
        if !(self.output.zero_threshold > 0.0 && self.output.zero_threshold < 1.0) {
            return Err(ConfigError(format!(
                "output.zero_threshold must lie in (0, 1), got {}",
                self.output.zero_threshold
            )));
        }
        Ok(cfg)
    }

    /// The single-torus benchmark: R = 2, r = 0.5, harmonic-mean start.
    pub fn torus_benchmark(n_major: usize, n_minor: usize) -> Self {
        Self {
            mesh: MeshSpec::Torus {
                major: 2.0,
                minor: 0.5,
                n_major,
                n_minor,
            },
            physics: PhysicsSection::default(),
            solver: SolverSection::default(),
            output: OutputSection::default(),
        }
    }
}
