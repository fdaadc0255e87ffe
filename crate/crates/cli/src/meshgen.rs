//! Mesh descriptions and their realization.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use surfflow::mesh::{
    extract_levelset_mesh, generate_torus, load_mesh, Axis, CurvatureSource, ExtractionOptions,
};
use surfflow::{LevelSetNTorus, SurfaceMesh, Vec3};

use crate::config::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    #[default]
    Y,
    Z,
}

impl From<AxisName> for Axis {
    fn from(a: AxisName) -> Self {
        match a {
            AxisName::Y => Axis::Y,
            AxisName::Z => Axis::Z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    /// Structured torus about the y-axis.
    Torus {
        major: f64,
        minor: f64,
        n_major: usize,
        n_minor: usize,
    },
    /// Level set of glued tori, triangulated on a grid.
    Ntorus {
        midpoints: Vec<[f64; 3]>,
        major: f64,
        minor: f64,
        delta: f64,
        resolution: usize,
        #[serde(default)]
        axis: AxisName,
    },
    /// OFF file.
    File { path: PathBuf },
}

impl MeshSpec {
    /// Glued tori with the standard layout for `n` in 1..=3: R = 1, r = 0.5.
    pub fn standard_ntorus(n: usize, resolution: usize) -> Result<Self, ConfigError> {
        let (midpoints, delta, axis) = match n {
            1 => (vec![[0.0, 0.0, 0.0]], 0.0, AxisName::Y),
            2 => (vec![[-1.2, 0.0, 0.0], [1.2, 0.0, 0.0]], 1.0, AxisName::Y),
            3 => (
                vec![[-1.2, -0.75, 0.0], [1.2, -0.75, 0.0], [0.0, 1.33, 0.0]],
                10.0,
                AxisName::Z,
            ),
            _ => {
                return Err(ConfigError(format!(
                    "no standard layout for {n} tori; pass midpoints explicitly"
                )))
            }
        };
        Ok(Self::Ntorus {
            midpoints,
            major: 1.0,
            minor: 0.5,
            delta,
            resolution,
            axis,
        })
    }

    fn level_set(&self) -> Option<Result<LevelSetNTorus, ConfigError>> {
        match self {
            Self::Ntorus {
                midpoints,
                major,
                minor,
                delta,
                axis,
                ..
            } => Some(
                LevelSetNTorus::new(
                    midpoints.iter().map(|m| Vec3::from(*m)).collect(),
                    *major,
                    *minor,
                    *delta,
                    (*axis).into(),
                )
                .map_err(|e| ConfigError(e.to_string())),
            ),
            _ => None,
        }
    }

    /// Closed-form curvature source of a generated surface.
    pub fn analytic_source(&self) -> Option<CurvatureSource> {
        match self {
            Self::Torus { major, minor, .. } => Some(CurvatureSource::AnalyticTorus {
                major: *major,
                minor: *minor,
                axis: Axis::Y,
            }),
            Self::Ntorus { .. } => self
                .level_set()?
                .ok()
                .map(CurvatureSource::AnalyticLevelSet),
            Self::File { .. } => None,
        }
    }

    pub fn build(&self) -> anyhow::Result<SurfaceMesh> {
        Ok(match self {
            Self::Torus {
                major,
                minor,
                n_major,
                n_minor,
            } => generate_torus(*major, *minor, *n_major, *n_minor)
                .map_err(|e| ConfigError(e.to_string()))?,
            Self::Ntorus { resolution, .. } => {
                let ls = self.level_set().expect("n-torus has a level set")?;
                if *resolution < 4 {
                    return Err(ConfigError(format!(
                        "resolution must be at least 4, got {resolution}"
                    ))
                    .into());
                }
                extract_levelset_mesh(&ls, &ExtractionOptions::new(*resolution))?
            }
            Self::File { path } => load_mesh(path)?,
        })
    }
}
