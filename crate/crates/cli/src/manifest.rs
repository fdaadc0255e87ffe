//! Per-directory run manifest.

use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use surfflow::mesh::write_off;
use surfflow::SurfaceMesh;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshProvenance {
    /// Generator parameters or the source file.
    pub source: serde_json::Value,
    /// SHA-256 of the mesh in OFF form.
    pub sha256: String,
    pub vertices: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
}

impl MeshProvenance {
    pub fn of(mesh: &SurfaceMesh, source: serde_json::Value) -> Self {
        Self {
            source,
            sha256: mesh_sha256(mesh),
            vertices: mesh.num_vertices(),
            faces: mesh.num_faces(),
            euler_characteristic: mesh.euler_characteristic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub mesh: Vec<MeshProvenance>,
    pub phases: Vec<Phase>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            mesh: Vec::new(),
            phases: Vec::new(),
        }
    }

    /// Runs `f` and records its wall time under `name`.
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push(Phase {
            name: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn mesh_sha256(mesh: &SurfaceMesh) -> String {
    let mut buf = Vec::new();
    write_off(mesh, &mut buf).expect("writing to memory");
    hex::encode(Sha256::digest(&buf))
}
