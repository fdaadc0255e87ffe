//! Fixtures shared by the benchmarks.

use surfflow::mesh::{generate_torus, vertex_normals, Axis};
use surfflow::{Discretization, LevelSetNTorus, SurfaceMesh};

/// The R = 2, r = 0.5 benchmark torus with `n x n/4` vertices.
pub fn torus(n: usize) -> SurfaceMesh {
    generate_torus(2.0, 0.5, n, (n / 4).max(3)).expect("valid torus")
}

pub fn torus_discretization(n: usize) -> Discretization {
    let mesh = torus(n);
    let ls = LevelSetNTorus::single(2.0, 0.5, Axis::Y).expect("valid radii");
    Discretization::new(&mesh, vertex_normals(&mesh, Some(&ls)).expect("normals"))
        .expect("discretization")
}
