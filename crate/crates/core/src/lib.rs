//! Incompressible Navier-Stokes flow on closed triangulated surfaces.
//!
//! Velocities are R^3-valued P1 fields kept tangential by a normal penalty.
//! Time stepping is a Chorin projection in either the direct velocity or the
//! rotated `w = nu x v` formulation.

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod krylov;
pub mod mesh;
pub mod operators;
pub mod solver;
pub mod sparse;

pub use diagnostics::{Defect, DiagnosticsRecord};
pub use error::{Error, Result};
pub use fields::{ScalarField, VectorField3};
pub use krylov::{bicgstab, conjugate_gradient, KrylovOptions, SolveStats};
pub use mesh::{CurvatureSource, LevelSetNTorus, SurfaceMesh, Vec3};
pub use operators::{BlockOperator3, Discretization, TermAudit};
pub use solver::{
    Formulation, InitialCondition, SimConfig, Simulation, SimulationState, StepReport,
};
pub use sparse::{CsrPattern, SparseMatrix};
