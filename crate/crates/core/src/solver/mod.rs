//! Chorin projection time stepping for the penalized Cartesian formulations.
//!
//! `Problem2` (default) advances the rotated field `w = nu x v` and uses the
//! grad-div viscous block; `Problem1` advances `v` directly with rot-rot.

mod initial;

use crate::error::{check_len, Error, Result};
use crate::fields::{ScalarField, VectorField3};
use crate::krylov::{bicgstab, conjugate_gradient, KrylovOptions, SolveStats};
use crate::mesh::{
    gaussian_curvature, vertex_normals, CurvatureSource, LevelSetNTorus, SurfaceMesh, Vec3,
};
use crate::operators::{
    assemble_advection_p1, assemble_advection_p2, assemble_curvature_term, assemble_graddiv_block,
    assemble_mass, assemble_penalty, assemble_pressure_rhs_p1, assemble_pressure_rhs_p2,
    assemble_projection_laplacian, assemble_rotrot_block, assemble_stiffness, div_h,
    face_to_vertex, surface_gradient, BlockOperator3, Discretization,
};
use crate::sparse::SparseMatrix;

pub use initial::{
    harmonic_fields_torus, initial_condition, killing_field, read_field_csv, rot_stream,
    stream_function_psi0, write_field_csv, InitialCondition,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// Unrotated velocity with the rot-rot viscous term.
    Problem1,
    /// Rotated velocity `w = nu x v` with the grad-div viscous term.
    #[default]
    Problem2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub re: f64,
    pub tau: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub formulation: Formulation,
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
    /// Snapshot cadence in steps.
    pub output_every: usize,
    pub curvature_source: CurvatureSource,
    pub initial_condition: InitialCondition,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            re: 10.0,
            tau: 0.1,
            alpha: 3000.0,
            t_end: 60.0,
            formulation: Formulation::Problem2,
            krylov_tol: 1e-10,
            krylov_max_iter: 2000,
            output_every: 10,
            curvature_source: CurvatureSource::AnalyticTorus {
                major: 2.0,
                minor: 0.5,
                axis: Default::default(),
            },
            initial_condition: InitialCondition::HarmonicMean,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("{what} out of range: {v}")));
        if !(self.re > 0.0 && self.re.is_finite()) {
            return bad("Re", self.re);
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau", self.tau);
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha", self.alpha);
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end", self.t_end);
        }
        if !(self.krylov_tol > 0.0 && self.krylov_tol < 1.0) {
            return bad("krylov_tol", self.krylov_tol);
        }
        if self.krylov_max_iter == 0 {
            return Err(Error::Config("krylov_max_iter must be positive".into()));
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_every must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn num_steps(&self) -> usize {
        (self.t_end / self.tau).round() as usize
    }

    fn krylov(&self) -> KrylovOptions {
        KrylovOptions {
            tol: self.krylov_tol,
            max_iter: self.krylov_max_iter,
            ell: 2,
        }
    }
}

/// Time-step state. `field` is `w^n` for Problem 2 and `v^n` for Problem 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub step: usize,
    pub time: f64,
    pub field: VectorField3,
    pub pressure: ScalarField,
}

/// What happened during one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub time: f64,
    /// Weak divergence norm of the intermediate velocity.
    pub div_pre: f64,
    /// Weak divergence norm of the corrected velocity.
    pub div_post: f64,
    pub momentum: SolveStats,
    pub pressure: SolveStats,
}

/// Time-independent operators of a run.
#[derive(Debug, Clone)]
pub struct Operators {
    pub disc: Discretization,
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    /// Pressure operator of the discrete projection.
    pub pressure: SparseMatrix,
    pub kappa: ScalarField,
    /// Grad-div for Problem 2, rot-rot for Problem 1.
    pub viscous: BlockOperator3,
    pub curvature: BlockOperator3,
    pub penalty: BlockOperator3,
}

impl Operators {
    pub fn new(mesh: &SurfaceMesh, config: &SimConfig) -> Result<Self> {
        let ls = match &config.curvature_source {
            CurvatureSource::AnalyticTorus { major, minor, axis } => {
                Some(LevelSetNTorus::single(*major, *minor, *axis)?)
            }
            CurvatureSource::AnalyticLevelSet(ls) => Some(ls.clone()),
            CurvatureSource::DiscreteAngleDefect => None,
        };
        let normals = vertex_normals(mesh, ls.as_ref())?;
        let disc = Discretization::new(mesh, normals)?;
        let kappa = gaussian_curvature(mesh, &config.curvature_source)?;
        let (viscous, _) = match config.formulation {
            Formulation::Problem1 => assemble_rotrot_block(&disc),
            Formulation::Problem2 => assemble_graddiv_block(&disc),
        };
        Ok(Self {
            mass: assemble_mass(&disc),
            stiffness: assemble_stiffness(&disc),
            pressure: assemble_projection_laplacian(&disc),
            curvature: assemble_curvature_term(&disc, &kappa)?,
            penalty: assemble_penalty(&disc, config.alpha)?,
            kappa,
            viscous,
            disc,
        })
    }

    pub fn normals(&self) -> &[Vec3] {
        self.disc.normals()
    }

    /// `M/tau + (1/Re)(V - C) + P`, the part of the momentum operator that does not change.
    pub fn static_block(&self, config: &SimConfig) -> Result<BlockOperator3> {
        let mut a = BlockOperator3::diagonal(&self.mass);
        a.scale(1.0 / config.tau);
        a.add_scaled(1.0 / config.re, &self.viscous)?;
        a.add_scaled(-1.0 / config.re, &self.curvature)?;
        a.add_scaled(1.0, &self.penalty)?;
        Ok(a)
    }

    /// Lumped L2 norm of a vertex scalar.
    pub fn lumped_norm(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(self.disc.lumped_mass())
            .map(|(x, m)| m * x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// `sqrt(sum_i u_i^T M u_i)`.
    pub fn l2_norm(&self, u: &VectorField3) -> f64 {
        u.components
            .iter()
            .map(|c| self.mass.bilinear(c, c))
            .sum::<f64>()
            .sqrt()
    }

    /// Tangential velocity carried by a stored field.
    pub fn velocity(&self, field: &VectorField3, formulation: Formulation) -> VectorField3 {
        match formulation {
            Formulation::Problem1 => field.clone(),
            Formulation::Problem2 => field.cross_from_left(self.normals()).scaled(-1.0),
        }
    }
}

fn block_rhs(ops: &Operators, field: &VectorField3, tau: f64) -> VectorField3 {
    VectorField3 {
        components: std::array::from_fn(|k| {
            ops.mass
                .mul_vec(&field.components[k])
                .into_iter()
                .map(|x| x / tau)
                .collect()
        }),
    }
}

/// `A = M/tau - Adv(w^n) + (1/Re)(GD - C) + P`, `rhs = M w^n / tau`.
pub fn build_momentum_system_p2(
    ops: &Operators,
    wn: &VectorField3,
    config: &SimConfig,
) -> Result<(BlockOperator3, VectorField3)> {
    let mut a = ops.static_block(config)?;
    a.add_scaled(-1.0, &assemble_advection_p2(&ops.disc, wn)?)?;
    Ok((a, block_rhs(ops, wn, config.tau)))
}

/// `A = M/tau + Adv(v^n) + (1/Re)(RR - C) + P`, `rhs = M v^n / tau`.
pub fn build_momentum_system_p1(
    ops: &Operators,
    vn: &VectorField3,
    config: &SimConfig,
) -> Result<(BlockOperator3, VectorField3)> {
    let mut a = ops.static_block(config)?;
    a.add_scaled(1.0, &assemble_advection_p1(&ops.disc, vn)?)?;
    Ok((a, block_rhs(ops, vn, config.tau)))
}

/// BiCGStab(2) with Jacobi preconditioning; `x` is the initial guess and the result.
pub fn krylov_solve(
    a: &SparseMatrix,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    bicgstab(
        a,
        b,
        x,
        &KrylovOptions {
            tol,
            max_iter,
            ell: 2,
        },
    )
}

/// Solves `K p = rhs` on a closed surface.
///
/// The load is made compatible by removing `(sum rhs / area) * lumped mass`;
/// the solution is shifted to lumped-mass mean zero. `p` holds the initial
/// guess on entry.
pub fn pressure_poisson_solve(
    k: &SparseMatrix,
    lumped: &[f64],
    rhs: &[f64],
    p: &mut [f64],
    opts: &KrylovOptions,
) -> Result<SolveStats> {
    check_len(k.nrows(), rhs.len())?;
    check_len(k.nrows(), lumped.len())?;
    let area: f64 = lumped.iter().sum();
    let shift = rhs.iter().sum::<f64>() / area;
    let b: Vec<f64> = rhs.iter().zip(lumped).map(|(r, m)| r - shift * m).collect();
    let stats = conjugate_gradient(k, &b, p, opts)?;
    let mean = p.iter().zip(lumped).map(|(x, m)| x * m).sum::<f64>() / area;
    for x in p.iter_mut() {
        *x -= mean;
    }
    Ok(stats)
}

/// A running simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    ops: Operators,
    state: SimulationState,
    /// Interleaved storage reused for the momentum matrix.
    system: SparseMatrix,
    static_block: BlockOperator3,
    initial_velocity: VectorField3,
}

impl Simulation {
    pub fn new(mesh: &SurfaceMesh, config: SimConfig) -> Result<Self> {
        config.validate()?;
        let ops = Operators::new(mesh, &config)?;
        let v0 = initial_condition(
            mesh,
            &ops.disc,
            &config.initial_condition,
            &config.curvature_source,
        )?;
        Self::from_parts(ops, config, v0)
    }

    /// Starts from a given tangential velocity on prebuilt operators.
    pub fn from_parts(ops: Operators, config: SimConfig, v0: VectorField3) -> Result<Self> {
        config.validate()?;
        check_len(ops.disc.num_vertices(), v0.len())?;
        let field = match config.formulation {
            Formulation::Problem1 => v0.clone(),
            Formulation::Problem2 => v0.cross_from_left(ops.normals()),
        };
        let static_block = ops.static_block(&config)?;
        let n = ops.disc.num_vertices();
        Ok(Self {
            system: SparseMatrix::zeros(ops.disc.pattern3().clone()),
            static_block,
            state: SimulationState {
                step: 0,
                time: 0.0,
                field,
                pressure: vec![0.0; n],
            },
            initial_velocity: v0,
            config,
            ops,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn initial_velocity(&self) -> &VectorField3 {
        &self.initial_velocity
    }

    /// Current tangential velocity `v^n`.
    pub fn velocity(&self) -> VectorField3 {
        self.ops
            .velocity(&self.state.field, self.config.formulation)
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.config.num_steps()
    }

    /// One Chorin projection step.
    pub fn step(&mut self) -> Result<StepReport> {
        let cfg = &self.config;
        let ops = &self.ops;
        let disc = &ops.disc;
        let field = &self.state.field;
        let advection = match cfg.formulation {
            Formulation::Problem1 => assemble_advection_p1(disc, field)?,
            Formulation::Problem2 => assemble_advection_p2(disc, field)?,
        };
        let sign = match cfg.formulation {
            Formulation::Problem1 => 1.0,
            Formulation::Problem2 => -1.0,
        };
        BlockOperator3::combine_into(
            &mut self.system,
            &[(1.0, &self.static_block), (sign, &advection)],
        )?;
        let rhs = block_rhs(ops, field, cfg.tau).interleaved();
        let mut x = field.interleaved();
        let momentum = bicgstab(&self.system, &rhs, &mut x, &cfg.krylov())?;
        let star = VectorField3::from_interleaved(&x);

        let load = match cfg.formulation {
            Formulation::Problem1 => assemble_pressure_rhs_p1(disc, &star)?,
            Formulation::Problem2 => assemble_pressure_rhs_p2(disc, &star)?,
        };
        let load: Vec<f64> = load.iter().map(|l| l / cfg.tau).collect();
        let mut p = self.state.pressure.clone();
        let pressure = pressure_poisson_solve(
            &ops.pressure,
            disc.lumped_mass(),
            &load,
            &mut p,
            &cfg.krylov(),
        )?;

        let grad = face_to_vertex(disc, &surface_gradient(disc, &p)?)?;
        let normals = disc.normals();
        let correction: Vec<Vec3> = (0..grad.len())
            .map(|a| {
                let (g, nu) = (grad.at(a), normals[a]);
                match cfg.formulation {
                    Formulation::Problem1 => g - nu * nu.dot(&g),
                    Formulation::Problem2 => nu.cross(&g),
                }
            })
            .collect();
        let correction = VectorField3::from_vectors(&correction);
        let next = star.add_scaled(-cfg.tau, &correction);

        let div_pre = ops.lumped_norm(&div_h(disc, &ops.velocity(&star, cfg.formulation))?);
        let div_post = ops.lumped_norm(&div_h(disc, &ops.velocity(&next, cfg.formulation))?);
        self.state.step += 1;
        self.state.time = self.state.step as f64 * cfg.tau;
        self.state.field = next;
        self.state.pressure = p;
        Ok(StepReport {
            step: self.state.step,
            time: self.state.time,
            div_pre,
            div_post,
            momentum,
            pressure,
        })
    }
}

/// Runs to `t_end`, calling `observe` before the first step and after every step.
pub fn run_simulation(
    mesh: &SurfaceMesh,
    config: SimConfig,
    mut observe: impl FnMut(&Simulation, Option<&StepReport>) -> Result<()>,
) -> Result<Simulation> {
    let mut sim = Simulation::new(mesh, config)?;
    observe(&sim, None)?;
    while !sim.is_finished() {
        let report = sim.step()?;
        observe(&sim, Some(&report))?;
    }
    Ok(sim)
}

#[cfg(test)]
mod tests;
