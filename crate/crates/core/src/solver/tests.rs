use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::{generate_icosphere, generate_torus, Axis};
use crate::operators::{div_h, Discretization};

fn torus_mesh(n: usize, m: usize) -> SurfaceMesh {
    generate_torus(2.0, 0.5, n, m).unwrap()
}

fn config() -> SimConfig {
    SimConfig::default()
}

fn random_field(n: usize, seed: u64) -> VectorField3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorField3::from_vectors(
        &(0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect::<Vec<_>>(),
    )
}

#[test]
fn harmonic_fields_at_the_outer_equator() {
    let mesh = torus_mesh(64, 16);
    assert_eq!(mesh.vertices()[0], Vec3::new(2.5, 0.0, 0.0));
    let (vp, vt) = harmonic_fields_torus(&mesh, 2.0, 0.5).unwrap();
    assert!((vp.at(0) - Vec3::new(0.0, 0.0, 0.1)).norm() < 1e-15);
    assert!((vt.at(0) - Vec3::new(0.0, 0.1, 0.0)).norm() < 1e-15);
    let ops = Operators::new(&mesh, &config()).unwrap();
    let v0 = initial_condition(
        &mesh,
        &ops.disc,
        &InitialCondition::HarmonicMean,
        &config().curvature_source,
    )
    .unwrap();
    assert!((v0.at(0) - Vec3::new(0.0, 0.05, 0.05)).norm() < 1e-15);
    for v in [&vp, &vt] {
        assert!(v
            .dot_pointwise(ops.normals())
            .iter()
            .all(|x| x.abs() < 1e-12));
    }
}

#[test]
fn harmonic_fields_reject_axis_vertices_and_bad_radii() {
    let vertices = vec![
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(1.0, -0.5, 0.3),
        Vec3::new(-1.0, -0.5, 0.4),
        Vec3::new(0.1, -0.4, -1.0),
    ];
    let tris = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
    let mesh = SurfaceMesh::new(vertices, tris).unwrap();
    assert!(matches!(
        harmonic_fields_torus(&mesh, 2.0, 0.5),
        Err(Error::Geometry(_))
    ));
    let torus = torus_mesh(8, 4);
    assert!(harmonic_fields_torus(&torus, 0.5, 2.0).is_err());
}

#[test]
fn harmonic_mean_needs_a_torus() {
    let mesh = generate_icosphere(1.0, 1).unwrap();
    let normals = mesh.vertices().iter().map(|p| p.normalize()).collect();
    let disc = Discretization::new(&mesh, normals).unwrap();
    let r = initial_condition(
        &mesh,
        &disc,
        &InitialCondition::HarmonicMean,
        &config().curvature_source,
    );
    assert!(matches!(r, Err(Error::Config(_))));
    let mesh = torus_mesh(16, 8);
    let ops = Operators::new(&mesh, &config()).unwrap();
    let r = initial_condition(
        &mesh,
        &ops.disc,
        &InitialCondition::HarmonicMean,
        &CurvatureSource::DiscreteAngleDefect,
    );
    assert!(matches!(r, Err(Error::Config(_))));
}

#[test]
fn stream_start_is_divergence_free_in_the_limit() {
    let errs: Vec<f64> = [(32, 8), (64, 16), (128, 32)]
        .iter()
        .map(|&(n, m)| {
            let mesh = torus_mesh(n, m);
            let ops = Operators::new(&mesh, &config()).unwrap();
            let v = initial_condition(
                &mesh,
                &ops.disc,
                &InitialCondition::RotStream,
                &config().curvature_source,
            )
            .unwrap();
            ops.lumped_norm(&div_h(&ops.disc, &v).unwrap())
        })
        .collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() > 0.8, "{errs:?}");
    }
}

#[test]
fn killing_start_has_unit_norm() {
    let mesh = torus_mesh(32, 8);
    let ops = Operators::new(&mesh, &config()).unwrap();
    let v = initial_condition(
        &mesh,
        &ops.disc,
        &InitialCondition::Killing,
        &config().curvature_source,
    )
    .unwrap();
    assert!((ops.l2_norm(&v) - 1.0).abs() < 1e-12);
    let z = killing_field(&mesh, Axis::Z);
    assert_eq!(z.at(0), Vec3::new(0.0, 2.5, 0.0));
}

#[test]
fn field_csv_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let v = random_field(17, 3);
    write_field_csv(&path, &v).unwrap();
    assert_eq!(read_field_csv(&path).unwrap(), v);
    std::fs::write(&path, "vx,vy,vz\n1,2,3\n1,x,3\n").unwrap();
    match read_field_csv(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        read_field_csv(&dir.path().join("missing.csv")),
        Err(Error::Io(_))
    ));
    let mesh = torus_mesh(8, 4);
    let ops = Operators::new(&mesh, &config()).unwrap();
    write_field_csv(&path, &v).unwrap();
    let r = initial_condition(
        &mesh,
        &ops.disc,
        &InitialCondition::FromFile(path),
        &config().curvature_source,
    );
    assert!(matches!(r, Err(Error::Dimension { .. })));
}

#[test]
fn config_validation() {
    assert!(config().validate().is_ok());
    assert_eq!(config().num_steps(), 600);
    let cases: Vec<Box<dyn Fn(&mut SimConfig)>> = vec![
        Box::new(|c| c.re = 0.0),
        Box::new(|c| c.tau = -0.1),
        Box::new(|c| c.alpha = -1.0),
        Box::new(|c| c.krylov_tol = 1.0),
        Box::new(|c| c.krylov_tol = 0.0),
        Box::new(|c| c.t_end = f64::NAN),
        Box::new(|c| c.output_every = 0),
        Box::new(|c| c.krylov_max_iter = 0),
    ];
    for f in cases {
        let mut c = config();
        f(&mut c);
        assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
    }
}

fn solve(a: &BlockOperator3, rhs: &VectorField3, ops: &Operators, tol: f64) -> VectorField3 {
    let m = BlockOperator3::combine_interleaved(ops.disc.pattern3(), &[(1.0, a)]).unwrap();
    let mut x = vec![0.0; m.nrows()];
    krylov_solve(&m, &rhs.interleaved(), &mut x, tol, 5000).unwrap();
    VectorField3::from_interleaved(&x)
}

#[test]
fn momentum_systems_keep_zero_fixed() {
    let mesh = torus_mesh(24, 8);
    let cfg = config();
    let ops = Operators::new(&mesh, &cfg).unwrap();
    let zero = VectorField3::zeros(mesh.num_vertices());
    let (a, rhs) = build_momentum_system_p2(&ops, &zero, &cfg).unwrap();
    assert!(rhs.is_zero());
    assert!(solve(&a, &rhs, &ops, 1e-10).is_zero());
    let mut cfg1 = cfg.clone();
    cfg1.formulation = Formulation::Problem1;
    let ops1 = Operators::new(&mesh, &cfg1).unwrap();
    let (a, rhs) = build_momentum_system_p1(&ops1, &zero, &cfg1).unwrap();
    assert!(rhs.is_zero());
    assert!(solve(&a, &rhs, &ops1, 1e-10).is_zero());
}

#[test]
fn momentum_quadratic_form_sign_audit() {
    let mesh = torus_mesh(24, 8);
    let cfg = config();
    let ops = Operators::new(&mesh, &cfg).unwrap();
    let a = ops.static_block(&cfg).unwrap();
    let kmax = ops.kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let mblk = BlockOperator3::diagonal(&ops.mass);
    for seed in 0..20 {
        let w = random_field(mesh.num_vertices(), seed);
        let mw = mblk.bilinear(&w, &w).unwrap();
        let aw = a.bilinear(&w, &w).unwrap();
        assert!(aw >= (1.0 / cfg.tau - 2.0 / cfg.re * kmax) * mw - 1e-10 * aw.abs());
    }
}

#[test]
fn intermediate_step_is_consistent_in_tau() {
    let mesh = torus_mesh(32, 8);
    let mut diffs = Vec::new();
    for tau in [1e-2, 1e-3] {
        let mut cfg = config();
        cfg.tau = tau;
        let ops = Operators::new(&mesh, &cfg).unwrap();
        let v0 = initial_condition(
            &mesh,
            &ops.disc,
            &InitialCondition::HarmonicMean,
            &cfg.curvature_source,
        )
        .unwrap();
        let wn = v0.cross_from_left(ops.normals());
        let (a, rhs) = build_momentum_system_p2(&ops, &wn, &cfg).unwrap();
        let star = solve(&a, &rhs, &ops, 1e-12);
        diffs.push(ops.l2_norm(&star.add_scaled(-1.0, &wn)));
    }
    let ratio = diffs[0] / diffs[1];
    assert!(ratio > 8.0 && ratio < 12.0, "{diffs:?}");
}

#[test]
fn pressure_solve_examples() {
    let mesh = torus_mesh(48, 12);
    let ops = Operators::new(&mesh, &config()).unwrap();
    let lumped = ops.disc.lumped_mass();
    let opts = KrylovOptions {
        tol: 1e-10,
        max_iter: 5000,
        ell: 2,
    };
    let n = mesh.num_vertices();
    let mut p = vec![0.0; n];
    pressure_poisson_solve(&ops.stiffness, lumped, &vec![0.0; n], &mut p, &opts).unwrap();
    assert!(p.iter().all(|&x| x == 0.0));

    let f: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|x| x.x * x.y + x.z.sin())
        .collect();
    let rhs = ops.stiffness.mul_vec(&f);
    let mut p1 = vec![0.0; n];
    pressure_poisson_solve(&ops.stiffness, lumped, &rhs, &mut p1, &opts).unwrap();
    let shifted: Vec<f64> = rhs.iter().zip(lumped).map(|(r, m)| r + 3.7 * m).collect();
    let mut p2 = vec![0.0; n];
    pressure_poisson_solve(&ops.stiffness, lumped, &shifted, &mut p2, &opts).unwrap();
    for (a, b) in p1.iter().zip(&p2) {
        assert!((a - b).abs() < 1e-9);
    }
    let area: f64 = lumped.iter().sum();
    let mean = f.iter().zip(lumped).map(|(x, m)| x * m).sum::<f64>() / area;
    let err: f64 = p1
        .iter()
        .zip(&f)
        .map(|(p, f)| (p - (f - mean)).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = f.iter().map(|f| (f - mean).powi(2)).sum::<f64>().sqrt();
    assert!(err / norm < 10.0 * opts.tol, "{}", err / norm);
    assert!(p1.iter().zip(lumped).map(|(p, m)| p * m).sum::<f64>().abs() < 1e-12);
}

#[test]
fn krylov_solve_identity() {
    let a = SparseMatrix::identity(5);
    let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
    let mut x = vec![0.0; 5];
    let stats = krylov_solve(&a, &b, &mut x, 1e-12, 10).unwrap();
    assert!(stats.iterations <= 1);
    assert_eq!(x, b);
}

#[test]
fn momentum_solve_matches_dense_lu() {
    let mesh = torus_mesh(16, 6);
    assert!(mesh.num_vertices() <= 300);
    for formulation in [Formulation::Problem1, Formulation::Problem2] {
        let cfg = SimConfig {
            formulation,
            ..config()
        };
        let ops = Operators::new(&mesh, &cfg).unwrap();
        let v0 = initial_condition(
            &mesh,
            &ops.disc,
            &InitialCondition::HarmonicMean,
            &cfg.curvature_source,
        )
        .unwrap();
        let field = ops.velocity(&v0, Formulation::Problem1);
        let field = match formulation {
            Formulation::Problem1 => field,
            Formulation::Problem2 => field.cross_from_left(ops.normals()),
        };
        let (a, rhs) = match formulation {
            Formulation::Problem1 => build_momentum_system_p1(&ops, &field, &cfg).unwrap(),
            Formulation::Problem2 => build_momentum_system_p2(&ops, &field, &cfg).unwrap(),
        };
        let m = BlockOperator3::combine_interleaved(ops.disc.pattern3(), &[(1.0, &a)]).unwrap();
        let b = rhs.interleaved();
        let mut x = vec![0.0; b.len()];
        krylov_solve(&m, &b, &mut x, 1e-12, 5000).unwrap();
        let dense = m
            .to_dense()
            .lu()
            .solve(&nalgebra::DVector::from_vec(b))
            .unwrap();
        let diff: f64 = x
            .iter()
            .zip(dense.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff / dense.norm() < 1e-8, "{}", diff / dense.norm());
    }
}

#[test]
fn zero_state_is_stationary() {
    let mesh = torus_mesh(16, 8);
    for formulation in [Formulation::Problem1, Formulation::Problem2] {
        let cfg = SimConfig {
            formulation,
            t_end: 0.3,
            ..config()
        };
        let ops = Operators::new(&mesh, &cfg).unwrap();
        let mut sim =
            Simulation::from_parts(ops, cfg, VectorField3::zeros(mesh.num_vertices())).unwrap();
        while !sim.is_finished() {
            sim.step().unwrap();
        }
        assert_eq!(sim.state().step, 3);
        assert!(sim.velocity().is_zero());
        assert!(sim.state().pressure.iter().all(|&p| p == 0.0));
    }
}

#[test]
fn projection_removes_weak_divergence() {
    let mesh = torus_mesh(64, 16);
    for formulation in [Formulation::Problem2, Formulation::Problem1] {
        let cfg = SimConfig {
            t_end: 1.0,
            formulation,
            ..config()
        };
        let mut reports = Vec::new();
        run_simulation(&mesh, cfg, |_, r| {
            if let Some(r) = r {
                reports.push(r.clone());
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(reports.len(), 10);
        for r in &reports {
            assert!(r.div_post < 1e-6 * r.div_pre, "{r:?}");
            assert!(r.momentum.residual <= 1e-10 && r.pressure.residual <= 1e-10);
        }
    }
}

#[test]
fn killing_start_is_nearly_steady() {
    let mesh = torus_mesh(128, 32);
    for formulation in [Formulation::Problem2, Formulation::Problem1] {
        let cfg = SimConfig {
            formulation,
            initial_condition: InitialCondition::Killing,
            ..config()
        };
        let mut sim = Simulation::new(&mesh, cfg.clone()).unwrap();
        let v0 = sim.velocity();
        sim.step().unwrap();
        let change = sim
            .operators()
            .l2_norm(&sim.velocity().add_scaled(-1.0, &v0))
            / cfg.tau;
        assert!(change < 0.05, "{formulation:?}: {change}");
    }
}

#[test]
fn runs_are_deterministic() {
    let mesh = torus_mesh(24, 8);
    let cfg = SimConfig {
        t_end: 0.5,
        ..config()
    };
    let a = run_simulation(&mesh, cfg.clone(), |_, _| Ok(())).unwrap();
    let b = run_simulation(&mesh, cfg, |_, _| Ok(())).unwrap();
    assert_eq!(a.state(), b.state());
}
