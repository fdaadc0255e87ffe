//! The `defects` command.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use surfflow::diagnostics::detect_defects;
use surfflow::mesh::{vertex_normals, CurvatureSource};
use surfflow::solver::initial_condition;
use surfflow::{Defect, Discretization, InitialCondition, SurfaceMesh, VectorField3};

use crate::config::ConfigError;

/// Builds a field on `mesh` from one of the named starting velocities.
pub fn named_field(
    mesh: &SurfaceMesh,
    ic: &InitialCondition,
    source: &CurvatureSource,
) -> anyhow::Result<VectorField3> {
    let ls = match source {
        CurvatureSource::AnalyticLevelSet(ls) => Some(ls),
        _ => None,
    };
    let disc = Discretization::new(mesh, vertex_normals(mesh, ls)?)?;
    initial_condition(mesh, &disc, ic, source).map_err(|e| match e {
        surfflow::Error::Config(m) => ConfigError(m).into(),
        other => anyhow::Error::from(other),
    })
}

/// Detects defects, checking the field length first.
pub fn analyze(
    mesh: &SurfaceMesh,
    field: &VectorField3,
    zero_threshold: f64,
) -> anyhow::Result<Vec<Defect>> {
    if field.len() != mesh.num_vertices() {
        anyhow::bail!(
            "field has {} vectors but the mesh has {} vertices",
            field.len(),
            mesh.num_vertices()
        );
    }
    Ok(detect_defects(mesh, field, zero_threshold)?)
}

/// Printable table ending in `N defects, sum S`.
pub fn table(defects: &[Defect]) -> String {
    let mut s = String::new();
    if !defects.is_empty() {
        writeln!(
            s,
            "{:>8} {:>12} {:>12} {:>12} {:>6}",
            "vertex", "x", "y", "z", "index"
        )
        .unwrap();
        for d in defects {
            let p = d.position;
            writeln!(
                s,
                "{:>8} {:>12.6} {:>12.6} {:>12.6} {:>+6}",
                d.vertex, p.x, p.y, p.z, d.index
            )
            .unwrap();
        }
    }
    let sum: i32 = defects.iter().map(|d| d.index).sum();
    writeln!(s, "{} defects, sum {}", defects.len(), sum).unwrap();
    s
}

pub fn write_csv(path: &Path, defects: &[Defect]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(f, "vertex,x,y,z,index")?;
    for d in defects {
        writeln!(
            f,
            "{},{},{},{},{}",
            d.vertex, d.position.x, d.position.y, d.position.z, d.index
        )?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::MeshSpec;
    use surfflow::mesh::{generate_torus, Axis};

    fn single_torus() -> (SurfaceMesh, CurvatureSource) {
        let mesh = generate_torus(1.0, 0.5, 96, 48).unwrap();
        (
            mesh,
            CurvatureSource::AnalyticTorus {
                major: 1.0,
                minor: 0.5,
                axis: Axis::Y,
            },
        )
    }

    #[test]
    fn killing_field_has_no_defects() {
        let (mesh, src) = single_torus();
        let v = named_field(&mesh, &InitialCondition::Killing, &src).unwrap();
        let d = analyze(&mesh, &v, 1e-3).unwrap();
        assert_eq!(table(&d), "0 defects, sum 0\n");
    }

    #[test]
    fn stream_field_inventories() {
        let (mesh, src) = single_torus();
        let v = named_field(&mesh, &InitialCondition::RotStream, &src).unwrap();
        let d = analyze(&mesh, &v, 1e-3).unwrap();
        assert!(table(&d).ends_with("4 defects, sum 0\n"));

        let spec = MeshSpec::standard_ntorus(2, 48).unwrap();
        let mesh = spec.build().unwrap();
        let v = named_field(
            &mesh,
            &InitialCondition::RotStream,
            &spec.analytic_source().unwrap(),
        )
        .unwrap();
        let d = analyze(&mesh, &v, 1e-3).unwrap();
        assert!(table(&d).ends_with("6 defects, sum -2\n"), "{}", table(&d));
    }

    #[test]
    fn mismatched_field_is_rejected() {
        let (mesh, _) = single_torus();
        assert!(analyze(&mesh, &VectorField3::zeros(3), 1e-3).is_err());
    }

    #[test]
    fn harmonic_start_needs_a_single_torus() {
        let spec = MeshSpec::standard_ntorus(2, 40).unwrap();
        let mesh = spec.build().unwrap();
        let err = named_field(
            &mesh,
            &InitialCondition::HarmonicMean,
            &spec.analytic_source().unwrap(),
        )
        .unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }
}
