use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::VectorField3;
use crate::mesh::{Axis, CurvatureSource, SurfaceMesh, Vec3};
use crate::operators::{face_to_vertex, surface_gradient, Discretization};

/// The two harmonic fields of the y-axis torus.
///
/// `v_phi = (-z, 0, x) / (4 rho^2)` and
/// `v_theta = (-x y / rho, rho - R, -y z / rho) / (2 rho)` with `rho = sqrt(x^2 + z^2)`.
pub fn harmonic_fields_torus(
    mesh: &SurfaceMesh,
    major: f64,
    minor: f64,
) -> Result<(VectorField3, VectorField3)> {
    if !(major > minor && minor > 0.0) {
        return Err(Error::Parameter(format!(
            "torus radii need R > r > 0, got R={major}, r={minor}"
        )));
    }
    let mut phi = Vec::with_capacity(mesh.num_vertices());
    let mut theta = Vec::with_capacity(mesh.num_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let rho = p.x.hypot(p.z);
        if rho == 0.0 {
            return Err(Error::Geometry(format!(
                "vertex {i} lies on the torus axis"
            )));
        }
        phi.push(Vec3::new(-p.z, 0.0, p.x) / (4.0 * rho * rho));
        theta.push(Vec3::new(-p.x * p.y / rho, rho - major, -p.y * p.z / rho) / (2.0 * rho));
    }
    Ok((
        VectorField3::from_vectors(&phi),
        VectorField3::from_vectors(&theta),
    ))
}

/// `nu x grad psi` per face, averaged to the vertices with area weights.
pub fn rot_stream(disc: &Discretization, psi: &[f64]) -> Result<VectorField3> {
    let grads = surface_gradient(disc, psi)?;
    let rotated: Vec<Vec3> = grads
        .iter()
        .zip(disc.faces())
        .map(|(g, f)| f.normal.cross(g))
        .collect();
    face_to_vertex(disc, &rotated)
}

/// `psi_0 = (x + y + z) / 2`.
pub fn stream_function_psi0(mesh: &SurfaceMesh) -> Vec<f64> {
    mesh.vertices()
        .iter()
        .map(|p| 0.5 * (p.x + p.y + p.z))
        .collect()
}

/// Rotation field about the torus axis, `(-z, 0, x)` for the y-axis.
pub fn killing_field(mesh: &SurfaceMesh, axis: Axis) -> VectorField3 {
    VectorField3::from_vectors(
        &mesh
            .vertices()
            .iter()
            .map(|p| match axis {
                Axis::Y => Vec3::new(-p.z, 0.0, p.x),
                Axis::Z => Vec3::new(-p.y, p.x, 0.0),
            })
            .collect::<Vec<_>>(),
    )
}

/// Starting velocity of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialCondition {
    /// `(v_phi + v_theta) / 2` on the single torus.
    #[default]
    HarmonicMean,
    /// `nu x grad psi_0`.
    RotStream,
    /// Rotation field about the torus axis with unit L2 norm.
    Killing,
    /// Velocity read from a `vx,vy,vz` CSV file.
    FromFile(std::path::PathBuf),
    Field(VectorField3),
}

pub(crate) fn torus_radii(source: &CurvatureSource) -> Option<(f64, f64, Axis)> {
    match source {
        CurvatureSource::AnalyticTorus { major, minor, axis } => Some((*major, *minor, *axis)),
        CurvatureSource::AnalyticLevelSet(ls)
            if ls.genus() == 1 && ls.midpoints[0] == Vec3::zeros() =>
        {
            Some((ls.major, ls.minor, ls.axis))
        }
        _ => None,
    }
}

/// Builds the tangential starting velocity `v^0`.
pub fn initial_condition(
    mesh: &SurfaceMesh,
    disc: &Discretization,
    ic: &InitialCondition,
    source: &CurvatureSource,
) -> Result<VectorField3> {
    let v = match ic {
        InitialCondition::HarmonicMean => {
            if mesh.genus() != 1 {
                return Err(Error::Config(format!(
                    "harmonic-mean start needs a genus-1 mesh, got genus {}",
                    mesh.genus()
                )));
            }
            let Some((major, minor, Axis::Y)) = torus_radii(source) else {
                return Err(Error::Config(
                    "harmonic-mean start needs an analytic y-axis torus curvature source".into(),
                ));
            };
            let (vp, vt) = harmonic_fields_torus(mesh, major, minor)?;
            vp.add_scaled(1.0, &vt).scaled(0.5)
        }
        InitialCondition::RotStream => rot_stream(disc, &stream_function_psi0(mesh))?,
        InitialCondition::Killing => {
            let axis = torus_radii(source).map_or(Axis::Y, |t| t.2);
            let k = killing_field(mesh, axis);
            let m = crate::operators::assemble_mass(disc);
            let norm: f64 = k
                .components
                .iter()
                .map(|c| m.bilinear(c, c))
                .sum::<f64>()
                .sqrt();
            k.scaled(1.0 / norm)
        }
        InitialCondition::FromFile(path) => read_field_csv(path)?,
        InitialCondition::Field(v) => v.clone(),
    };
    crate::error::check_len(mesh.num_vertices(), v.len())?;
    Ok(v)
}

/// Reads a `vx,vy,vz` CSV (one header line) into a field.
pub fn read_field_csv(path: &Path) -> Result<VectorField3> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(0, format!("{other:?}")),
        })?;
    let mut v = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 3 columns, found {}", rec.len()),
            ));
        }
        let mut x = [0.0; 3];
        for (j, s) in rec.iter().enumerate() {
            x[j] = s
                .parse()
                .map_err(|_| parse_err(line, format!("invalid number '{s}'")))?;
        }
        v.push(Vec3::from(x));
    }
    Ok(VectorField3::from_vectors(&v))
}

/// Writes a field as `vx,vy,vz` CSV.
pub fn write_field_csv(path: &Path, v: &VectorField3) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(["vx", "vy", "vz"]).map_err(io)?;
    for a in 0..v.len() {
        let p = v.at(a);
        w.write_record([p.x.to_string(), p.y.to_string(), p.z.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
