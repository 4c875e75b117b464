//! Scene files: JSON description of the ambient space, the family of
//! submanifolds, solver settings and outputs.

use std::path::{Path, PathBuf};

use manifold_mean_core::submanifold::CATALOG;
use manifold_mean_core::{
    AmbientSpace64, FourierMode, Isometry64, Matrix64, Placement, Shape, SolverConfig, Submanifold64,
    WeightedFamily64,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Smallest accepted mesh resolution on every parameter axis.
pub const MIN_RESOLUTION: usize = 8;
/// Largest finite group generated from orbit generators.
pub const MAX_GROUP_ORDER: usize = 1024;
const ISOMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub ambient: AmbientSpec,
    pub family: FamilySpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub diagnose: Option<DiagnoseSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default)]
    pub members: Vec<MemberSpec>,
    #[serde(default)]
    pub reference: usize,
    /// Build the family as the orbit of `base` under the group generated by
    /// `generators`, uniformly weighted.
    #[serde(default)]
    pub orbit: bool,
    #[serde(default)]
    pub base: Option<ShapeSpec>,
    #[serde(default)]
    pub generators: Vec<IsometrySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub weight: f64,
    pub shape: ShapeSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub placement: Option<IsometrySpec>,
}

/// An ambient isometry. Exactly one of the fields must be set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometrySpec {
    /// Rotation by `angle` in the coordinate plane `(i, j)`.
    #[serde(default)]
    pub plane_rotation: Option<PlaneRotation>,
    /// Rotation of R³ about an axis.
    #[serde(default)]
    pub axis_rotation: Option<AxisRotation>,
    /// Reflection in the hyperplane orthogonal to the vector.
    #[serde(default)]
    pub reflection: Option<Vec<f64>>,
    #[serde(default)]
    pub translation: Option<Vec<f64>>,
    /// General `x ↦ A x + b` with `A` given by rows.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneRotation {
    pub plane: [usize; 2],
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRotation {
    pub axis: [f64; 3],
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_jacobian_step")]
    pub jacobian_step: f64,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default = "default_epsilon_max")]
    pub epsilon_max: f64,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    50
}
fn default_jacobian_step() -> f64 {
    1e-4
}
fn default_epsilon_max() -> f64 {
    0.05
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            jacobian_step: default_jacobian_step(),
            r_max: None,
            epsilon_max: default_epsilon_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    #[default]
    Csv,
    Obj,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub mesh_format: MeshFormat,
    /// Report file name; `<command>_report.json` when absent.
    #[serde(default)]
    pub report: Option<String>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), mesh_format: MeshFormat::Csv, report: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSpec {
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Base vertices sampled per radius.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_radii() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.25]
}
fn default_samples() -> usize {
    16
}

impl Default for DiagnoseSpec {
    fn default() -> Self {
        Self { radii: default_radii(), samples: default_samples() }
    }
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub source: PathBuf,
    pub raw: SceneFile,
    pub ambient: AmbientSpace64,
    pub members: Vec<(f64, Submanifold64)>,
    pub reference: usize,
    /// Group elements when the family is an orbit.
    pub group: Option<Vec<Isometry64>>,
    pub solver: SolverConfig<f64>,
    pub diagnose: DiagnoseSpec,
}

impl Scene {
    pub fn family(&self) -> Result<WeightedFamily64, CliError> {
        match &self.group {
            Some(g) => Ok(WeightedFamily64::from_orbit(&self.members[self.reference].1, g.clone())?),
            None => Ok(WeightedFamily64::new(self.members.clone(), self.reference)?),
        }
    }

    pub fn seed(&self) -> u64 {
        self.raw.seed.unwrap_or(0)
    }
}

/// Read, parse and validate a scene file.
pub fn parse_scene(path: &Path) -> Result<Scene, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_scene_str(&text, path)
}

pub fn parse_scene_str(text: &str, path: &Path) -> Result<Scene, CliError> {
    let raw: SceneFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw, path)
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation { key: key.into(), message: message.into() }
}

fn validate(raw: SceneFile, path: &Path) -> Result<Scene, CliError> {
    let ambient = build_ambient(&raw.ambient)?;
    let fam = &raw.family;
    let (members, reference, group) = if fam.orbit {
        if !fam.members.is_empty() {
            return Err(invalid("family.members", "an orbit family takes `base`, not `members`"));
        }
        let base = fam.base.as_ref().ok_or_else(|| invalid("family.base", "orbit family needs a base shape"))?;
        let base = build_shape(base, &ambient, "family.base")?;
        let generators = fam
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| build_isometry(g, &ambient, &format!("family.generators[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let group = close_group(&generators, ambient.coord_dim())?;
        (vec![(1.0, base)], 0, Some(group))
    } else {
        if fam.base.is_some() || !fam.generators.is_empty() {
            return Err(invalid("family.orbit", "`base` and `generators` require \"orbit\": true"));
        }
        if fam.members.is_empty() {
            return Err(invalid("family.members", "at least one member is required"));
        }
        let members = fam
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| Ok((m.weight, build_shape(&m.shape, &ambient, &format!("family.members[{i}].shape"))?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let weights: Vec<f64> = members.iter().map(|(w, _)| *w).collect();
        manifold_mean_core::grassmann::validate_weights(&weights).map_err(|e| invalid("weights", e.to_string()))?;
        if fam.reference >= members.len() {
            return Err(invalid("family.reference", format!("index {} out of range", fam.reference)));
        }
        let d = members[0].1.param_dim();
        if let Some(i) = members.iter().position(|(_, m)| m.param_dim() != d) {
            return Err(invalid(format!("family.members[{i}].shape"), "members must share one dimension"));
        }
        (members, fam.reference, None)
    };
    let s = &raw.solver;
    if !(s.tol > 0.0) || !(s.jacobian_step > 0.0) || s.max_iter == 0 {
        return Err(invalid("solver", "tol, jacobian_step and max_iter must be positive"));
    }
    if let Some(r) = s.r_max {
        if !(r > 0.0) {
            return Err(invalid("solver.r_max", "must be positive"));
        }
    }
    if !(s.epsilon_max > 0.0) {
        return Err(invalid("solver.epsilon_max", "must be positive"));
    }
    let solver =
        SolverConfig { tol: s.tol, max_iter: s.max_iter, jacobian_step: s.jacobian_step, r_max: s.r_max, epsilon_max: s.epsilon_max };
    let diagnose = raw.diagnose.clone().unwrap_or_default();
    if diagnose.radii.iter().any(|r| !(*r > 0.0)) || diagnose.samples == 0 {
        return Err(invalid("diagnose", "radii must be positive and samples at least 1"));
    }
    Ok(Scene { source: path.to_path_buf(), raw, ambient, members, reference, group, solver, diagnose })
}

fn build_ambient(spec: &AmbientSpec) -> Result<AmbientSpace64, CliError> {
    match spec.kind.as_str() {
        "euclidean" => {
            if spec.radius.is_some() {
                return Err(invalid("ambient.radius", "only a sphere has a radius"));
            }
            AmbientSpace64::euclidean(spec.dim).map_err(|e| invalid("ambient.dim", e.to_string()))
        }
        "sphere" => {
            let r = spec.radius.unwrap_or(1.0);
            AmbientSpace64::sphere(spec.dim, r).map_err(|e| invalid("ambient", e.to_string()))
        }
        other => Err(invalid("ambient.kind", format!("unknown ambient `{other}`; expected euclidean or sphere"))),
    }
}

fn number(params: &Map<String, Value>, key: &str, at: &str) -> Result<f64, CliError> {
    match params.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| invalid(format!("{at}.params.{key}"), "expected a number")),
        None => Err(invalid(format!("{at}.params.{key}"), "missing parameter")),
    }
}

fn modes(params: &Map<String, Value>, key: &str, at: &str) -> Result<Vec<FourierMode<f64>>, CliError> {
    let Some(v) = params.get(key) else { return Ok(Vec::new()) };
    let here = format!("{at}.params.{key}");
    let list = v.as_array().ok_or_else(|| invalid(&here, "expected a list of {k, cos, sin}"))?;
    list.iter()
        .enumerate()
        .map(|(i, m)| {
            let obj = m.as_object().ok_or_else(|| invalid(format!("{here}[{i}]"), "expected an object"))?;
            if let Some(extra) = obj.keys().find(|k| !["k", "cos", "sin"].contains(&k.as_str())) {
                return Err(invalid(format!("{here}[{i}].{extra}"), "unknown key"));
            }
            let k = obj
                .get("k")
                .and_then(Value::as_u64)
                .and_then(|k| u32::try_from(k).ok())
                .ok_or_else(|| invalid(format!("{here}[{i}].k"), "expected a non-negative integer"))?;
            let get = |name: &str| -> Result<f64, CliError> {
                obj.get(name).map_or(Ok(0.0), |v| {
                    v.as_f64().ok_or_else(|| invalid(format!("{here}[{i}].{name}"), "expected a number"))
                })
            };
            Ok(FourierMode::new(k, get("cos")?, get("sin")?))
        })
        .collect()
}

fn expect_keys(params: &Map<String, Value>, allowed: &[&str], at: &str) -> Result<(), CliError> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(invalid(format!("{at}.params.{k}"), format!("unknown parameter; expected one of {allowed:?}"))),
        None => Ok(()),
    }
}

fn catalog_shape(spec: &ShapeSpec, ambient: &AmbientSpace64, at: &str) -> Result<Shape<f64>, CliError> {
    let p = &spec.params;
    let shape = match spec.name.as_str() {
        "circle" => {
            expect_keys(p, &["radius"], at)?;
            Shape::Circle { radius: number(p, "radius", at)? }
        }
        "ellipse" => {
            expect_keys(p, &["a", "b"], at)?;
            Shape::Ellipse { a: number(p, "a", at)?, b: number(p, "b", at)? }
        }
        "fourier_circle" => {
            expect_keys(p, &["radius", "radial", "height"], at)?;
            Shape::FourierCircle { radius: number(p, "radius", at)?, radial: modes(p, "radial", at)?, height: modes(p, "height", at)? }
        }
        "torus" => {
            expect_keys(p, &["major", "minor"], at)?;
            Shape::Torus { major: number(p, "major", at)?, minor: number(p, "minor", at)? }
        }
        "segment" => {
            expect_keys(p, &["length"], at)?;
            Shape::Segment { length: number(p, "length", at)? }
        }
        "toroidal_coil" => {
            expect_keys(p, &["major", "minor", "turns"], at)?;
            let turns = p
                .get("turns")
                .and_then(Value::as_u64)
                .and_then(|t| u32::try_from(t).ok())
                .ok_or_else(|| invalid(format!("{at}.params.turns"), "expected a positive integer"))?;
            Shape::ToroidalCoil { major: number(p, "major", at)?, minor: number(p, "minor", at)?, turns }
        }
        "sphere_curve" => {
            expect_keys(p, &["radius", "latitude", "modes"], at)?;
            let radius = if p.contains_key("radius") { number(p, "radius", at)? } else { ambient.radius() };
            Shape::SphereCurve { radius, latitude: number(p, "latitude", at)?, modes: modes(p, "modes", at)? }
        }
        other => {
            return Err(invalid(format!("{at}.name"), format!("unknown shape `{other}`; catalog: {}", CATALOG.join(", "))))
        }
    };
    shape.validate().map_err(|e| invalid(format!("{at}.params"), e.to_string()))?;
    Ok(shape)
}

fn build_shape(spec: &ShapeSpec, ambient: &AmbientSpace64, at: &str) -> Result<Submanifold64, CliError> {
    let shape = catalog_shape(spec, ambient, at)?;
    if spec.resolution.len() != shape.param_dim() {
        return Err(invalid(
            format!("{at}.resolution"),
            format!("{} needs {} resolution entries", spec.name, shape.param_dim()),
        ));
    }
    if let Some(r) = spec.resolution.iter().find(|&&r| r < MIN_RESOLUTION) {
        return Err(invalid(format!("{at}.resolution"), format!("{r} is below the minimum of {MIN_RESOLUTION} per axis")));
    }
    let n = ambient.coord_dim();
    let scale = spec.scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("{at}.scale"), "must be positive"));
    }
    let iso = match &spec.placement {
        Some(p) => build_isometry(p, ambient, &format!("{at}.placement"))?,
        None => Isometry64::identity(n),
    };
    Submanifold64::placed(*ambient, shape, spec.resolution.clone(), Placement { scale, iso })
        .map_err(|e| invalid(at, e.to_string()))
}

fn vector(v: &[f64], n: usize, key: &str) -> Result<Vec<f64>, CliError> {
    if v.len() != n {
        return Err(invalid(key, format!("expected {n} coordinates, got {}", v.len())));
    }
    Ok(v.to_vec())
}

fn build_isometry(spec: &IsometrySpec, ambient: &AmbientSpace64, at: &str) -> Result<Isometry64, CliError> {
    let n = ambient.coord_dim();
    let set = [
        spec.plane_rotation.is_some(),
        spec.axis_rotation.is_some(),
        spec.reflection.is_some(),
        spec.translation.is_some(),
        spec.matrix.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if set != 1 {
        return Err(invalid(at, "give exactly one of plane_rotation, axis_rotation, reflection, translation, matrix"));
    }
    if spec.offset.is_some() && spec.matrix.is_none() {
        return Err(invalid(format!("{at}.offset"), "offset only accompanies matrix"));
    }
    let g = if let Some(r) = &spec.plane_rotation {
        let [i, j] = r.plane;
        if i >= n || j >= n || i == j {
            return Err(invalid(format!("{at}.plane_rotation.plane"), format!("needs two distinct axes below {n}")));
        }
        Isometry64::plane_rotation(n, i, j, r.angle)
    } else if let Some(r) = &spec.axis_rotation {
        if n != 3 {
            return Err(invalid(format!("{at}.axis_rotation"), "axis rotations need three coordinates"));
        }
        Isometry64::axis_rotation(r.axis, r.angle).map_err(|e| invalid(format!("{at}.axis_rotation"), e.to_string()))?
    } else if let Some(v) = &spec.reflection {
        let v = vector(v, n, &format!("{at}.reflection"))?;
        Isometry64::reflection(&v).map_err(|e| invalid(format!("{at}.reflection"), e.to_string()))?
    } else if let Some(v) = &spec.translation {
        Isometry64::translation(vector(v, n, &format!("{at}.translation"))?)
    } else {
        let rows = spec.matrix.as_ref().expect("one field is set");
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(invalid(format!("{at}.matrix"), format!("expected a {n}x{n} matrix")));
        }
        let offset = match &spec.offset {
            Some(b) => vector(b, n, &format!("{at}.offset"))?,
            None => vec![0.0; n],
        };
        Isometry64 { linear: Matrix64::from_rows(rows), translation: offset }
    };
    g.validate(ambient).map_err(|e| invalid(at, e.to_string()))?;
    if g.orthogonality_residual() >= ISOMETRY_TOLERANCE {
        return Err(invalid(at, "not orthogonal"));
    }
    Ok(g)
}

/// All products of the generators, identity first, in breadth-first order.
pub fn close_group(generators: &[Isometry64], n: usize) -> Result<Vec<Isometry64>, CliError> {
    let mut group = vec![Isometry64::identity(n)];
    let mut frontier = 0;
    while frontier < group.len() {
        let g = group[frontier].clone();
        frontier += 1;
        for s in generators {
            let h = s.compose(&g);
            if !group.iter().any(|k| k.approx_eq(&h, 1e-9)) {
                if group.len() >= MAX_GROUP_ORDER {
                    return Err(invalid(
                        "family.generators",
                        format!("generated group exceeds {MAX_GROUP_ORDER} elements; generators must generate a finite group"),
                    ));
                }
                group.push(h);
            }
        }
    }
    Ok(group)
}
