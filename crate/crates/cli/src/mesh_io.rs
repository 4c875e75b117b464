//! Mesh files: CSV with one row per vertex, or OBJ for surfaces in R³.

use std::fmt::Write as _;
use std::path::Path;

use manifold_mean_core::Submanifold64;

use crate::error::CliError;
use crate::scene::MeshFormat;

/// Vertex data of a mesh as stored in CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshTable {
    pub params: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub offset_norms: Vec<f64>,
}

impl MeshTable {
    /// `points` laid over the mesh of `topology`.
    pub fn over(topology: &Submanifold64, points: &[Vec<f64>], offset_norms: &[f64]) -> Self {
        Self { params: topology.mesh_params().to_vec(), points: points.to_vec(), offset_norms: offset_norms.to_vec() }
    }
}

pub fn csv_string(mesh: &MeshTable) -> String {
    let d = mesh.params.first().map_or(0, Vec::len);
    let n = mesh.points.first().map_or(0, Vec::len);
    let mut out = String::from("vertex_index");
    for i in 1..=d {
        let _ = write!(out, ",u{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    out.push_str(",offset_norm\n");
    for (i, ((u, x), o)) in mesh.params.iter().zip(&mesh.points).zip(&mesh.offset_norms).enumerate() {
        let _ = write!(out, "{i}");
        for v in u.iter().chain(x).chain(std::iter::once(o)) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str, path: &Path) -> Result<MeshTable, CliError> {
    let bad = |line: usize, message: String| CliError::MeshFormat { path: path.to_path_buf(), line, message };
    let mut lines = text.split('\n');
    let header = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"vertex_index") || cols.last() != Some(&"offset_norm") {
        return Err(bad(1, format!("unexpected header `{header}`")));
    }
    let d = cols.iter().filter(|c| c.starts_with('u')).count();
    let n = cols.iter().filter(|c| c.starts_with('x')).count();
    if d + n + 2 != cols.len() {
        return Err(bad(1, format!("unexpected header `{header}`")));
    }
    let mut mesh = MeshTable { params: Vec::new(), points: Vec::new(), offset_norms: Vec::new() };
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(lineno, format!("expected {} fields, found {}", cols.len(), fields.len())));
        }
        let index: usize = fields[0].parse().map_err(|_| bad(lineno, format!("bad index `{}`", fields[0])))?;
        if index != mesh.points.len() {
            return Err(bad(lineno, format!("vertex index {index} out of sequence")));
        }
        let vals = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(lineno, format!("bad number `{f}`"))))
            .collect::<Result<Vec<f64>, _>>()?;
        mesh.params.push(vals[..d].to_vec());
        mesh.points.push(vals[d..d + n].to_vec());
        mesh.offset_norms.push(vals[d + n]);
    }
    Ok(mesh)
}

/// OBJ text: `v` lines, then one quad `f` line per grid cell. Only for
/// two-parameter meshes in Euclidean R³.
pub fn obj_string(topology: &Submanifold64, points: &[Vec<f64>]) -> Result<String, CliError> {
    if topology.ambient().is_sphere() {
        return Err(CliError::UnsupportedFormat("OBJ output needs a Euclidean ambient, not a sphere".into()));
    }
    if topology.ambient().coord_dim() != 3 || topology.param_dim() != 2 {
        return Err(CliError::UnsupportedFormat(format!(
            "OBJ output is for surfaces in R³; got dimension {} in R^{}",
            topology.param_dim(),
            topology.ambient().coord_dim()
        )));
    }
    let mut out = String::new();
    for p in points {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    let res = topology.resolution();
    for j in 0..res[1] as i64 {
        for i in 0..res[0] as i64 {
            let quad = [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]].map(|m| topology.mesh_index(&m));
            if let [Some(a), Some(b), Some(c), Some(d)] = quad {
                let _ = writeln!(out, "f {} {} {} {}", a + 1, b + 1, c + 1, d + 1);
            }
        }
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// Write `points` over the mesh of `topology` in the requested format.
pub fn write_mesh(
    path: &Path,
    format: MeshFormat,
    topology: &Submanifold64,
    points: &[Vec<f64>],
    offset_norms: &[f64],
) -> Result<(), CliError> {
    if let Some(p) = points.iter().flatten().chain(offset_norms).find(|v| !v.is_finite()) {
        return Err(CliError::Geom(manifold_mean_core::GeomError::Unsupported(format!("non-finite mesh value {p}"))));
    }
    let text = match format {
        MeshFormat::Csv => csv_string(&MeshTable::over(topology, points, offset_norms)),
        MeshFormat::Obj => obj_string(topology, points)?,
    };
    write_file(path, &text)
}

pub fn read_csv(path: &Path) -> Result<MeshTable, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_csv(&text, path)
}

pub fn extension(format: MeshFormat) -> &'static str {
    match format {
        MeshFormat::Csv => "csv",
        MeshFormat::Obj => "obj",
    }
}
