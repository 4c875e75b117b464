//! Tube-estimate diagnostics for a single submanifold.

use manifold_mean_core::grassmann::{finsler_distance, projection};
use manifold_mean_core::linalg::{norm, scaled};
use manifold_mean_core::{GeomError, GentlenessReport, Submanifold64};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use rand_distr::StandardNormal;

use crate::report::{ContractRow, SuiteOutcome};
use crate::selftest::rng;

/// Bounds checked at every tube point.
pub const VERTICAL_MIN: f64 = 0.64;
pub const VERTICAL_MAX: f64 = 1.32;
pub const HESSIAN_NORM_MAX: f64 = 1.32;
pub const SECOND_FORM_MAX: f64 = 1.5;
/// Slack of the estimates that compare two finite-difference quantities.
pub const ESTIMATE_SLACK: f64 = 1e-4;
/// Slack of the retraction length ratio.
pub const RETRACTION_SLACK: f64 = 1e-3;
const GENTLE_SLACK: f64 = 1e-8;
/// Samples along each retraction path.
const PATH_SAMPLES: usize = 64;
/// Half-length of each retraction path, in grid cells.
const PATH_CELLS: f64 = 3.0;

/// Quantities measured at one tube point.
#[derive(Debug, Clone, Copy)]
struct PointMeasure {
    bundle_angle: f64,
    bundle_projection: f64,
    vertical_min: f64,
    vertical_max: f64,
    horizontal: f64,
    cross: f64,
    hessian_norm: f64,
    retraction_ratio: f64,
}

/// A base vertex and a unit normal direction there.
#[derive(Debug, Clone)]
struct Probe {
    vertex: usize,
    direction: Vec<f64>,
}

fn probes(n: &Submanifold64, samples: usize, seed: u64) -> Result<Vec<Probe>, GeomError> {
    let mut r = rng(seed);
    let count = samples.min(n.mesh_len());
    let mut vertices = sample(&mut r, n.mesh_len(), count).into_vec();
    vertices.sort_unstable();
    let mut out = Vec::new();
    for v in vertices {
        let nu = n.normal_space(n.mesh_param(v))?;
        let mut dirs: Vec<Vec<f64>> = nu.frame().columns().map(<[f64]>::to_vec).collect();
        if nu.dim() > 1 {
            let mix: Vec<f64> = (0..nu.dim()).map(|_| r.sample(StandardNormal)).collect();
            let d = nu.frame().matvec(&mix);
            dirs.push(scaled(1.0 / norm(&d), &d));
        }
        for d in dirs {
            out.push(Probe { vertex: v, direction: scaled(-1.0, &d) });
            out.push(Probe { vertex: v, direction: d });
        }
    }
    Ok(out)
}

/// Offsets of length `r` along a normal field continued from the probe
/// direction over a short parameter path through the probe vertex.
fn tube_path(n: &Submanifold64, probe: &Probe, r: f64) -> Result<Vec<Vec<f64>>, GeomError> {
    let u0 = n.mesh_param(probe.vertex).to_vec();
    let axis = &n.axes()[0];
    let half = PATH_CELLS * axis.length() / n.resolution()[0] as f64;
    let (lo, hi) = if axis.periodic {
        (u0[0] - half, u0[0] + half)
    } else {
        ((u0[0] - half).max(axis.min), (u0[0] + half).min(axis.max))
    };
    let at = |s: f64| {
        let mut u = u0.clone();
        u[0] = s;
        u
    };
    let steps = PATH_SAMPLES / 2;
    // continue the normal direction outwards from the probe vertex both ways
    let walk = |end: f64| -> Result<Vec<Vec<f64>>, GeomError> {
        let mut dir = probe.direction.clone();
        let mut pts = Vec::with_capacity(steps);
        for i in 1..=steps {
            let u = at(u0[0] + (end - u0[0]) * i as f64 / steps as f64);
            let nu = n.normal_space(&u)?;
            let d = nu.project(&dir);
            let len = norm(&d);
            if !(len > 0.5) {
                return Err(GeomError::Unsupported("normal field continuation degenerated".into()));
            }
            dir = scaled(1.0 / len, &d);
            pts.push(n.ambient().exp(&n.embed(&u), &scaled(r, &dir))?);
        }
        Ok(pts)
    };
    let mut back = walk(lo)?;
    let fwd = walk(hi)?;
    back.reverse();
    back.push(n.ambient().exp(n.mesh_point(probe.vertex), &scaled(r, &probe.direction))?);
    back.extend(fwd);
    Ok(back)
}

fn measure(n: &Submanifold64, probe: &Probe, r: f64) -> Result<PointMeasure, GeomError> {
    let x = n.ambient().exp(n.mesh_point(probe.vertex), &scaled(r, &probe.direction))?;
    let q = n.quasi_vertical(&x)?;
    let v = n.gauss_extended(&x)?;
    let b = n.hessian_blocks(&x)?;
    let (proj, len) = n.retraction_length(&tube_path(n, probe, r)?)?;
    Ok(PointMeasure {
        bundle_angle: finsler_distance(&q, &v)?,
        bundle_projection: projection(&q).distance_op(&projection(&v)),
        vertical_min: b.vertical_min,
        vertical_max: b.vertical_max,
        horizontal: b.horizontal_norm,
        cross: b.cross_norm,
        hessian_norm: b.full_norm,
        retraction_ratio: if len > 0.0 { proj / len } else { 0.0 },
    })
}

fn aggregate<F: Fn(&PointMeasure) -> f64>(ok: &[PointMeasure], pick: F, smallest: bool) -> Option<f64> {
    let vals = ok.iter().map(pick);
    if ok.is_empty() {
        None
    } else if smallest {
        Some(vals.fold(f64::INFINITY, f64::min))
    } else {
        Some(vals.fold(f64::NEG_INFINITY, f64::max))
    }
}

fn row(name: String, measured: Option<f64>, bound: f64, relation: &'static str) -> ContractRow {
    match (measured, relation) {
        (Some(m), "<") => ContractRow::below(name, m, bound),
        (Some(m), ">") => ContractRow::above(name, m, bound),
        (Some(m), _) => ContractRow::at_most(name, m, bound),
        (None, _) => ContractRow::failed(name, bound, relation, "no tube point could be evaluated"),
    }
}

/// All tube inequalities at offset radius `r`.
pub fn radius_suite(n: &Submanifold64, r: f64, samples: usize, seed: u64) -> SuiteOutcome {
    let probes = match probes(n, samples, seed) {
        Ok(p) => p,
        Err(e) => {
            let row = ContractRow::failed(format!("tube_points r={r}"), 0.0, "<=", e.to_string());
            return SuiteOutcome { name: format!("tube r={r}"), cases: 0, failures: 1, rows: vec![row] };
        }
    };
    let results: Vec<Result<PointMeasure, GeomError>> = probes.par_iter().map(|p| measure(n, p, r)).collect();
    let mut ok = Vec::new();
    let mut first_error = None;
    for res in results {
        match res {
            Ok(m) => ok.push(m),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = probes.len() - ok.len();
    let mut evaluated = ContractRow::at_most(format!("tube_points_failed r={r}"), failed as f64, 0.0);
    if let Some(e) = first_error {
        evaluated = evaluated.with_note(format!("first failure: {e}"));
    }
    let retraction_bound = 1.0 / (r.cos() - 1.5 * r.sin()) + RETRACTION_SLACK;
    let rows = vec![
        evaluated,
        row(format!("twobundles_angle r={r}"), aggregate(&ok, |m| m.bundle_angle, false), r * r / 4.0 + ESTIMATE_SLACK, "<="),
        row(
            format!("twobundles_projection r={r}"),
            aggregate(&ok, |m| m.bundle_projection, false),
            r * r / 5.0 + ESTIMATE_SLACK,
            "<=",
        ),
        row(format!("hessian_vertical_min r={r}"), aggregate(&ok, |m| m.vertical_min, true), VERTICAL_MIN, ">"),
        row(format!("hessian_vertical_max r={r}"), aggregate(&ok, |m| m.vertical_max, false), VERTICAL_MAX, "<"),
        row(format!("hessian_horizontal r={r}"), aggregate(&ok, |m| m.horizontal, false), 3.0 * r, "<"),
        row(format!("hessian_cross r={r}"), aggregate(&ok, |m| m.cross, false), 3.0 * r.sqrt(), "<"),
        row(format!("hessian_norm r={r}"), aggregate(&ok, |m| m.hessian_norm, false), HESSIAN_NORM_MAX, "<="),
        row(format!("retraction_ratio r={r}"), aggregate(&ok, |m| m.retraction_ratio, false), retraction_bound, "<="),
    ];
    let failures = failed + rows.iter().skip(1).filter(|r| !r.pass).count();
    SuiteOutcome { name: format!("tube r={r}"), cases: probes.len(), failures, rows }
}

/// Gentleness and second fundamental form rows.
pub fn geometry_suite(report: &GentlenessReport<f64>) -> SuiteOutcome {
    let rows = vec![
        ContractRow::at_most("second_form_norm", report.second_form_norm, SECOND_FORM_MAX),
        ContractRow::at_most("geometry_scale", report.scale_c, 1.0 + GENTLE_SLACK).with_note(format!(
            "injectivity estimate {:.6e}, ambient curvature {:.6e}",
            report.injectivity_estimate, report.curvature_bound
        )),
    ];
    let failures = rows.iter().filter(|r| !r.pass).count();
    SuiteOutcome { name: "geometry".into(), cases: 1, failures, rows }
}
