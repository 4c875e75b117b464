//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use manifold_mean_cli::mesh_io::read_csv;
use manifold_mean_cli::scene::parse_scene;
use manifold_mean_core::averaging::{equidistant_oracle, midpoint};
use manifold_mean_core::grassmann::{
    average_derivative_check, average_subspaces, complement, finsler_distance, graph_subspace,
};
use manifold_mean_core::linalg::{distance, orthonormalize_columns};
use manifold_mean_core::{AmbientSpace64, Matrix64, Shape, Submanifold64, Subspace64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

type Outcome = Result<String, String>;

fn scenes() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn check(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn gaussian(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix64 {
    Matrix64::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

fn to_na(m: &Matrix64) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Orthogonal projection onto the column span of an orthonormal frame.
fn na_projection(s: &Subspace64) -> DMatrix<f64> {
    let f = to_na(s.frame());
    &f * f.transpose()
}

fn na_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Largest canonical angle from the smallest singular value of `Fᵀ F'`.
fn na_distance(a: &Subspace64, b: &Subspace64) -> f64 {
    let m = to_na(a.frame()).transpose() * to_na(b.frame());
    m.svd(false, false).singular_values.min().clamp(-1.0, 1.0).acos()
}

fn graph_map(r: &mut ChaCha8Rng, n: usize, k: usize, size: f64) -> Matrix64 {
    let u = gaussian(r, n - k, k);
    let norm = na_norm(&to_na(&u));
    u.scale(size / norm)
}

fn criterion_1() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(42);
    let (mut sine, mut graph, mut dual): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let n = r.random_range(2..=12);
        let k = r.random_range(1..=4.min(n - 1));
        let f = Subspace64::span(&gaussian(&mut r, n, k)).map_err(|e| e.to_string())?;
        let g = Subspace64::span(&gaussian(&mut r, n, k)).map_err(|e| e.to_string())?;
        let d = finsler_distance(&f, &g).map_err(|e| e.to_string())?;
        sine = sine.max((na_norm(&(na_projection(&f) - na_projection(&g))) - d.sin()).abs());
        let size = 3.0 * r.random::<f64>();
        let u = graph_map(&mut r, n, k, size);
        let fg = graph_subspace(&f, &u).map_err(|e| e.to_string())?;
        graph = graph.max((finsler_distance(&f, &fg).map_err(|e| e.to_string())? - size.atan()).abs());
        let (fc, gc) = (complement(&f).map_err(|e| e.to_string())?, complement(&g).map_err(|e| e.to_string())?);
        dual = dual.max((finsler_distance(&fc, &gc).map_err(|e| e.to_string())? - d).abs());
    }
    let msg = format!("projection-sine {sine:.2e}, graph {graph:.2e}, duality {dual:.2e} (tol 1e-9)");
    check(sine < 1e-9 && graph < 1e-9 && dual < 1e-9, msg.clone())?;
    Ok(msg)
}

fn criterion_2() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut worst_margin = f64::INFINITY;
    let mut worst_equi: f64 = 0.0;
    let mut largest_eps: f64 = 0.0;
    for _ in 0..200 {
        let n = r.random_range(2..=12);
        let k = r.random_range(1..=4.min(n - 1));
        let m = r.random_range(2..=6);
        let base = Subspace64::span(&gaussian(&mut r, n, k)).map_err(|e| e.to_string())?;
        let reach = (0.15 * r.random::<f64>()).tan();
        let raw: Vec<f64> = (0..m).map(|_| 0.1 + r.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let mut members = Vec::with_capacity(m);
        for w in &raw {
            let s = reach * r.random::<f64>();
            let u = graph_map(&mut r, n, k, s);
            members.push((w / total, graph_subspace(&base, &u).map_err(|e| e.to_string())?));
        }
        let mut eps: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                eps = eps.max(na_distance(&members[i].1, &members[j].1));
            }
        }
        largest_eps = largest_eps.max(eps);
        let avg = average_subspaces(&members).map_err(|e| e.to_string())?.result;
        for (_, s) in &members {
            worst_margin = worst_margin.min((2.0 * eps).asin() - na_distance(s, &avg));
        }
        let q = orthonormalize_columns(&gaussian(&mut r, n, n));
        let moved: Vec<(f64, Subspace64)> =
            members.iter().map(|(w, s)| (*w, s.transformed(&q).expect("orthogonal image"))).collect();
        let avg_moved = average_subspaces(&moved).map_err(|e| e.to_string())?.result;
        let qn = to_na(&q);
        let expected = &qn * na_projection(&avg) * qn.transpose();
        worst_equi = worst_equi.max(na_norm(&(na_projection(&avg_moved) - expected)));
    }
    let msg = format!(
        "min asin(2 eps) - d(member, average) = {worst_margin:.3e}, equivariance {worst_equi:.2e}, largest eps {largest_eps:.3}"
    );
    check(worst_margin > 0.0 && worst_equi < 1e-9 && largest_eps <= 0.3, msg.clone())?;
    Ok(msg)
}

fn criterion_3() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let n = r.random_range(3..=8);
        let k = r.random_range(1..=3.min(n - 1));
        let m = r.random_range(2..=5);
        let base = Subspace64::span(&gaussian(&mut r, n, k)).map_err(|e| e.to_string())?;
        let mut members = Vec::new();
        for _ in 0..m {
            let s = 0.1 * r.random::<f64>();
            let start = graph_subspace(&base, &graph_map(&mut r, n, k, s)).map_err(|e| e.to_string())?;
            let speed = r.random::<f64>();
            members.push((start, graph_map(&mut r, n, k, speed)));
        }
        let w = 1.0 / m as f64;
        let family = |mu: f64| -> Vec<(f64, Subspace64)> {
            members.iter().map(|(s, u)| (w, graph_subspace(s, &u.scale(mu)).expect("finite graph"))).collect()
        };
        let (lhs, rhs) = average_derivative_check(family, 0.0).map_err(|e| e.to_string())?;
        worst = worst.max(lhs - rhs);
    }
    let msg = format!("max(derivative - 8 sup member derivative) = {worst:.3e} (slack 1e-4)");
    check(worst <= 1e-4, msg.clone())?;
    Ok(msg)
}

fn criterion_4() -> Outcome {
    let scene = parse_scene(&scenes().join("perturbed_circles.json")).map_err(|e| e.to_string())?;
    let (n1, n2) = (&scene.members[0].1, &scene.members[1].1);
    let sec = midpoint(n1, n2, &scene.solver).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for v in 0..n1.mesh_len() {
        let q = equidistant_oracle(n1, n2, v).map_err(|e| e.to_string())?;
        worst = worst.max(distance(&q, &sec.points[v]));
    }
    let e2 = AmbientSpace64::euclidean(2).map_err(|e| e.to_string())?;
    let circle = |radius| Submanifold64::new(e2, Shape::Circle { radius }, vec![64]).expect("circle");
    let conc = midpoint(&circle(1.0), &circle(1.1), &scene.solver).map_err(|e| e.to_string())?;
    let radial = conc.points.iter().map(|p| (p[0].hypot(p[1]) - 1.05).abs()).fold(0.0, f64::max);
    let msg = format!("oracle gap {worst:.2e} (tol 1e-6), concentric radius error {radial:.2e} (tol 1e-7)");
    check(worst < 1e-6 && radial < 1e-7, msg.clone())?;
    Ok(msg)
}

fn run_binary(args: &[&str], out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_manifold-mean"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    check(
        o.status.success(),
        format!("exit {:?}: {}{}", o.status.code(), String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr)),
    )
}

fn read_report(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn contract<'a>(report: &'a Value, name: &str) -> Result<&'a Value, String> {
    report["contracts"]
        .as_array()
        .and_then(|rows| rows.iter().find(|r| r["name"] == name))
        .ok_or_else(|| format!("report has no `{name}` row"))
}

fn num(v: &Value) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("not a number: {v}"))
}

fn orbit_run(out: &Path) -> Result<(), String> {
    let scene = scenes().join("c5_orbit.json");
    run_binary(&["average", "--scene", &scene.to_string_lossy(), "--seed", "5"], out)
}

fn criterion_5(out: &Path) -> Outcome {
    let start = Instant::now();
    orbit_run(out)?;
    let elapsed = start.elapsed();
    let report = read_report(&out.join("average_report.json"))?;
    let eps = num(&report["epsilon"])?;
    let inv = num(&report["invariance"])?;
    let c0 = num(&contract(&report, "c0_offset")?["measured"])?;
    let c1 = num(&contract(&report, "c1_distance")?["measured"])?;
    let c1_bound = 136.0 * eps.sqrt();
    let mesh = read_csv(&out.join("average.csv")).map_err(|e| e.to_string())?;
    let msg = format!(
        "eps {eps:.4e}, invariance {inv:.2e} (tol 1e-7), max|w| {c0:.3e} <= {:.3e}, c1 {c1:.3e} <= {c1_bound:.3e} (ratio {:.3e}), mesh {}, {:.1}s",
        100.0 * eps,
        c1 / c1_bound,
        mesh.points.len(),
        elapsed.as_secs_f64()
    );
    check(
        inv < 1e-7 && c0 <= 100.0 * eps && c1 <= c1_bound && mesh.points.len() == 256 && elapsed < Duration::from_secs(120),
        msg.clone(),
    )?;
    Ok(msg)
}

fn criterion_6() -> Outcome {
    use manifold_mean_cli::diagnose::{geometry_suite, radius_suite};
    let scene = parse_scene(&scenes().join("small_circle_s2.json")).map_err(|e| e.to_string())?;
    let member = &scene.members[0].1;
    let factor = member.gentleness_report().map_err(|e| e.to_string())?.rescale_factor();
    let member = member.rescaled(factor).map_err(|e| e.to_string())?;
    let geometry = geometry_suite(&member.gentleness_report().map_err(|e| e.to_string())?);
    let mut failed: Vec<String> = geometry.rows.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    let mut worst_bundle: f64 = 0.0;
    for (i, r) in [0.05, 0.1, 0.2, 0.25].into_iter().enumerate() {
        let suite = radius_suite(&member, r, scene.diagnose.samples, scene.seed() + i as u64);
        for row in &suite.rows {
            if !row.pass {
                failed.push(row.name.clone());
            }
            if row.name.starts_with("twobundles_angle") {
                worst_bundle = worst_bundle.max(row.measured.unwrap_or(f64::INFINITY) / (r * r / 4.0 + 1e-4));
            }
        }
    }
    let b = geometry.rows[0].measured.unwrap_or(f64::NAN);
    let msg = format!("rescale {factor:.3}, |B| {b:.4}, worst twobundles ratio {worst_bundle:.3e}, failed {failed:?}");
    check(failed.is_empty(), msg.clone())?;
    Ok(msg)
}

fn criterion_7() -> Outcome {
    let e2 = AmbientSpace64::euclidean(2).map_err(|e| e.to_string())?;
    let e3 = AmbientSpace64::euclidean(3).map_err(|e| e.to_string())?;
    let s2 = AmbientSpace64::sphere(2, 1.0).map_err(|e| e.to_string())?;
    let great = Shape::SphereCurve { radius: 1.0, latitude: 0.0, modes: vec![] };
    let cases = [
        ("circle", Submanifold64::new(e2, Shape::Circle { radius: 1.0 }, vec![32])),
        ("torus", Submanifold64::new(e3, Shape::Torus { major: 2.0, minor: 0.5 }, vec![24, 12])),
        ("great circle", Submanifold64::new(s2, great, vec![32])),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, n) in cases {
        let n = n.map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for v in 0..n.mesh_len() {
            let b = n.hessian_blocks(n.mesh_point(v)).map_err(|e| e.to_string())?;
            worst = worst
                .max((b.vertical_min - 1.0).abs())
                .max((b.vertical_max - 1.0).abs())
                .max(b.horizontal_norm)
                .max(b.cross_norm);
        }
        ok &= worst < 1e-6;
        parts.push(format!("{name} {worst:.2e}"));
    }
    let msg = format!("{} (tol 1e-6)", parts.join(", "));
    check(ok, msg.clone())?;
    Ok(msg)
}

fn criterion_8(out: &Path) -> Outcome {
    let scene = scenes().join("concentric_circles.json");
    run_binary(&["morph", "--scene", &scene.to_string_lossy(), "--depth", "3"], out)?;
    let report = read_report(&out.join("morph_report.json"))?;
    let frames = report["data"]["frames"].as_array().ok_or("no frame listing")?;
    let mut worst: f64 = 0.0;
    let mut times = Vec::new();
    for f in frames {
        let t = num(&f["time"])?;
        times.push(t);
        let mesh = read_csv(&out.join(f["file"].as_str().ok_or("no file")?)).map_err(|e| e.to_string())?;
        for p in &mesh.points {
            worst = worst.max((p[0].hypot(p[1]) - (1.0 + 0.1 * t)).abs());
        }
    }
    let dyadic = times.len() == 9 && times.iter().enumerate().all(|(i, &t)| t == i as f64 / 8.0);
    let msg = format!("{} frames, worst radius error {worst:.2e} (tol 1e-6)", times.len());
    check(dyadic && worst < 1e-6, msg.clone())?;
    Ok(msg)
}

/// Report text up to the timing block, which is serialized last.
fn without_timing(text: &str) -> &str {
    text.find("\"timing\"").map_or(text, |i| &text[..i])
}

fn criterion_9(first: &Path, second: &Path) -> Outcome {
    orbit_run(second)?;
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).map_err(|e| format!("{f}: {e}"));
    let mesh_same = read(first, "average.csv")? == read(second, "average.csv")?;
    let (a, b) = (read(first, "average_report.json")?, read(second, "average_report.json")?);
    let (a, b) = (String::from_utf8_lossy(&a), String::from_utf8_lossy(&b));
    let report_same = without_timing(&a) == without_timing(&b) && a.contains("\"timing\"");
    let msg = format!("mesh identical: {mesh_same}, report identical apart from timing: {report_same}");
    check(mesh_same && report_same, msg.clone())?;
    Ok(msg)
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let (orbit_a, orbit_b, morph_dir) = (tmp.path().join("orbit_a"), tmp.path().join("orbit_b"), tmp.path().join("morph"));
    let criteria: Vec<(u32, &str, u64, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "Grassmann identity suite", 10, Box::new(criterion_1)),
        (2, "subspace averaging bound and equivariance", 10, Box::new(criterion_2)),
        (3, "average derivative factor", 30, Box::new(criterion_3)),
        (4, "equidistant oracle equivalence", 30, Box::new(criterion_4)),
        (5, "C5 orbit invariance and contracts", 120, Box::new(|| criterion_5(&orbit_a))),
        (6, "curved-ambient tube estimates", 60, Box::new(criterion_6)),
        (7, "hessian along the submanifold", 30, Box::new(criterion_7)),
        (8, "morph of concentric circles", 60, Box::new(|| criterion_8(&morph_dir))),
        (9, "determinism of the orbit run", 120, Box::new(|| criterion_9(&orbit_a, &orbit_b))),
    ];
    let mut failures = 0;
    for (id, title, limit, f) in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(m) if secs >= *limit as f64 => Err(format!("{m}; runtime {secs:.1}s exceeds {limit}s")),
            other => other,
        };
        match outcome {
            Ok(m) => println!("PASS criterion {id} ({title}): {m} [{secs:.2}s]"),
            Err(m) => {
                failures += 1;
                println!("FAIL criterion {id} ({title}): {m} [{secs:.2}s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
