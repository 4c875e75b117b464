use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use manifold_mean_cli::mesh_io::{csv_string, read_csv};
use manifold_mean_cli::scene::parse_scene;
use serde_json::Value;

fn scenes() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manifold-mean"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn scene_arg(name: &str) -> String {
    scenes().join(name).to_string_lossy().into_owned()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr has a line");
    serde_json::from_str(line).expect("stderr ends in JSON")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_scene(dir: &Path, text: &str) -> String {
    let p = dir.join("scene.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn every_bundled_scene_parses() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenes()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            parse_scene(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 10);
}

#[test]
fn concentric_circles_average_to_the_middle_radius() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["average", "--scene", &scene_arg("concentric_circles.json")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let mesh = read_csv(&dir.path().join("average.csv")).unwrap();
    assert_eq!(mesh.points.len(), 64);
    for (p, w) in mesh.points.iter().zip(&mesh.offset_norms) {
        assert!((p[0].hypot(p[1]) - 1.05).abs() < 1e-7);
        assert!((w - 0.05).abs() < 1e-7);
    }
    let r = report(&dir.path().join("average_report.json"));
    let c0 = r["contracts"].as_array().unwrap().iter().find(|c| c["name"] == "c0_offset").unwrap();
    assert_eq!(c0["pass"], true);
    assert!(c0["measured"].as_f64().unwrap() <= c0["bound"].as_f64().unwrap());
    assert!((r["epsilon"].as_f64().unwrap() - 0.1).abs() < 1e-6);
    assert!(r["slices"]["iteration_histogram"].is_object());
    assert!(r["timing"]["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn written_csv_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["midpoint", "--scene", &scene_arg("perturbed_circles.json")], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("midpoint.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("vertex_index,u1,x1,x2,offset_norm\n"));
    assert_eq!(csv_string(&read_csv(&path).unwrap()), text);
}

#[test]
fn parallels_on_the_sphere_average_to_the_middle_latitude() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["average", "--scene", &scene_arg("sphere_parallels.json")], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let mesh = read_csv(&dir.path().join("average.csv")).unwrap();
    for p in &mesh.points {
        let r: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((r - 1.0).abs() < 1e-12);
        assert!((p[2].asin() - 0.315).abs() < 1e-7, "{}", p[2].asin());
    }
}

#[test]
fn wide_family_is_refused_with_contract_exit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["average", "--scene", &scene_arg("wide_circles.json")], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "EpsilonTooLarge");
    assert!((e["epsilon"].as_f64().unwrap() - 0.2).abs() < 1e-6);
}

#[test]
fn input_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(scenes().join("concentric_circles.json")).unwrap();

    let scene = write_scene(dir.path(), &base.replacen("\"weight\": 0.5", "\"weight\": 0.4", 1));
    let o = run(&["average", "--scene", &scene], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!((e["error"].as_str(), e["key"].as_str()), (Some("ValidationError"), Some("weights")));

    let scene = write_scene(dir.path(), &base.replacen("\"circle\"", "\"helix9\"", 1));
    let o = run(&["average", "--scene", &scene], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let msg = stderr_json(&o)["message"].as_str().unwrap().to_string();
    for name in ["circle", "ellipse", "fourier_circle", "torus", "segment", "toroidal_coil", "sphere_curve"] {
        assert!(msg.contains(name), "{msg}");
    }

    let scene = write_scene(dir.path(), &base.replacen("\"ambient\"", "\"ambient\" ,,", 1));
    let o = run(&["average", "--scene", &scene], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "ParseError");
    assert_eq!(e["line"], 2);

    let o = run(&["average", "--scene", "/nonexistent/scene.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "IoError");
}

#[test]
fn obj_on_a_sphere_is_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenes().join("sphere_parallels.json")).unwrap();
    let text = text.replace("\"outputs\": {", "\"outputs\": { \"mesh_format\": \"obj\",");
    let scene = write_scene(dir.path(), &text);
    let o = run(&["average", "--scene", &scene], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "UnsupportedFormat");
}

#[test]
fn torus_pair_writes_quads() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["average", "--scene", &scene_arg("tori.json")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let obj = std::fs::read_to_string(dir.path().join("average.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 512);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 512);
    // The average of a torus and its lift by d = 0.02 with weights 1/4, 3/4
    // is the torus lifted by 0.015 where the lift is normal (top and bottom
    // of the tube), and off by at most the sagitta term w1 w2 d² / (2 minor)
    // where it is tangent (sides of the tube).
    let sagitta = 0.25 * 0.75 * 0.02f64.powi(2) / (2.0 * 0.5);
    let mut worst: f64 = 0.0;
    for l in obj.lines().filter(|l| l.starts_with("v ")) {
        let v: Vec<f64> = l[2..].split(' ').map(|x| x.parse().unwrap()).collect();
        let ring = v[0].hypot(v[1]) - 2.0;
        let dev = (ring.hypot(v[2] - 0.015) - 0.5).abs();
        if ring.abs() < 1e-6 {
            assert!(dev < 1e-7, "{dev:e}");
        }
        worst = worst.max(dev);
    }
    assert!(worst <= sagitta * 1.01, "{worst:e} vs {sagitta:e}");
    assert!(worst >= sagitta * 0.5, "{worst:e} vs {sagitta:e}");
}

#[test]
fn midpoint_and_morph_need_two_members() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["midpoint", "morph"] {
        let o = run(&[cmd, "--scene", &scene_arg("c5_orbit.json")], dir.path());
        assert_eq!(o.status.code(), Some(3));
    }
    let o = run(&["diagnose", "--scene", &scene_arg("concentric_circles.json")], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn morph_frames_are_written_in_time_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["morph", "--scene", &scene_arg("concentric_circles.json"), "--depth", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(&dir.path().join("morph_report.json"));
    let frames = r["data"]["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 5);
    for f in frames {
        let t = f["time"].as_f64().unwrap();
        let mesh = read_csv(&dir.path().join(f["file"].as_str().unwrap())).unwrap();
        for p in &mesh.points {
            assert!((p[0].hypot(p[1]) - (1.0 + 0.1 * t)).abs() < 1e-6);
        }
    }
}

#[test]
fn non_gentle_geometry_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["diagnose", "--scene", &scene_arg("torus.json")], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let failed = stderr_json(&o)["failed"].as_array().unwrap().clone();
    assert!(failed.iter().any(|f| f == "second_form_norm"));
    let o = run(&["diagnose", "--scene", &scene_arg("torus.json"), "--rescale"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&dir.path().join("diagnose_report.json"));
    assert!((r["data"]["rescale_factor"].as_f64().unwrap() - 2.0).abs() < 0.2);
}

#[test]
fn gentle_scenes_pass_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    for (scene, extra) in [("great_circle_s2.json", None), ("unit_circle_r3.json", Some("--rescale"))] {
        let mut args = vec!["diagnose", "--scene"];
        let path = scene_arg(scene);
        args.push(&path);
        args.extend(extra);
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{scene}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let r = report(&dir.path().join("diagnose_report.json"));
    let suites = r["estimates"].as_array().unwrap();
    assert_eq!(suites.len(), 5);
    let rows: Vec<&Value> = suites.iter().flat_map(|s| s["rows"].as_array().unwrap()).collect();
    assert!(rows.iter().all(|r| r["pass"] == true && r["measured"].is_number()));
}

#[test]
fn selftest_reports_the_fixed_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selftest", "--trials", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(&dir.path().join("selftest_report.json"));
    let suites = r["estimates"].as_array().unwrap();
    assert!(suites.iter().all(|s| s["failures"] == 0));
    let fixed = suites.iter().find(|s| s["name"] == "fixed_pair").unwrap();
    assert!(fixed["rows"][0]["note"].as_str().unwrap().contains("distance 0.3"));

    let o = run(&["selftest", "--trials", "100", "--seed", "9"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn thread_count_does_not_change_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let scene = scene_arg("perturbed_circles.json");
    assert_eq!(run(&["midpoint", "--scene", &scene, "--threads", "1"], a.path()).status.code(), Some(0));
    assert_eq!(run(&["midpoint", "--scene", &scene, "--threads", "3"], b.path()).status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("midpoint.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn flags_override_the_scene_solver() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["average", "--scene", &scene_arg("concentric_circles.json"), "--tol", "1e-11", "--max-iter", "20", "--seed", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&dir.path().join("average_report.json"));
    assert_eq!(r["solver"]["tol"], 1e-11);
    assert_eq!(r["solver"]["max_iter"], 20);
    assert_eq!(r["seed"], 3);
    let o = run(&["average", "--scene", &scene_arg("concentric_circles.json"), "--max-iter", "1"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["cause"], "NoConvergence");
}

#[test]
fn distance_reports_the_pair_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["distance", "--scene", &scene_arg("wide_circles.json")], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(&dir.path().join("distance_report.json"));
    let m = r["data"]["c1_distance"].as_array().unwrap();
    assert!(m[0][0].is_null());
    assert!((m[0][1]["value"].as_f64().unwrap() - 0.2).abs() < 1e-6);
    assert_eq!(r["data"]["averaging_admissible"], false);
}
