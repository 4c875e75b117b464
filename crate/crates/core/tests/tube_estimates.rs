mod common;

use manifold_mean_core::grassmann::{finsler_distance, projection, projection_length};
use manifold_mean_core::linalg::{norm, scaled, sub};
use manifold_mean_core::{AmbientSpace, AmbientSpace64, Shape, Submanifold64};
use rand::Rng;
use rand_distr::StandardNormal;

fn small_circle(latitude: f64) -> Submanifold64 {
    let shape = Shape::SphereCurve { radius: 1.0, latitude, modes: vec![] };
    Submanifold64::new(AmbientSpace64::sphere(2, 1.0).unwrap(), shape, vec![64]).unwrap()
}

/// Points at distance `r` from mesh vertices along both unit normals.
fn tube_points(n: &Submanifold64, r: f64, stride: usize) -> Vec<Vec<f64>> {
    let amb = n.ambient();
    let mut out = Vec::new();
    for v in (0..n.mesh_len()).step_by(stride) {
        let nu = n.normal_space(n.mesh_param(v)).unwrap();
        for col in nu.frame().columns() {
            for s in [r, -r] {
                out.push(amb.exp(n.mesh_point(v), &scaled(s, col)).unwrap());
            }
        }
    }
    out
}

#[test]
fn gradient_matches_finite_differences() {
    let e3 = AmbientSpace64::euclidean(3).unwrap();
    let shapes = [
        Submanifold64::new(e3, Shape::Torus { major: 2.0, minor: 0.5 }, vec![32, 16]).unwrap(),
        Submanifold64::new(e3, Shape::Circle { radius: 1.0 }, vec![64]).unwrap(),
        Submanifold64::new(AmbientSpace64::euclidean(2).unwrap(), Shape::Ellipse { a: 2.0, b: 1.0 }, vec![64]).unwrap(),
    ];
    let mut r = common::rng(17);
    let mut checked = 0;
    while checked < 100 {
        let n = &shapes[checked % shapes.len()];
        let dim = n.ambient().coord_dim();
        let v = r.random_range(0..n.mesh_len());
        let offset: Vec<f64> = (0..dim).map(|_| 0.2 * r.sample::<f64, _>(StandardNormal)).collect();
        let x: Vec<f64> = n.mesh_point(v).iter().zip(&offset).map(|(a, b)| a + b).collect();
        let Ok(f) = n.nearest_point(&x) else { continue };
        if f.rho < 1e-3 || f.rho > 0.4 {
            continue;
        }
        let g = n.grad_potential(&x).unwrap();
        let h = 1e-5;
        let fd: Vec<f64> = (0..dim)
            .map(|i| {
                let (mut up, mut dn) = (x.clone(), x.clone());
                up[i] += h;
                dn[i] -= h;
                (n.potential(&up).unwrap() - n.potential(&dn).unwrap()) / (2.0 * h)
            })
            .collect();
        assert!(norm(&sub(&fd, &g)) < 1e-6 * norm(&g), "{fd:?} vs {g:?}");
        assert!((norm(&g) - f.rho).abs() < 1e-9);
        let vert = n.gauss_extended(&x).unwrap();
        let unit = scaled(1.0 / norm(&g), &g);
        assert!((projection_length(&vert, &unit) - 1.0).abs() < 1e-12);
        checked += 1;
    }
}

#[test]
fn curved_ambient_tube_bounds() {
    let n = small_circle(0.3);
    let report = n.gentleness_report().unwrap();
    assert!(report.gentle, "{report:?}");
    assert!(report.second_form_norm <= 1.5);
    for r in [0.05, 0.1, 0.2, 0.25] {
        for x in tube_points(&n, r, 8) {
            let q = n.quasi_vertical(&x).unwrap();
            let v = n.gauss_extended(&x).unwrap();
            assert!(finsler_distance(&q, &v).unwrap() <= r * r / 4.0 + 1e-4);
            assert!(projection(&q).distance_op(&projection(&v)) <= r * r / 5.0 + 1e-4);
            let b = n.hessian_blocks(&x).unwrap();
            assert!(b.vertical_min > 0.64 && b.vertical_max < 1.32, "{b:?}");
            assert!(b.horizontal_norm < 3.0 * r && b.cross_norm < 3.0 * r.sqrt());
            assert!(b.full_norm <= 1.32);
            assert!((b.radial.unwrap() - 1.0).abs() < 1e-6);
            assert!(b.asymmetry < 1e-8);
        }
    }
}

#[test]
fn quasi_vertical_equals_vertical_on_round_spheres() {
    // Jacobi fields vanishing at the base point stay parallel to the
    // transported initial vector under constant curvature, so the slice
    // tangents are exactly the transported normal spaces
    let shape = Shape::SphereCurve { radius: 1.0, latitude: 0.3, modes: vec![] };
    let n = Submanifold64::new(AmbientSpace64::sphere(3, 1.0).unwrap(), shape, vec![64]).unwrap();
    for x in tube_points(&n, 0.2, 16) {
        let q = n.quasi_vertical(&x).unwrap();
        assert_eq!(q.dim(), 2);
        assert!(finsler_distance(&q, &n.gauss_extended(&x).unwrap()).unwrap() < 1e-8);
    }
}

#[test]
fn hessian_on_the_submanifold_is_the_normal_projection() {
    let e2 = AmbientSpace64::euclidean(2).unwrap();
    let e3 = AmbientSpace64::euclidean(3).unwrap();
    let great = Shape::SphereCurve { radius: 1.0, latitude: 0.0, modes: vec![] };
    let cases = [
        Submanifold64::new(e2, Shape::Circle { radius: 1.0 }, vec![32]).unwrap(),
        Submanifold64::new(e3, Shape::Torus { major: 2.0, minor: 0.5 }, vec![32, 16]).unwrap(),
        Submanifold64::new(AmbientSpace64::sphere(2, 1.0).unwrap(), great, vec![32]).unwrap(),
    ];
    for n in &cases {
        for v in (0..n.mesh_len()).step_by(7) {
            let b = n.hessian_blocks(n.mesh_point(v)).unwrap();
            assert!((b.vertical_min - 1.0).abs() < 1e-6 && (b.vertical_max - 1.0).abs() < 1e-6, "{b:?}");
            assert!(b.horizontal_norm < 1e-6 && b.cross_norm < 1e-6, "{b:?}");
        }
    }
}

#[test]
fn retraction_shortens_paths_at_most_by_the_tube_factor() {
    let n = small_circle(0.3);
    let amb = n.ambient();
    for r in [0.05f64, 0.1, 0.2, 0.25] {
        let bound = 1.0 / (r.cos() - 1.5 * r.sin()) + 1e-3;
        // parallels and a wavy path inside the r-tube
        for phi in [0.3 + r, 0.3 - r] {
            let path: Vec<Vec<f64>> = (0..=400)
                .map(|i| {
                    let u = std::f64::consts::TAU * i as f64 / 400.0;
                    vec![phi.cos() * u.cos(), phi.cos() * u.sin(), phi.sin()]
                })
                .collect();
            let (proj, len) = n.retraction_length(&path).unwrap();
            assert!(proj <= len * bound, "r {r}: {proj} vs {len}");
        }
        let wavy: Vec<Vec<f64>> = (0..=2000)
            .map(|i| {
                let u = std::f64::consts::TAU * i as f64 / 2000.0;
                let phi = 0.3 + 0.99 * r * (7.0 * u).sin();
                vec![phi.cos() * u.cos(), phi.cos() * u.sin(), phi.sin()]
            })
            .collect();
        assert!(wavy.iter().all(|x| amb.contains(x, 1e-12)));
        let (proj, len) = n.retraction_length(&wavy).unwrap();
        assert!(proj <= len * bound, "r {r}: {proj} vs {len}");
    }
}

#[test]
fn single_precision_smoke() {
    let amb = AmbientSpace::<f32>::euclidean(2).unwrap();
    let n = manifold_mean_core::Submanifold32::new(amb, Shape::Circle { radius: 1.0f32 }, vec![32]).unwrap();
    let f = n.nearest_point(&[2.0, 0.5]).unwrap();
    assert!((f.rho - (4.25f32.sqrt() - 1.0)).abs() < 1e-5);
    let a = manifold_mean_core::Subspace32::span_vectors(&[vec![1.0, 0.0]]).unwrap();
    let b = manifold_mean_core::Subspace32::span_vectors(&[vec![1.0, 0.1]]).unwrap();
    let d = manifold_mean_core::grassmann::finsler_distance(&a, &b).unwrap();
    assert!((d - 0.1f32.atan()).abs() < 1e-6);
}
