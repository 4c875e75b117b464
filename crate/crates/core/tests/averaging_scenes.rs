use std::f64::consts::TAU;

use manifold_mean_core::averaging::{
    average_family, equidistant_oracle, invariance_check, midpoint, morph, section_distance, SolverConfig,
    WeightedFamily,
};
use manifold_mean_core::linalg::norm;
use manifold_mean_core::{AmbientSpace64, FourierMode, Isometry64, Shape, Submanifold64};

fn perturbed_circle(amplitude: f64, res: usize) -> Submanifold64 {
    let shape = Shape::FourierCircle { radius: 1.0, radial: vec![FourierMode::new(2, amplitude, 0.0)], height: vec![] };
    Submanifold64::new(AmbientSpace64::euclidean(3).unwrap(), shape, vec![res]).unwrap()
}

fn cyclic_group(order: usize) -> Vec<Isometry64> {
    (0..order).map(|j| Isometry64::plane_rotation(3, 0, 1, TAU * j as f64 / order as f64)).collect()
}

#[test]
fn cyclic_orbit_average_is_invariant() {
    let base = perturbed_circle(0.01, 128);
    let group = cyclic_group(5);
    let fam = WeightedFamily::from_orbit(&base, group.clone()).unwrap();
    let sec = average_family(&fam, &SolverConfig::default()).unwrap();
    let inv = invariance_check(&group, &sec);
    let s = &sec.summary;
    assert!(inv < 1e-7);
    assert!(s.c0_holds() && s.c1_holds());
}

#[test]
fn reference_choice_does_not_matter() {
    let base = perturbed_circle(0.01, 64);
    let fam = WeightedFamily::from_orbit(&base, cyclic_group(3)).unwrap();
    let a = average_family(&fam, &SolverConfig::default()).unwrap();
    let b = average_family(&fam.clone().with_reference(2).unwrap(), &SolverConfig::default()).unwrap();
    let d = section_distance(&a, &b);
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn equivariance_under_rigid_motion() {
    let base = perturbed_circle(0.01, 64);
    let other = base.transformed(&Isometry64::plane_rotation(3, 0, 1, 0.4)).unwrap();
    let fam = WeightedFamily::pair(base, other).unwrap();
    let g = Isometry64::axis_rotation([0.3, -0.5, 0.8], 1.1).unwrap().compose(&Isometry64::translation(vec![0.2, 0.1, -0.4]));
    let a = average_family(&fam, &SolverConfig::default()).unwrap();
    let b = average_family(&fam.transformed(&g).unwrap(), &SolverConfig::default()).unwrap();
    let moved = a.points.iter().map(|p| g.apply_point(p)).collect::<Vec<_>>();
    let worst = moved.iter().zip(&b.points).map(|(p, q)| norm(&manifold_mean_core::linalg::sub(p, q))).fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst:e}");
}

fn circle(radius: f64, res: usize) -> Submanifold64 {
    Submanifold64::new(AmbientSpace64::euclidean(2).unwrap(), Shape::Circle { radius }, vec![res]).unwrap()
}

fn loose() -> SolverConfig<f64> {
    SolverConfig { epsilon_max: 0.15, ..SolverConfig::default() }
}

#[test]
fn perturbed_concentric_circles_match_oracle() {
    let inner = Submanifold64::new(
        AmbientSpace64::euclidean(2).unwrap(),
        Shape::FourierCircle { radius: 1.0, radial: vec![FourierMode::new(3, 0.005, 0.0)], height: vec![] },
        vec![64],
    )
    .unwrap();
    let outer = Submanifold64::new(
        AmbientSpace64::euclidean(2).unwrap(),
        Shape::FourierCircle { radius: 1.1, radial: vec![FourierMode::new(2, 0.0, 0.004)], height: vec![] },
        vec![64],
    )
    .unwrap();
    let sec = midpoint(&inner, &outer, &loose()).unwrap();
    let mut worst: f64 = 0.0;
    for v in 0..inner.mesh_len() {
        let q = equidistant_oracle(&inner, &outer, v).unwrap();
        worst = worst.max(norm(&manifold_mean_core::linalg::sub(&q, &sec.points[v])));
    }
    assert!(worst < 1e-6);
}

#[test]
fn morph_of_concentric_circles_is_linear_in_radius() {
    let frames = morph(&circle(1.0, 32), &circle(1.1, 32), 3, &loose()).unwrap();
    assert_eq!(frames.len(), 9);
    let mut worst: f64 = 0.0;
    for (i, f) in frames.iter().enumerate() {
        assert_eq!(f.time, i as f64 / 8.0);
        for p in &f.points {
            worst = worst.max((norm(p) - (1.0 + 0.1 * f.time)).abs());
        }
    }
    assert!(worst < 1e-6);
}

#[test]
fn c1_distance_matches_dense_sampling() {
    let e2 = AmbientSpace64::euclidean(2).unwrap();
    let circle = Submanifold64::new(e2, Shape::Circle { radius: 1.0 }, vec![1024]).unwrap();
    for (k, a) in [(3u32, 0.02), (5, 0.01), (1, 0.05)] {
        let graph = Submanifold64::new(
            e2,
            Shape::FourierCircle { radius: 1.0, radial: vec![FourierMode::new(k, a, 0.0)], height: vec![] },
            vec![1024],
        )
        .unwrap();
        let measured = manifold_mean_core::averaging::c1_distance(&circle, &graph).unwrap().value;
        let kf = k as f64;
        let oracle = (0..100_000)
            .map(|i| {
                let u = TAU * i as f64 / 100_000.0;
                let r = 1.0 + a * (kf * u).cos();
                let slope = a * kf * (kf * u).sin();
                (a * (kf * u).cos()).abs().max((slope.abs() / r).atan())
            })
            .fold(0.0, f64::max);
        assert!((measured - oracle).abs() < 1e-3 * oracle, "k {k}: {measured} vs {oracle}");
    }
}

#[test]
fn copies_average_to_themselves() {
    let base = perturbed_circle(0.01, 64);
    let fam = WeightedFamily::new(vec![(0.25, base.clone()), (0.25, base.clone()), (0.5, base.clone())], 1).unwrap();
    let sec = average_family(&fam, &SolverConfig::default()).unwrap();
    assert!(sec.summary.max_offset < 1e-12);
    assert!(sec.per_slice.iter().all(|d| d.iterations == 1 && d.min_eigenvalue > 0.0));
    let frames = morph(&base, &base, 2, &SolverConfig::default()).unwrap();
    for f in &frames {
        for (p, q) in f.points.iter().zip(base.mesh_points()) {
            assert!(norm(&manifold_mean_core::linalg::sub(p, q)) < 1e-12);
        }
    }
}

#[test]
fn asymmetric_pair_is_not_invariant() {
    let base = perturbed_circle(0.01, 64);
    let shifted = base.transformed(&Isometry64::translation(vec![0.01, 0.0, 0.0])).unwrap();
    let fam = WeightedFamily::pair(base, shifted).unwrap();
    let sec = average_family(&fam, &SolverConfig::default()).unwrap();
    let group = cyclic_group(5);
    assert!(invariance_check(&group, &sec) > 1e-4);
    assert!(invariance_check(&group[..1], &sec) < 1e-12);
}

#[test]
fn weight_perturbations_move_the_average_linearly() {
    let inner = Submanifold64::new(
        AmbientSpace64::euclidean(2).unwrap(),
        Shape::FourierCircle { radius: 1.0, radial: vec![FourierMode::new(3, 0.005, 0.0)], height: vec![] },
        vec![48],
    )
    .unwrap();
    let outer = Submanifold64::new(
        AmbientSpace64::euclidean(2).unwrap(),
        Shape::FourierCircle { radius: 1.03, radial: vec![FourierMode::new(2, 0.0, 0.004)], height: vec![] },
        vec![48],
    )
    .unwrap();
    let fam = WeightedFamily::pair(inner, outer).unwrap();
    let cfg = SolverConfig::default();
    let base = average_family(&fam, &cfg).unwrap();
    let rates: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&d| {
            let moved = average_family(&fam.with_weights(&[0.5 + d, 0.5 - d]).unwrap(), &cfg).unwrap();
            let shift = moved
                .points
                .iter()
                .zip(&base.points)
                .map(|(p, q)| norm(&manifold_mean_core::linalg::sub(p, q)))
                .fold(0.0, f64::max);
            shift / d
        })
        .collect();
    for w in rates.windows(2) {
        let ratio = w[0] / w[1];
        assert!((0.5..=2.0).contains(&ratio), "{rates:?}");
    }
}

#[test]
fn averaged_gauss_field_respects_the_subspace_bound() {
    let base = perturbed_circle(0.01, 64);
    let other = base.transformed(&Isometry64::axis_rotation([0.2, 1.0, 0.1], 0.03).unwrap()).unwrap();
    let fam = WeightedFamily::new(vec![(0.3, base.clone()), (0.7, other.clone())], 0).unwrap();
    for v in (0..base.mesh_len()).step_by(5) {
        let x: Vec<f64> = base.mesh_point(v).iter().map(|c| c * 1.02).collect();
        let (g0, g1) = (base.gauss_extended(&x).unwrap(), other.gauss_extended(&x).unwrap());
        let eps = manifold_mean_core::grassmann::finsler_distance(&g0, &g1).unwrap();
        let avg = manifold_mean_core::averaging::averaged_gauss_field(&fam, &x).unwrap().result;
        for g in [&g0, &g1] {
            let d = manifold_mean_core::grassmann::finsler_distance(g, &avg).unwrap();
            assert!(d <= (2.0 * eps).asin() + 1e-12);
        }
    }
}
