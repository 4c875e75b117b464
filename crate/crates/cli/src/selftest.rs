//! Seeded Grassmannian property suites.

use manifold_mean_core::grassmann::{
    average_derivative_check, average_subspaces, complement, finsler_distance, graph_subspace, projection,
};
use manifold_mean_core::linalg::orthonormalize_columns;
use manifold_mean_core::{GeomError, Isometry64, Matrix64, Subspace64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::report::{ContractRow, SuiteOutcome};

/// Tolerance of the identity suite.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance of the orthogonal-equivariance check of averaging.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;
/// Slack of the derivative-factor check.
pub const DERIVATIVE_SLACK: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix64 {
    Matrix64::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_subspace(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<Subspace64, GeomError> {
    Subspace64::span(&gaussian(rng, n, k))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix64 {
    orthonormalize_columns(&gaussian(rng, n, n))
}

/// Random `(n - k) × k` graph map with operator norm `size`.
fn graph_map(rng: &mut ChaCha8Rng, n: usize, k: usize, size: f64) -> Matrix64 {
    let u = gaussian(rng, n - k, k);
    let norm = u.operator_norm().max(f64::MIN_POSITIVE);
    u.scale(size / norm)
}

fn dims(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize, k_max: usize) -> (usize, usize) {
    let n = rng.random_range(n_min..=n_max);
    let k = rng.random_range(1..=k_max.min(n - 1));
    (n, k)
}

/// Running maximum of one checked quantity.
struct Worst {
    name: &'static str,
    value: f64,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Self { name, value: 0.0 }
    }

    fn add(&mut self, v: f64) -> bool {
        self.value = if v.is_nan() { f64::NAN } else { self.value.max(v) };
        v.is_finite()
    }
}

/// Identities between projections, canonical angles, graphs and complements
/// on `trials` random pairs with `2 ≤ n ≤ n_max`, `1 ≤ k ≤ min(k_max, n - 1)`.
pub fn identity_suite(n_max: usize, k_max: usize, trials: usize, seed: u64) -> SuiteOutcome {
    let mut r = rng(seed);
    let mut sine = Worst::new("projection_gap_vs_sine");
    let mut graph = Worst::new("graph_distance_vs_atan");
    let mut dual = Worst::new("complement_duality");
    let mut failures = 0;
    for _ in 0..trials {
        let (n, k) = dims(&mut r, 2, n_max, k_max);
        let size = 3.0 * r.random::<f64>();
        let outcome = (|| -> Result<(f64, f64, f64), GeomError> {
            let f = random_subspace(&mut r, n, k)?;
            let g = random_subspace(&mut r, n, k)?;
            let d = finsler_distance(&f, &g)?;
            let gap = projection(&f).distance_op(&projection(&g));
            let u = graph_map(&mut r, n, k, size);
            let dg = finsler_distance(&f, &graph_subspace(&f, &u)?)?;
            let dc = finsler_distance(&complement(&f)?, &complement(&g)?)?;
            Ok(((gap - d.sin()).abs(), (dg - size.atan()).abs(), (dc - d).abs()))
        })();
        match outcome {
            Ok((a, b, c)) => {
                let ok = sine.add(a) & graph.add(b) & dual.add(c);
                if !(ok && a < IDENTITY_TOL && b < IDENTITY_TOL && c < IDENTITY_TOL) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let rows = [sine, graph, dual].into_iter().map(|w| ContractRow::below(w.name, w.value, IDENTITY_TOL)).collect();
    SuiteOutcome { name: "grassmann_identities".into(), cases: trials, failures, rows }
}

/// The plane `span(e1, e2)` of R⁴ against its rotation by `t` in the
/// `(e1, e3)` plane: the distance is exactly `t`.
pub fn fixed_rotation_suite(t: f64) -> SuiteOutcome {
    let outcome = (|| -> Result<f64, GeomError> {
        let f = Subspace64::span_vectors(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]])?;
        let g = Isometry64::plane_rotation(4, 0, 2, t);
        finsler_distance(&f, &f.transformed(&g.linear)?)
    })();
    let row = match outcome {
        Ok(d) => ContractRow::below("rotated_plane_distance_error", (d - t).abs(), 1e-12)
            .with_note(format!("distance {d} for rotation angle {t}")),
        Err(e) => ContractRow::failed("rotated_plane_distance_error", 1e-12, "<", e.to_string()),
    };
    let failures = usize::from(!row.pass);
    SuiteOutcome { name: "fixed_pair".into(), cases: 1, failures, rows: vec![row] }
}

/// Random weights, positive and summing to one.
fn random_weights(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| 0.1 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// Members tilted away from a random base by graph maps of norm at most
/// `tan(spread / 2)`, so that every pair lies within `spread`.
fn random_family(rng: &mut ChaCha8Rng, n: usize, k: usize, m: usize, spread: f64) -> Result<Vec<(f64, Subspace64)>, GeomError> {
    let base = random_subspace(rng, n, k)?;
    let size = (0.5 * spread).tan();
    let weights = random_weights(rng, m);
    weights
        .into_iter()
        .map(|w| {
            let s = size * rng.random::<f64>();
            Ok((w, graph_subspace(&base, &graph_map(rng, n, k, s))?))
        })
        .collect()
}

/// Largest pairwise distance of a weighted family.
fn spread(members: &[(f64, Subspace64)]) -> Result<f64, GeomError> {
    let refs: Vec<&Subspace64> = members.iter().map(|(_, s)| s).collect();
    manifold_mean_core::grassmann::max_pairwise_distance(&refs)
}

/// Distance of the weighted average to every member against `asin(2 ε)`,
/// and orthogonal equivariance, on `families` random families of at most
/// `m_max` members spread at most `eps_max`.
pub fn averaging_suite(families: usize, m_max: usize, eps_max: f64, seed: u64) -> SuiteOutcome {
    let mut r = rng(seed);
    let mut slack = Worst::new("member_distance_minus_asin_2eps");
    let mut equi = Worst::new("orthogonal_equivariance");
    slack.value = f64::NEG_INFINITY;
    let mut failures = 0;
    for _ in 0..families {
        let (n, k) = dims(&mut r, 2, 12, 4);
        let m = r.random_range(2..=m_max.max(2));
        let target = eps_max * r.random::<f64>();
        let q = random_orthogonal(&mut r, n);
        let outcome = (|| -> Result<(f64, f64), GeomError> {
            let members = random_family(&mut r, n, k, m, target)?;
            let eps = spread(&members)?;
            let avg = average_subspaces(&members)?;
            let mut worst = f64::NEG_INFINITY;
            for (_, s) in &members {
                worst = worst.max(finsler_distance(s, &avg.result)? - (2.0 * eps).asin());
            }
            let moved = members.iter().map(|(w, s)| Ok((*w, s.transformed(&q)?))).collect::<Result<Vec<_>, GeomError>>()?;
            let avg_moved = average_subspaces(&moved)?;
            let gap = projection(&avg_moved.result).distance_op(&projection(&avg.result.transformed(&q)?));
            Ok((worst, gap))
        })();
        match outcome {
            Ok((s, e)) => {
                slack.value = slack.value.max(s);
                let ok = equi.add(e);
                if !(ok && s < 0.0 && e < EQUIVARIANCE_TOL) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    if families == 0 {
        slack.value = -1.0;
    }
    let rows = vec![
        ContractRow::below(slack.name, slack.value, 0.0).with_note("max over members of d(member, average) - asin(2 epsilon)"),
        ContractRow::below(equi.name, equi.value, EQUIVARIANCE_TOL),
    ];
    SuiteOutcome { name: "subspace_averaging".into(), cases: families, failures, rows }
}

/// Forward-difference speed of the average against eight times the fastest
/// member, on `families` random one-parameter families with spread below 1/4.
pub fn derivative_suite(families: usize, seed: u64) -> SuiteOutcome {
    let mut r = rng(seed);
    let mut excess = Worst::new("average_speed_minus_8_member_speed");
    excess.value = f64::NEG_INFINITY;
    let mut failures = 0;
    for _ in 0..families {
        let (n, k) = dims(&mut r, 3, 8, 3);
        let m = r.random_range(2..=5);
        let outcome = (|| -> Result<(f64, f64), GeomError> {
            let members = random_family(&mut r, n, k, m, 0.2)?;
            let directions: Vec<Matrix64> = (0..m)
                .map(|_| {
                    let speed = r.random::<f64>();
                    graph_map(&mut r, n, k, speed)
                })
                .collect();
            let family = |mu: f64| -> Vec<(f64, Subspace64)> {
                members
                    .iter()
                    .zip(&directions)
                    .map(|((w, s), u)| (*w, graph_subspace(s, &u.scale(mu)).expect("graph of a finite map")))
                    .collect()
            };
            average_derivative_check(family, 0.0)
        })();
        match outcome {
            Ok((lhs, rhs)) => {
                excess.value = excess.value.max(lhs - rhs);
                if !(lhs <= rhs + DERIVATIVE_SLACK) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    if families == 0 {
        excess.value = 0.0;
    }
    let rows = vec![ContractRow::at_most(excess.name, excess.value, DERIVATIVE_SLACK)];
    SuiteOutcome { name: "average_derivative".into(), cases: families, failures, rows }
}
