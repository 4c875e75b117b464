//! Nearest-point projection onto a parametric submanifold.
//!
//! Coarse pass over the mesh, then damped Newton refinement of the best few
//! discrete local minima of the squared chordal distance. On the sphere the
//! chordal distance is a monotone function of the geodesic one, so both
//! ambients share the same objective.

use super::ParametricSubmanifold;
use crate::error::{GeomError, Result};
use crate::linalg::{dot, norm, solve, sub, symmetric_eigen};
use crate::scalar::{c, Real};

/// Relative margin by which the runner-up local minimum must exceed the
/// best distance for the foot point to count as unique.
pub const UNIQUENESS_MARGIN: f64 = 1e-6;

const MAX_ITER: usize = 50;
const PARAM_TOL: f64 = 1e-12;
const STARTS: usize = 3;
const LOCAL_STEP: f64 = 1e-6;

/// Result of [`ParametricSubmanifold::nearest_point`].
#[derive(Debug, Clone, PartialEq)]
pub struct FootpointResult<T> {
    pub param: Vec<T>,
    pub foot: Vec<T>,
    /// Ambient distance from the query point to the foot.
    pub rho: T,
    pub unique: bool,
    /// Distance to the best distinct competing local minimum, if any.
    pub runner_up: Option<T>,
}

struct Candidate<T> {
    param: Vec<T>,
    foot: Vec<T>,
    chord2: T,
}

impl<T: Real> ParametricSubmanifold<T> {
    fn chord2(&self, x: &[T], u: &[T]) -> (Vec<T>, T) {
        let p = self.embed(u);
        let r = sub(x, &p);
        let d = dot(&r, &r);
        (p, d)
    }

    /// Damped Newton on `u ↦ |x − e(u)|² / 2` from `u0`.
    fn refine(&self, x: &[T], u0: &[T]) -> Candidate<T> {
        let d = self.param_dim();
        let mut u = u0.to_vec();
        let (mut p, mut f) = self.chord2(x, &u);
        let ptol = c::<T>(PARAM_TOL);
        // rounding floor of the objective, so that steps at noise level still count
        let eps = T::epsilon();
        let floor = c::<T>(16.0) * eps * eps * (T::one() + dot(x, x));
        for _ in 0..MAX_ITER {
            let j = self.jacobian(&u);
            let r = sub(x, &p);
            let g: Vec<T> = j.tr_matvec(&r).iter().map(|&v| -v).collect();
            // Hessian: JᵀJ − Σ r_i ∇²e_i
            let mut h = j.tr_matmul(&j);
            for b in 0..d {
                let db = self.jacobian_derivative(&u, b);
                let col = db.tr_matvec(&r);
                for a in 0..d {
                    h[(a, b)] = h[(a, b)] - col[a];
                }
            }
            let h = h.symmetrized();
            let eig = symmetric_eigen(&h);
            let scale = eig.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
            let pd = eig.values[0] > c::<T>(1e-10) * scale;
            let system = if pd {
                h
            } else {
                // Levenberg–Marquardt fallback on the Gauss–Newton matrix
                let mut gn = j.tr_matmul(&j);
                let lam = c::<T>(1e-3) * gn.trace() / c(d as f64);
                for a in 0..d {
                    gn[(a, a)] = gn[(a, a)] + lam;
                }
                gn
            };
            let neg: Vec<T> = g.iter().map(|&v| -v).collect();
            let Some(mut step) = solve(&system, &neg) else { break };
            let mut accepted = false;
            // inside the quadratic basin the objective is below rounding noise,
            // so small positive definite steps are taken without a line search
            let local = pd && norm(&step) <= c::<T>(LOCAL_STEP) * (T::one() + norm(&u));
            for _ in 0..40 {
                let trial = self.wrap_param(&u.iter().zip(&step).map(|(&a, &s)| a + s).collect::<Vec<_>>());
                let (tp, tf) = self.chord2(x, &trial);
                if local || tf <= f * (T::one() + c::<T>(4.0) * eps) + floor {
                    let moved = self.param_distance(&u, &trial);
                    u = trial;
                    p = tp;
                    f = tf;
                    accepted = moved > T::zero();
                    break;
                }
                step = step.iter().map(|&s| s * c(0.5)).collect();
            }
            let size = norm(&step);
            if !accepted || size <= ptol * (T::one() + norm(&u)) {
                break;
            }
        }
        Candidate { param: u, foot: p, chord2: f }
    }

    /// First-order optimality: the residual `x − foot` has no component
    /// along the tangent space, except outward at a clamped boundary.
    fn first_order_ok(&self, x: &[T], cand: &Candidate<T>) -> (bool, T) {
        let j = self.jacobian(&cand.param);
        let r = sub(x, &cand.foot);
        let rho = norm(&r);
        let mut g = j.tr_matvec(&r);
        for (a, ax) in self.axes().iter().enumerate() {
            if ax.periodic {
                continue;
            }
            let u = cand.param[a];
            // at a lower bound the objective may still decrease outward (g < 0)
            if (u <= ax.min && g[a] <= T::zero()) || (u >= ax.max && g[a] >= T::zero()) {
                g[a] = T::zero();
            }
        }
        // tangential component of the residual, measured in the tangent frame
        let gram = j.tr_matmul(&j);
        let coef = solve(&gram, &g).unwrap_or_else(|| g.clone());
        let tangential = dot(&coef, &g).max(T::zero()).sqrt();
        let tol = (c::<T>(1e-8) * rho).max(T::tol(1e-10, 64.0) * (T::one() + norm(&cand.foot)));
        (tangential <= tol, tangential)
    }

    /// Nearest point with a uniqueness flag; fails only when no candidate
    /// converges.
    pub fn nearest_point_unchecked(&self, x: &[T]) -> Result<FootpointResult<T>> {
        if x.len() != self.ambient().coord_dim() {
            return Err(GeomError::DimensionMismatch { expected: self.ambient().coord_dim(), found: x.len() });
        }
        let d2: Vec<T> = self
            .mesh_points()
            .iter()
            .map(|p| {
                let r = sub(x, p);
                dot(&r, &r)
            })
            .collect();
        let mut minima: Vec<usize> = (0..d2.len())
            .filter(|&i| self.neighbors[i].iter().all(|&j| d2[i] <= d2[j]))
            .collect();
        minima.sort_by(|&a, &b| d2[a].partial_cmp(&d2[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        minima.truncate(STARTS);
        let mut cands: Vec<Candidate<T>> = Vec::new();
        let mut worst_resid = T::zero();
        for &i in &minima {
            let cand = self.refine(x, self.mesh_param(i));
            let (ok, resid) = self.first_order_ok(x, &cand);
            if !ok {
                worst_resid = worst_resid.max(resid);
                continue;
            }
            let dup = cands.iter().any(|o| {
                norm(&sub(&o.foot, &cand.foot)) <= c::<T>(1e-8) * (T::one() + o.chord2.sqrt())
            });
            if !dup {
                cands.push(cand);
            }
        }
        if cands.is_empty() {
            return Err(GeomError::NoConvergence { iterations: MAX_ITER, residual: worst_resid.as_f64() });
        }
        cands.sort_by(|a, b| a.chord2.partial_cmp(&b.chord2).unwrap_or(std::cmp::Ordering::Equal));
        let amb = self.ambient();
        let best = &cands[0];
        let rho = amb.distance(x, &best.foot);
        let runner_up = cands.get(1).map(|o| amb.distance(x, &o.foot));
        let margin = c::<T>(UNIQUENESS_MARGIN) * (T::one() + rho);
        let unique = runner_up.map_or(true, |r2| r2 > rho + margin);
        Ok(FootpointResult { param: best.param.clone(), foot: best.foot.clone(), rho, unique, runner_up })
    }

    /// Nearest point, required to be unique.
    pub fn nearest_point(&self, x: &[T]) -> Result<FootpointResult<T>> {
        let r = self.nearest_point_unchecked(x)?;
        if !r.unique {
            return Err(GeomError::NotUnique { rho: r.rho.as_f64(), runner_up: r.runner_up.map_or(f64::NAN, T::as_f64) });
        }
        Ok(r)
    }

    /// Projection of a point onto the submanifold.
    pub fn retract(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.nearest_point(x)?.foot)
    }
}
