//! Second fundamental form and gentleness diagnostics.

use rayon::prelude::*;

use super::ParametricSubmanifold;
use crate::grassmann::projection_length;
use crate::linalg::{norm, solve};
use crate::scalar::{c, Real};

/// A mesh pair counts as a self-approach candidate when the connecting
/// geodesic makes an angle with both tangent spaces whose cosine is at most
/// this value.
pub const DOUBLE_NORMAL_COSINE: f64 = 0.3;

/// Pairs closer than this many grid cells on every axis are skipped in the
/// self-approach search.
const MIN_CELL_SEPARATION: usize = 4;

/// Sampled geometry bounds of a submanifold in its ambient space.
///
/// `injectivity_estimate` is a heuristic: the smaller of the focal bound
/// `1 / second_form_norm` and half the shortest nearly double-normal chord
/// between well separated mesh vertices. A `gentle` verdict is therefore a
/// sampled claim, not a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct GentlenessReport<T> {
    pub second_form_norm: T,
    /// Bound on the absolute sectional curvature of the ambient.
    pub curvature_bound: T,
    pub injectivity_estimate: T,
    /// Smallest `c` for which the geometry is bounded by `c`.
    pub scale_c: T,
    pub gentle: bool,
}

impl<T: Real> GentlenessReport<T> {
    /// Factor by which all lengths should be multiplied so that the geometry
    /// becomes bounded by 1; 1 when nothing constrains the scale.
    pub fn rescale_factor(&self) -> T {
        if self.scale_c > T::zero() {
            self.scale_c
        } else {
            T::one()
        }
    }
}

impl<T: Real> ParametricSubmanifold<T> {
    /// Second fundamental form vector `B(w, w)` for the tangent vector
    /// `w = J a` at parameter `u`: the normal part of the acceleration.
    pub fn second_form(&self, u: &[T], a: &[T]) -> crate::error::Result<Vec<T>> {
        let d = self.param_dim();
        let n = self.ambient().coord_dim();
        let mut acc = vec![T::zero(); n];
        for b in 0..d {
            let db = self.jacobian_derivative(u, b);
            let v = db.matvec(a);
            for (o, &x) in acc.iter_mut().zip(&v) {
                *o = *o + a[b] * x;
            }
        }
        let nu = self.normal_space(u)?;
        Ok(nu.project(&acc))
    }

    /// `max |B(w, w)|` over unit tangent `w` at parameter `u`.
    fn second_form_at(&self, u: &[T]) -> crate::error::Result<T> {
        let j = self.jacobian(u);
        let gram = j.tr_matmul(&j);
        let t = self.tangent_space(u)?;
        // coefficients a with J a = w for a unit tangent w
        let coeffs = |w: &[T]| -> Vec<T> {
            let rhs = j.tr_matvec(w);
            solve(&gram, &rhs).unwrap_or(rhs)
        };
        let value = |phi: T| -> crate::error::Result<T> {
            let w: Vec<T> = if t.dim() == 1 {
                t.frame().column(0).to_vec()
            } else {
                let (s, co) = phi.sin_cos();
                t.frame().column(0).iter().zip(t.frame().column(1)).map(|(&x, &y)| co * x + s * y).collect()
            };
            Ok(norm(&self.second_form(u, &coeffs(&w))?))
        };
        match t.dim() {
            1 => value(T::zero()),
            2 => {
                let samples = 48;
                let step = T::PI() / c(samples as f64);
                let mut best = (T::zero(), T::zero());
                for i in 0..samples {
                    let phi = step * c(i as f64);
                    let v = value(phi)?;
                    if v > best.1 {
                        best = (phi, v);
                    }
                }
                // golden-section refinement around the best sample
                let (mut lo, mut hi) = (best.0 - step, best.0 + step);
                let g = c::<T>(0.618_033_988_749_895);
                for _ in 0..40 {
                    let m1 = hi - g * (hi - lo);
                    let m2 = lo + g * (hi - lo);
                    if value(m1)? > value(m2)? {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                Ok(best.1.max(value((lo + hi) * c(0.5))?))
            }
            _ => Err(crate::error::GeomError::Unsupported("second form for dimension above 2".into())),
        }
    }

    /// Largest sampled norm of the second fundamental form over the mesh.
    pub fn second_form_norm(&self) -> crate::error::Result<T> {
        let vals = self
            .mesh_params()
            .par_iter()
            .map(|u| self.second_form_at(u))
            .collect::<crate::error::Result<Vec<T>>>()?;
        Ok(vals.into_iter().fold(T::zero(), T::max))
    }

    /// Half the shortest nearly double-normal chord between mesh vertices
    /// that are at least a few grid cells apart; infinite if there is none.
    pub fn self_approach_estimate(&self) -> crate::error::Result<T> {
        let amb = self.ambient();
        let tangents = self
            .mesh_params()
            .iter()
            .map(|u| self.tangent_space(u))
            .collect::<crate::error::Result<Vec<_>>>()?;
        let multi: Vec<Vec<usize>> = (0..self.mesh_len()).map(|i| self.mesh_multi_index(i)).collect();
        let cos_max = c::<T>(DOUBLE_NORMAL_COSINE);
        let far = |i: usize, j: usize| {
            multi[i].iter().zip(&multi[j]).zip(self.resolution()).zip(self.axes()).any(|(((&a, &b), &r), ax)| {
                let d = a.abs_diff(b);
                let d = if ax.periodic { d.min(r - d) } else { d };
                d >= MIN_CELL_SEPARATION
            })
        };
        let best = (0..self.mesh_len())
            .into_par_iter()
            .map(|i| {
                let p = self.mesh_point(i);
                let mut best = T::infinity();
                for j in (i + 1)..self.mesh_len() {
                    if !far(i, j) {
                        continue;
                    }
                    let q = self.mesh_point(j);
                    let dist = amb.distance(p, q);
                    if !(dist < best) {
                        continue;
                    }
                    let (Ok(l1), Ok(l2)) = (amb.log(p, q), amb.log(q, p)) else { continue };
                    let (n1, n2) = (norm(&l1), norm(&l2));
                    if n1 == T::zero() || n2 == T::zero() {
                        continue;
                    }
                    let c1 = projection_length(&tangents[i], &l1) / n1;
                    let c2 = projection_length(&tangents[j], &l2) / n2;
                    if c1 <= cos_max && c2 <= cos_max {
                        best = dist;
                    }
                }
                best
            })
            .collect::<Vec<T>>()
            .into_iter()
            .fold(T::infinity(), T::min);
        Ok(best * c(0.5))
    }

    /// Sampled gentleness diagnostics.
    pub fn gentleness_report(&self) -> crate::error::Result<GentlenessReport<T>> {
        let b = self.second_form_norm()?;
        let focal = if b > T::zero() { T::one() / b } else { T::infinity() };
        let inj = focal.min(self.self_approach_estimate()?);
        let k = self.ambient().sectional_curvature().abs();
        let scale_c = (T::one() / inj).max(k.sqrt()).max(T::one() / self.ambient().injectivity_radius());
        let gentle = scale_c <= T::one() + c::<T>(1e-8);
        Ok(GentlenessReport { second_form_norm: b, curvature_bound: k, injectivity_estimate: inj, scale_c, gentle })
    }
}
