//! Center-of-mass averaging of a finite weighted family of nearby
//! submanifolds.
//!
//! For a point `x` near the family, every member contributes the gradient of
//! its squared-distance potential and its extended Gauss map (normal space
//! transported to `x`). The averaged gradient is projected onto the averaged
//! normal space and then onto the tangent space of the reference member's
//! normal slice through `x`. The averaged submanifold is the zero set of this
//! doubly projected gradient, found slice by slice with Newton's method.

use rayon::prelude::*;

use crate::ambient::{AmbientSpace, Isometry};
use crate::error::{GeomError, Result};
use crate::grassmann::{average_subspaces, finsler_distance, validate_weights, AverageReport, Subspace};
use crate::linalg::{norm, solve, sub, symmetric_eigen, Matrix};
use crate::scalar::{c, Real};
use crate::submanifold::ParametricSubmanifold;

/// Finitely many submanifolds with probability weights; one of them is the
/// reference over whose normal slices the average is solved.
#[derive(Debug, Clone)]
pub struct WeightedFamily<T> {
    members: Vec<(T, ParametricSubmanifold<T>)>,
    reference: usize,
    isometries: Option<Vec<Isometry<T>>>,
}

impl<T: Real> WeightedFamily<T> {
    pub fn new(members: Vec<(T, ParametricSubmanifold<T>)>, reference: usize) -> Result<Self> {
        let weights: Vec<T> = members.iter().map(|(w, _)| *w).collect();
        validate_weights(&weights)?;
        if reference >= members.len() {
            return Err(GeomError::DimensionMismatch { expected: members.len(), found: reference });
        }
        let first = &members[0].1;
        for (_, m) in &members[1..] {
            if m.ambient() != first.ambient() {
                return Err(GeomError::InvalidShape("family members live in different ambient spaces".into()));
            }
            if m.param_dim() != first.param_dim() {
                return Err(GeomError::DimensionMismatch { expected: first.param_dim(), found: m.param_dim() });
            }
        }
        Ok(Self { members, reference, isometries: None })
    }

    /// Equal-weight pair, reference the first.
    pub fn pair(a: ParametricSubmanifold<T>, b: ParametricSubmanifold<T>) -> Result<Self> {
        let half = c::<T>(0.5);
        Self::new(vec![(half, a), (half, b)], 0)
    }

    /// Orbit of `base` under a finite group of isometries, uniformly weighted.
    /// The reference is the member produced by the identity when present.
    pub fn from_orbit(base: &ParametricSubmanifold<T>, group: Vec<Isometry<T>>) -> Result<Self> {
        if group.is_empty() {
            return Err(GeomError::WeightError("empty group".into()));
        }
        let n = base.ambient().coord_dim();
        let w = T::one() / c(group.len() as f64);
        let members = group
            .iter()
            .map(|g| Ok((w, base.transformed(g)?)))
            .collect::<Result<Vec<_>>>()?;
        let id = Isometry::identity(n);
        let reference = group.iter().position(|g| g.approx_eq(&id, c(1e-12))).unwrap_or(0);
        let mut fam = Self::new(members, reference)?;
        fam.isometries = Some(group);
        Ok(fam)
    }

    /// Same family with another reference member.
    pub fn with_reference(mut self, reference: usize) -> Result<Self> {
        if reference >= self.members.len() {
            return Err(GeomError::DimensionMismatch { expected: self.members.len(), found: reference });
        }
        self.reference = reference;
        Ok(self)
    }

    /// Same family with new weights (same order).
    pub fn with_weights(&self, weights: &[T]) -> Result<Self> {
        if weights.len() != self.members.len() {
            return Err(GeomError::DimensionMismatch { expected: self.members.len(), found: weights.len() });
        }
        let members = self.members.iter().zip(weights).map(|((_, m), &w)| (w, m.clone())).collect();
        let mut out = Self::new(members, self.reference)?;
        out.isometries = None;
        Ok(out)
    }

    /// Image of every member under `g`.
    pub fn transformed(&self, g: &Isometry<T>) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|(w, m)| Ok((*w, m.transformed(g)?)))
            .collect::<Result<Vec<_>>>()?;
        let isometries = self
            .isometries
            .as_ref()
            .map(|gs| gs.iter().map(|h| g.compose(h).compose(&g.inverse())).collect());
        Ok(Self { members, reference: self.reference, isometries })
    }

    pub fn members(&self) -> &[(T, ParametricSubmanifold<T>)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn reference_member(&self) -> &ParametricSubmanifold<T> {
        &self.members[self.reference].1
    }

    pub fn ambient(&self) -> &AmbientSpace<T> {
        self.members[0].1.ambient()
    }

    /// Group elements when the family was built as an orbit.
    pub fn isometries(&self) -> Option<&[Isometry<T>]> {
        self.isometries.as_deref()
    }
}

/// Newton solver settings for the per-slice zero search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Residual tolerance, relative to `1 + |w|`.
    pub tol: T,
    pub max_iter: usize,
    /// Central-difference step of the slice jacobian, relative to `1 + |w|`.
    pub jacobian_step: T,
    /// Override of the admissible offset radius.
    pub r_max: Option<T>,
    /// Families whose measured spread reaches this value are refused.
    pub epsilon_max: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self { tol: c(1e-10), max_iter: 50, jacobian_step: c(1e-4), r_max: None, epsilon_max: c(0.05) }
    }
}

impl<T: Real> SolverConfig<T> {
    /// Admissible offset radius for a family of spread `epsilon`:
    /// `min(1/4, max(100 ε, 10 tol))` unless overridden.
    pub fn radius(&self, epsilon: T) -> T {
        self.r_max.unwrap_or_else(|| c::<T>(0.25).min((c::<T>(100.0) * epsilon).max(c::<T>(10.0) * self.tol)))
    }
}

/// C¹ distance and its two ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1Distance<T> {
    pub value: T,
    /// Largest point distance.
    pub c0: T,
    /// Largest angle between transported tangent spaces.
    pub angular: T,
}

/// C¹ distance from `n` to `n2`: over the mesh of `n2`, the larger of the
/// distance to `n` and the angle between the tangent space of `n2` and the
/// tangent space of `n` at the foot point, transported along the
/// minimizing geodesic. Not symmetric.
pub fn c1_distance<T: Real>(n: &ParametricSubmanifold<T>, n2: &ParametricSubmanifold<T>) -> Result<C1Distance<T>> {
    if n.ambient() != n2.ambient() {
        return Err(GeomError::InvalidShape("submanifolds live in different ambient spaces".into()));
    }
    let amb = n.ambient();
    let rows = (0..n2.mesh_len())
        .into_par_iter()
        .map(|i| {
            let x = n2.mesh_point(i);
            let f = n.nearest_point(x)?;
            let t = n.tangent_space(&f.param)?;
            let moved = if f.rho > T::zero() { amb.transport_subspace(&f.foot, x, &t)? } else { t };
            let t2 = n2.tangent_space(n2.mesh_param(i))?;
            Ok((f.rho, finsler_distance(&moved, &t2)?))
        })
        .collect::<Vec<Result<(T, T)>>>();
    let mut out = C1Distance { value: T::zero(), c0: T::zero(), angular: T::zero() };
    for r in rows {
        let (rho, ang) = r?;
        out.c0 = out.c0.max(rho);
        out.angular = out.angular.max(ang);
    }
    out.value = out.c0.max(out.angular);
    Ok(out)
}

/// Largest C¹ distance over ordered pairs of distinct members.
pub fn family_spread<T: Real>(family: &WeightedFamily<T>) -> Result<T> {
    let m = family.len();
    let mut eps = T::zero();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                eps = eps.max(c1_distance(&family.members[i].1, &family.members[j].1)?.value);
            }
        }
    }
    Ok(eps)
}

/// Per-member gradients and Gauss maps at `x`.
fn member_data<T: Real>(family: &WeightedFamily<T>, x: &[T]) -> Result<Vec<(T, Vec<T>, Subspace<T>)>> {
    family
        .members
        .iter()
        .map(|(w, m)| {
            let f = m.nearest_point(x)?;
            Ok((*w, m.grad_from_foot(x, &f)?, m.gauss_from_foot(x, &f)?))
        })
        .collect()
}

fn weighted_gradient<T: Real>(data: &[(T, Vec<T>, Subspace<T>)]) -> Vec<T> {
    let mut g = vec![T::zero(); data[0].1.len()];
    for (w, gi, _) in data {
        for (o, &v) in g.iter_mut().zip(gi) {
            *o = *o + *w * v;
        }
    }
    g
}

/// Weighted average of the members' potential gradients at `x`.
pub fn averaged_gradient<T: Real>(family: &WeightedFamily<T>, x: &[T]) -> Result<Vec<T>> {
    Ok(weighted_gradient(&member_data(family, x)?))
}

/// Largest deviation of a member gradient from the averaged gradient at `x`.
pub fn gradient_deviation<T: Real>(family: &WeightedFamily<T>, x: &[T]) -> Result<T> {
    let data = member_data(family, x)?;
    let avg = weighted_gradient(&data);
    Ok(data.iter().fold(T::zero(), |m, (_, g, _)| m.max(norm(&sub(g, &avg)))))
}

/// Average of the members' extended Gauss maps at `x`.
pub fn averaged_gauss_field<T: Real>(family: &WeightedFamily<T>, x: &[T]) -> Result<AverageReport<T>> {
    let data = member_data(family, x)?;
    let items: Vec<(T, Subspace<T>)> = data.into_iter().map(|(w, _, s)| (w, s)).collect();
    average_subspaces(&items)
}

/// Evaluation of the doubly projected gradient on one slice.
struct SliceEval<'a, T> {
    family: &'a WeightedFamily<T>,
    base: Vec<T>,
    param: Vec<T>,
    normal: Subspace<T>,
}

impl<'a, T: Real> SliceEval<'a, T> {
    fn new(family: &'a WeightedFamily<T>, vertex: usize) -> Result<Self> {
        let r = family.reference_member();
        let param = r.mesh_param(vertex).to_vec();
        Ok(Self { family, base: r.mesh_point(vertex).to_vec(), normal: r.normal_space(&param)?, param })
    }

    fn offset(&self, a: &[T]) -> Vec<T> {
        self.normal.frame().matvec(a)
    }

    /// Slice coordinates of the doubly projected gradient at `exp_p(w(a))`.
    fn value(&self, a: &[T]) -> Result<Vec<T>> {
        let w = self.offset(a);
        let amb = self.family.ambient();
        let x = amb.exp(&self.base, &w)?;
        let slice = self.family.reference_member().slice_tangent(&self.param, &w)?;
        let data = member_data(self.family, &x)?;
        let grad = weighted_gradient(&data);
        let items: Vec<(T, Subspace<T>)> = data.into_iter().map(|(w, _, s)| (w, s)).collect();
        let gamma = average_subspaces(&items)?;
        let projected = gamma.result.project(&grad);
        Ok(slice.coordinates(&projected))
    }

    fn jacobian(&self, a: &[T], step: T) -> Result<Matrix<T>> {
        let k = a.len();
        let h = step * (T::one() + norm(a));
        let cols = (0..k)
            .map(|j| {
                let mut up = a.to_vec();
                let mut dn = a.to_vec();
                up[j] = up[j] + h;
                dn[j] = dn[j] - h;
                let (vp, vm) = (self.value(&up)?, self.value(&dn)?);
                Ok(vp.iter().zip(&vm).map(|(&p, &m)| (p - m) / (h + h)).collect())
            })
            .collect::<Result<Vec<Vec<T>>>>()?;
        Ok(Matrix::from_columns(&cols))
    }
}

/// Doubly projected gradient at `exp_p(w)` for the reference mesh vertex
/// `vertex` and a normal vector `w` there, in coordinates of the orthonormal
/// slice frame.
pub fn v_field<T: Real>(family: &WeightedFamily<T>, vertex: usize, w: &[T]) -> Result<Vec<T>> {
    let ev = SliceEval::new(family, vertex)?;
    let a = ev.normal.coordinates(w);
    ev.value(&a)
}

/// Convergence record of one slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceDiagnostics<T> {
    pub residual: T,
    /// Number of field evaluations of the Newton loop, including the final
    /// converged one.
    pub iterations: usize,
    /// Smallest eigenvalue of the symmetrized slice jacobian at the zero.
    pub min_eigenvalue: T,
    pub offset_norm: T,
}

/// Zero of the doubly projected gradient along one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSolution<T> {
    /// Normal offset at the base vertex, in ambient coordinates.
    pub offset: Vec<T>,
    pub point: Vec<T>,
    pub diagnostics: SliceDiagnostics<T>,
}

/// Newton iteration from the zero offset on the slice of reference vertex
/// `vertex`, keeping `|w| ≤ r_max`.
pub fn solve_slice<T: Real>(
    family: &WeightedFamily<T>,
    vertex: usize,
    config: &SolverConfig<T>,
    r_max: T,
) -> Result<SliceSolution<T>> {
    let ev = SliceEval::new(family, vertex)?;
    let k = ev.normal.dim();
    let left = |a: &[T]| GeomError::LeftTube { norm: norm(a).as_f64(), limit: r_max.as_f64() };
    let eval = |a: &[T]| -> Result<Vec<T>> {
        ev.value(a).map_err(|e| match e {
            GeomError::NotUnique { .. } | GeomError::NoConvergence { .. } | GeomError::BeyondInjectivity { .. } => {
                left(a)
            }
            other => other,
        })
    };
    let jac = |a: &[T]| -> Result<Matrix<T>> {
        ev.jacobian(a, config.jacobian_step).map_err(|e| match e {
            GeomError::NotUnique { .. } | GeomError::NoConvergence { .. } | GeomError::BeyondInjectivity { .. } => {
                left(a)
            }
            other => other,
        })
    };
    let mut a = vec![T::zero(); k];
    let mut iterations = 0;
    let mut residual = T::infinity();
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        let v = eval(&a)?;
        residual = norm(&v);
        if residual < config.tol * (T::one() + norm(&a)) {
            converged = true;
            break;
        }
        let j = jac(&a)?;
        let neg: Vec<T> = v.iter().map(|&x| -x).collect();
        let mut step = solve(&j, &neg).unwrap_or(neg);
        let len = norm(&step);
        if len > r_max {
            step = step.iter().map(|&s| s * r_max / len).collect();
        }
        for (ai, si) in a.iter_mut().zip(&step) {
            *ai = *ai + *si;
        }
        if norm(&a) > r_max {
            return Err(left(&a));
        }
    }
    if !converged {
        return Err(GeomError::NoConvergence { iterations, residual: residual.as_f64() });
    }
    let j = jac(&a)?;
    let min_eigenvalue = symmetric_eigen(&j.symmetrized()).values[0];
    if !(min_eigenvalue > T::zero()) {
        return Err(GeomError::NotPositive { min_eigenvalue: min_eigenvalue.as_f64() });
    }
    let offset = ev.offset(&a);
    let point = family.ambient().exp(&ev.base, &offset)?;
    let offset_norm = norm(&offset);
    Ok(SliceSolution { offset, point, diagnostics: SliceDiagnostics { residual, iterations, min_eigenvalue, offset_norm } })
}

/// Family-level figures of an averaged section.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionSummary<T> {
    /// Largest pairwise C¹ distance among the members.
    pub epsilon: T,
    pub r_max: T,
    pub max_offset: T,
    pub max_residual: T,
    pub min_jacobian_eigenvalue: T,
    pub max_iterations: usize,
    /// C¹ distance from every member to the averaged submanifold.
    pub member_c1: Vec<C1Distance<T>>,
}

/// Slack added to the C⁰ and C¹ bounds to absorb solver and interpolation
/// round-off.
pub const CONTRACT_SLACK: f64 = 1e-8;

impl<T: Real> SectionSummary<T> {
    /// `100 ε`.
    pub fn c0_bound(&self) -> T {
        c::<T>(100.0) * self.epsilon
    }

    /// `136 √ε`.
    pub fn c1_bound(&self) -> T {
        c::<T>(136.0) * self.epsilon.sqrt()
    }

    pub fn max_member_c1(&self) -> T {
        self.member_c1.iter().fold(T::zero(), |m, d| m.max(d.value))
    }

    pub fn c0_holds(&self) -> bool {
        self.max_offset <= self.c0_bound() + c(CONTRACT_SLACK)
    }

    pub fn c1_holds(&self) -> bool {
        self.max_member_c1() <= self.c1_bound() + c(CONTRACT_SLACK)
    }
}

/// The averaged submanifold as normal offsets over the reference mesh.
#[derive(Debug, Clone)]
pub struct AveragedSection<T> {
    pub reference: usize,
    pub base: ParametricSubmanifold<T>,
    pub offsets: Vec<Vec<T>>,
    pub points: Vec<Vec<T>>,
    pub per_slice: Vec<SliceDiagnostics<T>>,
    pub summary: SectionSummary<T>,
    /// Smooth interpolant through `points` over the reference parameters.
    pub surface: ParametricSubmanifold<T>,
}

impl<T: Real> AveragedSection<T> {
    pub fn offset_norms(&self) -> Vec<T> {
        self.per_slice.iter().map(|d| d.offset_norm).collect()
    }
}

/// Solve every slice of the reference member and assemble the averaged
/// submanifold.
pub fn average_family<T: Real>(family: &WeightedFamily<T>, config: &SolverConfig<T>) -> Result<AveragedSection<T>> {
    let epsilon = family_spread(family)?;
    if !(epsilon < config.epsilon_max) {
        return Err(GeomError::EpsilonTooLarge { epsilon: epsilon.as_f64(), limit: config.epsilon_max.as_f64() });
    }
    let r_max = config.radius(epsilon);
    let base = family.reference_member();
    let results: Vec<Result<SliceSolution<T>>> =
        (0..base.mesh_len()).into_par_iter().map(|v| solve_slice(family, v, config, r_max)).collect();
    let mut offsets = Vec::with_capacity(results.len());
    let mut points = Vec::with_capacity(results.len());
    let mut per_slice = Vec::with_capacity(results.len());
    for (vertex, r) in results.into_iter().enumerate() {
        let s = r.map_err(|e| GeomError::SliceFailed { vertex, source: Box::new(e) })?;
        offsets.push(s.offset);
        points.push(s.point);
        per_slice.push(s.diagnostics);
    }
    let surface = ParametricSubmanifold::from_samples(base, &points)?;
    let member_c1 = family
        .members
        .iter()
        .map(|(_, m)| c1_distance(m, &surface))
        .collect::<Result<Vec<_>>>()?;
    let summary = SectionSummary {
        epsilon,
        r_max,
        max_offset: per_slice.iter().fold(T::zero(), |m, d| m.max(d.offset_norm)),
        max_residual: per_slice.iter().fold(T::zero(), |m, d| m.max(d.residual)),
        min_jacobian_eigenvalue: per_slice.iter().fold(T::infinity(), |m, d| m.min(d.min_eigenvalue)),
        max_iterations: per_slice.iter().map(|d| d.iterations).max().unwrap_or(0),
        member_c1,
    };
    Ok(AveragedSection { reference: family.reference, base: base.clone(), offsets, points, per_slice, summary, surface })
}

/// Equal-weight average of two submanifolds over the mesh of the first.
pub fn midpoint<T: Real>(
    n1: &ParametricSubmanifold<T>,
    n2: &ParametricSubmanifold<T>,
    config: &SolverConfig<T>,
) -> Result<AveragedSection<T>> {
    average_family(&WeightedFamily::pair(n1.clone(), n2.clone())?, config)
}

/// One frame of a morph.
#[derive(Debug, Clone)]
pub struct MorphFrame<T> {
    pub time: T,
    pub points: Vec<Vec<T>>,
    /// Length of the normal offset that produced each point from the mesh of
    /// the neighbouring frame it was solved over; zero for the two inputs.
    pub offset_norms: Vec<T>,
    pub surface: ParametricSubmanifold<T>,
    /// Solver summary of the midpoint solve; `None` for the two inputs.
    pub summary: Option<SectionSummary<T>>,
}

/// Recursive midpoints between `n1` and `n2` at all dyadic times with
/// denominator `2^depth`. Each midpoint is solved over the mesh of the
/// earlier of its two neighbours.
pub fn morph<T: Real>(
    n1: &ParametricSubmanifold<T>,
    n2: &ParametricSubmanifold<T>,
    depth: u32,
    config: &SolverConfig<T>,
) -> Result<Vec<MorphFrame<T>>> {
    if depth == 0 {
        return Err(GeomError::InvalidShape("morph depth must be at least 1".into()));
    }
    let frame = |time: T, s: &ParametricSubmanifold<T>| MorphFrame {
        time,
        points: s.mesh_points().to_vec(),
        offset_norms: vec![T::zero(); s.mesh_len()],
        surface: s.clone(),
        summary: None,
    };
    let mut frames = vec![frame(T::zero(), n1), frame(T::one(), n2)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * frames.len() - 1);
        for pair in frames.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let time = (a.time + b.time) * c(0.5);
            let mid = midpoint(&a.surface, &b.surface, config)
                .map_err(|e| GeomError::MorphFailed { time: time.as_f64(), source: Box::new(e) })?;
            next.push(a.clone());
            let offset_norms = mid.offset_norms();
            next.push(MorphFrame { time, points: mid.points, offset_norms, surface: mid.surface, summary: Some(mid.summary) });
        }
        next.push(frames.last().cloned().expect("at least two frames"));
        frames = next;
    }
    Ok(frames)
}

/// Largest distance from a point of the set to a submanifold; infinite if a
/// projection fails.
pub fn point_set_distance<T: Real>(points: &[Vec<T>], target: &ParametricSubmanifold<T>) -> T {
    points
        .par_iter()
        .map(|p| target.nearest_point_unchecked(p).map_or(T::infinity(), |f| f.rho))
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), T::max)
}

/// Symmetrized distance between two averaged sections, each point measured
/// against the other's interpolating surface.
pub fn section_distance<T: Real>(a: &AveragedSection<T>, b: &AveragedSection<T>) -> T {
    point_set_distance(&a.points, &b.surface).max(point_set_distance(&b.points, &a.surface))
}

/// Largest distance from `g · q` to the averaged submanifold over group
/// elements `g` and section points `q`. The group is assumed closed under
/// inverses, which makes the measure symmetric.
pub fn invariance_check<T: Real>(isometries: &[Isometry<T>], section: &AveragedSection<T>) -> T {
    isometries
        .iter()
        .map(|g| {
            let moved: Vec<Vec<T>> = section.points.iter().map(|q| g.apply_point(q)).collect();
            point_set_distance(&moved, &section.surface)
        })
        .fold(T::zero(), T::max)
}

/// Bisection tolerance of [`equidistant_oracle`].
pub const ORACLE_TOL: f64 = 1e-12;

/// Point on the normal geodesic through mesh vertex `vertex` of `n1` that is
/// equidistant from `n1` and `n2` (both hypersurfaces), found by bisection of
/// the distance difference. Searches outward from the vertex in both
/// directions and returns the crossing closest to it.
pub fn equidistant_oracle<T: Real>(
    n1: &ParametricSubmanifold<T>,
    n2: &ParametricSubmanifold<T>,
    vertex: usize,
) -> Result<Vec<T>> {
    if n1.codim() != 1 || n2.codim() != 1 {
        return Err(GeomError::Unsupported("equidistant oracle needs hypersurfaces".into()));
    }
    let amb = n1.ambient();
    let p = n1.mesh_point(vertex).to_vec();
    let nu = n1.normal_space(n1.mesh_param(vertex))?;
    let n = nu.frame().column(0).to_vec();
    let at = |t: T| amb.exp(&p, &n.iter().map(|&v| v * t).collect::<Vec<_>>());
    let f = |t: T| -> Result<T> {
        let x = at(t)?;
        Ok(n1.nearest_point_unchecked(&x)?.rho - n2.nearest_point_unchecked(&x)?.rho)
    };
    let f0 = f(T::zero())?;
    if f0 == T::zero() {
        return Ok(p);
    }
    let limit = T::one().min(amb.injectivity_radius() * c(0.5));
    let mut prev = T::zero();
    let mut s = c::<T>(1e-3);
    let mut bracket = None;
    while prev < limit {
        let s_now = s.min(limit);
        for sign in [T::one(), -T::one()] {
            if bracket.is_none() && (f(sign * s_now)? * f0) <= T::zero() {
                bracket = Some((sign * prev, sign * s_now));
            }
        }
        if bracket.is_some() {
            break;
        }
        prev = s_now;
        s = s * c(1.5);
    }
    let (mut lo, mut hi) = bracket.ok_or(GeomError::NoSignChange { search_radius: limit.as_f64() })?;
    let mut flo = f(lo)?;
    let tol = c::<T>(ORACLE_TOL);
    while (hi - lo).abs() > tol {
        let mid = (lo + hi) * c(0.5);
        let fm = f(mid)?;
        if fm == T::zero() {
            lo = mid;
            hi = mid;
            break;
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    at((lo + hi) * c(0.5))
}
