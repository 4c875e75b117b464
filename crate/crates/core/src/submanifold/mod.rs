//! Compact parametric submanifolds of an ambient model space: meshes,
//! tangent and normal spaces, nearest-point projection, the squared-distance
//! potential and its derivatives, Gauss maps, second fundamental form and
//! gentleness diagnostics.

mod curvature;
mod footpoint;
pub mod shapes;
mod tube;

pub use curvature::{GentlenessReport, DOUBLE_NORMAL_COSINE};
pub use footpoint::{FootpointResult, UNIQUENESS_MARGIN};
pub use shapes::{Axis, FourierMode, Interpolant, Shape, CATALOG};
pub use tube::{HessianBlocks, HessianReport, HESSIAN_STEP};

use crate::ambient::{AmbientSpace, Isometry};
use crate::error::{GeomError, Result};
use crate::grassmann::{complement, make_subspace, Subspace};
use crate::linalg::{norm, singular_values, sub, Matrix};
use crate::scalar::{c, Real};

/// Smallest singular value of the embedding jacobian accepted at a mesh
/// vertex.
pub const IMMERSION_TOLERANCE: f64 = 1e-8;

/// Central-difference step for derivatives of analytic jacobians.
pub const FD_STEP: f64 = 1e-5;

/// Placement of a canonical shape: `x ↦ iso(scale · x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement<T> {
    pub scale: T,
    pub iso: Isometry<T>,
}

impl<T: Real> Placement<T> {
    pub fn identity(n: usize) -> Self {
        Self { scale: T::one(), iso: Isometry::identity(n) }
    }
}

/// A compact submanifold given by a catalog shape placed in an ambient space,
/// together with a sampling mesh over its parameter domain.
#[derive(Debug, Clone)]
pub struct ParametricSubmanifold<T> {
    ambient: AmbientSpace<T>,
    shape: Shape<T>,
    placement: Placement<T>,
    axes: Vec<Axis<T>>,
    resolution: Vec<usize>,
    params: Vec<Vec<T>>,
    points: Vec<Vec<T>>,
    neighbors: Vec<Vec<usize>>,
}

impl<T: Real> ParametricSubmanifold<T> {
    /// Shape in its canonical position.
    pub fn new(ambient: AmbientSpace<T>, shape: Shape<T>, resolution: Vec<usize>) -> Result<Self> {
        let n = ambient.coord_dim();
        Self::placed(ambient, shape, resolution, Placement::identity(n))
    }

    /// Shape moved by a placement.
    pub fn placed(
        ambient: AmbientSpace<T>,
        shape: Shape<T>,
        resolution: Vec<usize>,
        placement: Placement<T>,
    ) -> Result<Self> {
        shape.validate()?;
        let d = shape.param_dim();
        if d >= ambient.dim() {
            return Err(GeomError::InvalidShape(format!(
                "{}: dimension {d} leaves no normal directions in a {}-dimensional ambient",
                shape.name(),
                ambient.dim()
            )));
        }
        if shape.canonical_dim() > ambient.coord_dim() {
            return Err(GeomError::InvalidShape(format!(
                "{} needs {} coordinates, ambient has {}",
                shape.name(),
                shape.canonical_dim(),
                ambient.coord_dim()
            )));
        }
        if resolution.len() != d {
            return Err(GeomError::DimensionMismatch { expected: d, found: resolution.len() });
        }
        let axes = shape.axes();
        for (a, &r) in axes.iter().zip(&resolution) {
            let least = if a.periodic { 3 } else { 2 };
            if r < least {
                return Err(GeomError::InvalidShape(format!("mesh resolution {r} is too coarse")));
            }
        }
        let n = ambient.coord_dim();
        let iso = &placement.iso;
        if iso.linear.rows() != n || iso.linear.cols() != n || iso.translation.len() != n {
            return Err(GeomError::InvalidIsometry(format!("placement must act on {n} coordinates")));
        }
        if !(placement.scale > T::zero() && placement.scale.is_finite()) {
            return Err(GeomError::InvalidShape("placement scale must be positive".into()));
        }
        let total: usize = resolution.iter().product();
        let params: Vec<Vec<T>> = (0..total)
            .map(|i| {
                let mut rem = i;
                axes.iter()
                    .zip(&resolution)
                    .map(|(a, &r)| {
                        let k = rem % r;
                        rem /= r;
                        a.node(k, r)
                    })
                    .collect()
            })
            .collect();
        let mut out =
            Self { ambient, shape, placement, axes, resolution, params, points: Vec::new(), neighbors: Vec::new() };
        out.points = out.params.iter().map(|u| out.embed(u)).collect();
        out.neighbors = (0..total).map(|i| out.grid_neighbors(i)).collect();
        out.check_mesh()?;
        Ok(out)
    }

    /// Interpolating submanifold through a grid of points sampled over the
    /// mesh of `like` (same axes and resolution).
    pub fn from_samples(like: &Self, points: &[Vec<T>]) -> Result<Self> {
        let sphere = like.ambient.is_sphere().then(|| like.ambient.radius());
        let it = Interpolant::from_samples(like.axes.clone(), like.resolution.clone(), points, sphere)?;
        Self::new(like.ambient, Shape::Sampled(it), like.resolution.clone())
    }

    fn check_mesh(&self) -> Result<()> {
        let tol = c::<T>(crate::ambient::MEMBERSHIP_TOLERANCE);
        for (i, p) in self.points.iter().enumerate() {
            if !self.ambient.contains(p, tol) {
                return Err(GeomError::InvalidShape(format!(
                    "{}: mesh vertex {i} does not lie in the ambient space",
                    self.shape.name()
                )));
            }
        }
        for u in &self.params {
            let s = singular_values(&self.jacobian(u));
            let smallest = *s.last().unwrap_or(&T::zero());
            if !(smallest > c(IMMERSION_TOLERANCE)) {
                return Err(GeomError::RankDeficient { smallest: smallest.as_f64(), largest: s[0].as_f64() });
            }
        }
        let extent = self.points.iter().fold(T::zero(), |m, p| m.max(norm(p)));
        let tol = c::<T>(1e-12) * (T::one() + extent);
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                if norm(&sub(&self.points[i], &self.points[j])) <= tol {
                    return Err(GeomError::InvalidShape(format!(
                        "{}: mesh vertices {i} and {j} coincide",
                        self.shape.name()
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn ambient(&self) -> &AmbientSpace<T> {
        &self.ambient
    }

    #[inline]
    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    #[inline]
    pub fn placement(&self) -> &Placement<T> {
        &self.placement
    }

    #[inline]
    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    #[inline]
    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    #[inline]
    pub fn param_dim(&self) -> usize {
        self.axes.len()
    }

    /// Intrinsic codimension.
    #[inline]
    pub fn codim(&self) -> usize {
        self.ambient.dim() - self.param_dim()
    }

    pub fn is_closed(&self) -> bool {
        self.axes.iter().all(|a| a.periodic)
    }

    /// Point at parameter `u`.
    pub fn embed(&self, u: &[T]) -> Vec<T> {
        let can = self.shape.eval(u);
        let mut full = vec![T::zero(); self.ambient.coord_dim()];
        for (f, &x) in full.iter_mut().zip(&can) {
            *f = x * self.placement.scale;
        }
        self.placement.iso.apply_point(&full)
    }

    /// Jacobian of [`embed`](Self::embed), `coord_dim x param_dim`.
    pub fn jacobian(&self, u: &[T]) -> Matrix<T> {
        let jc = self.shape.jacobian(u);
        let n = self.ambient.coord_dim();
        let cols: Vec<Vec<T>> = jc
            .columns()
            .map(|col| {
                let mut full = vec![T::zero(); n];
                for (f, &x) in full.iter_mut().zip(col) {
                    *f = x * self.placement.scale;
                }
                self.placement.iso.apply_vector(&full)
            })
            .collect();
        Matrix::from_columns(&cols)
    }

    /// Derivative of the jacobian along parameter axis `b`, by central
    /// differences of the analytic jacobian.
    pub fn jacobian_derivative(&self, u: &[T], b: usize) -> Matrix<T> {
        let h = c::<T>(FD_STEP) * (T::one() + u[b].abs());
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[b] = up[b] + h;
        dn[b] = dn[b] - h;
        self.jacobian(&up).sub(&self.jacobian(&dn)).scale(T::one() / (h + h))
    }

    pub fn mesh_len(&self) -> usize {
        self.params.len()
    }

    pub fn mesh_param(&self, i: usize) -> &[T] {
        &self.params[i]
    }

    pub fn mesh_point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub fn mesh_points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn mesh_params(&self) -> &[Vec<T>] {
        &self.params
    }

    /// Grid index of mesh vertex `i`, first axis fastest.
    pub fn mesh_multi_index(&self, i: usize) -> Vec<usize> {
        let mut rem = i;
        self.resolution
            .iter()
            .map(|&r| {
                let k = rem % r;
                rem /= r;
                k
            })
            .collect()
    }

    /// Mesh vertex at a grid index; `None` off a non-periodic edge.
    pub fn mesh_index(&self, multi: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for ((&k, &r), a) in multi.iter().zip(&self.resolution).zip(&self.axes) {
            let r_i = r as i64;
            let k = if a.periodic {
                k.rem_euclid(r_i)
            } else if (0..r_i).contains(&k) {
                k
            } else {
                return None;
            };
            idx += k as usize * stride;
            stride *= r;
        }
        Some(idx)
    }

    /// Grid neighbours (including diagonals), wrapping periodic axes.
    pub fn mesh_neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    fn grid_neighbors(&self, i: usize) -> Vec<usize> {
        let base: Vec<i64> = self.mesh_multi_index(i).iter().map(|&k| k as i64).collect();
        let d = base.len();
        let mut out = Vec::new();
        let combos = 3usize.pow(d as u32);
        for m in 0..combos {
            let mut rem = m;
            let mut idx = base.clone();
            let mut zero = true;
            for k in idx.iter_mut() {
                let off = (rem % 3) as i64 - 1;
                rem /= 3;
                zero &= off == 0;
                *k += off;
            }
            if zero {
                continue;
            }
            if let Some(j) = self.mesh_index(&idx) {
                if j != i && !out.contains(&j) {
                    out.push(j);
                }
            }
        }
        out
    }

    /// Wrap or clamp a parameter into the domain.
    pub fn wrap_param(&self, u: &[T]) -> Vec<T> {
        u.iter().zip(&self.axes).map(|(&x, a)| a.wrap(x)).collect()
    }

    /// Euclidean length of the wrapped parameter difference.
    pub fn param_distance(&self, u: &[T], v: &[T]) -> T {
        let d: Vec<T> = u.iter().zip(v).zip(&self.axes).map(|((&a, &b), ax)| ax.delta(a, b)).collect();
        norm(&d)
    }

    /// Tangent space at parameter `u`, as a subspace of the ambient tangent
    /// space in embedding coordinates.
    pub fn tangent_space(&self, u: &[T]) -> Result<Subspace<T>> {
        let j = self.jacobian(u);
        if self.ambient.is_sphere() {
            let p = self.embed(u);
            let cols: Vec<Vec<T>> = j.columns().map(|col| self.ambient.project_tangent(&p, col)).collect();
            make_subspace(&Matrix::from_columns(&cols))
        } else {
            make_subspace(&j)
        }
    }

    /// Normal space at parameter `u`: the orthogonal complement of the
    /// tangent space inside the ambient tangent space.
    pub fn normal_space(&self, u: &[T]) -> Result<Subspace<T>> {
        let t = self.tangent_space(u)?;
        if self.ambient.is_sphere() {
            let p = self.embed(u);
            let mut cols: Vec<Vec<T>> = t.frame().columns().map(<[T]>::to_vec).collect();
            let len = norm(&p);
            cols.push(p.iter().map(|&x| x / len).collect());
            complement(&make_subspace(&Matrix::from_columns(&cols))?)
        } else {
            complement(&t)
        }
    }

    /// Image under an ambient isometry.
    pub fn transformed(&self, g: &Isometry<T>) -> Result<Self> {
        g.validate(&self.ambient)?;
        let placement = Placement { scale: self.placement.scale, iso: g.compose(&self.placement.iso) };
        Self::placed(self.ambient, self.shape.clone(), self.resolution.clone(), placement)
    }

    /// The same submanifold with the whole ambient geometry scaled by
    /// `factor` (about the origin; sphere radii scale too).
    pub fn rescaled(&self, factor: T) -> Result<Self> {
        if !(factor > T::zero() && factor.is_finite()) {
            return Err(GeomError::InvalidShape(format!("rescale factor {factor} must be positive")));
        }
        let ambient = if self.ambient.is_sphere() {
            AmbientSpace::sphere(self.ambient.dim(), self.ambient.radius() * factor)?
        } else {
            self.ambient
        };
        let iso = Isometry {
            linear: self.placement.iso.linear.clone(),
            translation: self.placement.iso.translation.iter().map(|&b| b * factor).collect(),
        };
        let placement = Placement { scale: self.placement.scale * factor, iso };
        Self::placed(ambient, self.shape.clone(), self.resolution.clone(), placement)
    }
}
