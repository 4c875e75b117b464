//! Constant-curvature ambient spaces: Euclidean `R^n` and the round sphere
//! `S^n(R)` embedded in `R^(n+1)`, with closed-form exp, log, parallel
//! transport and distance. Points and tangent vectors are plain coordinate
//! vectors in the embedding space.

use crate::error::{GeomError, Result};
use crate::grassmann::{complement, make_subspace, Subspace};
use crate::linalg::{axpy, dot, norm, scaled, sub, Matrix};
use crate::scalar::{c, Real};

/// Tolerance for membership and isometry checks.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientKind {
    Euclidean,
    Sphere,
}

/// A riemannian model space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientSpace<T> {
    kind: AmbientKind,
    dim: usize,
    radius: T,
}

impl<T: Real> AmbientSpace<T> {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(GeomError::InvalidShape(format!("ambient dimension {dim} < 2")));
        }
        Ok(Self { kind: AmbientKind::Euclidean, dim, radius: T::infinity() })
    }

    pub fn sphere(dim: usize, radius: T) -> Result<Self> {
        if dim < 2 {
            return Err(GeomError::InvalidShape(format!("sphere dimension {dim} < 2")));
        }
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(GeomError::InvalidShape(format!("sphere radius {radius} is not positive")));
        }
        Ok(Self { kind: AmbientKind::Sphere, dim, radius })
    }

    #[inline]
    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    #[inline]
    pub fn is_sphere(&self) -> bool {
        self.kind == AmbientKind::Sphere
    }

    /// Intrinsic dimension.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length of coordinate vectors: `n` or `n + 1`.
    #[inline]
    pub fn coord_dim(&self) -> usize {
        match self.kind {
            AmbientKind::Euclidean => self.dim,
            AmbientKind::Sphere => self.dim + 1,
        }
    }

    /// Sphere radius; infinite for Euclidean space.
    #[inline]
    pub fn radius(&self) -> T {
        self.radius
    }

    /// Constant sectional curvature.
    pub fn sectional_curvature(&self) -> T {
        match self.kind {
            AmbientKind::Euclidean => T::zero(),
            AmbientKind::Sphere => T::one() / (self.radius * self.radius),
        }
    }

    /// Injectivity radius of the exponential map at every point.
    pub fn injectivity_radius(&self) -> T {
        match self.kind {
            AmbientKind::Euclidean => T::infinity(),
            AmbientKind::Sphere => T::PI() * self.radius,
        }
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() != self.coord_dim() {
            return Err(GeomError::DimensionMismatch { expected: self.coord_dim(), found: v.len() });
        }
        Ok(())
    }

    /// Whether `x` is a point of the space within `tol`.
    pub fn contains(&self, x: &[T], tol: T) -> bool {
        if x.len() != self.coord_dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.kind {
            AmbientKind::Euclidean => true,
            AmbientKind::Sphere => (norm(x) - self.radius).abs() <= tol * self.radius.max(T::one()),
        }
    }

    /// Nearest point of the space (radial renormalization on the sphere).
    pub fn project_point(&self, x: &[T]) -> Vec<T> {
        match self.kind {
            AmbientKind::Euclidean => x.to_vec(),
            AmbientKind::Sphere => scaled(self.radius / norm(x), x),
        }
    }

    /// Orthogonal projection of `v` onto `T_x M`.
    pub fn project_tangent(&self, x: &[T], v: &[T]) -> Vec<T> {
        match self.kind {
            AmbientKind::Euclidean => v.to_vec(),
            AmbientKind::Sphere => {
                let mut out = v.to_vec();
                axpy(-dot(x, v) / dot(x, x), x, &mut out);
                out
            }
        }
    }

    /// Orthonormal frame of `T_x M` in coordinates.
    pub fn tangent_space(&self, x: &[T]) -> Result<Subspace<T>> {
        self.check_len(x)?;
        match self.kind {
            AmbientKind::Euclidean => Ok(Subspace::from_orthonormal(Matrix::identity(self.dim))),
            AmbientKind::Sphere => complement(&make_subspace(&Matrix::from_columns(&[x.to_vec()]))?),
        }
    }

    /// Riemannian exponential.
    pub fn exp(&self, x: &[T], v: &[T]) -> Result<Vec<T>> {
        self.check_len(x)?;
        self.check_len(v)?;
        match self.kind {
            AmbientKind::Euclidean => Ok(x.iter().zip(v).map(|(&a, &b)| a + b).collect()),
            AmbientKind::Sphere => {
                let r = self.radius;
                let len = norm(v);
                if len >= T::PI() * r {
                    return Err(GeomError::BeyondInjectivity { distance: len.as_f64(), limit: (T::PI() * r).as_f64() });
                }
                if len == T::zero() {
                    return Ok(x.to_vec());
                }
                let th = len / r;
                let (s, co) = th.sin_cos();
                let y: Vec<T> = x.iter().zip(v).map(|(&a, &b)| co * a + r * s * b / len).collect();
                Ok(self.project_point(&y))
            }
        }
    }

    /// Inverse of [`exp`](Self::exp) inside the injectivity radius.
    pub fn log(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        self.check_len(x)?;
        self.check_len(y)?;
        match self.kind {
            AmbientKind::Euclidean => Ok(sub(y, x)),
            AmbientKind::Sphere => {
                let r = self.radius;
                let xx = dot(x, x);
                let along = dot(x, y) / xx;
                let mut u = y.to_vec();
                axpy(-along, x, &mut u);
                let s = norm(&u);
                // atan2 of the sine and cosine parts is accurate at both ends
                let th = s.atan2(along * xx.sqrt());
                if s <= T::epsilon() * r * c(4.0) && along < T::zero() {
                    return Err(GeomError::BeyondInjectivity { distance: (T::PI() * r).as_f64(), limit: (T::PI() * r).as_f64() });
                }
                if s == T::zero() {
                    return Ok(vec![T::zero(); x.len()]);
                }
                Ok(scaled(r * th / s, &u))
            }
        }
    }

    /// Geodesic distance.
    pub fn distance(&self, x: &[T], y: &[T]) -> T {
        match self.kind {
            AmbientKind::Euclidean => norm(&sub(x, y)),
            AmbientKind::Sphere => {
                let r = self.radius;
                let xx = dot(x, x);
                let along = dot(x, y) / xx;
                let mut u = y.to_vec();
                axpy(-along, x, &mut u);
                r * norm(&u).atan2(along * xx.sqrt())
            }
        }
    }

    /// Parallel transport of `v ∈ T_x M` to `T_y M` along the minimizing
    /// geodesic.
    pub fn transport(&self, x: &[T], y: &[T], v: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        match self.kind {
            AmbientKind::Euclidean => {
                self.check_len(x)?;
                self.check_len(y)?;
                Ok(v.to_vec())
            }
            AmbientKind::Sphere => {
                let w = self.log(x, y)?;
                let len = norm(&w);
                if len == T::zero() {
                    return Ok(v.to_vec());
                }
                let th = len / self.radius;
                let u = scaled(T::one() / len, &w);
                let xhat = scaled(T::one() / norm(x), x);
                let a = dot(&u, v);
                let (s, co) = th.sin_cos();
                // rotate the (x̂, u) plane, fixing its complement
                Ok(v.iter()
                    .zip(&u)
                    .zip(&xhat)
                    .map(|((&vi, &ui), &xi)| vi - a * ui + a * (co * ui - s * xi))
                    .collect())
            }
        }
    }

    /// Transport every column of a subspace frame from `x` to `y`.
    pub fn transport_subspace(&self, x: &[T], y: &[T], f: &Subspace<T>) -> Result<Subspace<T>> {
        let cols = f
            .frame()
            .columns()
            .map(|col| self.transport(x, y, col))
            .collect::<Result<Vec<_>>>()?;
        make_subspace(&Matrix::from_columns(&cols))
    }
}

/// An ambient isometry `x ↦ A x + b` in embedding coordinates. On the sphere
/// `b` must vanish so the centre stays fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry<T> {
    pub linear: Matrix<T>,
    pub translation: Vec<T>,
}

impl<T: Real> Isometry<T> {
    pub fn identity(n: usize) -> Self {
        Self { linear: Matrix::identity(n), translation: vec![T::zero(); n] }
    }

    pub fn linear(a: Matrix<T>) -> Self {
        let n = a.rows();
        Self { linear: a, translation: vec![T::zero(); n] }
    }

    pub fn translation(b: Vec<T>) -> Self {
        Self { linear: Matrix::identity(b.len()), translation: b }
    }

    /// Rotation by `angle` in the oriented coordinate plane `(i, j)`.
    pub fn plane_rotation(n: usize, i: usize, j: usize, angle: T) -> Self {
        let mut a = Matrix::identity(n);
        let (s, co) = angle.sin_cos();
        a[(i, i)] = co;
        a[(j, j)] = co;
        a[(i, j)] = -s;
        a[(j, i)] = s;
        Self::linear(a)
    }

    /// Rotation by `angle` about a unit axis in `R^3` (Rodrigues).
    pub fn axis_rotation(axis: [T; 3], angle: T) -> Result<Self> {
        let len = norm(&axis);
        if !(len > T::zero()) {
            return Err(GeomError::InvalidIsometry("rotation axis is zero".into()));
        }
        let k = [axis[0] / len, axis[1] / len, axis[2] / len];
        let (s, co) = angle.sin_cos();
        let one_c = T::one() - co;
        let a = Matrix::from_fn(3, 3, |i, j| {
            let cross = match (i, j) {
                (0, 1) => -k[2],
                (0, 2) => k[1],
                (1, 0) => k[2],
                (1, 2) => -k[0],
                (2, 0) => -k[1],
                (2, 1) => k[0],
                _ => T::zero(),
            };
            let id = if i == j { co } else { T::zero() };
            id + s * cross + one_c * k[i] * k[j]
        });
        Ok(Self::linear(a))
    }

    /// Reflection through the hyperplane orthogonal to `normal`.
    pub fn reflection(normal: &[T]) -> Result<Self> {
        let len = norm(normal);
        if !(len > T::zero()) {
            return Err(GeomError::InvalidIsometry("reflection normal is zero".into()));
        }
        let n = normal.len();
        let two = c::<T>(2.0);
        let a = Matrix::from_fn(n, n, |i, j| {
            let id = if i == j { T::one() } else { T::zero() };
            id - two * normal[i] * normal[j] / (len * len)
        });
        Ok(Self::linear(a))
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply_point(&self, x: &[T]) -> Vec<T> {
        let mut y = self.linear.matvec(x);
        axpy(T::one(), &self.translation, &mut y);
        y
    }

    pub fn apply_vector(&self, v: &[T]) -> Vec<T> {
        self.linear.matvec(v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut b = self.linear.matvec(&other.translation);
        axpy(T::one(), &self.translation, &mut b);
        Self { linear: self.linear.matmul(&other.linear), translation: b }
    }

    /// Inverse, assuming the linear part is orthogonal.
    pub fn inverse(&self) -> Self {
        let at = self.linear.transpose();
        let b = scaled(-T::one(), &at.matvec(&self.translation));
        Self { linear: at, translation: b }
    }

    /// Largest entry of `AᵀA − I`.
    pub fn orthogonality_residual(&self) -> T {
        let n = self.linear.cols();
        self.linear.tr_matmul(&self.linear).sub(&Matrix::identity(n)).max_abs()
    }

    /// Check that this is an isometry of `space`.
    pub fn validate(&self, space: &AmbientSpace<T>) -> Result<()> {
        let n = space.coord_dim();
        if self.linear.rows() != n || self.linear.cols() != n || self.translation.len() != n {
            return Err(GeomError::InvalidIsometry(format!(
                "expected {n}x{n} linear part and length-{n} translation"
            )));
        }
        let resid = self.orthogonality_residual();
        if !(resid < c(MEMBERSHIP_TOLERANCE)) {
            return Err(GeomError::InvalidIsometry(format!("orthogonality residual {resid:e}")));
        }
        if space.is_sphere() && norm(&self.translation) > c(MEMBERSHIP_TOLERANCE) {
            return Err(GeomError::InvalidIsometry("sphere isometries must fix the centre".into()));
        }
        Ok(())
    }

    /// Whether two isometries agree entrywise within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.linear.sub(&other.linear).max_abs() <= tol
            && self.translation.iter().zip(&other.translation).all(|(a, b)| (*a - *b).abs() <= tol)
    }
}
