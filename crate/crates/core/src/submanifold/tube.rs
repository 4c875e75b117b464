//! Tube machinery: the squared-distance potential, its gradient and
//! second covariant differential, the vertical (extended Gauss) and
//! quasi-vertical subspaces, and path retraction lengths.

use super::{FootpointResult, ParametricSubmanifold};
use crate::error::Result;
use crate::grassmann::{complement, make_subspace, Subspace};
use crate::linalg::{norm, scaled, svd, symmetric_eigen, Matrix};
use crate::scalar::{c, Real};

/// Base step of the finite-difference hessian (Richardson-extrapolated with
/// half this step).
pub const HESSIAN_STEP: f64 = 1e-4;

/// Step for finite differences of the normal exponential map.
const SLICE_STEP: f64 = 1e-5;

/// Second covariant differential of the potential at a point, in an
/// orthonormal frame of the ambient tangent space.
#[derive(Debug, Clone)]
pub struct HessianReport<T> {
    /// Frame of the ambient tangent space the matrix is written in.
    pub frame: Subspace<T>,
    /// Symmetrized matrix.
    pub matrix: Matrix<T>,
    /// Largest entry of the antisymmetric part before symmetrizing.
    pub asymmetry: T,
}

impl<T: Real> HessianReport<T> {
    /// `H(v, w)` for ambient coordinate vectors.
    pub fn bilinear(&self, v: &[T], w: &[T]) -> T {
        let a = self.frame.coordinates(v);
        let b = self.frame.coordinates(w);
        let hb = self.matrix.matvec(&b);
        a.iter().zip(&hb).fold(T::zero(), |s, (&x, &y)| s + x * y)
    }

    /// Operator norm.
    pub fn norm(&self) -> T {
        symmetric_eigen(&self.matrix).values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

/// Hessian split along the vertical subspace and its orthogonal complement.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianBlocks<T> {
    pub rho: T,
    pub vertical_min: T,
    pub vertical_max: T,
    pub horizontal_norm: T,
    pub cross_norm: T,
    pub full_norm: T,
    /// `H(U, U)` for the unit radial direction `U`; `None` on the submanifold.
    pub radial: Option<T>,
    pub asymmetry: T,
}

fn sym_norm<T: Real>(m: &Matrix<T>) -> T {
    if m.rows() == 0 {
        return T::zero();
    }
    symmetric_eigen(m).values.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
}

impl<T: Real> ParametricSubmanifold<T> {
    /// Half the squared distance to the submanifold.
    pub fn potential(&self, x: &[T]) -> Result<T> {
        let r = self.nearest_point(x)?.rho;
        Ok(r * r * c(0.5))
    }

    /// Gradient of the potential: `−log_x(foot)`.
    pub fn grad_potential(&self, x: &[T]) -> Result<Vec<T>> {
        let f = self.nearest_point(x)?;
        self.grad_from_foot(x, &f)
    }

    pub(crate) fn grad_from_foot(&self, x: &[T], f: &FootpointResult<T>) -> Result<Vec<T>> {
        let l = self.ambient().log(x, &f.foot)?;
        Ok(scaled(-T::one(), &l))
    }

    /// Normal space at the foot point, parallel transported to `x` along the
    /// minimizing geodesic.
    pub fn gauss_extended(&self, x: &[T]) -> Result<Subspace<T>> {
        let f = self.nearest_point(x)?;
        self.gauss_from_foot(x, &f)
    }

    pub(crate) fn gauss_from_foot(&self, x: &[T], f: &FootpointResult<T>) -> Result<Subspace<T>> {
        let nu = self.normal_space(&f.param)?;
        if f.rho == T::zero() {
            return Ok(nu);
        }
        self.ambient().transport_subspace(&f.foot, x, &nu)
    }

    /// Tangent space at `exp_p(w)` of the normal slice through the base
    /// point with parameter `u`, from central differences over an
    /// orthonormal normal frame.
    pub fn slice_tangent(&self, u: &[T], w: &[T]) -> Result<Subspace<T>> {
        let p = self.embed(u);
        let nu = self.normal_space(u)?;
        let h = c::<T>(SLICE_STEP) * (T::one() + norm(w));
        let amb = self.ambient();
        let cols = nu
            .frame()
            .columns()
            .map(|n| {
                let plus: Vec<T> = w.iter().zip(n).map(|(&a, &b)| a + h * b).collect();
                let minus: Vec<T> = w.iter().zip(n).map(|(&a, &b)| a - h * b).collect();
                let (xp, xm) = (amb.exp(&p, &plus)?, amb.exp(&p, &minus)?);
                Ok(xp.iter().zip(&xm).map(|(&a, &b)| (a - b) / (h + h)).collect())
            })
            .collect::<Result<Vec<Vec<T>>>>()?;
        make_subspace(&Matrix::from_columns(&cols))
    }

    /// Tangent space of the normal slice through `x`.
    pub fn quasi_vertical(&self, x: &[T]) -> Result<Subspace<T>> {
        let f = self.nearest_point(x)?;
        let w = self.ambient().log(&f.foot, x)?;
        // keep the offset exactly normal before differentiating
        let nu = self.normal_space(&f.param)?;
        let w = nu.project(&w);
        self.slice_tangent(&f.param, &w)
    }

    /// Central difference of the transported gradient along `v` with step `h`.
    fn grad_difference(&self, x: &[T], v: &[T], h: T) -> Result<Vec<T>> {
        let amb = self.ambient();
        let mut g = Vec::with_capacity(2);
        for s in [h, -h] {
            let y = amb.exp(x, &scaled(s, v))?;
            let gy = self.grad_potential(&y)?;
            g.push(amb.transport(&y, x, &gy)?);
        }
        Ok(g[0].iter().zip(&g[1]).map(|(&a, &b)| (a - b) / (h + h)).collect())
    }

    /// Second covariant differential of the potential at `x` by central
    /// differences of the transported gradient, one Richardson level.
    pub fn hessian_fd(&self, x: &[T]) -> Result<HessianReport<T>> {
        let amb = self.ambient();
        let frame = amb.tangent_space(x)?;
        let m = frame.dim();
        let h = c::<T>(HESSIAN_STEP);
        let mut raw = Matrix::zeros(m, m);
        for a in 0..m {
            let e = frame.frame().column(a).to_vec();
            let d1 = self.grad_difference(x, &e, h)?;
            let d2 = self.grad_difference(x, &e, h * c(0.5))?;
            let d: Vec<T> = d1.iter().zip(&d2).map(|(&p, &q)| (c::<T>(4.0) * q - p) / c(3.0)).collect();
            let col = frame.coordinates(&d);
            for b in 0..m {
                raw[(b, a)] = col[b];
            }
        }
        let asymmetry = raw.sub(&raw.transpose()).max_abs() * c(0.5);
        Ok(HessianReport { frame, matrix: raw.symmetrized(), asymmetry })
    }

    /// Vertical, horizontal and cross blocks of the hessian at `x`.
    pub fn hessian_blocks(&self, x: &[T]) -> Result<HessianBlocks<T>> {
        let f = self.nearest_point(x)?;
        let hess = self.hessian_fd(x)?;
        let vert = self.gauss_from_foot(x, &f)?;
        // vertical subspace in frame coordinates, and its complement there
        let vf = hess.frame.frame().tr_matmul(vert.frame());
        let vf = make_subspace(&vf)?;
        let hf = complement(&vf)?;
        let hm = &hess.matrix;
        let a = vf.frame().tr_matmul(&hm.matmul(vf.frame()));
        let b = hf.frame().tr_matmul(&hm.matmul(hf.frame()));
        let cross = vf.frame().tr_matmul(&hm.matmul(hf.frame()));
        let eig = symmetric_eigen(&a);
        let radial = if f.rho > T::zero() {
            let g = self.grad_from_foot(x, &f)?;
            let u = scaled(T::one() / norm(&g), &g);
            Some(hess.bilinear(&u, &u))
        } else {
            None
        };
        Ok(HessianBlocks {
            rho: f.rho,
            vertical_min: eig.values[0],
            vertical_max: *eig.values.last().unwrap_or(&T::zero()),
            horizontal_norm: sym_norm(&b),
            cross_norm: svd(&cross).singular_values.first().copied().unwrap_or_else(T::zero),
            full_norm: hess.norm(),
            radial,
            asymmetry: hess.asymmetry,
        })
    }

    /// Lengths of a sampled path and of its nearest-point retraction, both as
    /// sums of geodesic distances between consecutive samples.
    pub fn retraction_length(&self, path: &[Vec<T>]) -> Result<(T, T)> {
        let amb = self.ambient();
        let feet = path.iter().map(|x| self.retract(x)).collect::<Result<Vec<_>>>()?;
        let len = path.windows(2).map(|w| amb.distance(&w[0], &w[1])).sum();
        let proj = feet.windows(2).map(|w| amb.distance(&w[0], &w[1])).sum();
        Ok((proj, len))
    }
}
