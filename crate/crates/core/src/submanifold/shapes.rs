//! Shape catalog. Every shape is an analytic map from a product of intervals
//! into a canonical coordinate space, with a closed-form jacobian.

use num_complex::Complex;

use crate::error::{GeomError, Result};
use crate::linalg::{norm, Matrix};
use crate::scalar::{c, Real};

/// One parameter axis of a shape's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub min: T,
    pub max: T,
    pub periodic: bool,
}

impl<T: Real> Axis<T> {
    pub fn periodic(min: T, max: T) -> Self {
        Self { min, max, periodic: true }
    }

    pub fn interval(min: T, max: T) -> Self {
        Self { min, max, periodic: false }
    }

    pub fn angle() -> Self {
        Self::periodic(T::zero(), T::TAU())
    }

    #[inline]
    pub fn length(&self) -> T {
        self.max - self.min
    }

    /// Mesh node `i` out of `res`.
    pub fn node(&self, i: usize, res: usize) -> T {
        let i = c::<T>(i as f64);
        if self.periodic {
            self.min + self.length() * i / c(res as f64)
        } else {
            self.min + self.length() * i / c((res - 1) as f64)
        }
    }

    /// Bring a parameter back into the domain: wrap when periodic, clamp
    /// otherwise.
    pub fn wrap(&self, u: T) -> T {
        if self.periodic {
            let l = self.length();
            let mut t = (u - self.min) % l;
            if t < T::zero() {
                t = t + l;
            }
            if t >= l {
                t = t - l;
            }
            self.min + t
        } else {
            u.max(self.min).min(self.max)
        }
    }

    /// Signed separation `v - u`, shortest way round on periodic axes.
    pub fn delta(&self, u: T, v: T) -> T {
        let d = v - u;
        if self.periodic {
            let l = self.length();
            d - l * (d / l).round()
        } else {
            d
        }
    }
}

/// A Fourier term `cos * cos(k u) + sin * sin(k u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode<T> {
    pub k: u32,
    pub cos: T,
    pub sin: T,
}

impl<T: Real> FourierMode<T> {
    pub fn new(k: u32, cos: T, sin: T) -> Self {
        Self { k, cos, sin }
    }

    fn amplitude(&self) -> T {
        self.cos.abs() + self.sin.abs()
    }
}

/// Value and first derivative of a Fourier series at `u`.
fn series<T: Real>(modes: &[FourierMode<T>], u: T) -> (T, T) {
    modes.iter().fold((T::zero(), T::zero()), |(v, d), m| {
        let k = c::<T>(m.k as f64);
        let (s, co) = (k * u).sin_cos();
        (v + m.cos * co + m.sin * s, d + k * (m.sin * co - m.cos * s))
    })
}

/// The built-in shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    /// Circle of the given radius in the first coordinate plane.
    Circle { radius: T },
    /// Axis-aligned ellipse with semi-axes `a` (first axis) and `b`.
    Ellipse { a: T, b: T },
    /// Circle with a Fourier-perturbed radius and, optionally, a Fourier
    /// height profile along the third axis.
    FourierCircle { radius: T, radial: Vec<FourierMode<T>>, height: Vec<FourierMode<T>> },
    /// Torus of revolution about the third axis.
    Torus { major: T, minor: T },
    /// Straight segment of the given length centred at the origin along the
    /// first axis; the only non-closed shape.
    Segment { length: T },
    /// Closed curve winding `turns` times around the tube of a torus.
    ToroidalCoil { major: T, minor: T, turns: u32 },
    /// Curve on the sphere of the given radius, written as a latitude graph
    /// `φ(u) = latitude + Σ modes` over the equator.
    SphereCurve { radius: T, latitude: T, modes: Vec<FourierMode<T>> },
    /// Interpolant of sampled points.
    Sampled(Interpolant<T>),
}

/// Names accepted by [`Shape::from_name`]-style front ends.
pub const CATALOG: &[&str] =
    &["circle", "ellipse", "fourier_circle", "torus", "segment", "toroidal_coil", "sphere_curve"];

impl<T: Real> Shape<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Ellipse { .. } => "ellipse",
            Shape::FourierCircle { .. } => "fourier_circle",
            Shape::Torus { .. } => "torus",
            Shape::Segment { .. } => "segment",
            Shape::ToroidalCoil { .. } => "toroidal_coil",
            Shape::SphereCurve { .. } => "sphere_curve",
            Shape::Sampled(_) => "sampled",
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            Shape::Torus { .. } => 2,
            Shape::Sampled(s) => s.axes.len(),
            _ => 1,
        }
    }

    /// Length of the canonical coordinate vectors.
    pub fn canonical_dim(&self) -> usize {
        match self {
            Shape::Circle { .. } | Shape::Ellipse { .. } | Shape::Segment { .. } => 2,
            Shape::FourierCircle { height, .. } => {
                if height.is_empty() {
                    2
                } else {
                    3
                }
            }
            Shape::Torus { .. } | Shape::ToroidalCoil { .. } | Shape::SphereCurve { .. } => 3,
            Shape::Sampled(s) => s.coord_dim,
        }
    }

    pub fn axes(&self) -> Vec<Axis<T>> {
        match self {
            Shape::Torus { .. } => vec![Axis::angle(), Axis::angle()],
            Shape::Segment { .. } => vec![Axis::interval(T::zero(), T::one())],
            Shape::Sampled(s) => s.axes.clone(),
            _ => vec![Axis::angle()],
        }
    }

    /// Radius of the sphere the canonical shape lies on, if any.
    pub fn sphere_radius(&self) -> Option<T> {
        match self {
            Shape::SphereCurve { radius, .. } => Some(*radius),
            Shape::Sampled(s) => s.sphere_radius,
            _ => None,
        }
    }

    /// Parameter sanity checks.
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(GeomError::InvalidShape(format!("{}: {name} = {v} must be positive", self.name())))
            }
        };
        match self {
            Shape::Circle { radius } => pos("radius", *radius),
            Shape::Ellipse { a, b } => pos("a", *a).and(pos("b", *b)),
            Shape::FourierCircle { radius, radial, height } => {
                pos("radius", *radius)?;
                let amp: T = radial.iter().map(FourierMode::amplitude).sum();
                if amp >= *radius {
                    return Err(GeomError::InvalidShape(
                        "fourier_circle: radial perturbation reaches the centre".into(),
                    ));
                }
                if radial.iter().chain(height).any(|m| !(m.cos.is_finite() && m.sin.is_finite())) {
                    return Err(GeomError::InvalidShape("fourier_circle: non-finite mode".into()));
                }
                Ok(())
            }
            Shape::Torus { major, minor } | Shape::ToroidalCoil { major, minor, .. } => {
                pos("major", *major)?;
                pos("minor", *minor)?;
                if minor >= major {
                    return Err(GeomError::InvalidShape(format!("{}: minor must be below major", self.name())));
                }
                if let Shape::ToroidalCoil { turns: 0, .. } = self {
                    return Err(GeomError::InvalidShape("toroidal_coil: turns must be at least 1".into()));
                }
                Ok(())
            }
            Shape::Segment { length } => pos("length", *length),
            Shape::SphereCurve { radius, latitude, modes } => {
                pos("radius", *radius)?;
                let amp: T = modes.iter().map(FourierMode::amplitude).sum();
                if latitude.abs() + amp >= T::FRAC_PI_2() {
                    return Err(GeomError::InvalidShape("sphere_curve: latitude reaches a pole".into()));
                }
                Ok(())
            }
            Shape::Sampled(_) => Ok(()),
        }
    }

    /// Point in canonical coordinates.
    pub fn eval(&self, u: &[T]) -> Vec<T> {
        match self {
            Shape::Circle { radius } => {
                let (s, co) = u[0].sin_cos();
                vec![*radius * co, *radius * s]
            }
            Shape::Ellipse { a, b } => {
                let (s, co) = u[0].sin_cos();
                vec![*a * co, *b * s]
            }
            Shape::FourierCircle { radius, radial, height } => {
                let (s, co) = u[0].sin_cos();
                let r = *radius + series(radial, u[0]).0;
                let mut p = vec![r * co, r * s];
                if !height.is_empty() {
                    p.push(series(height, u[0]).0);
                }
                p
            }
            Shape::Torus { major, minor } => {
                let (su, cu) = u[0].sin_cos();
                let (sv, cv) = u[1].sin_cos();
                let w = *major + *minor * cv;
                vec![w * cu, w * su, *minor * sv]
            }
            Shape::Segment { length } => vec![*length * (u[0] - c(0.5)), T::zero()],
            Shape::ToroidalCoil { major, minor, turns } => {
                let n = c::<T>(*turns as f64);
                let (su, cu) = u[0].sin_cos();
                let (sv, cv) = (n * u[0]).sin_cos();
                let w = *major + *minor * cv;
                vec![w * cu, w * su, *minor * sv]
            }
            Shape::SphereCurve { radius, latitude, modes } => {
                let phi = *latitude + series(modes, u[0]).0;
                let (sp, cp) = phi.sin_cos();
                let (su, cu) = u[0].sin_cos();
                vec![*radius * cp * cu, *radius * cp * su, *radius * sp]
            }
            Shape::Sampled(s) => s.eval(u),
        }
    }

    /// Jacobian in canonical coordinates, `canonical_dim x param_dim`.
    pub fn jacobian(&self, u: &[T]) -> Matrix<T> {
        match self {
            Shape::Circle { radius } => {
                let (s, co) = u[0].sin_cos();
                Matrix::from_columns(&[vec![-*radius * s, *radius * co]])
            }
            Shape::Ellipse { a, b } => {
                let (s, co) = u[0].sin_cos();
                Matrix::from_columns(&[vec![-*a * s, *b * co]])
            }
            Shape::FourierCircle { radius, radial, height } => {
                let (s, co) = u[0].sin_cos();
                let (dr, ddr) = series(radial, u[0]);
                let r = *radius + dr;
                let mut col = vec![ddr * co - r * s, ddr * s + r * co];
                if !height.is_empty() {
                    col.push(series(height, u[0]).1);
                }
                Matrix::from_columns(&[col])
            }
            Shape::Torus { major, minor } => {
                let (su, cu) = u[0].sin_cos();
                let (sv, cv) = u[1].sin_cos();
                let w = *major + *minor * cv;
                Matrix::from_columns(&[
                    vec![-w * su, w * cu, T::zero()],
                    vec![-*minor * sv * cu, -*minor * sv * su, *minor * cv],
                ])
            }
            Shape::Segment { length } => Matrix::from_columns(&[vec![*length, T::zero()]]),
            Shape::ToroidalCoil { major, minor, turns } => {
                let n = c::<T>(*turns as f64);
                let (su, cu) = u[0].sin_cos();
                let (sv, cv) = (n * u[0]).sin_cos();
                let w = *major + *minor * cv;
                let dw = -*minor * n * sv;
                Matrix::from_columns(&[vec![dw * cu - w * su, dw * su + w * cu, *minor * n * cv]])
            }
            Shape::SphereCurve { radius, latitude, modes } => {
                let (dphi, ddphi) = series(modes, u[0]);
                let (sp, cp) = (*latitude + dphi).sin_cos();
                let (su, cu) = u[0].sin_cos();
                let r = *radius;
                Matrix::from_columns(&[vec![
                    r * (-sp * ddphi * cu - cp * su),
                    r * (-sp * ddphi * su + cp * cu),
                    r * cp * ddphi,
                ]])
            }
            Shape::Sampled(s) => s.jacobian(u),
        }
    }
}

/// Per-axis interpolation basis.
#[derive(Debug, Clone, PartialEq)]
enum Basis<T> {
    /// Trigonometric interpolation: complex coefficients for one or two
    /// periodic axes, stored per coordinate in row-major `(k1, k2)` order.
    Trig { coeffs: Vec<Vec<Complex<T>>>, freqs: Vec<Vec<(i64, T)>> },
    /// Natural cubic spline along one non-periodic axis.
    Spline { values: Vec<Vec<T>>, second: Vec<Vec<T>> },
}

/// Smooth interpolant through a grid of sampled points: trigonometric on
/// periodic axes (one or two), a natural cubic spline on a single
/// non-periodic axis. Optionally projected radially onto a sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant<T> {
    axes: Vec<Axis<T>>,
    res: Vec<usize>,
    coord_dim: usize,
    sphere_radius: Option<T>,
    basis: Basis<T>,
}

/// Frequencies of an `n`-point trigonometric interpolant, with the weight
/// each carries (the Nyquist frequency is split between `±n/2`).
fn trig_freqs<T: Real>(n: usize) -> Vec<(i64, T)> {
    let n = n as i64;
    let mut out = Vec::with_capacity(n as usize + 1);
    for k in -(n / 2)..=(n / 2) {
        let w = if n % 2 == 0 && k.abs() == n / 2 { c(0.5) } else { T::one() };
        out.push((k, w));
    }
    out
}

fn dft_1d<T: Real>(samples: &[Complex<T>], freqs: &[(i64, T)]) -> Vec<Complex<T>> {
    let n = samples.len();
    let tau = T::TAU();
    freqs
        .iter()
        .map(|&(k, w)| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, &x) in samples.iter().enumerate() {
                let ang = -tau * c::<T>((k * j as i64).rem_euclid(n as i64) as f64) / c(n as f64);
                acc = acc + x * Complex::new(ang.cos(), ang.sin());
            }
            acc * (w / c(n as f64))
        })
        .collect()
}

impl<T: Real> Interpolant<T> {
    /// Build from grid samples. `points[i]` belongs to mesh vertex `i`, with
    /// the first axis varying fastest.
    pub fn from_samples(
        axes: Vec<Axis<T>>,
        res: Vec<usize>,
        points: &[Vec<T>],
        sphere_radius: Option<T>,
    ) -> Result<Self> {
        if axes.len() != res.len() || axes.is_empty() {
            return Err(GeomError::InvalidShape("sampled: axes and resolution disagree".into()));
        }
        let total: usize = res.iter().product();
        if points.len() != total {
            return Err(GeomError::DimensionMismatch { expected: total, found: points.len() });
        }
        let coord_dim = points[0].len();
        if points.iter().any(|p| p.len() != coord_dim) {
            return Err(GeomError::InvalidShape("sampled: ragged points".into()));
        }
        let all_periodic = axes.iter().all(|a| a.periodic);
        let basis = if all_periodic && axes.len() <= 2 {
            let freqs: Vec<Vec<(i64, T)>> = res.iter().map(|&n| trig_freqs(n)).collect();
            let coeffs = (0..coord_dim)
                .map(|d| {
                    if axes.len() == 1 {
                        let s: Vec<Complex<T>> = points.iter().map(|p| Complex::new(p[d], T::zero())).collect();
                        dft_1d(&s, &freqs[0])
                    } else {
                        let (n1, n2) = (res[0], res[1]);
                        // transform along the first axis for every row of the second
                        let rows: Vec<Vec<Complex<T>>> = (0..n2)
                            .map(|j| {
                                let s: Vec<Complex<T>> =
                                    (0..n1).map(|i| Complex::new(points[i + n1 * j][d], T::zero())).collect();
                                dft_1d(&s, &freqs[0])
                            })
                            .collect();
                        let m1 = freqs[0].len();
                        let m2 = freqs[1].len();
                        let mut out = vec![Complex::new(T::zero(), T::zero()); m1 * m2];
                        for a in 0..m1 {
                            let s: Vec<Complex<T>> = rows.iter().map(|r| r[a]).collect();
                            for (b, v) in dft_1d(&s, &freqs[1]).into_iter().enumerate() {
                                out[a * m2 + b] = v;
                            }
                        }
                        out
                    }
                })
                .collect();
            Basis::Trig { coeffs, freqs }
        } else if axes.len() == 1 && !axes[0].periodic {
            if res[0] < 2 {
                return Err(GeomError::InvalidShape("sampled: need at least two nodes".into()));
            }
            let values: Vec<Vec<T>> = (0..coord_dim).map(|d| points.iter().map(|p| p[d]).collect()).collect();
            let h = axes[0].length() / c((res[0] - 1) as f64);
            let second = values.iter().map(|v| natural_spline_second(v, h)).collect();
            Basis::Spline { values, second }
        } else {
            return Err(GeomError::Unsupported(
                "sampled interpolation needs one or two periodic axes, or a single interval axis".into(),
            ));
        };
        Ok(Self { axes, res, coord_dim, sphere_radius, basis })
    }

    fn raw(&self, u: &[T]) -> (Vec<T>, Matrix<T>) {
        let d = self.axes.len();
        let mut val = vec![T::zero(); self.coord_dim];
        let mut jac = Matrix::zeros(self.coord_dim, d);
        match &self.basis {
            Basis::Trig { coeffs, freqs } => {
                // phase factors e^{i k t} per axis, t scaled to [0, 2π)
                let scale: Vec<T> = self.axes.iter().map(|a| T::TAU() / a.length()).collect();
                let phases: Vec<Vec<Complex<T>>> = (0..d)
                    .map(|a| {
                        let t = (u[a] - self.axes[a].min) * scale[a];
                        freqs[a]
                            .iter()
                            .map(|&(k, _)| {
                                let ang = c::<T>(k as f64) * t;
                                Complex::new(ang.cos(), ang.sin())
                            })
                            .collect()
                    })
                    .collect();
                for (dim, cf) in coeffs.iter().enumerate() {
                    let mut v = T::zero();
                    let mut g = [T::zero(); 2];
                    if d == 1 {
                        for ((&(k, _), ph), co) in freqs[0].iter().zip(&phases[0]).zip(cf) {
                            let z = *co * *ph;
                            v = v + z.re;
                            g[0] = g[0] - c::<T>(k as f64) * z.im;
                        }
                    } else {
                        let m2 = freqs[1].len();
                        for (a, (&(k1, _), p1)) in freqs[0].iter().zip(&phases[0]).enumerate() {
                            for (b, (&(k2, _), p2)) in freqs[1].iter().zip(&phases[1]).enumerate() {
                                let z = cf[a * m2 + b] * *p1 * *p2;
                                v = v + z.re;
                                g[0] = g[0] - c::<T>(k1 as f64) * z.im;
                                g[1] = g[1] - c::<T>(k2 as f64) * z.im;
                            }
                        }
                    }
                    val[dim] = v;
                    for a in 0..d {
                        jac[(dim, a)] = g[a] * scale[a];
                    }
                }
            }
            Basis::Spline { values, second } => {
                let ax = &self.axes[0];
                let n = self.res[0];
                let h = ax.length() / c((n - 1) as f64);
                let x = ax.wrap(u[0]);
                let pos = ((x - ax.min) / h).floor().to_usize().unwrap_or(0).min(n - 2);
                let xl = ax.min + h * c(pos as f64);
                let a = (xl + h - x) / h;
                let b = T::one() - a;
                let six = c::<T>(6.0);
                for dim in 0..self.coord_dim {
                    let (y0, y1) = (values[dim][pos], values[dim][pos + 1]);
                    let (m0, m1) = (second[dim][pos], second[dim][pos + 1]);
                    val[dim] = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
                    jac[(dim, 0)] = (y1 - y0) / h
                        - (c::<T>(3.0) * a * a - T::one()) * h * m0 / six
                        + (c::<T>(3.0) * b * b - T::one()) * h * m1 / six;
                }
            }
        }
        (val, jac)
    }

    pub fn eval(&self, u: &[T]) -> Vec<T> {
        let (v, _) = self.raw(u);
        match self.sphere_radius {
            None => v,
            Some(r) => {
                let s = r / norm(&v);
                v.iter().map(|&x| x * s).collect()
            }
        }
    }

    pub fn jacobian(&self, u: &[T]) -> Matrix<T> {
        let (v, j) = self.raw(u);
        match self.sphere_radius {
            None => j,
            Some(r) => {
                // d(r q/|q|) = r/|q| (I - q̂ q̂ᵀ) dq
                let len = norm(&v);
                let qh: Vec<T> = v.iter().map(|&x| x / len).collect();
                let mut out = j.clone();
                for col in 0..j.cols() {
                    let dq = j.column(col);
                    let along = qh.iter().zip(dq).fold(T::zero(), |s, (&a, &b)| s + a * b);
                    for (o, (&dqi, &qi)) in out.column_mut(col).iter_mut().zip(dq.iter().zip(&qh)) {
                        *o = r / len * (dqi - along * qi);
                    }
                }
                out
            }
        }
    }

    pub fn resolution(&self) -> &[usize] {
        &self.res
    }
}

/// Second derivatives of the natural cubic spline through equally spaced
/// values (Thomas algorithm).
fn natural_spline_second<T: Real>(y: &[T], h: T) -> Vec<T> {
    let n = y.len();
    let mut m = vec![T::zero(); n];
    if n < 3 {
        return m;
    }
    let six = c::<T>(6.0);
    let four = c::<T>(4.0);
    // interior equations: m[i-1] + 4 m[i] + m[i+1] = 6 (y[i+1] - 2y[i] + y[i-1]) / h²
    let k = n - 2;
    let mut diag = vec![four; k];
    let mut rhs: Vec<T> = (1..n - 1).map(|i| six * (y[i + 1] - c::<T>(2.0) * y[i] + y[i - 1]) / (h * h)).collect();
    for i in 1..k {
        let f = T::one() / diag[i - 1];
        diag[i] = diag[i] - f;
        rhs[i] = rhs[i] - f * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for i in (0..k - 1).rev() {
        m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
    }
    m
}
