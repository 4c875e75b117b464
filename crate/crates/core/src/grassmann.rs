//! Grassmannian geometry: subspaces as orthonormal frames, canonical angles,
//! the max-angle (Finsler) distance, graphs over a subspace, complements,
//! and averaging of subspaces through their orthogonal projections followed
//! by spectral rounding at 1/2.

use crate::error::{GeomError, Result};
use crate::linalg::{dot, orthonormalize_columns, svd, symmetric_eigen, Matrix};
use crate::scalar::{c, Real};

/// Relative rank threshold used by [`make_subspace`].
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Minimum distance of every eigenvalue of an averaged projection from 1/2
/// for the spectral rounding to be accepted.
pub const SPECTRAL_GAP_THRESHOLD: f64 = 0.05;

/// Tolerance on the weight sum.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A `k`-dimensional linear subspace of `R^n`, stored as an `n x k`
/// orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T> {
    frame: Matrix<T>,
}

impl<T: Real> Subspace<T> {
    /// Wrap a frame that is already orthonormal. Used internally where the
    /// columns come out of an orthogonal factorization.
    pub(crate) fn from_orthonormal(frame: Matrix<T>) -> Self {
        debug_assert!(frame.cols() >= 1 && frame.cols() <= frame.rows());
        Self { frame }
    }

    /// The subspace spanned by the given columns; see [`make_subspace`].
    pub fn span(vectors: &Matrix<T>) -> Result<Self> {
        make_subspace(vectors)
    }

    /// Span of a list of vectors.
    pub fn span_vectors(vectors: &[Vec<T>]) -> Result<Self> {
        make_subspace(&Matrix::from_columns(vectors))
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.frame.rows()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    #[inline]
    pub fn frame(&self) -> &Matrix<T> {
        &self.frame
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &[T]) -> Vec<T> {
        self.frame.matvec(&self.frame.tr_matvec(v))
    }

    /// Coordinates of `v` in the frame.
    pub fn coordinates(&self, v: &[T]) -> Vec<T> {
        self.frame.tr_matvec(v)
    }

    /// Image under a linear map, typically an orthogonal one.
    pub fn transformed(&self, g: &Matrix<T>) -> Result<Self> {
        if g.cols() != self.ambient_dim() {
            return Err(GeomError::DimensionMismatch { expected: self.ambient_dim(), found: g.cols() });
        }
        make_subspace(&g.matmul(&self.frame))
    }

    /// Largest entry of `frameᵀ frame - I`.
    pub fn orthonormality_residual(&self) -> T {
        self.frame.tr_matmul(&self.frame).sub(&Matrix::identity(self.dim())).max_abs()
    }
}

/// Orthonormalize spanning columns into a [`Subspace`].
///
/// The rank test is `σ_min > 1e-8 · σ_max`. The first frame vector is the
/// normalized first column.
pub fn make_subspace<T: Real>(vectors: &Matrix<T>) -> Result<Subspace<T>> {
    let (n, k) = (vectors.rows(), vectors.cols());
    if k == 0 || k > n {
        return Err(GeomError::DimensionMismatch { expected: n.max(1), found: k });
    }
    let s = svd(vectors).singular_values;
    let (largest, smallest) = (s[0], s[k - 1]);
    if !(largest > T::zero()) || !(smallest > c::<T>(RANK_TOLERANCE) * largest) {
        return Err(GeomError::RankDeficient { smallest: smallest.as_f64(), largest: largest.as_f64() });
    }
    Ok(Subspace { frame: orthonormalize_columns(vectors) })
}

/// Orthogonal projection matrix, or an average of such (an almost-projection).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix<T> {
    matrix: Matrix<T>,
}

impl<T: Real> ProjectionMatrix<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    /// Largest entry of `P² - P`.
    pub fn idempotence_residual(&self) -> T {
        self.matrix.matmul(&self.matrix).sub(&self.matrix).max_abs()
    }

    /// Operator norm of the difference, through the symmetric eigenvalues of
    /// `P - P'`.
    pub fn distance_op(&self, other: &Self) -> T {
        let d = self.matrix.sub(&other.matrix);
        symmetric_eigen(&d).values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Weighted sum of projections. Weights are not validated here.
    pub fn weighted_sum(items: &[(T, &ProjectionMatrix<T>)]) -> Self {
        let n = items.first().map_or(0, |(_, p)| p.dim());
        let mut acc = Matrix::zeros(n, n);
        for (w, p) in items {
            acc = acc.add(&p.matrix.scale(*w));
        }
        Self { matrix: acc }
    }
}

/// `frame · frameᵀ`.
pub fn projection<T: Real>(f: &Subspace<T>) -> ProjectionMatrix<T> {
    let fr = f.frame();
    ProjectionMatrix { matrix: fr.matmul(&fr.transpose()) }
}

/// Canonical angles, sorted descending, each in `[0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalAngles<T> {
    pub angles: Vec<T>,
}

impl<T: Real> CanonicalAngles<T> {
    /// Largest angle, zero for an empty list.
    pub fn largest(&self) -> T {
        self.angles.first().copied().unwrap_or_else(T::zero)
    }
}

fn check_same_shape<T: Real>(a: &Subspace<T>, b: &Subspace<T>) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(GeomError::DimensionMismatch { expected: a.ambient_dim(), found: b.ambient_dim() });
    }
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// Canonical angles between two subspaces of equal dimension.
///
/// Large angles come from the arccos of the singular values of `Fᵀ F2`;
/// angles below π/4 are recomputed from the singular values of
/// `(I - P_F) F2`, which keeps full relative accuracy near zero.
pub fn canonical_angles<T: Real>(f: &Subspace<T>, f2: &Subspace<T>) -> Result<CanonicalAngles<T>> {
    check_same_shape(f, f2)?;
    let k = f.dim();
    let cross = f.frame().tr_matmul(f2.frame());
    let cosines = svd(&cross).singular_values; // descending
    // residual of F2 after removing its F component
    let resid = f2.frame().sub(&f.frame().matmul(&cross));
    let sines = svd(&resid).singular_values; // descending
    let quarter = T::FRAC_PI_4();
    let mut angles: Vec<T> = (0..k)
        .map(|j| {
            let from_cos = cosines[k - 1 - j].min(T::one()).max(T::zero()).acos();
            if from_cos < quarter {
                sines[j].min(T::one()).asin()
            } else {
                from_cos
            }
        })
        .collect();
    angles.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(CanonicalAngles { angles })
}

/// Largest canonical angle; a metric on the Grassmannian with
/// `‖P_F − P_F2‖ = sin d`.
pub fn finsler_distance<T: Real>(f: &Subspace<T>, f2: &Subspace<T>) -> Result<T> {
    Ok(canonical_angles(f, f2)?.largest())
}

/// Graph `{x + u(x) : x ∈ F}` of a linear map `u : F → F⊥`.
///
/// `u` is an `(n-k) x k` matrix in the frames of `F` and of
/// [`complement`]`(F)`.
pub fn graph_subspace<T: Real>(f: &Subspace<T>, u: &Matrix<T>) -> Result<Subspace<T>> {
    let (n, k) = (f.ambient_dim(), f.dim());
    if u.rows() != n - k || u.cols() != k {
        return Err(GeomError::DimensionMismatch { expected: (n - k) * k, found: u.rows() * u.cols() });
    }
    if k == n {
        return Ok(f.clone());
    }
    let perp = complement(f)?;
    let cols = f.frame().add(&perp.frame().matmul(u));
    Ok(Subspace { frame: orthonormalize_columns(&cols) })
}

/// Orthogonal complement, from the eigenvectors of `I − P_F` above 1/2.
pub fn complement<T: Real>(f: &Subspace<T>) -> Result<Subspace<T>> {
    let (n, k) = (f.ambient_dim(), f.dim());
    if k == n {
        return Err(GeomError::FullSpace);
    }
    let q = Matrix::identity(n).sub(projection(f).matrix());
    let eig = symmetric_eigen(&q);
    // ascending: the last n-k eigenvalues are the ones near 1
    let cols: Vec<Vec<T>> = (k..n).rev().map(|j| eig.vectors.column(j).to_vec()).collect();
    Ok(Subspace { frame: orthonormalize_columns(&Matrix::from_columns(&cols)) })
}

/// Outcome of [`average_subspaces`].
#[derive(Debug, Clone, PartialEq)]
pub struct AverageReport<T> {
    pub result: Subspace<T>,
    /// Distance of the closest eigenvalue of the averaged projection to 1/2.
    pub spectral_gap: T,
    /// Largest distance from a member to the result.
    pub max_member_distance: T,
}

/// Check weights: at least one, all positive and finite, summing to 1.
pub fn validate_weights<T: Real>(weights: &[T]) -> Result<()> {
    if weights.is_empty() {
        return Err(GeomError::WeightError("empty family".into()));
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > T::zero())) {
        return Err(GeomError::WeightError(format!("weight {i} = {w} is not positive")));
    }
    let sum: T = weights.iter().copied().sum();
    let tol = T::tol(WEIGHT_SUM_TOLERANCE, 4.0 * weights.len() as f64);
    if (sum - T::one()).abs() > tol {
        return Err(GeomError::WeightError(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Weighted average of subspaces with the default gap threshold.
pub fn average_subspaces<T: Real>(members: &[(T, Subspace<T>)]) -> Result<AverageReport<T>> {
    average_subspaces_with_gap(members, c(SPECTRAL_GAP_THRESHOLD))
}

/// Weighted average of subspaces: average the projections, then keep the
/// eigenvectors whose eigenvalue exceeds 1/2.
pub fn average_subspaces_with_gap<T: Real>(members: &[(T, Subspace<T>)], gap_threshold: T) -> Result<AverageReport<T>> {
    let weights: Vec<T> = members.iter().map(|(w, _)| *w).collect();
    validate_weights(&weights)?;
    let first = &members[0].1;
    for (_, s) in &members[1..] {
        check_same_shape(first, s)?;
    }
    let (n, k) = (first.ambient_dim(), first.dim());
    let projs: Vec<ProjectionMatrix<T>> = members.iter().map(|(_, s)| projection(s)).collect();
    let items: Vec<(T, &ProjectionMatrix<T>)> = weights.iter().copied().zip(projs.iter()).collect();
    let avg = ProjectionMatrix::weighted_sum(&items);
    let eig = symmetric_eigen(avg.matrix());
    let half = c::<T>(0.5);
    let gap = eig.values.iter().fold(T::infinity(), |g, &v| g.min((v - half).abs()));
    let above = eig.values.iter().filter(|&&v| v > half).count();
    if above != k || gap < gap_threshold {
        return Err(GeomError::SpectralGapTooSmall { gap: gap.as_f64(), threshold: gap_threshold.as_f64() });
    }
    let cols: Vec<Vec<T>> = (n - k..n).rev().map(|j| eig.vectors.column(j).to_vec()).collect();
    let result = Subspace { frame: orthonormalize_columns(&Matrix::from_columns(&cols)) };
    let mut max_member_distance = T::zero();
    for (_, s) in members {
        max_member_distance = max_member_distance.max(finsler_distance(s, &result)?);
    }
    Ok(AverageReport { result, spectral_gap: gap, max_member_distance })
}

/// Largest pairwise distance within a list of subspaces.
pub fn max_pairwise_distance<T: Real>(subspaces: &[&Subspace<T>]) -> Result<T> {
    let mut eps = T::zero();
    for i in 0..subspaces.len() {
        for j in (i + 1)..subspaces.len() {
            eps = eps.max(finsler_distance(subspaces[i], subspaces[j])?);
        }
    }
    Ok(eps)
}

/// Forward step used by [`average_derivative_check`].
pub const DERIVATIVE_STEP: f64 = 1e-5;

/// Compare the speed of the average of a one-parameter family of weighted
/// subspace lists with eight times the fastest member speed, both measured by
/// forward differences of the distance at `mu0`.
///
/// Returns `(lhs, rhs)`. Members at `mu0` must lie within 1/4 of each other.
pub fn average_derivative_check<T, F>(family: F, mu0: T) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> Vec<(T, Subspace<T>)>,
{
    let h = c::<T>(DERIVATIVE_STEP);
    let at0 = family(mu0);
    let at1 = family(mu0 + h);
    if at0.len() != at1.len() {
        return Err(GeomError::DimensionMismatch { expected: at0.len(), found: at1.len() });
    }
    let refs: Vec<&Subspace<T>> = at0.iter().map(|(_, s)| s).collect();
    let eps = max_pairwise_distance(&refs)?;
    if eps >= c(0.25) {
        return Err(GeomError::EpsilonTooLarge { epsilon: eps.as_f64(), limit: 0.25 });
    }
    let a0 = average_subspaces(&at0)?;
    let a1 = average_subspaces(&at1)?;
    let lhs = finsler_distance(&a0.result, &a1.result)? / h;
    let mut fastest = T::zero();
    for ((_, s0), (_, s1)) in at0.iter().zip(&at1) {
        fastest = fastest.max(finsler_distance(s0, s1)? / h);
    }
    Ok((lhs, c::<T>(8.0) * fastest))
}

/// Norm of the orthogonal projection of `v` onto the subspace.
pub fn projection_length<T: Real>(f: &Subspace<T>, v: &[T]) -> T {
    let coords = f.coordinates(v);
    dot(&coords, &coords).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn line(angle: f64) -> Subspace<f64> {
        Subspace::span_vectors(&[vec![angle.cos(), angle.sin()]]).unwrap()
    }

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn make_subspace_examples() {
        let id = Subspace::span_vectors(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(id.frame(), &Matrix::identity(2));
        let s = Subspace::span_vectors(&[vec![2.0, 0.0, 0.0]]).unwrap();
        assert_eq!(s.frame().column(0), &[1.0, 0.0, 0.0]);
        let bad = Subspace::span_vectors(&[vec![1.0, 0.0], vec![1.0, 1e-12]]);
        assert!(matches!(bad, Err(GeomError::RankDeficient { .. })));
    }

    #[test]
    fn projection_examples() {
        let p = projection(&line(0.0));
        assert_eq!(p.matrix(), &Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]));
        let p = projection(&line(FRAC_PI_4));
        assert!(p.matrix().sub(&Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]])).max_abs() < 1e-15);
        assert!(p.idempotence_residual() < 1e-15);
        assert!((p.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_angle_examples() {
        let a = canonical_angles(&line(0.0), &line(0.3)).unwrap();
        assert!((a.angles[0] - 0.3).abs() < 1e-15);
        assert!(canonical_angles(&line(0.7), &line(0.7)).unwrap().angles[0] < 1e-15);
        let f = Subspace::span_vectors(&[e(4, 0), e(4, 1)]).unwrap();
        let g = Subspace::span_vectors(&[e(4, 0), e(4, 2)]).unwrap();
        let a = canonical_angles(&f, &g).unwrap();
        assert!((a.angles[0] - FRAC_PI_2).abs() < 1e-15 && a.angles[1].abs() < 1e-15);
        let h = Subspace::span_vectors(&[e(3, 0)]).unwrap();
        assert!(matches!(canonical_angles(&f, &h), Err(GeomError::DimensionMismatch { .. })));
    }

    #[test]
    fn tiny_angles_keep_relative_accuracy() {
        let t = 1e-9;
        let d = finsler_distance(&line(0.0), &line(t)).unwrap();
        assert!(((d - t) / t).abs() < 1e-6);
    }

    #[test]
    fn graph_examples() {
        let f = line(0.0);
        let z = graph_subspace(&f, &Matrix::zeros(1, 1)).unwrap();
        assert_eq!(finsler_distance(&f, &z).unwrap(), 0.0);
        let g = graph_subspace(&f, &Matrix::from_rows(&[vec![1.0]])).unwrap();
        let d = finsler_distance(&f, &g).unwrap();
        assert!((d - FRAC_PI_4).abs() < 1e-15);
        assert!(g.frame()[(1, 0)].abs() > 0.7);
    }

    #[test]
    fn complement_examples() {
        let f = Subspace::span_vectors(&[e(3, 0)]).unwrap();
        let p = complement(&f).unwrap();
        assert_eq!(p.dim(), 2);
        let expected = Subspace::span_vectors(&[e(3, 1), e(3, 2)]).unwrap();
        assert!(finsler_distance(&p, &expected).unwrap() < 1e-15);
        let back = complement(&p).unwrap();
        assert!(finsler_distance(&back, &f).unwrap() < 1e-15);
        let full = Subspace::span_vectors(&[e(2, 0), e(2, 1)]).unwrap();
        assert_eq!(complement(&full), Err(GeomError::FullSpace));
    }

    #[test]
    fn average_examples() {
        let one = average_subspaces(&[(1.0, line(0.4))]).unwrap();
        assert!(finsler_distance(&one.result, &line(0.4)).unwrap() < 1e-15);
        assert!((one.spectral_gap - 0.5).abs() < 1e-15);

        let t = 0.2;
        let avg = average_subspaces(&[(0.5, line(0.0)), (0.5, line(t))]).unwrap();
        assert!(finsler_distance(&avg.result, &line(t / 2.0)).unwrap() < 1e-14);
        assert!((avg.max_member_distance - t / 2.0).abs() < 1e-14);

        let err = average_subspaces(&[(0.5, line(0.0)), (0.5, line(FRAC_PI_2))]);
        assert!(matches!(err, Err(GeomError::SpectralGapTooSmall { .. })));
    }

    #[test]
    fn average_rejects_bad_weights() {
        let r = average_subspaces(&[(0.5, line(0.0)), (0.4, line(0.1))]);
        assert!(matches!(r, Err(GeomError::WeightError(_))));
        let r = average_subspaces(&[(1.5, line(0.0)), (-0.5, line(0.1))]);
        assert!(matches!(r, Err(GeomError::WeightError(_))));
        assert!(matches!(average_subspaces::<f64>(&[]), Err(GeomError::WeightError(_))));
        let plane = Subspace::span_vectors(&[e(3, 0), e(3, 1)]).unwrap();
        let r = average_subspaces(&[(0.5, line(0.0)), (0.5, plane)]);
        assert!(matches!(r, Err(GeomError::DimensionMismatch { .. })));
    }

    #[test]
    fn derivative_check_examples() {
        let (lhs, _) = average_derivative_check(|_| vec![(1.0, line(0.1))], 0.0).unwrap();
        assert!(lhs < 1e-9);
        let (lhs, rhs) = average_derivative_check(|mu| vec![(1.0, line(0.3 * mu))], 0.2).unwrap();
        assert!((lhs - 0.3).abs() < 1e-6 && (rhs - 2.4).abs() < 1e-5);
        let (lhs, rhs) =
            average_derivative_check(|mu| vec![(0.5, line(0.0)), (0.5, line(0.1 + mu))], 0.0).unwrap();
        assert!(lhs <= rhs + 1e-4);
        assert!((lhs - 0.5).abs() < 1e-5);
    }
}
