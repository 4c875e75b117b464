//! Averaging of nearby compact submanifolds of Euclidean space and round
//! spheres into a single center-of-mass submanifold, together with the
//! Grassmannian, tube and curvature machinery it rests on.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

pub mod ambient;
pub mod averaging;
pub mod error;
pub mod grassmann;
pub mod linalg;
pub mod scalar;
pub mod submanifold;

pub use ambient::{AmbientKind, AmbientSpace, Isometry};
pub use averaging::{
    AveragedSection, C1Distance, SectionSummary, SliceDiagnostics, SolverConfig, WeightedFamily,
};
pub use error::{GeomError, Result};
pub use grassmann::{AverageReport, CanonicalAngles, ProjectionMatrix, Subspace};
pub use linalg::Matrix;
pub use scalar::Real;
pub use submanifold::{
    Axis, FootpointResult, FourierMode, GentlenessReport, HessianBlocks, HessianReport, ParametricSubmanifold,
    Placement, Shape,
};

pub type Matrix64 = Matrix<f64>;
pub type Subspace64 = Subspace<f64>;
pub type ProjectionMatrix64 = ProjectionMatrix<f64>;
pub type AmbientSpace64 = AmbientSpace<f64>;
pub type Isometry64 = Isometry<f64>;
pub type Shape64 = Shape<f64>;
pub type Submanifold64 = ParametricSubmanifold<f64>;
pub type WeightedFamily64 = WeightedFamily<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type AveragedSection64 = AveragedSection<f64>;

pub type Subspace32 = Subspace<f32>;
pub type AmbientSpace32 = AmbientSpace<f32>;
pub type Submanifold32 = ParametricSubmanifold<f32>;
