//! Numerical Finsler geometry: pointwise tensors of an arbitrary norm,
//! covariant calculus along curves, and integration of geodesic and
//! biharmonic curve equations.

pub mod backend;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod metrics;
pub mod norm;
pub mod numeric;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use geometry::{CurvatureData, Finsler, JetConfig, LocalGeometry, PointGeometry, TangentSample};
pub use jet::{Jet, JetSpace};
pub use metrics::{builtin, MetricParams, ParamValue};
pub use norm::{FinslerNorm, MetricSpec, NormExpr, Structure};
pub use scalar::Scalar;
pub use tensor::{Tensor3, Tensor4};
