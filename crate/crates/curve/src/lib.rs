//! Covariant calculus along curves of a Finsler space, with the velocity as
//! reference vector: tension, covariant derivatives, bitension, Frenet
//! frames, energies and the first variation of the bienergy.

mod calculus;
mod energy;
mod frenet;
mod trajectory;

pub use calculus::{
    bitension, bitension_at, covariant_derivative_along, covariant_derivative_at, residual_2d, tension, BitensionReport,
};
pub use energy::{bienergy, bienergy_of, first_variation_check, Variation};
pub use frenet::{frenet_frame, gram_schmidt, FrenetFrame};
pub use trajectory::{CurveState, SampleDiagnostics, Trajectory};
