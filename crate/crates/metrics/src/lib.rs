//! Builtin metrics and the two worked examples: closed-form curves of the
//! Randers metric on the unit disk and profile-reconstructed curves of a
//! Randers-Minkowski norm on R^3.

mod mink3;
mod numata;

pub use finsler_core::metrics::{builtin, MetricParams, ParamValue, METRIC_NAMES};
pub use mink3::{mink3_engine, mink3_profile, Mink3Profile, Mink3ProfileParams};
pub use numata::{numata_closed_form, numata_engine, numata_identity_audit, NumataAudit, NumataClosedFormParams};
