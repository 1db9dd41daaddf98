//! Differentiation strategies that turn a norm into raw tensor components.
//!
//! Two backends are registered: `jet` (truncated Taylor arithmetic, exact up
//! to rounding) and `finite-difference` (nested sixth-order central
//! differences of plain `f64` evaluations). They share no differentiation
//! code, so agreement between them is a meaningful cross-check.

mod finite_difference;
mod jet;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use finite_difference::FiniteDifferenceBackend;
pub use jet::JetBackend;

use crate::error::{Error, Result};
use crate::norm::FinslerNorm;
use crate::tensor::{Tensor3, Tensor4};

/// How far down the tensor chain a query needs to go.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    Metric,
    Cartan,
    Connection,
    Curvature,
}

#[derive(Clone, Debug)]
pub struct RawConnection {
    /// `G^i`
    pub spray: DVector<f64>,
    /// `N^i_j = dG^i/dy^j`, stored `[(i, j)]`.
    pub nonlinear: DMatrix<f64>,
    /// `delta_k g_ij`, stored `[k][i][j]`.
    pub delta_g: Tensor3,
    /// `Gamma^i_jk`
    pub gamma: Tensor3,
}

#[derive(Clone, Debug)]
pub struct RawCurvature {
    /// `R^i_jk = delta_k N^i_j - delta_j N^i_k`
    pub r3: Tensor3,
    /// `P^i_jk`
    pub landsberg: Tensor3,
    /// `d C^i_jl / d y^k`, stored `[i][j][l][k]`.
    pub cartan_vertical: Tensor4,
}

#[derive(Clone, Debug)]
pub struct RawTensors {
    pub g: DMatrix<f64>,
    /// `C_ijk`, present from [`Depth::Cartan`].
    pub c_low: Option<Tensor3>,
    pub connection: Option<RawConnection>,
    pub curvature: Option<RawCurvature>,
}

/// Knobs a backend may consult.
#[derive(Clone, Copy, Debug)]
pub struct BackendOptions {
    pub fd_step: f64,
}

pub trait DifferentiationBackend: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Components at `(x, y)` down to `depth`. The caller has already
    /// validated the sample and checked positive definiteness of `g`.
    fn compute(
        &self,
        norm: &dyn FinslerNorm,
        x: &[f64],
        y: &[f64],
        depth: Depth,
        options: &BackendOptions,
    ) -> RawTensors;
}

/// Names accepted by [`backend_by_name`].
pub const BACKEND_NAMES: [&str; 2] = ["jet", "finite-difference"];

pub fn backend_by_name(name: &str) -> Result<Arc<dyn DifferentiationBackend>> {
    match name {
        "jet" => Ok(Arc::new(JetBackend)),
        "finite-difference" | "fd" => Ok(Arc::new(FiniteDifferenceBackend)),
        other => Err(Error::UnknownBackend(other.to_string())),
    }
}
