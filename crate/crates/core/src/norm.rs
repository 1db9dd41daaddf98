//! Finsler norms and the [`MetricSpec`] handle every computation starts from.

use std::fmt;
use std::sync::Arc;

use crate::jet::Jet;
use crate::scalar::Scalar;

/// Structural hint a norm may report about its natural chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    General,
    /// `g` independent of `y`.
    Riemannian,
    /// `g` independent of `x` in this chart.
    LocallyMinkowski,
}

/// A Finsler norm written once against a generic [`Scalar`].
///
/// Implementors get [`FinslerNorm`] for free, which is the object-safe form
/// used everywhere else.
pub trait NormExpr: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn label(&self) -> String;
    fn in_domain(&self, x: &[f64]) -> bool;
    fn structure(&self) -> Structure {
        Structure::General
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S;
}

/// Object-safe view of a norm: plain and jet evaluation.
pub trait FinslerNorm: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn label(&self) -> String;
    fn in_domain(&self, x: &[f64]) -> bool;
    fn structure(&self) -> Structure;
    fn norm(&self, x: &[f64], y: &[f64]) -> f64;
    fn norm_jet(&self, x: &[Jet], y: &[Jet]) -> Jet;
}

impl<T: NormExpr> FinslerNorm for T {
    fn dim(&self) -> usize {
        NormExpr::dim(self)
    }
    fn label(&self) -> String {
        NormExpr::label(self)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        NormExpr::in_domain(self, x)
    }
    fn structure(&self) -> Structure {
        NormExpr::structure(self)
    }
    fn norm(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval(x, y)
    }
    fn norm_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        self.eval(x, y)
    }
}

/// Shared handle to a norm. Cheap to clone; immutable.
#[derive(Clone)]
pub struct MetricSpec {
    inner: Arc<dyn FinslerNorm>,
}

impl fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricSpec({})", self.inner.label())
    }
}

impl MetricSpec {
    pub fn new<N: FinslerNorm + 'static>(norm: N) -> Self {
        MetricSpec { inner: Arc::new(norm) }
    }

    pub fn from_arc(inner: Arc<dyn FinslerNorm>) -> Self {
        MetricSpec { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn label(&self) -> String {
        self.inner.label()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.inner.in_domain(x)
    }

    pub fn structure(&self) -> Structure {
        self.inner.structure()
    }

    /// Raw norm value; no domain or tangent checks.
    pub fn norm(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.norm(x, y)
    }

    pub fn norm_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        self.inner.norm_jet(x, y)
    }

    pub fn as_dyn(&self) -> &dyn FinslerNorm {
        self.inner.as_ref()
    }
}
