//! Pointwise Finsler tensors: metric, Cartan tensor, spray, Cartan
//! connection, curvature of the nonlinear connection, Landsberg tensor and
//! the derived scalar operators.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::backend::{BackendOptions, Depth, DifferentiationBackend, JetBackend, RawTensors};
use crate::error::{Error, Result};
use crate::norm::MetricSpec;
use crate::tensor::{Tensor3, Tensor4};

/// Numerical settings shared by all tensor queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetConfig {
    /// Relative step of the finite-difference backend.
    pub fd_step: f64,
    /// Threshold used by symmetry and degeneracy checks.
    pub tol_symmetry: f64,
    /// Tangent vectors shorter than this are rejected.
    pub y_floor: f64,
}

impl Default for JetConfig {
    fn default() -> Self {
        JetConfig {
            fd_step: 1e-2,
            tol_symmetry: 1e-8,
            y_floor: 1e-8,
        }
    }
}

impl JetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fd_step > 0.0 && self.tol_symmetry > 0.0 && self.y_floor > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "jet configuration entries must be positive: {self:?}"
            )))
        }
    }
}

/// A point of the tangent bundle, `(x, y)` with `y != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentSample {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl TangentSample {
    pub fn new(x: impl Into<Vec<f64>>, y: impl Into<Vec<f64>>) -> Self {
        TangentSample {
            x: DVector::from_vec(x.into()),
            y: DVector::from_vec(y.into()),
        }
    }

    pub fn from_vectors(x: &DVector<f64>, y: &DVector<f64>) -> Self {
        TangentSample {
            x: x.clone(),
            y: y.clone(),
        }
    }
}

/// Connection-level tensors at one tangent sample.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `C_ijk`
    pub c_low: Tensor3,
    /// `C^i_jk`
    pub c_mixed: Tensor3,
    /// Spray coefficients `G^i`.
    pub spray: DVector<f64>,
    /// Nonlinear connection `N^i_j = G^i_j`.
    pub nonlinear: DMatrix<f64>,
    /// Horizontal coefficients `Gamma^i_jk` of the Cartan connection.
    pub gamma: Tensor3,
    /// `delta_k g_ij` stored `[k][i][j]`.
    pub delta_g: Tensor3,
}

/// Curvature-level tensors at one tangent sample.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    /// `R^i_jk`
    pub r3: Tensor3,
    /// Jacobi endomorphism `R^i_j = R^i_kj y^k`.
    pub jacobi: DMatrix<f64>,
    /// Landsberg tensor `P^i_jk`.
    pub landsberg: Tensor3,
    /// `d C^i_jl / d y^k` stored `[i][j][l][k]`.
    pub cartan_vertical: Tensor4,
}

/// Everything the biharmonic right-hand side needs at one sample.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    pub sample: TangentSample,
    pub point: PointGeometry,
    pub curvature: CurvatureData,
}

impl PointGeometry {
    /// `<a, b>` with the reference-vector metric.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.g * b))
    }

    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// `C(a, b)^i = C^i_jk a^j b^k`.
    pub fn cartan(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        self.c_mixed.contract_last2(a, b)
    }

    /// `C_ijk` with all indices lowered, contracted on the last two slots.
    pub fn cartan_lowered(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        self.c_low.contract_last2(a, b)
    }
}

impl CurvatureData {
    /// `R(X)^i = R^i_j X^j`.
    pub fn jacobi_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.jacobi * x
    }

    /// `P(a, b)^i = P^i_jk a^j b^k`.
    pub fn landsberg_apply(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        self.landsberg.contract_last2(a, b)
    }
}

/// Tensor engine: a norm, a differentiation strategy and numerical settings.
#[derive(Clone, Debug)]
pub struct Finsler {
    metric: MetricSpec,
    backend: Arc<dyn DifferentiationBackend>,
    config: JetConfig,
}

impl Finsler {
    pub fn new(metric: MetricSpec) -> Self {
        Finsler {
            metric,
            backend: Arc::new(JetBackend),
            config: JetConfig::default(),
        }
    }

    pub fn with_backend(mut self, backend: Arc<dyn DifferentiationBackend>) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_config(mut self, config: JetConfig) -> Self {
        self.config = config;
        self
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn backend(&self) -> &dyn DifferentiationBackend {
        self.backend.as_ref()
    }

    pub fn config(&self) -> &JetConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn check(&self, s: &TangentSample) -> Result<()> {
        let n = self.dim();
        for len in [s.x.len(), s.y.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        if !self.metric.in_domain(s.x.as_slice()) {
            return Err(Error::Domain {
                label: self.metric.label(),
                x: s.x.as_slice().to_vec(),
            });
        }
        let y_norm = s.y.norm();
        if !(y_norm >= self.config.y_floor) {
            return Err(Error::DegenerateTangent {
                norm: y_norm,
                floor: self.config.y_floor,
            });
        }
        Ok(())
    }

    fn raw(&self, s: &TangentSample, depth: Depth) -> Result<(RawTensors, DMatrix<f64>)> {
        self.check(s)?;
        let options = BackendOptions {
            fd_step: self.config.fd_step,
        };
        let raw = self
            .backend
            .compute(self.metric.as_dyn(), s.x.as_slice(), s.y.as_slice(), depth, &options);
        let g_inv = spd_inverse(&raw.g).ok_or_else(|| Error::NotPositiveDefinite {
            x: s.x.as_slice().to_vec(),
            y: s.y.as_slice().to_vec(),
        })?;
        Ok((raw, g_inv))
    }

    /// `F(x, y)`.
    pub fn eval_f(&self, s: &TangentSample) -> Result<f64> {
        self.check(s)?;
        Ok(self.metric.norm(s.x.as_slice(), s.y.as_slice()))
    }

    /// `(g, g^-1)` with `g = 1/2 d^2(F^2)/dy dy`.
    pub fn metric_tensor(&self, s: &TangentSample) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (raw, g_inv) = self.raw(s, Depth::Metric)?;
        Ok((raw.g, g_inv))
    }

    /// `(C_ijk, C^i_jk)`.
    pub fn cartan_tensor(&self, s: &TangentSample) -> Result<(Tensor3, Tensor3)> {
        let (raw, g_inv) = self.raw(s, Depth::Cartan)?;
        let c_low = raw.c_low.expect("backend omitted the Cartan tensor");
        let c_mixed = raise_first(&g_inv, &c_low);
        Ok((c_low, c_mixed))
    }

    pub fn spray_and_connection(&self, s: &TangentSample) -> Result<PointGeometry> {
        let (raw, g_inv) = self.raw(s, Depth::Connection)?;
        Ok(package_point(raw, g_inv))
    }

    pub fn curvature_data(&self, s: &TangentSample) -> Result<CurvatureData> {
        Ok(self.local(s)?.curvature)
    }

    /// Connection and curvature from a single backend pass.
    pub fn local(&self, s: &TangentSample) -> Result<LocalGeometry> {
        let (mut raw, g_inv) = self.raw(s, Depth::Curvature)?;
        let curv = raw.curvature.take().expect("backend omitted curvature");
        let n = self.dim();
        let jacobi = DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| curv.r3.get(i, k, j) * s.y[k]).sum::<f64>());
        Ok(LocalGeometry {
            sample: s.clone(),
            point: package_point(raw, g_inv),
            curvature: CurvatureData {
                r3: curv.r3,
                jacobi,
                landsberg: curv.landsberg,
                cartan_vertical: curv.cartan_vertical,
            },
        })
    }

    /// Flag curvature of the flag spanned by `y` and `flag`.
    pub fn flag_curvature(&self, s: &TangentSample, flag: &DVector<f64>) -> Result<f64> {
        let local = self.local(s)?;
        local.flag_curvature(flag, self.config.tol_symmetry)
    }

    /// `C~(X, Y, Z) = (D_{JX} C)(Y, Z)`.
    pub fn c_tilde(
        &self,
        s: &TangentSample,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(self.local(s)?.c_tilde(x, y, z))
    }

    /// `<-R(X) + 4/3 P(X, X) + 1/3 C~(X, X, X), X>`.
    pub fn f_operator(&self, s: &TangentSample, x: &DVector<f64>) -> Result<f64> {
        Ok(self.local(s)?.f_operator(x))
    }
}

impl LocalGeometry {
    pub fn dim(&self) -> usize {
        self.sample.x.len()
    }

    pub fn flag_curvature(&self, flag: &DVector<f64>, tol: f64) -> Result<f64> {
        let p = &self.point;
        let f2 = p.inner(&self.sample.y, &self.sample.y);
        let f = f2.sqrt();
        let unit_y = &self.sample.y / f;
        let scale = p.norm(flag);
        let residual = flag - &unit_y * p.inner(flag, &unit_y);
        let len = p.norm(&residual);
        if !(scale > 0.0) || len <= tol * scale {
            return Err(Error::DegenerateFlag);
        }
        let e = residual / len;
        Ok(p.inner(&self.curvature.jacobi_apply(&e), &e) / f2)
    }

    pub fn c_tilde(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let c = &self.point.c_mixed;
        let dc = &self.curvature.cartan_vertical;
        DVector::from_fn(n, |i, _| {
            let mut acc = 0.0;
            for j in 0..n {
                for l in 0..n {
                    for k in 0..n {
                        let mut v = dc.get(i, j, l, k);
                        for h in 0..n {
                            v += c.get(h, j, l) * c.get(i, h, k)
                                - c.get(i, h, l) * c.get(h, j, k)
                                - c.get(i, j, h) * c.get(h, l, k);
                        }
                        acc += v * x[k] * y[j] * z[l];
                    }
                }
            }
            acc
        })
    }

    pub fn f_operator(&self, x: &DVector<f64>) -> f64 {
        let r = self.curvature.jacobi_apply(x);
        let p = self.curvature.landsberg_apply(x, x);
        let ct = self.c_tilde(x, x, x);
        let v = -r + p * (4.0 / 3.0) + ct * (1.0 / 3.0);
        self.point.inner(&v, x)
    }
}

fn spd_inverse(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if g.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sym = (g + g.transpose()) * 0.5;
    Cholesky::new(sym).map(|c| c.inverse())
}

/// `T^i_jk = g^ih T_hjk`.
pub(crate) fn raise_first(g_inv: &DMatrix<f64>, low: &Tensor3) -> Tensor3 {
    let n = low.dim();
    Tensor3::from_fn(n, |i, j, k| (0..n).map(|h| g_inv[(i, h)] * low.get(h, j, k)).sum())
}

/// `T_ijk = g_ih T^h_jk`.
pub fn lower_first(g: &DMatrix<f64>, mixed: &Tensor3) -> Tensor3 {
    raise_first(g, mixed)
}

fn package_point(raw: RawTensors, g_inv: DMatrix<f64>) -> PointGeometry {
    let c_low = raw.c_low.expect("backend omitted the Cartan tensor");
    let conn = raw.connection.expect("backend omitted the connection");
    let c_mixed = raise_first(&g_inv, &c_low);
    PointGeometry {
        g: raw.g,
        g_inv,
        c_low,
        c_mixed,
        spray: conn.spray,
        nonlinear: conn.nonlinear,
        gamma: conn.gamma,
        delta_g: conn.delta_g,
    }
}
