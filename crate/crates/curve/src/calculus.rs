use finsler_core::{Error, Finsler, LocalGeometry, PointGeometry, Result, TangentSample};
use nalgebra::DVector;

use crate::frenet::gram_schmidt;
use crate::trajectory::CurveState;

/// `tau^i = dy^i/ds + N^i_j y^j`.
pub fn tension(engine: &Finsler, x: &DVector<f64>, y: &DVector<f64>, dyds: &DVector<f64>) -> Result<DVector<f64>> {
    let point = engine.spray_and_connection(&TangentSample::from_vectors(x, y))?;
    Ok(dyds + &point.nonlinear * y)
}

/// `dX/ds + N X + C(X, u)` from tensors already evaluated at `(x, y)`.
pub fn covariant_derivative_at(
    point: &PointGeometry,
    u: &DVector<f64>,
    v: &DVector<f64>,
    dvds: &DVector<f64>,
) -> DVector<f64> {
    dvds + &point.nonlinear * v + point.cartan(v, u)
}

/// Covariant derivative of the field `v` along the curve through `state`.
pub fn covariant_derivative_along(
    engine: &Finsler,
    state: &CurveState,
    v: &DVector<f64>,
    dvds: &DVector<f64>,
) -> Result<DVector<f64>> {
    let point = engine.spray_and_connection(&state.sample())?;
    Ok(covariant_derivative_at(&point, &state.u, v, dvds))
}

#[derive(Clone, Debug)]
pub struct BitensionReport {
    pub tau2: DVector<f64>,
    /// `-R(u) + P(u, u) - C(u, w)`
    pub a: DVector<f64>,
    pub norm_tau2: f64,
    /// `|F(x, y) - 1|`; the bitension is defined for unit-speed curves only.
    pub speed_defect: f64,
}

impl BitensionReport {
    pub fn is_unit_speed(&self, tol: f64) -> bool {
        self.speed_defect <= tol
    }
}

pub fn bitension_at(local: &LocalGeometry, state: &CurveState, dwds: &DVector<f64>) -> BitensionReport {
    let p = &local.point;
    let (u, w) = (&state.u, &state.w);
    let d3t = covariant_derivative_at(p, u, w, dwds);
    let a = -local.curvature.jacobi_apply(u) + local.curvature.landsberg_apply(u, u) - p.cartan(u, w);
    let tau2 = d3t - &a;
    let norm_tau2 = p.norm(&tau2);
    let speed_defect = (p.norm(&state.y) - 1.0).abs();
    BitensionReport {
        tau2,
        a,
        norm_tau2,
        speed_defect,
    }
}

/// `tau_2 = D^3 T + R(u) - P(u, u) + C(u, w)` with `dw/ds` supplied.
pub fn bitension(engine: &Finsler, state: &CurveState, dwds: &DVector<f64>) -> Result<BitensionReport> {
    let local = engine.local(&state.sample())?;
    Ok(bitension_at(&local, state, dwds))
}

/// `kappa1^2 - <R(e2) - kappa1 P(e2, e2), e2>` for a planar curve, `e2` the
/// unit normal obtained from `normal_hint`.
pub fn residual_2d(
    engine: &Finsler,
    x: &DVector<f64>,
    y: &DVector<f64>,
    kappa1: f64,
    normal_hint: &DVector<f64>,
) -> Result<f64> {
    if engine.dim() != 2 {
        return Err(Error::Dimension {
            required: 2,
            got: engine.dim(),
        });
    }
    let local = engine.local(&TangentSample::from_vectors(x, y))?;
    let p = &local.point;
    let frame = gram_schmidt(&p.g, &[y.clone(), normal_hint.clone()], 1e-10);
    if frame.len() < 2 {
        return Err(Error::DegenerateHint("normal is parallel to the velocity".into()));
    }
    let e2 = &frame[1];
    let r = local.curvature.jacobi_apply(e2);
    let pe = local.curvature.landsberg_apply(e2, e2);
    Ok(kappa1 * kappa1 - p.inner(&(r - pe * kappa1), e2))
}
