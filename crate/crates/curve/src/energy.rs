use finsler_core::numeric::{differentiate, is_uniform, simpson};
use finsler_core::{Error, Finsler, Result, TangentSample};
use nalgebra::DVector;

use crate::trajectory::Trajectory;

fn uniform_step(s: &[f64]) -> Result<f64> {
    if s.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            have: s.len(),
        });
    }
    if !is_uniform(s) {
        return Err(Error::InvalidParams("quadrature needs a uniform grid".into()));
    }
    Ok(s[1] - s[0])
}

/// `(E1, E2) = (1/2 int <T, T> ds, 1/2 int <DT, DT> ds)`.
pub fn bienergy(engine: &Finsler, trajectory: &Trajectory) -> Result<(f64, f64)> {
    let h = uniform_step(&trajectory.s)?;
    let mut e1 = Vec::with_capacity(trajectory.len());
    let mut e2 = Vec::with_capacity(trajectory.len());
    for st in &trajectory.states {
        let (g, _) = engine.metric_tensor(&st.sample())?;
        e1.push(st.y.dot(&(&g * &st.y)));
        e2.push(st.u.dot(&(&g * &st.u)));
    }
    Ok((0.5 * simpson(h, &e1)?, 0.5 * simpson(h, &e2)?))
}

/// `E2` of the curve given by samples of `x`, `dx/ds` and `d^2x/ds^2`.
pub fn bienergy_of(
    engine: &Finsler,
    s: &[f64],
    xs: &[DVector<f64>],
    ys: &[DVector<f64>],
    dyds: &[DVector<f64>],
) -> Result<f64> {
    let h = uniform_step(s)?;
    let density = (0..s.len())
        .map(|k| {
            let p = engine.spray_and_connection(&TangentSample::from_vectors(&xs[k], &ys[k]))?;
            let u = &dyds[k] + &p.nonlinear * &ys[k];
            Ok(p.inner(&u, &u))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(0.5 * simpson(h, &density)?)
}

/// Variation field sampled on the trajectory grid.
#[derive(Clone, Debug)]
pub struct Variation {
    pub v: Vec<DVector<f64>>,
    /// Analytic `dV/ds` and `d^2V/ds^2`; differenced from `v` when absent.
    pub derivatives: Option<(Vec<DVector<f64>>, Vec<DVector<f64>>)>,
}

impl Variation {
    pub fn sampled(v: Vec<DVector<f64>>) -> Self {
        Variation { v, derivatives: None }
    }
}

const STEPS: [f64; 2] = [1e-3, 1e-4];

/// `(lhs, rhs)` with `lhs = dE2(c + eps V)/d eps` at `eps = 0` by central
/// differences and Richardson extrapolation over two steps, and
/// `rhs = int <tau2, V> ds`.
pub fn first_variation_check(engine: &Finsler, trajectory: &Trajectory, variation: &Variation) -> Result<(f64, f64)> {
    let s = &trajectory.s;
    let h = uniform_step(s)?;
    if variation.v.len() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            got: variation.v.len(),
        });
    }
    let (dv, d2v) = match &variation.derivatives {
        Some((a, b)) => (a.clone(), b.clone()),
        None => {
            let dv = differentiate(s, &variation.v)?;
            let d2v = differentiate(s, &dv)?;
            (dv, d2v)
        }
    };
    let xs: Vec<_> = trajectory.states.iter().map(|st| st.x.clone()).collect();
    let ys: Vec<_> = trajectory.states.iter().map(|st| st.y.clone()).collect();
    let dyds = trajectory
        .states
        .iter()
        .map(|st| {
            let p = engine.spray_and_connection(&st.sample())?;
            Ok(&st.u - &p.nonlinear * &st.y)
        })
        .collect::<Result<Vec<_>>>()?;

    let energy = |eps: f64| -> Result<f64> {
        let xe: Vec<_> = xs.iter().zip(&variation.v).map(|(x, v)| x + v * eps).collect();
        let ye: Vec<_> = ys.iter().zip(&dv).map(|(y, v)| y + v * eps).collect();
        let de: Vec<_> = dyds.iter().zip(&d2v).map(|(d, v)| d + v * eps).collect();
        bienergy_of(engine, s, &xe, &ye, &de)
    };
    let mut central = Vec::with_capacity(STEPS.len());
    for eps in STEPS {
        central.push((energy(eps)? - energy(-eps)?) / (2.0 * eps));
    }
    let ratio = (STEPS[0] / STEPS[1]).powi(2);
    let lhs = (ratio * central[1] - central[0]) / (ratio - 1.0);

    let reports = trajectory.bitension_reports(engine)?;
    let density = trajectory
        .states
        .iter()
        .zip(reports.iter().zip(&variation.v))
        .map(|(st, (rep, v))| {
            let (g, _) = engine.metric_tensor(&st.sample())?;
            Ok(rep.tau2.dot(&(&g * v)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let rhs = simpson(h, &density)?;
    Ok((lhs, rhs))
}
