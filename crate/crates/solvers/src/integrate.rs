use finsler_core::{Error, Finsler, Result, TangentSample};
use finsler_curve::{CurveState, Trajectory};
use nalgebra::DVector;

use crate::config::IntegratorConfig;
use crate::dopri::{integrate, AfterStep, OdeSystem, StepStats};
use crate::monitor::{monitor_invariants, MonitorReport};
use crate::Termination;

const ADMISSIBLE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Run {
    pub trajectory: Trajectory,
    pub termination: Termination,
    pub stats: StepStats,
}

struct Geodesic<'a> {
    engine: &'a Finsler,
    n: usize,
}

impl OdeSystem for Geodesic<'_> {
    fn rhs(&mut self, _s: f64, state: &[f64], d: &mut [f64]) -> Result<()> {
        let n = self.n;
        let sample = TangentSample::new(&state[..n], &state[n..2 * n]);
        let point = self.engine.spray_and_connection(&sample)?;
        for i in 0..n {
            d[i] = state[n + i];
            d[n + i] = -2.0 * point.spray[i];
        }
        Ok(())
    }
}

struct Biharmonic<'a> {
    engine: &'a Finsler,
}

impl OdeSystem for Biharmonic<'_> {
    fn rhs(&mut self, _s: f64, flat: &[f64], d: &mut [f64]) -> Result<()> {
        let st = CurveState::from_flat(flat);
        let n = st.dim();
        let local = self.engine.local(&st.sample())?;
        let p = &local.point;
        let nl = &p.nonlinear;
        let cuw = p.cartan(&st.u, &st.w);
        let a = -local.curvature.jacobi_apply(&st.u) + local.curvature.landsberg_apply(&st.u, &st.u) - &cuw;
        let dy = &st.u - nl * &st.y;
        let du = &st.w - nl * &st.u - p.cartan(&st.u, &st.u);
        let dw = a - nl * &st.w - cuw;
        for i in 0..n {
            d[i] = st.y[i];
            d[n + i] = dy[i];
            d[2 * n + i] = du[i];
            d[3 * n + i] = dw[i];
        }
        Ok(())
    }
}

/// Rescales the velocity block to unit speed and checks the drift bound.
fn speed_hook<'a>(
    engine: &'a Finsler,
    n: usize,
    config: &'a IntegratorConfig,
) -> impl FnMut(f64, &mut [f64]) -> AfterStep + 'a {
    move |s, state| {
        let sample = TangentSample::new(&state[..n], &state[n..2 * n]);
        let f = match engine.eval_f(&sample) {
            Ok(f) => f,
            Err(Error::Domain { .. }) => return AfterStep::Stop(Termination::DomainExit { s }),
            Err(e) => {
                return AfterStep::Stop(Termination::GeometryFailure {
                    s,
                    message: e.to_string(),
                })
            }
        };
        if config.renormalize {
            for v in &mut state[n..2 * n] {
                *v /= f;
            }
            return AfterStep::Modified;
        }
        let drift = (f - 1.0).abs();
        if drift > config.max_f_drift {
            AfterStep::Stop(Termination::AdmissibilityLost { s, drift })
        } else {
            AfterStep::Continue
        }
    }
}

fn check_speed(engine: &Finsler, x0: &DVector<f64>, y0: &DVector<f64>) -> Result<f64> {
    let f = engine.eval_f(&TangentSample::from_vectors(x0, y0))?;
    if (f - 1.0).abs() > ADMISSIBLE_TOL {
        return Err(Error::NotAdmissible(format!("F(x0, y0) = {f}, expected 1")));
    }
    Ok(f)
}

/// Unit-speed geodesic `dx/ds = y, dy/ds = -2G(x, y)`. With
/// `config.renormalize` the initial velocity is rescaled instead of rejected.
pub fn integrate_geodesic(
    engine: &Finsler,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    config: &IntegratorConfig,
) -> Result<Run> {
    config.validate()?;
    let n = engine.dim();
    let y0 = if config.renormalize {
        y0 / engine.eval_f(&TangentSample::from_vectors(x0, y0))?
    } else {
        check_speed(engine, x0, y0)?;
        y0.clone()
    };
    let mut flat = x0.as_slice().to_vec();
    flat.extend_from_slice(y0.as_slice());
    let mut system = Geodesic { engine, n };
    let sol = integrate(&mut system, &flat, config, speed_hook(engine, n, config));
    let states = sol
        .y
        .iter()
        .map(|v| CurveState::geodesic(DVector::from_column_slice(&v[..n]), DVector::from_column_slice(&v[n..])))
        .collect();
    Ok(Run {
        trajectory: Trajectory::from_states(engine, sol.s, states)?,
        termination: sol.termination,
        stats: sol.stats,
    })
}

fn check_admissible(engine: &Finsler, state: &CurveState) -> Result<()> {
    check_speed(engine, &state.x, &state.y)?;
    let (g, _) = engine.metric_tensor(&state.sample())?;
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&g * b));
    let scale = 1.0 + ip(&state.u, &state.u) + ip(&state.w, &state.w).sqrt();
    let orth = ip(&state.y, &state.u);
    let second = ip(&state.w, &state.y) + ip(&state.u, &state.u);
    if orth.abs() > ADMISSIBLE_TOL * scale || second.abs() > ADMISSIBLE_TOL * scale {
        return Err(Error::NotAdmissible(format!(
            "<T, u> = {orth:e}, <w, T> + <u, u> = {second:e}"
        )));
    }
    Ok(())
}

/// Integrates the biharmonic system in the state `(x, y, u, w)`:
///
/// ```text
/// x' = y
/// y' = u - N y
/// u' = w - N u - C(u, u)
/// w' = A - N w - C(w, u),    A = -R(u) + P(u, u) - C(u, w)
/// ```
pub fn integrate_biharmonic(
    engine: &Finsler,
    state0: &CurveState,
    config: &IntegratorConfig,
) -> Result<(Run, MonitorReport)> {
    config.validate()?;
    if state0.dim() != engine.dim() {
        return Err(Error::DimensionMismatch {
            expected: engine.dim(),
            got: state0.dim(),
        });
    }
    check_admissible(engine, state0)?;
    let n = engine.dim();
    let mut system = Biharmonic { engine };
    let sol = integrate(&mut system, &state0.to_flat(), config, speed_hook(engine, n, config));
    let states = sol.y.iter().map(|v| CurveState::from_flat(v)).collect();
    let trajectory = Trajectory::from_states(engine, sol.s, states)?;
    let report = monitor_invariants(engine, &trajectory)?;
    Ok((
        Run {
            trajectory,
            termination: sol.termination,
            stats: sol.stats,
        },
        report,
    ))
}
