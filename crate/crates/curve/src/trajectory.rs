use finsler_core::numeric::differentiate;
use finsler_core::{Finsler, Result, TangentSample};
use nalgebra::DVector;

use crate::calculus::{bitension_at, covariant_derivative_at, BitensionReport};

/// Position, velocity, `u = DT` and `w = D^2 T` at one parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub u: DVector<f64>,
    pub w: DVector<f64>,
}

impl CurveState {
    pub fn new(x: DVector<f64>, y: DVector<f64>, u: DVector<f64>, w: DVector<f64>) -> Self {
        CurveState { x, y, u, w }
    }

    /// Geodesic data: `u = w = 0`.
    pub fn geodesic(x: DVector<f64>, y: DVector<f64>) -> Self {
        let n = x.len();
        CurveState {
            x,
            y,
            u: DVector::zeros(n),
            w: DVector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn sample(&self) -> TangentSample {
        TangentSample::from_vectors(&self.x, &self.y)
    }

    /// `[x, y, u, w]` concatenated.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.dim());
        for part in [&self.x, &self.y, &self.u, &self.w] {
            v.extend_from_slice(part.as_slice());
        }
        v
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        let n = flat.len() / 4;
        let part = |k: usize| DVector::from_column_slice(&flat[k * n..(k + 1) * n]);
        CurveState {
            x: part(0),
            y: part(1),
            u: part(2),
            w: part(3),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleDiagnostics {
    /// `F(x, y)`
    pub f: f64,
    /// `|u|` in the metric at `(x, y)`.
    pub kappa1: f64,
    /// Bitension norm with `dw/ds` from differencing the samples; NaN when
    /// there are too few samples.
    pub tau2_norm: f64,
}

/// Samples of a lifted curve with per-sample diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub s: Vec<f64>,
    pub states: Vec<CurveState>,
    pub diagnostics: Vec<SampleDiagnostics>,
}

impl Trajectory {
    /// Wraps states and evaluates the diagnostics.
    pub fn from_states(engine: &Finsler, s: Vec<f64>, states: Vec<CurveState>) -> Result<Self> {
        let reports = bitension_series(engine, &s, &states)?;
        let diagnostics = reports
            .iter()
            .map(|(f, kappa1, rep)| SampleDiagnostics {
                f: *f,
                kappa1: *kappa1,
                tau2_norm: rep.as_ref().map_or(f64::NAN, |r| r.norm_tau2),
            })
            .collect();
        Ok(Trajectory { s, states, diagnostics })
    }

    /// Lifts sampled positions and velocities: `u` is the tension and
    /// `w = D u`, derivatives in `s` taken by differencing unless `dyds` is
    /// supplied.
    pub fn lift(
        engine: &Finsler,
        s: Vec<f64>,
        xs: Vec<DVector<f64>>,
        ys: Vec<DVector<f64>>,
        dyds: Option<Vec<DVector<f64>>>,
    ) -> Result<Self> {
        let dyds = match dyds {
            Some(d) => d,
            None => differentiate(&s, &ys)?,
        };
        let points: Vec<_> = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| engine.spray_and_connection(&TangentSample::from_vectors(x, y)))
            .collect::<Result<_>>()?;
        let us: Vec<DVector<f64>> = points
            .iter()
            .zip(ys.iter().zip(&dyds))
            .map(|(p, (y, dy))| dy + &p.nonlinear * y)
            .collect();
        let duds = differentiate(&s, &us)?;
        let states = (0..s.len())
            .map(|k| {
                let w = covariant_derivative_at(&points[k], &us[k], &us[k], &duds[k]);
                CurveState::new(xs[k].clone(), ys[k].clone(), us[k].clone(), w)
            })
            .collect();
        Trajectory::from_states(engine, s, states)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, CurveState::dim)
    }

    pub fn last(&self) -> Option<&CurveState> {
        self.states.last()
    }

    /// Bitension reports at every sample, `dw/ds` by differencing.
    pub fn bitension_reports(&self, engine: &Finsler) -> Result<Vec<BitensionReport>> {
        bitension_series(engine, &self.s, &self.states)?
            .into_iter()
            .map(|(_, _, r)| {
                r.ok_or(finsler_core::Error::InsufficientSamples {
                    needed: 5,
                    have: self.len(),
                })
            })
            .collect()
    }

    pub fn max_f_drift(&self) -> f64 {
        self.diagnostics.iter().fold(0.0, |m, d| m.max((d.f - 1.0).abs()))
    }

    pub fn max_tau2(&self) -> f64 {
        self.diagnostics.iter().fold(0.0, |m, d| m.max(d.tau2_norm))
    }
}

type SampleReport = (f64, f64, Option<BitensionReport>);

fn bitension_series(engine: &Finsler, s: &[f64], states: &[CurveState]) -> Result<Vec<SampleReport>> {
    let ws: Vec<DVector<f64>> = states.iter().map(|st| st.w.clone()).collect();
    let dwds = differentiate(s, &ws).ok();
    states
        .iter()
        .enumerate()
        .map(|(k, st)| {
            let local = engine.local(&st.sample())?;
            let f = local.point.norm(&st.y);
            let kappa1 = local.point.norm(&st.u);
            let report = dwds.as_ref().map(|d| bitension_at(&local, st, &d[k]));
            Ok((f, kappa1, report))
        })
        .collect()
}
