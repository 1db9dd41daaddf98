//! Dormand-Prince 5(4) with PI step-size control.

use finsler_core::Error;

use crate::config::IntegratorConfig;
use crate::Termination;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const MAX_GROWTH: f64 = 10.0;
const MAX_SHRINK: f64 = 0.2;

/// Right-hand side `dy/ds = f(s, y)`; an error rejects the current step.
pub trait OdeSystem {
    fn rhs(&mut self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Error>;
}

/// What to do after a step has been accepted.
pub enum AfterStep {
    Continue,
    /// The state was modified in place; derivatives must be re-evaluated.
    Modified,
    Stop(Termination),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

pub struct Solution {
    pub s: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub termination: Termination,
    pub stats: StepStats,
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], cfg: &IntegratorConfig) -> f64 {
    let sum: f64 = (0..y.len())
        .map(|i| {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / y.len() as f64).sqrt()
}

fn failure(s: f64, error: Error) -> Termination {
    match error {
        Error::Domain { .. } => Termination::DomainExit { s },
        other => Termination::GeometryFailure {
            s,
            message: other.to_string(),
        },
    }
}

fn initial_step(
    system: &mut dyn OdeSystem,
    s0: f64,
    y0: &[f64],
    f0: &[f64],
    cfg: &IntegratorConfig,
    stats: &mut StepStats,
) -> f64 {
    let n = y0.len();
    let scale = |i: usize| cfg.abs_tol + cfg.rel_tol * y0[i].abs();
    let rms = |v: &dyn Fn(usize) -> f64| ((0..n).map(|i| v(i).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(&|i| y0[i] / scale(i));
    let d1 = rms(&|i| f0[i] / scale(i));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.max_step);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    stats.evaluations += 1;
    if system.rhs(s0 + h0, &y1, &mut f1).is_err() {
        return h0.max(cfg.min_step);
    }
    let d2 = rms(&|i| (f1[i] - f0[i]) / scale(i)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step).max(cfg.min_step)
}

/// Integrates over `cfg.s_span`. With `dense_output` the solution is
/// reported on the uniform grid of spacing `output_step` (steps are clamped
/// to land on it), otherwise at every accepted step. `after_step` sees each
/// accepted state and may modify it or stop the run.
pub fn integrate(
    system: &mut dyn OdeSystem,
    y0: &[f64],
    cfg: &IntegratorConfig,
    mut after_step: impl FnMut(f64, &mut [f64]) -> AfterStep,
) -> Solution {
    let n = y0.len();
    let (s0, s1) = cfg.s_span;
    let mut stats = StepStats::default();
    let mut out_s = vec![s0];
    let mut out_y = vec![y0.to_vec()];
    let finish = |out_s, out_y, termination, stats| Solution {
        s: out_s,
        y: out_y,
        termination,
        stats,
    };

    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    stats.evaluations += 1;
    if let Err(e) = system.rhs(s0, &y, &mut k[0]) {
        return finish(out_s, out_y, failure(s0, e), stats);
    }

    let grid_count = if cfg.dense_output {
        ((s1 - s0) / cfg.output_step - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    let grid_point = |i: usize| {
        if i >= grid_count {
            s1
        } else {
            s0 + i as f64 * cfg.output_step
        }
    };
    let mut next_grid = 1usize;

    let mut s = s0;
    let f0 = k[0].clone();
    let mut h = initial_step(system, s0, &y, &f0, cfg, &mut stats);
    let mut err_old: f64 = 1e-4;
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut pending_error: Option<Error> = None;

    while s < s1 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return finish(out_s, out_y, Termination::MaxSteps { s }, stats);
        }
        if h < cfg.min_step {
            let t = match pending_error.take() {
                Some(e) => failure(s, e),
                None => Termination::StepUnderflow { s },
            };
            return finish(out_s, out_y, t, stats);
        }
        let target = if cfg.dense_output { grid_point(next_grid) } else { s1 };
        let mut step = h.min(cfg.max_step);
        let mut lands = false;
        if s + step >= target - 1e-12 * target.abs().max(1.0) {
            step = target - s;
            lands = true;
        }

        let mut failed = None;
        for st in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(st) {
                    acc += step * A[st][j] * kj[i];
                }
                stage[i] = acc;
            }
            stats.evaluations += 1;
            if let Err(e) = system.rhs(s + C[st] * step, &stage, &mut k[st]) {
                failed = Some(e);
                break;
            }
        }
        if let Some(e) = failed {
            stats.rejected += 1;
            pending_error = Some(e);
            h = step * 0.25;
            continue;
        }
        pending_error = None;
        y_new.copy_from_slice(&stage);
        for i in 0..n {
            err[i] = step * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        }
        let e = error_norm(&y, &y_new, &err, cfg).max(1e-16);
        if e > 1.0 || !e.is_finite() {
            stats.rejected += 1;
            let fac = if e.is_finite() {
                (SAFETY * e.powf(-ALPHA)).max(MAX_SHRINK)
            } else {
                MAX_SHRINK
            };
            h = step * fac;
            continue;
        }

        stats.accepted += 1;
        let fac = (SAFETY * e.powf(-ALPHA) * err_old.powf(BETA)).clamp(MAX_SHRINK, MAX_GROWTH);
        err_old = e.max(1e-4);
        let proposal = step * fac;
        h = if lands { proposal.max(h) } else { proposal };
        s = if lands { target } else { s + step };
        std::mem::swap(&mut y, &mut y_new);
        k.swap(0, 6);

        match after_step(s, &mut y) {
            AfterStep::Continue => {}
            AfterStep::Modified => {
                stats.evaluations += 1;
                if let Err(e) = system.rhs(s, &y, &mut k[0]) {
                    out_s.push(s);
                    out_y.push(y.clone());
                    return finish(out_s, out_y, failure(s, e), stats);
                }
            }
            // the rejected state is reported through `t`, not recorded
            AfterStep::Stop(t) => return finish(out_s, out_y, t, stats),
        }
        if !cfg.dense_output || lands {
            out_s.push(s);
            out_y.push(y.clone());
            if lands {
                next_grid += 1;
            }
        }
    }
    finish(out_s, out_y, Termination::Completed, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;

    impl OdeSystem for Oscillator {
        fn rhs(&mut self, _s: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Error> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    fn config(tol: f64) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            s_span: (0.0, 10.0),
            output_step: 0.5,
            ..IntegratorConfig::default()
        }
    }

    #[test]
    fn oscillator_tracks_cosine_on_grid() {
        let sol = integrate(&mut Oscillator, &[1.0, 0.0], &config(1e-10), |_, _| AfterStep::Continue);
        assert_eq!(sol.termination, Termination::Completed);
        assert_eq!(sol.s.len(), 21);
        for (s, y) in sol.s.iter().zip(&sol.y) {
            assert!((y[0] - s.cos()).abs() < 1e-8, "s {s}");
        }
        assert_eq!(*sol.s.last().unwrap(), 10.0);
    }

    #[test]
    fn error_decreases_with_tolerance() {
        let end = |tol| {
            let sol = integrate(&mut Oscillator, &[1.0, 0.0], &config(tol), |_, _| AfterStep::Continue);
            (sol.y.last().unwrap()[0] - 10f64.cos()).abs()
        };
        assert!(end(1e-10) < end(1e-6));
    }

    struct Wall;

    impl OdeSystem for Wall {
        fn rhs(&mut self, _s: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Error> {
            if y[0] >= 1.0 {
                return Err(Error::Domain {
                    label: "wall".into(),
                    x: y.to_vec(),
                });
            }
            dy[0] = 1.0;
            Ok(())
        }
    }

    #[test]
    fn domain_exit_keeps_prefix() {
        let cfg = IntegratorConfig {
            s_span: (0.0, 2.0),
            ..IntegratorConfig::default()
        };
        let sol = integrate(&mut Wall, &[0.0], &cfg, |_, _| AfterStep::Continue);
        match sol.termination {
            Termination::DomainExit { s } => assert!(s <= 1.0 && s > 0.98),
            other => panic!("unexpected {other:?}"),
        }
        assert!(sol.y.iter().all(|y| y[0] < 1.0));
        assert!(sol.s.len() > 90);
    }
}
