//! Curves of the Minkowski norm `|y| + b y^3` on R^3 reconstructed from the
//! profile `alpha = |y|`, which obeys
//! `(ln alpha)'' - kappa1^2 / (2 alpha) + kappa1^2 / 2 + gamma alpha = 0`.

use finsler_core::{builtin, Error, Finsler, MetricParams, Result};
use finsler_curve::Trajectory;
use finsler_solvers::dopri::{integrate, AfterStep, OdeSystem};
use finsler_solvers::{IntegratorConfig, Termination};
use nalgebra::DVector;

pub fn mink3_engine(b: f64) -> Result<Finsler> {
    Ok(Finsler::new(builtin("mink3", &MetricParams::new().number("b", b))?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mink3ProfileParams {
    pub kappa1: f64,
    pub gamma_const: f64,
    pub alpha0: f64,
    pub dalpha0: f64,
    pub b: f64,
}

impl Mink3ProfileParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(Error::InvalidParams(format!("b must lie in (0, 1), got {}", self.b)));
        }
        if !(self.kappa1 > 0.0) {
            return Err(Error::InvalidParams("kappa1 must be positive".into()));
        }
        let (lo, hi) = self.alpha_window();
        if !(self.alpha0 > lo && self.alpha0 < hi) {
            return Err(Error::InvalidParams(format!(
                "alpha0 = {} outside ({lo}, {hi}) where |y^3| <= alpha",
                self.alpha0
            )));
        }
        Ok(())
    }

    /// `alpha` range on which `y^3 = (1 - alpha) / b` satisfies `|y^3| <= alpha`.
    pub fn alpha_window(&self) -> (f64, f64) {
        (1.0 / (1.0 + self.b), 1.0 / (1.0 - self.b))
    }

    /// `alpha''` from the profile equation.
    pub fn alpha_second(&self, alpha: f64, dalpha: f64) -> f64 {
        let k2 = self.kappa1 * self.kappa1;
        dalpha * dalpha / alpha + 0.5 * k2 - 0.5 * k2 * alpha - self.gamma_const * alpha * alpha
    }

    /// The constant solutions: roots of `-k^2/(2a) + k^2/2 + gamma a = 0`, i.e.
    /// `gamma a^2 + k^2/2 a - k^2/2 = 0`, that are positive.
    pub fn constant_solutions(&self) -> Vec<f64> {
        let k2 = self.kappa1 * self.kappa1;
        let (qa, qb, qc) = (self.gamma_const, 0.5 * k2, -0.5 * k2);
        if qa == 0.0 {
            return vec![-qc / qb];
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Vec::new();
        }
        let mut roots: Vec<f64> = [(-qb + disc.sqrt()) / (2.0 * qa), (-qb - disc.sqrt()) / (2.0 * qa)]
            .into_iter()
            .filter(|r| *r > 0.0)
            .collect();
        roots.sort_by(f64::total_cmp);
        roots
    }
}

/// Velocity as a function of `alpha` for a fixed covector
/// `lambda = (l1, 0, l3)`, from `F(y) = 1` and `lambda . y = -kappa1^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Branch {
    l1: f64,
    l3: f64,
    k2: f64,
    b: f64,
}

impl Branch {
    /// `(y1, y3, y2^2)`
    fn parts(&self, alpha: f64) -> (f64, f64, f64) {
        let y3 = (1.0 - alpha) / self.b;
        let y1 = (-self.k2 - self.l3 * y3) / self.l1;
        (y1, y3, alpha * alpha - y1 * y1 - y3 * y3)
    }

    fn velocity(&self, alpha: f64, sign: f64) -> Option<DVector<f64>> {
        let (y1, y3, sq) = self.parts(alpha);
        if sq < -1e-12 {
            return None;
        }
        Some(DVector::from_vec(vec![y1, sign * sq.max(0.0).sqrt(), y3]))
    }

    /// `|dY/d alpha|^2` on the branch.
    fn speed_factor(&self, alpha: f64) -> Option<f64> {
        let (y1, y3, sq) = self.parts(alpha);
        if sq <= 0.0 {
            return None;
        }
        let dy3 = -1.0 / self.b;
        let dy1 = -self.l3 * dy3 / self.l1;
        let dy2 = (alpha - y1 * dy1 - y3 * dy3) / sq.sqrt();
        Some(dy1 * dy1 + dy2 * dy2 + dy3 * dy3)
    }
}

/// Chooses `lambda = (l1, 0, l3)` compatible with `gamma_const` and with
/// `|y'|^2 = alpha kappa1^2 + alpha'^2` at `s = 0` (the Euclidean form of
/// `g(tau, tau) = kappa1^2` for unit speed).
fn select_lambda(p: &Mink3ProfileParams) -> Result<Branch> {
    let k2 = p.kappa1 * p.kappa1;
    let fail = |reason: &str| Error::ReconstructionFailure {
        index: 0,
        s: 0.0,
        reason: reason.to_string(),
    };
    // l3^2 + (k2 b / 2) l3 + l1^2 + gamma k2 = 0
    let bound = k2 * k2 * p.b * p.b / 16.0 - p.gamma_const * k2;
    if !(bound > 0.0) {
        return Err(fail("no real lambda is compatible with gamma"));
    }
    let l1_max = bound.sqrt();
    let branch = |l1: f64, root: f64| {
        let disc = (bound - l1 * l1).max(0.0).sqrt();
        Branch {
            l1,
            l3: -k2 * p.b / 4.0 + root * disc,
            k2,
            b: p.b,
        }
    };
    let defect = |br: &Branch| {
        br.speed_factor(p.alpha0)
            .map(|f| f * p.dalpha0 * p.dalpha0 - p.alpha0 * k2 - p.dalpha0 * p.dalpha0)
    };
    if p.dalpha0 == 0.0 {
        // y is constant; any real branch reproduces the profile
        for root in [1.0, -1.0] {
            for frac in [0.5, 0.25, 0.75, 0.1, 0.9] {
                let br = branch(frac * l1_max, root);
                if br.velocity(p.alpha0, 1.0).is_some() {
                    return Ok(br);
                }
            }
        }
        return Err(fail("no real velocity for the constant profile"));
    }
    const GRID: usize = 4000;
    for root in [1.0, -1.0] {
        for side in [1.0, -1.0] {
            let at = |k: usize| side * l1_max * k as f64 / GRID as f64;
            let mut prev: Option<(f64, f64)> = None;
            for k in 1..GRID {
                let l1 = at(k);
                let Some(d) = defect(&branch(l1, root)) else {
                    prev = None;
                    continue;
                };
                if let Some((l0, d0)) = prev {
                    if d0 == 0.0 || d0.signum() != d.signum() {
                        let (mut lo, mut hi, mut dlo) = (l0, l1, d0);
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            match defect(&branch(mid, root)) {
                                Some(dm) if dm.signum() == dlo.signum() => {
                                    lo = mid;
                                    dlo = dm;
                                }
                                Some(_) => hi = mid,
                                None => break,
                            }
                        }
                        return Ok(branch(0.5 * (lo + hi), root));
                    }
                }
                prev = Some((l1, d));
            }
        }
    }
    Err(fail("no lambda satisfies the curvature condition at s = 0"))
}

/// Reconstructed curve and the profile it came from.
#[derive(Clone, Debug)]
pub struct Mink3Profile {
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
    pub dalpha: Vec<f64>,
    /// The constant covector `lambda` used in the reconstruction.
    pub lambda: DVector<f64>,
    /// Where the profile left its admissible window, if it did.
    pub valid_until: Option<f64>,
    pub trajectory: Trajectory,
}

struct Profile<'a>(&'a Mink3ProfileParams);

impl OdeSystem for Profile<'_> {
    fn rhs(&mut self, _s: f64, y: &[f64], d: &mut [f64]) -> Result<()> {
        if !(y[0] > 0.0) {
            return Err(Error::Domain {
                label: "alpha > 0".into(),
                x: y.to_vec(),
            });
        }
        d[0] = y[1];
        d[1] = self.0.alpha_second(y[0], y[1]);
        Ok(())
    }
}

/// Integrates the profile equation on `s_span` and rebuilds `y` with
/// `y^3 = (1 - alpha) / b`, `y^1` from `lambda . y = -kappa1^2` and `y^2`
/// from `F(y) = 1`; the sign of `y^2` starts non-negative and then follows
/// continuity. Positions come from a corrected trapezoid rule.
pub fn mink3_profile(params: &Mink3ProfileParams, s_span: (f64, f64), n_samples: usize) -> Result<Mink3Profile> {
    params.validate()?;
    if n_samples < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            have: n_samples,
        });
    }
    let branch = select_lambda(params)?;
    let cfg = IntegratorConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        s_span,
        output_step: (s_span.1 - s_span.0) / (n_samples - 1) as f64,
        ..IntegratorConfig::default()
    };
    cfg.validate()?;
    let (lo, hi) = params.alpha_window();
    let sol = integrate(&mut Profile(params), &[params.alpha0, params.dalpha0], &cfg, |s, y| {
        if y[0] <= lo || y[0] >= hi {
            AfterStep::Stop(Termination::DomainExit { s })
        } else {
            AfterStep::Continue
        }
    });
    let count = sol.s.len();
    let valid_until = sol.termination.stop_s();
    if count < 5 {
        return Err(Error::IntervalExhausted {
            s: valid_until.unwrap_or(s_span.0),
            reason: "alpha left its admissible window".into(),
        });
    }
    let s: Vec<f64> = sol.s[..count].to_vec();
    let alpha: Vec<f64> = sol.y[..count].iter().map(|v| v[0]).collect();
    let dalpha: Vec<f64> = sol.y[..count].iter().map(|v| v[1]).collect();

    let mut ys: Vec<DVector<f64>> = Vec::with_capacity(count);
    for k in 0..count {
        let candidates: Vec<DVector<f64>> = [1.0, -1.0]
            .iter()
            .filter_map(|&sg| branch.velocity(alpha[k], sg))
            .collect();
        if candidates.is_empty() {
            return Err(Error::ReconstructionFailure {
                index: k,
                s: s[k],
                reason: "F(y) = 1 and lambda . y = -kappa1^2 have no real solution".into(),
            });
        }
        let pick = match k {
            0 => candidates[0].clone(),
            1 => nearest(&candidates, &ys[0]),
            _ => nearest(&candidates, &(&ys[k - 1] * 2.0 - &ys[k - 2])),
        };
        ys.push(pick);
    }
    let h = s[1] - s[0];
    let dys = finsler_core::numeric::differentiate(&s, &ys)?;
    let mut xs = vec![DVector::zeros(3)];
    for k in 1..count {
        let step = (&ys[k - 1] + &ys[k]) * (0.5 * h) + (&dys[k - 1] - &dys[k]) * (h * h / 12.0);
        xs.push(&xs[k - 1] + step);
    }
    let engine = mink3_engine(params.b)?;
    let trajectory = Trajectory::lift(&engine, s.clone(), xs, ys, None)?;
    Ok(Mink3Profile {
        s,
        alpha,
        dalpha,
        lambda: DVector::from_vec(vec![branch.l1, 0.0, branch.l3]),
        valid_until,
        trajectory,
    })
}

fn nearest(candidates: &[DVector<f64>], target: &DVector<f64>) -> DVector<f64> {
    candidates
        .iter()
        .min_by(|a, b| (*a - target).norm().total_cmp(&(*b - target).norm()))
        .expect("non-empty")
        .clone()
}
