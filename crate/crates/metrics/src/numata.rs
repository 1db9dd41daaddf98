//! The Randers metric `F = |y| + x.y` on the unit disk: closed-form
//! constant-curvature curves and an audit of its known tensor identities.

use finsler_core::numeric::gauss_legendre;
use finsler_core::{builtin, Error, Finsler, Jet, JetSpace, MetricParams, Result, Scalar, TangentSample};
use finsler_curve::Trajectory;
use nalgebra::{DMatrix, DVector};

pub fn numata_engine() -> Finsler {
    Finsler::new(builtin("numata_disk", &MetricParams::new()).expect("numata_disk has no parameters"))
}

/// `alpha(s) = sqrt(mu s + nu)`, `theta(s) = sign 4 kappa1 / (3 mu) (mu s + nu)^(3/4) + gamma`,
/// `y = alpha (cos theta, sin theta)`, `mu = -8 kappa1^2 / 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumataClosedFormParams {
    pub kappa1: f64,
    pub nu: f64,
    pub gamma_phase: f64,
    pub sign: f64,
    pub x0: [f64; 2],
    /// Move `x0` along `y(0)` until `F(x0, y(0)) = 1` instead of rejecting it.
    pub project_x0: bool,
}

impl Default for NumataClosedFormParams {
    fn default() -> Self {
        NumataClosedFormParams {
            kappa1: 0.1,
            nu: 1.0,
            gamma_phase: 0.0,
            sign: 1.0,
            x0: [0.0, 0.0],
            project_x0: true,
        }
    }
}

impl NumataClosedFormParams {
    pub fn mu(&self) -> f64 {
        -8.0 * self.kappa1 * self.kappa1 / 3.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa1 > 0.0) {
            return Err(Error::InvalidParams("kappa1 must be positive".into()));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParams("nu must be positive".into()));
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(Error::InvalidParams("sign must be +1 or -1".into()));
        }
        Ok(())
    }

    /// End of the interval on which `mu s + nu > 0`.
    pub fn s_limit(&self) -> f64 {
        -self.nu / self.mu()
    }

    pub fn alpha(&self, s: f64) -> f64 {
        (self.mu() * s + self.nu).sqrt()
    }

    pub fn theta(&self, s: f64) -> f64 {
        let mu = self.mu();
        self.sign * 4.0 * self.kappa1 / (3.0 * mu) * (mu * s + self.nu).powf(0.75) + self.gamma_phase
    }

    pub fn velocity(&self, s: f64) -> DVector<f64> {
        let (a, t) = (self.alpha(s), self.theta(s));
        DVector::from_vec(vec![a * t.cos(), a * t.sin()])
    }

    /// `dy/ds` with `alpha' = mu / (2 alpha)` and `theta' = sign kappa1 alpha^(-1/2)`.
    pub fn acceleration(&self, s: f64) -> DVector<f64> {
        let (a, t) = (self.alpha(s), self.theta(s));
        let da = self.mu() / (2.0 * a);
        let dt = self.sign * self.kappa1 / a.sqrt();
        DVector::from_vec(vec![da * t.cos() - a * dt * t.sin(), da * t.sin() + a * dt * t.cos()])
    }

    /// Initial position with `x0 . y(0) = 1 - alpha(0)`.
    pub fn initial_position(&self) -> Result<DVector<f64>> {
        let y0 = self.velocity(0.0);
        let mut x0 = DVector::from_vec(self.x0.to_vec());
        let target = 1.0 - self.alpha(0.0);
        let defect = target - x0.dot(&y0);
        if defect.abs() > 1e-12 {
            if !self.project_x0 {
                return Err(Error::InvalidParams(format!(
                    "x0 . y(0) must equal 1 - alpha(0); off by {defect:e}"
                )));
            }
            x0 += &y0 * (defect / y0.norm_squared());
        }
        if x0.norm() >= 1.0 {
            return Err(Error::IntervalExhausted {
                s: 0.0,
                reason: "initial position outside the unit disk".into(),
            });
        }
        Ok(x0)
    }
}

/// Samples the closed-form curve on `[0, s_end]`, positions by Gauss-Legendre
/// quadrature of the velocity, `u` and `w` by lifting through the engine.
pub fn numata_closed_form(params: &NumataClosedFormParams, n_samples: usize, s_end: f64) -> Result<Trajectory> {
    params.validate()?;
    if n_samples < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            have: n_samples,
        });
    }
    if !(s_end > 0.0) || s_end >= params.s_limit() {
        return Err(Error::IntervalExhausted {
            s: params.s_limit().min(s_end),
            reason: "mu s + nu must stay positive".into(),
        });
    }
    let s: Vec<f64> = (0..n_samples)
        .map(|k| s_end * k as f64 / (n_samples - 1) as f64)
        .collect();
    let mut xs = vec![params.initial_position()?];
    for k in 1..n_samples {
        let step = gauss_legendre(s[k - 1], s[k], |t| params.velocity(t));
        let next = &xs[k - 1] + step;
        if next.norm() >= 1.0 {
            return Err(Error::IntervalExhausted {
                s: s[k],
                reason: "curve left the unit disk".into(),
            });
        }
        xs.push(next);
    }
    let ys = s.iter().map(|&t| params.velocity(t)).collect();
    let dyds = s.iter().map(|&t| params.acceleration(t)).collect();
    Trajectory::lift(&numata_engine(), s, xs, ys, Some(dyds))
}

/// Largest deviations found by [`numata_identity_audit`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumataAudit {
    pub samples: usize,
    /// `|G - alpha^2 / (2F) y|`
    pub spray: f64,
    /// `|K - 3 alpha^4 / (4 F^4)|`
    pub flag_curvature: f64,
    /// `|P + alpha^2 / (2F) C|`
    pub landsberg: f64,
    /// `|g - (F alpha_ij + F_i F_j)|`
    pub metric_split: f64,
    /// `|F_ij - alpha_ij| + |F_ijk - alpha_ijk|`
    pub hessians: f64,
    /// `|C - 1/2 (F_i F_jk + F_j F_ik + F_k F_ij + F F_ijk)|`
    pub cartan_split: f64,
    /// `|alpha alpha_ijk + (alpha_i alpha_jk + alpha_j alpha_ik + alpha_k alpha_ij)|`
    pub alpha_third: f64,
}

impl NumataAudit {
    pub fn max(&self) -> f64 {
        [
            self.spray,
            self.flag_curvature,
            self.landsberg,
            self.metric_split,
            self.hessians,
            self.cartan_split,
            self.alpha_third,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// y-derivatives of `F` and `alpha` up to third order, from jets.
struct VerticalDerivatives {
    f: f64,
    f1: DVector<f64>,
    f2: DMatrix<f64>,
    f3: Vec<f64>,
    a: f64,
    a1: DVector<f64>,
    a2: DMatrix<f64>,
    a3: Vec<f64>,
}

fn vertical_derivatives(x: &DVector<f64>, y: &DVector<f64>) -> VerticalDerivatives {
    let n = y.len();
    let space = JetSpace::shared(n, 3);
    let ys: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, i, y[i])).collect();
    let alpha = ys.iter().fold(Jet::constant(&space, 0.0), |acc, v| acc + v * v).sqrt();
    let beta = ys
        .iter()
        .zip(x.iter())
        .fold(Jet::constant(&space, 0.0), |acc, (v, xi)| acc + v.clone() * *xi);
    let f = &alpha + &beta;
    let e = |dirs: &[usize]| {
        let mut v = vec![0u8; n];
        for &d in dirs {
            v[d] += 1;
        }
        v
    };
    let third = |j: &Jet| {
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out.push(j.partial(&e(&[i, k, l])));
                }
            }
        }
        out
    };
    VerticalDerivatives {
        f: f.value(),
        f1: DVector::from_fn(n, |i, _| f.partial(&e(&[i]))),
        f2: DMatrix::from_fn(n, n, |i, j| f.partial(&e(&[i, j]))),
        f3: third(&f),
        a: alpha.value(),
        a1: DVector::from_fn(n, |i, _| alpha.partial(&e(&[i]))),
        a2: DMatrix::from_fn(n, n, |i, j| alpha.partial(&e(&[i, j]))),
        a3: third(&alpha),
    }
}

/// Checks the spray, flag curvature and Landsberg tensor against their
/// closed forms, and the vertical-derivative identities of the norm, at
/// every sample.
pub fn numata_identity_audit(engine: &Finsler, samples: &[TangentSample]) -> Result<NumataAudit> {
    let mut report = NumataAudit {
        samples: samples.len(),
        ..NumataAudit::default()
    };
    let bump = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for s in samples {
        let n = s.y.len();
        let local = engine.local(s)?;
        let p = &local.point;
        let d = vertical_derivatives(&s.x, &s.y);
        let (f, a) = (d.f, d.a);

        let spray = &s.y * (a * a / (2.0 * f));
        bump(&mut report.spray, (&p.spray - spray).amax());

        let flag = DVector::from_vec(vec![-s.y[1], s.y[0]]);
        let k = local.flag_curvature(&flag, engine.config().tol_symmetry)?;
        bump(&mut report.flag_curvature, (k - 0.75 * a.powi(4) / f.powi(4)).abs());

        let c_low = &p.c_low;
        let p_low = finsler_core::geometry::lower_first(&p.g, &local.curvature.landsberg);
        let ratio = a * a / (2.0 * f);
        let at = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        for i in 0..n {
            for j in 0..n {
                let split = f * d.a2[(i, j)] + d.f1[i] * d.f1[j];
                bump(&mut report.metric_split, (p.g[(i, j)] - split).abs());
                bump(&mut report.hessians, (d.f2[(i, j)] - d.a2[(i, j)]).abs());
                for k in 0..n {
                    bump(
                        &mut report.landsberg,
                        (p_low.get(i, j, k) + ratio * c_low.get(i, j, k)).abs(),
                    );
                    bump(&mut report.hessians, (d.f3[at(i, j, k)] - d.a3[at(i, j, k)]).abs());
                    let cs = 0.5
                        * (d.f1[i] * d.f2[(j, k)]
                            + d.f1[j] * d.f2[(i, k)]
                            + d.f1[k] * d.f2[(i, j)]
                            + f * d.f3[at(i, j, k)]);
                    bump(&mut report.cartan_split, (c_low.get(i, j, k) - cs).abs());
                    let at3 = a * d.a3[at(i, j, k)]
                        + d.a1[i] * d.a2[(j, k)]
                        + d.a1[j] * d.a2[(i, k)]
                        + d.a1[k] * d.a2[(i, j)];
                    bump(&mut report.alpha_third, at3.abs());
                }
            }
        }
    }
    Ok(report)
}
