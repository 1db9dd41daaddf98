#![allow(dead_code)]

use finsler_core::{builtin, Finsler, LocalGeometry, MetricParams, TangentSample, Tensor3};
use finsler_testkit::Sampler;
use nalgebra::{DMatrix, DVector};

/// Test families: `(name, engine, sample generator)`.
pub struct Family {
    pub name: String,
    pub engine: Finsler,
    kind: Kind,
}

#[derive(Clone, Copy)]
enum Kind {
    Whole,
    Disk,
    Randers,
}

pub fn euclidean(n: usize) -> Finsler {
    Finsler::new(builtin("euclidean", &MetricParams::new().number("dim", n as f64)).unwrap())
}

pub fn numata() -> Finsler {
    Finsler::new(builtin("numata_disk", &MetricParams::new()).unwrap())
}

pub fn mink3(b: f64) -> Finsler {
    Finsler::new(builtin("mink3", &MetricParams::new().number("b", b)).unwrap())
}

pub fn sphere(n: usize, radius: f64) -> Finsler {
    Finsler::new(
        builtin(
            "riemannian",
            &MetricParams::new()
                .number("dim", n as f64)
                .text("chart", "sphere")
                .number("radius", radius),
        )
        .unwrap(),
    )
}

pub fn hyperbolic(n: usize) -> Finsler {
    Finsler::new(
        builtin(
            "riemannian",
            &MetricParams::new().number("dim", n as f64).text("chart", "hyperbolic"),
        )
        .unwrap(),
    )
}

/// Randers norm with random `a`, a one-form of `a`-length at most 0.4 at the
/// origin, a small linear slope and a conformal warp, valid on `|x| < 0.5`.
pub fn random_randers(sampler: &mut Sampler, n: usize) -> Finsler {
    let a = sampler.spd(n, 0.5, 2.0);
    let a_inv = a.clone().try_inverse().unwrap();
    let dir = sampler.direction(n);
    let len = (dir.dot(&(&a_inv * &dir))).sqrt();
    let b = dir * (sampler.uniform(0.05, 0.3) / len);
    let slope = DMatrix::from_fn(n, n, |_, _| sampler.uniform(-0.1, 0.1));
    let warp = sampler.uniform(0.0, 0.5);
    let params = MetricParams::new()
        .number("dim", n as f64)
        .list("a", a.transpose().as_slice())
        .list("b", b.as_slice())
        .list("b_slope", slope.transpose().as_slice())
        .number("warp", warp)
        .number("radius", 0.5);
    Finsler::new(builtin("randers", &params).unwrap())
}

impl Family {
    /// The acceptance families: euclidean(2..4), two random Randers norms in
    /// dimensions 2 and 3, numata_disk and mink3 for three values of `b`.
    pub fn all(seed: u64) -> Vec<Family> {
        let mut sampler = Sampler::new(seed);
        let mut out = Vec::new();
        for n in 2..=4 {
            out.push(Family {
                name: format!("euclidean({n})"),
                engine: euclidean(n),
                kind: Kind::Whole,
            });
        }
        for n in [2, 3] {
            out.push(Family {
                name: format!("randers({n})"),
                engine: random_randers(&mut sampler, n),
                kind: Kind::Randers,
            });
        }
        out.push(Family {
            name: "numata_disk".into(),
            engine: numata(),
            kind: Kind::Disk,
        });
        for b in [0.3, 0.5, 0.7] {
            out.push(Family {
                name: format!("mink3({b})"),
                engine: mink3(b),
                kind: Kind::Whole,
            });
        }
        out
    }

    pub fn sample(&self, sampler: &mut Sampler) -> TangentSample {
        let n = self.engine.dim();
        let x = match self.kind {
            Kind::Whole => sampler.vector(n, -2.0, 2.0),
            Kind::Disk => sampler.in_ball(n, 0.45),
            Kind::Randers => sampler.in_ball(n, 0.45),
        };
        TangentSample::from_vectors(&x, &sampler.tangent(n, 0.5, 2.0))
    }
}

/// `max |a - b| / max(1, max |b|)`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs())) / scale
}

/// Degree-`d` homogeneity defect of every tensor under `y -> lambda y`.
pub fn homogeneity_defect(engine: &Finsler, s: &TangentSample, lambda: f64) -> f64 {
    let scaled = TangentSample::from_vectors(&s.x, &(&s.y * lambda));
    let a = engine.local(s).unwrap();
    let b = engine.local(&scaled).unwrap();
    let f_a = engine.eval_f(s).unwrap();
    let f_b = engine.eval_f(&scaled).unwrap();
    let scale = |v: &[f64], k: f64| v.iter().map(|x| x * k).collect::<Vec<_>>();
    let l = lambda;
    [
        rel_diff(&[f_b], &[l * f_a]),
        rel_diff(b.point.g.as_slice(), a.point.g.as_slice()),
        rel_diff(b.point.c_low.as_slice(), &scale(a.point.c_low.as_slice(), 1.0 / l)),
        rel_diff(b.point.spray.as_slice(), &scale(a.point.spray.as_slice(), l * l)),
        rel_diff(b.point.nonlinear.as_slice(), &scale(a.point.nonlinear.as_slice(), l)),
        rel_diff(b.point.gamma.as_slice(), a.point.gamma.as_slice()),
        rel_diff(b.curvature.r3.as_slice(), &scale(a.curvature.r3.as_slice(), l)),
        rel_diff(
            b.curvature.jacobi.as_slice(),
            &scale(a.curvature.jacobi.as_slice(), l * l),
        ),
        rel_diff(b.curvature.landsberg.as_slice(), a.curvature.landsberg.as_slice()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Largest deviation from total symmetry of a fully lowered 3-tensor.
pub fn symmetry_defect(t: &Tensor3) -> f64 {
    let n = t.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = t.get(i, j, k);
                for w in [t.get(j, i, k), t.get(i, k, j), t.get(k, j, i)] {
                    worst = worst.max((v - w).abs());
                }
            }
        }
    }
    worst
}

/// `max_ij |T_ijk y^k|`, with `y` contracted into every slot in turn.
pub fn annihilation_defect(t: &Tensor3, y: &DVector<f64>) -> f64 {
    let n = t.dim();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
            for k in 0..n {
                s1 += t.get(k, a, b) * y[k];
                s2 += t.get(a, k, b) * y[k];
                s3 += t.get(a, b, k) * y[k];
            }
            worst = worst.max(s1.abs()).max(s2.abs()).max(s3.abs());
        }
    }
    worst
}

/// `g_ik R^k_j - g_jk R^k_i`.
pub fn jacobi_symmetry_defect(local: &LocalGeometry) -> f64 {
    let lowered = &local.point.g * &local.curvature.jacobi;
    (&lowered - lowered.transpose()).amax()
}

/// `delta_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il`.
pub fn compatibility_defect(local: &LocalGeometry) -> f64 {
    let p = &local.point;
    let n = p.g.nrows();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = p.delta_g.get(k, i, j);
                for l in 0..n {
                    v -= p.gamma.get(l, k, i) * p.g[(l, j)] + p.gamma.get(l, k, j) * p.g[(i, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

pub fn lowered_landsberg(local: &LocalGeometry) -> Tensor3 {
    finsler_core::geometry::lower_first(&local.point.g, &local.curvature.landsberg)
}
