use std::f64::consts::PI;

use finsler_core::{builtin, Error, Finsler, MetricParams, TangentSample};
use finsler_curve::*;
use finsler_testkit::{derivative, simpson, Sampler};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn engine(name: &str, params: MetricParams) -> Finsler {
    Finsler::new(builtin(name, &params).unwrap())
}

fn euclidean(n: usize) -> Finsler {
    engine("euclidean", MetricParams::new().number("dim", n as f64))
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn v2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b])
}

fn circle(r: f64, n: usize) -> (Vec<f64>, Vec<DVector<f64>>, Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let s = grid(0.0, 2.0 * PI * r, n);
    let xs = s.iter().map(|t| v2(r * (t / r).cos(), r * (t / r).sin())).collect();
    let ys = s.iter().map(|t| v2(-(t / r).sin(), (t / r).cos())).collect();
    let dys = s.iter().map(|t| v2(-(t / r).cos() / r, -(t / r).sin() / r)).collect();
    (s, xs, ys, dys)
}

#[test]
fn euclidean_circle_has_curvature_inverse_radius() {
    let e = euclidean(2);
    for r in [0.5, 1.0, 3.0] {
        let (s, xs, ys, dys) = circle(r, 401);
        let traj = Trajectory::lift(&e, s, xs, ys, Some(dys)).unwrap();
        for d in &traj.diagnostics {
            assert!((d.kappa1 - 1.0 / r).abs() <= 1e-12);
            assert!((d.f - 1.0).abs() <= 1e-14);
        }
        // D^3 T = -kappa^2 T' for a circle, so |tau2| = 1 / r^3
        let mid = &traj.diagnostics[200];
        assert!(
            (mid.tau2_norm - r.powi(-3)).abs() <= 1e-6 * r.powi(-3),
            "{}",
            mid.tau2_norm
        );
        let (e1, e2) = bienergy(&e, &traj).unwrap();
        assert!((e1 - PI * r).abs() <= 1e-10);
        assert!((e2 - PI / r).abs() <= 1e-10);
    }
}

#[test]
fn helix_frenet_frame_recovers_curvature_and_torsion() {
    let e = euclidean(3);
    let (a, c) = (2.0f64, 0.5f64);
    let speed = (a * a + c * c).sqrt();
    let (kappa, torsion) = (a / (speed * speed), c / (speed * speed));
    for t in [0.0, 0.7, 2.0] {
        let q = t / speed;
        let x = DVector::from_vec(vec![a * q.cos(), a * q.sin(), c * q]);
        let y = DVector::from_vec(vec![-a * q.sin() / speed, a * q.cos() / speed, c / speed]);
        let u = DVector::from_vec(vec![-a * q.cos(), -a * q.sin(), 0.0]) / (speed * speed);
        let w = DVector::from_vec(vec![a * q.sin(), -a * q.cos(), 0.0]) / speed.powi(3);
        let frame = frenet_frame(&e, &x, &y, &[u, w]).unwrap();
        assert_eq!(frame.vectors.len(), 3);
        assert!(!frame.truncated);
        assert!((frame.curvatures[0] - kappa).abs() <= 1e-12);
        assert!((frame.curvatures[1] - torsion).abs() <= 1e-12);
    }
}

#[test]
fn straight_line_frame_is_truncated() {
    let e = euclidean(3);
    let y = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let frame = frenet_frame(&e, &DVector::zeros(3), &y, &[DVector::zeros(3)]).unwrap();
    assert_eq!(frame.vectors.len(), 1);
    assert!(frame.truncated);
    assert!(frame.curvatures.is_empty());
}

#[test]
fn sphere_great_circle_has_zero_tension_and_bitension() {
    // the x1-axis of the stereographic chart, unit speed: x1 = tan(s/2)
    let e = engine("riemannian", MetricParams::new().number("dim", 2.0));
    for s in [-0.8, 0.0, 0.4, 1.1] {
        let x = v2((s / 2.0_f64).tan(), 0.0);
        let c = (s / 2.0_f64).cos();
        let y = v2(0.5 / (c * c), 0.0);
        let dy = v2(0.5 * (s / 2.0_f64).tan() / (c * c), 0.0);
        let tau = tension(&e, &x, &y, &dy).unwrap();
        assert!(tau.amax() <= 1e-12, "{tau}");
        let state = CurveState::geodesic(x, y);
        let rep = bitension(&e, &state, &DVector::zeros(2)).unwrap();
        assert!(rep.norm_tau2 <= 1e-12);
        assert!(rep.is_unit_speed(1e-12));
    }
}

#[test]
fn geodesic_states_have_zero_bitension_on_every_builtin() {
    let mut sampler = Sampler::new(41);
    let engines = [
        euclidean(3),
        engine(
            "riemannian",
            MetricParams::new().number("dim", 3.0).text("chart", "hyperbolic"),
        ),
        engine("numata_disk", MetricParams::new()),
        engine("mink3", MetricParams::new().number("b", 0.5)),
        engine(
            "randers",
            MetricParams::new()
                .list("b", &[0.2, -0.1])
                .list("b_slope", &[0.1, 0.0, 0.0, -0.1])
                .number("radius", 0.5),
        ),
    ];
    for e in &engines {
        let n = e.dim();
        for _ in 0..10 {
            let x = sampler.in_ball(n, 0.4);
            let y = sampler.direction(n);
            let f = e.eval_f(&TangentSample::from_vectors(&x, &y)).unwrap();
            let state = CurveState::geodesic(x, y / f);
            let rep = bitension(e, &state, &DVector::zeros(n)).unwrap();
            assert!(rep.norm_tau2 <= 1e-8, "{}", e.metric().label());
        }
    }
}

#[test]
fn minkowski_plane_residual_is_kappa_squared() {
    let e = engine("randers", MetricParams::new().list("b", &[0.3, 0.2]));
    let mut sampler = Sampler::new(42);
    for kappa in [0.1, 1.0, 3.0] {
        for _ in 0..5 {
            let x = sampler.vector(2, -3.0, 3.0);
            let y = sampler.direction(2);
            let hint = sampler.direction(2);
            let r = residual_2d(&e, &x, &y, kappa, &hint).unwrap();
            assert!((r - kappa * kappa).abs() <= 1e-10 * kappa * kappa);
        }
    }
    let e3 = euclidean(3);
    let z = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    assert!(matches!(
        residual_2d(&e3, &z, &z, 1.0, &z),
        Err(Error::Dimension { required: 2, got: 3 })
    ));
    assert!(matches!(
        residual_2d(&e, &v2(0.0, 0.0), &v2(1.0, 0.0), 1.0, &v2(2.0, 0.0)),
        Err(Error::DegenerateHint(_))
    ));
}

/// `x(s) = (s, a s^5 + b s^2)` on `[0, 1]` and the field `V = s^3 (1 - s)^3 c`.
struct Quintic {
    a: f64,
    b: f64,
    c: [f64; 2],
}

impl Quintic {
    fn x(&self, s: f64) -> DVector<f64> {
        v2(0.1 + 0.3 * s, 0.1 * s + self.a * s.powi(5) + self.b * s * s)
    }
    fn y(&self, s: f64) -> DVector<f64> {
        v2(0.3, 0.1 + 5.0 * self.a * s.powi(4) + 2.0 * self.b * s)
    }
    fn dy(&self, s: f64) -> DVector<f64> {
        v2(0.0, 20.0 * self.a * s.powi(3) + 2.0 * self.b)
    }
    fn bump(&self, s: f64) -> [f64; 3] {
        let p = s.powi(3) * (1.0 - s).powi(3);
        let dp = 3.0 * s * s * (1.0 - s).powi(2) * (1.0 - 2.0 * s);
        let d2p = 6.0 * s * (1.0 - s) * (1.0 - 5.0 * s + 5.0 * s * s);
        [p, dp, d2p]
    }
    fn variation(&self, s: &[f64]) -> Variation {
        let c = v2(self.c[0], self.c[1]);
        let pick = |i: usize| s.iter().map(|t| &c * self.bump(*t)[i]).collect::<Vec<_>>();
        Variation {
            v: pick(0),
            derivatives: Some((pick(1), pick(2))),
        }
    }
    fn trajectory(&self, e: &Finsler, s: &[f64]) -> Trajectory {
        let xs = s.iter().map(|t| self.x(*t)).collect();
        let ys = s.iter().map(|t| self.y(*t)).collect();
        let dys = s.iter().map(|t| self.dy(*t)).collect();
        Trajectory::lift(e, s.to_vec(), xs, ys, Some(dys)).unwrap()
    }
}

#[test]
fn euclidean_first_variation_matches_integration_by_parts() {
    let e = euclidean(2);
    let s = grid(0.0, 1.0, 801);
    let curve = Quintic {
        a: 0.4,
        b: -0.3,
        c: [0.7, -1.2],
    };
    let traj = curve.trajectory(&e, &s);
    let (lhs, rhs) = first_variation_check(&e, &traj, &curve.variation(&s)).unwrap();
    // tau2 = x'''' = (0, 120 a s) in the plane
    let oracle = simpson(|t| 120.0 * curve.a * t * curve.c[1] * curve.bump(t)[0], 0.0, 1.0, 2000);
    assert!((lhs - oracle).abs() <= 1e-6 * oracle.abs(), "{lhs} vs {oracle}");
    assert!((rhs - oracle).abs() <= 1e-4 * oracle.abs(), "{rhs} vs {oracle}");
}

#[test]
fn numata_first_variation_identity() {
    let e = engine("numata_disk", MetricParams::new());
    let s = grid(0.0, 1.0, 801);
    for (k, c) in [[1.0, 0.0], [0.3, -0.8], [-0.5, 0.5]].into_iter().enumerate() {
        let curve = Quintic {
            a: 0.2,
            b: 0.1 * k as f64,
            c,
        };
        let traj = curve.trajectory(&e, &s);
        let (lhs, rhs) = first_variation_check(&e, &traj, &curve.variation(&s)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-3 * lhs.abs(), "{lhs} vs {rhs}");
    }
}

#[test]
fn covariant_derivative_is_metric_along_curves() {
    // d/ds g_T(V, W) = g_T(DV, W) + g_T(V, DW) with T the reference vector
    let e = engine("numata_disk", MetricParams::new());
    let curve = Quintic {
        a: 0.3,
        b: 0.2,
        c: [0.0, 0.0],
    };
    let v = |s: f64| v2(s.cos(), 0.5 * s);
    let dv = |s: f64| v2(-s.sin(), 0.5);
    let w = |s: f64| v2(1.0 + s * s, -0.3);
    let dw = |s: f64| v2(2.0 * s, 0.0);
    let inner = |s: f64| {
        let (g, _) = e
            .metric_tensor(&TangentSample::from_vectors(&curve.x(s), &curve.y(s)))
            .unwrap();
        v(s).dot(&(&g * w(s)))
    };
    for s in [0.1, 0.5, 0.9] {
        let state = {
            let p = e
                .spray_and_connection(&TangentSample::from_vectors(&curve.x(s), &curve.y(s)))
                .unwrap();
            let u = curve.dy(s) + &p.nonlinear * curve.y(s);
            CurveState::new(curve.x(s), curve.y(s), u, DVector::zeros(2))
        };
        let (g, _) = e.metric_tensor(&state.sample()).unwrap();
        let dvv = covariant_derivative_along(&e, &state, &v(s), &dv(s)).unwrap();
        let dww = covariant_derivative_along(&e, &state, &w(s), &dw(s)).unwrap();
        let rhs = dvv.dot(&(&g * w(s))) + v(s).dot(&(&g * dww));
        let lhs = derivative(inner, s, 1e-3);
        assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
    }
}

#[test]
fn short_or_irregular_inputs_are_rejected() {
    let e = euclidean(2);
    let s = grid(0.0, 1.0, 4);
    let xs: Vec<_> = s.iter().map(|t| v2(*t, 0.0)).collect();
    let ys: Vec<_> = s.iter().map(|_| v2(1.0, 0.0)).collect();
    assert!(matches!(
        Trajectory::lift(&e, s.clone(), xs.clone(), ys.clone(), None),
        Err(Error::InsufficientSamples { .. })
    ));
    let states = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| CurveState::geodesic(x.clone(), y.clone()))
        .collect();
    let traj = Trajectory::from_states(&e, s.clone(), states).unwrap();
    assert!(traj.diagnostics.iter().all(|d| d.tau2_norm.is_nan() && d.kappa1 == 0.0));
    assert!(traj.bitension_reports(&e).is_err());
    let uneven = vec![0.0, 0.1, 0.3, 0.35, 0.9];
    let xs: Vec<_> = uneven.iter().map(|t| v2(*t, 0.0)).collect();
    let ys: Vec<_> = uneven.iter().map(|_| v2(1.0, 0.0)).collect();
    let traj = Trajectory::lift(&e, uneven, xs, ys, None).unwrap();
    assert!(bienergy(&e, &traj).is_err());
}

proptest! {
    #[test]
    fn gram_schmidt_is_orthonormal_in_g(seed in any::<u64>(), n in 2usize..5) {
        let mut sampler = Sampler::new(seed);
        let g = sampler.spd(n, 0.3, 3.0);
        let vs: Vec<_> = (0..n).map(|_| sampler.vector(n, -1.0, 1.0)).collect();
        let frame = gram_schmidt(&g, &vs, 1e-10);
        let gram = DMatrix::from_fn(frame.len(), frame.len(), |i, j| frame[i].dot(&(&g * &frame[j])));
        prop_assert!((gram - DMatrix::identity(frame.len(), frame.len())).amax() <= 1e-10);
    }

    #[test]
    fn curve_state_flattening_round_trips(values in proptest::collection::vec(-10.0f64..10.0, 12)) {
        let state = CurveState::from_flat(&values);
        prop_assert_eq!(state.dim(), 3);
        prop_assert_eq!(state.to_flat(), values);
    }

    #[test]
    fn tension_is_linear_in_acceleration(seed in any::<u64>()) {
        let e = engine("numata_disk", MetricParams::new());
        let mut sampler = Sampler::new(seed);
        let x = sampler.in_ball(2, 0.5);
        let y = sampler.direction(2);
        let (a, b) = (sampler.vector(2, -1.0, 1.0), sampler.vector(2, -1.0, 1.0));
        let t0 = tension(&e, &x, &y, &DVector::zeros(2)).unwrap();
        let ta = tension(&e, &x, &y, &a).unwrap();
        let tab = tension(&e, &x, &y, &(&a + &b)).unwrap();
        prop_assert!((&tab - &ta - &b).amax() <= 1e-12);
        prop_assert!((&ta - &t0 - &a).amax() <= 1e-12);
    }
}
