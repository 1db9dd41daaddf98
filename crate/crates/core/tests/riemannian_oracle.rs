mod common;

use common::*;
use finsler_core::{Finsler, TangentSample};
use finsler_testkit::{christoffel, riemann, riemann_apply, Sampler};
use nalgebra::{DMatrix, DVector};

fn sphere_field(radius: f64) -> impl Fn(&[f64]) -> DMatrix<f64> {
    move |x: &[f64]| {
        let n = x.len();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let c = 2.0 * radius / (1.0 + r2);
        DMatrix::identity(n, n) * (c * c)
    }
}

fn ball_field(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let c = 2.0 / (1.0 - r2);
    DMatrix::identity(n, n) * (c * c)
}

fn check_chart<A: Fn(&[f64]) -> DMatrix<f64>>(engine: &Finsler, field: A, samples: &[TangentSample]) {
    let n = engine.dim();
    for s in samples {
        let local = engine.local(s).unwrap();
        let p = &local.point;
        assert!(p.c_low.max_abs() <= 1e-10, "C = {:e}", p.c_low.max_abs());
        assert!(local.curvature.landsberg.max_abs() <= 1e-10);
        let mut sampler = Sampler::new(n as u64);
        for _ in 0..3 {
            let (u, v) = (sampler.direction(n), sampler.direction(n));
            assert!(local.c_tilde(&u, &v, &s.y).amax() <= 1e-10);
        }

        let oracle = christoffel(&field, s.x.as_slice(), 1e-3);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d = (p.gamma.get(i, j, k) - oracle[i][(j, k)]).abs();
                    assert!(d <= 1e-6, "Gamma^{i}_{j}{k} off by {d:e}");
                }
            }
        }

        let riem = riemann(&field, s.x.as_slice(), 1e-3);
        let a = field(s.x.as_slice());
        for _ in 0..4 {
            let x = sampler.direction(n);
            // sign fixed by the oracle: <R(X, y) y, X> is the sectional numerator
            let expected = -riem_apply_inner(&riem, &a, &x, &s.y);
            let got = local.f_operator(&x);
            assert!(
                (got - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
                "{got} vs {expected}"
            );
        }
    }
}

fn riem_apply_inner(riem: &[f64], a: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let v = riemann_apply(riem, x.len(), x, y, y);
    x.dot(&(a * v))
}

fn samples(n: usize, radius: f64, seed: u64) -> Vec<TangentSample> {
    let mut sampler = Sampler::new(seed);
    (0..10)
        .map(|_| TangentSample::from_vectors(&sampler.in_ball(n, radius), &sampler.tangent(n, 0.5, 2.0)))
        .collect()
}

#[test]
fn sphere_chart_matches_levi_civita_oracle() {
    for n in [2, 3] {
        check_chart(&sphere(n, 1.0), sphere_field(1.0), &samples(n, 1.5, 1));
        check_chart(&sphere(n, 2.0), sphere_field(2.0), &samples(n, 1.5, 2));
    }
}

#[test]
fn hyperbolic_chart_matches_levi_civita_oracle() {
    for n in [2, 3] {
        check_chart(&hyperbolic(n), ball_field, &samples(n, 0.6, 3));
    }
}

#[test]
fn sphere_flag_curvature_is_inverse_radius_squared() {
    for radius in [1.0, 0.5, 3.0] {
        let engine = sphere(3, radius);
        let mut sampler = Sampler::new(5);
        for s in samples(3, 1.0, 9) {
            let flag = sampler.direction(3);
            let k = engine.flag_curvature(&s, &flag).unwrap();
            assert!((k - 1.0 / (radius * radius)).abs() <= 1e-9, "K = {k}");
        }
    }
}

#[test]
fn hyperbolic_flag_curvature_is_minus_one() {
    let engine = hyperbolic(2);
    for s in samples(2, 0.7, 4) {
        let flag = DVector::from_vec(vec![-s.y[1], s.y[0]]);
        assert!((engine.flag_curvature(&s, &flag).unwrap() + 1.0).abs() <= 1e-9);
    }
}

#[test]
fn f_operator_on_sphere_is_minus_curvature_times_area() {
    // F(X) = -K (g(y, y) g(X, X) - g(y, X)^2) in constant curvature K
    let engine = sphere(3, 1.0);
    let mut sampler = Sampler::new(8);
    for s in samples(3, 1.0, 6) {
        let (g, _) = engine.metric_tensor(&s).unwrap();
        let x = sampler.direction(3);
        let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&g * b));
        let area = ip(&s.y, &s.y) * ip(&x, &x) - ip(&s.y, &x).powi(2);
        let got = engine.f_operator(&s, &x).unwrap();
        assert!((got + area).abs() <= 1e-9 * (1.0 + area), "{got} vs {}", -area);
    }
}

#[test]
fn euclidean_space_is_flat() {
    for n in 2..=4 {
        let engine = euclidean(n);
        for s in samples(n, 3.0, n as u64) {
            let local = engine.local(&s).unwrap();
            assert!((&local.point.g - DMatrix::identity(n, n)).amax() <= 1e-14);
            assert!(local.point.spray.amax() <= 1e-14);
            assert!(local.point.gamma.max_abs() <= 1e-14);
            assert!(local.curvature.r3.max_abs() <= 1e-14);
        }
    }
}
