use finsler_core::{builtin, Error, Finsler, MetricParams, TangentSample};
use finsler_curve::CurveState;
use finsler_solvers::*;
use finsler_testkit::Sampler;
use nalgebra::DVector;

fn engine(name: &str, params: MetricParams) -> Finsler {
    Finsler::new(builtin(name, &params).unwrap())
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn unit(e: &Finsler, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    y / e.eval_f(&TangentSample::from_vectors(x, y)).unwrap()
}

#[test]
fn euclidean_geodesic_is_a_unit_speed_line() {
    let e = engine("euclidean", MetricParams::new().number("dim", 2.0));
    let run = integrate_geodesic(&e, &dv(&[0.0, 0.0]), &dv(&[1.0, 0.0]), &IntegratorConfig::default()).unwrap();
    assert!(run.termination.is_completed());
    let last = run.trajectory.last().unwrap();
    assert!((&last.x - dv(&[1.0, 0.0])).amax() <= 1e-14);
    assert_eq!(run.trajectory.len(), 101);
    assert!(run.trajectory.max_f_drift() <= 1e-15);
    for (k, s) in run.trajectory.s.iter().enumerate() {
        assert!((s - 0.01 * k as f64).abs() <= 1e-12);
    }
}

#[test]
fn minkowski_geodesics_are_straight_lines() {
    let mut sampler = Sampler::new(51);
    for b in [0.3, 0.5, 0.7] {
        let e = engine("mink3", MetricParams::new().number("b", b));
        for _ in 0..3 {
            let x0 = sampler.vector(3, -1.0, 1.0);
            let y0 = unit(&e, &x0, &sampler.direction(3));
            let run = integrate_geodesic(&e, &x0, &y0, &IntegratorConfig::default()).unwrap();
            for (s, st) in run.trajectory.s.iter().zip(&run.trajectory.states) {
                assert!((&st.x - (&x0 + &y0 * *s)).amax() <= 1e-12);
                assert!((&st.y - &y0).amax() <= 1e-12);
            }
        }
    }
}

#[test]
fn numata_geodesics_stay_on_their_initial_line() {
    // the spray is parallel to y, so geodesics are reparametrized straight lines
    let e = engine("numata_disk", MetricParams::new());
    let mut sampler = Sampler::new(52);
    for _ in 0..5 {
        let x0 = sampler.in_ball(2, 0.3);
        let y0 = unit(&e, &x0, &sampler.direction(2));
        let cfg = IntegratorConfig::default().with_span(0.0, 0.3);
        let run = integrate_geodesic(&e, &x0, &y0, &cfg).unwrap();
        assert!(!run.trajectory.is_empty());
        for st in &run.trajectory.states {
            let d = &st.x - &x0;
            let cross = d[0] * y0[1] - d[1] * y0[0];
            assert!(cross.abs() <= 1e-10, "{cross:e}");
            assert!((e.eval_f(&st.sample()).unwrap() - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn sphere_geodesic_matches_the_great_circle() {
    let e = engine("riemannian", MetricParams::new().number("dim", 2.0));
    let cfg = IntegratorConfig::default().with_span(0.0, 2.0);
    let run = integrate_geodesic(&e, &dv(&[0.0, 0.0]), &dv(&[0.5, 0.0]), &cfg).unwrap();
    assert!(run.termination.is_completed());
    for (s, st) in run.trajectory.s.iter().zip(&run.trajectory.states) {
        assert!((st.x[0] - (s / 2.0).tan()).abs() <= 1e-9);
        assert!(st.x[1].abs() <= 1e-14);
    }
}

#[test]
fn tightening_tolerance_reduces_the_error() {
    let e = engine("riemannian", MetricParams::new().number("dim", 2.0));
    let error = |tol: f64| {
        let cfg = IntegratorConfig {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            max_step: 1.0,
            dense_output: false,
            ..IntegratorConfig::default().with_span(0.0, 2.5)
        };
        let run = integrate_geodesic(&e, &dv(&[0.0, 0.0]), &dv(&[0.3, 0.4]), &cfg).unwrap();
        let last = run.trajectory.last().unwrap();
        // the chart-radius along the great circle through the origin is tan(s/2)
        ((last.x.norm() - (1.25f64).tan()).abs(), run.stats.accepted)
    };
    let (coarse, n_coarse) = error(1e-6);
    let (fine, n_fine) = error(1e-10);
    assert!(fine < coarse * 1e-2, "{coarse:e} -> {fine:e}");
    assert!(n_fine > n_coarse);
}

#[test]
fn geodesic_data_stays_geodesic_under_the_biharmonic_flow() {
    let mut sampler = Sampler::new(53);
    let engines = [
        engine("numata_disk", MetricParams::new()),
        engine("mink3", MetricParams::new().number("b", 0.5)),
        engine(
            "riemannian",
            MetricParams::new().number("dim", 3.0).text("chart", "hyperbolic"),
        ),
    ];
    for e in &engines {
        let n = e.dim();
        let x0 = sampler.in_ball(n, 0.2);
        let y0 = unit(e, &x0, &sampler.direction(n));
        let cfg = IntegratorConfig::default().with_span(0.0, 0.5);
        let geo = integrate_geodesic(e, &x0, &y0, &cfg).unwrap();
        let (bi, report) = integrate_biharmonic(e, &CurveState::geodesic(x0.clone(), y0.clone()), &cfg).unwrap();
        assert_eq!(geo.trajectory.len(), bi.trajectory.len());
        for (a, b) in geo.trajectory.states.iter().zip(&bi.trajectory.states) {
            assert!((&a.x - &b.x).amax() <= 1e-8);
            assert!(b.u.amax() == 0.0 && b.w.amax() == 0.0);
        }
        assert_eq!(report.kappa1_relative_spread, 0.0);
    }
}

#[test]
fn euclidean_biharmonic_flow_is_a_cubic() {
    // N = C = R = P = 0: x''' = w stays constant, so x is a cubic in s
    let e = engine("euclidean", MetricParams::new().number("dim", 2.0));
    let (x0, y0) = (dv(&[0.0, 0.0]), dv(&[1.0, 0.0]));
    let init = make_biharmonic_initial(&e, &x0, &y0, 0.2, &dv(&[0.0, 1.0]), 0.0, None).unwrap();
    let cfg = IntegratorConfig {
        max_f_drift: 10.0,
        ..IntegratorConfig::default()
    };
    let (run, _) = integrate_biharmonic(&e, &init, &cfg).unwrap();
    assert!(run.termination.is_completed());
    for (s, st) in run.trajectory.s.iter().zip(&run.trajectory.states) {
        let cubic = &x0 + &y0 * *s + &init.u * (s * s / 2.0) + &init.w * (s.powi(3) / 6.0);
        assert!((&st.x - cubic).amax() <= 1e-12);
    }
}

#[test]
fn speed_drift_stops_the_run_and_keeps_the_prefix() {
    let e = engine("euclidean", MetricParams::new().number("dim", 2.0));
    let init =
        make_biharmonic_initial(&e, &dv(&[0.0, 0.0]), &dv(&[1.0, 0.0]), 1.0, &dv(&[0.0, 1.0]), 0.0, None).unwrap();
    let (run, report) = integrate_biharmonic(&e, &init, &IntegratorConfig::default()).unwrap();
    match run.termination {
        Termination::AdmissibilityLost { s, drift } => {
            assert!(s > 0.0 && s < 1.0);
            assert!(drift > 1e-4);
        }
        other => panic!("expected admissibility loss, got {other:?}"),
    }
    assert!(run.trajectory.len() >= 2);
    assert!(report.f_drift <= 1e-4);
}

#[test]
fn renormalized_runs_hold_unit_speed() {
    let e = engine("numata_disk", MetricParams::new());
    let x0 = dv(&[0.1, 0.0]);
    let y0 = unit(&e, &x0, &dv(&[0.0, 1.0]));
    let cfg = IntegratorConfig {
        renormalize: true,
        ..IntegratorConfig::default().with_span(0.0, 0.5)
    };
    let run = integrate_geodesic(&e, &x0, &(&y0 * 3.0), &cfg).unwrap();
    assert!(run.trajectory.max_f_drift() <= 1e-12);
}

#[test]
fn leaving_the_disk_is_a_domain_exit_with_prefix() {
    let e = engine("numata_disk", MetricParams::new());
    let x0 = dv(&[0.6, 0.0]);
    let y0 = unit(&e, &x0, &dv(&[1.0, 0.0]));
    let run = integrate_geodesic(&e, &x0, &y0, &IntegratorConfig::default().with_span(0.0, 5.0)).unwrap();
    let Termination::DomainExit { s } = run.termination else {
        panic!("expected domain exit, got {:?}", run.termination);
    };
    assert!(s < 5.0);
    let last = run.trajectory.last().unwrap();
    assert!(last.x.norm() < 1.0 && last.x.norm() > 0.6);
}

#[test]
fn frenet_initial_data_is_admissible() {
    let e = engine("mink3", MetricParams::new().number("b", 0.5));
    let x0 = DVector::zeros(3);
    let y0 = unit(&e, &x0, &dv(&[0.6, 0.0, 0.8]));
    let st = make_biharmonic_initial(&e, &x0, &y0, 0.5, &dv(&[0.0, 1.0, 0.0]), 0.3, None).unwrap();
    let (g, _) = e.metric_tensor(&st.sample()).unwrap();
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&g * b));
    assert!(ip(&st.y, &st.u).abs() <= 1e-12);
    assert!((ip(&st.u, &st.u) - 0.25).abs() <= 1e-12);
    assert!((ip(&st.w, &st.y) + 0.25).abs() <= 1e-12);
    assert!(ip(&st.w, &st.u).abs() <= 1e-12);
    assert!((ip(&st.w, &st.w) - (0.25f64 * 0.25 + 0.25 * 0.09)).abs() <= 1e-12);
}

#[test]
fn invalid_inputs_are_rejected() {
    let e = engine("numata_disk", MetricParams::new());
    let (x0, y0) = (dv(&[0.0, 0.0]), dv(&[1.0, 0.0]));
    let hint = dv(&[0.0, 1.0]);
    assert!(matches!(
        make_biharmonic_initial(&e, &x0, &dv(&[2.0, 0.0]), 0.1, &hint, 0.0, None),
        Err(Error::NotAdmissible(_))
    ));
    assert!(matches!(
        make_biharmonic_initial(&e, &x0, &y0, 0.1, &dv(&[3.0, 0.0]), 0.0, None),
        Err(Error::DegenerateHint(_))
    ));
    assert!(matches!(
        make_biharmonic_initial(&e, &x0, &y0, 0.1, &hint, 0.5, None),
        Err(Error::InvalidParams(_))
    ));
    assert!(matches!(
        make_biharmonic_initial(&e, &x0, &y0, 0.1, &dv(&[0.0, 1.0, 0.0]), 0.0, None),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        integrate_geodesic(&e, &x0, &dv(&[0.5, 0.0]), &IntegratorConfig::default()),
        Err(Error::NotAdmissible(_))
    ));
    let bad_state = CurveState::new(x0.clone(), y0.clone(), y0.clone(), DVector::zeros(2));
    assert!(matches!(
        integrate_biharmonic(&e, &bad_state, &IntegratorConfig::default()),
        Err(Error::NotAdmissible(_))
    ));
    for cfg in [
        IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        },
        IntegratorConfig {
            min_step: 1.0,
            ..Default::default()
        },
        IntegratorConfig::default().with_span(1.0, 0.0),
        IntegratorConfig {
            output_step: -1.0,
            ..Default::default()
        },
        IntegratorConfig {
            max_steps: 0,
            ..Default::default()
        },
    ] {
        assert!(matches!(
            integrate_geodesic(&e, &x0, &y0, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }
    let tiny = IntegratorConfig {
        max_steps: 3,
        ..Default::default()
    };
    let run = integrate_geodesic(&e, &x0, &y0, &tiny).unwrap();
    assert!(matches!(run.termination, Termination::MaxSteps { .. }));
}

#[test]
fn minkowski_first_integral_is_conserved_by_the_flow() {
    let e = engine("mink3", MetricParams::new().number("b", 0.3));
    let x0 = DVector::zeros(3);
    let y0 = unit(&e, &x0, &dv(&[0.0, 0.6, 0.8]));
    let init = make_biharmonic_initial(&e, &x0, &y0, 0.4, &dv(&[1.0, 0.0, 0.0]), 0.2, None).unwrap();
    let (run, report) = integrate_biharmonic(&e, &init, &IntegratorConfig::default()).unwrap();
    assert!(run.trajectory.len() > 5);
    let range = report.max_lambda_range().unwrap();
    assert!(range <= 1e-9, "{range:e}");
}

#[test]
fn runs_are_deterministic_across_threads() {
    let e = engine("numata_disk", MetricParams::new());
    let x0 = dv(&[0.1, 0.1]);
    let y0 = unit(&e, &x0, &dv(&[0.3, 1.0]));
    let init = make_biharmonic_initial(&e, &x0, &y0, 0.1, &dv(&[1.0, 0.0]), 0.0, None).unwrap();
    let cfg = IntegratorConfig::default().with_span(0.0, 0.3);
    let reference = integrate_biharmonic(&e, &init, &cfg).unwrap().0;
    let others: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..4)
            .map(|_| scope.spawn(|| integrate_biharmonic(&e, &init, &cfg).unwrap().0))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for run in others {
        assert_eq!(run.trajectory.s, reference.trajectory.s);
        for (a, b) in run.trajectory.states.iter().zip(&reference.trajectory.states) {
            assert_eq!(a, b);
        }
    }
}
