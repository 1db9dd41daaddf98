mod common;

use std::sync::Arc;

use common::*;
use finsler_core::backend::{backend_by_name, FiniteDifferenceBackend, BACKEND_NAMES};
use finsler_core::{Finsler, LocalGeometry};
use finsler_testkit::Sampler;

const TOL: f64 = 1e-6;

fn worst(a: &LocalGeometry, b: &LocalGeometry) -> [(&'static str, f64); 9] {
    let (p, q) = (&a.point, &b.point);
    let (c, d) = (&a.curvature, &b.curvature);
    [
        ("g", rel_diff(p.g.as_slice(), q.g.as_slice())),
        ("C", rel_diff(p.c_low.as_slice(), q.c_low.as_slice())),
        ("G", rel_diff(p.spray.as_slice(), q.spray.as_slice())),
        ("N", rel_diff(p.nonlinear.as_slice(), q.nonlinear.as_slice())),
        ("Gamma", rel_diff(p.gamma.as_slice(), q.gamma.as_slice())),
        ("delta g", rel_diff(p.delta_g.as_slice(), q.delta_g.as_slice())),
        ("R", rel_diff(c.r3.as_slice(), d.r3.as_slice())),
        ("P", rel_diff(c.landsberg.as_slice(), d.landsberg.as_slice())),
        ("dC", rel_diff(&flat4(&c.cartan_vertical), &flat4(&d.cartan_vertical))),
    ]
}

fn flat4(t: &finsler_core::Tensor4) -> Vec<f64> {
    let n = t.dim();
    let mut out = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out.push(t.get(i, j, k, l));
                }
            }
        }
    }
    out
}

#[test]
fn jet_and_finite_difference_agree_on_random_randers_samples() {
    let mut sampler = Sampler::new(31);
    let mut checked = 0;
    let mut largest: f64 = 0.0;
    for round in 0..5 {
        for n in [2, 3] {
            let jet = random_randers(&mut sampler, n);
            let fd = jet.clone().with_backend(Arc::new(FiniteDifferenceBackend));
            for _ in 0..5 {
                let s =
                    finsler_core::TangentSample::from_vectors(&sampler.in_ball(n, 0.45), &sampler.tangent(n, 0.5, 2.0));
                let a = jet.local(&s).unwrap();
                let b = fd.local(&s).unwrap();
                for (name, d) in worst(&a, &b) {
                    assert!(d <= TOL, "round {round} n={n} {name}: {d:e}");
                    largest = largest.max(d);
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 50);
    eprintln!("largest jet/fd deviation over {checked} samples: {largest:e}");
}

#[test]
fn backends_agree_on_the_paper_examples() {
    let mut sampler = Sampler::new(32);
    for engine in [numata(), mink3(0.5), sphere(2, 1.0)] {
        let fd = engine
            .clone()
            .with_backend(backend_by_name("finite-difference").unwrap());
        for _ in 0..10 {
            let n = engine.dim();
            let s = finsler_core::TangentSample::from_vectors(&sampler.in_ball(n, 0.45), &sampler.tangent(n, 0.5, 2.0));
            for (name, d) in worst(&engine.local(&s).unwrap(), &fd.local(&s).unwrap()) {
                assert!(d <= TOL, "{}: {name} {d:e}", engine.metric().label());
            }
        }
    }
}

#[test]
fn backend_registry_resolves_every_listed_name() {
    for name in BACKEND_NAMES {
        let b = backend_by_name(name).unwrap();
        assert_eq!(b.name(), name);
    }
    let e: Finsler = euclidean(2);
    assert_eq!(e.backend().name(), "jet");
}
