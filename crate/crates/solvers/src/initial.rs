use finsler_core::{Error, Finsler, Result, TangentSample};
use finsler_curve::{gram_schmidt, CurveState};
use nalgebra::DVector;

const DEPENDENCE: f64 = 1e-8;

/// Initial state `u = kappa1 e2`, `w = -kappa1^2 e1 + kappa1 kappa2 e3` of a
/// unit-speed curve with constant curvature at `s = 0`.
///
/// `e2` is `e2_hint` made g-orthonormal to `y0`. `e3` comes from `e3_hint`
/// or, without one, from the first canonical basis vector independent of
/// `e1, e2`. In dimension 2 `kappa2` must be zero.
pub fn make_biharmonic_initial(
    engine: &Finsler,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    kappa1: f64,
    e2_hint: &DVector<f64>,
    kappa2: f64,
    e3_hint: Option<&DVector<f64>>,
) -> Result<CurveState> {
    let n = engine.dim();
    let sample = TangentSample::from_vectors(x0, y0);
    let f = engine.eval_f(&sample)?;
    if (f - 1.0).abs() > 1e-8 {
        return Err(Error::NotAdmissible(format!("F(x0, y0) = {f}, expected 1")));
    }
    if e2_hint.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: e2_hint.len(),
        });
    }
    let (g, _) = engine.metric_tensor(&sample)?;
    let frame = gram_schmidt(&g, &[y0.clone(), e2_hint.clone()], DEPENDENCE);
    if frame.len() < 2 {
        return Err(Error::DegenerateHint("e2 hint is parallel to y0".into()));
    }
    let (e1, e2) = (&frame[0], &frame[1]);
    let u = e2 * kappa1;
    let mut w = e1 * (-kappa1 * kappa1);
    if kappa2 != 0.0 {
        if n < 3 {
            return Err(Error::InvalidParams("kappa2 needs dimension at least 3".into()));
        }
        let e3 = match e3_hint {
            Some(h) => {
                let fr = gram_schmidt(&g, &[e1.clone(), e2.clone(), h.clone()], DEPENDENCE);
                if fr.len() < 3 {
                    return Err(Error::DegenerateHint("e3 hint lies in span(e1, e2)".into()));
                }
                fr[2].clone()
            }
            None => (0..n)
                .find_map(|k| {
                    let fr = gram_schmidt(
                        &g,
                        &[
                            e1.clone(),
                            e2.clone(),
                            DVector::from_fn(n, |i, _| (i == k) as u8 as f64),
                        ],
                        DEPENDENCE,
                    );
                    (fr.len() == 3).then(|| fr[2].clone())
                })
                .ok_or_else(|| Error::DegenerateHint("no canonical completion for e3".into()))?,
        };
        w += e3 * (kappa1 * kappa2);
    }
    Ok(CurveState::new(x0.clone(), y0.clone(), u, w))
}
