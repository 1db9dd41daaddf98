use finsler_core::{Finsler, Result, TangentSample};
use nalgebra::{DMatrix, DVector};

/// Orthonormal frame `e1..ek` along a unit-speed curve and the curvatures
/// `kappa1..kappa(k-1)`.
#[derive(Clone, Debug)]
pub struct FrenetFrame {
    pub vectors: Vec<DVector<f64>>,
    pub curvatures: Vec<f64>,
    /// The chain became linearly dependent before the frame was complete.
    pub truncated: bool,
}

fn inner(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(&(g * b))
}

fn norm(g: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    inner(g, a, a).max(0.0).sqrt()
}

/// Modified Gram-Schmidt in the inner product `g`. Stops at the first input
/// whose residual is below `threshold` times the largest input norm.
pub fn gram_schmidt(g: &DMatrix<f64>, vectors: &[DVector<f64>], threshold: f64) -> Vec<DVector<f64>> {
    residual_chain(g, vectors, threshold).0
}

fn residual_chain(g: &DMatrix<f64>, vectors: &[DVector<f64>], threshold: f64) -> (Vec<DVector<f64>>, Vec<f64>) {
    let scale = vectors.iter().map(|v| norm(g, v)).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut residuals = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for e in &basis {
            let c = inner(g, &r, e);
            r -= e * c;
        }
        let len = norm(g, &r);
        if !(len > threshold * scale) {
            break;
        }
        basis.push(r / len);
        residuals.push(len);
    }
    (basis, residuals)
}

/// Frenet frame from the chain `[DT, D^2T, ...]` at the sample `(x, y)`.
///
/// Since `D^k T = kappa1 ... kappak e(k+1)` modulo lower frame vectors, the
/// curvatures past the first are ratios of consecutive Gram-Schmidt
/// residuals; `kappa1 = |DT|`.
pub fn frenet_frame(
    engine: &Finsler,
    x: &DVector<f64>,
    y: &DVector<f64>,
    derivative_chain: &[DVector<f64>],
) -> Result<FrenetFrame> {
    let (g, _) = engine.metric_tensor(&TangentSample::from_vectors(x, y))?;
    let mut chain = Vec::with_capacity(derivative_chain.len() + 1);
    chain.push(y.clone());
    chain.extend(derivative_chain.iter().cloned());
    let (vectors, residuals) = residual_chain(&g, &chain, 1e-10);
    let mut curvatures = Vec::new();
    if vectors.len() > 1 {
        curvatures.push(norm(&g, &derivative_chain[0]));
        for k in 2..vectors.len() {
            curvatures.push(residuals[k] / residuals[k - 1]);
        }
    }
    let truncated = vectors.len() < chain.len().min(engine.dim());
    Ok(FrenetFrame {
        vectors,
        curvatures,
        truncated,
    })
}
