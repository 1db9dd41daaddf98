//! Sampled-data helpers: finite-difference weights on arbitrary grids,
//! uniform-grid quadrature and Gauss-Legendre panels.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Fornberg weights for the derivatives `0..=max_order` at `at` from the
/// nodes `nodes`. Returns `weights[m][j]` for derivative order `m`.
pub fn fornberg_weights(at: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let count = nodes.len();
    let mut c = vec![vec![0.0; count]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - at;
    for i in 1..count {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - at;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First derivative of sampled vectors with a five-point stencil (centered
/// where possible, shifted at the ends). Needs at least five samples.
pub fn differentiate(s: &[f64], values: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    const WIDTH: usize = 5;
    let count = s.len();
    if count < WIDTH || values.len() != count {
        return Err(Error::InsufficientSamples {
            needed: WIDTH,
            have: count.min(values.len()),
        });
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let start = i.saturating_sub(WIDTH / 2).min(count - WIDTH);
        let nodes = &s[start..start + WIDTH];
        let w = fornberg_weights(s[i], nodes, 1);
        let mut d = DVector::zeros(values[i].len());
        for (j, weight) in w[1].iter().enumerate() {
            d += &values[start + j] * *weight;
        }
        out.push(d);
    }
    Ok(out)
}

/// True when `s` is strictly increasing with constant spacing.
pub fn is_uniform(s: &[f64]) -> bool {
    if s.len() < 2 {
        return true;
    }
    let h = s[1] - s[0];
    h > 0.0
        && s.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300) + 1e-12 * w[1].abs())
}

/// Composite Simpson on a uniform grid; an odd number of intervals closes
/// with the 3/8 rule on the last three.
pub fn simpson(h: f64, f: &[f64]) -> Result<f64> {
    let count = f.len();
    if count < 3 {
        return Err(Error::InsufficientSamples { needed: 3, have: count });
    }
    let intervals = count - 1;
    let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
    let mut acc = 0.0;
    let mut i = 0;
    while i < simpson_end {
        acc += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        i += 2;
    }
    if simpson_end < intervals {
        let j = simpson_end;
        acc += 3.0 * h / 8.0 * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
    }
    Ok(acc)
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss-Legendre rule on `[a, b]` for a vector integrand.
pub fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> DVector<f64>) -> DVector<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc: Option<DVector<f64>> = None;
    for (node, weight) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        for sign in [-1.0, 1.0] {
            let v = f(mid + sign * half * node) * (weight * half);
            acc = Some(match acc {
                None => v,
                Some(a) => a + v,
            });
        }
    }
    acc.expect("rule has nodes")
}

pub fn mean_and_stdev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
