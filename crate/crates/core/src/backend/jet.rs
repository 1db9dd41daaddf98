use nalgebra::{DMatrix, DVector};

use super::{BackendOptions, Depth, DifferentiationBackend, RawConnection, RawCurvature, RawTensors};
use crate::jet::{Jet, JetSpace};
use crate::norm::FinslerNorm;
use crate::scalar::Scalar;
use crate::tensor::{Tensor3, Tensor4};

/// Exact derivatives through truncated Taylor arithmetic.
///
/// Variables `0..n` are the position, `n..2n` the tangent. The spray is
/// computed as a jet so that the nonlinear connection and its first
/// derivatives fall out by differentiating jets, without finite steps.
#[derive(Clone, Copy, Debug, Default)]
pub struct JetBackend;

impl DifferentiationBackend for JetBackend {
    fn name(&self) -> &'static str {
        "jet"
    }

    fn compute(
        &self,
        norm: &dyn FinslerNorm,
        x: &[f64],
        y: &[f64],
        depth: Depth,
        _options: &BackendOptions,
    ) -> RawTensors {
        match depth {
            Depth::Metric | Depth::Cartan => vertical_only(norm, x, y, depth),
            Depth::Connection | Depth::Curvature => full(norm, x, y, depth),
        }
    }
}

fn unit(n: usize, dirs: &[usize]) -> Vec<u8> {
    let mut e = vec![0u8; n];
    for &d in dirs {
        e[d] += 1;
    }
    e
}

/// `g` and `C` need only y-derivatives; x enters as constants.
fn vertical_only(norm: &dyn FinslerNorm, x: &[f64], y: &[f64], depth: Depth) -> RawTensors {
    let n = x.len();
    let order = if depth == Depth::Metric { 2 } else { 3 };
    let space = JetSpace::shared(n, order);
    let xs: Vec<Jet> = x.iter().map(|&v| Jet::constant(&space, v)).collect();
    let ys: Vec<Jet> = y
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(&space, i, v))
        .collect();
    let lag = norm.norm_jet(&xs, &ys).square();
    let g = DMatrix::from_fn(n, n, |i, j| 0.5 * lag.partial(&unit(n, &[i, j])));
    let c_low =
        (depth == Depth::Cartan).then(|| Tensor3::from_fn(n, |i, j, k| 0.25 * lag.partial(&unit(n, &[i, j, k]))));
    RawTensors {
        g,
        c_low,
        connection: None,
        curvature: None,
    }
}

/// Gauss-Jordan inverse without pivoting; `m` is positive definite.
fn invert(m: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let n = m.len();
    let space = m[0][0].space().clone();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(&space, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &pivot;
            inv[col][j] = &inv[col][j] * &pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                a[row][j] = &a[row][j] - &(&factor * &a[col][j]);
                inv[row][j] = &inv[row][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    inv
}

fn full(norm: &dyn FinslerNorm, x: &[f64], y: &[f64], depth: Depth) -> RawTensors {
    let n = x.len();
    let order = if depth == Depth::Curvature { 4 } else { 3 };
    let space = JetSpace::shared(2 * n, order);
    let xs: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, i, x[i])).collect();
    let ys: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, n + i, y[i])).collect();
    let lag = norm.norm_jet(&xs, &ys).square();

    let lag_y: Vec<Jet> = (0..n).map(|l| lag.derivative(n + l)).collect();
    let lag_x: Vec<Jet> = (0..n).map(|l| lag.derivative(l)).collect();
    let g: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| lag_y[i].derivative(n + j) * 0.5).collect())
        .collect();
    let g_inv = invert(&g);

    // G^i = 1/4 g^il (y^k L_{x^k y^l} - L_{x^l})
    let rhs: Vec<Jet> = (0..n)
        .map(|l| {
            let mut acc = -lag_x[l].clone();
            for k in 0..n {
                acc = acc + &ys[k] * &lag_y[l].derivative(k);
            }
            acc
        })
        .collect();
    let spray: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = Jet::constant(&space, 0.0);
            for (l, r) in rhs.iter().enumerate() {
                acc = acc + &g_inv[i][l] * r;
            }
            acc * 0.25
        })
        .collect();
    let nonlinear: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| spray[i].derivative(n + j)).collect())
        .collect();

    // dg[k][i][j]: x-derivative for k < n, y-derivative of index k - n otherwise
    let dg: Vec<Vec<Vec<Jet>>> = (0..2 * n)
        .map(|k| {
            (0..n)
                .map(|i| (0..n).map(|j| g[i][j].derivative(k)).collect())
                .collect()
        })
        .collect();

    let nv = DMatrix::from_fn(n, n, |i, j| nonlinear[i][j].value());
    let g_inv_v = DMatrix::from_fn(n, n, |i, j| g_inv[i][j].value());
    let delta_g = Tensor3::from_fn(n, |k, i, j| {
        let mut v = dg[k][i][j].value();
        for l in 0..n {
            v -= nv[(l, k)] * dg[n + l][i][j].value();
        }
        v
    });
    let gamma = Tensor3::from_fn(n, |i, j, k| {
        let mut acc = 0.0;
        for h in 0..n {
            acc += g_inv_v[(i, h)] * (delta_g.get(k, h, j) + delta_g.get(j, h, k) - delta_g.get(h, j, k));
        }
        0.5 * acc
    });
    let c_low = Tensor3::from_fn(n, |i, j, k| 0.5 * dg[n + k][i][j].value());

    let connection = RawConnection {
        spray: DVector::from_fn(n, |i, _| spray[i].value()),
        nonlinear: nv.clone(),
        delta_g,
        gamma,
    };

    let curvature = (depth == Depth::Curvature).then(|| {
        let delta_n = |i: usize, j: usize, k: usize| {
            let mut v = nonlinear[i][j].derivative(k).value();
            for l in 0..n {
                v -= nv[(l, k)] * nonlinear[i][j].derivative(n + l).value();
            }
            v
        };
        let r3 = Tensor3::from_fn(n, |i, j, k| delta_n(i, j, k) - delta_n(i, k, j));

        let c_mixed: Vec<Jet> = {
            let mut out = Vec::with_capacity(n * n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = Jet::constant(&space, 0.0);
                        for h in 0..n {
                            acc = acc + &g_inv[i][h] * &dg[n + k][h][j];
                        }
                        out.push(acc * 0.5);
                    }
                }
            }
            out
        };
        let cm = |i: usize, j: usize, k: usize| &c_mixed[(i * n + j) * n + k];
        let cmv = Tensor3::from_fn(n, |i, j, k| cm(i, j, k).value());
        let spray_v: Vec<f64> = spray.iter().map(Jet::value).collect();

        let landsberg = Tensor3::from_fn(n, |i, j, k| {
            let c = cm(i, j, k);
            let mut v = 0.0;
            for l in 0..n {
                v += y[l] * c.derivative(l).value();
                v -= 2.0 * spray_v[l] * c.derivative(n + l).value();
            }
            for h in 0..n {
                v += nv[(i, h)] * cmv.get(h, j, k) - nv[(h, j)] * cmv.get(i, h, k) - nv[(h, k)] * cmv.get(i, j, h);
            }
            v
        });

        let mut cartan_vertical = Tensor4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for k in 0..n {
                        cartan_vertical.set(i, j, l, k, cm(i, j, l).derivative(n + k).value());
                    }
                }
            }
        }
        RawCurvature {
            r3,
            landsberg,
            cartan_vertical,
        }
    });

    RawTensors {
        g: DMatrix::from_fn(n, n, |i, j| g[i][j].value()),
        c_low: Some(c_low),
        connection: Some(connection),
        curvature,
    }
}
