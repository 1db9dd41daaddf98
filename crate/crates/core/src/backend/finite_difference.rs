use nalgebra::{DMatrix, DVector};

use super::{BackendOptions, Depth, DifferentiationBackend, RawConnection, RawCurvature, RawTensors};
use crate::norm::FinslerNorm;
use crate::tensor::{Tensor3, Tensor4};

/// Nested sixth-order central differences on plain `f64` evaluations.
///
/// Every tensor is assembled from first derivatives of the tensor one level
/// below (`L -> dL/dy -> g -> G -> N -> R`), each level a seven-point stencil.
/// Sixth order keeps the four nested levels behind `dC/dy` near `1e-8`.
/// Steps are `fd_step` in x and `fd_step * |y|` in y.
#[derive(Clone, Copy, Debug, Default)]
pub struct FiniteDifferenceBackend;

impl DifferentiationBackend for FiniteDifferenceBackend {
    fn name(&self) -> &'static str {
        "finite-difference"
    }

    fn compute(
        &self,
        norm: &dyn FinslerNorm,
        x: &[f64],
        y: &[f64],
        depth: Depth,
        options: &BackendOptions,
    ) -> RawTensors {
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ctx = Ctx {
            norm,
            n: x.len(),
            hx: options.fd_step,
            hy: options.fd_step * y_norm,
        };
        let mut point = x.to_vec();
        point.extend_from_slice(y);
        ctx.assemble(&point, depth)
    }
}

struct Ctx<'a> {
    norm: &'a dyn FinslerNorm,
    n: usize,
    hx: f64,
    hy: f64,
}

impl Ctx<'_> {
    fn step(&self, dir: usize) -> f64 {
        if dir < self.n {
            self.hx
        } else {
            self.hy
        }
    }

    /// d/d(point[dir]) of a vector-valued function, sixth order.
    fn diff(&self, f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], dir: usize) -> Vec<f64> {
        let h = self.step(dir);
        let mut q = p.to_vec();
        let mut eval = |offset: f64| {
            q[dir] = p[dir] + offset;
            f(&q)
        };
        let m3 = eval(-3.0 * h);
        let m2 = eval(-2.0 * h);
        let m1 = eval(-h);
        let p1 = eval(h);
        let p2 = eval(2.0 * h);
        let p3 = eval(3.0 * h);
        (0..m2.len())
            .map(|i| (45.0 * (p1[i] - m1[i]) - 9.0 * (p2[i] - m2[i]) + (p3[i] - m3[i])) / (60.0 * h))
            .collect()
    }

    fn lagrangian(&self, p: &[f64]) -> Vec<f64> {
        let f = self.norm.norm(&p[..self.n], &p[self.n..]);
        vec![f * f]
    }

    fn lag_y(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|l| self.diff(&|q| self.lagrangian(q), p, n + l)[0])
            .collect()
    }

    /// `g_ij` flattened row-major, symmetrized.
    fn metric(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for j in 0..n {
            let col = self.diff(&|q| self.lag_y(q), p, n + j);
            for i in 0..n {
                g[i * n + j] += 0.25 * col[i];
                g[j * n + i] += 0.25 * col[i];
            }
        }
        g
    }

    fn inverse(&self, flat: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let m = DMatrix::from_row_slice(n, n, flat);
        m.try_inverse().unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN))
    }

    fn spray(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        let g_inv = self.inverse(&self.metric(p));
        let lag_x: Vec<f64> = (0..n).map(|l| self.diff(&|q| self.lagrangian(q), p, l)[0]).collect();
        // lag_xy[k][l] = d/dx^k dL/dy^l
        let lag_xy: Vec<Vec<f64>> = (0..n).map(|k| self.diff(&|q| self.lag_y(q), p, k)).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|l| (0..n).map(|k| p[n + k] * lag_xy[k][l]).sum::<f64>() - lag_x[l])
            .collect();
        (0..n)
            .map(|i| 0.25 * (0..n).map(|l| g_inv[(i, l)] * rhs[l]).sum::<f64>())
            .collect()
    }

    /// `N^i_j` flattened `[i * n + j]`.
    fn nonlinear(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            let col = self.diff(&|q| self.spray(q), p, n + j);
            for i in 0..n {
                out[i * n + j] = col[i];
            }
        }
        out
    }

    /// `C^i_jk` flattened `[(i * n + j) * n + k]`.
    fn cartan_mixed(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n;
        let g_inv = self.inverse(&self.metric(p));
        let dg: Vec<Vec<f64>> = (0..n).map(|k| self.diff(&|q| self.metric(q), p, n + k)).collect();
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for h in 0..n {
                        acc += g_inv[(i, h)] * dg[k][h * n + j];
                    }
                    out[(i * n + j) * n + k] = 0.5 * acc;
                }
            }
        }
        out
    }

    fn assemble(&self, p: &[f64], depth: Depth) -> RawTensors {
        let n = self.n;
        let g_flat = self.metric(p);
        let g = DMatrix::from_row_slice(n, n, &g_flat);
        if depth == Depth::Metric {
            return RawTensors {
                g,
                c_low: None,
                connection: None,
                curvature: None,
            };
        }
        // dg[k] for k in 0..2n: x-derivatives then y-derivatives
        let dg: Vec<Vec<f64>> = (0..2 * n)
            .filter(|&k| depth >= Depth::Connection || k >= n)
            .map(|k| self.diff(&|q| self.metric(q), p, k))
            .collect();
        let dgy = |k: usize| -> &Vec<f64> {
            if depth >= Depth::Connection {
                &dg[n + k]
            } else {
                &dg[k]
            }
        };
        let c_low = Tensor3::from_fn(n, |i, j, k| {
            // symmetrize over the three slots
            let a = dgy(k)[i * n + j];
            let b = dgy(j)[i * n + k];
            let c = dgy(i)[j * n + k];
            (a + b + c) / 6.0
        });
        if depth == Depth::Cartan {
            return RawTensors {
                g,
                c_low: Some(c_low),
                connection: None,
                curvature: None,
            };
        }

        let spray = self.spray(p);
        let nl = self.nonlinear(p);
        let nonlinear = DMatrix::from_row_slice(n, n, &nl);
        let g_inv = g
            .clone()
            .try_inverse()
            .unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
        let delta_g = Tensor3::from_fn(n, |k, i, j| {
            let mut v = dg[k][i * n + j];
            for l in 0..n {
                v -= nonlinear[(l, k)] * dg[n + l][i * n + j];
            }
            v
        });
        let gamma = Tensor3::from_fn(n, |i, j, k| {
            let mut acc = 0.0;
            for h in 0..n {
                acc += g_inv[(i, h)] * (delta_g.get(k, h, j) + delta_g.get(j, h, k) - delta_g.get(h, j, k));
            }
            0.5 * acc
        });
        let connection = RawConnection {
            spray: DVector::from_vec(spray.clone()),
            nonlinear: nonlinear.clone(),
            delta_g,
            gamma,
        };

        let curvature = (depth == Depth::Curvature).then(|| {
            let dn: Vec<Vec<f64>> = (0..2 * n).map(|k| self.diff(&|q| self.nonlinear(q), p, k)).collect();
            let delta_n = |i: usize, j: usize, k: usize| {
                let mut v = dn[k][i * n + j];
                for l in 0..n {
                    v -= nonlinear[(l, k)] * dn[n + l][i * n + j];
                }
                v
            };
            let r3 = Tensor3::from_fn(n, |i, j, k| delta_n(i, j, k) - delta_n(i, k, j));

            let cm = self.cartan_mixed(p);
            let dcm: Vec<Vec<f64>> = (0..2 * n).map(|k| self.diff(&|q| self.cartan_mixed(q), p, k)).collect();
            let at = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
            let landsberg = Tensor3::from_fn(n, |i, j, k| {
                let mut v = 0.0;
                for l in 0..n {
                    v += p[n + l] * dcm[l][at(i, j, k)];
                    v -= 2.0 * spray[l] * dcm[n + l][at(i, j, k)];
                }
                for h in 0..n {
                    v += nonlinear[(i, h)] * cm[at(h, j, k)]
                        - nonlinear[(h, j)] * cm[at(i, h, k)]
                        - nonlinear[(h, k)] * cm[at(i, j, h)];
                }
                v
            });
            let mut cartan_vertical = Tensor4::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        for k in 0..n {
                            cartan_vertical.set(i, j, l, k, dcm[n + k][at(i, j, l)]);
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
            g,
            c_low: Some(c_low),
            connection: Some(connection),
            curvature,
        }
    }
}
