//! Test-only oracles. Everything here works on plain `f64` closures and
//! shares no code with the library crates, so agreement with them is an
//! independent check.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fourth-order central difference of a vector-valued function along `dir`.
pub fn directional<F>(f: &F, x: &[f64], dir: usize, h: f64) -> DVector<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let at = |t: f64| {
        let mut p = x.to_vec();
        p[dir] += t;
        f(&p)
    };
    (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h)
}

/// Fourth-order central difference of a scalar function.
pub fn derivative<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> f64 {
    (f(t - 2.0 * h) - f(t + 2.0 * h) + 8.0 * (f(t + h) - f(t - h))) / (12.0 * h)
}

/// Gradient of a scalar function.
pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> DVector<f64> {
    let wrapped = |p: &[f64]| DVector::from_element(1, f(p));
    DVector::from_fn(x.len(), |i, _| directional(&wrapped, x, i, h)[0])
}

/// Hessian of a scalar function from nested central differences.
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> DMatrix<f64> {
    let grad = |p: &[f64]| gradient(f, p, h);
    let n = x.len();
    let cols: Vec<DVector<f64>> = (0..n).map(|j| directional(&grad, x, j, h)).collect();
    let m = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    (&m + m.transpose()) * 0.5
}

/// Christoffel symbols `Gamma^i_jk` of a Riemannian metric field, stored
/// `out[i][(j, k)]`.
pub fn christoffel<A>(a: &A, x: &[f64], h: f64) -> Vec<DMatrix<f64>>
where
    A: Fn(&[f64]) -> DMatrix<f64>,
{
    let n = x.len();
    let flat = |p: &[f64]| {
        let m = a(p);
        DVector::from_iterator(n * n, m.iter().copied())
    };
    // da[l] = d a / d x^l, column-major
    let da: Vec<DMatrix<f64>> = (0..n)
        .map(|l| DMatrix::from_column_slice(n, n, directional(&flat, x, l, h).as_slice()))
        .collect();
    let inv = a(x).try_inverse().expect("metric field must be invertible");
    (0..n)
        .map(|i| {
            DMatrix::from_fn(n, n, |j, k| {
                0.5 * (0..n)
                    .map(|l| inv[(i, l)] * (da[j][(l, k)] + da[k][(l, j)] - da[l][(j, k)]))
                    .sum::<f64>()
            })
        })
        .collect()
}

/// Riemann tensor `R^i_jkl` with `R(e_k, e_l) e_j = R^i_jkl e_i` and
/// `R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]`, stored
/// `out[((i * n + j) * n + k) * n + l]`.
pub fn riemann<A>(a: &A, x: &[f64], h: f64) -> Vec<f64>
where
    A: Fn(&[f64]) -> DMatrix<f64> + ?Sized,
{
    let n = x.len();
    let inner = h * 0.5;
    let gamma_flat = |p: &[f64]| {
        let g = christoffel(&|q: &[f64]| a(q), p, inner);
        DVector::from_iterator(n * n * n, g.iter().flat_map(|m| m.iter().copied()))
    };
    let gamma = christoffel(&|q: &[f64]| a(q), x, inner);
    let dgamma: Vec<DVector<f64>> = (0..n).map(|d| directional(&gamma_flat, x, d, h)).collect();
    // Gamma^i_jk at flat index (i, column-major (j, k))
    let dg = |d: usize, i: usize, j: usize, k: usize| dgamma[d][i * n * n + k * n + j];
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dg(k, i, l, j) - dg(l, i, k, j);
                    for m in 0..n {
                        v += gamma[i][(k, m)] * gamma[m][(l, j)] - gamma[i][(l, m)] * gamma[m][(k, j)];
                    }
                    out[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    out
}

/// `R(X, Y) Z`.
pub fn riemann_apply(r: &[f64], n: usize, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(n, |i, _| {
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    acc += r[((i * n + j) * n + k) * n + l] * z[j] * x[k] * y[l];
                }
            }
        }
        acc
    })
}

/// `|a - b| / max(|b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// Composite Simpson rule on `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0 && n > 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Seeded generator of random geometric inputs.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.rng.gen_range(lo..hi))
    }

    /// Uniform direction on the unit sphere.
    pub fn direction(&mut self, n: usize) -> DVector<f64> {
        loop {
            let v = self.vector(n, -1.0, 1.0);
            let len = v.norm();
            if len > 0.1 && len <= 1.0 {
                return v / len;
            }
        }
    }

    /// Point of the open ball of the given radius.
    pub fn in_ball(&mut self, n: usize, radius: f64) -> DVector<f64> {
        loop {
            let v = self.vector(n, -1.0, 1.0);
            if v.norm() < 1.0 {
                return v * radius;
            }
        }
    }

    /// Direction rescaled to a length in `[lo, hi)`.
    pub fn tangent(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        let len = self.uniform(lo, hi);
        self.direction(n) * len
    }

    /// Symmetric positive-definite matrix with eigenvalues in `[lo, hi)`.
    pub fn spd(&mut self, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| self.rng.gen_range(-1.0..1.0));
        let q = m.qr().q();
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| self.rng.gen_range(lo..hi)));
        let s = &q * d * q.transpose();
        (&s + s.transpose()) * 0.5
    }
}
