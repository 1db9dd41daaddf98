//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a function of `nvars`
//! variables around a base point, up to a total degree (`order`). All
//! arithmetic is exact on coefficients up to that degree. Differentiating a
//! jet with respect to one variable lowers its valid order by one, so a
//! single evaluation of a norm at order 4 carries everything needed for
//! curvature and the derivatives of the Cartan tensor.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::Scalar;

/// Monomial indexing and the sparse product table for one
/// `(nvars, order)` pair.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    /// `degree_end[d]` is one past the last monomial of degree `d`.
    degree_end: Vec<usize>,
    /// `(lhs, rhs, out)` triples sorted by the degree of `out`.
    products: Vec<(u32, u32, u32)>,
    /// `product_end[d]` is one past the last product whose output has degree `d`.
    product_end: Vec<usize>,
    /// Per variable: `(source, target, factor)` for `d/dv`.
    derivatives: Vec<Vec<(u32, u32, f64)>>,
    index: HashMap<Vec<u8>, usize>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("monomials", &self.exponents.len())
            .finish()
    }
}

fn monomials_of_degree(nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    // lexicographically descending so that x0 comes first
    fn rec(nvars: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, degree, &mut Vec::with_capacity(nvars), &mut out);
    out
}

impl JetSpace {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exponents = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            exponents.extend(monomials_of_degree(nvars, d));
            degree_end.push(exponents.len());
        }
        let index: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree_of = |i: usize| degree_end.iter().position(|&end| i < end).unwrap();

        let mut by_degree: Vec<Vec<(u32, u32, u32)>> = vec![Vec::new(); order + 1];
        let mut sum = vec![0u8; nvars];
        for (i, a) in exponents.iter().enumerate() {
            let da = degree_of(i);
            for (j, b) in exponents[..degree_end[order - da]].iter().enumerate() {
                for v in 0..nvars {
                    sum[v] = a[v] + b[v];
                }
                let k = index[&sum];
                by_degree[degree_of(k)].push((i as u32, j as u32, k as u32));
            }
        }
        let mut products = Vec::new();
        let mut product_end = Vec::with_capacity(order + 1);
        for bucket in by_degree {
            products.extend(bucket);
            product_end.push(products.len());
        }

        let mut derivatives = vec![Vec::new(); nvars];
        if order > 0 {
            for (v, table) in derivatives.iter_mut().enumerate() {
                for (t, e) in exponents[..degree_end[order - 1]].iter().enumerate() {
                    let mut up = e.clone();
                    up[v] += 1;
                    table.push((index[&up] as u32, t as u32, f64::from(up[v])));
                }
            }
        }

        JetSpace {
            nvars,
            order,
            exponents,
            degree_end,
            products,
            product_end,
            derivatives,
            index,
        }
    }

    /// Shared space for `(nvars, order)`; tables are built once per process.
    pub fn shared(nvars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    fn count(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }
}

/// Truncated Taylor expansion. Coefficient `c[a]` multiplies `h^a / 1`,
/// i.e. the partial derivative with multi-index `a` equals `a! * c[a]`.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coef: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.coef[0])
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut coef = vec![0.0; space.len()];
        coef[0] = value;
        Jet {
            space: space.clone(),
            order: space.order,
            coef,
        }
    }

    /// The independent variable `var` evaluated at `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Jet {
        assert!(var < space.nvars, "variable index out of range");
        let mut jet = Jet::constant(space, value);
        if space.order > 0 {
            let mut e = vec![0u8; space.nvars];
            e[var] = 1;
            jet.coef[space.index[&e]] = 1.0;
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    /// Raw Taylor coefficient of the monomial with the given exponents.
    pub fn coefficient(&self, exponents: &[u8]) -> f64 {
        let degree: usize = exponents.iter().map(|&e| usize::from(e)).sum();
        if degree > self.order {
            return f64::NAN;
        }
        self.space.index_of(exponents).map_or(0.0, |i| self.coef[i])
    }

    /// Partial derivative with the given multi-index at the base point.
    pub fn partial(&self, exponents: &[u8]) -> f64 {
        let factorial: f64 = exponents
            .iter()
            .map(|&e| (1..=u32::from(e)).map(f64::from).product::<f64>())
            .product();
        self.coefficient(exponents) * factorial
    }

    /// `d/d var`, valid to one order less.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let limit = self.space.count(order);
        let mut coef = vec![0.0; self.space.len()];
        for &(src, dst, factor) in &self.space.derivatives[var] {
            let dst = dst as usize;
            if dst < limit {
                coef[dst] = factor * self.coef[src as usize];
            }
        }
        Jet {
            space: self.space.clone(),
            order,
            coef,
        }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "mixed jet spaces");
        let order = self.order.min(other.order);
        let count = self.space.count(order);
        let mut coef = vec![0.0; self.space.len()];
        for i in 0..count {
            coef[i] = f(self.coef[i], other.coef[i]);
        }
        Jet {
            space: self.space.clone(),
            order,
            coef,
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        let count = self.space.count(self.order);
        let mut coef = vec![0.0; self.space.len()];
        for i in 0..count {
            coef[i] = f(self.coef[i]);
        }
        Jet {
            space: self.space.clone(),
            order: self.order,
            coef,
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "mixed jet spaces");
        let order = self.order.min(other.order);
        let mut coef = vec![0.0; self.space.len()];
        let end = self.space.product_end[order];
        for &(i, j, k) in &self.space.products[..end] {
            coef[k as usize] += self.coef[i as usize] * other.coef[j as usize];
        }
        Jet {
            space: self.space.clone(),
            order,
            coef,
        }
    }

    /// `sum_k taylor[k] * (self - self.value())^k`.
    fn compose(&self, taylor: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coef[0] = 0.0;
        let mut acc = Jet::constant(&self.space, taylor[self.order]);
        acc.order = self.order;
        for k in (0..self.order).rev() {
            acc = acc.product(&h);
            acc.coef[0] += taylor[k];
        }
        acc
    }

    fn power_series(&self, p: f64) -> Vec<f64> {
        let a0 = self.value();
        let mut out = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            out.push(binom * a0.powf(p - k as f64));
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip(&rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip(&rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.product(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.product(&rhs.recip())
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|a| -a)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coef[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coef[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map(|a| a * rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.map(|a| a / rhs)
    }
}

impl Scalar for Jet {
    fn lift(&self, value: f64) -> Self {
        Jet::constant(&self.space, value)
    }

    fn value(&self) -> f64 {
        self.coef[0]
    }

    fn sqrt(&self) -> Self {
        self.compose(&self.power_series(0.5))
    }

    fn powf(&self, p: f64) -> Self {
        self.compose(&self.power_series(p))
    }

    fn recip(&self) -> Self {
        self.compose(&self.power_series(-1.0))
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut taylor = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            taylor.push(e / fact);
        }
        self.compose(&taylor)
    }

    fn ln(&self) -> Self {
        let a0 = self.value();
        let mut taylor = vec![a0.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            taylor.push(sign / (k as f64 * a0.powi(k as i32)));
        }
        self.compose(&taylor)
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&trig_series(s, c, self.order))
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        // cos(a + h) = sin(a + pi/2 + h)
        self.compose(&trig_series(c, -s, self.order))
    }
}

/// Taylor coefficients of `sin` at a point where `sin = s`, `cos = c`.
fn trig_series(s: f64, c: f64, order: usize) -> Vec<f64> {
    let cycle = [s, c, -s, -c];
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[k % 4] / fact
        })
        .collect()
}
