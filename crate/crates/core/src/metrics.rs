//! Builtin norms, addressable by name.
//!
//! | name          | norm                                                  |
//! |---------------|-------------------------------------------------------|
//! | `euclidean`   | `|y|`                                                 |
//! | `riemannian`  | `sqrt(a_ij(x) y^i y^j)` on a sphere or hyperbolic chart |
//! | `randers`     | `sqrt(w(x) y.A y) + (b + B x).y`                      |
//! | `numata_disk` | `|y| + x.y` on the open unit disk                     |
//! | `mink3`       | `|y| + b y^3` on R^3                                  |

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::norm::{MetricSpec, NormExpr, Structure};
use crate::scalar::{dot, Scalar};

pub const METRIC_NAMES: [&str; 5] = ["euclidean", "riemannian", "randers", "numata_disk", "mink3"];

/// One parameter value of a builtin metric.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

/// Named parameters for [`builtin`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricParams(pub BTreeMap<String, ParamValue>);

impl MetricParams {
    pub fn new() -> Self {
        MetricParams::default()
    }

    pub fn with(mut self, key: &str, value: ParamValue) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn number(self, key: &str, value: f64) -> Self {
        self.with(key, ParamValue::Number(value))
    }

    pub fn list(self, key: &str, value: &[f64]) -> Self {
        self.with(key, ParamValue::List(value.to_vec()))
    }

    pub fn text(self, key: &str, value: &str) -> Self {
        self.with(key, ParamValue::Text(value.to_string()))
    }

    fn get_number(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Number(v)) => Ok(Some(*v)),
            Some(other) => Err(Error::InvalidParams(format!("`{key}` must be a number, got {other:?}"))),
        }
    }

    fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::List(v)) => Ok(Some(v.clone())),
            Some(ParamValue::Number(v)) => Ok(Some(vec![*v])),
            Some(other) => Err(Error::InvalidParams(format!("`{key}` must be a list, got {other:?}"))),
        }
    }

    fn get_text(&self, key: &str) -> Result<Option<String>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Text(v)) => Ok(Some(v.clone())),
            Some(other) => Err(Error::InvalidParams(format!("`{key}` must be text, got {other:?}"))),
        }
    }

    fn get_dim(&self) -> Result<Option<usize>> {
        match self.get_number("dim")? {
            None => Ok(None),
            Some(d) if d >= 1.0 && d.fract() == 0.0 => Ok(Some(d as usize)),
            Some(d) => Err(Error::InvalidParams(format!(
                "`dim` must be a positive integer, got {d}"
            ))),
        }
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for key in self.0.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidParams(format!("unknown parameter `{key}`")));
            }
        }
        Ok(())
    }
}

/// Build one of [`METRIC_NAMES`] from its parameters.
pub fn builtin(name: &str, params: &MetricParams) -> Result<MetricSpec> {
    match name {
        "euclidean" => {
            params.reject_unknown(&["dim"])?;
            Ok(MetricSpec::new(Euclidean::new(params.get_dim()?.unwrap_or(2))))
        }
        "riemannian" => {
            params.reject_unknown(&["dim", "chart", "radius"])?;
            let n = params.get_dim()?.unwrap_or(2);
            let chart = params.get_text("chart")?.unwrap_or_else(|| "sphere".into());
            match chart.as_str() {
                "sphere" => {
                    let radius = params.get_number("radius")?.unwrap_or(1.0);
                    if !(radius > 0.0) {
                        return Err(Error::InvalidParams(format!(
                            "sphere radius must be positive, got {radius}"
                        )));
                    }
                    Ok(MetricSpec::new(Riemannian::new(SphereChart { n, radius })))
                }
                "hyperbolic" => Ok(MetricSpec::new(Riemannian::new(PoincareBall { n }))),
                other => Err(Error::InvalidParams(format!("unknown riemannian chart `{other}`"))),
            }
        }
        "randers" => {
            params.reject_unknown(&["dim", "a", "b", "b_slope", "warp", "radius"])?;
            let b = params.get_list("b")?;
            let n = match (params.get_dim()?, &b) {
                (Some(n), _) => n,
                (None, Some(b)) => b.len(),
                (None, None) => 2,
            };
            let a = match params.get_list("a")? {
                None => DMatrix::identity(n, n),
                Some(v) if v.len() == n * n => DMatrix::from_row_slice(n, n, &v),
                Some(v) => {
                    return Err(Error::InvalidParams(format!(
                        "`a` needs {} entries, got {}",
                        n * n,
                        v.len()
                    )))
                }
            };
            let b = match b {
                None => DVector::zeros(n),
                Some(v) if v.len() == n => DVector::from_vec(v),
                Some(v) => return Err(Error::InvalidParams(format!("`b` needs {n} entries, got {}", v.len()))),
            };
            let slope = match params.get_list("b_slope")? {
                None => DMatrix::zeros(n, n),
                Some(v) if v.len() == n * n => DMatrix::from_row_slice(n, n, &v),
                Some(v) => {
                    return Err(Error::InvalidParams(format!(
                        "`b_slope` needs {} entries, got {}",
                        n * n,
                        v.len()
                    )))
                }
            };
            let warp = params.get_number("warp")?.unwrap_or(0.0);
            let radius = params.get_number("radius")?.unwrap_or(f64::INFINITY);
            Ok(MetricSpec::new(Randers::new(a, b, slope, warp, radius, "randers")?))
        }
        "numata_disk" => {
            params.reject_unknown(&[])?;
            Ok(MetricSpec::new(Randers::numata_disk()))
        }
        "mink3" => {
            params.reject_unknown(&["b"])?;
            Ok(MetricSpec::new(Randers::mink3(params.get_number("b")?.unwrap_or(0.5))?))
        }
        other => Err(Error::UnknownMetric(other.to_string())),
    }
}

#[derive(Clone, Debug)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Euclidean { n }
    }
}

impl NormExpr for Euclidean {
    fn dim(&self) -> usize {
        self.n
    }
    fn label(&self) -> String {
        format!("euclidean({})", self.n)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }
    fn structure(&self) -> Structure {
        Structure::LocallyMinkowski
    }
    fn eval<S: Scalar>(&self, _x: &[S], y: &[S]) -> S {
        dot(y, y).sqrt()
    }
}

/// Position-dependent symmetric positive-definite matrix field.
pub trait MetricField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn in_domain(&self, x: &[f64]) -> bool;
    /// `a_ij(x) y^i y^j`.
    fn quadratic<S: Scalar>(&self, x: &[S], y: &[S]) -> S;
}

/// Round sphere of the given radius in stereographic coordinates,
/// `a = 4 r^2 / (1 + |x|^2)^2 * I`, sectional curvature `1 / r^2`.
#[derive(Clone, Debug)]
pub struct SphereChart {
    pub n: usize,
    pub radius: f64,
}

impl MetricField for SphereChart {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        format!("sphere(r={})", self.radius)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }
    fn quadratic<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let conf = (dot(x, x) + 1.0).recip() * (2.0 * self.radius);
        conf.square() * dot(y, y)
    }
}

/// Poincare ball, `a = 4 / (1 - |x|^2)^2 * I`, sectional curvature `-1`.
#[derive(Clone, Debug)]
pub struct PoincareBall {
    pub n: usize,
}

impl MetricField for PoincareBall {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        "hyperbolic".into()
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().map(|v| v * v).sum::<f64>() < 1.0
    }
    fn quadratic<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let conf = (-dot(x, x) + 1.0).recip() * 2.0;
        conf.square() * dot(y, y)
    }
}

#[derive(Clone, Debug)]
pub struct Riemannian<M> {
    field: M,
}

impl<M: MetricField> Riemannian<M> {
    pub fn new(field: M) -> Self {
        Riemannian { field }
    }

    pub fn field(&self) -> &M {
        &self.field
    }
}

impl<M: MetricField> NormExpr for Riemannian<M> {
    fn dim(&self) -> usize {
        self.field.dim()
    }
    fn label(&self) -> String {
        format!("riemannian[{}]", self.field.name())
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.field.in_domain(x)
    }
    fn structure(&self) -> Structure {
        Structure::Riemannian
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        self.field.quadratic(x, y).sqrt()
    }
}

/// `F = sqrt((1 + warp |x|^2) y.A y) + (b + B x).y` on the ball `|x| < radius`
/// intersected with the region where the one-form is shorter than 1.
#[derive(Clone, Debug)]
pub struct Randers {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
    slope: DMatrix<f64>,
    warp: f64,
    radius: f64,
    label: String,
}

impl Randers {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        slope: DMatrix<f64>,
        warp: f64,
        radius: f64,
        label: &str,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || slope.shape() != (n, n) {
            return Err(Error::InvalidParams("inconsistent randers dimensions".into()));
        }
        if (&a - a.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidParams("`a` must be symmetric".into()));
        }
        let a_inv = nalgebra::Cholesky::new(a.clone())
            .ok_or_else(|| Error::InvalidParams("`a` must be positive definite".into()))?
            .inverse();
        if warp < 0.0 || !warp.is_finite() {
            return Err(Error::InvalidParams(format!(
                "`warp` must be a nonnegative number, got {warp}"
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParams(format!("`radius` must be positive, got {radius}")));
        }
        let randers = Randers {
            a,
            a_inv,
            b,
            slope,
            warp,
            radius,
            label: label.to_string(),
        };
        let origin = vec![0.0; n];
        if radius.is_finite() || randers.is_constant() {
            if randers.one_form_norm(&origin) >= 1.0 {
                return Err(Error::InvalidParams(format!(
                    "one-form length {} must be below 1",
                    randers.one_form_norm(&origin)
                )));
            }
        }
        Ok(randers)
    }

    /// `|y| + x.y` on the unit disk.
    pub fn numata_disk() -> Self {
        Randers::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            0.0,
            1.0,
            "numata_disk",
        )
        .expect("numata parameters are valid")
    }

    /// `|y| + b y^3` on R^3, `b` in `(0, 1)`.
    pub fn mink3(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParams(format!("mink3 needs b in (0, 1), got {b}")));
        }
        Randers::new(
            DMatrix::identity(3, 3),
            DVector::from_vec(vec![0.0, 0.0, b]),
            DMatrix::zeros(3, 3),
            0.0,
            f64::INFINITY,
            &format!("mink3(b={b})"),
        )
    }

    /// Same Riemannian part with the one-form removed.
    pub fn riemannian_part(&self) -> Randers {
        let n = self.b.len();
        Randers {
            b: DVector::zeros(n),
            slope: DMatrix::zeros(n, n),
            label: format!("{}[alpha]", self.label),
            ..self.clone()
        }
    }

    /// `(b + B x, a(x))`-length of the one-form at `x`.
    pub fn one_form_norm(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let bx = &self.b + &self.slope * &xv;
        let scale = 1.0 + self.warp * xv.norm_squared();
        (bx.dot(&(&self.a_inv * &bx)) / scale).sqrt()
    }

    pub fn one_form(&self, x: &[f64]) -> DVector<f64> {
        &self.b + &self.slope * DVector::from_column_slice(x)
    }

    fn is_constant(&self) -> bool {
        self.warp == 0.0 && self.slope.iter().all(|v| *v == 0.0)
    }
}

impl NormExpr for Randers {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn label(&self) -> String {
        self.label.clone()
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.b.len()
            && x.iter().all(|v| v.is_finite())
            && x.iter().map(|v| v * v).sum::<f64>() < self.radius * self.radius
            && self.one_form_norm(x) < 1.0
    }
    fn structure(&self) -> Structure {
        if self.is_constant() {
            Structure::LocallyMinkowski
        } else if self.b.iter().all(|v| *v == 0.0) && self.slope.iter().all(|v| *v == 0.0) {
            Structure::Riemannian
        } else {
            Structure::General
        }
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let n = y.len();
        let zero = y[0].lift(0.0);
        let mut quad = zero.clone();
        for i in 0..n {
            let mut row = zero.clone();
            for j in 0..n {
                row = row + y[j].clone() * self.a[(i, j)];
            }
            quad = quad + row * y[i].clone();
        }
        if self.warp != 0.0 {
            quad = quad * (dot(x, x) * self.warp + 1.0);
        }
        let mut beta = zero;
        for i in 0..n {
            let mut bi = x[0].lift(self.b[i]);
            for k in 0..n {
                if self.slope[(i, k)] != 0.0 {
                    bi = bi + x[k].clone() * self.slope[(i, k)];
                }
            }
            beta = beta + bi * y[i].clone();
        }
        quad.sqrt() + beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(m: &MetricSpec, x: &[f64], y: &[f64]) -> f64 {
        m.norm(x, y)
    }

    #[test]
    fn euclidean_is_the_length() {
        let m = builtin("euclidean", &MetricParams::new().number("dim", 3.0)).unwrap();
        assert_eq!(m.dim(), 3);
        assert!((f(&m, &[0.0; 3], &[1.0, 2.0, 2.0]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn numata_is_alpha_plus_position_dot_velocity() {
        let m = builtin("numata_disk", &MetricParams::new()).unwrap();
        let v = f(&m, &[0.3, -0.2], &[0.5, 1.0]);
        let expected = (0.25f64 + 1.0).sqrt() + 0.3 * 0.5 - 0.2;
        assert!((v - expected).abs() < 1e-15);
        assert!(m.in_domain(&[0.5, 0.5]));
        assert!(!m.in_domain(&[0.8, 0.7]));
        assert!(!m.in_domain(&[1.0, 0.0]));
    }

    #[test]
    fn mink3_adds_the_vertical_component() {
        let m = builtin("mink3", &MetricParams::new().number("b", 0.5)).unwrap();
        assert!((f(&m, &[7.0, -3.0, 1.0], &[0.0, 0.0, 1.0]) - 1.5).abs() < 1e-15);
        assert!((f(&m, &[0.0; 3], &[3.0, 4.0, 0.0]) - 5.0).abs() < 1e-15);
        assert_eq!(m.structure(), Structure::LocallyMinkowski);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            builtin("mink3", &MetricParams::new().number("b", 1.0)),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            builtin("randers", &MetricParams::new().list("b", &[0.6, 0.9])),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            builtin("euclidean", &MetricParams::new().number("b", 0.1)),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            builtin("finsler", &MetricParams::new()),
            Err(Error::UnknownMetric(_))
        ));
        assert!(matches!(
            builtin("riemannian", &MetricParams::new().text("chart", "torus")),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn randers_domain_tracks_one_form_length() {
        let m = builtin(
            "randers",
            &MetricParams::new()
                .list("b", &[0.1, 0.0])
                .list("b_slope", &[0.5, 0.0, 0.0, 0.5])
                .number("radius", 3.0),
        )
        .unwrap();
        assert!(m.in_domain(&[0.5, 0.5]));
        // |b(x)| = |(0.1 + 0.5 * 1.9, 0.5 * 0.2)| > 1
        assert!(!m.in_domain(&[1.9, 0.2]));
    }
}
