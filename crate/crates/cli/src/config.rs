use std::collections::BTreeMap;
use std::path::Path;

use finsler_core::backend::backend_by_name;
use finsler_core::metrics::{builtin, MetricParams, ParamValue};
use finsler_core::Finsler;
use finsler_metrics::{Mink3ProfileParams, NumataClosedFormParams};
use finsler_solvers::IntegratorConfig;
use serde::Deserialize;

use crate::CliError;

/// The commands understood by the tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Geodesic,
    Biharmonic,
    Invariants,
    ExampleNumata,
    ExampleMink3,
    Bienergy,
    Audit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Geodesic => "geodesic",
            Command::Biharmonic => "biharmonic",
            Command::Invariants => "invariants",
            Command::ExampleNumata => "example-numata",
            Command::ExampleMink3 => "example-mink3",
            Command::Bienergy => "bienergy",
            Command::Audit => "audit",
        }
    }
}

/// One run, as read from a TOML file. Every section except the one the
/// command needs may be omitted.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: Option<MetricSection>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub numata: NumataSection,
    #[serde(default)]
    pub mink3: Mink3Section,
    #[serde(default)]
    pub audit: AuditSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
    #[serde(default = "default_backend")]
    pub backend: String,
}

fn default_backend() -> String {
    "jet".into()
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub x0: Vec<f64>,
    #[serde(default)]
    pub y0: Vec<f64>,
    #[serde(default)]
    pub kappa1: f64,
    pub e2_hint: Option<Vec<f64>>,
    #[serde(default)]
    pub kappa2: f64,
    pub e3_hint: Option<Vec<f64>>,
    /// Rescale `y0` to `F(x0, y0) = 1` before integrating.
    #[serde(default)]
    pub normalize: bool,
}

/// Overrides of [`IntegratorConfig`]; absent keys keep the defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub min_step: Option<f64>,
    pub s_span: Option<[f64; 2]>,
    pub dense_output: Option<bool>,
    pub output_step: Option<f64>,
    pub max_steps: Option<usize>,
    pub max_f_drift: Option<f64>,
    pub renormalize: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    StructuredText,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumataSection {
    pub kappa1: f64,
    pub nu: f64,
    pub gamma_phase: f64,
    pub sign: f64,
    pub x0: [f64; 2],
    pub project_x0: bool,
    pub samples: usize,
    pub s_end: f64,
}

impl Default for NumataSection {
    fn default() -> Self {
        let p = NumataClosedFormParams::default();
        NumataSection {
            kappa1: p.kappa1,
            nu: p.nu,
            gamma_phase: p.gamma_phase,
            sign: p.sign,
            x0: p.x0,
            project_x0: p.project_x0,
            samples: 101,
            s_end: 1.0,
        }
    }
}

impl NumataSection {
    pub fn params(&self) -> NumataClosedFormParams {
        NumataClosedFormParams {
            kappa1: self.kappa1,
            nu: self.nu,
            gamma_phase: self.gamma_phase,
            sign: self.sign,
            x0: self.x0,
            project_x0: self.project_x0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mink3Section {
    pub kappa1: f64,
    pub gamma: f64,
    pub alpha0: f64,
    pub dalpha0: f64,
    pub b: f64,
    pub samples: usize,
    pub s_span: [f64; 2],
}

impl Default for Mink3Section {
    fn default() -> Self {
        Mink3Section {
            kappa1: 0.5,
            gamma: -0.5,
            alpha0: 1.0,
            dalpha0: 0.05,
            b: 0.5,
            samples: 101,
            s_span: [0.0, 1.0],
        }
    }
}

impl Mink3Section {
    pub fn params(&self) -> Mink3ProfileParams {
        Mink3ProfileParams {
            kappa1: self.kappa1,
            gamma_const: self.gamma,
            alpha0: self.alpha0,
            dalpha0: self.dalpha0,
            b: self.b,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSection {
    pub samples: usize,
    pub seed: u64,
    /// Samples are drawn from the disk `|x| < radius`.
    pub radius: f64,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            samples: 100,
            seed: 0,
            radius: 0.9,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_value(value: toml::Value) -> Result<Self, CliError> {
        value
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The engine named by `[metric]`.
    pub fn engine(&self) -> Result<Finsler, CliError> {
        let m = self
            .metric
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [metric] section".into()))?;
        let mut params = MetricParams::new();
        for (key, value) in &m.params {
            params = params.with(key, param_value(key, value)?);
        }
        let engine = Finsler::new(builtin(&m.name, &params)?).with_backend(backend_by_name(&m.backend)?);
        Ok(engine)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let s = &self.integrator;
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            rel_tol: s.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: s.abs_tol.unwrap_or(d.abs_tol),
            max_step: s.max_step.unwrap_or(d.max_step),
            min_step: s.min_step.unwrap_or(d.min_step),
            s_span: s.s_span.map(|[a, b]| (a, b)).unwrap_or(d.s_span),
            dense_output: s.dense_output.unwrap_or(d.dense_output),
            output_step: s.output_step.unwrap_or(d.output_step),
            max_steps: s.max_steps.unwrap_or(d.max_steps),
            max_f_drift: s.max_f_drift.unwrap_or(d.max_f_drift),
            renormalize: s.renormalize.unwrap_or(d.renormalize),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that `x0`, `y0` and the hints have the dimension of the metric.
    pub fn check_initial(&self, dim: usize, need_hint: bool) -> Result<(), CliError> {
        let i = &self.initial;
        let check = |name: &str, v: &[f64]| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "initial.{name} has {} entries, metric dimension is {dim}",
                    v.len()
                )))
            }
        };
        check("x0", &i.x0)?;
        check("y0", &i.y0)?;
        match (&i.e2_hint, need_hint) {
            (Some(h), _) => check("e2_hint", h)?,
            (None, true) => {
                return Err(CliError::Config(
                    "initial.e2_hint is required for biharmonic runs".into(),
                ))
            }
            (None, false) => {}
        }
        if let Some(h) = &i.e3_hint {
            check("e3_hint", h)?;
        }
        Ok(())
    }
}

fn param_value(key: &str, value: &toml::Value) -> Result<ParamValue, CliError> {
    let number = |v: &toml::Value| match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    let bad = || {
        CliError::Config(format!(
            "metric.params.{key} must be a number, a list of numbers or a string"
        ))
    };
    match value {
        toml::Value::String(s) => Ok(ParamValue::Text(s.clone())),
        toml::Value::Array(items) => items
            .iter()
            .map(number)
            .collect::<Option<Vec<_>>>()
            .map(ParamValue::List)
            .ok_or_else(bad),
        other => number(other).map(ParamValue::Number).ok_or_else(bad),
    }
}
