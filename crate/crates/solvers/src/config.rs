use finsler_core::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub s_span: (f64, f64),
    /// Report on a uniform grid of spacing `output_step` instead of at every
    /// accepted step.
    pub dense_output: bool,
    pub output_step: f64,
    pub max_steps: usize,
    /// Largest tolerated `|F - 1|` before a biharmonic run is stopped.
    pub max_f_drift: f64,
    /// Rescale `y` to unit speed after every accepted step.
    pub renormalize: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_step: 0.05,
            min_step: 1e-10,
            s_span: (0.0, 1.0),
            dense_output: true,
            output_step: 0.01,
            max_steps: 200_000,
            max_f_drift: 1e-4,
            renormalize: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_span(mut self, s0: f64, s1: f64) -> Self {
        self.s_span = (s0, s1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.min_step > 0.0 && self.min_step <= self.max_step) {
            return bad("need 0 < min_step <= max_step");
        }
        let (s0, s1) = self.s_span;
        if !(s0.is_finite() && s1.is_finite() && s1 > s0) {
            return bad("s_span must be a finite increasing interval");
        }
        if self.dense_output && !(self.output_step > 0.0) {
            return bad("output_step must be positive");
        }
        if !(self.max_f_drift > 0.0) {
            return bad("max_f_drift must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}
