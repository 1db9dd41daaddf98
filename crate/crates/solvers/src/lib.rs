//! Initial-value integration of the geodesic and biharmonic curve
//! equations, construction of Frenet-compatible initial data, and
//! conserved-quantity monitors.

mod config;
pub mod dopri;
mod initial;
mod integrate;
mod monitor;

pub use config::IntegratorConfig;
pub use dopri::StepStats;
pub use initial::make_biharmonic_initial;
pub use integrate::{integrate_biharmonic, integrate_geodesic, Run};
pub use monitor::{monitor_invariants, MonitorReport};

/// How an integration ended. Anything but `Completed` leaves a partial
/// trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    DomainExit { s: f64 },
    StepUnderflow { s: f64 },
    AdmissibilityLost { s: f64, drift: f64 },
    GeometryFailure { s: f64, message: String },
    MaxSteps { s: f64 },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::DomainExit { .. } => "domain-exit",
            Termination::StepUnderflow { .. } => "step-underflow",
            Termination::AdmissibilityLost { .. } => "admissibility-lost",
            Termination::GeometryFailure { .. } => "geometry-failure",
            Termination::MaxSteps { .. } => "max-steps",
        }
    }

    /// Arc length at which the run stopped, if it stopped early.
    pub fn stop_s(&self) -> Option<f64> {
        match self {
            Termination::Completed => None,
            Termination::DomainExit { s }
            | Termination::StepUnderflow { s }
            | Termination::AdmissibilityLost { s, .. }
            | Termination::GeometryFailure { s, .. }
            | Termination::MaxSteps { s } => Some(*s),
        }
    }
}
