use finsler_core::numeric::mean_and_stdev;
use finsler_core::{Finsler, Result, Structure};
use finsler_curve::Trajectory;
use nalgebra::DVector;

/// Conserved-quantity diagnostics of a trajectory; every series has one
/// entry per sample.
#[derive(Clone, Debug)]
pub struct MonitorReport {
    /// `max |F(x, y) - 1|`
    pub f_drift: f64,
    pub kappa1_series: Vec<f64>,
    /// `stdev / mean` of `kappa1`, zero for geodesics.
    pub kappa1_relative_spread: f64,
    /// `lambda_h = g_hj (D u)^j`, only for locally Minkowski charts.
    pub lambda_series: Option<Vec<DVector<f64>>>,
    /// Per-component `max - min` of `lambda`.
    pub lambda_range: Option<Vec<f64>>,
    /// `max |lambda_i y^i + kappa1^2|`
    pub lambda_y_residual: Option<f64>,
    pub residual_series: Vec<f64>,
    /// `max |<T, u>|`
    pub orthogonality: f64,
}

impl MonitorReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_series
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }

    pub fn max_lambda_range(&self) -> Option<f64> {
        self.lambda_range
            .as_ref()
            .map(|r| r.iter().copied().fold(0.0, f64::max))
    }
}

pub fn monitor_invariants(engine: &Finsler, trajectory: &Trajectory) -> Result<MonitorReport> {
    let kappa1_series: Vec<f64> = trajectory.diagnostics.iter().map(|d| d.kappa1).collect();
    let residual_series = trajectory.diagnostics.iter().map(|d| d.tau2_norm).collect();
    let (mean, stdev) = mean_and_stdev(&kappa1_series);
    let kappa1_relative_spread = if mean > 1e-12 { stdev / mean } else { 0.0 };
    let minkowski = engine.metric().structure() == Structure::LocallyMinkowski;

    let mut orthogonality: f64 = 0.0;
    let mut lambdas = Vec::new();
    let mut lambda_y: f64 = 0.0;
    for (st, d) in trajectory.states.iter().zip(&trajectory.diagnostics) {
        let (g, _) = engine.metric_tensor(&st.sample())?;
        orthogonality = orthogonality.max(st.y.dot(&(&g * &st.u)).abs());
        if minkowski {
            let lambda = &g * &st.w;
            lambda_y = lambda_y.max((lambda.dot(&st.y) + d.kappa1 * d.kappa1).abs());
            lambdas.push(lambda);
        }
    }
    let (lambda_series, lambda_range, lambda_y_residual) = if minkowski && !lambdas.is_empty() {
        let n = lambdas[0].len();
        let range = (0..n)
            .map(|i| {
                let (lo, hi) = lambdas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
                    (lo.min(l[i]), hi.max(l[i]))
                });
                hi - lo
            })
            .collect();
        (Some(lambdas), Some(range), Some(lambda_y))
    } else {
        (None, None, None)
    };
    Ok(MonitorReport {
        f_drift: trajectory.max_f_drift(),
        kappa1_series,
        kappa1_relative_spread,
        lambda_series,
        lambda_range,
        lambda_y_residual,
        residual_series,
        orthogonality,
    })
}
