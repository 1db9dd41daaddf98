use std::time::Instant;

use finsler_core::{Error, Finsler, TangentSample};
use finsler_curve::{bienergy, frenet_frame, residual_2d, Trajectory};
use finsler_metrics::{mink3_engine, mink3_profile, numata_closed_form, numata_engine, numata_identity_audit};
use finsler_solvers::{
    integrate_biharmonic, integrate_geodesic, make_biharmonic_initial, monitor_invariants, MonitorReport, Run,
    Termination,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toml::{Table, Value};

use crate::config::{Command, RunConfig};
use crate::output::{self, OutputPaths};
use crate::{exit, CliError};

/// A first integral counts as constant when its range stays below this.
const LAMBDA_CONSTANT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    ValidationError,
    IntegrationFailure,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::ValidationError => "validation-error",
            Status::IntegrationFailure => "integration-failure",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => exit::SUCCESS,
            Status::ValidationError => exit::VALIDATION,
            Status::IntegrationFailure => exit::INTEGRATION,
        }
    }
}

/// What a finished run reports. Files are only written for `Ok` and
/// `IntegrationFailure`.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: Status,
    pub paths: OutputPaths,
    pub summary: Table,
    pub message: Option<String>,
}

/// A stop before the end of the requested interval.
struct Failure {
    kind: String,
    s: Option<f64>,
    message: String,
}

impl Failure {
    fn from_termination(t: &Termination) -> Option<Failure> {
        (!t.is_completed()).then(|| Failure {
            kind: t.label().into(),
            s: t.stop_s(),
            message: format!("{t:?}"),
        })
    }

    fn from_error(e: &Error) -> Failure {
        let s = match e {
            Error::IntervalExhausted { s, .. } | Error::ReconstructionFailure { s, .. } => Some(*s),
            _ => None,
        };
        Failure {
            kind: "error".into(),
            s,
            message: e.to_string(),
        }
    }
}

struct Produced {
    trajectory: Option<Trajectory>,
    dim: usize,
    sections: Table,
    failure: Option<Failure>,
}

/// Errors a run can stop on after it has started; everything else is a
/// problem with the inputs.
fn is_integration_error(e: &Error) -> bool {
    matches!(e, Error::IntervalExhausted { .. } | Error::ReconstructionFailure { .. })
}

/// Runs `command` and writes its outputs. `out` overrides `output.path`.
/// Only I/O problems are returned as errors.
pub fn execute(command: Command, config: &RunConfig, out: Option<&str>) -> Result<RunOutcome, CliError> {
    let requested = out.or(config.output.path.as_deref());
    let paths = OutputPaths::resolve(requested, command.name(), config.output.format);
    execute_at(command, config, paths)
}

pub(crate) fn execute_at(command: Command, config: &RunConfig, paths: OutputPaths) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let produced = match dispatch(command, config) {
        Ok(p) => p,
        Err(CliError::Geometry(e)) if is_integration_error(&e) => Produced {
            trajectory: None,
            dim: if command == Command::ExampleMink3 { 3 } else { 2 },
            sections: Table::new(),
            failure: Some(Failure::from_error(&e)),
        },
        Err(e @ (CliError::Config(_) | CliError::Geometry(_))) => {
            let mut summary = Table::new();
            summary.insert("command".into(), command.name().into());
            summary.insert("status".into(), Status::ValidationError.label().into());
            return Ok(RunOutcome {
                status: Status::ValidationError,
                paths,
                summary,
                message: Some(e.to_string()),
            });
        }
        Err(e) => return Err(e),
    };
    let status = if produced.failure.is_some() {
        Status::IntegrationFailure
    } else {
        Status::Ok
    };

    let mut summary = Table::new();
    summary.insert("command".into(), command.name().into());
    summary.insert("status".into(), status.label().into());
    summary.insert("partial".into(), Value::Boolean(produced.failure.is_some()));
    summary.insert("runtime_seconds".into(), start.elapsed().as_secs_f64().into());
    if let Some(m) = &config.metric {
        let mut t = Table::new();
        t.insert("name".into(), m.name.clone().into());
        t.insert("backend".into(), m.backend.clone().into());
        summary.insert("metric".into(), Value::Table(t));
    }
    let writes_trajectory = command != Command::Audit;
    if writes_trajectory {
        let mut t = Table::new();
        t.insert("path".into(), paths.trajectory.display().to_string().into());
        t.insert(
            "samples".into(),
            (produced.trajectory.as_ref().map_or(0, Trajectory::len) as i64).into(),
        );
        summary.insert("trajectory".into(), Value::Table(t));
    }
    for (k, v) in produced.sections {
        summary.insert(k, v);
    }
    let message = produced.failure.as_ref().map(|f| f.message.clone());
    if let Some(f) = produced.failure {
        let mut t = Table::new();
        t.insert("kind".into(), f.kind.into());
        if let Some(s) = f.s {
            t.insert("s".into(), s.into());
        }
        t.insert("message".into(), f.message.into());
        summary.insert("failure".into(), Value::Table(t));
    }

    if writes_trajectory {
        output::write_trajectory(
            &paths.trajectory,
            produced.trajectory.as_ref(),
            produced.dim,
            config.output.format,
        )?;
    }
    let text = toml::to_string(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    output::write(&paths.summary, &text)?;
    Ok(RunOutcome {
        status,
        paths,
        summary,
        message,
    })
}

fn dispatch(command: Command, config: &RunConfig) -> Result<Produced, CliError> {
    match command {
        Command::Geodesic => geodesic(config),
        Command::Biharmonic => biharmonic(config, false),
        Command::Invariants => biharmonic(config, true),
        Command::Bienergy => energy(config),
        Command::ExampleNumata => example_numata(config),
        Command::ExampleMink3 => example_mink3(config),
        Command::Audit => audit(config),
    }
}

fn floats(v: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(v.into_iter().map(Value::Float).collect())
}

fn initial_velocity(engine: &Finsler, config: &RunConfig) -> Result<(DVector<f64>, DVector<f64>), CliError> {
    let i = &config.initial;
    let x0 = DVector::from_column_slice(&i.x0);
    let mut y0 = DVector::from_column_slice(&i.y0);
    if i.normalize {
        y0 /= engine.eval_f(&TangentSample::from_vectors(&x0, &y0))?;
    }
    Ok((x0, y0))
}

fn stats_table(run: &Run) -> Value {
    let mut t = Table::new();
    t.insert("termination".into(), run.termination.label().into());
    t.insert("accepted_steps".into(), (run.stats.accepted as i64).into());
    t.insert("rejected_steps".into(), (run.stats.rejected as i64).into());
    t.insert("evaluations".into(), (run.stats.evaluations as i64).into());
    Value::Table(t)
}

fn trajectory_table(traj: &Trajectory) -> Table {
    let mut t = Table::new();
    t.insert("max_f_drift".into(), traj.max_f_drift().into());
    t.insert("max_tau2_norm".into(), traj.max_tau2().into());
    if let Some(last) = traj.last() {
        t.insert("final_x".into(), floats(last.x.iter().copied()));
    }
    t
}

fn monitor_table(traj: &Trajectory, report: &MonitorReport, full: bool) -> Table {
    let mut t = trajectory_table(traj);
    let k = &report.kappa1_series;
    if !k.is_empty() {
        let mean = k.iter().sum::<f64>() / k.len() as f64;
        t.insert("kappa1_mean".into(), mean.into());
        t.insert(
            "kappa1_min".into(),
            k.iter().copied().fold(f64::INFINITY, f64::min).into(),
        );
        t.insert(
            "kappa1_max".into(),
            k.iter().copied().fold(f64::NEG_INFINITY, f64::max).into(),
        );
    }
    t.insert("kappa1_relative_spread".into(), report.kappa1_relative_spread.into());
    if full {
        t.insert("orthogonality".into(), report.orthogonality.into());
        t.insert("max_bitension".into(), report.max_residual().into());
        if let (Some(range), Some(series)) = (&report.lambda_range, &report.lambda_series) {
            t.insert("lambda_initial".into(), floats(series[0].iter().copied()));
            t.insert("lambda_range".into(), floats(range.iter().copied()));
            let worst = report.max_lambda_range().unwrap_or(f64::NAN);
            t.insert("lambda_constant".into(), Value::Boolean(worst <= LAMBDA_CONSTANT));
            t.insert("lambda_tolerance".into(), LAMBDA_CONSTANT.into());
        }
        if let Some(r) = report.lambda_y_residual {
            t.insert("lambda_y_residual".into(), r.into());
        }
    }
    t
}

fn geodesic(config: &RunConfig) -> Result<Produced, CliError> {
    let engine = config.engine()?;
    let cfg = config.integrator()?;
    config.check_initial(engine.dim(), false)?;
    let (x0, y0) = initial_velocity(&engine, config)?;
    let run = integrate_geodesic(&engine, &x0, &y0, &cfg)?;
    let mut sections = Table::new();
    sections.insert("invariants".into(), Value::Table(trajectory_table(&run.trajectory)));
    sections.insert("integrator".into(), stats_table(&run));
    Ok(Produced {
        failure: Failure::from_termination(&run.termination),
        dim: engine.dim(),
        trajectory: Some(run.trajectory),
        sections,
    })
}

fn biharmonic_run(engine: &Finsler, config: &RunConfig) -> Result<(Run, MonitorReport), CliError> {
    let cfg = config.integrator()?;
    config.check_initial(engine.dim(), true)?;
    let (x0, y0) = initial_velocity(engine, config)?;
    let i = &config.initial;
    let hint = DVector::from_column_slice(i.e2_hint.as_deref().unwrap_or_default());
    let e3 = i.e3_hint.as_deref().map(DVector::from_column_slice);
    let state = make_biharmonic_initial(engine, &x0, &y0, i.kappa1, &hint, i.kappa2, e3.as_ref())?;
    Ok(integrate_biharmonic(engine, &state, &cfg)?)
}

fn biharmonic(config: &RunConfig, full: bool) -> Result<Produced, CliError> {
    let engine = config.engine()?;
    let (run, report) = biharmonic_run(&engine, config)?;
    let mut sections = Table::new();
    sections.insert(
        "invariants".into(),
        Value::Table(monitor_table(&run.trajectory, &report, full)),
    );
    sections.insert("integrator".into(), stats_table(&run));
    Ok(Produced {
        failure: Failure::from_termination(&run.termination),
        dim: engine.dim(),
        trajectory: Some(run.trajectory),
        sections,
    })
}

/// Bienergy of the integrated curve: a geodesic when `kappa1 = 0` and no
/// hint is given, a biharmonic run otherwise.
fn energy(config: &RunConfig) -> Result<Produced, CliError> {
    let engine = config.engine()?;
    let i = &config.initial;
    let run = if i.kappa1 == 0.0 && i.e2_hint.is_none() {
        config.check_initial(engine.dim(), false)?;
        let (x0, y0) = initial_velocity(&engine, config)?;
        integrate_geodesic(&engine, &x0, &y0, &config.integrator()?)?
    } else {
        biharmonic_run(&engine, config)?.0
    };
    let (e1, e2) = bienergy(&engine, &run.trajectory)?;
    let mut t = Table::new();
    t.insert("e1".into(), e1.into());
    t.insert("e2".into(), e2.into());
    if let (Some(a), Some(b)) = (run.trajectory.s.first(), run.trajectory.s.last()) {
        t.insert("s_span".into(), floats([*a, *b]));
    }
    let mut sections = Table::new();
    sections.insert("energy".into(), Value::Table(t));
    sections.insert("invariants".into(), Value::Table(trajectory_table(&run.trajectory)));
    sections.insert("integrator".into(), stats_table(&run));
    Ok(Produced {
        failure: Failure::from_termination(&run.termination),
        dim: engine.dim(),
        trajectory: Some(run.trajectory),
        sections,
    })
}

fn example_numata(config: &RunConfig) -> Result<Produced, CliError> {
    let section = &config.numata;
    let params = section.params();
    let engine = numata_engine();
    let traj = numata_closed_form(&params, section.samples, section.s_end)?;
    let report = monitor_invariants(&engine, &traj)?;
    let mut residual: f64 = 0.0;
    for st in &traj.states {
        residual = residual.max(residual_2d(&engine, &st.x, &st.y, params.kappa1, &st.u)?.abs());
    }
    let mut inv = monitor_table(&traj, &report, false);
    inv.insert("max_residual_2d".into(), residual.into());
    let mut p = Table::new();
    p.insert("kappa1".into(), params.kappa1.into());
    p.insert("nu".into(), params.nu.into());
    p.insert("mu".into(), params.mu().into());
    p.insert("gamma_phase".into(), params.gamma_phase.into());
    p.insert("s_limit".into(), params.s_limit().into());
    let mut sections = Table::new();
    sections.insert("invariants".into(), Value::Table(inv));
    sections.insert("closed_form".into(), Value::Table(p));
    Ok(Produced {
        trajectory: Some(traj),
        dim: 2,
        sections,
        failure: None,
    })
}

fn example_mink3(config: &RunConfig) -> Result<Produced, CliError> {
    let section = &config.mink3;
    let params = section.params();
    let profile = mink3_profile(&params, (section.s_span[0], section.s_span[1]), section.samples)?;
    let engine = mink3_engine(params.b)?;
    let traj = &profile.trajectory;
    let report = monitor_invariants(&engine, traj)?;
    // the second curvature is measured only
    let mut kappa2 = Vec::with_capacity(traj.len());
    for st in &traj.states {
        let frame = frenet_frame(&engine, &st.x, &st.y, &[st.u.clone(), st.w.clone()])?;
        kappa2.push(frame.curvatures.get(1).copied().unwrap_or(0.0));
    }
    let mut inv = monitor_table(traj, &report, true);
    if !kappa2.is_empty() {
        inv.insert(
            "kappa2_min".into(),
            kappa2.iter().copied().fold(f64::INFINITY, f64::min).into(),
        );
        inv.insert(
            "kappa2_max".into(),
            kappa2.iter().copied().fold(f64::NEG_INFINITY, f64::max).into(),
        );
    }
    let mut p = Table::new();
    p.insert("lambda".into(), floats(profile.lambda.iter().copied()));
    p.insert(
        "alpha_min".into(),
        profile.alpha.iter().copied().fold(f64::INFINITY, f64::min).into(),
    );
    p.insert(
        "alpha_max".into(),
        profile.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max).into(),
    );
    p.insert("constant_solutions".into(), floats(params.constant_solutions()));
    let failure = profile.valid_until.map(|s| Failure {
        kind: "window-exit".into(),
        s: Some(s),
        message: format!(
            "alpha left its admissible window {:?} at s = {s}",
            params.alpha_window()
        ),
    });
    let mut sections = Table::new();
    sections.insert("invariants".into(), Value::Table(inv));
    sections.insert("profile".into(), Value::Table(p));
    Ok(Produced {
        trajectory: Some(profile.trajectory),
        dim: 3,
        sections,
        failure,
    })
}

fn audit(config: &RunConfig) -> Result<Produced, CliError> {
    let a = &config.audit;
    if !(a.radius > 0.0 && a.radius < 1.0) || a.samples == 0 {
        return Err(CliError::Config("audit needs samples > 0 and 0 < radius < 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let samples: Vec<TangentSample> = (0..a.samples)
        .map(|_| {
            let (r, t): (f64, f64) = (
                a.radius * rng.gen::<f64>().sqrt(),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let (len, phi): (f64, f64) = (rng.gen_range(0.3..3.0), rng.gen_range(0.0..std::f64::consts::TAU));
            TangentSample::new(vec![r * t.cos(), r * t.sin()], vec![len * phi.cos(), len * phi.sin()])
        })
        .collect();
    let report = numata_identity_audit(&numata_engine(), &samples)?;
    let mut t = Table::new();
    t.insert("samples".into(), (report.samples as i64).into());
    t.insert("max".into(), report.max().into());
    t.insert("spray".into(), report.spray.into());
    t.insert("flag_curvature".into(), report.flag_curvature.into());
    t.insert("landsberg".into(), report.landsberg.into());
    t.insert("metric_split".into(), report.metric_split.into());
    t.insert("hessians".into(), report.hessians.into());
    t.insert("cartan_split".into(), report.cartan_split.into());
    t.insert("alpha_third".into(), report.alpha_third.into());
    let mut sections = Table::new();
    sections.insert("audit".into(), Value::Table(t));
    Ok(Produced {
        trajectory: None,
        dim: 2,
        sections,
        failure: None,
    })
}
