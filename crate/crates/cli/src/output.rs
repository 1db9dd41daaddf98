use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use finsler_curve::Trajectory;

use crate::config::Format;
use crate::CliError;

/// Overrides the directory that relative output paths are resolved against.
pub const OUTPUT_DIR_ENV: &str = "FINSLER_OUTPUT_DIR";

/// Where a run writes: the trajectory file and its summary next to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub trajectory: PathBuf,
    pub summary: PathBuf,
}

impl OutputPaths {
    /// `requested` (or `<command>.<ext>`), made absolute against
    /// `$FINSLER_OUTPUT_DIR` when relative and the variable is set.
    pub fn resolve(requested: Option<&str>, command: &str, format: Format) -> Self {
        let ext = match format {
            Format::Csv => "csv",
            Format::StructuredText => "toml",
        };
        let name = requested
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(format!("{command}.{ext}")));
        let trajectory = match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if name.is_relative() => Path::new(&dir).join(name),
            _ => name,
        };
        Self::beside(trajectory)
    }

    /// `run.csv` gives `run.summary.toml`.
    pub fn beside(trajectory: PathBuf) -> Self {
        let stem = trajectory
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let summary = trajectory.with_file_name(format!("{stem}.summary.toml"));
        OutputPaths { trajectory, summary }
    }

    /// `run.csv` with tag `0003` gives `run-0003.csv`.
    pub fn tagged(&self, tag: &str) -> Self {
        let stem = self
            .trajectory
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let name = match self.trajectory.extension() {
            Some(ext) => format!("{stem}-{tag}.{}", ext.to_string_lossy()),
            None => format!("{stem}-{tag}"),
        };
        Self::beside(self.trajectory.with_file_name(name))
    }
}

pub fn columns(dim: usize) -> Vec<String> {
    let mut out = vec!["s".to_string()];
    for group in ["x", "y", "u", "w"] {
        out.extend((1..=dim).map(|i| format!("{group}{i}")));
    }
    out.extend(["F", "kappa1", "tau2_norm"].map(String::from));
    out
}

fn row(traj: &Trajectory, k: usize) -> Vec<f64> {
    let st = &traj.states[k];
    let d = &traj.diagnostics[k];
    let mut out = vec![traj.s[k]];
    for v in [&st.x, &st.y, &st.u, &st.w] {
        out.extend(v.iter().copied());
    }
    out.extend([d.f, d.kappa1, d.tau2_norm]);
    out
}

/// Seventeen significant digits in scientific notation.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Like [`number`], spelled so TOML parsers accept non-finite values.
fn toml_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        number(v)
    }
}

pub fn trajectory_csv(traj: &Trajectory, dim: usize) -> String {
    let mut out = columns(dim).join(",");
    out.push('\n');
    for k in 0..traj.len() {
        let cells: Vec<String> = row(traj, k).into_iter().map(number).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// The same table as the CSV: a `columns` list and one `rows` entry per sample.
pub fn trajectory_text(traj: &Trajectory, dim: usize) -> String {
    let names: Vec<String> = columns(dim).into_iter().map(|c| format!("\"{c}\"")).collect();
    let mut out = format!("columns = [{}]\nrows = [\n", names.join(", "));
    for k in 0..traj.len() {
        let cells: Vec<String> = row(traj, k).into_iter().map(toml_number).collect();
        let _ = writeln!(out, "  [{}],", cells.join(", "));
    }
    out.push_str("]\n");
    out
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    create_parent(path)?;
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_trajectory(path: &Path, traj: Option<&Trajectory>, dim: usize, format: Format) -> Result<(), CliError> {
    let empty = Trajectory {
        s: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
    };
    let traj = traj.unwrap_or(&empty);
    let text = match format {
        Format::Csv => trajectory_csv(traj, dim),
        Format::StructuredText => trajectory_text(traj, dim),
    };
    write(path, &text)
}
