use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use toml::{Table, Value};

use crate::config::{Command, RunConfig};
use crate::output::{self, OutputPaths};
use crate::run::{execute_at, RunOutcome, Status};
use crate::CliError;

/// Parameter grid: each dotted config key maps to the values it takes.
/// Runs cover the Cartesian product, the last key varying fastest.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub grid: std::collections::BTreeMap<String, Vec<Value>>,
}

impl SweepGrid {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let grid: SweepGrid = toml::from_str(text).map_err(|e| CliError::Config(format!("sweep grid: {e}")))?;
        if grid.grid.is_empty() || grid.grid.values().any(Vec::is_empty) {
            return Err(CliError::Config(
                "sweep grid needs at least one key with at least one value".into(),
            ));
        }
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Every combination as `(key, value)` overrides.
    pub fn combinations(&self) -> Vec<Vec<(String, Value)>> {
        let mut out = vec![Vec::new()];
        for (key, values) in &self.grid {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<(String, Value)>| {
                    values.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push((key.clone(), v.clone()));
                        next
                    })
                })
                .collect();
        }
        out
    }
}

/// Sets `a.b.c = value` in `root`, creating intermediate tables.
fn set_path(root: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut table = root;
    for part in parents {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("sweep key `{key}`: `{part}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

pub struct SweepOutcome {
    pub runs: Vec<RunOutcome>,
    pub index: PathBuf,
}

impl SweepOutcome {
    /// The worst status over all runs.
    pub fn exit_code(&self) -> i32 {
        self.runs.iter().map(|r| r.status.exit_code()).max().unwrap_or(0)
    }
}

/// Runs every grid point on the rayon pool. Run `k` writes to the base
/// output path tagged `-kkkk`; an index of all runs goes to `<stem>-sweep.toml`.
pub fn run_sweep(
    command: Command,
    base: &Table,
    grid: &SweepGrid,
    out: Option<&str>,
) -> Result<SweepOutcome, CliError> {
    let base_config = RunConfig::from_value(Value::Table(base.clone()))?;
    let requested = out.or(base_config.output.path.as_deref());
    let paths = OutputPaths::resolve(requested, command.name(), base_config.output.format);
    let combos = grid.combinations();
    let runs = combos
        .par_iter()
        .enumerate()
        .map(|(k, overrides)| {
            let tagged = paths.tagged(&format!("{k:04}"));
            let mut table = base.clone();
            let config = overrides
                .iter()
                .try_for_each(|(key, v)| set_path(&mut table, key, v.clone()))
                .and_then(|_| RunConfig::from_value(Value::Table(table)));
            match config {
                Ok(c) => execute_at(command, &c, tagged),
                Err(e) => Ok(RunOutcome {
                    status: Status::ValidationError,
                    paths: tagged,
                    summary: Table::new(),
                    message: Some(e.to_string()),
                }),
            }
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut entries = Vec::with_capacity(runs.len());
    for (k, (run, overrides)) in runs.iter().zip(&combos).enumerate() {
        let mut t = Table::new();
        t.insert("index".into(), (k as i64).into());
        t.insert("status".into(), run.status.label().into());
        t.insert("exit_code".into(), (run.status.exit_code() as i64).into());
        t.insert("trajectory".into(), run.paths.trajectory.display().to_string().into());
        t.insert("summary".into(), run.paths.summary.display().to_string().into());
        if let Some(m) = &run.message {
            t.insert("message".into(), m.clone().into());
        }
        let mut o = Table::new();
        for (key, v) in overrides {
            o.insert(key.clone(), v.clone());
        }
        t.insert("overrides".into(), Value::Table(o));
        entries.push(Value::Table(t));
    }
    let mut index = Table::new();
    index.insert("command".into(), command.name().into());
    index.insert("run".into(), Value::Array(entries));
    let stem = paths
        .trajectory
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let index_path = paths.trajectory.with_file_name(format!("{stem}-sweep.toml"));
    let text = toml::to_string(&index).map_err(|e| CliError::Config(e.to_string()))?;
    output::write(&index_path, &text)?;
    Ok(SweepOutcome {
        runs,
        index: index_path,
    })
}
