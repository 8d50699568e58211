//! Bit-stable CSV writers. Numbers use 17 significant digits, which round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::ScenarioError;
use crate::grid::{Field, Grid};
use crate::stepper::State;

/// Column order of the time series.
pub const TIMESERIES_COLUMNS: [&str; 13] = [
    "t", "mass", "energy", "J", "phi1", "phi2", "min_chi", "max_chi", "min_u", "min_theta",
    "energy_res", "dissip_res", "outer_iters",
];

/// Marker for quantities that are undefined for the run, such as `phi1` when `gamma = 0`.
pub const NA: &str = "NA";

fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn opt(out: &mut String, v: Option<f64>) {
    match v {
        Some(v) => num(out, v),
        None => out.push_str(NA),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), ScenarioError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| ScenarioError::io(path, e))
}

/// Renders records as the time-series CSV.
pub fn format_timeseries(records: &[DiagnosticsRecord]) -> String {
    let mut out = TIMESERIES_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        for (k, v) in [r.t, r.mass, r.energy, r.j].into_iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            num(&mut out, v);
        }
        out.push(',');
        opt(&mut out, r.phi1);
        out.push(',');
        opt(&mut out, r.phi2);
        for v in [r.min_chi, r.max_chi, r.min_u, r.min_theta, r.energy_res] {
            out.push(',');
            num(&mut out, v);
        }
        out.push(',');
        opt(&mut out, r.dissip_res);
        let _ = writeln!(out, ",{}", r.outer_iters);
    }
    out
}

pub fn write_timeseries(records: &[DiagnosticsRecord], path: &Path) -> Result<(), ScenarioError> {
    if records.is_empty() {
        return Err(ScenarioError::Validation("refusing to write an empty time series".into()));
    }
    write_file(path, &format_timeseries(records))
}

fn coordinate_names(grid: &Grid) -> &'static [&'static str] {
    if grid.dim() == 2 {
        &["x", "y"]
    } else {
        &["x"]
    }
}

/// One row per node in grid order: coordinates, then `e, theta, chi, xi, u, p`.
pub fn write_snapshot(state: &State, path: &Path) -> Result<(), ScenarioError> {
    let grid = state.grid();
    let mut out = String::new();
    out.push_str("# t=");
    num(&mut out, state.t);
    out.push('\n');
    let mut header: Vec<&str> = coordinate_names(grid).to_vec();
    header.extend(state.fields().iter().map(|(n, _)| *n));
    out.push_str(&header.join(","));
    out.push('\n');
    for k in 0..grid.node_count() {
        let c = grid.coords(k);
        for (a, _) in coordinate_names(grid).iter().enumerate() {
            if a > 0 {
                out.push(',');
            }
            num(&mut out, c[a]);
        }
        for (_, f) in state.fields() {
            out.push(',');
            num(&mut out, f.values()[k]);
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// Reads a snapshot written by [`write_snapshot`] on `grid`.
///
/// The state is returned as stored; callers decide whether to validate it.
pub fn read_snapshot(path: &Path, grid: &Arc<Grid>) -> Result<State, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    let err = |line: usize, message: String| ScenarioError::Format { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| err(1, "empty snapshot".into()))?;
    let t = first
        .strip_prefix("# t=")
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| err(1, format!("expected `# t=<time>`, got `{first}`")))?;
    let ncoord = coordinate_names(grid).len();
    let mut expected: Vec<&str> = coordinate_names(grid).to_vec();
    expected.extend(["e", "theta", "chi", "xi", "u", "p"]);
    let (_, header) = lines.next().ok_or_else(|| err(2, "missing column header".into()))?;
    if header.split(',').map(str::trim).ne(expected.iter().copied()) {
        return Err(ScenarioError::GridMismatch(format!(
            "columns `{header}` do not match `{}`",
            expected.join(",")
        )));
    }
    let nodes = grid.node_count();
    let mut cols: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(nodes)).collect();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let k = cols[0].len();
        if k == nodes {
            return Err(ScenarioError::GridMismatch(format!("more than {nodes} node rows")));
        }
        let values: Vec<f64> = raw
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(line, format!("unparsable number: {e}")))?;
        if values.len() != expected.len() {
            return Err(err(line, format!("expected {} columns, got {}", expected.len(), values.len())));
        }
        let c = grid.coords(k);
        for a in 0..ncoord {
            if (values[a] - c[a]).abs() > 1e-9 * (1.0 + c[a].abs()) {
                return Err(ScenarioError::GridMismatch(format!(
                    "node {k}: coordinate {} differs from grid value {}",
                    values[a], c[a]
                )));
            }
        }
        for (col, v) in cols.iter_mut().zip(&values[ncoord..]) {
            col.push(*v);
        }
    }
    if cols[0].len() != nodes {
        return Err(err(
            text.lines().count() + 1,
            format!("truncated snapshot: {} of {nodes} node rows", cols[0].len()),
        ));
    }
    let mut fields = cols.into_iter().map(|v| {
        Field::new(grid.clone(), v).map_err(|e| err(0, e.to_string()))
    });
    let mut next = || fields.next().expect("six columns");
    Ok(State { t, e: next()?, theta: next()?, chi: next()?, xi: next()?, u: next()?, p: next()? })
}
