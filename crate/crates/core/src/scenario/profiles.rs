use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::ScenarioError;
use crate::grid::{Field, Grid};

/// Shape of an initial profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProfileKind {
    /// `value` everywhere.
    #[default]
    Constant,
    /// Linear in `x` from `low` at the left edge to `high` at the right edge.
    Ramp,
    /// `base + amplitude exp(-|x - center|^2 / (2 width^2))`.
    GaussianBump,
    /// `low` for `x < position`, `high` otherwise.
    Step,
    /// Nodal values read from `path`.
    Csv,
}

impl FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "constant" => Ok(ProfileKind::Constant),
            "ramp" => Ok(ProfileKind::Ramp),
            "gaussian-bump" => Ok(ProfileKind::GaussianBump),
            "step" => Ok(ProfileKind::Step),
            "csv" => Ok(ProfileKind::Csv),
            other => Err(format!(
                "unknown profile `{other}` (expected constant, ramp, gaussian-bump, step or csv)"
            )),
        }
    }
}

/// A named analytic preset or a CSV import; unset parameters take documented defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Profile {
    pub kind: ProfileKind,
    /// Constant value; default 1.
    pub value: Option<f64>,
    /// Default 0.
    pub low: Option<f64>,
    /// Default 1.
    pub high: Option<f64>,
    /// Default 0.
    pub base: Option<f64>,
    /// Default 1.
    pub amplitude: Option<f64>,
    /// Bump centre in `x`; default mid-domain.
    pub center: Option<f64>,
    /// Bump centre in `y` (2D); default mid-domain.
    pub center_y: Option<f64>,
    /// Default a tenth of the `x` length.
    pub width: Option<f64>,
    /// Step location in `x`; default mid-domain.
    pub position: Option<f64>,
    pub path: Option<PathBuf>,
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile { kind: ProfileKind::Constant, value: Some(value), ..Profile::default() }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let params = [
            self.value,
            self.low,
            self.high,
            self.base,
            self.amplitude,
            self.center,
            self.center_y,
            self.width,
            self.position,
        ];
        if params.iter().flatten().any(|v| !v.is_finite()) {
            return Err("profile parameters must be finite".into());
        }
        if self.kind == ProfileKind::GaussianBump && self.width.is_some_and(|w| w <= 0.0) {
            return Err("gaussian-bump width > 0 required".into());
        }
        if self.kind == ProfileKind::Csv && self.path.is_none() {
            return Err("csv profile needs a path".into());
        }
        Ok(())
    }

    /// Samples the profile at the nodes of `grid`; CSV paths are taken relative to `base_dir`.
    pub fn sample(&self, grid: &Arc<Grid>, base_dir: &Path) -> Result<Field, ScenarioError> {
        self.validate().map_err(ScenarioError::Validation)?;
        let lx = grid.length(0);
        let ly = if grid.dim() == 2 { grid.length(1) } else { 0.0 };
        let low = self.low.unwrap_or(0.0);
        let high = self.high.unwrap_or(1.0);
        let field = match self.kind {
            ProfileKind::Constant => Ok(Field::constant(grid.clone(), self.value.unwrap_or(1.0))),
            ProfileKind::Ramp => Field::from_fn(grid.clone(), |x| low + (high - low) * x[0] / lx),
            ProfileKind::GaussianBump => {
                let base = self.base.unwrap_or(0.0);
                let amp = self.amplitude.unwrap_or(1.0);
                let cx = self.center.unwrap_or(0.5 * lx);
                let cy = self.center_y.unwrap_or(0.5 * ly);
                let w = self.width.unwrap_or(0.1 * lx);
                Field::from_fn(grid.clone(), |x| {
                    let r2 = (x[0] - cx).powi(2) + if grid.dim() == 2 { (x[1] - cy).powi(2) } else { 0.0 };
                    base + amp * (-r2 / (2.0 * w * w)).exp()
                })
            }
            ProfileKind::Step => {
                let pos = self.position.unwrap_or(0.5 * lx);
                Field::from_fn(grid.clone(), |x| if x[0] < pos { low } else { high })
            }
            ProfileKind::Csv => {
                let rel = self.path.as_deref().unwrap_or(Path::new(""));
                let path = if rel.is_absolute() { rel.to_path_buf() } else { base_dir.join(rel) };
                return read_nodal_csv(&path, grid);
            }
        };
        field.map_err(|e| ScenarioError::Validation(e.to_string()))
    }
}

/// Reads one value per non-comment line (the last comma-separated column) in node order.
pub fn read_nodal_csv(path: &Path, grid: &Arc<Grid>) -> Result<Field, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    let mut values = Vec::with_capacity(grid.node_count());
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let last = content.rsplit(',').next().unwrap_or("").trim();
        match last.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            // a non-numeric first row is a header
            _ if values.is_empty() && last.parse::<f64>().is_err() => continue,
            _ => {
                return Err(ScenarioError::Format {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected a finite number, got `{last}`"),
                })
            }
        }
    }
    if values.len() != grid.node_count() {
        return Err(ScenarioError::GridMismatch(format!(
            "{} holds {} values, grid has {} nodes",
            path.display(),
            values.len(),
            grid.node_count()
        )));
    }
    Field::new(grid.clone(), values).map_err(|e| ScenarioError::Validation(e.to_string()))
}
