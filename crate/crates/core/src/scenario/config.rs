use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::constitutive::HFamily;
use crate::error::ScenarioError;
use crate::init_reg::{TemperaturePathway, DEFAULT_SMOOTHING_INDEX};
use crate::stepper::{ModelParams, StepperConfig};

use super::profiles::{Profile, ProfileKind};

/// What a scenario run produces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Integrate and write the time series and snapshots.
    #[default]
    Run,
    /// Integrate an isolated system and track the stationary residual.
    SteadyCheck,
    /// Sweep `gamma > 0` and fit the decay rate of `Phi1`.
    DecayStudy,
    /// Observed orders in `dt` and mesh, `nu`-sweep and smoothing-index study.
    ConvergenceStudy,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Run => "run",
            Mode::SteadyCheck => "steady-check",
            Mode::DecayStudy => "decay-study",
            Mode::ConvergenceStudy => "convergence-study",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "run" => Ok(Mode::Run),
            "steady-check" => Ok(Mode::SteadyCheck),
            "decay-study" => Ok(Mode::DecayStudy),
            "convergence-study" => Ok(Mode::ConvergenceStudy),
            other => Err(ScenarioError::Validation(format!(
                "unknown mode `{other}` (expected run, steady-check, decay-study or convergence-study)"
            ))),
        }
    }
}

/// Mesh description: one entry per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub cells: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { cells: vec![128], lengths: vec![1.0] }
    }
}

/// Initial data and its smoothing.
#[derive(Clone, Debug, PartialEq)]
pub struct InitSpec {
    /// Smoothing index `n`.
    pub n: usize,
    pub pathway: TemperaturePathway,
    pub theta: Profile,
    pub chi: Profile,
    pub u: Profile,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            n: DEFAULT_SMOOTHING_INDEX,
            pathway: TemperaturePathway::Positive,
            theta: Profile::constant(1.0),
            chi: Profile::constant(0.5),
            u: Profile::constant(1.0),
        }
    }
}

/// Parameters of the study modes.
#[derive(Clone, Debug, PartialEq)]
pub struct StudySpec {
    /// Refinement levels of the order studies (at least 3).
    pub levels: usize,
    pub nus: Vec<f64>,
    pub n_values: Vec<usize>,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec { levels: 3, nus: vec![1e-2, 1e-3, 1e-4], n_values: vec![10, 100, 1000] }
    }
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub grid: GridSpec,
    pub params: ModelParams,
    pub stepper: StepperConfig,
    pub init: InitSpec,
    pub t_end: f64,
    /// Time between snapshots; must divide `t_end`.
    pub output_interval: f64,
    pub output_dir: PathBuf,
    /// Boundary permeabilities swept by the decay study; defaults to `[params.gamma]`.
    pub decay_gammas: Option<Vec<f64>>,
    pub study: StudySpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            mode: Mode::Run,
            grid: GridSpec::default(),
            params: ModelParams::default(),
            stepper: StepperConfig::default(),
            init: InitSpec::default(),
            t_end: 1.0,
            output_interval: 0.1,
            output_dir: PathBuf::from("out"),
            decay_gammas: None,
            study: StudySpec::default(),
        }
    }
}

impl Scenario {
    pub fn decay_gammas(&self) -> Vec<f64> {
        self.decay_gammas.clone().unwrap_or_else(|| vec![self.params.gamma])
    }

    /// Checks every invariant, naming the violated one.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |m: String| Err(ScenarioError::Validation(m));
        let dim = self.grid.cells.len();
        if !(dim == 1 || dim == 2) || self.grid.lengths.len() != dim {
            return fail(format!(
                "grid needs 1 or 2 axes with matching cells and lengths, got {} and {}",
                dim,
                self.grid.lengths.len()
            ));
        }
        if self.grid.cells.contains(&0) {
            return fail("grid.cells > 0 required".into());
        }
        if self.grid.lengths.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return fail("grid.lengths > 0 required".into());
        }
        if !(self.params.mu.is_finite() && self.params.mu > 0.0) {
            return fail(format!("mu > 0 required, got {}", self.params.mu));
        }
        if !(self.params.gamma.is_finite() && self.params.gamma >= 0.0) {
            return fail(format!("gamma >= 0 required, got {}", self.params.gamma));
        }
        if !(self.stepper.nu.is_finite() && self.stepper.nu >= 0.0) {
            return fail(format!("nu >= 0 required, got {}", self.stepper.nu));
        }
        self.params.h.validate().map_err(|e| ScenarioError::Validation(e.to_string()))?;
        self.stepper.validate().map_err(|e| ScenarioError::Validation(e.to_string()))?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return fail(format!("t_end > 0 required, got {}", self.t_end));
        }
        if !(self.output_interval.is_finite() && self.output_interval > 0.0) {
            return fail(format!("output.interval > 0 required, got {}", self.output_interval));
        }
        let ratio = self.t_end / self.output_interval;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return fail(format!(
                "output cadence must divide the run: t_end / output.interval = {ratio} is not a positive integer"
            ));
        }
        if self.init.n == 0 {
            return fail("init.n > 0 required".into());
        }
        for (name, p) in [("theta", &self.init.theta), ("chi", &self.init.chi), ("u", &self.init.u)] {
            p.validate().map_err(|m| ScenarioError::Validation(format!("init.{name}: {m}")))?;
        }
        if self.study.levels < 3 {
            return fail(format!("study.levels >= 3 required, got {}", self.study.levels));
        }
        if self.study.nus.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
            return fail("study.nus entries must be >= 0".into());
        }
        if self.study.n_values.contains(&0) {
            return fail("study.n_values entries must be > 0".into());
        }
        match self.mode {
            Mode::DecayStudy => {
                let gammas = self.decay_gammas();
                if gammas.is_empty() {
                    return fail("decay-study needs at least one gamma".into());
                }
                if let Some(g) = gammas.iter().find(|&&g| !(g.is_finite() && g > 0.0)) {
                    return fail(format!(
                        "decay-study requires gamma > 0: Phi1 decays exponentially only through a \
                         permeable boundary, and with gamma = 0 the lift A_gamma zeta = u is undefined (got gamma = {g}); \
                         set model.gamma or decay.gammas"
                    ));
                }
            }
            Mode::SteadyCheck => {
                if self.params.gamma != 0.0 {
                    return fail(format!(
                        "steady-check requires gamma = 0: constant equilibria exist only for the isolated system (got gamma = {})",
                        self.params.gamma
                    ));
                }
            }
            Mode::Run | Mode::ConvergenceStudy => {}
        }
        Ok(())
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ScenarioError> {
    value.trim().parse::<T>().map_err(|_| ScenarioError::Parse {
        line,
        message: format!("invalid value `{value}` for `{key}`"),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>, ScenarioError> {
    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|v| parse_value(line, key, v)).collect()
}

fn unquote(value: &str) -> &str {
    let v = value.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn profile_mut<'a>(s: &'a mut Scenario, name: &str) -> Option<&'a mut Profile> {
    match name {
        "theta" => Some(&mut s.init.theta),
        "chi" => Some(&mut s.init.chi),
        "u" => Some(&mut s.init.u),
        _ => None,
    }
}

fn apply(s: &mut Scenario, dim: &mut Option<usize>, line: usize, key: &str, raw: &str) -> Result<(), ScenarioError> {
    let value = unquote(raw);
    let num = |v: &str| parse_value::<f64>(line, key, v);
    let count = |v: &str| parse_value::<usize>(line, key, v);
    let unknown = || ScenarioError::UnknownKey { line, key: key.to_string() };
    let invalid = |m: String| ScenarioError::Parse { line, message: m };
    match key {
        "mode" => s.mode = value.parse().map_err(|e: ScenarioError| invalid(e.to_string()))?,
        "grid.dim" => *dim = Some(count(value)?),
        "grid.cells" => s.grid.cells = parse_list(line, key, value)?,
        "grid.lengths" => s.grid.lengths = parse_list(line, key, value)?,
        "model.mu" => s.params.mu = num(value)?,
        "model.gamma" => s.params.gamma = num(value)?,
        "model.nu" | "stepper.nu" => s.stepper.nu = num(value)?,
        "h.family" => {
            s.params.h.family = value.parse::<HFamily>().map_err(|e| invalid(e.to_string()))?
        }
        "h.scale" => s.params.h.scale = num(value)?,
        "h.c_h" => s.params.h.c_h = num(value)?,
        "stepper.dt" => s.stepper.dt = num(value)?,
        "stepper.dt_min" => s.stepper.dt_min = num(value)?,
        "stepper.tol_couple" => s.stepper.tol_couple = num(value)?,
        "stepper.tol_newton" => s.stepper.tol_newton = num(value)?,
        "stepper.tol_linear" => s.stepper.tol_linear = num(value)?,
        "stepper.max_outer" => s.stepper.max_outer = count(value)?,
        "stepper.max_newton" => s.stepper.max_newton = count(value)?,
        "stepper.relaxation" => s.stepper.relaxation = num(value)?,
        "stepper.u_floor" => s.stepper.u_floor = num(value)?,
        "init.n" => s.init.n = count(value)?,
        "init.pathway" => s.init.pathway = value.parse().map_err(|e: crate::error::InitError| invalid(e.to_string()))?,
        "run.t_end" => s.t_end = num(value)?,
        "output.interval" => s.output_interval = num(value)?,
        "output.dir" => s.output_dir = PathBuf::from(value),
        "decay.gammas" => s.decay_gammas = Some(parse_list(line, key, value)?),
        "study.levels" => s.study.levels = count(value)?,
        "study.nus" => s.study.nus = parse_list(line, key, value)?,
        "study.n_values" => s.study.n_values = parse_list(line, key, value)?,
        _ => {
            let mut parts = key.splitn(3, '.');
            let (Some("init"), Some(field), Some(param)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(unknown());
            };
            let profile = profile_mut(s, field).ok_or_else(unknown)?;
            match param {
                "profile" => profile.kind = value.parse::<ProfileKind>().map_err(invalid)?,
                "value" => profile.value = Some(num(value)?),
                "low" => profile.low = Some(num(value)?),
                "high" => profile.high = Some(num(value)?),
                "base" => profile.base = Some(num(value)?),
                "amplitude" => profile.amplitude = Some(num(value)?),
                "center" => profile.center = Some(num(value)?),
                "center_y" => profile.center_y = Some(num(value)?),
                "width" => profile.width = Some(num(value)?),
                "position" => profile.position = Some(num(value)?),
                "path" => profile.path = Some(PathBuf::from(value)),
                _ => return Err(unknown()),
            }
        }
    }
    Ok(())
}

fn split_line(line_no: usize, raw: &str) -> Result<Option<(String, String)>, ScenarioError> {
    let content = raw.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let Some((key, value)) = content.split_once('=') else {
        return Err(ScenarioError::Parse { line: line_no, message: format!("expected `key = value`, got `{content}`") });
    };
    let key = key.trim();
    if key.is_empty() || key.contains(char::is_whitespace) {
        return Err(ScenarioError::Parse { line: line_no, message: format!("malformed key `{key}`") });
    }
    if value.trim().is_empty() {
        return Err(ScenarioError::Parse { line: line_no, message: format!("missing value for `{key}`") });
    }
    Ok(Some((key.to_string(), value.trim().to_string())))
}

/// Parses a flat `key = value` document (with `#` comments), applies `overrides`
/// (`key=value`, numbered as lines after the document) and validates the result.
///
/// Every key is optional; see [`Scenario::default`] for the defaults.
pub fn parse_scenario(text: &str, overrides: &[String]) -> Result<Scenario, ScenarioError> {
    let mut s = Scenario::default();
    let mut dim = None;
    let mut seen = std::collections::HashMap::new();
    let lines = text.lines().count();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some((key, value)) = split_line(line, raw)? {
            if let Some(first) = seen.insert(key.clone(), line) {
                return Err(ScenarioError::Parse {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            apply(&mut s, &mut dim, line, &key, &value)?;
        }
    }
    for (j, o) in overrides.iter().enumerate() {
        let line = lines + j + 1;
        let (key, value) = split_line(line, o)?.ok_or_else(|| ScenarioError::Parse {
            line,
            message: format!("empty override `{o}`"),
        })?;
        apply(&mut s, &mut dim, line, &key, &value)?;
    }
    if let Some(d) = dim {
        if !(d == 1 || d == 2) {
            return Err(ScenarioError::Validation(format!("grid.dim must be 1 or 2, got {d}")));
        }
        for (name, len) in [("grid.cells", s.grid.cells.len()), ("grid.lengths", s.grid.lengths.len())] {
            if len != d {
                if len == 1 {
                    // a single entry is broadcast to every axis
                    match name {
                        "grid.cells" => s.grid.cells = vec![s.grid.cells[0]; d],
                        _ => s.grid.lengths = vec![s.grid.lengths[0]; d],
                    }
                } else {
                    return Err(ScenarioError::Validation(format!(
                        "{name} has {len} entries but grid.dim = {d}"
                    )));
                }
            }
        }
    }
    s.validate()?;
    Ok(s)
}
