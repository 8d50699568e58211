use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::diagnostics::{
    classify_steady, fit_decay_rate, steady_residual, DiagnosticsRecord, Monitor, SteadyBranch,
    STEADY_DEAD_BAND,
};
use crate::error::{DriverError, ScenarioError};
use crate::grid::{Field, Grid};
use crate::init_reg::{build_initial_state, entropy_integral, smooth_positive};
use crate::stepper::{State, Stepper, Trajectory};

use super::config::{parse_scenario, Mode, Scenario};
use super::output::{write_snapshot, write_timeseries};

/// Reads and validates a scenario file; returns it with the directory used to resolve CSV profiles.
pub fn load_scenario(path: &Path, overrides: &[String]) -> Result<(Scenario, PathBuf), ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    let scenario = parse_scenario(&text, overrides)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((scenario, base))
}

pub fn build_grid(scenario: &Scenario) -> Result<Arc<Grid>, ScenarioError> {
    Grid::new(&scenario.grid.cells, &scenario.grid.lengths)
        .map(Arc::new)
        .map_err(|e| ScenarioError::Validation(e.to_string()))
}

/// Samples the profiles on `grid` and smooths them into an admissible state.
pub fn initial_state(scenario: &Scenario, grid: &Arc<Grid>, base_dir: &Path) -> Result<State, DriverError> {
    let init = &scenario.init;
    let theta = init.theta.sample(grid, base_dir)?;
    let chi = init.chi.sample(grid, base_dir)?;
    let u = init.u.sample(grid, base_dir)?;
    Ok(build_initial_state(&theta, &chi, &u, init.n, &scenario.params.h, init.pathway)?)
}

/// A finished integration with its per-step records (the first row is the initial state).
#[derive(Clone, Debug)]
pub struct Simulation {
    pub records: Vec<DiagnosticsRecord>,
    pub trajectory: Trajectory,
    /// Every accepted state, kept only when requested.
    pub states: Vec<State>,
}

fn snapshot_name(k: usize) -> String {
    format!("snapshot_{k:04}.csv")
}

/// Integrates `initial` to `scenario.t_end`. With `out = Some(dir)` writes
/// `timeseries.csv` and a snapshot at `t0` and at every output time. On solver
/// failure the last accepted state is dumped to `dir/failure_state.csv`.
pub fn simulate(
    scenario: &Scenario,
    initial: &State,
    out: Option<&Path>,
    keep_states: bool,
) -> Result<Simulation, DriverError> {
    let grid = initial.grid().clone();
    let mut stepper = Stepper::new(grid.clone(), scenario.params, scenario.stepper)?;
    let mut monitor = Monitor::new(grid, scenario.params)?;
    let mut records = vec![monitor.observe(initial, None, 0)];
    let mut states = Vec::new();
    if keep_states {
        states.push(initial.clone());
    }
    let result = stepper.run(initial, initial.t + scenario.t_end, Some(scenario.output_interval), &mut |prev, next, rep| {
        records.push(monitor.observe(next, Some(prev), rep.outer_iterations));
        if keep_states {
            states.push(next.clone());
        }
    });
    let trajectory = match result {
        Ok(t) => t,
        Err(source) => {
            let dump = out.and_then(|dir| {
                let path = dir.join("failure_state.csv");
                write_snapshot(&source.state, &path).ok().map(|_| path)
            });
            if let Some(dir) = out {
                let _ = write_timeseries(&records, &dir.join("timeseries.csv"));
            }
            return Err(DriverError::Solver { source, dump });
        }
    };
    if let Some(dir) = out {
        write_timeseries(&records, &dir.join("timeseries.csv"))?;
        write_snapshot(initial, &dir.join(snapshot_name(0)))?;
        for (k, s) in trajectory.outputs.iter().enumerate() {
            write_snapshot(s, &dir.join(snapshot_name(k + 1)))?;
        }
    }
    Ok(Simulation { records, trajectory, states })
}

/// Outcome of [`Mode::Run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub dt_final: f64,
    pub snapshots: usize,
    pub min_chi: f64,
    pub max_chi: f64,
    pub min_u: f64,
    pub min_theta: f64,
    pub max_energy_res: f64,
    pub mass_drift: f64,
}

/// Outcome of [`Mode::SteadyCheck`].
#[derive(Clone, Debug, PartialEq)]
pub struct SteadySummary {
    /// `(t, steady_residual)` at `t0` and every output time.
    pub residuals: Vec<(f64, f64)>,
    /// `h(mean theta) - log(mean p)` of the final state.
    pub drive: f64,
    pub branch: SteadyBranch,
}

/// One row of the decay study.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub gamma: f64,
    pub alpha: f64,
    pub r_squared: f64,
    pub dual_norm_initial: f64,
    pub dual_norm_final: f64,
    /// Largest `Phi1(k+1) - Phi1(k) + dt <u, p>` along the run.
    pub max_dissip_res: f64,
}

/// One refinement level of an order study; `diff` compares with the next finer level.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderRow {
    /// `dt` or the `x` spacing of the level.
    pub h: f64,
    pub diff: Option<f64>,
    pub order: Option<f64>,
}

/// Discrete `L^2(Q)` distance of `(theta, chi, u)` between runs at two `nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct NuRow {
    pub nu_a: f64,
    pub nu_b: f64,
    pub distance: f64,
}

/// One smoothing index of the initial-data study.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingRow {
    pub n: usize,
    /// `|u_0n - u_0|` in the mass-weighted `L^2` norm.
    pub distance: f64,
    pub min_u: f64,
    /// `min u_0n >= 1/n`.
    pub floor_holds: bool,
    /// `int (u_0n - log u_0n)`.
    pub entropy_smoothed: f64,
    /// `int (u_0 - log u_0) + |Omega|`, infinite when `u_0` touches zero.
    pub entropy_bound: f64,
}

/// Outcome of [`Mode::ConvergenceStudy`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub temporal: Vec<OrderRow>,
    pub mesh: Vec<OrderRow>,
    pub nu_sweep: Vec<NuRow>,
    pub smoothing: Vec<SmoothingRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Run(RunSummary),
    Steady(SteadySummary),
    Decay(Vec<DecayRow>),
    Convergence(ConvergenceReport),
}

fn e(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| super::output::NA.to_string(), e)
}

fn write_text(path: &Path, text: &str) -> Result<(), ScenarioError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|err| ScenarioError::io(dir, err))?;
    }
    std::fs::write(path, text).map_err(|err| ScenarioError::io(path, err))
}

impl Outcome {
    /// Human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        match self {
            Outcome::Run(r) => {
                let _ = writeln!(s, "run: {} steps to t = {} (final dt = {:e})", r.steps, r.t_final, r.dt_final);
                let _ = writeln!(s, "chi in [{:e}, {:e}], min u = {:e}, min theta = {:e}", r.min_chi, r.max_chi, r.min_u, r.min_theta);
                let _ = writeln!(s, "max |energy_res| = {:e}, relative mass drift = {:e}, snapshots = {}", r.max_energy_res, r.mass_drift, r.snapshots);
            }
            Outcome::Steady(st) => {
                let (t0, r0) = st.residuals[0];
                let (t1, r1) = *st.residuals.last().expect("non-empty");
                let _ = writeln!(s, "steady residual {r0:e} at t = {t0} -> {r1:e} at t = {t1}");
                let _ = writeln!(s, "h(theta) - log p = {:e}: branch {:?}", st.drive, st.branch);
            }
            Outcome::Decay(rows) => {
                for r in rows {
                    let _ = writeln!(
                        s,
                        "gamma = {}: alpha = {:.6}, r^2 = {:.6}, |u|_V' {:e} -> {:e}, max dissipation residual {:e}",
                        r.gamma, r.alpha, r.r_squared, r.dual_norm_initial, r.dual_norm_final, r.max_dissip_res
                    );
                }
            }
            Outcome::Convergence(c) => {
                for (name, rows) in [("dt", &c.temporal), ("mesh", &c.mesh)] {
                    for r in rows.iter() {
                        let _ = writeln!(s, "{name} {:e}: diff {} order {}", r.h, opt(r.diff), opt(r.order));
                    }
                }
                for r in &c.nu_sweep {
                    let _ = writeln!(s, "nu {:e} vs {:e}: distance {:e}", r.nu_a, r.nu_b, r.distance);
                }
                for r in &c.smoothing {
                    let _ = writeln!(
                        s,
                        "n = {}: |u0n - u0| = {:e}, min u0n = {:e} (floor {}), entropy {:e} <= {:e}",
                        r.n,
                        r.distance,
                        r.min_u,
                        if r.floor_holds { "holds" } else { "violated" },
                        r.entropy_smoothed,
                        r.entropy_bound
                    );
                }
            }
        }
        s
    }
}

/// Runs the scenario's mode, writing its CSV outputs under `scenario.output_dir`.
pub fn execute(scenario: &Scenario, base_dir: &Path) -> Result<Outcome, DriverError> {
    scenario.validate()?;
    let grid = build_grid(scenario)?;
    let out = scenario.output_dir.as_path();
    match scenario.mode {
        Mode::Run => {
            let initial = initial_state(scenario, &grid, base_dir)?;
            let sim = simulate(scenario, &initial, Some(out), false)?;
            let recs = &sim.records;
            let fold = |f: fn(&DiagnosticsRecord) -> f64, min: bool| {
                recs.iter().map(f).fold(if min { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| {
                    if min { a.min(b) } else { a.max(b) }
                })
            };
            let mass0 = recs[0].mass;
            Ok(Outcome::Run(RunSummary {
                steps: sim.trajectory.steps(),
                t_final: sim.trajectory.final_state.t,
                dt_final: sim.trajectory.reports.last().map_or(scenario.stepper.dt, |r| r.dt),
                snapshots: sim.trajectory.outputs.len() + 1,
                min_chi: fold(|r| r.min_chi, true),
                max_chi: fold(|r| r.max_chi, false),
                min_u: fold(|r| r.min_u, true),
                min_theta: fold(|r| r.min_theta, true),
                max_energy_res: fold(|r| r.energy_res.abs(), false),
                mass_drift: (recs.last().expect("initial record").mass - mass0).abs() / mass0.abs(),
            }))
        }
        Mode::SteadyCheck => {
            let initial = initial_state(scenario, &grid, base_dir)?;
            let sim = simulate(scenario, &initial, Some(out), false)?;
            let mut residuals = vec![(initial.t, steady_residual(&initial, &scenario.params)?)];
            for s in &sim.trajectory.outputs {
                residuals.push((s.t, steady_residual(s, &scenario.params)?));
            }
            let last = &sim.trajectory.final_state;
            let measure = grid.measure();
            let theta_bar = last.theta.integrate() / measure;
            let p_bar = last.p.integrate() / measure;
            let drive = scenario.params.h.h(theta_bar) - p_bar.ln();
            let branch = classify_steady(theta_bar, p_bar, &scenario.params.h, STEADY_DEAD_BAND)?;
            let mut text = String::from("t,steady_residual\n");
            for (t, r) in &residuals {
                let _ = writeln!(text, "{},{}", e(*t), e(*r));
            }
            write_text(&out.join("steady.csv"), &text)?;
            Ok(Outcome::Steady(SteadySummary { residuals, drive, branch }))
        }
        Mode::DecayStudy => {
            let mut rows = Vec::new();
            for (i, &gamma) in scenario.decay_gammas().iter().enumerate() {
                let mut sc = scenario.clone();
                sc.params.gamma = gamma;
                let initial = initial_state(&sc, &grid, base_dir)?;
                let sim = simulate(&sc, &initial, Some(&out.join(format!("gamma_{i:02}"))), false)?;
                let series: Vec<(f64, f64)> =
                    sim.records.iter().filter_map(|r| r.phi1.map(|p| (r.t, p))).collect();
                let fit = fit_decay_rate(&series)?;
                let max_dissip = sim
                    .records
                    .iter()
                    .filter_map(|r| r.dissip_res)
                    .fold(f64::NEG_INFINITY, f64::max);
                rows.push(DecayRow {
                    gamma,
                    alpha: fit.alpha,
                    r_squared: fit.r_squared,
                    dual_norm_initial: (2.0 * series[0].1).sqrt(),
                    dual_norm_final: (2.0 * series.last().expect("fit needs samples").1).sqrt(),
                    max_dissip_res: max_dissip,
                });
            }
            let mut text = String::from("gamma,alpha,r_squared,dual_norm_initial,dual_norm_final,max_dissip_res\n");
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    e(r.gamma),
                    e(r.alpha),
                    e(r.r_squared),
                    e(r.dual_norm_initial),
                    e(r.dual_norm_final),
                    e(r.max_dissip_res)
                );
            }
            write_text(&out.join("decay.csv"), &text)?;
            Ok(Outcome::Decay(rows))
        }
        Mode::ConvergenceStudy => {
            let report = ConvergenceReport {
                temporal: temporal_study(scenario, base_dir)?,
                mesh: mesh_study(scenario, base_dir)?,
                nu_sweep: nu_sweep(scenario, base_dir)?,
                smoothing: smoothing_study(scenario, base_dir)?,
            };
            let mut text = String::from("study,h,diff,order\n");
            for (name, rows) in [("dt", &report.temporal), ("mesh", &report.mesh)] {
                for r in rows.iter() {
                    let _ = writeln!(text, "{name},{},{},{}", e(r.h), opt(r.diff), opt(r.order));
                }
            }
            write_text(&out.join("orders.csv"), &text)?;
            let mut text = String::from("nu_a,nu_b,distance\n");
            for r in &report.nu_sweep {
                let _ = writeln!(text, "{},{},{}", e(r.nu_a), e(r.nu_b), e(r.distance));
            }
            write_text(&out.join("nu_sweep.csv"), &text)?;
            let mut text = String::from("n,distance,min_u,floor_holds,entropy_smoothed,entropy_bound\n");
            for r in &report.smoothing {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    r.n,
                    e(r.distance),
                    e(r.min_u),
                    r.floor_holds,
                    e(r.entropy_smoothed),
                    e(r.entropy_bound)
                );
            }
            write_text(&out.join("smoothing.csv"), &text)?;
            Ok(Outcome::Convergence(report))
        }
    }
}

/// Mass-weighted `L^2` distance of `(theta, chi, u)`.
fn state_distance(a: &State, b: &State) -> f64 {
    [(&a.theta, &b.theta), (&a.chi, &b.chi), (&a.u, &b.u)]
        .iter()
        .map(|(x, y)| x.zip_map(y, |p, q| p - q).l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn orders(h: Vec<f64>, diffs: Vec<f64>) -> Vec<OrderRow> {
    h.iter()
        .enumerate()
        .map(|(k, &h)| OrderRow {
            h,
            diff: diffs.get(k).copied(),
            order: match (diffs.get(k), diffs.get(k + 1)) {
                (Some(a), Some(b)) if *a > 0.0 && *b > 0.0 => Some((a / b).log2()),
                _ => None,
            },
        })
        .collect()
}

/// Runs with `dt / 2^k`, `k < study.levels`, and estimates the temporal order from
/// successive final-state differences.
pub fn temporal_study(scenario: &Scenario, base_dir: &Path) -> Result<Vec<OrderRow>, DriverError> {
    let grid = build_grid(scenario)?;
    let initial = initial_state(scenario, &grid, base_dir)?;
    let mut finals = Vec::new();
    let mut hs = Vec::new();
    for k in 0..scenario.study.levels {
        let mut sc = scenario.clone();
        sc.stepper.dt = scenario.stepper.dt / f64::powi(2.0, k as i32);
        sc.stepper.dt_min = sc.stepper.dt_min.min(sc.stepper.dt);
        sc.output_interval = sc.t_end;
        hs.push(sc.stepper.dt);
        finals.push(simulate(&sc, &initial, None, false)?.trajectory.final_state);
    }
    let diffs = finals.windows(2).map(|w| state_distance(&w[0], &w[1])).collect();
    Ok(orders(hs, diffs))
}

/// Restricts a state on a grid with `2^k` times the cells to the coarse nodes.
fn restrict(fine: &State, coarse: &Arc<Grid>, factor: usize) -> State {
    let fg = fine.grid();
    let pick = |f: &Field| {
        let values = (0..coarse.node_count())
            .map(|k| {
                let (i, j) = coarse.multi_index(k);
                f.values()[fg.index(i * factor, j * factor)]
            })
            .collect();
        Field::new(coarse.clone(), values).expect("restriction of finite values")
    };
    State {
        t: fine.t,
        e: pick(&fine.e),
        theta: pick(&fine.theta),
        chi: pick(&fine.chi),
        xi: pick(&fine.xi),
        u: pick(&fine.u),
        p: pick(&fine.p),
    }
}

/// Doubles the cells per axis `study.levels - 1` times at fixed `dt` and compares
/// successive levels on the coarser nodes.
pub fn mesh_study(scenario: &Scenario, base_dir: &Path) -> Result<Vec<OrderRow>, DriverError> {
    let mut finals = Vec::new();
    let mut hs = Vec::new();
    for k in 0..scenario.study.levels {
        let mut sc = scenario.clone();
        sc.grid.cells = scenario.grid.cells.iter().map(|c| c << k).collect();
        sc.output_interval = sc.t_end;
        let grid = build_grid(&sc)?;
        hs.push(grid.spacing(0));
        let initial = initial_state(&sc, &grid, base_dir)?;
        finals.push(simulate(&sc, &initial, None, false)?.trajectory.final_state);
    }
    let diffs = finals
        .windows(2)
        .map(|w| state_distance(&w[0], &restrict(&w[1], w[0].grid(), 2)))
        .collect();
    Ok(orders(hs, diffs))
}

/// Discrete `L^2(Q)` distances between runs at consecutive entries of `study.nus`.
pub fn nu_sweep(scenario: &Scenario, base_dir: &Path) -> Result<Vec<NuRow>, DriverError> {
    let grid = build_grid(scenario)?;
    let initial = initial_state(scenario, &grid, base_dir)?;
    let mut runs = Vec::new();
    for &nu in &scenario.study.nus {
        let mut sc = scenario.clone();
        sc.stepper.nu = nu;
        sc.output_interval = sc.t_end;
        runs.push((nu, simulate(&sc, &initial, None, true)?.states));
    }
    let mut rows = Vec::new();
    for w in runs.windows(2) {
        let ((nu_a, a), (nu_b, b)) = (&w[0], &w[1]);
        if a.len() != b.len() {
            return Err(ScenarioError::Validation(format!(
                "runs at nu = {nu_a} and nu = {nu_b} took different step counts; lower stepper.dt"
            ))
            .into());
        }
        let sum: f64 = a
            .windows(2)
            .zip(b.iter().skip(1))
            .map(|(pa, sb)| (pa[1].t - pa[0].t) * state_distance(&pa[1], sb).powi(2))
            .sum();
        rows.push(NuRow { nu_a: *nu_a, nu_b: *nu_b, distance: sum.sqrt() });
    }
    Ok(rows)
}

/// Smooths the density profile at each `study.n_values` entry and checks the floor and entropy bound.
pub fn smoothing_study(scenario: &Scenario, base_dir: &Path) -> Result<Vec<SmoothingRow>, DriverError> {
    let grid = build_grid(scenario)?;
    let u0 = scenario.init.u.sample(&grid, base_dir)?;
    let entropy_bound = if u0.min() > 0.0 {
        entropy_integral(&u0)? + grid.measure()
    } else {
        f64::INFINITY
    };
    let mut rows = Vec::new();
    for &n in &scenario.study.n_values {
        let un = smooth_positive(&u0, n)?;
        rows.push(SmoothingRow {
            n,
            distance: un.zip_map(&u0, |a, b| a - b).l2_norm(),
            min_u: un.min(),
            floor_holds: un.min() >= 1.0 / n as f64,
            entropy_smoothed: entropy_integral(&un)?,
            entropy_bound,
        });
    }
    Ok(rows)
}
