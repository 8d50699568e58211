mod common;

use std::sync::Arc;

use hydride::constitutive::{beta_residual, psi, HSpec};
use hydride::diagnostics::{energy_residual, steady_state};
use hydride::grid::{Field, Grid};
use hydride::init_reg::{build_initial_state, TemperaturePathway};
use hydride::stepper::{validate_state, ModelParams, State, Stepper, StepperConfig};
use rand::{Rng, SeedableRng};

fn grid1(cells: usize) -> Arc<Grid> {
    Arc::new(Grid::new_1d(cells, 1.0).unwrap())
}

fn stepper(grid: Arc<Grid>, gamma: f64, dt: f64) -> Stepper {
    let params = ModelParams { gamma, ..ModelParams::default() };
    Stepper::new(grid, params, StepperConfig { dt, ..StepperConfig::default() }).unwrap()
}

fn smooth_state(grid: Arc<Grid>) -> State {
    let theta0 = Field::from_fn(grid.clone(), |x| 1.0 + 0.3 * (std::f64::consts::PI * x[0]).cos()).unwrap();
    let chi0 = Field::from_fn(grid.clone(), |x| 0.5 + 0.2 * (std::f64::consts::PI * x[0]).cos()).unwrap();
    let u0 = Field::from_fn(grid, |x| 1.0 + 0.5 * x[0] * x[0]).unwrap();
    build_initial_state(&theta0, &chi0, &u0, 100, &HSpec::default(), TemperaturePathway::Positive).unwrap()
}

#[test]
fn pressure_matches_dense_oracle() {
    let g = grid1(16);
    let s = stepper(g.clone(), 1.0, 0.05);
    let u_prev = Field::from_fn(g.clone(), |x| 1.0 + (3.0 * x[0]).sin().powi(2)).unwrap();
    let chi = Field::from_fn(g, |x| x[0] * x[0]).unwrap();
    let (u, p) = s.update_pressure(&u_prev, &chi, 0.05).unwrap();
    let oracle = common::dense_pressure_1d(16, 1.0, 1.0, u_prev.values(), chi.values(), 0.05);
    for (i, reference) in oracle.iter().enumerate() {
        assert!((u.values()[i] - reference).abs() < 1e-8);
        assert!((p.values()[i] - reference * (1.0 + chi.values()[i])).abs() < 1e-8);
    }
}

#[test]
fn pressure_conserves_mass_and_constants() {
    let g = grid1(32);
    let s = stepper(g.clone(), 0.0, 0.1);
    let c = Field::constant(g.clone(), 2.5);
    let (u, _) = s.update_pressure(&c, &Field::constant(g.clone(), 0.4), 0.1).unwrap();
    assert!(u.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
    let u_prev = Field::from_fn(g.clone(), |x| 1.0 + x[0]).unwrap();
    let chi = Field::from_fn(g, |x| (5.0 * x[0]).sin().abs()).unwrap();
    let (u, _) = s.update_pressure(&u_prev, &chi, 0.1).unwrap();
    assert!((u.integrate() - u_prev.integrate()).abs() < 1e-13);
    assert!(u.min() > 0.0);
}

#[test]
fn phase_matches_projected_gradient_oracle() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let g = grid1(8);
    let spec = HSpec::default();
    for _ in 0..20 {
        let dt = rng.random_range(0.02..0.2);
        let nu = rng.random_range(0.0..0.01);
        let params = ModelParams::default();
        let cfg = StepperConfig { dt, nu, ..StepperConfig::default() };
        let s = Stepper::new(g.clone(), params, cfg).unwrap();
        let chi_prev: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..=1.0)).collect();
        let theta: Vec<f64> = (0..9).map(|_| rng.random_range(-3.0..3.0)).collect();
        let u: Vec<f64> = (0..9).map(|_| rng.random_range(0.1..4.0)).collect();
        let g_vals: Vec<f64> = theta.iter().zip(&u).map(|(t, u)| spec.h(*t) - u.ln()).collect();
        let out = s
            .update_phase(
                &Field::new(g.clone(), chi_prev.clone()).unwrap(),
                &Field::new(g.clone(), theta).unwrap(),
                &Field::new(g.clone(), u).unwrap(),
                dt,
            )
            .unwrap();
        let oracle = common::projected_gradient_phase_1d(8, 1.0, &chi_prev, &g_vals, 1.0, nu, dt);
        for (i, reference) in oracle.iter().enumerate() {
            assert!((out.chi.values()[i] - reference).abs() < 1e-8, "node {i}");
            assert!(beta_residual(out.chi.values()[i], out.xi.values()[i]) <= 1e-10);
        }
    }
}

#[test]
fn phase_interior_stationarity() {
    let g = grid1(8);
    let s = stepper(g.clone(), 0.0, 1e6);
    // h(theta) - log u = log 1.5 with chi_prev = 0.5
    let theta = Field::constant(g.clone(), 0.0);
    let u = Field::constant(g.clone(), 1.0 / 1.5);
    let out = s.update_phase(&Field::constant(g, 0.5), &theta, &u, 1e6).unwrap();
    for (c, xi) in out.chi.values().iter().zip(out.xi.values()) {
        assert!((c - 0.5).abs() < 1e-12);
        assert!((xi - 1.5f64.ln()).abs() < 1e-12);
    }
}

#[test]
fn phase_saturates_under_strong_drive() {
    let g = grid1(8);
    let theta = Field::constant(g.clone(), 0.0);
    let u = Field::constant(g.clone(), (-10.0f64).exp());
    let chi_prev = Field::from_fn(g.clone(), |x| 0.2 + 0.5 * x[0]).unwrap();
    let mut last = 0.0;
    for dt in [0.01, 0.1, 1.0, 10.0] {
        let out = stepper(g.clone(), 0.0, dt).update_phase(&chi_prev, &theta, &u, dt).unwrap();
        let min = out.chi.min();
        assert!(min >= last);
        last = min;
        for (c, xi) in out.chi.values().iter().zip(out.xi.values()) {
            if *c == 1.0 {
                assert!(xi - std::f64::consts::LN_2 >= 0.0);
            }
        }
    }
    assert_eq!(last, 1.0);
}

#[test]
fn energy_matches_scalar_oracle() {
    let g = grid1(1);
    let spec = HSpec::default();
    let (theta, chi, chi_new, dt, mu) = (0.8, 0.3, 0.45, 0.05, 1.0);
    let s = stepper(g.clone(), 0.0, dt);
    let e_prev = psi(theta, chi, &spec).unwrap();
    let out = s
        .update_energy(
            &Field::constant(g.clone(), e_prev),
            &Field::constant(g.clone(), chi),
            &Field::constant(g.clone(), chi_new),
            &Field::constant(g, theta),
            dt,
        )
        .unwrap();
    let rate = (chi_new - chi) / dt;
    let oracle = common::bisect(
        |t| psi(t, chi_new, &spec).unwrap() - e_prev - dt * (-spec.h(t) * rate + mu * rate * rate),
        -10.0,
        10.0,
    );
    for v in out.theta.values() {
        assert!((v - oracle).abs() < 1e-10);
    }
}

#[test]
fn energy_keeps_uniform_equilibrium() {
    let g = grid1(10);
    let s = stepper(g.clone(), 0.0, 0.1);
    let chi = Field::from_fn(g.clone(), |x| x[0]).unwrap();
    let e = chi.map(|c| psi(1.3, c, &HSpec::default()).unwrap());
    let out = s.update_energy(&e, &chi, &chi, &Field::constant(g, 0.0), 0.1).unwrap();
    assert!(out.theta.values().iter().all(|t| (t - 1.3).abs() < 1e-10));
    assert!(out.e.max_abs_diff(&e) < 1e-10);
}

#[test]
fn steady_states_are_fixed_points() {
    let g = grid1(16);
    let spec = HSpec::default();
    let p0 = spec.h(0.7).exp();
    for (p, chi) in [(p0, 0.4), (0.3 * p0, 0.0), (3.0 * p0, 0.0)] {
        let s0 = steady_state(g.clone(), 0.7, p, chi, &spec).unwrap();
        let mut st = stepper(g.clone(), 0.0, 0.01);
        let (s1, rep) = st.step(&s0).unwrap();
        assert_eq!(rep.dt, 0.01);
        for ((_, a), (_, b)) in s0.fields().iter().zip(s1.fields().iter()) {
            assert!(a.max_abs_diff(b) < 1e-10);
        }
    }
}

#[test]
fn isolated_step_conserves_mass_and_energy() {
    let g = grid1(64);
    let s0 = smooth_state(g.clone());
    let mut st = stepper(g, 0.0, 1e-2);
    let mut prev = s0.clone();
    for _ in 0..5 {
        let (next, _) = st.step(&prev).unwrap();
        assert!((next.u.integrate() - s0.u.integrate()).abs() < 1e-12);
        let res = energy_residual(&next, &prev, st.params());
        assert!(res.abs() < 1e-9 * (1.0 + next.e.integrate().abs()));
        validate_state(&next, &HSpec::default(), 1e-12).unwrap();
        prev = next;
    }
}

#[test]
fn halving_dt_halves_the_error() {
    let g = grid1(32);
    let s0 = smooth_state(g.clone());
    let t_end = 0.2;
    let run = |dt: f64| {
        let mut st = stepper(g.clone(), 0.0, dt);
        st.run(&s0, t_end, None, &mut |_, _, _| {}).unwrap().final_state
    };
    let coarse = run(0.02);
    let mid = run(0.01);
    let fine = run(0.005);
    let d1 = coarse.chi.zip_map(&mid.chi, |a, b| a - b).l2_norm();
    let d2 = mid.chi.zip_map(&fine.chi, |a, b| a - b).l2_norm();
    let order = (d1 / d2).log2();
    assert!((0.8..=1.2).contains(&order), "observed order {order}");
}

#[test]
fn run_edge_cases() {
    let g = grid1(8);
    let s0 = smooth_state(g.clone());
    let mut st = stepper(g.clone(), 0.0, 0.01);
    let traj = st.run(&s0, 0.0, Some(0.01), &mut |_, _, _| {}).unwrap();
    assert_eq!(traj.steps(), 0);
    assert!(traj.outputs.is_empty());
    assert_eq!(traj.final_state, s0);
    assert!(st.run(&s0, -1.0, None, &mut |_, _, _| {}).is_err());

    let mut calls = 0;
    let traj = st.run(&s0, 0.1, Some(0.05), &mut |_, _, _| calls += 1).unwrap();
    assert_eq!(calls, 10);
    assert_eq!(traj.outputs.len(), 2);
    assert_eq!(traj.final_state.t, 0.1);
    assert!((traj.outputs[0].t - 0.05).abs() < 1e-12);
}
