mod common;

use std::f64::consts::PI;

use common::*;
use oos_core::detect::split_for_trajectory;
use oos_core::netmodel::{BranchRef, FaultSpec};
use oos_core::simcore::{equilibrium, Scenario, Trajectory};
use oos_core::twomach::*;

fn toy_scenario() -> Scenario {
    Scenario {
        name: "toy".into(),
        case: None,
        fault: FaultSpec::bus(1),
        fault_start: 0.0,
        fault_duration: 0.05,
        t_end: 1.0,
        dt: 1e-3,
        slack_bus: 2,
        load_threshold: None,
        hysteresis: 0.05,
        dispatch: Default::default(),
        voltage_setpoints: Default::default(),
        load_overrides: vec![],
        lossless: false,
    }
}

fn model_of(traj: &Trajectory, s_gens: &[usize], lines: &[BranchRef]) -> CosineModel {
    let (p, c) = split_for_trajectory(traj, s_gens, lines).unwrap();
    fit_cosine_trajectory(traj, &p, &c).unwrap()
}

/// Two machines with no transfer across the line.
fn idle_two_machine() -> oos_core::NetworkCase {
    let mut c = two_machine();
    for g in &mut c.generators {
        g.p_mech = 0.0;
    }
    c
}

fn toy_model() -> CosineModel {
    let traj = equilibrium(&idle_two_machine(), &toy_scenario()).unwrap();
    model_of(&traj, &[1], &[BranchRef(1, 2)])
}

fn mode1_c1() -> CosineModel {
    let traj = equilibrium(&ieee39(), &scenario("mode1")).unwrap();
    model_of(&traj, &(30..=38).collect::<Vec<_>>(), &[BranchRef(2, 1), BranchRef(8, 9)])
}

fn mode2_models() -> Vec<CosineModel> {
    let traj = equilibrium(&ieee39(), &scenario("mode2")).unwrap();
    [vec![BranchRef(16, 17), BranchRef(16, 15)], vec![BranchRef(22, 21), BranchRef(23, 24), BranchRef(19, 16)]]
        .iter()
        .map(|l| model_of(&traj, &[33, 34, 35, 36], l))
        .collect()
}

#[test]
fn two_machine_cutset_phase_is_minus_half_pi() {
    let m = toy_model();
    assert!((m.c.gamma + PI / 2.0).abs() < 1e-12, "{}", m.c.gamma);
    assert!(m.l2.p_max.abs() < 1e-12);
    // Series circuit E1 - x'd1 - x - x'd2 - E2 with |E| = 1: P = sin(delta) / 0.4.
    assert!((m.c.p_max - 2.5).abs() < 1e-9, "{}", m.c.p_max);
}

#[test]
fn eigenvalues_match_finite_difference() {
    let mut models = vec![toy_model(), mode1_c1()];
    models.extend(mode2_models());
    for m in &models {
        let fd = central_difference(|d| evaluate_f(m, d), 0.0, 1e-5);
        let r = sep_eigen(m);
        let lambda_sq = r.lambda[0] * r.lambda[0];
        assert!((lambda_sq.re + fd).abs() <= 1e-4 * fd.abs(), "lambda^2 {lambda_sq} vs -{fd}");
        assert!(lambda_sq.im.abs() <= 1e-12 * fd.abs());
        assert!((r.df0 - fd).abs() <= 1e-4 * fd.abs());
        assert_eq!(r.verdict, EigenVerdict::StableOscillatory);
    }
}

#[test]
fn fitted_models_vanish_at_equilibrium() {
    let mut models = vec![toy_model(), mode1_c1()];
    models.extend(mode2_models());
    for m in &models {
        assert!(evaluate_f(m, 0.0).abs() < 1e-12);
        assert!(m.c.eval(0.0).abs() < 1e-12 && m.l2.eval(0.0).abs() < 1e-12);
    }
}

#[test]
fn mode1_c1_phases_are_near_reported_values() {
    let m = mode1_c1();
    assert!(m.c.gamma > -PI && m.c.gamma < 0.0);
    assert!((m.c.gamma + 1.3364).abs() <= 0.3, "gamma_C {}", m.c.gamma);
    assert!((m.l2.gamma - 0.3586).abs() <= 0.3, "gamma_L2 {}", m.l2.gamma);
    assert!((m.lag() - 1.695).abs() <= 0.35, "lag {}", m.lag());
    assert!(m.l2.p_max > 0.0);
}

#[test]
fn root_existence_holds_and_brackets_a_zero() {
    let mut models = vec![mode1_c1()];
    models.extend(mode2_models());
    for m in &models {
        let v = root_existence_check(m);
        assert!(v.holds, "{:?}", v.failed);
        let (lo, hi) = v.interval.unwrap();
        assert!(lo > 0.0 && hi < -2.0 * m.c.gamma);
        let root = v.root.unwrap();
        assert!(evaluate_f(m, root).abs() < 1e-9);
        assert!(evaluate_f(m, -2.0 * m.c.gamma) < 0.0);
        assert!((evaluate_f(m, -2.0 * m.c.gamma) - m.l2.eval(-2.0 * m.c.gamma)).abs() < 1e-9);
    }
}

#[test]
fn load_free_model_reduces_to_the_cutset_cosine() {
    let mut m = mode1_c1();
    m.l2 = CosinePart::from_coefficient(num_complex::Complex64::new(0.0, 0.0));
    for k in 0..50 {
        let d = 0.1 * k as f64;
        assert!((evaluate_f(&m, d) - m.c.eval(d)).abs() < 1e-14);
    }
}

#[test]
fn cutsets_enclosing_the_same_loads_share_the_load_term() {
    // C1 and C2 have no load bus between them.
    let traj = equilibrium(&ieee39(), &scenario("mode1")).unwrap();
    let s: Vec<usize> = (30..=38).collect();
    let a = model_of(&traj, &s, &[BranchRef(2, 1), BranchRef(8, 9)]);
    let b = model_of(&traj, &s, &[BranchRef(1, 39), BranchRef(9, 39)]);
    assert!((a.l2.p_max - b.l2.p_max).abs() < 1e-9 * a.l2.p_max);
    assert!((a.l2.gamma - b.l2.gamma).abs() < 1e-9);
}

#[test]
fn empirical_fit_recovers_exact_cosine() {
    let delta: Vec<f64> = (0..=5000).map(|k| k as f64 * 1e-3).collect();
    let y: Vec<f64> = delta.iter().map(|d| 2.0 + 3.0 * (d + 0.4).cos()).collect();
    let fit = fit_extremum(&delta, &y, "synthetic").unwrap();
    assert!((fit.part.gamma - 0.4).abs() <= 1e-3, "{}", fit.part.gamma);
    assert!((fit.part.p_max - 3.0).abs() <= 1e-3, "{}", fit.part.p_max);
    assert!((fit.delta_min.unwrap() - (PI - 0.4)).abs() <= 1e-3);
}

#[test]
fn gamma_c_outside_range_is_named() {
    let mut m = mode1_c1();
    m.c = CosinePart { p_c: -m.c.p_max * 0.1f64.cos(), p_max: m.c.p_max, gamma: 0.1 };
    let v = root_existence_check(&m);
    assert!(!v.holds);
    assert!(v.failed.iter().any(|f| f == "gamma_c-range"), "{:?}", v.failed);
    assert!(v.root.is_none());
}
