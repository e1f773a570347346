mod common;

use common::*;
use oos_core::energetics::largest_gap_grouping;
use oos_core::netmodel::Stage;
use oos_core::simcore::{simulate, Termination, Trajectory, RUNAWAY_ANGLE};

#[test]
fn coi_invariants_hold_along_a_run() {
    let traj = run("mode1");
    let case = &traj.case;
    let mt = case.total_inertia();
    for s in &traj.samples {
        let p: f64 = case.generators.iter().zip(&s.omega).map(|(g, w)| g.inertia * w).sum();
        let a: f64 = case.generators.iter().zip(&s.delta).map(|(g, d)| g.inertia * d).sum();
        assert!(p.abs() / mt < 1e-9, "momentum {p} at t = {}", s.t);
        assert!(a.abs() / mt < 1e-9, "angle centre {a} at t = {}", s.t);
    }
}

#[test]
fn zero_duration_fault_gives_flat_trajectory() {
    let mut scn = scenario("mode1");
    scn.fault_duration = 0.0;
    scn.t_end = 2.0;
    let traj = simulate(&ieee39(), &scn).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    let d0 = &traj.samples[0].delta;
    for s in &traj.samples {
        assert!(s.omega.iter().all(|w| w.abs() < 1e-8), "t = {}", s.t);
        assert!(s.delta.iter().zip(d0).all(|(a, b)| (a - b).abs() < 1e-8));
    }
}

#[test]
fn stable_ten_second_run_has_every_sample() {
    let traj = run("mode1_stable");
    assert_eq!(traj.termination, Termination::Completed);
    assert_eq!(traj.len(), 10_001);
    assert_eq!(traj.to_csv().lines().count(), 10_002);
    let last = traj.samples.last().unwrap();
    assert!((last.t - 10.0).abs() < 1e-9);
    assert!(last.delta.iter().all(|d| d.abs() < std::f64::consts::PI));
}

#[test]
fn stages_follow_the_snapped_event_grid() {
    let traj = run("mode1_stable");
    let (on, off, end) = traj.scenario.step_grid();
    assert_eq!((on, off, end), (0, 100, 10_000));
    assert_eq!(traj.samples[off - 1].stage, Stage::OnFault);
    assert_eq!(traj.samples[off].stage, Stage::PostFault);
    assert_eq!(traj.clearing_index(), off);
}

#[test]
fn unstable_run_stops_at_runaway() {
    let traj = run("mode1");
    let Termination::RotorRunaway { t } = traj.termination else { panic!("expected runaway") };
    let last = traj.samples.last().unwrap();
    assert!((last.t - t).abs() < 1e-12);
    assert!(last.delta.iter().any(|d| d.abs() > RUNAWAY_ANGLE));
    assert!(traj.len() < 10_001);
}

#[test]
fn mode2_separates_the_generators_behind_c4() {
    let traj = run("mode2");
    assert!(matches!(traj.termination, Termination::RotorRunaway { .. }));
    assert_eq!(largest_gap_grouping(&traj, traj.len() - 1), vec![33, 34, 35, 36]);
}

#[test]
fn mode1_separates_the_generators_from_bus_39() {
    let traj = run("mode1");
    assert_eq!(largest_gap_grouping(&traj, traj.len() - 1), (30..=38).collect::<Vec<_>>());
}

#[test]
fn csv_round_trip_preserves_samples() {
    let mut scn = scenario("mode1");
    scn.t_end = 0.5;
    let case = ieee39();
    let traj = simulate(&case, &scn).unwrap();
    let back = Trajectory::from_csv(&traj.to_csv(), &case, &scn).unwrap();
    assert_eq!(back.len(), traj.len());
    for (a, b) in traj.samples.iter().zip(&back.samples) {
        assert_eq!(a.delta, b.delta);
        assert_eq!(a.omega, b.omega);
        assert_eq!(a.elements.p_fwd, b.elements.p_fwd);
        assert_eq!(a.stage, b.stage);
        for (x, y) in a.elements.sigma_branch.iter().zip(&b.elements.sigma_branch) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
