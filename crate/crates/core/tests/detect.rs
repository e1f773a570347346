mod common;

use common::*;
use oos_core::detect::*;
use oos_core::energetics::two_machine_decompose;
use oos_core::simcore::Trajectory;
use oos_core::twomach::reduce_for_partition;
use oos_core::Error;

fn t_of(rep: &DetectionReport, cutset: &str, kind: DetectorKind) -> f64 {
    rep.event(cutset, kind).unwrap_or_else(|| panic!("no {kind:?} event on {cutset}")).t
}

fn compensation(traj: &Trajectory, suite: &SuiteConfig, k: usize, rule: AlphaRule) -> LoadCompensation {
    let cs = &suite.cutsets[k];
    let (p, c) = split_for_trajectory(traj, &suite.s_gens, &cs.lines).unwrap();
    compute_compensation(&reduce_for_partition(traj, &p, &c).unwrap(), &traj.case, &cs.monitored, rule).unwrap()
}

#[test]
fn stable_run_raises_no_event() {
    let traj = run("mode1_stable");
    let rep = run_suite(&traj, &mode1_suite()).unwrap();
    assert!(rep.events.is_empty(), "{:?}", rep.events);
    assert!(rep.cutsets.iter().all(|c| c.events.is_empty() && c.pebs.is_none()));
    assert_eq!(rep.verdict, Verdict::StableWithinHorizon);
    assert_eq!(rep.verdict.exit_code(), 0);
}

#[test]
fn mode1_detection_order() {
    let traj = run("mode1");
    let rep = run_suite(&traj, &mode1_suite()).unwrap();
    assert_eq!(rep.verdict, Verdict::UnstableDetected);
    let late = t_of(&rep, "C1", DetectorKind::CutsetOnly);
    assert!(t_of(&rep, "C1", DetectorKind::Eq15Combined) + 0.1 <= late);
    assert!(t_of(&rep, "C1", DetectorKind::StrategyACompensated) + 0.1 <= late);
    assert!(t_of(&rep, "C3", DetectorKind::CutsetOnly) + 0.05 <= late);
    // Each of the three cutsets sees the combined criterion.
    for c in ["C1", "C2", "C3"] {
        assert!(rep.event(c, DetectorKind::Eq15Combined).is_some());
    }
}

#[test]
fn mode2_detection_order() {
    let traj = run("mode2");
    let rep = run_suite(&traj, &mode2_suite()).unwrap();
    let late = t_of(&rep, "C4", DetectorKind::CutsetOnly);
    assert!(t_of(&rep, "C4", DetectorKind::Eq15Combined) + 0.1 <= late);
    assert!(t_of(&rep, "C4", DetectorKind::StrategyACompensated) + 0.1 <= late);
    assert!(t_of(&rep, "C5", DetectorKind::CutsetOnly) + 0.05 <= late);
}

#[test]
fn ranking_prefers_the_cutset_with_least_enclosed_load() {
    let traj = run("mode2");
    let suite = mode2_suite();
    let r = rank_cutsets(&traj, &suite.s_gens, &suite.cutsets).unwrap();
    assert_eq!(r.iter().map(|e| e.cutset.as_str()).collect::<Vec<_>>(), ["C5", "C4"]);
    let traj = run("mode1");
    let suite = mode1_suite();
    let r = rank_cutsets(&traj, &suite.s_gens, &suite.cutsets).unwrap();
    assert_eq!(r[0].cutset, "C3");
}

#[test]
fn ranking_rejects_mixed_partitions() {
    let traj = run("mode2");
    let mut cands = mode2_suite().cutsets;
    let m1 = mode1_suite();
    let mut models = Vec::new();
    for (s, c) in [(vec![33, 34, 35, 36], cands.remove(0)), (m1.s_gens.clone(), m1.cutsets[0].clone())] {
        let (p, cut) = split_for_trajectory(&traj, &s, &c.lines).unwrap();
        let red = reduce_for_partition(&traj, &p, &cut).unwrap();
        models.push((c.name, oos_core::twomach::fit_cosine_analytic(&red, &traj.case, &p, &cut).unwrap(), c.lines.len()));
    }
    assert!(matches!(rank_models(&models), Err(Error::MixedPartitions)));
}

#[test]
fn compensation_constants() {
    let traj = run("mode1");
    let k = compensation(&traj, &mode1_suite(), 0, AlphaRule::Min);
    assert!((k.alpha1 / 2.1798 - 1.0).abs() <= 0.25, "alpha1 {}", k.alpha1);
    assert!((k.alpha2 / 2.2611 - 1.0).abs() <= 0.25, "alpha2 {}", k.alpha2);
    assert!(k.alpha2 > k.alpha1);
    assert!(k.valid && (k.gamma_ls_n - k.gamma_ls).abs() <= 0.1);
    assert_eq!(k.alpha, k.alpha1);

    let traj = run("mode2");
    let k = compensation(&traj, &mode2_suite(), 0, AlphaRule::Max);
    assert!((k.alpha1 / 5.8557 - 1.0).abs() <= 0.25, "alpha1 {}", k.alpha1);
    assert!((k.alpha2 / 5.8655 - 1.0).abs() <= 0.25, "alpha2 {}", k.alpha2);
    assert!(k.valid && (k.gamma_ls_n - k.gamma_ls).abs() <= 0.1);
    assert_eq!(k.alpha, k.alpha2);
}

#[test]
fn monitored_load_on_lagging_side_is_rejected() {
    let traj = run("mode2");
    let suite = mode2_suite();
    let cs = &suite.cutsets[0];
    let (p, c) = split_for_trajectory(&traj, &suite.s_gens, &cs.lines).unwrap();
    let red = reduce_for_partition(&traj, &p, &c).unwrap();
    // Bus 3 lies with the lagging machines.
    let r = compute_compensation(&red, &traj.case, &[3], AlphaRule::Min);
    assert!(matches!(r, Err(Error::InvalidLoadSet(_))), "{r:?}");
}

#[test]
fn invalid_compensation_is_refused_unless_allowed() {
    let traj = run("mode1");
    let suite = mode1_suite();
    let cs = &suite.cutsets[0];
    let (p, c) = split_for_trajectory(&traj, &suite.s_gens, &cs.lines).unwrap();
    let tm = two_machine_decompose(&traj, &p, &c).unwrap();
    let mut k = compensation(&traj, &suite, 0, AlphaRule::Min);
    k.valid = false;
    let mut cfg = DetectorConfig::default();
    let r = detect_strategy_a(&tm, &traj.case, &cs.monitored, Some(&k), &cfg, "C1");
    assert!(matches!(r, Err(Error::InvalidCompensation(_))));
    cfg.allow_invalid_compensation = true;
    assert!(detect_strategy_a(&tm, &traj.case, &cs.monitored, Some(&k), &cfg, "C1").unwrap().is_some());
}

#[test]
fn configured_alpha_replaces_the_analytic_one() {
    let traj = run("mode1");
    let suite = mode1_suite();
    let cs = &suite.cutsets[0];
    let (p, c) = split_for_trajectory(&traj, &suite.s_gens, &cs.lines).unwrap();
    let tm = two_machine_decompose(&traj, &p, &c).unwrap();
    let cfg = DetectorConfig { compensation: CompensationSource::Configured { alpha: 0.0 + 1e-9 }, ..Default::default() };
    let ev = detect_strategy_a(&tm, &traj.case, &cs.monitored, None, &cfg, "C1").unwrap().unwrap();
    let only = detect_cutset_only(&tm, &cfg, "C1").unwrap();
    // A vanishing weight leaves the cutset term alone.
    assert!((ev.t - only.t).abs() < 2e-3, "{} vs {}", ev.t, only.t);
}

#[test]
fn detector_config_validation() {
    let bad = DetectorConfig { sigma_min: 0.0, ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = DetectorConfig { deriv_tol: -1.0, ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = DetectorConfig { compensation: CompensationSource::Configured { alpha: -2.0 }, ..Default::default() };
    assert!(bad.validate().is_err());
    assert!(DetectorConfig::default().validate().is_ok());
}

#[test]
fn reports_are_reproducible() {
    let traj = run("mode2");
    let a = run_suite(&traj, &mode2_suite()).unwrap().to_json();
    let b = run_suite(&run("mode2"), &mode2_suite()).unwrap().to_json();
    assert_eq!(a, b);
}
