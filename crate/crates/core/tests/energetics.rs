mod common;

use common::*;
use oos_core::detect::split_for_trajectory;
use oos_core::energetics::*;
use oos_core::netmodel::{BranchRef, FaultSpec};
use oos_core::partition::generator_partition;
use oos_core::simcore::{simulate, ElementId, Scenario, Trajectory};

fn c1_trace(traj: &Trajectory) -> TwoMachineTrace {
    let (p, c) = split_for_trajectory(traj, &(30..=38).collect::<Vec<_>>(), &[BranchRef(2, 1), BranchRef(8, 9)]).unwrap();
    two_machine_decompose(traj, &p, &c).unwrap()
}

/// Largest post-fault change of `V_KE + V_PE` relative to its value at clearing.
fn lossless_drift(traj: &Trajectory) -> f64 {
    let e = total_energy(traj).unwrap();
    let k0 = traj.clearing_index();
    let total: Vec<f64> = e.v_ke.iter().zip(&e.v_pe).map(|(a, b)| a + b).collect();
    let drift = total[k0..].iter().map(|x| (x - total[k0]).abs()).fold(0.0, f64::max);
    drift / total[k0].abs()
}

#[test]
fn lossless_variant_conserves_total_energy() {
    let traj = run("lossless_bus24");
    assert_eq!(traj.len(), 5001);
    let drift = lossless_drift(&traj);
    assert!(drift <= 1e-3, "relative drift {drift:e}");
}

#[test]
fn lossless_two_machine_terms_balance() {
    let traj = run("lossless_bus24");
    let tm = c1_trace(&traj);
    let k0 = tm.t0_index;
    let peak = tm.v_ke2.iter().fold(0.0f64, |a, b| a.max(*b));
    for k in k0..tm.len() {
        assert!(tm.dp_loss2[k].abs() < 1e-9 && tm.dp_closs[k].abs() < 1e-9, "loss terms at t = {}", tm.t[k]);
        let r = tm.v_ke2[k] - tm.v_ke2[k0] + tm.v_pec2[k] + tm.v_pel2[k];
        assert!(r.abs() <= 1e-3 * peak, "balance {r:e} at t = {}", tm.t[k]);
    }
}

#[test]
fn energy_balance_on_unstable_runs() {
    for name in ["mode1", "mode2"] {
        let traj = run(name);
        let tm = if name == "mode1" {
            c1_trace(&traj)
        } else {
            let (p, c) = split_for_trajectory(&traj, &[33, 34, 35, 36], &[BranchRef(16, 17), BranchRef(16, 15)]).unwrap();
            two_machine_decompose(&traj, &p, &c).unwrap()
        };
        let slip = tm.first_slip_index().expect("pole slip");
        let w = tm.t0_index..=slip;
        let peak = tm.v_ke2[w.clone()].iter().fold(0.0f64, |a, b| a.max(*b));
        let worst = tm.residual[w].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(worst <= 1e-3 * peak, "{name}: residual {worst:e} vs peak {peak:e}");
    }
}

#[test]
fn potential_energy_is_the_sum_of_element_lpe() {
    let traj = run("mode1_stable");
    let e = total_energy(&traj).unwrap();
    let mut sum = vec![0.0; traj.len()];
    for id in traj.elements() {
        for (s, x) in sum.iter_mut().zip(element_lpe(&traj, id).unwrap()) {
            *s += x;
        }
    }
    assert_eq!(sum, e.v_pe);
}

#[test]
fn kinetic_energy_rises_while_the_fault_is_on() {
    let traj = run("mode1");
    let e = total_energy(&traj).unwrap();
    let (on, off, _) = traj.scenario.step_grid();
    for k in on + 1..off {
        assert!(e.v_ke[k] > e.v_ke[k - 1], "t = {}", e.t[k]);
    }
}

#[test]
fn relative_kinetic_energy_never_exceeds_total() {
    let traj = run("mode1");
    let e = total_energy(&traj).unwrap();
    let tm = c1_trace(&traj);
    for k in 0..tm.len() {
        assert!(tm.v_ke2[k] <= e.v_ke[k] * (1.0 + 1e-12) + 1e-15);
    }
}

#[test]
fn relative_kinetic_direct_values() {
    // M_S = 1, M_A = 2, omega_S = 1, omega_A = 0 -> V_KE2 = 1/2 * 2/3 * 1.
    let m_eq = 1.0 * 2.0 / 3.0;
    let w2: f64 = 1.0 - 0.0;
    assert!((0.5 * m_eq * w2 * w2 - 1.0 / 3.0).abs() < 1e-15);

    let mut case = two_machine();
    case.generators[0].inertia = 1.0;
    case.generators[1].inertia = 2.0;
    let mut scn = Scenario {
        name: "toy".into(),
        case: None,
        fault: FaultSpec::bus(1),
        fault_start: 0.0,
        fault_duration: 0.05,
        t_end: 0.2,
        dt: 1e-3,
        slack_bus: 2,
        load_threshold: None,
        hysteresis: 0.05,
        dispatch: Default::default(),
        voltage_setpoints: Default::default(),
        load_overrides: vec![],
        lossless: false,
    };
    scn.dispatch.insert(1, 0.5);
    let traj = simulate(&case, &scn).unwrap();
    let part = generator_partition(&traj.case, &[1]).unwrap();
    let (w2, ke) = relative_kinetic(&traj, &part).unwrap();
    for (s, (w, k)) in traj.samples.iter().zip(w2.iter().zip(&ke)) {
        assert!((w - (s.omega[0] - s.omega[1])).abs() < 1e-15);
        assert!((k - 0.5 * m_eq * w * w).abs() < 1e-15);
    }
}

#[test]
fn lossless_line_lpe_matches_closed_form() {
    // Stiff machines keep both terminal voltages at |E| = 1, so the line
    // carries B sin(sigma) with B = 1 / x.
    let mut case = two_machine();
    for g in &mut case.generators {
        g.xd_prime = 1e-5;
    }
    let scn = Scenario {
        name: "toy".into(),
        case: None,
        fault: FaultSpec::bus(1),
        fault_start: 0.0,
        fault_duration: 0.05,
        t_end: 0.5,
        dt: 1e-4,
        slack_bus: 2,
        load_threshold: None,
        hysteresis: 0.05,
        dispatch: [(1, 0.5)].into_iter().collect(),
        voltage_setpoints: Default::default(),
        load_overrides: vec![],
        lossless: false,
    };
    let traj = simulate(&case, &scn).unwrap();
    let id = ElementId::Branch(0);
    let lpe = element_lpe(&traj, id).unwrap();
    let (_, sigma) = traj.element_series(id);
    let base = traj.baseline().unwrap();
    let b = 1.0 / 0.2;
    let ss = base.elements.sigma_branch[0];
    let ps = base.elements.p_fwd[0];
    let k0 = traj.clearing_index();
    let at = |k: usize| -b * (sigma[k].cos() - ss.cos()) - ps * (sigma[k] - ss);
    let scale = (k0..lpe.len()).map(|k| at(k).abs()).fold(0.0, f64::max);
    for k in k0..lpe.len() {
        let exact = at(k) - at(k0) + lpe[k0];
        assert!((lpe[k] - exact).abs() <= 1e-3 * scale, "t = {}: {} vs {}", traj.samples[k].t, lpe[k], exact);
    }
}

#[test]
fn steady_trajectory_has_zero_terms() {
    let mut scn = scenario("mode1");
    scn.fault_duration = 0.0;
    scn.t_end = 1.0;
    let traj = simulate(&ieee39(), &scn).unwrap();
    let tm = c1_trace(&traj);
    let e = total_energy(&traj).unwrap();
    for k in 0..tm.len() {
        for x in [tm.dp_c[k], tm.dp_l2[k], tm.dp_loss2[k], tm.dp_closs[k], tm.v_ke2[k], tm.v_pe2[k], e.v_ke[k], e.v_pe[k]] {
            assert!(x.abs() < 1e-8, "t = {}: {x}", tm.t[k]);
        }
    }
}

#[test]
fn quadrature_converges_at_second_order() {
    let base = scenario("mode1_stable");
    let at = |dt: f64| {
        let mut scn = base.clone();
        scn.dt = dt;
        scn.t_end = 1.0;
        let traj = simulate(&ieee39(), &scn).unwrap();
        let tm = c1_trace(&traj);
        *tm.v_pe2.last().unwrap()
    };
    let (a, b, c) = (at(4e-3), at(2e-3), at(1e-3));
    let ratio = (a - b).abs() / (b - c).abs();
    assert!(ratio > 3.0, "successive differences {:e}, {:e}", (a - b).abs(), (b - c).abs());
}

#[test]
fn loss_terms_are_small_against_load_term() {
    let traj = run("mode1");
    let tm = c1_trace(&traj);
    let slip = tm.first_slip_index().unwrap();
    let w = tm.t0_index..=slip;
    let loss = w.clone().map(|k| (tm.dp_loss2[k] + tm.dp_closs[k]).abs()).fold(0.0, f64::max);
    let l2 = w.map(|k| tm.dp_l2[k].abs()).fold(0.0, f64::max);
    assert!(loss <= 0.15 * l2, "{loss} vs {l2}");
}

#[test]
fn pebs_crossing_on_synthetic_cosine() {
    let t: Vec<f64> = (0..=6000).map(|k| k as f64 * 1e-3).collect();
    let n = t.len();
    let tm = TwoMachineTrace {
        t0_index: 0,
        m_s: 1.0,
        m_a: 1.0,
        omega2: vec![1.0; n],
        delta: t.clone(),
        delta_sa: t.clone(),
        dp_c: vec![0.0; n],
        dp_ls: vec![0.0; n],
        dp_la: vec![0.0; n],
        dp_l2: vec![0.0; n],
        dp_loss2: vec![0.0; n],
        dp_closs: vec![0.0; n],
        dp_load: vec![],
        v_ke2: vec![0.0; n],
        v_pec2: vec![0.0; n],
        v_pel2: vec![0.0; n],
        v_peloss2: vec![0.0; n],
        v_pe2: t.iter().map(|x| -x.cos()).collect(),
        residual: vec![0.0; n],
        t,
    };
    let c = pebs_crossing(&tm).unwrap();
    assert!((c.t - std::f64::consts::PI).abs() < 1e-6, "{}", c.t);
}

#[test]
fn stable_swing_has_no_pebs_crossing() {
    let traj = run("mode1_stable");
    assert!(pebs_crossing(&c1_trace(&traj)).is_none());
}

#[test]
fn c1_dominates_series_lpe_on_mode1() {
    let traj = run("mode1");
    let suite = mode1_suite();
    let tm = c1_trace(&traj);
    let slip = tm.first_slip_index().unwrap();
    let sl = series_lpe(&traj).unwrap();
    let k = sl.peak_index(tm.t0_index..slip + 1).unwrap();
    let shares: Vec<f64> = suite
        .cutsets
        .iter()
        .map(|c| {
            let (_, cut) = split_for_trajectory(&traj, &suite.s_gens, &c.lines).unwrap();
            let pos: Vec<usize> = cut.positions(&traj.case).unwrap().iter().map(|p| p.0).collect();
            sl.share_at(&pos, k)
        })
        .collect();
    assert!(shares[0] > 0.5, "{shares:?}");
    assert!(shares[1] < shares[0] && shares[2] < shares[0], "{shares:?}");
}
