#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use oos_core::case::{Branch, Bus, Generator, Load, LoadModel, NetworkCase};
use oos_core::detect::{NamedCutset, SuiteConfig};
use oos_core::netmodel::{build_admittance, kron_reduce, solve_operating_point, BranchRef, Stage};
use oos_core::simcore::{simulate, Scenario, Trajectory};

pub fn cases_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

pub fn ieee39() -> NetworkCase {
    NetworkCase::load(cases_dir().join("ieee39.json")).unwrap()
}

pub fn scenario(name: &str) -> Scenario {
    Scenario::load(cases_dir().join(format!("{name}.json"))).unwrap()
}

pub fn run(name: &str) -> Trajectory {
    simulate(&ieee39(), &scenario(name)).unwrap()
}

fn br(a: usize, b: usize) -> BranchRef {
    BranchRef(a, b)
}

pub fn mode1_suite() -> SuiteConfig {
    SuiteConfig {
        s_gens: (30..=38).collect(),
        cutsets: vec![
            NamedCutset { name: "C1".into(), lines: vec![br(2, 1), br(8, 9)], monitored: vec![3, 4, 7, 8] },
            NamedCutset { name: "C2".into(), lines: vec![br(1, 39), br(9, 39)], monitored: vec![] },
            NamedCutset {
                name: "C3".into(),
                lines: vec![br(1, 39), br(2, 3), br(14, 4), br(6, 5), br(6, 7), br(17, 18)],
                monitored: vec![],
            },
        ],
        detector: Default::default(),
    }
}

pub fn mode2_suite() -> SuiteConfig {
    SuiteConfig {
        s_gens: vec![33, 34, 35, 36],
        cutsets: vec![
            NamedCutset { name: "C4".into(), lines: vec![br(16, 17), br(16, 15)], monitored: vec![21] },
            NamedCutset { name: "C5".into(), lines: vec![br(22, 21), br(23, 24), br(19, 16)], monitored: vec![] },
        ],
        detector: Default::default(),
    }
}

fn gen(bus: usize, inertia: f64, xd: f64, p: f64) -> Generator {
    Generator { bus, inertia, xd_prime: xd, p_mech: p, v_set: 1.0, damping: 0.0 }
}

fn line(from: usize, to: usize, r: f64, x: f64, b: f64) -> Branch {
    Branch { from, to, r, x, b, tap: 1.0 }
}

/// Two machines joined by one lossless line.
pub fn two_machine() -> NetworkCase {
    NetworkCase {
        name: "two-machine".into(),
        base_mva: 100.0,
        buses: vec![Bus { id: 1, gs: 0.0, bs: 0.0 }, Bus { id: 2, gs: 0.0, bs: 0.0 }],
        branches: vec![line(1, 2, 0.0, 0.2, 0.0)],
        generators: vec![gen(1, 0.05, 0.1, 0.5), gen(2, 0.1, 0.1, -0.5)],
        loads: vec![],
    }
}

/// Two generators, two impedance-load buses, lossy lines with charging.
pub fn four_bus() -> NetworkCase {
    NetworkCase {
        name: "four-bus".into(),
        base_mva: 100.0,
        buses: (1..=4).map(|id| Bus { id, gs: if id == 4 { 0.02 } else { 0.0 }, bs: 0.0 }).collect(),
        branches: vec![
            line(1, 3, 0.01, 0.1, 0.02),
            line(3, 4, 0.02, 0.15, 0.03),
            line(4, 2, 0.01, 0.12, 0.02),
            line(1, 4, 0.03, 0.25, 0.0),
        ],
        generators: vec![gen(1, 0.08, 0.2, 1.0), gen(2, 0.06, 0.25, 0.5)],
        loads: vec![
            Load { bus: 3, p: 0.8, q: 0.2, model: LoadModel::ConstantImpedance, v_threshold: 0.7 },
            Load { bus: 4, p: 0.6, q: 0.1, model: LoadModel::ConstantImpedance, v_threshold: 0.7 },
        ],
    }
}

/// Full bus-voltage solve assembled directly from the case data: generator
/// Norton currents injected into the complete bus admittance matrix.
pub fn full_solve(case: &NetworkCase, load_y: &[Complex64], emf: &[Complex64]) -> Vec<Complex64> {
    let n = case.buses.len();
    let idx = |id: usize| case.buses.iter().position(|b| b.id == id).unwrap();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for (i, b) in case.buses.iter().enumerate() {
        y[(i, i)] += Complex64::new(b.gs, b.bs);
    }
    for b in &case.branches {
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(b.r, b.x);
        let half = Complex64::new(0.0, b.b / 2.0);
        let (f, t) = (idx(b.from), idx(b.to));
        y[(f, f)] += (ys + half) / (b.tap * b.tap);
        y[(t, t)] += ys + half;
        y[(f, t)] -= ys / b.tap;
        y[(t, f)] -= ys / b.tap;
    }
    for (l, yl) in case.loads.iter().zip(load_y) {
        y[(idx(l.bus), idx(l.bus))] += yl;
    }
    let mut inj = DVector::<Complex64>::zeros(n);
    for (g, e) in case.generators.iter().zip(emf) {
        let yg = Complex64::new(0.0, -1.0 / g.xd_prime);
        y[(idx(g.bus), idx(g.bus))] += yg;
        inj[idx(g.bus)] += yg * e;
    }
    y.lu().solve(&inj).unwrap().iter().copied().collect()
}

/// Central difference of `f` at `x`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Largest load-bus voltage error of the reduced network against the full
/// solve for the given rotor angles.
pub fn reduction_error(case: &NetworkCase, slack: usize, extra: &[usize], delta: &[f64]) -> f64 {
    let op = solve_operating_point(case, slack).unwrap();
    let adm = build_admittance(&op.case, Stage::PreFault, None).unwrap();
    let red = kron_reduce(&adm, &op.case, &op.load_admittance, &op.emf, extra).unwrap();
    let emf: Vec<Complex64> = op.emf_mag.iter().zip(delta).map(|(&m, &d)| Complex64::from_polar(m, d)).collect();
    let vl = red.voltage_map() * DVector::from_column_slice(&emf);
    let full = full_solve(&op.case, &op.load_admittance, &emf);
    red.buses
        .iter()
        .enumerate()
        .map(|(i, b)| (vl[i] - full[op.case.bus_pos(*b).unwrap()]).norm())
        .fold(0.0, f64::max)
}
