//! Swing-equation integration in the centre-of-inertia frame.

pub mod network;
pub mod scenario;
pub mod trajectory;

use log::{debug, info, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::error::{Error, Result};
use crate::netmodel::admittance::{build_admittance, Stage};
use crate::netmodel::steady::{solve_operating_point, solve_steady_state, OperatingPoint};

pub use network::{network_solve, DynamicNetwork, LoadModes, NetworkSolution};
pub use scenario::{LoadOverride, Scenario};
pub use trajectory::{unwrap_angles, ElementId, Sample, Termination, Trajectory, TrajectoryMeta};

/// Angle magnitude beyond which a run is stopped as a rotor runaway.
pub const RUNAWAY_ANGLE: f64 = 20.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub delta: Vec<f64>,
    pub omega: Vec<f64>,
    pub bus_v: Vec<Complex64>,
    pub stage: Stage,
}

/// Project synchronous-frame angles and speeds onto the COI frame.
pub fn to_coi_frame(case: &NetworkCase, delta: &[f64], omega: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mt = case.total_inertia();
    let d0: f64 = case.generators.iter().zip(delta).map(|(g, d)| g.inertia * d).sum::<f64>() / mt;
    let w0: f64 = case.generators.iter().zip(omega).map(|(g, w)| g.inertia * w).sum::<f64>() / mt;
    (delta.iter().map(|d| d - d0).collect(), omega.iter().map(|w| w - w0).collect())
}

/// Right-hand side of the COI-frame swing equations given the electrical powers.
///
/// `P_COI` includes damping so that `sum M_i d(omega_i)/dt` vanishes identically.
pub fn derivatives(case: &NetworkCase, omega: &[f64], p_e: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let gens = &case.generators;
    let mt = case.total_inertia();
    let acc: Vec<f64> = gens.iter().zip(omega).zip(p_e).map(|((g, w), p)| g.p_mech - p - g.damping * w).collect();
    let p_coi: f64 = acc.iter().sum();
    let domega = gens.iter().zip(&acc).map(|(g, a)| (a - g.inertia / mt * p_coi) / g.inertia).collect();
    (omega.to_vec(), domega)
}

fn rhs(
    net: &DynamicNetwork,
    emf_mag: &[f64],
    delta: &[f64],
    omega: &[f64],
    modes: &LoadModes,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let emf = net.emf(emf_mag, delta);
    let sol = net.solve(&emf, modes)?;
    let pe = net.gen_powers(&emf, &sol.v);
    Ok(derivatives(&net.case, omega, &pe))
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical RK4 step with load modes frozen over the step.
fn rk4_step(
    net: &DynamicNetwork,
    emf_mag: &[f64],
    delta: &[f64],
    omega: &[f64],
    modes: &LoadModes,
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (k1d, k1w) = rhs(net, emf_mag, delta, omega, modes)?;
    let (k2d, k2w) = rhs(net, emf_mag, &axpy(delta, h / 2.0, &k1d), &axpy(omega, h / 2.0, &k1w), modes)?;
    let (k3d, k3w) = rhs(net, emf_mag, &axpy(delta, h / 2.0, &k2d), &axpy(omega, h / 2.0, &k2w), modes)?;
    let (k4d, k4w) = rhs(net, emf_mag, &axpy(delta, h, &k3d), &axpy(omega, h, &k3w), modes)?;
    let comb = |x: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..x.len()).map(|i| x[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])).collect()
    };
    Ok((comb(delta, &k1d, &k2d, &k3d, &k4d), comb(omega, &k1w, &k2w, &k3w, &k4w)))
}

/// Networks of the three topology stages of a scenario.
#[derive(Debug, Clone)]
pub struct StageNetworks {
    pub pre: DynamicNetwork,
    pub on: DynamicNetwork,
    pub post: DynamicNetwork,
}

impl StageNetworks {
    pub fn build(op: &OperatingPoint, scn: &Scenario) -> Result<Self> {
        let mk = |stage| -> Result<DynamicNetwork> {
            let adm = build_admittance(&op.case, stage, Some(&scn.fault))?;
            DynamicNetwork::new(&op.case, &adm, &op.load_admittance, scn.hysteresis)
        };
        Ok(StageNetworks { pre: mk(Stage::PreFault)?, on: mk(Stage::OnFault)?, post: mk(Stage::PostFault)? })
    }

    pub fn get(&self, stage: Stage) -> &DynamicNetwork {
        match stage {
            Stage::PreFault => &self.pre,
            Stage::OnFault => &self.on,
            Stage::PostFault => &self.post,
        }
    }
}

/// Operating point and post-fault equilibrium of a scenario without
/// integrating; the returned trajectory has no samples.
pub fn equilibrium(case: &NetworkCase, scn: &Scenario) -> Result<Trajectory> {
    scn.validate()?;
    let case_hash = case.hash();
    let eff = scn.apply(case)?;
    let op = solve_operating_point(&eff, scn.slack_bus)?;
    let nets = StageNetworks::build(&op, scn)?;
    let (baseline, sep_error) = match solve_steady_state(&op, &nets.post) {
        Ok(b) => (Some(b), None),
        Err(Error::NoPostFaultSEP(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(Trajectory::new(eff, case_hash, scn.clone(), op, baseline, sep_error, vec![], Termination::Completed))
}

/// Largest load-bus voltage difference [pu] between the reduced post-fault
/// network and the full network solve, over `configs` random rotor angle
/// configurations. Loads are taken as impedances at the post-fault
/// equilibrium.
pub fn reduction_check(traj: &Trajectory, seed: u64, configs: usize) -> Result<f64> {
    use rand::{Rng, SeedableRng};

    let base = traj.baseline()?;
    let mut case = traj.case.clone();
    for l in &mut case.loads {
        l.model = crate::case::LoadModel::ConstantImpedance;
    }
    let adm = build_admittance(&case, Stage::PostFault, Some(&traj.scenario.fault))?;
    let full = DynamicNetwork::new(&case, &adm, &base.load_admittance, traj.scenario.hysteresis)?;
    let red = crate::netmodel::kron_reduce(&adm, &case, &base.load_admittance, &base.emf, &[])?;
    let kmap = red.voltage_map();
    let rows: Vec<usize> = red.buses.iter().map(|b| adm.index[b]).collect();
    let mags: Vec<f64> = base.emf.iter().map(|e| e.norm()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let delta: Vec<f64> = mags.iter().map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let emf = full.emf(&mags, &delta);
        let sol = full.solve(&emf, &full.initial_modes())?;
        let e = nalgebra::DVector::from_column_slice(&emf);
        let vl = &kmap * e;
        for (i, &r) in rows.iter().enumerate() {
            worst = worst.max((vl[i] - sol.v[r]).norm());
        }
    }
    Ok(worst)
}

/// Integrate a scenario with fixed-step RK4 and record every step.
///
/// The sample at the fault-clearing index already carries post-fault powers:
/// each sample is solved on the network of the step that starts from it.
pub fn simulate(case: &NetworkCase, scn: &Scenario) -> Result<Trajectory> {
    scn.validate()?;
    let case_hash = case.hash();
    let eff = scn.apply(case)?;
    let op = solve_operating_point(&eff, scn.slack_bus)?;
    info!(
        "operating point solved in {} iterations (mismatch {:.2e})",
        op.pf_iterations, op.pf_mismatch
    );
    let nets = StageNetworks::build(&op, scn)?;
    let (baseline, sep_error) = match solve_steady_state(&op, &nets.post) {
        Ok(b) => (Some(b), None),
        Err(Error::NoPostFaultSEP(msg)) => {
            warn!("no post-fault equilibrium: {msg}");
            (None, Some(msg))
        }
        Err(e) => return Err(e),
    };

    let (k_on, k_off, k_end) = scn.step_grid();
    let stage_of = |k: usize| {
        if k < k_on {
            Stage::PreFault
        } else if k < k_off {
            Stage::OnFault
        } else {
            Stage::PostFault
        }
    };

    let m = eff.generators.len();
    let mut delta = op.delta.clone();
    let mut omega = vec![0.0; m];
    let mut modes = nets.pre.initial_modes();
    let mut samples = Vec::with_capacity(k_end + 1);
    let mut termination = Termination::Completed;

    for k in 0..=k_end {
        let stage = stage_of(k);
        let net = nets.get(stage);
        let emf = net.emf(&op.emf_mag, &delta);
        let sol = net.solve(&emf, &modes)?;
        modes = sol.modes.clone();
        let elements = net.elements(&emf, &sol);
        samples.push(Sample {
            t: k as f64 * scn.dt,
            stage,
            delta: delta.clone(),
            omega: omega.clone(),
            v: sol.v,
            elements,
            modes: modes.clone(),
        });
        if k == k_end {
            break;
        }
        if delta.iter().any(|d| d.abs() > RUNAWAY_ANGLE) {
            let t = k as f64 * scn.dt;
            debug!("rotor runaway at t = {t:.3} s");
            termination = Termination::RotorRunaway { t };
            break;
        }
        let (d, w) = rk4_step(net, &op.emf_mag, &delta, &omega, &modes, scn.dt)?;
        delta = d;
        omega = w;
    }

    Ok(Trajectory::new(eff, case_hash, scn.clone(), op, baseline, sep_error, samples, termination))
}
