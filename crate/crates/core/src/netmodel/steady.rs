//! Pre-fault operating point and post-fault stable equilibrium.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::{LoadModel, NetworkCase};
use crate::error::{Error, Result};
use crate::netmodel::admittance::{build_admittance, Stage};
use crate::netmodel::elements::ElementPowers;
use crate::netmodel::powerflow::solve_power_flow;
use crate::simcore::network::{DynamicNetwork, LoadModes};

pub const SEP_TOLERANCE: f64 = 1e-10;
pub const SEP_MAX_ITER: usize = 50;

/// Pre-fault power-flow solution extended to the generator internal nodes and
/// expressed in the centre-of-inertia frame.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    /// Case with the slack unit's mechanical power set from the power flow.
    pub case: NetworkCase,
    pub v: Vec<Complex64>,
    pub emf: Vec<Complex64>,
    pub emf_mag: Vec<f64>,
    pub delta: Vec<f64>,
    /// `(P - jQ)/|V|^2` of every load at the operating point.
    pub load_admittance: Vec<Complex64>,
    pub pf_iterations: usize,
    pub pf_mismatch: f64,
}

/// Power flow on the pre-fault network followed by the voltage-behind-reactance
/// extension `E = V + j x'_d I`.
pub fn solve_operating_point(case: &NetworkCase, slack_bus: usize) -> Result<OperatingPoint> {
    case.validate()?;
    let y = build_admittance(case, Stage::PreFault, None)?;
    let pf = solve_power_flow(case, &y, slack_bus)?;
    let mut case = case.clone();
    let slack = case.gen_pos(slack_bus)?;
    case.generators[slack].p_mech = pf.p_gen[slack];

    let mut emf = Vec::with_capacity(case.generators.len());
    for (k, g) in case.generators.iter().enumerate() {
        let vt = pf.v[y.index[&g.bus]];
        let i = (Complex64::new(pf.p_gen[k], pf.q_gen[k]) / vt).conj();
        emf.push(vt + Complex64::new(0.0, g.xd_prime) * i);
    }
    let raw: Vec<f64> = emf.iter().map(|e| e.arg()).collect();
    let mt = case.total_inertia();
    let coi: f64 = case.generators.iter().zip(&raw).map(|(g, d)| g.inertia * d).sum::<f64>() / mt;
    let rot = Complex64::from_polar(1.0, -coi);
    let emf: Vec<Complex64> = emf.iter().map(|e| e * rot).collect();
    let v: Vec<Complex64> = pf.v.iter().map(|x| x * rot).collect();
    let delta = raw.iter().map(|d| d - coi).collect();
    let emf_mag = emf.iter().map(|e| e.norm()).collect();
    let load_admittance = case
        .loads
        .iter()
        .map(|l| Complex64::new(l.p, -l.q) / v[y.index[&l.bus]].norm_sqr())
        .collect();
    Ok(OperatingPoint {
        case,
        v,
        emf,
        emf_mag,
        delta,
        load_admittance,
        pf_iterations: pf.iterations,
        pf_mismatch: pf.max_mismatch,
    })
}

/// Element powers and angles at the post-fault stable equilibrium: the
/// reference every deviation `P_i - P_i^s` is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyBaseline {
    pub stage: Stage,
    pub delta: Vec<f64>,
    pub emf: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub modes: LoadModes,
    pub elements: ElementPowers,
    /// Per-load admittance drawing the equilibrium load power at the equilibrium voltage.
    pub load_admittance: Vec<Complex64>,
    pub newton_iterations: usize,
}

impl SteadyBaseline {
    /// Inertia-weighted mean angle of the generators at positions `gens`.
    pub fn cluster_angle(&self, case: &NetworkCase, gens: &[usize]) -> f64 {
        let m: f64 = gens.iter().map(|&g| case.generators[g].inertia).sum();
        gens.iter().map(|&g| case.generators[g].inertia * self.delta[g]).sum::<f64>() / m
    }
}

/// Residual of the COI-frame swing equations at angles `delta`.
pub fn swing_residual(net: &DynamicNetwork, emf_mag: &[f64], delta: &[f64], modes: &LoadModes) -> Result<Vec<f64>> {
    let emf = net.emf(emf_mag, delta);
    let sol = net.solve(&emf, modes)?;
    let pe = net.gen_powers(&emf, &sol.v);
    let gens = &net.case.generators;
    let mt = net.case.total_inertia();
    let p_coi: f64 = gens.iter().zip(&pe).map(|(g, p)| g.p_mech - p).sum();
    Ok(gens.iter().zip(&pe).map(|(g, p)| g.p_mech - p - g.inertia / mt * p_coi).collect())
}

/// Newton iteration on the rotor angles for the equilibrium of `net`,
/// starting from the pre-fault angles.
///
/// The COI constraint `sum M_i delta_i = 0` replaces the last (dependent)
/// swing equation.
pub fn solve_steady_state(op: &OperatingPoint, net: &DynamicNetwork) -> Result<SteadyBaseline> {
    let m = op.case.generators.len();
    let inertia: Vec<f64> = op.case.generators.iter().map(|g| g.inertia).collect();
    let mut delta = op.delta.clone();
    let modes = net.initial_modes();
    let system = |d: &[f64]| -> Result<DVector<f64>> {
        let r = swing_residual(net, &op.emf_mag, d, &modes)?;
        let mut f = DVector::zeros(m);
        for i in 0..m - 1 {
            f[i] = r[i];
        }
        f[m - 1] = inertia.iter().zip(d).map(|(mi, di)| mi * di).sum();
        Ok(f)
    };
    let sep_err = |e: Error| Error::NoPostFaultSEP(e.to_string());

    let mut iterations = 0;
    loop {
        let f = system(&delta).map_err(sep_err)?;
        if f.amax() < SEP_TOLERANCE {
            break;
        }
        if iterations >= SEP_MAX_ITER || !f.amax().is_finite() {
            return Err(Error::NoPostFaultSEP(format!(
                "Newton on rotor angles stopped after {iterations} iterations with residual {:.3e}",
                f.amax()
            )));
        }
        iterations += 1;
        let h = 1e-7;
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            let mut dp = delta.clone();
            let mut dm = delta.clone();
            dp[j] += h;
            dm[j] -= h;
            let col = (system(&dp).map_err(sep_err)? - system(&dm).map_err(sep_err)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let mut step = jac
            .lu()
            .solve(&(-f))
            .ok_or_else(|| Error::NoPostFaultSEP("singular angle Jacobian".into()))?;
        let big = step.amax();
        if big > 0.5 {
            step *= 0.5 / big;
        }
        for i in 0..m {
            delta[i] += step[i];
        }
    }

    let emf = net.emf(&op.emf_mag, &delta);
    let sol = net.solve(&emf, &modes)?;
    if sol.modes.iter().any(|&c| c) {
        return Err(Error::NoPostFaultSEP("a constant-power load sits below its conversion threshold".into()));
    }
    let elements = net.elements(&emf, &sol);
    let idx = op.case.bus_index();
    let load_admittance = op
        .case
        .loads
        .iter()
        .enumerate()
        .map(|(k, l)| match l.model {
            LoadModel::ConstantImpedance => op.load_admittance[k],
            LoadModel::ConstantPower => Complex64::new(l.p, -l.q) / sol.v[idx[&l.bus]].norm_sqr(),
        })
        .collect();
    Ok(SteadyBaseline {
        stage: net.stage,
        delta,
        emf,
        v: sol.v.clone(),
        modes: sol.modes.clone(),
        elements,
        load_admittance,
        newton_iterations: iterations,
    })
}
