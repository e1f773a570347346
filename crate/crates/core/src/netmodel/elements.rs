use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;

/// Active powers and angle differences of every network element at one instant.
///
/// Angles are principal values here; trajectories unwrap them over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementPowers {
    /// Power through each generator reactance, internal node to terminal.
    pub p_gen: Vec<f64>,
    /// `delta_i - phi_Gi`.
    pub sigma_gen: Vec<f64>,
    /// Power leaving the `from` end of each branch.
    pub p_fwd: Vec<f64>,
    /// Power leaving the `to` end of each branch.
    pub p_rev: Vec<f64>,
    /// `phi_from - phi_to`.
    pub sigma_branch: Vec<f64>,
    pub p_load: Vec<f64>,
    /// Phase of the load bus voltage.
    pub sigma_load: Vec<f64>,
    /// Power absorbed by the bus shunt conductance, per bus.
    pub p_shunt: Vec<f64>,
    pub sigma_bus: Vec<f64>,
}

/// Evaluate element powers from bus voltages (case bus order) and internal EMFs.
///
/// `p_load` is supplied by the caller because it depends on the current load model.
pub fn evaluate_elements(
    case: &NetworkCase,
    in_service: &[bool],
    v: &[Complex64],
    emf: &[Complex64],
    p_load: Vec<f64>,
) -> ElementPowers {
    let index = case.bus_index();
    let mut p_gen = Vec::with_capacity(case.generators.len());
    let mut sigma_gen = Vec::with_capacity(case.generators.len());
    for (g, e) in case.generators.iter().zip(emf) {
        let vt = v[index[&g.bus]];
        let i = (e - vt) / Complex64::new(0.0, g.xd_prime);
        p_gen.push((e * i.conj()).re);
        sigma_gen.push((e * vt.conj()).arg());
    }
    let mut p_fwd = Vec::with_capacity(case.branches.len());
    let mut p_rev = Vec::with_capacity(case.branches.len());
    let mut sigma_branch = Vec::with_capacity(case.branches.len());
    for (pos, br) in case.branches.iter().enumerate() {
        let vf = v[index[&br.from]];
        let vt = v[index[&br.to]];
        sigma_branch.push((vf * vt.conj()).arg());
        if in_service[pos] {
            let (yff, yft, ytf, ytt) = br.two_port();
            let i_f = yff * vf + yft * vt;
            let i_t = ytf * vf + ytt * vt;
            p_fwd.push((vf * i_f.conj()).re);
            p_rev.push((vt * i_t.conj()).re);
        } else {
            p_fwd.push(0.0);
            p_rev.push(0.0);
        }
    }
    let sigma_load = case.loads.iter().map(|l| v[index[&l.bus]].arg()).collect();
    let p_shunt = case.buses.iter().enumerate().map(|(i, b)| b.gs * v[i].norm_sqr()).collect();
    let sigma_bus = v.iter().map(|x| x.arg()).collect();
    ElementPowers { p_gen, sigma_gen, p_fwd, p_rev, sigma_branch, p_load, sigma_load, p_shunt, sigma_bus }
}
