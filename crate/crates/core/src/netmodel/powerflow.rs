//! Newton-Raphson power flow in polar form on a dense Jacobian.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::case::NetworkCase;
use crate::error::{Error, Result};
use crate::netmodel::admittance::AdmittanceSystem;

pub const PF_TOLERANCE: f64 = 1e-11;
pub const PF_MAX_ITER: usize = 30;

#[derive(Debug, Clone)]
pub struct PowerFlowSolution {
    /// Bus voltages in case bus order, slack angle zero.
    pub v: Vec<Complex64>,
    pub p_gen: Vec<f64>,
    pub q_gen: Vec<f64>,
    pub iterations: usize,
    pub max_mismatch: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Slack,
    Pv,
    Pq,
}

/// Solve the bus power flow with generators as PV buses and loads at their
/// scheduled P and Q.
pub fn solve_power_flow(case: &NetworkCase, y: &AdmittanceSystem, slack_bus: usize) -> Result<PowerFlowSolution> {
    let n = case.buses.len();
    let slack = *y.index.get(&slack_bus).ok_or(Error::UnknownBus(slack_bus))?;
    if !case.generators.iter().any(|g| g.bus == slack_bus) {
        return Err(Error::InvalidScenario(format!("slack bus {slack_bus} has no generator")));
    }

    let mut kind = vec![Kind::Pq; n];
    let mut vm = vec![1.0; n];
    let mut p_spec = vec![0.0; n];
    let mut q_spec = vec![0.0; n];
    for g in &case.generators {
        let i = y.index[&g.bus];
        kind[i] = if i == slack { Kind::Slack } else { Kind::Pv };
        vm[i] = g.v_set;
        p_spec[i] += g.p_mech;
    }
    for l in &case.loads {
        let i = y.index[&l.bus];
        p_spec[i] -= l.p;
        q_spec[i] -= l.q;
    }
    let mut va = vec![0.0; n];

    let pvpq: Vec<usize> = (0..n).filter(|&i| kind[i] != Kind::Slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| kind[i] == Kind::Pq).collect();
    let na = pvpq.len();
    let nv = pq.len();

    let mut iterations = 0;
    let mut max_mismatch;
    loop {
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
        let vv = DVector::from_vec(v.clone());
        let ibus = &y.y * &vv;
        let s: Vec<Complex64> = (0..n).map(|i| v[i] * ibus[i].conj()).collect();
        let mut f = DVector::<f64>::zeros(na + nv);
        for (k, &i) in pvpq.iter().enumerate() {
            f[k] = s[i].re - p_spec[i];
        }
        for (k, &i) in pq.iter().enumerate() {
            f[na + k] = s[i].im - q_spec[i];
        }
        max_mismatch = f.amax();
        if max_mismatch < PF_TOLERANCE {
            break;
        }
        if iterations >= PF_MAX_ITER || !max_mismatch.is_finite() {
            return Err(Error::PowerFlowDiverged { iterations, mismatch: max_mismatch });
        }
        iterations += 1;

        // dS/dVa = j diag(V) conj(diag(I) - Y diag(V))
        // dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
        let mut ds_dva = DMatrix::<Complex64>::zeros(n, n);
        let mut ds_dvm = DMatrix::<Complex64>::zeros(n, n);
        let vnorm: Vec<Complex64> = v.iter().map(|x| x / x.norm()).collect();
        for r in 0..n {
            for c in 0..n {
                let yrc = y.y[(r, c)];
                if yrc == Complex64::new(0.0, 0.0) && r != c {
                    continue;
                }
                let mut a = -(yrc * v[c]).conj();
                let mut m = v[r] * (yrc * vnorm[c]).conj();
                if r == c {
                    a += ibus[r].conj();
                    m += ibus[r].conj() * vnorm[r];
                }
                ds_dva[(r, c)] = Complex64::new(0.0, 1.0) * v[r] * a;
                ds_dvm[(r, c)] = m;
            }
        }
        let mut jac = DMatrix::<f64>::zeros(na + nv, na + nv);
        for (a, &r) in pvpq.iter().enumerate() {
            for (b, &c) in pvpq.iter().enumerate() {
                jac[(a, b)] = ds_dva[(r, c)].re;
            }
            for (b, &c) in pq.iter().enumerate() {
                jac[(a, na + b)] = ds_dvm[(r, c)].re;
            }
        }
        for (a, &r) in pq.iter().enumerate() {
            for (b, &c) in pvpq.iter().enumerate() {
                jac[(na + a, b)] = ds_dva[(r, c)].im;
            }
            for (b, &c) in pq.iter().enumerate() {
                jac[(na + a, na + b)] = ds_dvm[(r, c)].im;
            }
        }
        let dx = jac.lu().solve(&(-f)).ok_or(Error::PowerFlowDiverged { iterations, mismatch: max_mismatch })?;
        for (k, &i) in pvpq.iter().enumerate() {
            va[i] += dx[k];
        }
        for (k, &i) in pq.iter().enumerate() {
            vm[i] += dx[na + k];
        }
    }

    let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
    let vv = DVector::from_vec(v.clone());
    let ibus = &y.y * &vv;
    let mut p_gen = Vec::with_capacity(case.generators.len());
    let mut q_gen = Vec::with_capacity(case.generators.len());
    for g in &case.generators {
        let i = y.index[&g.bus];
        let s = v[i] * ibus[i].conj();
        let (pl, ql) = case
            .load_pos(g.bus)
            .map(|k| (case.loads[k].p, case.loads[k].q))
            .unwrap_or((0.0, 0.0));
        p_gen.push(s.re + pl);
        q_gen.push(s.im + ql);
    }
    Ok(PowerFlowSolution { v, p_gen, q_gen, iterations, max_mismatch })
}

/// Largest active-power mismatch over all buses, re-evaluated from `v`.
pub fn active_mismatch(case: &NetworkCase, y: &AdmittanceSystem, v: &[Complex64], p_gen: &[f64]) -> f64 {
    let n = case.buses.len();
    let mut p_spec = vec![0.0; n];
    for (g, p) in case.generators.iter().zip(p_gen) {
        p_spec[y.index[&g.bus]] += p;
    }
    for l in &case.loads {
        p_spec[y.index[&l.bus]] -= l.p;
    }
    let vv = DVector::from_vec(v.to_vec());
    let ibus = &y.y * &vv;
    (0..n).map(|i| ((v[i] * ibus[i].conj()).re - p_spec[i]).abs()).fold(0.0, f64::max)
}
