//! Algebraic network solve behind the swing equations.
//!
//! Generators enter as Norton equivalents of `E_i = |E_i|∠δ_i` behind `x'_d`.
//! Constant-impedance loads sit in the factorized matrix; constant-power
//! loads (and the ones converted to an impedance at low voltage) are handled
//! as current injections by fixed-point iteration.

use nalgebra::{DMatrix, DVector, LU, Dyn};
use num_complex::Complex64;

use crate::case::{LoadModel, NetworkCase};
use crate::error::{Error, Result};
use crate::netmodel::admittance::{AdmittanceSystem, Stage};
use crate::netmodel::elements::{evaluate_elements, ElementPowers};

pub const NETWORK_TOL: f64 = 1e-12;
pub const NETWORK_MAX_ITER: usize = 200;
pub const DEFAULT_HYSTERESIS: f64 = 0.05;

/// Current model of each load: `true` once a constant-power load has been
/// converted to its equivalent impedance.
pub type LoadModes = Vec<bool>;

#[derive(Debug, Clone)]
pub struct NetworkSolution {
    pub v: Vec<Complex64>,
    pub p_load: Vec<f64>,
    pub modes: LoadModes,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct DynamicNetwork {
    pub case: NetworkCase,
    pub stage: Stage,
    pub in_service: Vec<bool>,
    lu: LU<Complex64, Dyn, Dyn>,
    /// Bus voltages per unit EMF of each generator: `V = K E` when only
    /// impedance loads are present.
    k: DMatrix<Complex64>,
    gen_rows: Vec<usize>,
    load_rows: Vec<usize>,
    /// Admittance of every load at its operating point (impedance loads) or
    /// at its conversion threshold (constant-power loads).
    load_y: Vec<Complex64>,
    load_s: Vec<Complex64>,
    is_power: Vec<bool>,
    hysteresis: f64,
}

impl DynamicNetwork {
    /// `load_admittance` holds `(P - jQ)/|V|^2` at the pre-fault operating point.
    pub fn new(case: &NetworkCase, adm: &AdmittanceSystem, load_admittance: &[Complex64], hysteresis: f64) -> Result<Self> {
        let n = adm.n();
        let mut y = adm.y.clone();
        let gen_rows: Vec<usize> = case.generators.iter().map(|g| adm.index[&g.bus]).collect();
        for (g, &r) in case.generators.iter().zip(&gen_rows) {
            y[(r, r)] += Complex64::new(0.0, -1.0 / g.xd_prime);
        }
        let load_rows: Vec<usize> = case.loads.iter().map(|l| adm.index[&l.bus]).collect();
        let mut load_y = Vec::with_capacity(case.loads.len());
        let mut load_s = Vec::with_capacity(case.loads.len());
        let mut is_power = Vec::with_capacity(case.loads.len());
        for (k, l) in case.loads.iter().enumerate() {
            let s = Complex64::new(l.p, l.q);
            load_s.push(s);
            match l.model {
                LoadModel::ConstantImpedance => {
                    y[(load_rows[k], load_rows[k])] += load_admittance[k];
                    load_y.push(load_admittance[k]);
                    is_power.push(false);
                }
                LoadModel::ConstantPower => {
                    load_y.push(s.conj() / (l.v_threshold * l.v_threshold));
                    is_power.push(true);
                }
            }
        }
        let lu = y.lu();
        let mut nmat = DMatrix::<Complex64>::zeros(n, case.generators.len());
        for (j, (g, &r)) in case.generators.iter().zip(&gen_rows).enumerate() {
            nmat[(r, j)] = Complex64::new(0.0, -1.0 / g.xd_prime);
        }
        let k = lu.solve(&nmat).ok_or(Error::SingularReduction)?;
        if k.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::SingularReduction);
        }
        Ok(DynamicNetwork {
            case: case.clone(),
            stage: adm.stage,
            in_service: adm.in_service.clone(),
            lu,
            k,
            gen_rows,
            load_rows,
            load_y,
            load_s,
            is_power,
            hysteresis,
        })
    }

    pub fn has_power_loads(&self) -> bool {
        self.is_power.iter().any(|&p| p)
    }

    pub fn initial_modes(&self) -> LoadModes {
        vec![false; self.case.loads.len()]
    }

    pub fn emf(&self, emf_mag: &[f64], delta: &[f64]) -> Vec<Complex64> {
        emf_mag.iter().zip(delta).map(|(&m, &d)| Complex64::from_polar(m, d)).collect()
    }

    /// Solve bus voltages for the given internal EMFs, updating the load modes
    /// (constant power <-> converted impedance) with hysteresis.
    pub fn solve(&self, emf: &[Complex64], modes: &LoadModes) -> Result<NetworkSolution> {
        let e = DVector::from_column_slice(emf);
        let v0 = &self.k * &e;
        let mut modes = modes.clone();
        if !self.has_power_loads() {
            let v: Vec<Complex64> = v0.iter().copied().collect();
            let p_load = self.load_powers(&v, &modes);
            return Ok(NetworkSolution { v, p_load, modes, iterations: 1 });
        }

        let mut total_iter = 0;
        for _pass in 0..(2 * self.case.loads.len() + 4) {
            let (v, iters, converged) = self.fixed_point(&v0, &mut modes);
            total_iter += iters;
            if !converged {
                let buses = self
                    .case
                    .loads
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| self.is_power[*k] && !modes[*k])
                    .map(|(_, l)| l.bus)
                    .collect();
                return Err(Error::NetworkSolveDiverged { buses });
            }
            let mut changed = false;
            for k in 0..self.case.loads.len() {
                if !self.is_power[k] {
                    continue;
                }
                let vm = v[self.load_rows[k]].norm();
                let vth = self.case.loads[k].v_threshold;
                if !modes[k] && vm < vth {
                    modes[k] = true;
                    changed = true;
                } else if modes[k] && vm > vth + self.hysteresis {
                    modes[k] = false;
                    changed = true;
                }
            }
            if !changed {
                let p_load = self.load_powers(&v, &modes);
                return Ok(NetworkSolution { v, p_load, modes, iterations: total_iter });
            }
        }
        Err(Error::NetworkSolveDiverged { buses: self.case.loads.iter().map(|l| l.bus).collect() })
    }

    fn fixed_point(&self, v0: &DVector<Complex64>, modes: &mut LoadModes) -> (Vec<Complex64>, usize, bool) {
        let n = v0.len();
        let mut v = v0.clone();
        for it in 1..=NETWORK_MAX_ITER {
            let mut inj = DVector::<Complex64>::zeros(n);
            for k in 0..self.load_rows.len() {
                if !self.is_power[k] {
                    continue;
                }
                let r = self.load_rows[k];
                let vth = self.case.loads[k].v_threshold;
                if !modes[k] && v[r].norm() < vth {
                    modes[k] = true;
                }
                inj[r] -= if modes[k] { self.load_y[k] * v[r] } else { (self.load_s[k] / v[r]).conj() };
            }
            let corr = self.lu.solve(&inj).unwrap_or_else(|| DVector::zeros(n));
            let next = v0 + corr;
            let delta = (&next - &v).camax();
            v = next;
            if delta < NETWORK_TOL * (1.0 + v.camax()) {
                return (v.iter().copied().collect(), it, true);
            }
            if !delta.is_finite() {
                break;
            }
        }
        (v.iter().copied().collect(), NETWORK_MAX_ITER, false)
    }

    fn load_powers(&self, v: &[Complex64], modes: &LoadModes) -> Vec<f64> {
        (0..self.load_rows.len())
            .map(|k| {
                let vr = v[self.load_rows[k]];
                if self.is_power[k] && !modes[k] {
                    self.load_s[k].re
                } else {
                    self.load_y[k].re * vr.norm_sqr()
                }
            })
            .collect()
    }

    /// Electrical power of each generator through its transient reactance.
    pub fn gen_powers(&self, emf: &[Complex64], v: &[Complex64]) -> Vec<f64> {
        self.case
            .generators
            .iter()
            .zip(emf)
            .zip(&self.gen_rows)
            .map(|((g, e), &r)| {
                let i = (e - v[r]) / Complex64::new(0.0, g.xd_prime);
                (e * i.conj()).re
            })
            .collect()
    }

    pub fn elements(&self, emf: &[Complex64], sol: &NetworkSolution) -> ElementPowers {
        evaluate_elements(&self.case, &self.in_service, &sol.v, emf, sol.p_load.clone())
    }

    pub fn gen_rows(&self) -> &[usize] {
        &self.gen_rows
    }
}

/// Network solve from rotor angles: returns bus voltages and all element powers.
pub fn network_solve(
    net: &DynamicNetwork,
    emf_mag: &[f64],
    delta: &[f64],
    modes: &LoadModes,
) -> Result<(NetworkSolution, ElementPowers)> {
    let emf = net.emf(emf_mag, delta);
    let sol = net.solve(&emf, modes)?;
    let el = net.elements(&emf, &sol);
    Ok((sol, el))
}
