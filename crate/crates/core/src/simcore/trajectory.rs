//! Recorded simulation output and its CSV form.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::error::{Error, Result};
use crate::netmodel::admittance::Stage;
use crate::netmodel::elements::{evaluate_elements, ElementPowers};
use crate::netmodel::steady::{solve_operating_point, solve_steady_state, OperatingPoint, SteadyBaseline};
use crate::simcore::scenario::Scenario;
use crate::simcore::{LoadModes, StageNetworks};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub stage: Stage,
    pub delta: Vec<f64>,
    pub omega: Vec<f64>,
    pub v: Vec<Complex64>,
    pub elements: ElementPowers,
    pub modes: LoadModes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Termination {
    Completed,
    RotorRunaway { t: f64 },
}

/// Network element whose power and angle are recorded per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementId {
    /// Generator reactance, by generator position.
    Gen(usize),
    /// Branch seen from its `from` end, by branch position.
    Branch(usize),
    /// Load, by load position.
    Load(usize),
    /// Bus shunt conductance, by bus position.
    Shunt(usize),
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub case: NetworkCase,
    /// Hash of the case the scenario was applied to.
    pub case_hash: String,
    pub scenario: Scenario,
    pub operating_point: OperatingPoint,
    pub baseline: Option<SteadyBaseline>,
    pub sep_error: Option<String>,
    pub samples: Vec<Sample>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub case_hash: String,
    pub scenario: Scenario,
    pub integrator: String,
    pub dt: f64,
    pub samples: usize,
    pub fault_on: f64,
    pub fault_cleared: f64,
    pub termination: Termination,
    pub baseline_found: bool,
    pub sep_error: Option<String>,
    pub pf_iterations: usize,
    pub pf_mismatch: f64,
}

/// Unwrap a sequence of principal angles by accumulating principal increments.
pub fn unwrap_angles(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = match x.first() {
        Some(&a) => a,
        None => return out,
    };
    out.push(acc);
    for w in x.windows(2) {
        let d = w[1] - w[0];
        acc += d - (2.0 * std::f64::consts::PI) * (d / (2.0 * std::f64::consts::PI)).round();
        out.push(acc);
    }
    out
}

impl Trajectory {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        case: NetworkCase,
        case_hash: String,
        scenario: Scenario,
        operating_point: OperatingPoint,
        baseline: Option<SteadyBaseline>,
        sep_error: Option<String>,
        samples: Vec<Sample>,
        termination: Termination,
    ) -> Self {
        Trajectory { case, case_hash, scenario, operating_point, baseline, sep_error, samples, termination }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.scenario.dt
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Index of the first post-fault sample (the fault-clearing instant).
    pub fn clearing_index(&self) -> usize {
        self.scenario.step_grid().1.min(self.samples.len().saturating_sub(1))
    }

    pub fn baseline(&self) -> Result<&SteadyBaseline> {
        self.baseline.as_ref().ok_or(Error::NoBaseline)
    }

    pub fn elements(&self) -> Vec<ElementId> {
        let mut ids = Vec::new();
        ids.extend((0..self.case.generators.len()).map(ElementId::Gen));
        ids.extend((0..self.case.branches.len()).map(ElementId::Branch));
        ids.extend((0..self.case.loads.len()).map(ElementId::Load));
        ids.extend((0..self.case.buses.len()).map(ElementId::Shunt));
        ids
    }

    pub fn series_elements(&self) -> Vec<ElementId> {
        (0..self.case.branches.len()).map(ElementId::Branch).collect()
    }

    pub fn element_name(&self, id: ElementId) -> String {
        match id {
            ElementId::Gen(g) => format!("gen_{}", self.case.generators[g].bus),
            ElementId::Branch(b) => format!("line_{}", self.case.branches[b].name()),
            ElementId::Load(l) => format!("load_{}", self.case.loads[l].bus),
            ElementId::Shunt(b) => format!("shunt_{}", self.case.buses[b].id),
        }
    }

    pub fn element_power(el: &ElementPowers, id: ElementId) -> (f64, f64) {
        match id {
            ElementId::Gen(g) => (el.p_gen[g], el.sigma_gen[g]),
            ElementId::Branch(b) => (el.p_fwd[b], el.sigma_branch[b]),
            ElementId::Load(l) => (el.p_load[l], el.sigma_load[l]),
            ElementId::Shunt(b) => (el.p_shunt[b], el.sigma_bus[b]),
        }
    }

    /// Power and unwrapped angle series of one element.
    pub fn element_series(&self, id: ElementId) -> (Vec<f64>, Vec<f64>) {
        let (p, s): (Vec<f64>, Vec<f64>) =
            self.samples.iter().map(|smp| Self::element_power(&smp.elements, id)).unzip();
        (p, unwrap_angles(&s))
    }

    /// Active power of branch `pos` leaving bus `from_bus`.
    pub fn branch_power_from(&self, pos: usize, from_bus: usize) -> Vec<f64> {
        let forward = self.case.branches[pos].from == from_bus;
        self.samples
            .iter()
            .map(|s| if forward { s.elements.p_fwd[pos] } else { s.elements.p_rev[pos] })
            .collect()
    }

    /// Step index at which the sequence first exceeds `max_abs` in absolute value.
    pub fn first_index_where(&self, f: impl FnMut(&Sample) -> bool) -> Option<usize> {
        self.samples.iter().position(f)
    }

    pub fn meta(&self) -> TrajectoryMeta {
        let (on, off, _) = self.scenario.step_grid();
        TrajectoryMeta {
            case_hash: self.case_hash.clone(),
            scenario: self.scenario.clone(),
            integrator: "rk4-fixed".into(),
            dt: self.scenario.dt,
            samples: self.samples.len(),
            fault_on: on as f64 * self.scenario.dt,
            fault_cleared: off as f64 * self.scenario.dt,
            termination: self.termination,
            baseline_found: self.baseline.is_some(),
            sep_error: self.sep_error.clone(),
            pf_iterations: self.operating_point.pf_iterations,
            pf_mismatch: self.operating_point.pf_mismatch,
        }
    }

    pub fn csv_header(&self) -> Vec<String> {
        let c = &self.case;
        let mut h = vec!["t".to_string()];
        h.extend(c.generators.iter().map(|g| format!("delta_{}", g.bus)));
        h.extend(c.generators.iter().map(|g| format!("omega_{}", g.bus)));
        h.extend(c.buses.iter().map(|b| format!("vmag_{}", b.id)));
        h.extend(c.buses.iter().map(|b| format!("vang_{}", b.id)));
        for br in &c.branches {
            h.push(format!("p_{}_fwd", br.name()));
            h.push(format!("p_{}_rev", br.name()));
        }
        h.extend(c.loads.iter().map(|l| format!("pload_{}", l.bus)));
        h
    }

    /// CSV with one row per sample. Numbers use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header().join(",");
        out.push('\n');
        for s in &self.samples {
            let mut row = String::new();
            let mut put = |x: f64| {
                if !row.is_empty() {
                    row.push(',');
                }
                write!(row, "{x}").expect("write to string");
            };
            put(s.t);
            s.delta.iter().for_each(|&x| put(x));
            s.omega.iter().for_each(|&x| put(x));
            s.v.iter().for_each(|x| put(x.norm()));
            s.v.iter().for_each(|x| put(x.arg()));
            for (f, r) in s.elements.p_fwd.iter().zip(&s.elements.p_rev) {
                put(*f);
                put(*r);
            }
            s.elements.p_load.iter().for_each(|&x| put(x));
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// Rebuild a trajectory from its CSV form.
    ///
    /// The operating point and post-fault baseline are recomputed from the
    /// case and scenario; element angles are re-derived from the recorded
    /// bus voltages and rotor angles.
    pub fn from_csv(text: &str, case: &NetworkCase, scn: &Scenario) -> Result<Self> {
        let case_hash = case.hash();
        let eff = scn.apply(case)?;
        let op = solve_operating_point(&eff, scn.slack_bus)?;
        let nets = StageNetworks::build(&op, scn)?;
        let (baseline, sep_error) = match solve_steady_state(&op, &nets.post) {
            Ok(b) => (Some(b), None),
            Err(Error::NoPostFaultSEP(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        };

        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::MalformedTrajectory("empty file".into()))?.split(',').collect();
        let dummy = Trajectory::new(
            eff.clone(),
            case_hash.clone(),
            scn.clone(),
            op.clone(),
            None,
            None,
            vec![],
            Termination::Completed,
        );
        let expected = dummy.csv_header();
        if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a.trim() != b) {
            return Err(Error::MalformedTrajectory("header does not match the case".into()));
        }
        let (m, n, nb, nl) = (eff.generators.len(), eff.buses.len(), eff.branches.len(), eff.loads.len());
        let (k_on, k_off, _) = scn.step_grid();
        let mut samples = Vec::new();
        for (row_no, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedTrajectory(format!("row {}: {e}", row_no + 2)))?;
            if vals.len() != expected.len() {
                return Err(Error::MalformedTrajectory(format!("row {} has {} fields", row_no + 2, vals.len())));
            }
            let mut it = vals.into_iter();
            let mut take = |k: usize| -> Vec<f64> { it.by_ref().take(k).collect() };
            let t = take(1)[0];
            let delta = take(m);
            let omega = take(m);
            let vmag = take(n);
            let vang = take(n);
            let pbr = take(2 * nb);
            let p_load = take(nl);
            let v: Vec<Complex64> = vmag.iter().zip(&vang).map(|(&a, &b)| Complex64::from_polar(a, b)).collect();
            let k = samples.len();
            let stage = if k < k_on {
                Stage::PreFault
            } else if k < k_off {
                Stage::OnFault
            } else {
                Stage::PostFault
            };
            let net = nets.get(stage);
            let emf = net.emf(&op.emf_mag, &delta);
            let mut elements = evaluate_elements(&eff, &net.in_service, &v, &emf, p_load);
            for b in 0..nb {
                elements.p_fwd[b] = pbr[2 * b];
                elements.p_rev[b] = pbr[2 * b + 1];
            }
            samples.push(Sample { t, stage, delta, omega, v, elements, modes: vec![false; nl] });
        }
        if samples.is_empty() {
            return Err(Error::MalformedTrajectory("no samples".into()));
        }
        let full = scn.step_grid().2 + 1;
        let termination = if samples.len() < full {
            Termination::RotorRunaway { t: samples.last().map(|s| s.t).unwrap_or(0.0) }
        } else {
            Termination::Completed
        };
        Ok(Trajectory::new(eff, case_hash, scn.clone(), op, baseline, sep_error, samples, termination))
    }
}
