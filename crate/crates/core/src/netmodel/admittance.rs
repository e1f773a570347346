use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::error::{Error, Result};

/// Default shunt admittance used to model a bolted three-phase bus fault.
pub const FAULT_ADMITTANCE: f64 = 1e7;

/// Unordered reference to a branch by its end buses, serialized as `[k, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BranchRef(pub usize, pub usize);

impl std::fmt::Display for BranchRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    PreFault,
    OnFault,
    PostFault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultLocation {
    Bus(usize),
    /// Fault at the `from` terminal of the branch; the branch is tripped on clearing.
    Branch(BranchRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub location: FaultLocation,
    #[serde(default = "default_fault_admittance")]
    pub admittance: f64,
    /// Branches removed at fault clearing.
    #[serde(default)]
    pub trip: Vec<BranchRef>,
}

fn default_fault_admittance() -> f64 {
    FAULT_ADMITTANCE
}

impl FaultSpec {
    pub fn bus(bus: usize) -> Self {
        FaultSpec { location: FaultLocation::Bus(bus), admittance: FAULT_ADMITTANCE, trip: vec![] }
    }

    pub fn faulted_bus(&self) -> usize {
        match self.location {
            FaultLocation::Bus(b) => b,
            FaultLocation::Branch(BranchRef(from, _)) => from,
        }
    }

    pub fn tripped(&self) -> Vec<BranchRef> {
        let mut t = self.trip.clone();
        if let FaultLocation::Branch(br) = self.location {
            if !t.iter().any(|x| BranchRef::same(x, &br)) {
                t.push(br);
            }
        }
        t
    }
}

impl BranchRef {
    pub fn same(a: &BranchRef, b: &BranchRef) -> bool {
        (a.0 == b.0 && a.1 == b.1) || (a.0 == b.1 && a.1 == b.0)
    }
}

/// Bus admittance matrix for one topology stage.
#[derive(Debug, Clone)]
pub struct AdmittanceSystem {
    pub y: DMatrix<Complex64>,
    pub stage: Stage,
    /// bus id -> row
    pub index: BTreeMap<usize, usize>,
    /// Positions (into `case.branches`) of branches in service at this stage.
    pub in_service: Vec<bool>,
    /// Shunt added at a faulted bus row, if any.
    pub fault_shunt: Option<(usize, Complex64)>,
}

impl AdmittanceSystem {
    pub fn n(&self) -> usize {
        self.y.nrows()
    }
}

/// Assemble the bus admittance matrix for `stage`.
///
/// The on-fault stage adds the fault admittance at the faulted bus; the
/// post-fault stage removes the branches tripped by the fault.
pub fn build_admittance(case: &NetworkCase, stage: Stage, fault: Option<&FaultSpec>) -> Result<AdmittanceSystem> {
    let index = case.bus_index();
    let n = case.buses.len();
    let mut in_service = vec![true; case.branches.len()];
    if let Some(f) = fault {
        let fb = f.faulted_bus();
        if !index.contains_key(&fb) {
            return Err(Error::UnknownBus(fb));
        }
        let tripped = f.tripped();
        for br in &tripped {
            let pos = case.branch_pos(br.0, br.1)?;
            if stage == Stage::PostFault {
                in_service[pos] = false;
            }
        }
    }

    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for (i, bus) in case.buses.iter().enumerate() {
        y[(i, i)] += Complex64::new(bus.gs, bus.bs);
    }
    for (pos, br) in case.branches.iter().enumerate() {
        if !in_service[pos] {
            continue;
        }
        let f = index[&br.from];
        let t = index[&br.to];
        let (yff, yft, ytf, ytt) = br.two_port();
        y[(f, f)] += yff;
        y[(f, t)] += yft;
        y[(t, f)] += ytf;
        y[(t, t)] += ytt;
    }

    let mut fault_shunt = None;
    if stage == Stage::OnFault {
        if let Some(f) = fault {
            let row = index[&f.faulted_bus()];
            let ys = Complex64::new(f.admittance, 0.0);
            y[(row, row)] += ys;
            fault_shunt = Some((row, ys));
        }
    }

    check_generator_islands(case, &index, &in_service)?;

    Ok(AdmittanceSystem { y, stage, index, in_service, fault_shunt })
}

fn check_generator_islands(case: &NetworkCase, index: &BTreeMap<usize, usize>, in_service: &[bool]) -> Result<()> {
    let n = case.buses.len();
    let mut adj = vec![Vec::new(); n];
    for (pos, br) in case.branches.iter().enumerate() {
        if in_service[pos] {
            let (f, t) = (index[&br.from], index[&br.to]);
            adj[f].push(t);
            adj[t].push(f);
        }
    }
    let start = index[&case.generators[0].bus];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let islanded: Vec<usize> = case.generators.iter().map(|g| g.bus).filter(|b| !seen[index[b]]).collect();
    if islanded.is_empty() {
        Ok(())
    } else {
        Err(Error::IslandedGenerator(islanded))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{Branch, Bus, Generator, NetworkCase};

    fn two_bus() -> NetworkCase {
        NetworkCase {
            name: "two-bus".into(),
            base_mva: 100.0,
            buses: vec![Bus { id: 1, gs: 0.0, bs: 0.0 }, Bus { id: 2, gs: 0.0, bs: 0.0 }],
            branches: vec![Branch { from: 1, to: 2, r: 0.0, x: 0.5, b: 0.0, tap: 1.0 }],
            generators: vec![
                Generator { bus: 1, inertia: 0.1, xd_prime: 0.1, p_mech: 0.0, v_set: 1.0, damping: 0.0 },
                Generator { bus: 2, inertia: 0.1, xd_prime: 0.1, p_mech: 0.0, v_set: 1.0, damping: 0.0 },
            ],
            loads: vec![],
        }
    }

    #[test]
    fn single_line_stamp() {
        let y = build_admittance(&two_bus(), Stage::PreFault, None).unwrap();
        let j2 = Complex64::new(0.0, 2.0);
        assert!((y.y[(0, 0)] + j2).norm() < 1e-15);
        assert!((y.y[(0, 1)] - j2).norm() < 1e-15);
        assert!((y.y[(1, 0)] - j2).norm() < 1e-15);
        assert!((y.y[(1, 1)] + j2).norm() < 1e-15);
    }

    #[test]
    fn on_fault_adds_shunt() {
        let case = two_bus();
        let f = FaultSpec::bus(1);
        let pre = build_admittance(&case, Stage::PreFault, Some(&f)).unwrap();
        let on = build_admittance(&case, Stage::OnFault, Some(&f)).unwrap();
        let d = on.y[(0, 0)] - pre.y[(0, 0)];
        assert!((d - Complex64::new(1e7, 0.0)).norm() < 1e-6);
        assert_eq!(on.y[(1, 1)], pre.y[(1, 1)]);
    }

    #[test]
    fn unknown_fault_bus() {
        let f = FaultSpec::bus(9);
        assert!(matches!(build_admittance(&two_bus(), Stage::OnFault, Some(&f)), Err(Error::UnknownBus(9))));
    }

    #[test]
    fn tripping_only_line_islands_a_generator() {
        let f = FaultSpec { location: FaultLocation::Branch(BranchRef(1, 2)), admittance: 1e7, trip: vec![] };
        assert!(build_admittance(&two_bus(), Stage::OnFault, Some(&f)).is_ok());
        assert!(matches!(
            build_admittance(&two_bus(), Stage::PostFault, Some(&f)),
            Err(Error::IslandedGenerator(_))
        ));
    }
}
