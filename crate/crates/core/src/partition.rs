//! Generator clusters and the cutsets separating them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::error::{Error, Result};
use crate::netmodel::admittance::BranchRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    S,
    A,
}

/// Leading cluster `S` and lagging cluster `A`, with every bus assigned a side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    /// Generator bus ids of the leading cluster.
    pub s: Vec<usize>,
    /// Generator bus ids of the lagging cluster.
    pub a: Vec<usize>,
    /// bus id -> side
    pub bus_side: BTreeMap<usize, Side>,
    pub m_s: f64,
    pub m_a: f64,
}

/// Directed cutset lines, each oriented from its `S`-side bus to its `A`-side bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutset {
    pub lines: Vec<BranchRef>,
}

impl ClusterPartition {
    pub fn m_t(&self) -> f64 {
        self.m_s + self.m_a
    }

    pub fn side_of_bus(&self, bus: usize) -> Option<Side> {
        self.bus_side.get(&bus).copied()
    }

    /// Generator positions (into `case.generators`) of the given cluster.
    pub fn gen_positions(&self, case: &NetworkCase, side: Side) -> Vec<usize> {
        let set: BTreeSet<usize> = match side {
            Side::S => self.s.iter().copied().collect(),
            Side::A => self.a.iter().copied().collect(),
        };
        case.generators.iter().enumerate().filter(|(_, g)| set.contains(&g.bus)).map(|(i, _)| i).collect()
    }

    /// Inertia-weighted cluster means of a per-generator quantity.
    pub fn cluster_means(&self, case: &NetworkCase, x: &[f64]) -> (f64, f64) {
        let mut s = 0.0;
        let mut a = 0.0;
        let sset: BTreeSet<usize> = self.s.iter().copied().collect();
        for (g, xi) in case.generators.iter().zip(x) {
            if sset.contains(&g.bus) {
                s += g.inertia * xi;
            } else {
                a += g.inertia * xi;
            }
        }
        (s / self.m_s, a / self.m_a)
    }

    /// Load positions (into `case.loads`) on the given side.
    pub fn load_positions(&self, case: &NetworkCase, side: Side) -> Vec<usize> {
        case.loads
            .iter()
            .enumerate()
            .filter(|(_, l)| self.bus_side.get(&l.bus) == Some(&side))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Build the partition induced by removing `lines` from the in-service network.
///
/// Buses reachable from the `s_gens` once the cutset is removed form the `S`
/// side; all other buses form the `A` side. Fails with `NotASeparator` if any
/// `A` generator is still reachable from `S`, or a listed line does not cross
/// between the two sides.
pub fn split_by_cutset(
    case: &NetworkCase,
    in_service: &[bool],
    s_gens: &[usize],
    lines: &[BranchRef],
) -> Result<(ClusterPartition, Cutset)> {
    let sset: BTreeSet<usize> = s_gens.iter().copied().collect();
    for &b in &sset {
        case.gen_pos(b).map_err(|_| Error::InvalidPartition(format!("bus {b} has no generator")))?;
    }
    let a_gens: Vec<usize> = case.generators.iter().map(|g| g.bus).filter(|b| !sset.contains(b)).collect();
    if sset.is_empty() || a_gens.is_empty() {
        return Err(Error::InvalidPartition("both clusters need at least one generator".into()));
    }
    let mut cut_pos = BTreeSet::new();
    for br in lines {
        let pos = case.branch_pos(br.0, br.1)?;
        if !in_service[pos] {
            return Err(Error::NotASeparator(format!("line {br} is out of service")));
        }
        cut_pos.insert(pos);
    }

    let index = case.bus_index();
    let n = case.buses.len();
    let mut adj = vec![Vec::new(); n];
    for (pos, br) in case.branches.iter().enumerate() {
        if in_service[pos] && !cut_pos.contains(&pos) {
            let (f, t) = (index[&br.from], index[&br.to]);
            adj[f].push(t);
            adj[t].push(f);
        }
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = sset.iter().map(|b| index[b]).collect();
    for &q in &queue {
        seen[q] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let leaked: Vec<usize> = a_gens.iter().copied().filter(|b| seen[index[b]]).collect();
    if !leaked.is_empty() {
        return Err(Error::NotASeparator(format!(
            "generators {leaked:?} remain connected to the leading cluster"
        )));
    }
    let bus_side: BTreeMap<usize, Side> =
        case.buses.iter().enumerate().map(|(i, b)| (b.id, if seen[i] { Side::S } else { Side::A })).collect();

    let mut directed = Vec::with_capacity(lines.len());
    for br in lines {
        match (bus_side[&br.0], bus_side[&br.1]) {
            (Side::S, Side::A) => directed.push(BranchRef(br.0, br.1)),
            (Side::A, Side::S) => directed.push(BranchRef(br.1, br.0)),
            _ => return Err(Error::NotASeparator(format!("line {br} does not cross between the clusters"))),
        }
    }

    let m_s = case.generators.iter().filter(|g| sset.contains(&g.bus)).map(|g| g.inertia).sum();
    let m_a = case.generators.iter().filter(|g| !sset.contains(&g.bus)).map(|g| g.inertia).sum();
    Ok((
        ClusterPartition { s: sset.into_iter().collect(), a: a_gens, bus_side, m_s, m_a },
        Cutset { lines: directed },
    ))
}

/// Partition assigning generators only; the bus map is left empty.
pub fn generator_partition(case: &NetworkCase, s_gens: &[usize]) -> Result<ClusterPartition> {
    let sset: BTreeSet<usize> = s_gens.iter().copied().collect();
    for &b in &sset {
        case.gen_pos(b).map_err(|_| Error::InvalidPartition(format!("bus {b} has no generator")))?;
    }
    let a: Vec<usize> = case.generators.iter().map(|g| g.bus).filter(|b| !sset.contains(b)).collect();
    if sset.is_empty() || a.is_empty() {
        return Err(Error::InvalidPartition("both clusters need at least one generator".into()));
    }
    let m_s = case.generators.iter().filter(|g| sset.contains(&g.bus)).map(|g| g.inertia).sum();
    let m_a = case.generators.iter().filter(|g| !sset.contains(&g.bus)).map(|g| g.inertia).sum();
    Ok(ClusterPartition { s: sset.into_iter().collect(), a, bus_side: BTreeMap::new(), m_s, m_a })
}

impl Cutset {
    /// Positions of the cutset lines in `case.branches` with a flag that is
    /// `true` when the stored branch orientation matches the `S -> A` direction.
    pub fn positions(&self, case: &NetworkCase) -> Result<Vec<(usize, bool)>> {
        self.lines
            .iter()
            .map(|br| {
                let pos = case.branch_pos(br.0, br.1)?;
                Ok((pos, case.branches[pos].from == br.0))
            })
            .collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.lines.iter().map(|b| b.to_string()).collect()
    }
}
