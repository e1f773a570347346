//! Structure-preserving energy along a trajectory and its two-machine
//! relative decomposition.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{ClusterPartition, Cutset, Side};
use crate::simcore::trajectory::{ElementId, Trajectory};

/// Speed threshold separating a boundary crossing from a turning point [rad/s].
pub const OMEGA_EPS: f64 = 1e-3;

/// Trapezoidal running integral of `y dx`, zero at `start`, zero before it.
pub fn cumulative_trapezoid(y: &[f64], x: &[f64], start: usize) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    for k in start + 1..y.len() {
        out[k] = out[k - 1] + 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
    }
    out
}

/// Line potential energy of one element: trapezoidal integral of
/// `(P - P^s) d(sigma)` along the unwrapped angle, from the first sample.
pub fn element_lpe(traj: &Trajectory, id: ElementId) -> Result<Vec<f64>> {
    let base = traj.baseline()?;
    let (ps, _) = Trajectory::element_power(&base.elements, id);
    let (p, sigma) = traj.element_series(id);
    let dev: Vec<f64> = p.iter().map(|x| x - ps).collect();
    Ok(cumulative_trapezoid(&dev, &sigma, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub t: Vec<f64>,
    pub v_ke: Vec<f64>,
    pub v_pe: Vec<f64>,
    pub elements: Vec<(ElementId, Vec<f64>)>,
}

impl EnergyTrace {
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut s = String::from("t,v_ke,v_pe");
        for n in names {
            write!(s, ",lpe_{n}").expect("write to string");
        }
        s.push('\n');
        for k in 0..self.t.len() {
            write!(s, "{},{},{}", self.t[k], self.v_ke[k], self.v_pe[k]).expect("write to string");
            for (_, e) in &self.elements {
                write!(s, ",{}", e[k]).expect("write to string");
            }
            s.push('\n');
        }
        s
    }
}

/// Kinetic energy in the COI frame and the potential energy summed over
/// every element (generator reactances, branches, loads, bus shunts).
pub fn total_energy(traj: &Trajectory) -> Result<EnergyTrace> {
    let n = traj.len();
    let v_ke = traj
        .samples
        .iter()
        .map(|s| 0.5 * traj.case.generators.iter().zip(&s.omega).map(|(g, w)| g.inertia * w * w).sum::<f64>())
        .collect();
    let mut v_pe = vec![0.0; n];
    let mut elements = Vec::new();
    for id in traj.elements() {
        let lpe = element_lpe(traj, id)?;
        for (acc, x) in v_pe.iter_mut().zip(&lpe) {
            *acc += x;
        }
        elements.push((id, lpe));
    }
    Ok(EnergyTrace { t: traj.times(), v_ke, v_pe, elements })
}

/// LPE of the series elements: generator reactances and branches.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesLpe {
    pub t: Vec<f64>,
    pub total: Vec<f64>,
    pub elements: Vec<(ElementId, Vec<f64>)>,
}

pub fn series_lpe(traj: &Trajectory) -> Result<SeriesLpe> {
    let mut total = vec![0.0; traj.len()];
    let mut elements = Vec::new();
    let ids = (0..traj.case.generators.len()).map(ElementId::Gen).chain(traj.series_elements());
    for id in ids {
        let lpe = element_lpe(traj, id)?;
        for (acc, x) in total.iter_mut().zip(&lpe) {
            *acc += x;
        }
        elements.push((id, lpe));
    }
    Ok(SeriesLpe { t: traj.times(), total, elements })
}

impl SeriesLpe {
    /// Summed LPE of a set of branches.
    pub fn branches(&self, positions: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.t.len()];
        for (id, e) in &self.elements {
            if let ElementId::Branch(b) = id {
                if positions.contains(b) {
                    for (o, x) in out.iter_mut().zip(e) {
                        *o += x;
                    }
                }
            }
        }
        out
    }

    /// Index of the largest total LPE within `window`.
    pub fn peak_index(&self, window: std::ops::Range<usize>) -> Option<usize> {
        window.filter(|&k| k < self.total.len()).max_by(|&a, &b| self.total[a].total_cmp(&self.total[b]))
    }

    /// Fraction of the total carried by `positions` at sample `k`.
    pub fn share_at(&self, positions: &[usize], k: usize) -> f64 {
        let total = self.total[k];
        if total.abs() > 0.0 {
            self.branches(positions)[k] / total
        } else {
            0.0
        }
    }
}

/// Relative speed `omega_2 = omega_S - omega_A` and the relative kinetic energy.
pub fn relative_kinetic(traj: &Trajectory, part: &ClusterPartition) -> Result<(Vec<f64>, Vec<f64>)> {
    if part.s.is_empty() || part.a.is_empty() || !(part.m_s > 0.0) || !(part.m_a > 0.0) {
        return Err(Error::InvalidPartition("empty cluster".into()));
    }
    let m_eq = part.m_s * part.m_a / part.m_t();
    let w2: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| {
            let (ws, wa) = part.cluster_means(&traj.case, &s.omega);
            ws - wa
        })
        .collect();
    let ke = w2.iter().map(|w| 0.5 * m_eq * w * w).collect();
    Ok((w2, ke))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoMachineTrace {
    pub t: Vec<f64>,
    /// Index of the fault-clearing sample, where the energies start.
    pub t0_index: usize,
    pub m_s: f64,
    pub m_a: f64,
    pub omega2: Vec<f64>,
    /// `(delta_S - delta_S^s) - (delta_A - delta_A^s)`.
    pub delta: Vec<f64>,
    /// `delta_S - delta_A` without the steady offset.
    pub delta_sa: Vec<f64>,
    pub dp_c: Vec<f64>,
    pub dp_ls: Vec<f64>,
    pub dp_la: Vec<f64>,
    pub dp_l2: Vec<f64>,
    pub dp_loss2: Vec<f64>,
    pub dp_closs: Vec<f64>,
    /// Load deviations per monitored bus, keyed by load position.
    pub dp_load: Vec<(usize, Vec<f64>)>,
    pub v_ke2: Vec<f64>,
    pub v_pec2: Vec<f64>,
    pub v_pel2: Vec<f64>,
    pub v_peloss2: Vec<f64>,
    pub v_pe2: Vec<f64>,
    /// `V_KE2(t) - V_KE2(t0) + V_PE2(t)`.
    pub residual: Vec<f64>,
}

impl TwoMachineTrace {
    /// `Delta P_L2 + Delta P_C` per sample.
    pub fn combined(&self) -> Vec<f64> {
        self.dp_l2.iter().zip(&self.dp_c).map(|(a, b)| a + b).collect()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Samples from `t0` up to (excluding) the first index where `delta_sa`
    /// exceeds pi, or to the end.
    pub fn first_slip_index(&self) -> Option<usize> {
        (self.t0_index..self.len()).find(|&k| self.delta_sa[k] > std::f64::consts::PI)
    }

    pub const CSV_HEADER: &'static str = "t,omega2,delta,dp_c,dp_ls,dp_la,dp_l2,dp_loss2,dp_closs,v_ke2,v_pec2,v_pel2,v_peloss2,v_pe2,residual";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for k in 0..self.len() {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.t[k],
                self.omega2[k],
                self.delta[k],
                self.dp_c[k],
                self.dp_ls[k],
                self.dp_la[k],
                self.dp_l2[k],
                self.dp_loss2[k],
                self.dp_closs[k],
                self.v_ke2[k],
                self.v_pec2[k],
                self.v_pel2[k],
                self.v_peloss2[k],
                self.v_pe2[k],
                self.residual[k]
            )
            .expect("write to string");
        }
        s
    }
}

/// Decompose the post-fault motion into the relative two-machine form.
///
/// With `M_eq = M_S M_A / M_T`, the relative swing equation reads
/// `M_eq d(omega_2)/dt = -(dP_C + dP_L2 + dP_loss2 + dP_Closs)`, which holds
/// exactly given bus-wise power balance on each side of the cutset. Each term
/// times `omega_2` is integrated from the fault-clearing sample.
pub fn two_machine_decompose(traj: &Trajectory, part: &ClusterPartition, cut: &Cutset) -> Result<TwoMachineTrace> {
    let base = traj.baseline()?;
    let case = &traj.case;
    let n = traj.len();
    if part.bus_side.len() != case.buses.len() {
        return Err(Error::InvalidPartition("partition carries no bus assignment".into()));
    }
    let cut_pos = cut.positions(case)?;
    for br in &cut.lines {
        if part.side_of_bus(br.0) != Some(Side::S) || part.side_of_bus(br.1) != Some(Side::A) {
            return Err(Error::NotASeparator(format!("line {br} does not run from S to A")));
        }
    }
    let cut_set: BTreeSet<usize> = cut_pos.iter().map(|(p, _)| *p).collect();
    let tripped: Vec<usize> =
        traj.scenario.fault.tripped().iter().filter_map(|b| case.branch_pos(b.0, b.1).ok()).collect();
    for (pos, br) in case.branches.iter().enumerate() {
        let crosses = part.side_of_bus(br.from) != part.side_of_bus(br.to);
        if crosses && !cut_set.contains(&pos) && !tripped.contains(&pos) {
            return Err(Error::NotASeparator(format!("branch {} crosses the partition but is not in the cutset", br.name())));
        }
    }

    let (m_s, m_a) = (part.m_s, part.m_a);
    let m_t = m_s + m_a;
    let (omega2, v_ke2) = relative_kinetic(traj, part)?;
    let (ds_s, da_s) = part.cluster_means(case, &base.delta);
    let mut delta = Vec::with_capacity(n);
    let mut delta_sa = Vec::with_capacity(n);
    for s in &traj.samples {
        let (ds, da) = part.cluster_means(case, &s.delta);
        delta.push((ds - ds_s) - (da - da_s));
        delta_sa.push(ds - da);
    }

    let s_loads = part.load_positions(case, Side::S);
    let a_loads = part.load_positions(case, Side::A);
    let sum_dev = |idx: &[usize], f: &dyn Fn(&crate::netmodel::ElementPowers, usize) -> f64| -> Vec<f64> {
        traj.samples
            .iter()
            .map(|s| idx.iter().map(|&i| f(&s.elements, i) - f(&base.elements, i)).sum())
            .collect()
    };
    let dp_ls = sum_dev(&s_loads, &|e, i| e.p_load[i]);
    let dp_la = sum_dev(&a_loads, &|e, i| e.p_load[i]);

    // Cutset flow S -> A and cutset losses.
    let flow = |e: &crate::netmodel::ElementPowers| -> f64 {
        cut_pos.iter().map(|&(p, fwd)| if fwd { e.p_fwd[p] } else { e.p_rev[p] }).sum()
    };
    let closs = |e: &crate::netmodel::ElementPowers| -> f64 { cut_pos.iter().map(|&(p, _)| e.p_fwd[p] + e.p_rev[p]).sum() };
    let (flow_s, closs_s) = (flow(&base.elements), closs(&base.elements));

    // Internal branch losses and bus shunts per side.
    let mut internal = [Vec::new(), Vec::new()];
    for (pos, br) in case.branches.iter().enumerate() {
        if cut_set.contains(&pos) {
            continue;
        }
        match part.side_of_bus(br.from) {
            Some(Side::S) => internal[0].push(pos),
            _ => internal[1].push(pos),
        }
    }
    let mut shunts = [Vec::new(), Vec::new()];
    for (i, b) in case.buses.iter().enumerate() {
        match part.side_of_bus(b.id) {
            Some(Side::S) => shunts[0].push(i),
            _ => shunts[1].push(i),
        }
    }
    let loss = |e: &crate::netmodel::ElementPowers, side: usize| -> f64 {
        internal[side].iter().map(|&p| e.p_fwd[p] + e.p_rev[p]).sum::<f64>()
            + shunts[side].iter().map(|&i| e.p_shunt[i]).sum::<f64>()
    };
    let (loss_s0, loss_a0) = (loss(&base.elements, 0), loss(&base.elements, 1));

    let mut dp_c = Vec::with_capacity(n);
    let mut dp_l2 = Vec::with_capacity(n);
    let mut dp_loss2 = Vec::with_capacity(n);
    let mut dp_closs = Vec::with_capacity(n);
    for (k, s) in traj.samples.iter().enumerate() {
        let e = &s.elements;
        dp_c.push(flow(e) - flow_s);
        dp_l2.push((m_a * dp_ls[k] - m_s * dp_la[k]) / m_t);
        dp_loss2.push((m_a * (loss(e, 0) - loss_s0) - m_s * (loss(e, 1) - loss_a0)) / m_t);
        dp_closs.push(-m_s / m_t * (closs(e) - closs_s));
    }

    let t = traj.times();
    let t0 = traj.clearing_index();
    let integrate = |x: &[f64]| -> Vec<f64> {
        let y: Vec<f64> = x.iter().zip(&omega2).map(|(a, w)| a * w).collect();
        cumulative_trapezoid(&y, &t, t0)
    };
    let v_pec2 = integrate(&dp_c);
    let v_pel2 = integrate(&dp_l2);
    let loss_total: Vec<f64> = dp_loss2.iter().zip(&dp_closs).map(|(a, b)| a + b).collect();
    let v_peloss2 = integrate(&loss_total);
    let v_pe2: Vec<f64> = (0..n).map(|k| v_pec2[k] + v_pel2[k] + v_peloss2[k]).collect();
    let residual = (0..n)
        .map(|k| if k < t0 { 0.0 } else { v_ke2[k] - v_ke2[t0] + v_pe2[k] })
        .collect();
    let dp_load = s_loads
        .iter()
        .map(|&i| (i, traj.samples.iter().map(|s| s.elements.p_load[i] - base.elements.p_load[i]).collect()))
        .collect();

    Ok(TwoMachineTrace {
        t,
        t0_index: t0,
        m_s,
        m_a,
        omega2,
        delta,
        delta_sa,
        dp_c,
        dp_ls,
        dp_la,
        dp_l2,
        dp_loss2,
        dp_closs,
        dp_load,
        v_ke2,
        v_pec2,
        v_pel2,
        v_peloss2,
        v_pe2,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PebsCrossing {
    pub t: f64,
    pub delta: f64,
    pub index: usize,
}

/// First maximum of `V_PE2` after fault clearing reached with `|omega_2| > OMEGA_EPS`.
///
/// The time is refined by a parabola through the three samples around the peak.
pub fn pebs_crossing(tm: &TwoMachineTrace) -> Option<PebsCrossing> {
    let v = &tm.v_pe2;
    let start = tm.t0_index + 1;
    for k in start..v.len().saturating_sub(1) {
        if v[k] > v[k - 1] && v[k] >= v[k + 1] {
            if tm.omega2[k].abs() <= OMEGA_EPS {
                return None;
            }
            let denom = v[k - 1] - 2.0 * v[k] + v[k + 1];
            let shift = if denom.abs() > 0.0 { 0.5 * (v[k - 1] - v[k + 1]) / denom } else { 0.0 };
            let shift = shift.clamp(-1.0, 1.0);
            let h = tm.t[k + 1] - tm.t[k];
            let d = if shift >= 0.0 {
                tm.delta[k] + shift * (tm.delta[k + 1] - tm.delta[k])
            } else {
                tm.delta[k] + shift * (tm.delta[k] - tm.delta[k - 1])
            };
            return Some(PebsCrossing { t: tm.t[k] + shift * h, delta: d, index: k });
        }
    }
    None
}

/// Leading cluster read off the rotor angles at sample `k`: generators above
/// the largest gap in the sorted angles. Returns generator bus ids.
pub fn largest_gap_grouping(traj: &Trajectory, k: usize) -> Vec<usize> {
    let s = &traj.samples[k.min(traj.len() - 1)];
    let mut order: Vec<(f64, usize)> = s.delta.iter().zip(&traj.case.generators).map(|(d, g)| (*d, g.bus)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = (0.0, 1);
    for i in 1..order.len() {
        let gap = order[i].0 - order[i - 1].0;
        if gap > best.0 {
            best = (gap, i);
        }
    }
    let mut lead: Vec<usize> = order[best.1..].iter().map(|x| x.1).collect();
    lead.sort_unstable();
    lead
}
