//! Kron reduction to load buses and generator internal nodes, and the
//! cluster block partition of the reduced matrices.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::case::NetworkCase;
use crate::error::{Error, Result};
use crate::netmodel::admittance::AdmittanceSystem;
use crate::partition::{ClusterPartition, Cutset, Side};

type CMat = DMatrix<Complex64>;

/// Reduced network among the retained buses and the generator internal nodes.
///
/// `V_L = Z_LL Y_LG E` with `Z_LL = -([Y_L] + Y_LL)^-1`.
#[derive(Debug, Clone)]
pub struct ReducedNetwork {
    /// Retained bus ids in row order: load buses first, then extra buses.
    pub buses: Vec<usize>,
    /// Position in `case.loads` of the load at each retained bus.
    pub load_of: Vec<Option<usize>>,
    pub y_ll: CMat,
    pub y_lg: CMat,
    /// Diagonal `[Y_L]` of load admittances per retained bus.
    pub y_load: Vec<Complex64>,
    pub z_ll: CMat,
    pub emf_steady: Vec<Complex64>,
    pub blocks: Option<PartitionBlocks>,
}

/// Cluster view of a reduced network.
#[derive(Debug, Clone)]
pub struct PartitionBlocks {
    pub s_rows: Vec<usize>,
    pub a_rows: Vec<usize>,
    pub s_gens: Vec<usize>,
    pub a_gens: Vec<usize>,
    /// Cutset-line stamps only.
    pub y2_ll: CMat,
    pub y1_ll: CMat,
    pub z_ss: CMat,
    pub z_sa: CMat,
    pub z_as: CMat,
    pub z_aa: CMat,
    pub y_lgs: CMat,
    pub y_lga: CMat,
    /// `(row_k, row_l, branch position, orientation matches S->A)` per cutset line.
    pub cut: Vec<(usize, usize, usize, bool)>,
}

impl ReducedNetwork {
    pub fn row_of(&self, bus: usize) -> Option<usize> {
        self.buses.iter().position(|&b| b == bus)
    }

    /// `K = Z_LL Y_LG` so that `V_L = K E`.
    pub fn voltage_map(&self) -> CMat {
        &self.z_ll * &self.y_lg
    }
}

/// Eliminate every bus except the load buses and `extra` buses.
///
/// `load_admittance` is indexed like `case.loads`; `emf_steady` like
/// `case.generators`.
pub fn kron_reduce(
    adm: &AdmittanceSystem,
    case: &NetworkCase,
    load_admittance: &[Complex64],
    emf_steady: &[Complex64],
    extra: &[usize],
) -> Result<ReducedNetwork> {
    let mut buses: Vec<usize> = case.loads.iter().map(|l| l.bus).collect();
    let mut seen: BTreeSet<usize> = buses.iter().copied().collect();
    for &b in extra {
        if !adm.index.contains_key(&b) {
            return Err(Error::UnknownBus(b));
        }
        if seen.insert(b) {
            buses.push(b);
        }
    }
    let retained: Vec<usize> = buses.iter().map(|b| adm.index[b]).collect();
    let keep: BTreeSet<usize> = retained.iter().copied().collect();
    let elim: Vec<usize> = (0..adm.n()).filter(|i| !keep.contains(i)).collect();
    let m = case.generators.len();
    let (nr, ne) = (retained.len(), elim.len());

    // Bus block including the generator reactances at the terminals, and the
    // coupling of every bus to the internal nodes.
    let mut ybus = adm.y.clone();
    let mut ybg = CMat::zeros(adm.n(), m);
    for (j, g) in case.generators.iter().enumerate() {
        let r = adm.index[&g.bus];
        let y = Complex64::new(0.0, -1.0 / g.xd_prime);
        ybus[(r, r)] += y;
        ybg[(r, j)] = -y;
    }

    let pick = |rows: &[usize], cols: &[usize]| CMat::from_fn(rows.len(), cols.len(), |i, j| ybus[(rows[i], cols[j])]);
    let pick_g = |rows: &[usize]| CMat::from_fn(rows.len(), m, |i, j| ybg[(rows[i], j)]);
    let y_rr = pick(&retained, &retained);
    let y_rx = pick(&retained, &elim);
    let y_xr = pick(&elim, &retained);
    let y_xx = pick(&elim, &elim);
    let y_rg = pick_g(&retained);
    let y_xg = pick_g(&elim);

    let (y_ll, y_lg) = if ne == 0 {
        (y_rr, y_rg)
    } else {
        let lu = y_xx.lu();
        let a = lu.solve(&y_xr).ok_or(Error::SingularReduction)?;
        let b = lu.solve(&y_xg).ok_or(Error::SingularReduction)?;
        (y_rr - &y_rx * a, y_rg - &y_rx * b)
    };

    let load_of: Vec<Option<usize>> = buses.iter().map(|&b| case.load_pos(b)).collect();
    let y_load: Vec<Complex64> =
        load_of.iter().map(|l| l.map(|k| load_admittance[k]).unwrap_or_default()).collect();
    let mut total = y_ll.clone();
    for i in 0..nr {
        total[(i, i)] += y_load[i];
    }
    let z_ll = -total.try_inverse().ok_or(Error::SingularReduction)?;
    if z_ll.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::SingularReduction);
    }
    Ok(ReducedNetwork { buses, load_of, y_ll, y_lg, y_load, z_ll, emf_steady: emf_steady.to_vec(), blocks: None })
}

/// Fill the cluster blocks and split `Y_LL` into the cutset stamps `Y_2LL`
/// and the remainder `Y_1LL`.
///
/// Every cutset endpoint must be a retained bus of `red`.
pub fn partition_blocks(
    red: &ReducedNetwork,
    case: &NetworkCase,
    part: &ClusterPartition,
    cut: &Cutset,
) -> Result<ReducedNetwork> {
    let nr = red.buses.len();
    let mut s_rows = Vec::new();
    let mut a_rows = Vec::new();
    for (i, b) in red.buses.iter().enumerate() {
        match part.side_of_bus(*b) {
            Some(Side::S) => s_rows.push(i),
            Some(Side::A) => a_rows.push(i),
            None => return Err(Error::InvalidPartition(format!("bus {b} has no side"))),
        }
    }
    let s_gens = part.gen_positions(case, Side::S);
    let a_gens = part.gen_positions(case, Side::A);

    let mut y2 = CMat::zeros(nr, nr);
    let mut cut_rows = Vec::new();
    for (br, (pos, forward)) in cut.lines.iter().zip(cut.positions(case)?) {
        let k = red.row_of(br.0).ok_or_else(|| Error::InvalidPartition(format!("cutset bus {} not retained", br.0)))?;
        let l = red.row_of(br.1).ok_or_else(|| Error::InvalidPartition(format!("cutset bus {} not retained", br.1)))?;
        if part.side_of_bus(br.0) != Some(Side::S) || part.side_of_bus(br.1) != Some(Side::A) {
            return Err(Error::NotASeparator(format!("line {br} is not oriented S -> A")));
        }
        let (yff, yft, ytf, ytt) = case.branches[pos].two_port();
        let (f, t) = if forward { (k, l) } else { (l, k) };
        y2[(f, f)] += yff;
        y2[(f, t)] += yft;
        y2[(t, f)] += ytf;
        y2[(t, t)] += ytt;
        cut_rows.push((k, l, pos, forward));
    }
    let y1 = &red.y_ll - &y2;
    let sub = |m: &CMat, r: &[usize], c: &[usize]| CMat::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])]);
    let blocks = PartitionBlocks {
        z_ss: sub(&red.z_ll, &s_rows, &s_rows),
        z_sa: sub(&red.z_ll, &s_rows, &a_rows),
        z_as: sub(&red.z_ll, &a_rows, &s_rows),
        z_aa: sub(&red.z_ll, &a_rows, &a_rows),
        y_lgs: sub(&red.y_lg, &s_rows, &s_gens),
        y_lga: sub(&red.y_lg, &a_rows, &a_gens),
        s_rows,
        a_rows,
        s_gens,
        a_gens,
        y2_ll: y2,
        y1_ll: y1,
        cut: cut_rows,
    };
    let mut out = red.clone();
    out.blocks = Some(blocks);
    Ok(out)
}
