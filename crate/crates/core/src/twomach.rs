//! Cosine-form models of the load and cutset power deviations of a
//! two-cluster system, and the checks built on them.
//!
//! With rigid clusters, the `S` EMFs rotate together by the composite angle
//! `delta` relative to the `A` EMFs, so every retained bus voltage is
//! `V_k(delta) = a_k e^{j delta} + b_k`. Any power of the form
//! `Re(w V_k conj(V_l))` is then `Re(c e^{j delta}) + const`, which gives the
//! amplitude `|c|` and phase `arg c` directly.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::energetics::TwoMachineTrace;
use crate::error::{Error, Result};
use crate::netmodel::admittance::{build_admittance, Stage};
use crate::netmodel::kron::{kron_reduce, partition_blocks, ReducedNetwork};
use crate::simcore::Trajectory;
use crate::partition::{ClusterPartition, Cutset};

/// Limit on `|gamma_LS - gamma_LA|` beyond which the L2 composition is flagged.
pub const COMPOSITION_PHASE_LIMIT: f64 = 0.5;

/// `P_c + P_max cos(delta + gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosinePart {
    pub p_c: f64,
    pub p_max: f64,
    pub gamma: f64,
}

impl CosinePart {
    /// Part vanishing at `delta = 0` built from the coefficient `c` of `e^{j delta}`.
    pub fn from_coefficient(c: Complex64) -> Self {
        let p_max = c.norm();
        let gamma = if p_max > 0.0 { principal(c.arg()) } else { 0.0 };
        CosinePart { p_c: -p_max * gamma.cos(), p_max, gamma }
    }

    pub fn eval(&self, delta: f64) -> f64 {
        self.p_c + self.p_max * (delta + self.gamma).cos()
    }

    pub fn derivative(&self, delta: f64) -> f64 {
        -self.p_max * (delta + self.gamma).sin()
    }
}

/// Map an angle to `(-pi, pi]`.
pub fn principal(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineModel {
    pub ls: CosinePart,
    pub la: CosinePart,
    pub c: CosinePart,
    /// Composite load term `(M_A dP_LS - M_S dP_LA)/M_T` in the half-angle form.
    pub l2: CosinePart,
    pub m_s: f64,
    pub m_a: f64,
    /// Generator bus ids of the leading cluster.
    pub s_gens: Vec<usize>,
    /// `delta_S^s - delta_A^s`, the origin of the composite angle.
    pub delta_origin: f64,
    /// True for models derived under the rigid-cluster assumption.
    pub approximate: bool,
    /// Set when `|gamma_LS - gamma_LA|` exceeds the composition limit.
    pub composition_flag: bool,
    /// Set when any amplitude vanishes.
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CosineModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization is infallible")
    }

    /// `gamma_C - gamma_L2`.
    pub fn lag(&self) -> f64 {
        self.l2.gamma - self.c.gamma
    }
}

/// Half-angle composition of the two load terms into the L2 term.
///
/// The offset is set so the composite vanishes at `delta = 0`.
pub fn compose_l2(ls: &CosinePart, la: &CosinePart, m_s: f64, m_a: f64) -> CosinePart {
    let m_t = m_s + m_a;
    let half = (ls.gamma - la.gamma) / 2.0;
    let p_max = (ls.p_max * m_a - la.p_max * m_s) / m_t * half.cos();
    let gamma = (ls.gamma + la.gamma) / 2.0;
    CosinePart { p_c: -p_max * gamma.cos(), p_max, gamma }
}

/// Coefficients of `e^{j delta}` of the load and cutset deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub ls: Complex64,
    pub la: Complex64,
    pub c: Complex64,
}

/// Rotation coefficients of the reduced network with optional per-row load
/// conductance overrides (used to keep only a monitored subset of loads).
pub fn coefficients(red: &ReducedNetwork, case: &NetworkCase, load_g: Option<&[f64]>) -> Result<Coefficients> {
    let blocks = red
        .blocks
        .as_ref()
        .ok_or_else(|| Error::InvalidPartition("reduced network has no partition blocks".into()))?;
    let k = red.voltage_map();
    let nr = red.buses.len();
    let mut a = vec![Complex64::default(); nr];
    let mut b = vec![Complex64::default(); nr];
    for r in 0..nr {
        for &g in &blocks.s_gens {
            a[r] += k[(r, g)] * red.emf_steady[g];
        }
        for &g in &blocks.a_gens {
            b[r] += k[(r, g)] * red.emf_steady[g];
        }
    }
    let g_of = |r: usize| load_g.map(|g| g[r]).unwrap_or(red.y_load[r].re);
    let load_sum = |rows: &[usize]| -> Complex64 { rows.iter().map(|&r| 2.0 * g_of(r) * a[r] * b[r].conj()).sum() };
    let ls = load_sum(&blocks.s_rows);
    let la = load_sum(&blocks.a_rows);

    let mut c = Complex64::default();
    for &(kr, lr, pos, forward) in &blocks.cut {
        let (yff, yft, ytf, ytt) = case.branches[pos].two_port();
        let (ykk, ykl) = if forward { (yff, yft) } else { (ytt, ytf) };
        let w = ykl.conj();
        c += 2.0 * ykk.re * a[kr] * b[kr].conj();
        c += w * a[kr] * b[lr].conj() + w.conj() * b[kr].conj() * a[lr];
    }
    Ok(Coefficients { ls, la, c })
}

/// Cosine part of the `S`-side load deviation restricted to the loads at `buses`.
pub fn partial_load_part(red: &ReducedNetwork, case: &NetworkCase, buses: &[usize]) -> Result<CosinePart> {
    let blocks = red
        .blocks
        .as_ref()
        .ok_or_else(|| Error::InvalidPartition("reduced network has no partition blocks".into()))?;
    let mut g = vec![0.0; red.buses.len()];
    for &b in buses {
        let r = red.row_of(b).filter(|r| blocks.s_rows.contains(r) && case.load_pos(b).is_some());
        let r = r.ok_or_else(|| Error::InvalidLoadSet(format!("bus {b} is not a load bus of the leading side")))?;
        g[r] = red.y_load[r].re;
    }
    Ok(CosinePart::from_coefficient(coefficients(red, case, Some(&g))?.ls))
}

/// Analytic cosine model from the partitioned reduced network.
pub fn fit_cosine_analytic(
    red: &ReducedNetwork,
    case: &NetworkCase,
    part: &ClusterPartition,
    _cut: &Cutset,
) -> Result<CosineModel> {
    let coef = coefficients(red, case, None)?;
    let ls = CosinePart::from_coefficient(coef.ls);
    let la = CosinePart::from_coefficient(coef.la);
    let c = CosinePart::from_coefficient(coef.c);
    let l2 = compose_l2(&ls, &la, part.m_s, part.m_a);
    let (ds, da) = part.cluster_means(case, &red.emf_steady.iter().map(|e| e.arg()).collect::<Vec<_>>());
    let composition_flag = (ls.gamma - la.gamma).abs() > COMPOSITION_PHASE_LIMIT;
    let degenerate = [ls.p_max, la.p_max, c.p_max].iter().any(|&p| p < 1e-12);
    let mut notes = Vec::new();
    if composition_flag {
        notes.push(format!("|gamma_LS - gamma_LA| = {:.3} rad exceeds the composition limit", (ls.gamma - la.gamma).abs()));
    }
    if degenerate {
        notes.push("zero amplitude in at least one term".into());
    }
    Ok(CosineModel {
        ls,
        la,
        c,
        l2,
        m_s: part.m_s,
        m_a: part.m_a,
        s_gens: part.s.clone(),
        delta_origin: ds - da,
        approximate: true,
        composition_flag,
        degenerate,
        notes,
    })
}

/// Post-fault network of a trajectory reduced to its load buses and the
/// cutset endpoints, with the cluster blocks filled from the baseline.
pub fn reduce_for_partition(traj: &Trajectory, part: &ClusterPartition, cut: &Cutset) -> Result<ReducedNetwork> {
    let base = traj.baseline()?;
    let adm = build_admittance(&traj.case, Stage::PostFault, Some(&traj.scenario.fault))?;
    let extra: Vec<usize> = cut.lines.iter().flat_map(|l| [l.0, l.1]).collect();
    let red = kron_reduce(&adm, &traj.case, &base.load_admittance, &base.emf, &extra)?;
    partition_blocks(&red, &traj.case, part, cut)
}

/// Analytic cosine model about the post-fault equilibrium of a trajectory.
pub fn fit_cosine_trajectory(traj: &Trajectory, part: &ClusterPartition, cut: &Cutset) -> Result<CosineModel> {
    let red = reduce_for_partition(traj, part, cut)?;
    fit_cosine_analytic(&red, &traj.case, part, cut)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumFit {
    pub part: CosinePart,
    /// Location of the first minimum in `delta`, when found.
    pub delta_min: Option<f64>,
    /// Phase from an unconstrained least-squares fit over the same window.
    pub gamma_lsq: f64,
}

/// Forward swing from fault clearing: until `delta` first exceeds `2 pi` or
/// the relative speed turns negative.
fn swing_window(tm: &TwoMachineTrace) -> std::ops::Range<usize> {
    let start = tm.t0_index;
    let end = (start + 1..tm.len())
        .find(|&k| tm.delta[k] > 2.0 * PI || tm.omega2[k] < 0.0)
        .unwrap_or(tm.len());
    start..end
}

/// Phase from the location of the first minimum of `y(delta)`; amplitude by
/// least squares on `[1, cos(delta + gamma)]`; offset from `y(0) = 0`.
pub fn fit_extremum(delta: &[f64], y: &[f64], name: &str) -> Result<ExtremumFit> {
    let n = y.len();
    if n < 5 {
        return Err(Error::InsufficientSwing(name.into()));
    }
    let kmin = (0..n).min_by(|&i, &j| y[i].total_cmp(&y[j])).expect("nonempty");
    if kmin == 0 || kmin == n - 1 {
        return Err(Error::InsufficientSwing(name.into()));
    }
    // Parabolic refinement in delta through the three samples at the minimum.
    let (x0, x1, x2) = (delta[kmin - 1], delta[kmin], delta[kmin + 1]);
    let (y0, y1, y2) = (y[kmin - 1], y[kmin], y[kmin + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let dmin = if denom.abs() > 0.0 {
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        if a > 0.0 {
            -b / (2.0 * a)
        } else {
            x1
        }
    } else {
        x1
    };
    let gamma = principal(PI - dmin);
    let basis: Vec<f64> = delta.iter().map(|d| (d + gamma).cos()).collect();
    let (_, p_max) = linear_fit(&basis, y);
    let gamma_lsq = lsq_phase(delta, y);
    Ok(ExtremumFit {
        part: CosinePart { p_c: -p_max * gamma.cos(), p_max, gamma },
        delta_min: Some(dmin),
        gamma_lsq,
    })
}

/// Ordinary least squares `y ~ c0 + c1 x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - c1 * mx, c1)
}

/// Phase of the least-squares fit `y ~ c0 + p cos(delta) + q sin(delta)`.
fn lsq_phase(delta: &[f64], y: &[f64]) -> f64 {
    let (p, q, _) = lsq_trig(delta, y);
    principal(-q.atan2(p))
}

/// Least squares on `[cos, sin, 1]`, returning `(p, q, c0)`.
fn lsq_trig(delta: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = delta.len();
    let a = nalgebra::DMatrix::from_fn(n, 3, |i, j| match j {
        0 => delta[i].cos(),
        1 => delta[i].sin(),
        _ => 1.0,
    });
    let yv = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let aty = a.transpose() * yv;
    match ata.lu().solve(&aty) {
        Some(x) => (x[0], x[1], x[2]),
        None => (0.0, 0.0, 0.0),
    }
}

/// Cosine part by least squares on `[cos, sin, 1]` with the offset then reset
/// so the part vanishes at zero.
pub fn fit_least_squares(delta: &[f64], y: &[f64]) -> CosinePart {
    let (p, q, _) = lsq_trig(delta, y);
    // p cos d + q sin d = R cos(d + g) with R cos g = p, -R sin g = q
    CosinePart::from_coefficient(Complex64::new(p, -q))
}

/// Empirical cosine model read off a simulated two-machine trace.
///
/// `L2` and `C` phases come from the location of their first minimum over the
/// first forward swing (`delta` up to `2 pi`). The load terms of each side use
/// the same rule when a minimum is present and fall back to least squares
/// otherwise.
pub fn fit_cosine_empirical(tm: &TwoMachineTrace, s_gens: &[usize]) -> Result<CosineModel> {
    let w = swing_window(tm);
    let d = &tm.delta[w.clone()];
    let c = fit_extremum(d, &tm.dp_c[w.clone()], "dP_C")?;
    let l2 = fit_extremum(d, &tm.dp_l2[w.clone()], "dP_L2")?;
    let mut notes = Vec::new();
    let mut side = |y: &[f64], name: &str| -> CosinePart {
        match fit_extremum(d, y, name) {
            Ok(f) => f.part,
            Err(_) => {
                notes.push(format!("{name}: no interior minimum, least-squares phase used"));
                fit_least_squares(d, y)
            }
        }
    };
    let ls = side(&tm.dp_ls[w.clone()], "dP_LS");
    let la = side(&tm.dp_la[w.clone()], "dP_LA");
    for (name, f) in [("dP_C", &c), ("dP_L2", &l2)] {
        let diff = principal(f.part.gamma - f.gamma_lsq).abs();
        if diff > 0.2 {
            notes.push(format!("{name}: extremum and least-squares phases differ by {diff:.3} rad"));
        }
    }
    let composition_flag = (ls.gamma - la.gamma).abs() > COMPOSITION_PHASE_LIMIT;
    Ok(CosineModel {
        ls,
        la,
        c: c.part,
        l2: l2.part,
        m_s: tm.m_s,
        m_a: tm.m_a,
        s_gens: s_gens.to_vec(),
        delta_origin: tm.delta_sa[tm.t0_index] - tm.delta[tm.t0_index],
        approximate: false,
        composition_flag,
        degenerate: c.part.p_max < 1e-12 || l2.part.p_max < 1e-12,
        notes,
    })
}

/// Locations of the first minima of `dP_L2` and `dP_C` over the first swing.
pub fn empirical_minima(tm: &TwoMachineTrace) -> Result<(f64, f64)> {
    let w = swing_window(tm);
    let d = &tm.delta[w.clone()];
    let l2 = fit_extremum(d, &tm.dp_l2[w.clone()], "dP_L2")?;
    let c = fit_extremum(d, &tm.dp_c[w], "dP_C")?;
    Ok((l2.delta_min.unwrap_or(f64::NAN), c.delta_min.unwrap_or(f64::NAN)))
}

/// `f(delta) = dP_L2(delta) + dP_C(delta)`.
pub fn evaluate_f(model: &CosineModel, delta: f64) -> f64 {
    model.l2.eval(delta) + model.c.eval(delta)
}

/// Analytic `df/d(delta)` at `delta`.
pub fn evaluate_df(model: &CosineModel, delta: f64) -> f64 {
    model.l2.derivative(delta) + model.c.derivative(delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootExistenceVerdict {
    pub holds: bool,
    /// Names of the conditions that failed.
    pub failed: Vec<String>,
    pub df0: f64,
    /// Bracket of the first zero of `f` in `(0, -2 gamma_C)`.
    pub interval: Option<(f64, f64)>,
    pub root: Option<f64>,
    /// Set when `gamma_C` lies in the alternative interval `(|gamma_L2|, pi)`,
    /// which is not covered.
    pub alternative_case_unsupported: bool,
}

/// Check the sufficient conditions for a zero of `f` between `0` and
/// `-2 gamma_C`, and locate it by a sign scan followed by bisection.
pub fn root_existence_check(model: &CosineModel) -> RootExistenceVerdict {
    let gc = model.c.gamma;
    let gl = model.l2.gamma;
    let df0 = evaluate_df(model, 0.0);
    let mut failed = Vec::new();
    if !(gc > -PI + gl.abs() && gc < 0.0) {
        failed.push("gamma_c-range".to_string());
    }
    if !(df0 > 0.0) {
        failed.push("df0-positive".to_string());
    }
    if !(model.l2.p_max > 0.0) {
        failed.push("p_l2max-positive".to_string());
    }
    let alternative = gc > gl.abs() && gc < PI;
    if !failed.is_empty() {
        return RootExistenceVerdict { holds: false, failed, df0, interval: None, root: None, alternative_case_unsupported: alternative };
    }
    let end = -2.0 * gc;
    if !(evaluate_f(model, end) < 0.0) {
        failed.push("f-negative-at-minus-2gamma_c".to_string());
        return RootExistenceVerdict { holds: false, failed, df0, interval: None, root: None, alternative_case_unsupported: false };
    }
    let steps = 2000;
    let h = end / steps as f64;
    let mut lo = 0.0;
    let mut hi = end;
    for i in 1..=steps {
        let x = i as f64 * h;
        if evaluate_f(model, x) <= 0.0 {
            lo = x - h;
            hi = x;
            break;
        }
    }
    let bracket = (lo, hi);
    let (mut a, mut b) = bracket;
    if a == 0.0 {
        // f > 0 just right of the origin because f'(0) > 0
        a = (h * 1e-6).min(b / 2.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if evaluate_f(model, mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    RootExistenceVerdict {
        holds: true,
        failed,
        df0,
        interval: Some(bracket),
        root: Some(0.5 * (a + b)),
        alternative_case_unsupported: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenVerdict {
    StableOscillatory,
    Critical,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEigenResult {
    /// `+/- sqrt(-df(0)/d(delta))`.
    pub lambda: [Complex64; 2],
    pub df0: f64,
    pub verdict: EigenVerdict,
    /// Eigenvalues of the relative swing equation with the equivalent inertia
    /// `M_S M_A / M_T` included [1/s].
    pub lambda_inertial: [Complex64; 2],
}

/// Linearization of the relative swing at the equilibrium.
pub fn sep_eigen(model: &CosineModel) -> StabilityEigenResult {
    let df0 = evaluate_df(model, 0.0);
    let root = Complex64::new(-df0, 0.0).sqrt();
    let m_eq = model.m_s * model.m_a / (model.m_s + model.m_a);
    let root_m = Complex64::new(-df0 / m_eq, 0.0).sqrt();
    let scale = model.l2.p_max.abs() + model.c.p_max.abs();
    let verdict = if df0.abs() <= 1e-12 * scale.max(1.0) {
        EigenVerdict::Critical
    } else if df0 > 0.0 {
        EigenVerdict::StableOscillatory
    } else {
        EigenVerdict::Unstable
    };
    StabilityEigenResult { lambda: [root, -root], df0, verdict, lambda_inertial: [root_m, -root_m] }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutsetShiftReport {
    pub max_difference: f64,
    pub peak_f: f64,
    pub relative: f64,
    /// `(delta, dP_L2' - dP_L2)` on the grid: the load power lying between the cutsets.
    pub delta_p: Vec<(f64, f64)>,
}

/// Compare the composite `f` of two cutsets sharing one generator grouping.
pub fn cutset_shift(model: &CosineModel, other: &CosineModel, grid: &[f64]) -> Result<CutsetShiftReport> {
    let mut a = model.s_gens.clone();
    let mut b = other.s_gens.clone();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::MixedPartitions);
    }
    let mut max_difference: f64 = 0.0;
    let mut peak_f: f64 = 0.0;
    let mut delta_p = Vec::with_capacity(grid.len());
    for &d in grid {
        let f1 = evaluate_f(model, d);
        let f2 = evaluate_f(other, d);
        max_difference = max_difference.max((f1 - f2).abs());
        peak_f = peak_f.max(f1.abs()).max(f2.abs());
        delta_p.push((d, other.l2.eval(d) - model.l2.eval(d)));
    }
    let relative = if peak_f > 0.0 { max_difference / peak_f } else { 0.0 };
    Ok(CutsetShiftReport { max_difference, peak_f, relative, delta_p })
}
