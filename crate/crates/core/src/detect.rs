//! Out-of-step detectors over a recorded trajectory.
//!
//! Every detector scans forward from the fault-clearing sample and reports
//! only the first qualifying instant. Zero crossings are located by linear
//! interpolation between samples; derivative conditions use centered
//! differences.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::energetics::{pebs_crossing, two_machine_decompose, PebsCrossing, TwoMachineTrace};
use crate::error::{Error, Result};
use crate::netmodel::admittance::BranchRef;
use crate::netmodel::kron::ReducedNetwork;
use crate::partition::{split_by_cutset, ClusterPartition, Cutset};
use crate::simcore::{Termination, Trajectory};
use crate::twomach::{
    coefficients, fit_cosine_analytic, fit_cosine_empirical, partial_load_part, root_existence_check, reduce_for_partition,
    sep_eigen, CosineModel, CosinePart, RootExistenceVerdict, StabilityEigenResult,
};

/// Largest `|gamma_LS,N - gamma_LS|` for which the compensation is valid.
pub const COMPENSATION_PHASE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaRule {
    /// Smaller of the two ratios.
    #[default]
    Min,
    /// Larger of the two ratios.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CompensationSource {
    /// Ratios from the reduced network.
    #[default]
    Analytic,
    /// Fixed factor supplied by the user.
    Configured { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Line angle threshold of the LPE criterion [rad].
    pub sigma_min: f64,
    /// Tolerance of derivative sign tests [pu/s, rad/s].
    pub deriv_tol: f64,
    /// Crossings whose bracketing samples both lie within this band are ignored [pu].
    pub zero_tol: f64,
    pub compensation: CompensationSource,
    pub alpha_rule: AlphaRule,
    /// Run the compensated detector even when the compensation is flagged invalid.
    pub allow_invalid_compensation: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            sigma_min: FRAC_PI_2,
            deriv_tol: 1e-6,
            zero_tol: 0.0,
            compensation: CompensationSource::Analytic,
            alpha_rule: AlphaRule::Min,
            allow_invalid_compensation: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_min > 0.0) {
            return Err(Error::InvalidManifest("sigma_min must be positive".into()));
        }
        if !(self.deriv_tol >= 0.0) || !(self.zero_tol >= 0.0) {
            return Err(Error::InvalidManifest("tolerances must be non-negative".into()));
        }
        if let CompensationSource::Configured { alpha } = self.compensation {
            if !(alpha > 0.0) {
                return Err(Error::InvalidManifest("configured alpha must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Eq6FirstMax,
    Eq7Threshold,
    Eq15Combined,
    CutsetOnly,
    StrategyACompensated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineTime {
    pub line: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub detector: DetectorKind,
    pub cutset: String,
    pub t: f64,
    /// Relative angle of the two clusters at detection [rad].
    pub delta: f64,
    pub delta_deg: f64,
    /// Per-line instants for the line-wise criteria.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub line_times: Vec<LineTime>,
    pub dp_c: Option<f64>,
    /// Measured or estimated load term at detection.
    pub dp_l2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadCompensation {
    pub monitored: Vec<usize>,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub rule: AlphaRule,
    pub p_lsc_n: f64,
    pub p_lsmax_n: f64,
    pub gamma_ls_n: f64,
    pub gamma_ls: f64,
    pub valid: bool,
}

/// Centered-difference time derivative, one-sided at the ends.
pub fn time_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|k| {
            if n < 2 {
                0.0
            } else if k == 0 {
                (y[1] - y[0]) / (t[1] - t[0])
            } else if k == n - 1 {
                (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2])
            } else {
                (y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1])
            }
        })
        .collect()
}

/// A located zero crossing between samples `k` and `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub k: usize,
    /// Fraction of the step at which the crossing lies.
    pub frac: f64,
    pub t: f64,
}

impl Crossing {
    pub fn interp(&self, y: &[f64]) -> f64 {
        let k = self.k;
        if k + 1 < y.len() {
            y[k] + self.frac * (y[k + 1] - y[k])
        } else {
            y[k]
        }
    }
}

/// First zero crossing of `g` at or after `start` at which
/// `(dg/dt) * w < -deriv_tol`.
pub fn first_crossing(t: &[f64], g: &[f64], w: &[f64], start: usize, deriv_tol: f64, zero_tol: f64) -> Option<Crossing> {
    let dg = time_derivative(t, g);
    let n = g.len();
    for k in start..n.saturating_sub(1) {
        let (a, b) = (g[k], g[k + 1]);
        let sign_change = (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0) || (a == 0.0 && k == start);
        if !sign_change || (a.abs() <= zero_tol && b.abs() <= zero_tol && zero_tol > 0.0) {
            continue;
        }
        let frac = if a != b { a / (a - b) } else { 0.0 };
        let slope = dg[k] + frac * (dg[k + 1] - dg[k]);
        let speed = w[k] + frac * (w[k + 1] - w[k]);
        if slope * speed < -deriv_tol {
            return Some(Crossing { k, frac, t: t[k] + frac * (t[k + 1] - t[k]) });
        }
    }
    None
}

fn event_from_trace(tm: &TwoMachineTrace, c: Crossing, kind: DetectorKind, cutset: &str, dp_l2: &[f64]) -> DetectionEvent {
    let delta = c.interp(&tm.delta);
    DetectionEvent {
        detector: kind,
        cutset: cutset.to_string(),
        t: c.t,
        delta,
        delta_deg: delta.to_degrees(),
        line_times: Vec::new(),
        dp_c: Some(c.interp(&tm.dp_c)),
        dp_l2: Some(c.interp(dp_l2)),
    }
}

/// Point where `dP_L2 + dP_C` first crosses zero against the relative motion.
pub fn detect_eq15(tm: &TwoMachineTrace, cfg: &DetectorConfig, cutset: &str) -> Option<DetectionEvent> {
    let f = tm.combined();
    let c = first_crossing(&tm.t, &f, &tm.omega2, tm.t0_index, cfg.deriv_tol, cfg.zero_tol)?;
    Some(event_from_trace(tm, c, DetectorKind::Eq15Combined, cutset, &tm.dp_l2))
}

/// Point where the cutset term alone first crosses zero against the motion.
pub fn detect_cutset_only(tm: &TwoMachineTrace, cfg: &DetectorConfig, cutset: &str) -> Option<DetectionEvent> {
    let c = first_crossing(&tm.t, &tm.dp_c, &tm.omega2, tm.t0_index, cfg.deriv_tol, cfg.zero_tol)?;
    Some(event_from_trace(tm, c, DetectorKind::CutsetOnly, cutset, &tm.dp_l2))
}

/// Load compensation factors from the reduced network.
pub fn compute_compensation(
    red: &ReducedNetwork,
    case: &NetworkCase,
    monitored: &[usize],
    rule: AlphaRule,
) -> Result<LoadCompensation> {
    if monitored.is_empty() {
        return Err(Error::InvalidLoadSet("monitored set is empty".into()));
    }
    let full = CosinePart::from_coefficient(coefficients(red, case, None)?.ls);
    let part = partial_load_part(red, case, monitored)?;
    if part.p_c.abs() < 1e-14 || part.p_max.abs() < 1e-14 {
        return Err(Error::InvalidLoadSet("monitored loads carry no deviation".into()));
    }
    let alpha1 = full.p_c / part.p_c;
    let alpha2 = full.p_max / part.p_max;
    let alpha = match rule {
        AlphaRule::Min => alpha1.min(alpha2),
        AlphaRule::Max => alpha1.max(alpha2),
    };
    if !(alpha > 0.0) {
        return Err(Error::InvalidLoadSet(format!("non-positive compensation factor {alpha}")));
    }
    let valid = (part.gamma - full.gamma).abs() <= COMPENSATION_PHASE_LIMIT;
    Ok(LoadCompensation {
        monitored: monitored.to_vec(),
        alpha,
        alpha1,
        alpha2,
        rule,
        p_lsc_n: part.p_c,
        p_lsmax_n: part.p_max,
        gamma_ls_n: part.gamma,
        gamma_ls: full.gamma,
        valid,
    })
}

/// Estimated `dP_L2` from the monitored loads: `alpha M_A / M_T * sum(dP_Li)`.
pub fn estimate_l2(tm: &TwoMachineTrace, case: &NetworkCase, monitored: &[usize], alpha: f64) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; tm.len()];
    for &b in monitored {
        let pos = case.load_pos(b).ok_or_else(|| Error::InvalidLoadSet(format!("bus {b} has no load")))?;
        let (_, series) = tm
            .dp_load
            .iter()
            .find(|(p, _)| *p == pos)
            .ok_or_else(|| Error::InvalidLoadSet(format!("load at bus {b} is not on the leading side")))?;
        for (s, x) in sum.iter_mut().zip(series) {
            *s += x;
        }
    }
    let scale = alpha * tm.m_a / (tm.m_s + tm.m_a);
    Ok(sum.into_iter().map(|s| scale * s).collect())
}

/// Crossing of `dP_C` plus the compensated load estimate.
pub fn detect_strategy_a(
    tm: &TwoMachineTrace,
    case: &NetworkCase,
    monitored: &[usize],
    comp: Option<&LoadCompensation>,
    cfg: &DetectorConfig,
    cutset: &str,
) -> Result<Option<DetectionEvent>> {
    let alpha = match (cfg.compensation, comp) {
        (CompensationSource::Configured { alpha }, _) => alpha,
        (CompensationSource::Analytic, Some(c)) => {
            if !c.valid && !cfg.allow_invalid_compensation {
                return Err(Error::InvalidCompensation((c.gamma_ls_n - c.gamma_ls).abs()));
            }
            c.alpha
        }
        (CompensationSource::Analytic, None) => {
            return Err(Error::InvalidLoadSet("no compensation computed".into()));
        }
    };
    let est = estimate_l2(tm, case, monitored, alpha)?;
    let g: Vec<f64> = tm.dp_c.iter().zip(&est).map(|(a, b)| a + b).collect();
    let Some(c) = first_crossing(&tm.t, &g, &tm.omega2, tm.t0_index, cfg.deriv_tol, cfg.zero_tol) else {
        return Ok(None);
    };
    Ok(Some(event_from_trace(tm, c, DetectorKind::StrategyACompensated, cutset, &est)))
}

/// Line name, power leaving the `S` end, angle across the line and steady power.
type CutLineSeries = (String, Vec<f64>, Vec<f64>, f64);

/// Power leaving the `S` end and angle across each cutset line, oriented `S -> A`.
fn cut_line_series(traj: &Trajectory, cut: &Cutset) -> Result<Vec<CutLineSeries>> {
    let base = traj.baseline()?;
    let mut out = Vec::new();
    for (br, (pos, forward)) in cut.lines.iter().zip(cut.positions(&traj.case)?) {
        let p = traj.branch_power_from(pos, br.0);
        let sign = if forward { 1.0 } else { -1.0 };
        let raw: Vec<f64> = traj.samples.iter().map(|s| sign * s.elements.sigma_branch[pos]).collect();
        let sigma = crate::simcore::unwrap_angles(&raw);
        let ps = if forward { base.elements.p_fwd[pos] } else { base.elements.p_rev[pos] };
        out.push((br.to_string(), p, sigma, ps));
    }
    Ok(out)
}

/// Relative cluster angle `delta` per sample.
fn relative_angle(traj: &Trajectory, part: &ClusterPartition) -> Result<Vec<f64>> {
    let base = traj.baseline()?;
    let (s0, a0) = part.cluster_means(&traj.case, &base.delta);
    Ok(traj
        .samples
        .iter()
        .map(|s| {
            let (ds, da) = part.cluster_means(&traj.case, &s.delta);
            (ds - s0) - (da - a0)
        })
        .collect())
}

/// Each cutset line's LPE reaches its first maximum; fires when all have.
pub fn detect_eq6(traj: &Trajectory, part: &ClusterPartition, cut: &Cutset, cfg: &DetectorConfig, cutset: &str) -> Result<Option<DetectionEvent>> {
    let t = traj.times();
    let t0 = traj.clearing_index();
    let mut line_times = Vec::new();
    let mut last: Option<Crossing> = None;
    for (name, p, sigma, ps) in cut_line_series(traj, cut)? {
        let g: Vec<f64> = p.iter().map(|x| x - ps).collect();
        let w = time_derivative(&t, &sigma);
        let Some(c) = first_crossing(&t, &g, &w, t0, cfg.deriv_tol, cfg.zero_tol) else {
            return Ok(None);
        };
        line_times.push(LineTime { line: name, t: c.t });
        if last.is_none_or(|l| c.t > l.t) {
            last = Some(c);
        }
    }
    let Some(c) = last else { return Ok(None) };
    let delta = c.interp(&relative_angle(traj, part)?);
    Ok(Some(DetectionEvent {
        detector: DetectorKind::Eq6FirstMax,
        cutset: cutset.to_string(),
        t: c.t,
        delta,
        delta_deg: delta.to_degrees(),
        line_times,
        dp_c: None,
        dp_l2: None,
    }))
}

/// All cutset lines past `sigma_min`, below their steady power, and moving
/// monotonically over the trailing 90% of the post-fault interval.
pub fn detect_eq7(traj: &Trajectory, part: &ClusterPartition, cut: &Cutset, cfg: &DetectorConfig, cutset: &str) -> Result<Option<DetectionEvent>> {
    let t = traj.times();
    let t0 = traj.clearing_index();
    let lines = cut_line_series(traj, cut)?;
    let rates: Vec<Vec<f64>> = lines.iter().map(|(_, _, s, _)| time_derivative(&t, s)).collect();
    let mut last_still = vec![None::<usize>; lines.len()];
    for k in t0..traj.len() {
        for (i, r) in rates.iter().enumerate() {
            if r[k].abs() <= cfg.deriv_tol {
                last_still[i] = Some(k);
            }
        }
        let head = t0 + (k - t0) / 10;
        let all = lines.iter().enumerate().all(|(i, (_, p, sigma, ps))| {
            p[k] - ps <= 0.0 && sigma[k] > cfg.sigma_min && last_still[i].is_none_or(|j| j < head)
        });
        if all {
            let delta = relative_angle(traj, part)?[k];
            return Ok(Some(DetectionEvent {
                detector: DetectorKind::Eq7Threshold,
                cutset: cutset.to_string(),
                t: t[k],
                delta,
                delta_deg: delta.to_degrees(),
                line_times: Vec::new(),
                dp_c: None,
                dp_l2: None,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub cutset: String,
    pub p_l2max: f64,
    pub lines: usize,
}

/// Order candidates by ascending analytic `P_L2max`, fewer lines first on ties.
pub fn rank_models(candidates: &[(String, CosineModel, usize)]) -> Result<Vec<RankEntry>> {
    if let Some((_, first, _)) = candidates.first() {
        let key = |m: &CosineModel| {
            let mut s = m.s_gens.clone();
            s.sort_unstable();
            s
        };
        let k0 = key(first);
        if candidates.iter().any(|(_, m, _)| key(m) != k0) {
            return Err(Error::MixedPartitions);
        }
    }
    let mut out: Vec<RankEntry> = candidates
        .iter()
        .map(|(name, m, n)| RankEntry { cutset: name.clone(), p_l2max: m.l2.p_max, lines: *n })
        .collect();
    out.sort_by(|a, b| a.p_l2max.total_cmp(&b.p_l2max).then(a.lines.cmp(&b.lines)));
    Ok(out)
}

/// Rank cutsets of one trajectory by their analytic models.
pub fn rank_cutsets(traj: &Trajectory, s_gens: &[usize], candidates: &[NamedCutset]) -> Result<Vec<RankEntry>> {
    let mut models = Vec::new();
    for c in candidates {
        let (part, cut) = split_for_trajectory(traj, s_gens, &c.lines)?;
        let m = fit_cosine_analytic(&reduce_for_partition(traj, &part, &cut)?, &traj.case, &part, &cut)?;
        models.push((c.name.clone(), m, c.lines.len()));
    }
    rank_models(&models)
}

/// Split the post-fault network of a trajectory along a cutset.
pub fn split_for_trajectory(traj: &Trajectory, s_gens: &[usize], lines: &[BranchRef]) -> Result<(ClusterPartition, Cutset)> {
    let tripped = traj.scenario.fault.tripped();
    let in_service: Vec<bool> = traj
        .case
        .branches
        .iter()
        .map(|br| !tripped.iter().any(|t| br.connects(t.0, t.1)))
        .collect();
    split_by_cutset(&traj.case, &in_service, s_gens, lines)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCutset {
    pub name: String,
    pub lines: Vec<BranchRef>,
    /// Monitored load buses for the compensated detector.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub monitored: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Generator buses of the leading cluster.
    pub s_gens: Vec<usize>,
    pub cutsets: Vec<NamedCutset>,
    #[serde(default)]
    pub detector: DetectorConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StableWithinHorizon,
    UnstableDetected,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::StableWithinHorizon => 0,
            Verdict::UnstableDetected => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutsetReport {
    pub name: String,
    pub lines: Vec<String>,
    pub analytic: Option<CosineModel>,
    pub empirical: Option<CosineModel>,
    pub root_existence: Option<RootExistenceVerdict>,
    pub eigen: Option<StabilityEigenResult>,
    pub compensation: Option<LoadCompensation>,
    pub pebs: Option<PebsCrossing>,
    pub events: Vec<DetectionEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub verdict: Verdict,
    pub termination: Termination,
    pub sep_error: Option<String>,
    pub config: SuiteConfig,
    pub cutsets: Vec<CutsetReport>,
    pub ranking: Vec<RankEntry>,
    /// All events ordered by time.
    pub events: Vec<DetectionEvent>,
}

impl DetectionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// First event of a detector on a cutset.
    pub fn event(&self, cutset: &str, kind: DetectorKind) -> Option<&DetectionEvent> {
        self.events.iter().find(|e| e.cutset == cutset && e.detector == kind)
    }
}

/// Detection products of one cutset.
pub fn analyze_cutset(traj: &Trajectory, s_gens: &[usize], cs: &NamedCutset, cfg: &DetectorConfig) -> Result<(CutsetReport, Option<TwoMachineTrace>)> {
    let (part, cut) = split_for_trajectory(traj, s_gens, &cs.lines)?;
    let mut rep = CutsetReport {
        name: cs.name.clone(),
        lines: cs.lines.iter().map(|l| l.to_string()).collect(),
        analytic: None,
        empirical: None,
        root_existence: None,
        eigen: None,
        compensation: None,
        pebs: None,
        events: Vec::new(),
        notes: Vec::new(),
    };
    if traj.baseline.is_none() {
        rep.notes.push("no post-fault equilibrium; detectors skipped".into());
        return Ok((rep, None));
    }
    let red = reduce_for_partition(traj, &part, &cut)?;
    let model = fit_cosine_analytic(&red, &traj.case, &part, &cut)?;
    rep.root_existence = Some(root_existence_check(&model));
    rep.eigen = Some(sep_eigen(&model));
    rep.analytic = Some(model);
    let tm = two_machine_decompose(traj, &part, &cut)?;
    match fit_cosine_empirical(&tm, s_gens) {
        Ok(m) => rep.empirical = Some(m),
        Err(e) => rep.notes.push(format!("empirical fit: {e}")),
    }
    rep.pebs = pebs_crossing(&tm);

    let name = cs.name.as_str();
    let mut events = Vec::new();
    events.extend(detect_eq6(traj, &part, &cut, cfg, name)?);
    events.extend(detect_eq7(traj, &part, &cut, cfg, name)?);
    events.extend(detect_eq15(&tm, cfg, name));
    events.extend(detect_cutset_only(&tm, cfg, name));
    if !cs.monitored.is_empty() {
        let comp = match cfg.compensation {
            CompensationSource::Analytic => Some(compute_compensation(&red, &traj.case, &cs.monitored, cfg.alpha_rule)?),
            CompensationSource::Configured { .. } => None,
        };
        match detect_strategy_a(&tm, &traj.case, &cs.monitored, comp.as_ref(), cfg, name) {
            Ok(ev) => events.extend(ev),
            Err(Error::InvalidCompensation(g)) => {
                rep.notes.push(format!("compensation invalid (phase gap {g:.4} rad); compensated detector skipped"))
            }
            Err(e) => return Err(e),
        }
        rep.compensation = comp;
    }
    rep.events = events;
    Ok((rep, Some(tm)))
}

/// Run every configured detector on every cutset.
pub fn run_suite(traj: &Trajectory, suite: &SuiteConfig) -> Result<DetectionReport> {
    suite.detector.validate()?;
    let mut cutsets = Vec::new();
    for cs in &suite.cutsets {
        cutsets.push(analyze_cutset(traj, &suite.s_gens, cs, &suite.detector)?.0);
    }
    assemble_report(traj, suite, cutsets)
}

/// Rank the analysed cutsets, order their events and derive the verdict.
pub fn assemble_report(traj: &Trajectory, suite: &SuiteConfig, cutsets: Vec<CutsetReport>) -> Result<DetectionReport> {
    let ranking = if traj.baseline.is_some() {
        let models: Vec<(String, CosineModel, usize)> = cutsets
            .iter()
            .zip(&suite.cutsets)
            .filter_map(|(r, c)| r.analytic.clone().map(|m| (r.name.clone(), m, c.lines.len())))
            .collect();
        rank_models(&models)?
    } else {
        Vec::new()
    };
    let mut events: Vec<DetectionEvent> = cutsets.iter().flat_map(|c| c.events.iter().cloned()).collect();
    events.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.detector.cmp(&b.detector)).then(a.cutset.cmp(&b.cutset)));
    let verdict = if !events.is_empty() {
        Verdict::UnstableDetected
    } else if traj.baseline.is_some() && traj.termination == Termination::Completed {
        Verdict::StableWithinHorizon
    } else {
        Verdict::Inconclusive
    };
    Ok(DetectionReport {
        verdict,
        termination: traj.termination,
        sep_error: traj.sep_error.clone(),
        config: suite.clone(),
        cutsets,
        ranking,
        events,
    })
}
