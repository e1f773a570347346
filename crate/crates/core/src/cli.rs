//! Command-line front end: manifests, run drivers and file output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::detect::{
    analyze_cutset, compute_compensation, estimate_l2, rank_models, split_for_trajectory, AlphaRule, DetectionReport,
    LoadCompensation, RankEntry, SuiteConfig,
};
use crate::energetics::{series_lpe, TwoMachineTrace};
use crate::error::{Error, Result};
use crate::simcore::{equilibrium, reduction_check, simulate, Scenario, Termination, Trajectory, TrajectoryMeta};
use crate::twomach::{
    fit_cosine_analytic, root_existence_check, reduce_for_partition, sep_eigen, CosineModel, RootExistenceVerdict,
    StabilityEigenResult,
};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const META_FILE: &str = "trajectory.meta.json";
pub const REPORT_FILE: &str = "report.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const SUMMARY_FILE: &str = "report.txt";

/// Number of random angle configurations of the reduction check.
pub const REDUCTION_CHECK_CONFIGS: usize = 100;

/// Plot-data files emitted by `detect`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Simulated and analytic `dP_C`, `dP_L2` against `delta`, per cutset.
    PowerAngle,
    /// Cutset and load power deviations against time, per cutset.
    PowerTime,
    /// Two-machine energy terms, per cutset.
    Energy,
    /// Partial-load estimate of `dP_L2`, per cutset with monitored loads.
    Compensation,
    /// Cutset LPE and total series-element LPE.
    Lpe,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::PowerAngle, Figure::PowerTime, Figure::Energy, Figure::Compensation, Figure::Lpe];

    pub fn stem(self) -> &'static str {
        match self {
            Figure::PowerAngle => "power_angle",
            Figure::PowerTime => "power_time",
            Figure::Energy => "energy",
            Figure::Compensation => "compensation",
            Figure::Lpe => "lpe",
        }
    }
}

fn all_figures() -> Vec<Figure> {
    Figure::ALL.to_vec()
}

/// One run: inputs, cluster and cutset definitions, detector settings and
/// outputs. Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub case: PathBuf,
    pub scenario: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Seed of the randomized reduction check run by `analyze`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "all_figures")]
    pub figures: Vec<Figure>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut m: RunManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        m.case = dir.join(&m.case);
        m.scenario = dir.join(&m.scenario);
        m.output_dir = m.output_dir.map(|o| dir.join(o));
        for p in [&m.case, &m.scenario] {
            if !p.exists() {
                return Err(Error::InvalidManifest(format!("{} does not exist", p.display())));
            }
        }
        Ok(m)
    }

    /// Check that every named cutset separates the post-fault network.
    pub fn validate(&self, case: &NetworkCase, scn: &Scenario) -> Result<()> {
        let Some(suite) = &self.suite else { return Ok(()) };
        suite.detector.validate()?;
        let eff = scn.apply(case)?;
        let tripped = scn.fault.tripped();
        let in_service: Vec<bool> =
            eff.branches.iter().map(|br| !tripped.iter().any(|t| br.connects(t.0, t.1))).collect();
        for cs in &suite.cutsets {
            crate::partition::split_by_cutset(&eff, &in_service, &suite.s_gens, &cs.lines)
                .map_err(|e| Error::InvalidManifest(format!("cutset {}: {e}", cs.name)))?;
        }
        Ok(())
    }
}

/// Case, scenario and suite of one run after flag overrides.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub name: String,
    pub case: NetworkCase,
    pub scenario: Scenario,
    pub suite: Option<SuiteConfig>,
    pub figures: Vec<Figure>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl RunInputs {
    pub fn from_manifest(path: &Path) -> Result<Self> {
        let m = RunManifest::load(path)?;
        let case = NetworkCase::load(&m.case)?;
        let scenario = Scenario::load(&m.scenario)?;
        m.validate(&case, &scenario)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let name = stem.strip_suffix(".manifest").unwrap_or(&stem).to_string();
        Ok(RunInputs {
            name,
            case,
            scenario,
            suite: m.suite,
            figures: m.figures,
            seed: m.seed,
            output_dir: m.output_dir,
        })
    }

    pub fn from_files(case: &Path, scenario: &Path) -> Result<Self> {
        let scenario_v = Scenario::load(scenario)?;
        Ok(RunInputs {
            name: scenario_v.name.clone(),
            case: NetworkCase::load(case)?,
            scenario: scenario_v,
            suite: None,
            figures: all_figures(),
            seed: None,
            output_dir: None,
        })
    }

    fn suite(&self) -> Result<&SuiteConfig> {
        self.suite.as_ref().ok_or_else(|| Error::InvalidManifest("no suite (cluster and cutsets) configured".into()))
    }
}

/// Write the trajectory CSV and its metadata.
pub fn write_trajectory(traj: &Trajectory, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(TRAJECTORY_FILE), traj.to_csv())?;
    std::fs::write(out.join(META_FILE), serde_json::to_string_pretty(&traj.meta())?)?;
    Ok(())
}

/// Load a trajectory written by [`write_trajectory`], checking that it was
/// produced from the same case.
pub fn read_trajectory(csv: &Path, inputs: &RunInputs) -> Result<Trajectory> {
    let meta_path = csv.with_file_name(META_FILE);
    let meta: TrajectoryMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
    let hash = inputs.case.hash();
    if meta.case_hash != hash {
        return Err(Error::CaseHashMismatch { trajectory: meta.case_hash, manifest: hash });
    }
    if meta.scenario != inputs.scenario {
        warn!("trajectory scenario differs from the configured one; using the trajectory's");
    }
    Trajectory::from_csv(&std::fs::read_to_string(csv)?, &inputs.case, &meta.scenario)
}

pub fn cmd_simulate(inputs: &RunInputs, out: &Path) -> Result<Trajectory> {
    let traj = simulate(&inputs.case, &inputs.scenario)?;
    info!("{}: {} samples, {:?}", inputs.name, traj.len(), traj.termination);
    write_trajectory(&traj, out)?;
    Ok(traj)
}

/// Run the detection suite on a trajectory (simulating when none is given),
/// then write the report JSON and the declared figure files.
pub fn cmd_detect(inputs: &RunInputs, trajectory: Option<&Path>, out: &Path) -> Result<DetectionReport> {
    let suite = inputs.suite()?;
    let traj = match trajectory {
        Some(p) => read_trajectory(p, inputs)?,
        None => simulate(&inputs.case, &inputs.scenario)?,
    };
    std::fs::create_dir_all(out)?;
    let mut traces = Vec::new();
    let mut cutsets = Vec::new();
    for cs in &suite.cutsets {
        let (rep, tm) = analyze_cutset(&traj, &suite.s_gens, cs, &suite.detector)?;
        cutsets.push(rep);
        traces.push(tm);
    }
    let report = crate::detect::assemble_report(&traj, suite, cutsets)?;
    std::fs::write(out.join(REPORT_FILE), report.to_json())?;
    write_figures(&traj, suite, &report, &traces, &inputs.figures, out)?;
    Ok(report)
}

fn write_figures(
    traj: &Trajectory,
    suite: &SuiteConfig,
    report: &DetectionReport,
    traces: &[Option<TwoMachineTrace>],
    figures: &[Figure],
    out: &Path,
) -> Result<()> {
    for &fig in figures {
        let mut written = 0;
        for ((cs, rep), tm) in suite.cutsets.iter().zip(&report.cutsets).zip(traces) {
            let Some(tm) = tm else { continue };
            let text = match fig {
                Figure::PowerAngle => rep.analytic.as_ref().map(|m| power_angle_csv(tm, m)),
                Figure::PowerTime => Some(power_time_csv(tm)),
                Figure::Energy => Some(tm.to_csv()),
                Figure::Compensation => match &rep.compensation {
                    Some(c) => Some(compensation_csv(tm, &estimate_l2(tm, &traj.case, &cs.monitored, c.alpha)?)),
                    None => None,
                },
                Figure::Lpe => None,
            };
            if let Some(text) = text {
                std::fs::write(out.join(format!("{}_{}.csv", fig.stem(), cs.name)), text)?;
                written += 1;
            }
        }
        if fig == Figure::Lpe && traj.baseline.is_some() {
            std::fs::write(out.join("lpe.csv"), lpe_csv(traj, suite)?)?;
            written += 1;
        }
        if written == 0 {
            return Err(Error::InvalidManifest(format!("figure {} could not be produced for this run", fig.stem())));
        }
    }
    Ok(())
}

fn post_fault_rows(tm: &TwoMachineTrace) -> std::ops::Range<usize> {
    tm.t0_index..tm.len()
}

fn power_angle_csv(tm: &TwoMachineTrace, m: &CosineModel) -> String {
    let mut s = String::from("t,delta,dp_c,dp_l2,dp_c_model,dp_l2_model\n");
    for k in post_fault_rows(tm) {
        let d = tm.delta[k];
        writeln!(s, "{},{},{},{},{},{}", tm.t[k], d, tm.dp_c[k], tm.dp_l2[k], m.c.eval(d), m.l2.eval(d)).expect("write to string");
    }
    s
}

fn power_time_csv(tm: &TwoMachineTrace) -> String {
    let mut s = String::from("t,delta,dp_c,dp_ls,dp_la,dp_l2,dp_c_plus_dp_l2\n");
    for k in post_fault_rows(tm) {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            tm.t[k],
            tm.delta[k],
            tm.dp_c[k],
            tm.dp_ls[k],
            tm.dp_la[k],
            tm.dp_l2[k],
            tm.dp_c[k] + tm.dp_l2[k]
        )
        .expect("write to string");
    }
    s
}

fn compensation_csv(tm: &TwoMachineTrace, est: &[f64]) -> String {
    let mut s = String::from("t,delta,dp_c,dp_l2,dp_l2_estimate,dp_c_plus_dp_l2,dp_c_plus_estimate\n");
    for k in post_fault_rows(tm) {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            tm.t[k],
            tm.delta[k],
            tm.dp_c[k],
            tm.dp_l2[k],
            est[k],
            tm.dp_c[k] + tm.dp_l2[k],
            tm.dp_c[k] + est[k]
        )
        .expect("write to string");
    }
    s
}

fn lpe_csv(traj: &Trajectory, suite: &SuiteConfig) -> Result<String> {
    let sl = series_lpe(traj)?;
    let mut cols = Vec::new();
    for cs in &suite.cutsets {
        let (_, cut) = split_for_trajectory(traj, &suite.s_gens, &cs.lines)?;
        let pos: Vec<usize> = cut.positions(&traj.case)?.iter().map(|p| p.0).collect();
        cols.push((cs.name.clone(), sl.branches(&pos)));
    }
    let mut s = String::from("t,total_series");
    for (name, _) in &cols {
        write!(s, ",lpe_{name}").expect("write to string");
    }
    s.push('\n');
    for k in traj.clearing_index()..sl.t.len() {
        write!(s, "{},{}", sl.t[k], sl.total[k]).expect("write to string");
        for (_, c) in &cols {
            write!(s, ",{}", c[k]).expect("write to string");
        }
        s.push('\n');
    }
    Ok(s)
}

/// Analytic products of one cutset about the post-fault equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutsetAnalysis {
    pub name: String,
    pub lines: Vec<String>,
    pub model: CosineModel,
    pub root_existence: RootExistenceVerdict,
    pub eigen: StabilityEigenResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensation: Option<LoadCompensation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub case_hash: String,
    pub scenario: String,
    pub cutsets: Vec<CutsetAnalysis>,
    pub ranking: Vec<RankEntry>,
    /// Largest reduced-vs-full load voltage difference [pu], when a seed is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_check: Option<f64>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Analytic cosine models, root-existence verdicts, SEP eigenvalues and the
/// cutset ranking, without integrating the trajectory.
pub fn cmd_analyze(inputs: &RunInputs, out: &Path) -> Result<AnalysisReport> {
    let suite = inputs.suite()?;
    let traj = equilibrium(&inputs.case, &inputs.scenario)?;
    if let Some(e) = &traj.sep_error {
        return Err(Error::NoPostFaultSEP(e.clone()));
    }
    let mut cutsets = Vec::new();
    for cs in &suite.cutsets {
        let (part, cut) = split_for_trajectory(&traj, &suite.s_gens, &cs.lines)?;
        let red = reduce_for_partition(&traj, &part, &cut)?;
        let model = fit_cosine_analytic(&red, &traj.case, &part, &cut)?;
        let compensation = if cs.monitored.is_empty() {
            None
        } else {
            Some(compute_compensation(&red, &traj.case, &cs.monitored, suite.detector.alpha_rule)?)
        };
        cutsets.push(CutsetAnalysis {
            name: cs.name.clone(),
            lines: cs.lines.iter().map(|l| l.to_string()).collect(),
            root_existence: root_existence_check(&model),
            eigen: sep_eigen(&model),
            model,
            compensation,
        });
    }
    let models: Vec<(String, CosineModel, usize)> =
        cutsets.iter().zip(&suite.cutsets).map(|(a, c)| (a.name.clone(), a.model.clone(), c.lines.len())).collect();
    let ranking = rank_models(&models)?;
    let reduction_check = match inputs.seed {
        Some(seed) => Some(reduction_check(&traj, seed, REDUCTION_CHECK_CONFIGS)?),
        None => None,
    };
    let rep = AnalysisReport {
        case_hash: inputs.case.hash(),
        scenario: inputs.scenario.name.clone(),
        cutsets,
        ranking,
        reduction_check,
    };
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(ANALYSIS_FILE), rep.to_json())?;
    Ok(rep)
}

/// Human-readable summary of the reports found in an output directory.
pub fn cmd_report(out: &Path) -> Result<String> {
    let mut s = String::new();
    let det = out.join(REPORT_FILE);
    let ana = out.join(ANALYSIS_FILE);
    if !det.exists() && !ana.exists() {
        return Err(Error::InvalidManifest(format!("no {REPORT_FILE} or {ANALYSIS_FILE} in {}", out.display())));
    }
    if det.exists() {
        let r: DetectionReport = serde_json::from_str(&std::fs::read_to_string(&det)?)?;
        summarize_detection(&mut s, &r);
    }
    if ana.exists() {
        let r: AnalysisReport = serde_json::from_str(&std::fs::read_to_string(&ana)?)?;
        summarize_analysis(&mut s, &r);
    }
    std::fs::write(out.join(SUMMARY_FILE), &s)?;
    Ok(s)
}

fn rad_deg(x: f64) -> String {
    format!("{x:.4} rad ({:.2} deg)", x.to_degrees())
}

fn summarize_model(s: &mut String, m: &CosineModel) {
    writeln!(s, "    gamma_C  = {}, P_Cmax = {:.4}", rad_deg(m.c.gamma), m.c.p_max).expect("write to string");
    writeln!(s, "    gamma_L2 = {}, P_L2max = {:.4}", rad_deg(m.l2.gamma), m.l2.p_max).expect("write to string");
    writeln!(s, "    lag      = {}", rad_deg(m.lag())).expect("write to string");
}

fn summarize_detection(s: &mut String, r: &DetectionReport) {
    let term = match r.termination {
        Termination::Completed => "completed".to_string(),
        Termination::RotorRunaway { t } => format!("rotor runaway at {t:.3} s"),
    };
    writeln!(s, "verdict: {:?} (exit {}), run {term}", r.verdict, r.verdict.exit_code()).expect("write to string");
    if let Some(e) = &r.sep_error {
        writeln!(s, "no post-fault equilibrium: {e}").expect("write to string");
    }
    for c in &r.cutsets {
        writeln!(s, "cutset {} [{}]", c.name, c.lines.join(", ")).expect("write to string");
        if let Some(m) = &c.analytic {
            writeln!(s, "  analytic model:").expect("write to string");
            summarize_model(s, m);
        }
        if let Some(m) = &c.empirical {
            writeln!(s, "  trajectory fit:").expect("write to string");
            summarize_model(s, m);
        }
        if let Some(p) = &c.root_existence {
            writeln!(s, "  root on (0, -2 gamma_C): {}", if p.holds { "holds".to_string() } else { format!("fails ({:?})", p.failed) })
                .expect("write to string");
        }
        if let Some(k) = &c.compensation {
            writeln!(
                s,
                "  compensation: alpha = {:.4} (alpha1 {:.4}, alpha2 {:.4}), phase gap {:.4} rad, {}",
                k.alpha,
                k.alpha1,
                k.alpha2,
                (k.gamma_ls_n - k.gamma_ls).abs(),
                if k.valid { "valid" } else { "invalid" }
            )
            .expect("write to string");
        }
        for e in &c.events {
            writeln!(s, "  event {:?} at t = {:.4} s, delta = {}", e.detector, e.t, rad_deg(e.delta)).expect("write to string");
        }
        for n in &c.notes {
            writeln!(s, "  note: {n}").expect("write to string");
        }
    }
    if !r.ranking.is_empty() {
        let names: Vec<String> = r.ranking.iter().map(|e| format!("{} ({:.4})", e.cutset, e.p_l2max)).collect();
        writeln!(s, "ranking by P_L2max: {}", names.join(" < ")).expect("write to string");
    }
}

fn summarize_analysis(s: &mut String, r: &AnalysisReport) {
    writeln!(s, "analysis of {} (case {})", r.scenario, &r.case_hash[..12.min(r.case_hash.len())]).expect("write to string");
    for c in &r.cutsets {
        writeln!(s, "cutset {} [{}]", c.name, c.lines.join(", ")).expect("write to string");
        summarize_model(s, &c.model);
        writeln!(s, "    root on (0, -2 gamma_C): {}", if c.root_existence.holds { "holds" } else { "fails" }).expect("write to string");
        let [l1, l2] = c.eigen.lambda;
        writeln!(s, "    SEP eigenvalues: {:.4}{:+.4}j, {:.4}{:+.4}j ({:?})", l1.re, l1.im, l2.re, l2.im, c.eigen.verdict)
            .expect("write to string");
    }
    let names: Vec<String> = r.ranking.iter().map(|e| format!("{} ({:.4})", e.cutset, e.p_l2max)).collect();
    writeln!(s, "ranking by P_L2max: {}", names.join(" < ")).expect("write to string");
    if let Some(x) = r.reduction_check {
        writeln!(s, "reduction check: max load-voltage difference {x:.3e} pu").expect("write to string");
    }
}

#[derive(Debug, Parser)]
#[command(name = "oos", version, about = "Transient simulation and LPE-based out-of-step detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario and write the trajectory CSV and metadata.
    Simulate(RunArgs),
    /// Run the detection suite and write the report and figure data.
    Detect {
        #[command(flatten)]
        run: RunArgs,
        /// Previously written trajectory CSV; simulated when omitted.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Analytic cutset models and ranking about the post-fault equilibrium.
    Analyze(RunArgs),
    /// Print a readable summary of the reports in an output directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphaRuleArg {
    Min,
    Max,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run manifest; repeat to run several manifests concurrently.
    #[arg(long)]
    pub manifest: Vec<PathBuf>,
    /// Case file (overrides the manifest's).
    #[arg(long)]
    pub case: Option<PathBuf>,
    /// Scenario file (overrides the manifest's).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Integration step [s].
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub alpha_rule: Option<AlphaRuleArg>,
}

impl RunArgs {
    /// Resolved inputs and output directory of every requested run.
    pub fn resolve(&self) -> Result<Vec<(RunInputs, PathBuf)>> {
        let mut runs = Vec::new();
        if self.manifest.is_empty() {
            let (Some(c), Some(s)) = (&self.case, &self.scenario) else {
                return Err(Error::InvalidManifest("give --manifest, or both --case and --scenario".into()));
            };
            runs.push(RunInputs::from_files(c, s)?);
        } else {
            for m in &self.manifest {
                let mut r = RunInputs::from_manifest(m)?;
                if let Some(c) = &self.case {
                    r.case = NetworkCase::load(c)?;
                }
                if let Some(s) = &self.scenario {
                    r.scenario = Scenario::load(s)?;
                }
                runs.push(r);
            }
        }
        let many = runs.len() > 1;
        let mut out = Vec::new();
        for mut r in runs {
            if let Some(dt) = self.dt {
                r.scenario.dt = dt;
                r.scenario.validate()?;
            }
            if let (Some(rule), Some(suite)) = (self.alpha_rule, r.suite.as_mut()) {
                suite.detector.alpha_rule = match rule {
                    AlphaRuleArg::Min => AlphaRule::Min,
                    AlphaRuleArg::Max => AlphaRule::Max,
                };
            }
            let dir = match (&self.out, &r.output_dir) {
                (Some(o), _) if many => o.join(&r.name),
                (Some(o), _) => o.clone(),
                (None, Some(o)) => o.clone(),
                (None, None) => PathBuf::from("out").join(&r.name),
            };
            out.push((r, dir));
        }
        Ok(out)
    }
}

/// Combined exit code of several runs: errors first, then instability,
/// then inconclusive runs.
fn combine(codes: &[i32]) -> i32 {
    [1, 2, 3].into_iter().find(|c| codes.contains(c)).unwrap_or(0)
}

/// Run one of the batch subcommands on every resolved input concurrently.
fn batch<F>(runs: Vec<(RunInputs, PathBuf)>, f: F) -> i32
where
    F: Fn(&RunInputs, &Path) -> Result<i32> + Sync,
{
    let codes: Vec<i32> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(inp, dir)| {
                let f = &f;
                scope.spawn(move || match f(inp, dir) {
                    Ok(code) => code,
                    Err(e) => {
                        eprintln!("{}: {e}", inp.name);
                        1
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or(1)).collect()
    });
    combine(&codes)
}

/// Execute a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    let resolved = |args: &RunArgs| match args.resolve() {
        Ok(r) => Some(r),
        Err(e) => {
            eprintln!("{e}");
            None
        }
    };
    match cli.command {
        Command::Simulate(args) => {
            let Some(runs) = resolved(&args) else { return 1 };
            batch(runs, |inp, dir| {
                let traj = cmd_simulate(inp, dir)?;
                println!("{}: {} samples, {:?} -> {}", inp.name, traj.len(), traj.termination, dir.display());
                Ok(0)
            })
        }
        Command::Detect { run, trajectory } => {
            let Some(runs) = resolved(&run) else { return 1 };
            if trajectory.is_some() && runs.len() > 1 {
                eprintln!("--trajectory applies to a single manifest");
                return 1;
            }
            batch(runs, |inp, dir| {
                let rep = cmd_detect(inp, trajectory.as_deref(), dir)?;
                let first = rep.events.first().map(|e| format!(", first event {:?} on {} at {:.4} s", e.detector, e.cutset, e.t));
                println!("{}: {:?}{} -> {}", inp.name, rep.verdict, first.unwrap_or_default(), dir.display());
                Ok(rep.verdict.exit_code())
            })
        }
        Command::Analyze(args) => {
            let Some(runs) = resolved(&args) else { return 1 };
            batch(runs, |inp, dir| {
                let rep = cmd_analyze(inp, dir)?;
                let mut s = String::new();
                summarize_analysis(&mut s, &rep);
                print!("{s}");
                Ok(0)
            })
        }
        Command::Report { out } => match cmd_report(&out) {
            Ok(s) => {
                print!("{s}");
                0
            }
            Err(e) => {
                eprintln!("{e}");
                1
            }
        },
    }
}
