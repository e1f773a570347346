use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("unknown bus id {0}")]
    UnknownBus(usize),

    #[error("unknown branch {0}-{1}")]
    UnknownBranch(usize, usize),

    #[error("generator buses {0:?} are not connected to the rest of the network")]
    IslandedGenerator(Vec<usize>),

    #[error("power flow diverged after {iterations} iterations (max mismatch {mismatch:.3e} pu)")]
    PowerFlowDiverged { iterations: usize, mismatch: f64 },

    #[error("no post-fault stable equilibrium: {0}")]
    NoPostFaultSEP(String),

    #[error("singular network matrix during reduction")]
    SingularReduction,

    #[error("cutset does not separate the partition: {0}")]
    NotASeparator(String),

    #[error("network solve did not converge; offending buses {buses:?}")]
    NetworkSolveDiverged { buses: Vec<usize> },

    #[error("rotor runaway at t = {t:.4} s")]
    RotorRunaway { t: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("trajectory carries no steady baseline")]
    NoBaseline,

    #[error("extremum not reached in {0}")]
    InsufficientSwing(String),

    #[error("monitored load set invalid: {0}")]
    InvalidLoadSet(String),

    #[error("compensation flagged invalid (|gamma_LS,N - gamma_LS| = {0:.4} rad)")]
    InvalidCompensation(f64),

    #[error("candidates use different partitions")]
    MixedPartitions,

    #[error("case hash mismatch: trajectory {trajectory}, manifest {manifest}")]
    CaseHashMismatch { trajectory: String, manifest: String },

    #[error("malformed trajectory file: {0}")]
    MalformedTrajectory(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
