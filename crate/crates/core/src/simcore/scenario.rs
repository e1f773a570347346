use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::case::{LoadModel, NetworkCase};
use crate::error::{Error, Result};
use crate::netmodel::admittance::FaultSpec;
use crate::simcore::network::DEFAULT_HYSTERESIS;

fn default_dt() -> f64 {
    1e-3
}

fn default_hysteresis() -> f64 {
    DEFAULT_HYSTERESIS
}

/// Replacement values for one load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadOverride {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<LoadModel>,
}

/// One disturbance run: fault, timing, integration settings and the
/// operating-point adjustments applied to the case before the power flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    /// Path of the case file, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub fault: FaultSpec,
    pub fault_start: f64,
    pub fault_duration: f64,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub slack_bus: usize,
    /// Overrides the conversion threshold of every constant-power load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_threshold: Option<f64>,
    #[serde(default = "default_hysteresis")]
    pub hysteresis: f64,
    /// Generator bus -> scheduled mechanical power [pu].
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dispatch: BTreeMap<usize, f64>,
    /// Generator bus -> terminal voltage set point [pu].
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub voltage_setpoints: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub load_overrides: Vec<LoadOverride>,
    /// Run on the lossless variant of the case.
    #[serde(default)]
    pub lossless: bool,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization is infallible")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidScenario("step size must be positive".into()));
        }
        if !(self.fault_duration >= 0.0) || !(self.fault_start >= 0.0) {
            return Err(Error::InvalidScenario("fault start and duration must be non-negative".into()));
        }
        if !(self.t_end > self.fault_start + self.fault_duration) {
            return Err(Error::InvalidScenario("simulation must end after the fault is cleared".into()));
        }
        if !(self.fault.admittance > 0.0) {
            return Err(Error::InvalidScenario("fault admittance must be positive".into()));
        }
        Ok(())
    }

    /// Step indices of fault inception, fault clearing and the final sample,
    /// snapped to the integration grid.
    pub fn step_grid(&self) -> (usize, usize, usize) {
        let on = (self.fault_start / self.dt).round() as usize;
        let off = ((self.fault_start + self.fault_duration) / self.dt).round() as usize;
        let end = (self.t_end / self.dt).round() as usize;
        (on, off.max(on), end.max(off + 1))
    }

    /// Case with the scenario's dispatch and load adjustments applied.
    pub fn apply(&self, case: &NetworkCase) -> Result<NetworkCase> {
        let mut c = case.clone();
        for (&bus, &p) in &self.dispatch {
            let k = c.gen_pos(bus)?;
            c.generators[k].p_mech = p;
        }
        for (&bus, &v) in &self.voltage_setpoints {
            let k = c.gen_pos(bus)?;
            c.generators[k].v_set = v;
        }
        for o in &self.load_overrides {
            let k = c.load_pos(o.bus).ok_or(Error::UnknownBus(o.bus))?;
            c.loads[k].p = o.p;
            c.loads[k].q = o.q;
            if let Some(m) = o.model {
                c.loads[k].model = m;
            }
        }
        if let Some(th) = self.load_threshold {
            for l in &mut c.loads {
                l.v_threshold = th;
            }
        }
        if self.lossless {
            c = c.lossless_variant();
        }
        c.validate()?;
        Ok(c)
    }
}
