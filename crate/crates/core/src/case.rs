//! Static grid description and its JSON form.
//!
//! All electrical quantities are per unit on `base_mva`. Inertia constants
//! are `M_i = 2 H_i / omega_s` in s^2/rad on the system base, so that the
//! swing equation reads `M_i d(omega_i)/dt = P_mi - P_ei` with omega in rad/s.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    #[serde(default)]
    pub gs: f64,
    #[serde(default)]
    pub bs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    #[serde(default)]
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance.
    #[serde(default)]
    pub b: f64,
    /// Off-nominal tap on the `from` side; 1.0 for lines.
    #[serde(default = "one")]
    pub tap: f64,
}

fn one() -> f64 {
    1.0
}

impl Branch {
    pub fn name(&self) -> String {
        format!("{}_{}", self.from, self.to)
    }

    pub fn connects(&self, a: usize, b: usize) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }

    /// Two-port admittances `(y_ff, y_ft, y_tf, y_tt)` of the pi model.
    pub fn two_port(&self) -> (num_complex::Complex64, num_complex::Complex64, num_complex::Complex64, num_complex::Complex64) {
        use num_complex::Complex64 as C;
        let ys = C::new(1.0, 0.0) / C::new(self.r, self.x);
        let bc = C::new(0.0, self.b / 2.0);
        let t = self.tap;
        let y_tt = ys + bc;
        let y_ff = y_tt / (t * t);
        let y_ft = -ys / t;
        let y_tf = -ys / t;
        (y_ff, y_ft, y_tf, y_tt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    /// Inertia constant M_i [s^2/rad, system base].
    pub inertia: f64,
    /// Transient reactance x'_d [pu].
    pub xd_prime: f64,
    /// Scheduled mechanical power [pu]. Ignored for the slack unit, whose
    /// mechanical power is set from the solved power flow.
    pub p_mech: f64,
    /// Terminal voltage set point used by the power flow [pu].
    #[serde(default = "one")]
    pub v_set: f64,
    #[serde(default)]
    pub damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadModel {
    ConstantImpedance,
    ConstantPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
    pub model: LoadModel,
    /// Voltage below which a constant-power load is converted to an impedance.
    #[serde(default = "default_threshold")]
    pub v_threshold: f64,
}

fn default_threshold() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCase {
    #[serde(default)]
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

impl NetworkCase {
    pub fn from_json(text: &str) -> Result<Self> {
        let case: NetworkCase = serde_json::from_str(text)?;
        case.validate()?;
        Ok(case)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Canonical pretty JSON. Loading and re-saving this string is idempotent.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case serialization is infallible")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        hex::encode(digest)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for b in &self.buses {
            if !ids.insert(b.id) {
                return Err(Error::InvalidCase(format!("duplicate bus id {}", b.id)));
            }
        }
        for br in &self.branches {
            for id in [br.from, br.to] {
                if !ids.contains(&id) {
                    return Err(Error::UnknownBus(id));
                }
            }
            if br.from == br.to {
                return Err(Error::InvalidCase(format!("branch {} is a self loop", br.name())));
            }
            if !(br.x > 0.0) {
                return Err(Error::InvalidCase(format!("branch {} has x <= 0", br.name())));
            }
            if !(br.tap > 0.0) {
                return Err(Error::InvalidCase(format!("branch {} has tap <= 0", br.name())));
            }
        }
        if self.generators.len() < 2 {
            return Err(Error::InvalidCase("at least two generators are required".into()));
        }
        let mut gen_buses = BTreeSet::new();
        for g in &self.generators {
            if !ids.contains(&g.bus) {
                return Err(Error::UnknownBus(g.bus));
            }
            if !gen_buses.insert(g.bus) {
                return Err(Error::InvalidCase(format!("two generators on bus {}", g.bus)));
            }
            if !(g.inertia > 0.0) || !(g.xd_prime > 0.0) || !(g.v_set > 0.0) {
                return Err(Error::InvalidCase(format!(
                    "generator at bus {} needs positive inertia, x'd and voltage set point",
                    g.bus
                )));
            }
        }
        let mut load_buses = BTreeSet::new();
        for l in &self.loads {
            if !ids.contains(&l.bus) {
                return Err(Error::UnknownBus(l.bus));
            }
            if !load_buses.insert(l.bus) {
                return Err(Error::InvalidCase(format!("two loads on bus {}", l.bus)));
            }
        }
        Ok(())
    }

    pub fn bus_index(&self) -> BTreeMap<usize, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn bus_pos(&self, id: usize) -> Result<usize> {
        self.buses.iter().position(|b| b.id == id).ok_or(Error::UnknownBus(id))
    }

    pub fn branch_pos(&self, a: usize, b: usize) -> Result<usize> {
        self.branches
            .iter()
            .position(|br| br.connects(a, b))
            .ok_or(Error::UnknownBranch(a, b))
    }

    pub fn gen_pos(&self, bus: usize) -> Result<usize> {
        self.generators.iter().position(|g| g.bus == bus).ok_or(Error::UnknownBus(bus))
    }

    pub fn load_pos(&self, bus: usize) -> Option<usize> {
        self.loads.iter().position(|l| l.bus == bus)
    }

    pub fn total_inertia(&self) -> f64 {
        self.generators.iter().map(|g| g.inertia).sum()
    }

    /// Lossless variant: series resistance and shunt conductances removed,
    /// loads turned into pure reactances and mechanical powers shifted by an
    /// inertia-weighted amount so that they sum to zero.
    pub fn lossless_variant(&self) -> NetworkCase {
        let mut c = self.clone();
        c.name = format!("{} (lossless)", self.name);
        for b in &mut c.buses {
            b.gs = 0.0;
        }
        for br in &mut c.branches {
            br.r = 0.0;
        }
        for l in &mut c.loads {
            l.p = 0.0;
            l.model = LoadModel::ConstantImpedance;
        }
        let total_p: f64 = c.generators.iter().map(|g| g.p_mech).sum();
        let mt = c.total_inertia();
        for g in &mut c.generators {
            g.p_mech -= g.inertia / mt * total_p;
        }
        c
    }
}
