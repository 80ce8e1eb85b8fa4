// SPDX-License-Identifier: Apache-2.0

//! Scenario description shared by the library runners and the CLI.

use serde::{Deserialize, Serialize};

use crate::decoherence::{DEFAULT_BATH_MODES, DEFAULT_CUTOFF};
use crate::dynamics::{RampKind, RampSchedule, TimeGrid, DEFAULT_DT};
use crate::entanglement::LogBase;
use crate::error::{Error, Result};
use crate::lattice::ChainSpec;
use crate::units::PhysicalParams;

pub const DEFAULT_DT_SAMPLE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Quench,
    RampScan,
    Decohere,
    Channel,
    Falloff,
    Calibrate,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Quench => "quench",
            ScenarioKind::RampScan => "ramp_scan",
            ScenarioKind::Decohere => "decohere",
            ScenarioKind::Channel => "channel",
            ScenarioKind::Falloff => "falloff",
            ScenarioKind::Calibrate => "calibrate",
        }
    }

    /// Horizon used when `time.t_end` is absent. For ramp scans it is
    /// counted from the end of the ramp.
    pub fn default_horizon(self) -> f64 {
        match self {
            ScenarioKind::Quench | ScenarioKind::Decohere => 40.0,
            ScenarioKind::RampScan => 60.0,
            ScenarioKind::Channel => 80.0,
            ScenarioKind::Falloff => 200.0,
            ScenarioKind::Calibrate => 0.0,
        }
    }

    fn needs_bath(self) -> bool {
        matches!(self, ScenarioKind::Decohere | ScenarioKind::Calibrate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampConfig {
    pub kind: RampKind,
    #[serde(default)]
    pub duration: f64,
}

/// Bath section. `coupling` gives `ζ` directly; otherwise it is calibrated
/// from a Q factor (here or in `[physical]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    #[serde(default = "default_modes")]
    pub modes_per_oscillator: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_factor: Option<f64>,
    /// Dimensionless temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

fn default_modes() -> usize {
    DEFAULT_BATH_MODES
}

fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF
}

impl Default for BathConfig {
    fn default() -> Self {
        BathConfig {
            modes_per_oscillator: DEFAULT_BATH_MODES,
            cutoff: DEFAULT_CUTOFF,
            coupling: None,
            q_factor: None,
            temperature: None,
        }
    }
}

/// Tracked pair, 1-based as in the CLI and config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackedConfig {
    pub sites: [usize; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_sample: Option<f64>,
    /// RK4 step for ramped evolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampScanConfig {
    pub durations: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default = "default_squeezing")]
    pub squeezing: f64,
}

fn default_squeezing() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FalloffConfig {
    pub distances: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default)]
    pub log_base: LogBase,
}

fn default_out_dir() -> String {
    "runs".to_string()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out_dir(), log_base: LogBase::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracked: Option<TrackedConfig>,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_scan: Option<RampScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub falloff: Option<FalloffConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

/// Re-labels parameter errors as config errors at the matching field path.
fn at(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let field = name.rsplit('.').next().unwrap_or(name);
            config_err(&format!("{prefix}.{field}"), reason)
        }
        other => other,
    }
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind) -> Self {
        ScenarioConfig {
            kind,
            chain: None,
            ramp: None,
            bath: None,
            physical: None,
            tracked: None,
            time: TimeConfig::default(),
            ramp_scan: None,
            channel: None,
            falloff: None,
            output: OutputConfig::default(),
        }
    }

    pub fn chain(&self) -> Result<&ChainSpec> {
        self.chain.as_ref().ok_or_else(|| config_err("chain", "missing section"))
    }

    /// Zero-based tracked pair.
    pub fn tracked_pair(&self) -> Result<[usize; 2]> {
        let t = self.tracked.ok_or_else(|| config_err("tracked", "missing section"))?;
        Ok([t.sites[0] - 1, t.sites[1] - 1])
    }

    pub fn horizon(&self) -> f64 {
        self.time.t_end.unwrap_or_else(|| self.kind.default_horizon())
    }

    pub fn dt_sample(&self) -> f64 {
        self.time.dt_sample.unwrap_or(DEFAULT_DT_SAMPLE)
    }

    pub fn dt(&self) -> f64 {
        self.time.dt.unwrap_or(DEFAULT_DT)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon(), self.dt_sample()).map_err(|e| at("time", e))
    }

    pub fn ramp_schedule(&self) -> Result<RampSchedule> {
        let c = self.chain()?.coupling;
        match self.ramp {
            None => RampSchedule::sudden(c),
            Some(r) => RampSchedule::new(r.kind, r.duration, c),
        }
        .map_err(|e| at("ramp", e))
    }

    pub fn squeezing(&self) -> f64 {
        self.channel.map_or_else(default_squeezing, |c| c.squeezing)
    }

    pub fn ramp_durations(&self) -> Vec<f64> {
        match &self.ramp_scan {
            Some(s) => s.durations.clone(),
            None => vec![0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0, 10.0, 20.0],
        }
    }

    pub fn falloff_distances(&self) -> Vec<usize> {
        match &self.falloff {
            Some(f) => f.distances.clone(),
            None => (1..=32).collect(),
        }
    }

    /// Q factor driving the calibration, if any.
    pub fn q_factor(&self) -> Option<f64> {
        self.bath.and_then(|b| b.q_factor).or(self.physical.map(|p| p.q_factor))
    }

    /// Checks every invariant that does not require running the physics.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind;
        if kind != ScenarioKind::Calibrate {
            let chain = self.chain()?;
            chain.validate().map_err(|e| at("chain", e))?;
        }

        let t = &self.time;
        for (field, v) in [("time.t_end", t.t_end), ("time.dt_sample", t.dt_sample), ("time.dt", t.dt)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(config_err(field, format!("must be finite and > 0, got {v}")));
                }
            }
        }
        if kind != ScenarioKind::Calibrate {
            self.time_grid()?;
        }

        if let Some(r) = self.ramp {
            if kind != ScenarioKind::Quench {
                return Err(config_err("ramp", format!("not used by `{}` scenarios", kind.label())));
            }
            self.ramp_schedule()?;
            if !(r.duration >= 0.0) {
                return Err(config_err("ramp.duration", "must be >= 0"));
            }
        }

        match (kind.needs_bath(), self.bath.is_some()) {
            (true, false) => return Err(config_err("bath", format!("required by `{}` scenarios", kind.label()))),
            (false, true) => return Err(config_err("bath", format!("not used by `{}` scenarios", kind.label()))),
            _ => {}
        }
        if let Some(p) = &self.physical {
            p.validate().map_err(|e| at("physical", e))?;
        }
        if let Some(b) = &self.bath {
            self.validate_bath(b)?;
        }

        match kind {
            ScenarioKind::Quench | ScenarioKind::Decohere => {
                let chain = self.chain()?;
                let tr = self.tracked.ok_or_else(|| config_err("tracked", "missing section"))?;
                for s in tr.sites {
                    if s == 0 || s > chain.n_sites {
                        return Err(config_err("tracked.sites", format!("site {s} outside 1..={}", chain.n_sites)));
                    }
                }
                if tr.sites[0] == tr.sites[1] {
                    return Err(config_err("tracked.sites", "sites must differ"));
                }
            }
            _ => {
                if self.tracked.is_some() {
                    return Err(config_err("tracked", format!("not used by `{}` scenarios", kind.label())));
                }
            }
        }

        self.check_section("ramp_scan", self.ramp_scan.is_some(), ScenarioKind::RampScan)?;
        self.check_section("channel", self.channel.is_some(), ScenarioKind::Channel)?;
        self.check_section("falloff", self.falloff.is_some(), ScenarioKind::Falloff)?;

        if kind == ScenarioKind::RampScan {
            let durations = self.ramp_durations();
            if durations.is_empty() {
                return Err(config_err("ramp_scan.durations", "must not be empty"));
            }
            if let Some(d) = durations.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
                return Err(config_err("ramp_scan.durations", format!("durations must be finite and >= 0, got {d}")));
            }
        }
        if kind == ScenarioKind::Channel {
            let r = self.squeezing();
            if !(r >= 0.0 && r.is_finite()) {
                return Err(config_err("channel.squeezing", format!("must be finite and >= 0, got {r}")));
            }
        }
        if kind == ScenarioKind::Falloff {
            let chain = self.chain()?;
            let distances = self.falloff_distances();
            if distances.is_empty() {
                return Err(config_err("falloff.distances", "must not be empty"));
            }
            let limit = chain.n_sites / 2;
            if let Some(d) = distances.iter().find(|&&d| d == 0 || d > limit) {
                return Err(config_err("falloff.distances", format!("distance {d} outside 1..={limit}")));
            }
        }
        Ok(())
    }

    fn check_section(&self, name: &str, present: bool, owner: ScenarioKind) -> Result<()> {
        if present && self.kind != owner {
            return Err(config_err(name, format!("not used by `{}` scenarios", self.kind.label())));
        }
        Ok(())
    }

    fn validate_bath(&self, b: &BathConfig) -> Result<()> {
        if b.modes_per_oscillator == 0 {
            return Err(config_err("bath.modes_per_oscillator", "must be >= 1"));
        }
        if !(b.cutoff > 0.0 && b.cutoff.is_finite()) {
            return Err(config_err("bath.cutoff", format!("must be finite and > 0, got {}", b.cutoff)));
        }
        if let Some(z) = b.coupling {
            if !(z >= 0.0 && z.is_finite()) {
                return Err(config_err("bath.coupling", format!("must be finite and >= 0, got {z}")));
            }
        }
        if let Some(q) = b.q_factor {
            if !(q > 0.0) {
                return Err(config_err("bath.q_factor", format!("must be > 0, got {q}")));
            }
        }
        if let Some(t) = b.temperature {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(config_err("bath.temperature", format!("must be finite and >= 0, got {t}")));
            }
        }

        let q_sources = b.q_factor.is_some() as u8 + self.physical.is_some() as u8;
        if b.coupling.is_some() && q_sources > 0 {
            return Err(config_err("bath.coupling", "give either a coupling or a Q factor, not both"));
        }
        if q_sources > 1 {
            return Err(config_err("bath.q_factor", "Q factor given both here and in [physical]"));
        }
        if self.kind == ScenarioKind::Calibrate {
            if q_sources == 0 {
                return Err(config_err("bath.q_factor", "calibration needs a Q factor"));
            }
            return Ok(());
        }
        if b.coupling.is_none() && q_sources == 0 {
            return Err(config_err("bath", "needs `coupling`, `q_factor` or a [physical] section"));
        }
        match (b.temperature.is_some(), self.physical.is_some()) {
            (true, true) => Err(config_err("bath.temperature", "temperature given both here and in [physical]")),
            (false, false) => Err(config_err("bath.temperature", "missing (or give a [physical] section)")),
            _ => Ok(()),
        }
    }
}
