//! JSON documents: scenario files, run configuration and plan results.
//!
//! Every section rejects unknown keys. Power and noise may be given either
//! linearly (`_w`, `_w_per_hz`) or in dBm (`_dbm`, `_dbm_per_hz`), antenna
//! gains in dBi or linear, attenuations in dB or linear; giving both forms of
//! the same quantity is an error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::units::{db_to_linear, dbm_to_watts};
use crate::channel::{ChannelParams, Point3, DEFAULT_CHANNEL_WIDTH_HZ};
use crate::coverage::{CandidateZone, FeasibleBox};
use crate::planner::{Deployment, ValidationReport};
use crate::positioning::SwarmConfig;
use crate::scenario::{BandwidthPolicy, Scenario, ThroughputReport, UserEquipment, DEFAULT_B_MAX_HZ};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_frequency_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_antenna_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_antenna_gain_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_antenna_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_antenna_gain_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_psd_w_per_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_psd_dbm_per_hz: Option<f64>,
    /// Noise power over one 20 MHz channel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_floor_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_los: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_los_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_nlos: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_nlos_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub los_threshold: Option<f64>,
}

fn pick(name: &str, linear: Option<f64>, log: Option<f64>, convert: fn(f64) -> f64) -> Result<Option<f64>, DocumentError> {
    match (linear, log) {
        (Some(_), Some(_)) => Err(DocumentError::Invalid(format!("channel.{name}: give one unit form, not both"))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(convert(v))),
        (None, None) => Ok(None),
    }
}

impl ChannelSection {
    /// Linear form of `params`, exact on re-read.
    pub fn from_params(p: &ChannelParams) -> Self {
        Self {
            carrier_frequency_hz: Some(p.carrier_frequency),
            tx_power_w: Some(p.tx_power),
            tx_antenna_gain: Some(p.tx_antenna_gain),
            rx_antenna_gain: Some(p.rx_antenna_gain),
            noise_psd_w_per_hz: Some(p.noise_spectral_density),
            c1: Some(p.c1),
            c2: Some(p.c2),
            mu_los: Some(p.mu_los),
            mu_nlos: Some(p.mu_nlos),
            los_threshold: Some(p.los_threshold),
            ..Default::default()
        }
    }

    /// Apply the keys present here on top of `base`.
    pub fn apply(&self, base: &ChannelParams) -> Result<ChannelParams, DocumentError> {
        let mut p = *base;
        if let Some(v) = self.carrier_frequency_hz {
            p.carrier_frequency = v;
        }
        if let Some(v) = pick("tx_power", self.tx_power_w, self.tx_power_dbm, dbm_to_watts)? {
            p.tx_power = v;
        }
        if let Some(v) = pick("tx_antenna_gain", self.tx_antenna_gain, self.tx_antenna_gain_dbi, db_to_linear)? {
            p.tx_antenna_gain = v;
        }
        if let Some(v) = pick("rx_antenna_gain", self.rx_antenna_gain, self.rx_antenna_gain_dbi, db_to_linear)? {
            p.rx_antenna_gain = v;
        }
        let floor = self.noise_floor_dbm.map(|dbm| dbm_to_watts(dbm) / DEFAULT_CHANNEL_WIDTH_HZ);
        let forms = [self.noise_psd_w_per_hz, self.noise_psd_dbm_per_hz.map(dbm_to_watts), floor];
        match forms.iter().flatten().collect::<Vec<_>>()[..] {
            [] => {}
            [v] => p.noise_spectral_density = *v,
            _ => return Err(DocumentError::Invalid("channel.noise: give exactly one of the noise keys".into())),
        }
        if let Some(v) = self.c1 {
            p.c1 = v;
        }
        if let Some(v) = self.c2 {
            p.c2 = v;
        }
        if let Some(v) = pick("mu_los", self.mu_los, self.mu_los_db, db_to_linear)? {
            p.mu_los = v;
        }
        if let Some(v) = pick("mu_nlos", self.mu_nlos, self.mu_nlos_db, db_to_linear)? {
            p.mu_nlos = v;
        }
        if let Some(v) = self.los_threshold {
            p.los_threshold = v;
        }
        p.validate().map_err(|e| DocumentError::Invalid(format!("channel: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<BandwidthPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_max_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_uav: Option<[f64; 2]>,
}

impl PolicySection {
    pub fn apply(&self, scenario: &mut Scenario) {
        if let Some(b) = self.bandwidth {
            scenario.policy = b;
        }
        if let Some(b) = self.b_max_hz {
            scenario.b_max_hz = b;
        }
        if let Some(z) = self.z_uav {
            scenario.venue.z = z;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub demand_bps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub label: String,
    pub seed: u64,
    pub venue: FeasibleBox,
    #[serde(default = "default_b_max")]
    pub b_max_hz: f64,
    pub ues: Vec<UeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso: Option<SwarmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySection>,
}

fn default_b_max() -> f64 {
    DEFAULT_B_MAX_HZ
}

/// Everything needed to plan one scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub params: ChannelParams,
    pub swarm: SwarmConfig,
}

impl ScenarioDocument {
    pub fn from_scenario(s: &Scenario, params: Option<&ChannelParams>, swarm: Option<&SwarmConfig>) -> Self {
        Self {
            label: s.label.clone(),
            seed: s.seed,
            venue: s.venue,
            b_max_hz: s.b_max_hz,
            ues: s
                .ues
                .iter()
                .map(|u| UeRecord {
                    x: u.position.x,
                    y: u.position.y,
                    z: u.position.z,
                    demand_bps: u.demand_bps,
                    bandwidth_hz: u.bandwidth_hz,
                })
                .collect(),
            channel: params.map(ChannelSection::from_params),
            pso: swarm.copied(),
            policy: Some(PolicySection { bandwidth: Some(s.policy), ..Default::default() }),
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario documents always serialise");
        s.push('\n');
        s
    }

    pub fn load(&self) -> Result<LoadedScenario, DocumentError> {
        let mut scenario = Scenario {
            label: self.label.clone(),
            seed: self.seed,
            venue: self.venue,
            ues: self
                .ues
                .iter()
                .map(|u| UserEquipment {
                    position: Point3::new(u.x, u.y, u.z),
                    demand_bps: u.demand_bps,
                    bandwidth_hz: u.bandwidth_hz,
                })
                .collect(),
            b_max_hz: self.b_max_hz,
            policy: BandwidthPolicy::default(),
        };
        if let Some(p) = &self.policy {
            p.apply(&mut scenario);
        }
        let params = match &self.channel {
            Some(c) => c.apply(&ChannelParams::default())?,
            None => ChannelParams::default(),
        };
        let swarm = self.pso.unwrap_or_default();
        Ok(LoadedScenario { scenario, params, swarm })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_zones: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso_trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_pool: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_csv: Option<String>,
}

/// `--config` file. Sections present here override the scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub channel: Option<ChannelSection>,
    #[serde(default)]
    pub pso: Option<SwarmConfig>,
    #[serde(default)]
    pub policy: Option<PolicySection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn apply(&self, loaded: &mut LoadedScenario) -> Result<(), DocumentError> {
        if let Some(c) = &self.channel {
            loaded.params = c.apply(&loaded.params)?;
        }
        if let Some(p) = self.pso {
            loaded.swarm = p;
        }
        if let Some(p) = &self.policy {
            p.apply(&mut loaded.scenario);
        }
        if let Some(seed) = self.seed {
            loaded.swarm.seed = seed;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssocRecord {
    pub ue: usize,
    pub uav: usize,
    pub bandwidth_hz: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultsDocument {
    pub method: String,
    pub uav_count: usize,
    pub positions: Vec<Point3>,
    pub assoc: Vec<AssocRecord>,
    pub aggregate_bps: f64,
    pub demand_satisfied_ratio: f64,
    pub validation: ValidationReport,
}

impl ResultsDocument {
    pub fn new(method: &str, d: &Deployment, throughput: &ThroughputReport, validation: ValidationReport) -> Self {
        Self {
            method: method.to_string(),
            uav_count: d.uav_count,
            positions: d.uav_positions.clone(),
            assoc: d
                .per_link
                .iter()
                .map(|l| AssocRecord { ue: l.ue, uav: l.uav, bandwidth_hz: l.bandwidth_hz, rate_bps: l.rate_bps })
                .collect(),
            aggregate_bps: throughput.aggregate_bps,
            demand_satisfied_ratio: throughput.demand_satisfied_ratio,
            validation,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results always serialise");
        s.push('\n');
        s
    }
}

pub fn zones_json(zones: &[CandidateZone]) -> String {
    let mut s = serde_json::to_string_pretty(zones).expect("zones always serialise");
    s.push('\n');
    s
}
