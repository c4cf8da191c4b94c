//! Scenario description, generation of the three evaluation scenarios, the
//! comparison baselines and the analytical throughput evaluator.

mod baseline;
mod evaluate;
mod experiment;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Point3, DEFAULT_CHANNEL_WIDTH_HZ};
use crate::coverage::{CoverageError, FeasibleBox};

pub use baseline::{run_baseline, BaselineKind, FIXED_ALTITUDE_M, FIXED_GROUP_SIZE};
pub use evaluate::{evaluate_throughput, ThroughputReport, UeThroughput};
pub use experiment::{median, run_experiment, run_experiment_with, ExperimentRow, ExperimentTable, Method, PlotMetric, SummaryRow};

/// Total bandwidth one UAV can hand out (8 bonded 20 MHz channels), Hz.
pub const DEFAULT_B_MAX_HZ: f64 = 160e6;
/// Default UAV altitude band, m.
pub const DEFAULT_UAV_ALTITUDE: [f64; 2] = [10.0, 120.0];
pub const UES_PER_SCENARIO: usize = 20;

/// 802.11ac single-stream 20 MHz rates (800 ns guard interval) for MCS 0..=5, bit/s.
pub const MCS_TABLE: [(u8, f64); 6] =
    [(0, 6.5e6), (1, 13e6), (2, 19.5e6), (3, 26e6), (4, 39e6), (5, 52e6)];

pub const VENUE_SIDES_M: [f64; 5] = [100.0, 200.0, 300.0, 400.0, 500.0];
pub const UE_COUNTS: [usize; 5] = [20, 30, 40, 50, 60];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid variant {variant} for scenario {kind:?} (valid: 0..{count})")]
    InvalidVariant { kind: ScenarioKind, variant: usize, count: usize },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Box(#[from] CoverageError),
}

/// How bandwidth is allocated to each served UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BandwidthPolicy {
    /// Every UE gets its design bandwidth.
    #[serde(rename = "fixed")]
    Fixed,
    /// Smallest 1 kHz multiple meeting the demand at the final position,
    /// capped at the design bandwidth.
    #[default]
    #[serde(rename = "demand-fit")]
    DemandFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserEquipment {
    pub position: Point3,
    pub demand_bps: f64,
    /// Design (fixed policy) or maximum (demand-fit) bandwidth; defaults to one 20 MHz channel.
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub seed: u64,
    /// Venue footprint in x/y and the UAV altitude band in z.
    pub venue: FeasibleBox,
    pub ues: Vec<UserEquipment>,
    pub b_max_hz: f64,
    pub policy: BandwidthPolicy,
}

impl Scenario {
    pub fn design_bandwidth(&self, ue: usize) -> f64 {
        self.ues[ue].bandwidth_hz.unwrap_or(DEFAULT_CHANNEL_WIDTH_HZ)
    }

    pub fn total_demand(&self) -> f64 {
        self.ues.iter().map(|u| u.demand_bps).sum()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.venue.validate()?;
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.ues.is_empty() {
            return bad("scenario has no UEs".into());
        }
        if !(self.b_max_hz > 0.0 && self.b_max_hz.is_finite()) {
            return bad(format!("b_max_hz must be positive, got {}", self.b_max_hz));
        }
        for (i, ue) in self.ues.iter().enumerate() {
            let p = ue.position;
            if !p.is_finite() {
                return bad(format!("UE {i} has a non-finite position"));
            }
            if p.x < self.venue.x[0] || p.x > self.venue.x[1] || p.y < self.venue.y[0] || p.y > self.venue.y[1] {
                return bad(format!("UE {i} lies outside the venue footprint"));
            }
            if p.z >= self.venue.z[0] {
                return bad(format!("UE {i} altitude {} is not below the lowest UAV altitude {}", p.z, self.venue.z[0]));
            }
            if !(ue.demand_bps > 0.0 && ue.demand_bps.is_finite()) {
                return bad(format!("UE {i} demand must be positive, got {}", ue.demand_bps));
            }
            if let Some(b) = ue.bandwidth_hz {
                if !(b > 0.0 && b.is_finite()) {
                    return bad(format!("UE {i} bandwidth must be positive, got {b}"));
                }
            }
        }
        Ok(())
    }

    /// Same scenario with every demand multiplied by `factor`.
    pub fn scaled_demands(&self, factor: f64) -> Scenario {
        let mut s = self.clone();
        for ue in &mut s.ues {
            ue.demand_bps *= factor;
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Fixed venue and UE count, varying demand.
    A,
    /// Fixed UE count and demand, varying venue size.
    B,
    /// Fixed venue and demand, varying UE count.
    C,
}

impl ScenarioKind {
    pub fn variant_count(self) -> usize {
        match self {
            ScenarioKind::A => MCS_TABLE.len(),
            ScenarioKind::B => VENUE_SIDES_M.len(),
            ScenarioKind::C => UE_COUNTS.len(),
        }
    }

    /// The swept quantity for a variant: demand (bit/s), venue side (m) or UE count.
    pub fn variant_value(self, variant: usize) -> f64 {
        match self {
            ScenarioKind::A => MCS_TABLE[variant].1,
            ScenarioKind::B => VENUE_SIDES_M[variant],
            ScenarioKind::C => UE_COUNTS[variant] as f64,
        }
    }

    pub fn variant_column(self) -> &'static str {
        match self {
            ScenarioKind::A => "demand_bps",
            ScenarioKind::B => "venue_side_m",
            ScenarioKind::C => "n_ues",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::A => "A",
            ScenarioKind::B => "B",
            ScenarioKind::C => "C",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(ScenarioKind::A),
            "B" | "b" => Ok(ScenarioKind::B),
            "C" | "c" => Ok(ScenarioKind::C),
            other => Err(format!("unknown scenario kind {other:?}, expected A, B or C")),
        }
    }
}

/// Square venue of side `side` with UEs uniformly placed at ground level.
pub fn uniform_scenario(label: String, side: f64, n_ues: usize, demand_bps: f64, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ues = (0..n_ues)
        .map(|_| UserEquipment {
            position: Point3::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side), 0.0),
            demand_bps,
            bandwidth_hz: None,
        })
        .collect();
    Scenario {
        label,
        seed,
        venue: FeasibleBox { x: [0.0, side], y: [0.0, side], z: DEFAULT_UAV_ALTITUDE },
        ues,
        b_max_hz: DEFAULT_B_MAX_HZ,
        policy: BandwidthPolicy::default(),
    }
}

pub fn generate_scenario(kind: ScenarioKind, variant: usize, seed: u64) -> Result<Scenario, ScenarioError> {
    let count = kind.variant_count();
    if variant >= count {
        return Err(ScenarioError::InvalidVariant { kind, variant, count });
    }
    let label = format!("{}{}", kind.name(), variant);
    let base_demand = MCS_TABLE[0].1;
    Ok(match kind {
        ScenarioKind::A => uniform_scenario(label, 100.0, UES_PER_SCENARIO, MCS_TABLE[variant].1, seed),
        ScenarioKind::B => uniform_scenario(label, VENUE_SIDES_M[variant], UES_PER_SCENARIO, base_demand, seed),
        ScenarioKind::C => uniform_scenario(label, 100.0, UE_COUNTS[variant], base_demand, seed),
    })
}
