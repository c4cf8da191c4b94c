//! Analytical throughput of a deployment, demand-capped per UE.

use serde::Serialize;

use super::Scenario;
use crate::channel::{link_rate, ChannelParams};
use crate::planner::Deployment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UeThroughput {
    pub ue: usize,
    pub uav: usize,
    /// Bandwidth after any rescaling of an oversubscribed UAV, Hz.
    pub bandwidth_hz: f64,
    pub rate_bps: f64,
    pub delivered_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub aggregate_bps: f64,
    pub demand_satisfied_ratio: f64,
    pub per_ue: Vec<UeThroughput>,
}

/// Delivered rate per UE. A UAV handing out more than the budget has every
/// allocation scaled down by the same factor.
pub fn evaluate_throughput(deployment: &Deployment, scenario: &Scenario, params: &ChannelParams) -> ThroughputReport {
    let k = deployment.uav_positions.len();
    let mut used = vec![0.0; k];
    for l in &deployment.per_link {
        used[l.uav] += l.bandwidth_hz;
    }
    let per_ue: Vec<UeThroughput> = deployment
        .per_link
        .iter()
        .map(|l| {
            let scale = if used[l.uav] > scenario.b_max_hz { scenario.b_max_hz / used[l.uav] } else { 1.0 };
            let bandwidth_hz = l.bandwidth_hz * scale;
            let ue = &scenario.ues[l.ue];
            let rate_bps = link_rate(ue.position, deployment.uav_positions[l.uav], bandwidth_hz, params).unwrap_or(0.0);
            UeThroughput { ue: l.ue, uav: l.uav, bandwidth_hz, rate_bps, delivered_bps: rate_bps.min(ue.demand_bps) }
        })
        .collect();
    let aggregate_bps: f64 = per_ue.iter().map(|u| u.delivered_bps).sum();
    ThroughputReport { aggregate_bps, demand_satisfied_ratio: aggregate_bps / scenario.total_demand(), per_ue }
}
