//! End-to-end deployment planning and independent constraint validation.
//!
//! The planner builds coverage regions, enumerates candidate zones, solves a
//! capacity-aware minimum cover, places one UAV per chosen group with PSO and
//! keeps the best validated candidate. Groups whose witness exceeds the
//! bandwidth budget are split by principal-axis bisection until they fit.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{link_rate, ChannelParams, Point3};
use crate::coverage::{
    enumerate_zones, max_ues_per_uav, minimal_zone_cover, CandidateZone, CoverGroup, CoverageError, CoverageModel,
};
use crate::positioning::{
    allocate_bandwidth, optimize_position_with, PlacementSolution, PositioningError, SearchOptions, SwarmConfig,
    TraceRow,
};
use crate::scenario::{BandwidthPolicy, Scenario};

/// Relative tolerance of the rate check in [`validate_deployment`].
pub const RATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("UEs {0:?} cannot be served from inside the feasible box")]
    Unservable(Vec<usize>),
    #[error("UEs {0:?} need more bandwidth than one UAV has, even alone")]
    CapacityDeadlock(Vec<usize>),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl From<CoverageError> for PlanError {
    fn from(e: CoverageError) -> Self {
        match e {
            CoverageError::Unservable(v) | CoverageError::Uncoverable(v) => PlanError::Unservable(v),
            other => PlanError::Config(other.to_string()),
        }
    }
}

/// Binary UE-to-UAV association plus UAV activation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Association {
    /// `z[ue][uav]`.
    pub z: Vec<Vec<u8>>,
    pub a: Vec<u8>,
}

impl Association {
    pub fn from_assignment(uav_of: &[usize], n_uavs: usize) -> Self {
        let mut z = vec![vec![0u8; n_uavs]; uav_of.len()];
        let mut a = vec![0u8; n_uavs];
        for (ue, &k) in uav_of.iter().enumerate() {
            z[ue][k] = 1;
            a[k] = 1;
        }
        Self { z, a }
    }

    /// UAV serving `ue`, when exactly one does.
    pub fn uav_of(&self, ue: usize) -> Option<usize> {
        let mut hits = self.z[ue].iter().enumerate().filter(|(_, &v)| v != 0);
        match (hits.next(), hits.next()) {
            (Some((k, _)), None) => Some(k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkAssignment {
    pub ue: usize,
    pub uav: usize,
    pub bandwidth_hz: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deployment {
    pub uav_positions: Vec<Point3>,
    pub association: Association,
    /// One entry per active link, ordered by UE.
    pub per_link: Vec<LinkAssignment>,
    pub uav_count: usize,
    /// Demand-capped sum of link rates, bit/s.
    pub aggregate_throughput: f64,
}

impl Deployment {
    /// Assemble from per-UAV placements; UAV order follows `placements`.
    pub fn from_placements(placements: &[PlacementSolution], scenario: &Scenario) -> Self {
        let n = scenario.ues.len();
        let mut uav_of = vec![usize::MAX; n];
        let mut per_link = Vec::with_capacity(n);
        for (k, p) in placements.iter().enumerate() {
            for s in &p.served_ues {
                uav_of[s.ue] = k;
                per_link.push(LinkAssignment { ue: s.ue, uav: k, bandwidth_hz: s.bandwidth_hz, rate_bps: s.rate_bps });
            }
        }
        assert!(uav_of.iter().all(|&k| k != usize::MAX), "every UE must be served");
        per_link.sort_by_key(|l| l.ue);
        let aggregate_throughput =
            per_link.iter().map(|l| l.rate_bps.min(scenario.ues[l.ue].demand_bps)).sum();
        Self {
            uav_positions: placements.iter().map(|p| p.uav_position).collect(),
            association: Association::from_assignment(&uav_of, placements.len()),
            per_link,
            uav_count: placements.len(),
            aggregate_throughput,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub constraint: &'static str,
    pub unit: &'static str,
    /// Largest residual; <= 0 when satisfied.
    pub max_residual: f64,
    pub violations: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ConstraintCheck>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn check(&self, constraint: &str) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.constraint == constraint)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["constraint", "unit", "max_residual", "violations", "passed"])?;
        for c in &self.checks {
            w.write_record([
                c.constraint.to_string(),
                c.unit.to_string(),
                c.max_residual.to_string(),
                c.violations.to_string(),
                c.passed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Tally {
    constraint: &'static str,
    unit: &'static str,
    max_residual: f64,
    violations: usize,
}

impl Tally {
    fn new(constraint: &'static str, unit: &'static str) -> Self {
        Self { constraint, unit, max_residual: f64::NEG_INFINITY, violations: 0 }
    }

    fn record(&mut self, residual: f64, violated: bool) {
        self.max_residual = self.max_residual.max(residual);
        self.violations += usize::from(violated);
    }

    fn finish(self) -> ConstraintCheck {
        let max_residual = if self.max_residual == f64::NEG_INFINITY { 0.0 } else { self.max_residual };
        ConstraintCheck {
            constraint: self.constraint,
            unit: self.unit,
            max_residual,
            violations: self.violations,
            passed: self.violations == 0,
        }
    }
}

/// Re-check every constraint from scratch using only the channel model.
pub fn validate_deployment(deployment: &Deployment, scenario: &Scenario, params: &ChannelParams) -> ValidationReport {
    let n = scenario.ues.len();
    let k = deployment.uav_positions.len();
    let assoc = &deployment.association;

    let mut structure = Tally::new("structure", "count");
    let shape_ok = assoc.z.len() == n && assoc.z.iter().all(|row| row.len() == k) && assoc.a.len() == k;
    let active = assoc.a.iter().filter(|&&v| v == 1).count();
    let count_gap = (deployment.uav_count as f64 - active as f64).abs().max((deployment.uav_count as f64 - k as f64).abs());
    structure.record(if shape_ok { count_gap } else { 1.0 }, !shape_ok || count_gap > 0.0);
    let mut link_of = vec![None; n];
    for l in &deployment.per_link {
        let known = l.ue < n && l.uav < k && shape_ok && assoc.z[l.ue][l.uav] == 1 && link_of[l.ue].is_none();
        structure.record(if known { 0.0 } else { 1.0 }, !known);
        if l.ue < n {
            link_of[l.ue] = Some(*l);
        }
    }

    let mut binarity = Tally::new("binarity", "count");
    let mut unique = Tally::new("unique_association", "count");
    let mut activation = Tally::new("activation", "count");
    let mut demand = Tally::new("demand", "bps");
    let mut capacity = Tally::new("capacity", "Hz");
    let mut bounds = Tally::new("feasible_box", "m");

    if shape_ok {
        for v in assoc.a.iter().chain(assoc.z.iter().flatten()) {
            let excess = f64::from(*v) - 1.0;
            binarity.record(excess.max(0.0), *v > 1);
        }
        for (i, row) in assoc.z.iter().enumerate() {
            let total: f64 = row.iter().map(|&v| f64::from(v)).sum();
            unique.record((total - 1.0).abs(), total != 1.0);
            for (j, &v) in row.iter().enumerate() {
                let gap = f64::from(v) - f64::from(assoc.a[j]);
                activation.record(gap, gap > 0.0);
            }
            let Some(uav) = assoc.uav_of(i) else { continue };
            let t = scenario.ues[i].demand_bps;
            let (rate, linked) = match link_of[i] {
                Some(l) if l.uav == uav => {
                    (link_rate(scenario.ues[i].position, deployment.uav_positions[uav], l.bandwidth_hz, params).unwrap_or(0.0), true)
                }
                _ => (0.0, false),
            };
            demand.record(t - rate, !linked || rate < t * (1.0 - RATE_TOLERANCE));
        }
        let mut used = vec![0.0; k];
        for l in deployment.per_link.iter().filter(|l| l.uav < k) {
            used[l.uav] += l.bandwidth_hz;
        }
        for (j, u) in used.iter().enumerate() {
            if assoc.a[j] == 1 {
                let residual = u - scenario.b_max_hz;
                capacity.record(residual, residual > 0.0);
            }
        }
    }
    for p in &deployment.uav_positions {
        let c = scenario.venue.clamp(*p);
        let gap = (*p - c).norm();
        bounds.record(gap, gap > 0.0 || !p.is_finite());
    }

    let checks: Vec<ConstraintCheck> =
        [structure, demand, capacity, unique, activation, binarity, bounds].into_iter().map(Tally::finish).collect();
    let passed = checks.iter().all(|c| c.passed);
    ValidationReport { checks, passed }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    /// Intersect each coverage ball with the LoS-threshold elevation cone.
    pub elevation_mask: bool,
    /// Fail instead of returning a deployment with unmet demands.
    pub strict: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { elevation_mask: true, strict: true }
    }
}

/// One candidate final solution, kept for `--dump-pool`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolEntry {
    pub source: &'static str,
    pub uav_count: usize,
    pub aggregate_bps: f64,
    pub valid: bool,
    pub positions: Vec<Point3>,
    pub groups: Vec<Vec<usize>>,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZoneTrace {
    pub members: Vec<usize>,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub deployment: Deployment,
    pub validation: ValidationReport,
    pub zones: Vec<CandidateZone>,
    pub cover_exact: bool,
    pub pool: Vec<PoolEntry>,
    pub traces: Vec<ZoneTrace>,
}

pub fn plan_deployment(scenario: &Scenario, params: &ChannelParams, config: &SwarmConfig) -> Result<Deployment, PlanError> {
    plan_detailed(scenario, params, config, &PlanOptions::default()).map(|o| o.deployment)
}

/// Per-UE lower bound on the bandwidth a UAV in the box has to give it:
/// the allocation from the nearest permitted point straight overhead.
fn bandwidth_floor(scenario: &Scenario, params: &ChannelParams, ue: usize) -> f64 {
    match scenario.policy {
        BandwidthPolicy::Fixed => scenario.design_bandwidth(ue),
        BandwidthPolicy::DemandFit => {
            let p = scenario.ues[ue].position;
            let overhead = Point3::new(p.x, p.y, scenario.venue.z[0].max(p.z));
            allocate_bandwidth(scenario, params, ue, overhead).bandwidth_hz
        }
    }
}

/// Members a UAV at the zone witness could serve within the budget.
fn witness_capacity(zone: &CandidateZone, scenario: &Scenario, params: &ChannelParams) -> (usize, f64) {
    let bw: Vec<f64> =
        zone.members.iter().map(|&i| allocate_bandwidth(scenario, params, i, zone.witness).bandwidth_hz).collect();
    (max_ues_per_uav(&bw, scenario.b_max_hz), bw.iter().sum())
}

/// Split a zone that exceeds the bandwidth budget at its witness into
/// `ceil(m / n_max)` geometrically compact groups, each with a fresh witness.
pub fn split_zone(zone: &CandidateZone, scenario: &Scenario, params: &ChannelParams) -> Result<Vec<CandidateZone>, PlanError> {
    let model = CoverageModel::for_scenario(scenario, params, true)?;
    let (cap, _) = witness_capacity(zone, scenario, params);
    split_with(&model, zone, cap, scenario)
}

fn split_with(
    model: &CoverageModel,
    zone: &CandidateZone,
    capacity: usize,
    scenario: &Scenario,
) -> Result<Vec<CandidateZone>, PlanError> {
    if zone.members.len() <= capacity {
        return Ok(vec![zone.clone()]);
    }
    if capacity == 0 {
        return Err(PlanError::CapacityDeadlock(zone.members.clone()));
    }
    let groups = zone.members.len().div_ceil(capacity);
    let mut parts = Vec::with_capacity(groups);
    bisect(&zone.members, groups, scenario, &mut parts);
    let mut out = Vec::with_capacity(parts.len());
    for part in parts {
        match model.witness_from(&part, Some(zone.witness)) {
            crate::coverage::WitnessOutcome::Feasible { point, slack } => {
                out.push(CandidateZone { members: part, witness: point, slack })
            }
            _ => {
                for &i in &part {
                    out.push(model.zone(&[i]).ok_or_else(|| PlanError::Unservable(vec![i]))?);
                }
            }
        }
    }
    Ok(out)
}

/// Recursive split along the dominant principal axis of the member positions.
fn bisect(members: &[usize], groups: usize, scenario: &Scenario, out: &mut Vec<Vec<usize>>) {
    if groups <= 1 {
        let mut m = members.to_vec();
        m.sort_unstable();
        out.push(m);
        return;
    }
    let pts: Vec<Point3> = members.iter().map(|&i| scenario.ues[i].position).collect();
    let axis = principal_axis(&pts);
    let mut order: Vec<(f64, usize)> = members.iter().zip(&pts).map(|(&i, p)| (p.dot(axis), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let left_groups = groups / 2;
    let cut = (members.len() * left_groups).div_ceil(groups);
    let ids: Vec<usize> = order.into_iter().map(|(_, i)| i).collect();
    bisect(&ids[..cut], left_groups, scenario, out);
    bisect(&ids[cut..], groups - left_groups, scenario, out);
}

fn principal_axis(pts: &[Point3]) -> Point3 {
    let n = pts.len() as f64;
    let mean = pts.iter().fold(Point3::default(), |a, p| a + *p) * (1.0 / n);
    let mut cov = [[0.0; 3]; 3];
    for p in pts {
        let d = (*p - mean).to_array();
        for r in 0..3 {
            for c in 0..3 {
                cov[r][c] += d[r] * d[c];
            }
        }
    }
    let mut v = [1.0, 1e-3, 1e-6];
    for _ in 0..100 {
        let mut next = [0.0; 3];
        for r in 0..3 {
            next[r] = (0..3).map(|c| cov[r][c] * v[c]).sum();
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Point3::new(1.0, 0.0, 0.0);
        }
        v = next.map(|x| x / norm);
    }
    Point3::from_array(v)
}

struct Placed {
    placements: Vec<PlacementSolution>,
    groups: Vec<Vec<usize>>,
    traces: Vec<ZoneTrace>,
}

/// Place one UAV per group, splitting any group that cannot fit its
/// bandwidth budget.
fn place_groups(
    model: &CoverageModel,
    mut pending: Vec<CandidateZone>,
    scenario: &Scenario,
    params: &ChannelParams,
    config: &SwarmConfig,
    options: &PlanOptions,
    full_box: bool,
) -> Result<Placed, PlanError> {
    let mut done: Vec<(CandidateZone, PlacementSolution, Vec<TraceRow>)> = Vec::new();
    while !pending.is_empty() {
        let results: Vec<_> = pending
            .par_iter()
            .map(|zone| {
                let search = SearchOptions {
                    full_box,
                    snap_model: options.elevation_mask.then_some(model),
                    strict_capacity: true,
                };
                let mut trace = Vec::new();
                let r = optimize_position_with(zone, scenario, params, config, &search, Some(&mut trace));
                (r, trace)
            })
            .collect();
        let mut next = Vec::new();
        for (zone, (result, trace)) in pending.into_iter().zip(results) {
            match result {
                Ok(sol) if sol.feasible || !options.strict => done.push((zone, sol, trace)),
                Ok(_) if zone.members.len() > 1 => next.extend(split_with(model, &zone, zone.members.len() / 2, scenario)?),
                Ok(_) => return Err(PlanError::Unservable(zone.members)),
                Err(PositioningError::InfeasibleZone { .. }) => {
                    let (cap, _) = witness_capacity(&zone, scenario, params);
                    let cap = if cap >= zone.members.len() { zone.members.len() - 1 } else { cap };
                    next.extend(split_with(model, &zone, cap, scenario)?);
                }
                Err(e) => return Err(PlanError::Config(e.to_string())),
            }
        }
        pending = next;
    }
    done.sort_by(|a, b| a.0.members.cmp(&b.0.members));
    Ok(Placed {
        groups: done.iter().map(|d| d.0.members.clone()).collect(),
        traces: done.iter().map(|d| ZoneTrace { members: d.0.members.clone(), rows: d.2.clone() }).collect(),
        placements: done.into_iter().map(|d| d.1).collect(),
    })
}

fn group_zones(model: &CoverageModel, zones: &[CandidateZone], groups: &[CoverGroup]) -> Result<Vec<CandidateZone>, PlanError> {
    groups
        .iter()
        .map(|g| {
            let parent = &zones[g.zone];
            if g.members == parent.members {
                return Ok(parent.clone());
            }
            match model.witness_from(&g.members, Some(parent.witness)) {
                crate::coverage::WitnessOutcome::Feasible { point, slack } => {
                    Ok(CandidateZone { members: g.members.clone(), witness: point, slack })
                }
                // a subset of a zone always has the parent witness
                _ => Ok(CandidateZone {
                    members: g.members.clone(),
                    witness: parent.witness,
                    slack: -model.max_deficit(&g.members, parent.witness),
                }),
            }
        })
        .collect()
}

fn position_key(d: &Deployment) -> Vec<[f64; 3]> {
    d.uav_positions.iter().map(|p| p.to_array()).collect()
}

fn lexicographic(a: &[[f64; 3]], b: &[[f64; 3]]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        for d in 0..3 {
            let o = x[d].total_cmp(&y[d]);
            if o.is_ne() {
                return o;
            }
        }
    }
    a.len().cmp(&b.len())
}

/// Full pipeline with the intermediate artefacts.
pub fn plan_detailed(
    scenario: &Scenario,
    params: &ChannelParams,
    config: &SwarmConfig,
    options: &PlanOptions,
) -> Result<PlanOutcome, PlanError> {
    scenario.validate().map_err(|e| PlanError::Config(e.to_string()))?;
    params.validate().map_err(|e| PlanError::Config(e.to_string()))?;
    config.validate().map_err(|e| PlanError::Config(e.to_string()))?;
    let n = scenario.ues.len();

    let floors: Vec<f64> = (0..n).map(|i| bandwidth_floor(scenario, params, i)).collect();
    let too_wide: Vec<usize> = (0..n).filter(|&i| floors[i] > scenario.b_max_hz).collect();
    if !too_wide.is_empty() {
        return Err(PlanError::CapacityDeadlock(too_wide));
    }
    let capacity = max_ues_per_uav(&floors, scenario.b_max_hz).max(1);

    let model = CoverageModel::for_scenario(scenario, params, options.elevation_mask)?;
    let zones = enumerate_zones(&model);
    let cover = minimal_zone_cover(&zones, n, capacity)?;

    let mut candidates = vec![("exact", cover.groups.clone())];
    if cover.greedy != cover.groups {
        candidates.push(("greedy", cover.greedy.clone()));
    }

    let mut pool = Vec::new();
    let mut best: Option<(usize, Deployment, ValidationReport, Vec<ZoneTrace>)> = None;
    for (source, groups) in candidates {
        let start = group_zones(&model, &zones, &groups)?;
        let placed = place_groups(&model, start, scenario, params, config, options, false)?;
        let deployment = Deployment::from_placements(&placed.placements, scenario);
        let report = validate_deployment(&deployment, scenario, params);
        pool.push(PoolEntry {
            source,
            uav_count: deployment.uav_count,
            aggregate_bps: deployment.aggregate_throughput,
            valid: report.passed,
            positions: deployment.uav_positions.clone(),
            groups: placed.groups,
            selected: false,
        });
        if options.strict && !report.passed {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, b, _, _)) => {
                let by_count = deployment.uav_count.cmp(&b.uav_count);
                let gap = deployment.aggregate_throughput - b.aggregate_throughput;
                by_count.is_lt()
                    || (by_count.is_eq()
                        && (gap > 1.0 || (gap.abs() <= 1.0 && lexicographic(&position_key(&deployment), &position_key(b)).is_lt())))
            }
        };
        if better {
            best = Some((pool.len() - 1, deployment, report, placed.traces));
        }
    }
    let Some((index, deployment, validation, traces)) = best else {
        return Err(PlanError::Unservable((0..n).collect()));
    };
    pool[index].selected = true;
    Ok(PlanOutcome { deployment, validation, zones, cover_exact: cover.exact, pool, traces })
}

/// Place one UAV per fixed member group, PSO over the whole box, no splitting.
pub(crate) fn place_fixed_groups(
    model: &CoverageModel,
    groups: &[Vec<usize>],
    scenario: &Scenario,
    params: &ChannelParams,
    config: &SwarmConfig,
) -> Result<Deployment, PlanError> {
    let search = SearchOptions { full_box: true, snap_model: None, strict_capacity: false };
    let mut ordered = groups.to_vec();
    ordered.iter_mut().for_each(|g| g.sort_unstable());
    ordered.sort();
    let placements: Vec<PlacementSolution> = ordered
        .par_iter()
        .map(|members| {
            let witness = model.zone_witness(members).point();
            let zone = CandidateZone { members: members.clone(), witness, slack: -model.max_deficit(members, witness) };
            optimize_position_with(&zone, scenario, params, config, &search, None)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| PlanError::Config(e.to_string()))?;
    Ok(Deployment::from_placements(&placements, scenario))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::FeasibleBox;
    use crate::scenario::{UserEquipment, DEFAULT_B_MAX_HZ};

    fn scenario(points: &[(f64, f64)], demand: f64, policy: BandwidthPolicy) -> Scenario {
        Scenario {
            label: "p".into(),
            seed: 1,
            venue: FeasibleBox::new([0.0, 500.0], [0.0, 500.0], [10.0, 120.0]).unwrap(),
            ues: points
                .iter()
                .map(|&(x, y)| UserEquipment { position: Point3::new(x, y, 0.0), demand_bps: demand, bandwidth_hz: None })
                .collect(),
            b_max_hz: DEFAULT_B_MAX_HZ,
            policy,
        }
    }

    #[test]
    fn single_ue_gets_one_uav() {
        let p = ChannelParams::default();
        let s = scenario(&[(50.0, 50.0)], 6.5e6, BandwidthPolicy::Fixed);
        let out = plan_detailed(&s, &p, &SwarmConfig::default(), &PlanOptions::default()).unwrap();
        assert_eq!(out.deployment.uav_count, 1);
        assert_eq!(out.deployment.aggregate_throughput, 6.5e6);
        assert!(out.validation.passed);
    }

    #[test]
    fn fixed_policy_splits_by_capacity() {
        let p = ChannelParams::default();
        let pts = vec![(250.0, 250.0); 17];
        let s = scenario(&pts, 6.5e6, BandwidthPolicy::Fixed);
        let d = plan_deployment(&s, &p, &SwarmConfig::default()).unwrap();
        assert_eq!(d.uav_count, 3);
        assert!(validate_deployment(&d, &s, &p).passed);
    }

    #[test]
    fn double_association_is_flagged() {
        let p = ChannelParams::default();
        let s = scenario(&[(50.0, 50.0), (60.0, 50.0)], 6.5e6, BandwidthPolicy::Fixed);
        let mut d = plan_deployment(&s, &p, &SwarmConfig::default()).unwrap();
        d.uav_positions.push(d.uav_positions[0]);
        d.association.a.push(1);
        for row in &mut d.association.z {
            row.push(0);
        }
        d.association.z[0][1] = 1;
        d.uav_count = 2;
        let r = validate_deployment(&d, &s, &p);
        assert!(!r.passed);
        assert_eq!(r.check("unique_association").unwrap().violations, 1);
    }

    #[test]
    fn over_budget_by_one_hertz() {
        let p = ChannelParams::default();
        let s = scenario(&[(50.0, 50.0), (60.0, 50.0)], 6.5e6, BandwidthPolicy::Fixed);
        let mut d = plan_deployment(&s, &p, &SwarmConfig::default()).unwrap();
        d.per_link[0].bandwidth_hz = 100e6 + 1.0;
        d.per_link[1].bandwidth_hz = 60e6;
        let r = validate_deployment(&d, &s, &p);
        let cap = r.check("capacity").unwrap();
        assert_eq!(cap.max_residual, 1.0);
        assert_eq!(cap.violations, 1);
    }

    #[test]
    fn coincident_pair_of_full_groups_splits_in_two() {
        let p = ChannelParams::default();
        let pts = vec![(100.0, 100.0); 16];
        let s = scenario(&pts, 6.5e6, BandwidthPolicy::Fixed);
        let model = CoverageModel::for_scenario(&s, &p, true).unwrap();
        let zone = model.zone(&(0..16).collect::<Vec<_>>()).unwrap();
        let parts = split_zone(&zone, &s, &p).unwrap();
        assert_eq!(parts.iter().map(|z| z.members.len()).collect::<Vec<_>>(), vec![8, 8]);
    }

    #[test]
    fn seventeen_members_make_three_capped_groups() {
        let p = ChannelParams::default();
        let pts: Vec<(f64, f64)> = (0..17).map(|i| (200.0 + 3.0 * i as f64, 200.0 + (i % 4) as f64)).collect();
        let s = scenario(&pts, 6.5e6, BandwidthPolicy::Fixed);
        let model = CoverageModel::for_scenario(&s, &p, true).unwrap();
        let zone = model.zone(&(0..17).collect::<Vec<_>>()).unwrap();
        let parts = split_zone(&zone, &s, &p).unwrap();
        assert_eq!(parts.len(), 3);
        assert!(parts.iter().all(|z| z.members.len() <= 8));
        let mut all: Vec<usize> = parts.iter().flat_map(|z| z.members.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn small_zone_is_not_split() {
        let p = ChannelParams::default();
        let s = scenario(&[(10.0, 10.0), (20.0, 10.0)], 6.5e6, BandwidthPolicy::Fixed);
        let model = CoverageModel::for_scenario(&s, &p, true).unwrap();
        let zone = model.zone(&[0, 1]).unwrap();
        assert_eq!(split_zone(&zone, &s, &p).unwrap(), vec![zone]);
    }

    #[test]
    fn validation_csv_has_header() {
        let p = ChannelParams::default();
        let s = scenario(&[(50.0, 50.0)], 6.5e6, BandwidthPolicy::Fixed);
        let d = plan_deployment(&s, &p, &SwarmConfig::default()).unwrap();
        let mut buf = Vec::new();
        validate_deployment(&d, &s, &p).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("constraint,unit,max_residual,violations,passed\n"));
        assert!(text.contains("capacity,Hz,"));
    }
}
