//! Per-zone UAV placement by global-best particle swarm optimisation.
//!
//! The fitness is the demand-capped aggregate throughput of the zone's
//! members minus an additive penalty for every violated constraint. One
//! particle starts on the zone witness, so whenever the witness is feasible
//! the returned solution is too.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{link_rate, max_service_distance, ChannelParams, Point3};
use crate::coverage::{CandidateZone, CoverageModel, FeasibleBox};
use crate::scenario::{BandwidthPolicy, Scenario};

/// Bandwidth allocation granularity of the demand-fit policy, Hz.
pub const BANDWIDTH_STEP_HZ: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PositioningError {
    #[error("zone {members:?} needs {required_hz} Hz at its witness, more than the {b_max_hz} Hz budget")]
    InfeasibleZone { members: Vec<usize>, required_hz: f64, b_max_hz: f64 },
    #[error("invalid swarm configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwarmConfig {
    pub particle_count: usize,
    pub max_iterations: usize,
    pub inertia_weight: f64,
    pub cognitive_coeff: f64,
    pub social_coeff: f64,
    /// Metres; gbest moving less than this counts as converged.
    pub position_precision: f64,
    pub early_stop_patience: usize,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            particle_count: 30,
            max_iterations: 100,
            inertia_weight: 0.7,
            cognitive_coeff: 1.5,
            social_coeff: 1.5,
            position_precision: 1.0,
            early_stop_patience: 10,
            seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), PositioningError> {
        let bad = |m: &str| Err(PositioningError::InvalidConfig(m.to_string()));
        if self.particle_count < 2 {
            return bad("particle_count must be >= 2");
        }
        if !(self.inertia_weight > 0.0 && self.inertia_weight < 1.0) {
            return bad("inertia_weight must lie in (0, 1)");
        }
        if !(self.position_precision > 0.0 && self.position_precision.is_finite()) {
            return bad("position_precision must be > 0");
        }
        if !(self.cognitive_coeff >= 0.0 && self.social_coeff >= 0.0)
            || !self.cognitive_coeff.is_finite()
            || !self.social_coeff.is_finite()
        {
            return bad("acceleration coefficients must be finite and >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: Point3,
    pub velocity: Point3,
    pub best_position: Point3,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkAllocation {
    pub bandwidth_hz: f64,
    /// Zero when the UAV is not above the UE.
    pub rate_bps: f64,
}

/// Bandwidth and resulting rate for one UE served from `uav`.
pub fn allocate_bandwidth(scenario: &Scenario, params: &ChannelParams, ue: usize, uav: Point3) -> LinkAllocation {
    let u = &scenario.ues[ue];
    let design = scenario.design_bandwidth(ue);
    let rate = |b: f64| link_rate(u.position, uav, b, params).unwrap_or(0.0);
    let at_design = LinkAllocation { bandwidth_hz: design, rate_bps: rate(design) };
    match scenario.policy {
        BandwidthPolicy::Fixed => at_design,
        BandwidthPolicy::DemandFit => {
            if at_design.rate_bps < u.demand_bps {
                return at_design;
            }
            let steps = (design / BANDWIDTH_STEP_HZ).floor() as u64;
            if steps == 0 || rate(steps as f64 * BANDWIDTH_STEP_HZ) < u.demand_bps {
                return at_design;
            }
            // rate is increasing in bandwidth: smallest step count meeting demand
            let (mut lo, mut hi) = (0u64, steps);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if rate(mid as f64 * BANDWIDTH_STEP_HZ) >= u.demand_bps {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let b = hi as f64 * BANDWIDTH_STEP_HZ;
            LinkAllocation { bandwidth_hz: b, rate_bps: rate(b) }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitnessEval {
    pub value: f64,
    pub feasible: bool,
    /// Demand-capped throughput before penalties.
    pub throughput: f64,
    pub unmet_demands: usize,
    pub bandwidth_used: f64,
    pub over_capacity: bool,
    pub out_of_bounds: bool,
    pub links: Vec<(usize, LinkAllocation)>,
}

/// Aggregate demand-capped throughput at `position` minus constraint penalties.
pub fn fitness(position: Point3, zone: &CandidateZone, scenario: &Scenario, params: &ChannelParams) -> FitnessEval {
    let mut throughput = 0.0;
    let mut penalty_weight = 0.0;
    let mut unmet = 0;
    let mut used = 0.0;
    let mut links = Vec::with_capacity(zone.members.len());
    for &i in &zone.members {
        let demand = scenario.ues[i].demand_bps;
        penalty_weight += demand;
        let alloc = allocate_bandwidth(scenario, params, i, position);
        throughput += alloc.rate_bps.min(demand);
        if alloc.rate_bps < demand {
            unmet += 1;
        }
        used += alloc.bandwidth_hz;
        links.push((i, alloc));
    }
    let lambda = 10.0 * penalty_weight;
    let over_capacity = used > scenario.b_max_hz;
    let out_of_bounds = !scenario.venue.contains(position);
    let violations = unmet + usize::from(over_capacity) + usize::from(out_of_bounds);
    FitnessEval {
        value: throughput - lambda * violations as f64,
        feasible: violations == 0,
        throughput,
        unmet_demands: unmet,
        bandwidth_used: used,
        over_capacity,
        out_of_bounds,
        links,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServedUe {
    pub ue: usize,
    pub bandwidth_hz: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementSolution {
    pub uav_position: Point3,
    pub served_ues: Vec<ServedUe>,
    pub fitness: f64,
    pub feasible: bool,
    pub iterations: usize,
}

/// One row of the per-iteration gbest trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub gbest_fitness: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions<'a> {
    /// Initialise over the whole feasible box instead of the zone bounds.
    pub full_box: bool,
    /// Snap the result into this model's zone region when it drifted outside.
    pub snap_model: Option<&'a CoverageModel>,
    /// Fail with `InfeasibleZone` when the witness exceeds the bandwidth budget.
    pub strict_capacity: bool,
}

/// Deterministic seed for a zone, independent of zone evaluation order.
pub fn zone_seed(base: u64, members: &[usize]) -> u64 {
    let mut h = splitmix(base ^ 0x5851_f42d_4c95_7f2d);
    for &m in members {
        h = splitmix(h ^ m as u64);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn search_region(zone: &CandidateZone, scenario: &Scenario, params: &ChannelParams) -> FeasibleBox {
    let mut region = scenario.venue;
    for &i in &zone.members {
        let c = scenario.ues[i].position;
        let r = max_service_distance(scenario.ues[i].demand_bps, scenario.design_bandwidth(i), params).unwrap_or(0.0);
        let ball = FeasibleBox { x: [c.x - r, c.x + r], y: [c.y - r, c.y + r], z: [c.z - r, c.z + r] };
        match region.intersect(&ball) {
            Some(b) => region = b,
            None => {
                let w = scenario.venue.clamp(zone.witness);
                return FeasibleBox { x: [w.x, w.x], y: [w.y, w.y], z: [w.z, w.z] };
            }
        }
    }
    region
}

fn uniform_in(region: &FeasibleBox, rng: &mut ChaCha8Rng) -> Point3 {
    let mut axis = |[lo, hi]: [f64; 2]| if hi > lo { rng.random_range(lo..=hi) } else { lo };
    Point3::new(axis(region.x), axis(region.y), axis(region.z))
}

pub fn optimize_position(
    zone: &CandidateZone,
    scenario: &Scenario,
    params: &ChannelParams,
    config: &SwarmConfig,
) -> Result<PlacementSolution, PositioningError> {
    let options = SearchOptions { strict_capacity: true, ..Default::default() };
    optimize_position_with(zone, scenario, params, config, &options, None)
}

pub fn optimize_position_with(
    zone: &CandidateZone,
    scenario: &Scenario,
    params: &ChannelParams,
    config: &SwarmConfig,
    options: &SearchOptions,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<PlacementSolution, PositioningError> {
    config.validate()?;
    let bounds = scenario.venue;
    let witness = bounds.clamp(zone.witness);
    let anchor = fitness(witness, zone, scenario, params);
    if options.strict_capacity && anchor.over_capacity {
        return Err(PositioningError::InfeasibleZone {
            members: zone.members.clone(),
            required_hz: anchor.bandwidth_used,
            b_max_hz: scenario.b_max_hz,
        });
    }

    let region = if options.full_box { bounds } else { search_region(zone, scenario, params) };
    let vmax = (0.5 * region.diagonal()).max(f64::MIN_POSITIVE);
    let seed = zone_seed(config.seed, &zone.members);
    let mut rngs: Vec<ChaCha8Rng> = (0..config.particle_count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            rng
        })
        .collect();

    let mut swarm: Vec<Particle> = rngs
        .iter_mut()
        .enumerate()
        .map(|(i, rng)| {
            let position = if i == 0 { witness } else { uniform_in(&region, rng) };
            Particle { position, velocity: Point3::default(), best_position: position, best_fitness: f64::NEG_INFINITY }
        })
        .collect();
    let mut gbest = (witness, anchor.value, anchor.feasible);
    for p in swarm.iter_mut() {
        let eval = fitness(p.position, zone, scenario, params);
        p.best_fitness = eval.value;
        if eval.value > gbest.1 {
            gbest = (p.position, eval.value, eval.feasible);
        }
    }
    let mut record = |iteration: usize, g: (Point3, f64, bool)| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRow { iteration, gbest_fitness: g.1, x: g.0.x, y: g.0.y, z: g.0.z, feasible: g.2 });
        }
    };
    record(0, gbest);

    let perfect = scenario_demand(zone, scenario);
    let mut stall = 0;
    let mut stall_anchor = gbest.0;
    let mut iterations = 0;
    for it in 1..=config.max_iterations {
        iterations = it;
        let leader = gbest.0;
        for (p, rng) in swarm.iter_mut().zip(rngs.iter_mut()) {
            let mut next = [0.0; 3];
            let x = p.position.to_array();
            let v = p.velocity.to_array();
            let pb = p.best_position.to_array();
            let gb = leader.to_array();
            for d in 0..3 {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vel = config.inertia_weight * v[d]
                    + config.cognitive_coeff * r1 * (pb[d] - x[d])
                    + config.social_coeff * r2 * (gb[d] - x[d]);
                next[d] = vel.clamp(-vmax, vmax);
            }
            p.velocity = Point3::from_array(next);
            p.position = bounds.clamp(p.position + p.velocity);
        }
        let previous = gbest.1;
        for p in swarm.iter_mut() {
            let eval = fitness(p.position, zone, scenario, params);
            if eval.value > p.best_fitness {
                p.best_fitness = eval.value;
                p.best_position = p.position;
            }
            if eval.value > gbest.1 {
                gbest = (p.position, eval.value, eval.feasible);
            }
        }
        debug_assert!(gbest.1 >= previous);
        record(it, gbest);

        let done = gbest.2 && gbest.1 >= perfect;
        if done && (gbest.0 - stall_anchor).norm() < config.position_precision {
            stall += 1;
        } else {
            stall = 0;
            stall_anchor = gbest.0;
        }
        if stall >= config.early_stop_patience {
            break;
        }
    }

    let mut chosen = gbest.0;
    if let Some(model) = options.snap_model {
        chosen = snap_into_zone(model, zone, witness, chosen, scenario, params, gbest.1);
    }
    let eval = fitness(chosen, zone, scenario, params);
    Ok(PlacementSolution {
        uav_position: chosen,
        served_ues: eval
            .links
            .iter()
            .map(|&(ue, a)| ServedUe { ue, bandwidth_hz: a.bandwidth_hz, rate_bps: a.rate_bps })
            .collect(),
        fitness: eval.value,
        feasible: eval.feasible,
        iterations,
    })
}

fn scenario_demand(zone: &CandidateZone, scenario: &Scenario) -> f64 {
    zone.members.iter().map(|&i| scenario.ues[i].demand_bps).sum()
}

/// Closest point to `best` on the segment towards the witness that lies in
/// every member's coverage region. Kept only if it scores at least as well.
fn snap_into_zone(
    model: &CoverageModel,
    zone: &CandidateZone,
    witness: Point3,
    best: Point3,
    scenario: &Scenario,
    params: &ChannelParams,
    best_value: f64,
) -> Point3 {
    let inside = |p: Point3| model.max_deficit(&zone.members, p) <= 0.0;
    if inside(best) || !inside(witness) {
        return best;
    }
    // the region is convex, so the inside part of the segment is [0, t*]
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if inside(witness + (best - witness) * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let snapped = scenario.venue.clamp(witness + (best - witness) * lo);
    if inside(snapped) && fitness(snapped, zone, scenario, params).value >= best_value {
        snapped
    } else {
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::CoverageModel;
    use crate::scenario::{UserEquipment, DEFAULT_B_MAX_HZ};

    fn scenario(points: &[(f64, f64)], demand: f64, policy: BandwidthPolicy) -> Scenario {
        Scenario {
            label: "t".into(),
            seed: 3,
            venue: FeasibleBox::new([-100.0, 100.0], [-100.0, 100.0], [10.0, 120.0]).unwrap(),
            ues: points
                .iter()
                .map(|&(x, y)| UserEquipment { position: Point3::new(x, y, 0.0), demand_bps: demand, bandwidth_hz: None })
                .collect(),
            b_max_hz: DEFAULT_B_MAX_HZ,
            policy,
        }
    }

    fn zone_for(s: &Scenario, p: &ChannelParams, members: &[usize]) -> (CoverageModel, CandidateZone) {
        let model = CoverageModel::for_scenario(s, p, true).unwrap();
        let zone = model.zone(members).unwrap();
        (model, zone)
    }

    #[test]
    fn witness_scores_total_demand() {
        let p = ChannelParams::default();
        let s = scenario(&[(0.0, 0.0), (30.0, 10.0)], 13e6, BandwidthPolicy::DemandFit);
        let (_, zone) = zone_for(&s, &p, &[0, 1]);
        let eval = fitness(zone.witness, &zone, &s, &p);
        assert!(eval.feasible);
        assert_eq!(eval.value, 26e6);
    }

    #[test]
    fn far_position_is_penalised() {
        let p = ChannelParams::default();
        let s = scenario(&[(0.0, 0.0)], 52e6, BandwidthPolicy::Fixed);
        let (_, zone) = zone_for(&s, &p, &[0]);
        let eval = fitness(Point3::new(100.0, 100.0, 10.0), &zone, &s, &p);
        assert!(!eval.feasible);
        assert!(eval.value < 0.0);
    }

    #[test]
    fn just_beyond_service_radius_fails() {
        let p = ChannelParams::default();
        let mut s = scenario(&[(0.0, 0.0)], 26e6, BandwidthPolicy::Fixed);
        s.venue = FeasibleBox::new([-400.0, 400.0], [-400.0, 400.0], [10.0, 400.0]).unwrap();
        let (_, zone) = zone_for(&s, &p, &[0]);
        let d = max_service_distance(26e6, 20e6, &p).unwrap();
        // straight up: elevation 90 deg, so the realised LoS probability beats the
        // design value; push far enough out that the extra gain cannot compensate
        let theta = p.threshold_elevation_deg().to_radians();
        let dir = Point3::new(theta.cos(), 0.0, theta.sin());
        let inside = fitness(dir * (d * 0.999), &zone, &s, &p);
        let outside = fitness(dir * (d * 1.001), &zone, &s, &p);
        assert!(inside.feasible, "{inside:?}");
        assert!(!outside.feasible);
    }

    #[test]
    fn demand_fit_picks_smallest_step() {
        let p = ChannelParams::default();
        let s = scenario(&[(0.0, 0.0)], 6.5e6, BandwidthPolicy::DemandFit);
        let uav = Point3::new(10.0, 0.0, 40.0);
        let a = allocate_bandwidth(&s, &p, 0, uav);
        assert!(a.rate_bps >= 6.5e6);
        assert_eq!(a.bandwidth_hz % BANDWIDTH_STEP_HZ, 0.0);
        let below = link_rate(s.ues[0].position, uav, a.bandwidth_hz - BANDWIDTH_STEP_HZ, &p).unwrap();
        assert!(below < 6.5e6);
    }

    #[test]
    fn singleton_zone_solution_is_feasible_and_within_range() {
        let p = ChannelParams::default();
        let s = scenario(&[(0.0, 0.0)], 6.5e6, BandwidthPolicy::Fixed);
        let (_, zone) = zone_for(&s, &p, &[0]);
        let sol = optimize_position(&zone, &s, &p, &SwarmConfig::default()).unwrap();
        assert!(sol.feasible);
        let d = sol.uav_position.norm();
        assert!(d <= max_service_distance(6.5e6, 20e6, &p).unwrap());
    }

    #[test]
    fn runs_are_bit_identical() {
        let p = ChannelParams::default();
        let s = scenario(&[(0.0, 0.0), (40.0, -20.0), (-10.0, 35.0)], 19.5e6, BandwidthPolicy::DemandFit);
        let (model, zone) = zone_for(&s, &p, &[0, 1, 2]);
        let cfg = SwarmConfig { seed: 99, ..Default::default() };
        let opts = SearchOptions { snap_model: Some(&model), strict_capacity: true, ..Default::default() };
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        let a = optimize_position_with(&zone, &s, &p, &cfg, &opts, Some(&mut t1)).unwrap();
        let b = optimize_position_with(&zone, &s, &p, &cfg, &opts, Some(&mut t2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(t1, t2);
        assert!(t1.windows(2).all(|w| w[1].gbest_fitness >= w[0].gbest_fitness));
        assert!(s.venue.contains(a.uav_position));
        assert!(a.fitness >= fitness(zone.witness, &zone, &s, &p).value);
    }

    #[test]
    fn capacity_violation_at_witness_is_reported() {
        let p = ChannelParams::default();
        let pts = [(0.0, 0.0); 9];
        let s = scenario(&pts, 6.5e6, BandwidthPolicy::Fixed);
        let (_, zone) = zone_for(&s, &p, &(0..9).collect::<Vec<_>>());
        let err = optimize_position(&zone, &s, &p, &SwarmConfig::default()).unwrap_err();
        assert!(matches!(err, PositioningError::InfeasibleZone { required_hz, .. } if required_hz == 180e6));
    }

    #[test]
    fn config_validation() {
        assert!(SwarmConfig { particle_count: 1, ..Default::default() }.validate().is_err());
        assert!(SwarmConfig { inertia_weight: 1.0, ..Default::default() }.validate().is_err());
        assert!(SwarmConfig { position_precision: 0.0, ..Default::default() }.validate().is_err());
        SwarmConfig::default().validate().unwrap();
    }
}
