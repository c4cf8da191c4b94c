//! Comparison planners: a fixed UAV altitude, and a fixed number of UEs per UAV.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::channel::{max_service_distance, ChannelParams, Point3};
use crate::coverage::{CoverageModel, CoverageSphere};
use crate::planner::{place_fixed_groups, plan_detailed, Deployment, PlanError, PlanOptions};
use crate::positioning::SwarmConfig;

pub const FIXED_ALTITUDE_M: f64 = 20.0;
pub const FIXED_GROUP_SIZE: usize = 10;
const CLUSTER_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    #[serde(rename = "fixed-altitude")]
    FixedAltitude,
    #[serde(rename = "fixed-n")]
    FixedGroupSize,
}

impl std::str::FromStr for BaselineKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed-altitude" | "fixed_altitude" => Ok(BaselineKind::FixedAltitude),
            "fixed-n" | "fixed_group_size" => Ok(BaselineKind::FixedGroupSize),
            other => Err(format!("unknown baseline {other:?}, expected fixed-altitude or fixed-n")),
        }
    }
}

/// Plan with a baseline. Demand violations are left in the deployment for
/// the caller to report.
pub fn run_baseline(
    kind: BaselineKind,
    scenario: &Scenario,
    params: &ChannelParams,
    config: &SwarmConfig,
) -> Result<Deployment, PlanError> {
    scenario.validate().map_err(|e| PlanError::Config(e.to_string()))?;
    match kind {
        BaselineKind::FixedAltitude => {
            let mut pinned = scenario.clone();
            let z = FIXED_ALTITUDE_M.clamp(scenario.venue.z[0], scenario.venue.z[1]);
            pinned.venue = scenario.venue.with_fixed_altitude(z);
            let options = PlanOptions { elevation_mask: false, strict: false };
            plan_detailed(&pinned, params, config, &options).map(|o| o.deployment)
        }
        BaselineKind::FixedGroupSize => {
            let groups = capacitated_clusters(scenario, FIXED_GROUP_SIZE, config.seed);
            let spheres: Vec<CoverageSphere> = scenario
                .ues
                .iter()
                .enumerate()
                .map(|(i, u)| CoverageSphere {
                    ue_index: i,
                    center: u.position,
                    radius: max_service_distance(u.demand_bps, scenario.design_bandwidth(i), params).unwrap_or(0.0),
                })
                .collect();
            let model = CoverageModel::new(&spheres, scenario.venue, None);
            place_fixed_groups(&model, &groups, scenario, params, config)
        }
    }
}

/// `ceil(N / size)` groups of at most `size` UEs: k-means++ seeding, then
/// rounds of capacity-respecting nearest-centroid assignment.
pub(crate) fn capacitated_clusters(scenario: &Scenario, size: usize, seed: u64) -> Vec<Vec<usize>> {
    let pts: Vec<Point3> = scenario.ues.iter().map(|u| u.position).collect();
    let n = pts.len();
    let k = n.div_ceil(size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00c1_5e7e_25a1);
    let mut centroids = vec![pts[rng.random_range(0..n)]];
    while centroids.len() < k {
        let weights: Vec<f64> = pts
            .iter()
            .map(|p| centroids.iter().map(|c| (*p - *c).dot(*p - *c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut pick = n - 1;
            for (i, w) in weights.iter().enumerate() {
                if target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.push(pts[next]);
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..CLUSTER_ROUNDS {
        // closest (UE, centroid) pairs first, skipping full clusters
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * k);
        for (i, p) in pts.iter().enumerate() {
            for (c, q) in centroids.iter().enumerate() {
                pairs.push(((*p - *q).norm(), i, c));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut load = vec![0usize; k];
        let mut placed = vec![false; n];
        let mut next = vec![0usize; n];
        for (_, i, c) in pairs {
            if !placed[i] && load[c] < size {
                placed[i] = true;
                load[c] += 1;
                next[i] = c;
            }
        }
        let mut moved = Vec::with_capacity(k);
        for c in 0..k {
            let members: Vec<Point3> = (0..n).filter(|&i| next[i] == c).map(|i| pts[i]).collect();
            moved.push(if members.is_empty() {
                centroids[c]
            } else {
                members.iter().fold(Point3::default(), |a, p| a + *p) * (1.0 / members.len() as f64)
            });
        }
        let stable = next == assignment && moved == centroids;
        assignment = next;
        centroids = moved;
        if stable {
            break;
        }
    }
    (0..k).map(|c| (0..n).filter(|&i| assignment[i] == c).collect::<Vec<_>>()).filter(|g| !g.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, ScenarioKind};

    #[test]
    fn group_counts_follow_the_ceiling() {
        for (variant, n) in [(0, 20), (2, 40), (4, 60)] {
            let s = generate_scenario(ScenarioKind::C, variant, 5).unwrap();
            let groups = capacitated_clusters(&s, FIXED_GROUP_SIZE, 5);
            assert_eq!(groups.len(), n / 10);
            assert!(groups.iter().all(|g| g.len() <= FIXED_GROUP_SIZE));
            assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), n);
        }
    }

    #[test]
    fn fixed_n_uses_ceil_groups() {
        let p = ChannelParams::default();
        let s = generate_scenario(ScenarioKind::B, 0, 3).unwrap();
        let d = run_baseline(BaselineKind::FixedGroupSize, &s, &p, &SwarmConfig::default()).unwrap();
        assert_eq!(d.uav_count, 2);
    }

    #[test]
    fn fixed_altitude_single_ue_sits_at_twenty_metres() {
        let p = ChannelParams::default();
        let mut s = generate_scenario(ScenarioKind::A, 0, 3).unwrap();
        s.ues.truncate(1);
        let d = run_baseline(BaselineKind::FixedAltitude, &s, &p, &SwarmConfig::default()).unwrap();
        assert_eq!(d.uav_count, 1);
        assert_eq!(d.uav_positions[0].z, FIXED_ALTITUDE_M);
        let r = max_service_distance(6.5e6, 20e6, &p).unwrap();
        assert!((d.uav_positions[0] - s.ues[0].position).norm() <= r);
    }
}
