mod common;

use common::{arr, rel_err, rng, RegionOracle, RADIO};
use rand::Rng;
use uavplan::coverage::{enumerate_zones, CoverageSphere};
use uavplan::scenario::{DEFAULT_B_MAX_HZ, FIXED_ALTITUDE_M, FIXED_GROUP_SIZE, MCS_TABLE, UE_COUNTS, VENUE_SIDES_M};
use uavplan::{generate_scenario, ChannelParams, CoverageModel, FeasibleBox, Point3, ScenarioKind};

#[test]
fn default_channel_matches_published_table() {
    let p = ChannelParams::default();
    assert_eq!(p.carrier_frequency, RADIO.carrier_mhz * 1e6);
    assert!(rel_err(p.tx_power, RADIO.tx_watts()) < 1e-15);
    assert!(rel_err(p.noise_spectral_density, RADIO.noise_w_per_hz()) < 1e-15);
    assert_eq!((p.c1, p.c2), (RADIO.c1, RADIO.c2));
    assert_eq!(p.los_threshold, 0.9);
    assert!(rel_err(p.mu_los, 10f64.powf(0.1)) < 1e-15);
    assert!(rel_err(p.mu_nlos, 100.0) < 1e-15);
}

#[test]
fn threshold_elevation_matches_bisection() {
    let p = ChannelParams::default();
    let theta = p.threshold_elevation_deg();
    assert!((theta - RADIO.threshold_elevation_bisect(0.9)).abs() < 1e-9);
    assert!((theta - 25.525).abs() < 1e-3, "{theta}");
}

#[test]
fn evaluation_scenarios_match_published_setup() {
    assert_eq!(DEFAULT_B_MAX_HZ, 8.0 * 20e6);
    assert_eq!(MCS_TABLE.map(|m| m.1), [6.5e6, 13e6, 19.5e6, 26e6, 39e6, 52e6]);
    assert_eq!(VENUE_SIDES_M, [100.0, 200.0, 300.0, 400.0, 500.0]);
    assert_eq!(UE_COUNTS, [20, 30, 40, 50, 60]);
    assert_eq!((FIXED_GROUP_SIZE, FIXED_ALTITUDE_M), (10, 20.0));
    for v in 0..6 {
        let s = generate_scenario(ScenarioKind::A, v, 1).unwrap();
        assert_eq!((s.ues.len(), s.venue.x, s.venue.y), (20, [0.0, 100.0], [0.0, 100.0]));
    }
    for v in 0..5 {
        let b = generate_scenario(ScenarioKind::B, v, 1).unwrap();
        assert_eq!(b.venue.x[1], VENUE_SIDES_M[v]);
        assert!(b.ues.iter().all(|u| u.demand_bps == 6.5e6));
        let c = generate_scenario(ScenarioKind::C, v, 1).unwrap();
        assert_eq!(c.ues.len(), UE_COUNTS[v]);
    }
}

fn maximal_feasible_sets(oracle: &mut RegionOracle, n: usize) -> Vec<u32> {
    let full = (1u32 << n) - 1;
    let feasible: Vec<u32> = (1..=full).filter(|&m| oracle.feasible(m)).collect();
    let mut maximal: Vec<u32> = feasible
        .iter()
        .copied()
        .filter(|&m| !feasible.iter().any(|&o| o != m && o & m == m))
        .collect();
    maximal.sort_unstable();
    maximal
}

fn check_zones_against_oracle(seed: u64, masked: bool, flat: bool) {
    let mut r = rng(seed);
    for case in 0..20 {
        let n = r.random_range(1..=7usize);
        let side = r.random_range(100.0..400.0);
        let z = if flat { [40.0, 40.0] } else { [10.0, 120.0] };
        let bounds = FeasibleBox { x: [0.0, side], y: [0.0, side], z };
        let spheres: Vec<CoverageSphere> = (0..n)
            .map(|i| CoverageSphere {
                ue_index: i,
                center: Point3::new(r.random_range(0.0..side), r.random_range(0.0..side), 0.0),
                radius: r.random_range(50.0..200.0),
            })
            .collect();
        let mask = masked.then(|| ChannelParams::default().threshold_elevation_deg());
        let model = CoverageModel::new(&spheres, bounds, mask);
        let zones = enumerate_zones(&model);

        let mut oracle = RegionOracle::new(
            spheres.iter().map(|s| arr(s.center)).collect(),
            spheres.iter().map(|s| s.radius).collect(),
            mask,
            [bounds.x, bounds.y, bounds.z],
        );
        let expected = maximal_feasible_sets(&mut oracle, n);
        let mut got: Vec<u32> = zones.iter().map(|z| z.members.iter().fold(0, |m, &i| m | 1 << i)).collect();
        got.sort_unstable();
        assert_eq!(got, expected, "seed {seed} case {case}");

        for zone in &zones {
            let m = zone.members.iter().fold(0, |m, &i| m | 1 << i);
            assert!(bounds.contains(zone.witness));
            assert!(oracle.violation(m, arr(zone.witness)) <= 1e-9, "seed {seed} case {case}");
        }
    }
}

#[test]
fn zones_are_exactly_the_maximal_feasible_sets() {
    check_zones_against_oracle(1, true, false);
}

#[test]
fn zones_without_elevation_mask() {
    check_zones_against_oracle(2, false, false);
}

#[test]
fn zones_at_fixed_altitude() {
    check_zones_against_oracle(3, false, true);
}
