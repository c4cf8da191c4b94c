//! Coverage spheres, candidate zones and the zone set cover.
//!
//! Every UE gets a service ball whose radius is the largest distance at which
//! its demand is met under the design LoS probability. A UAV placed where
//! several balls intersect can serve all of their UEs. The planner optionally
//! intersects each ball with an elevation cone so that the realised LoS
//! probability is at least the design threshold, which is what makes a zone
//! witness a certificate of the rate constraint.

mod cover;
mod witness;
mod zones;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{max_service_distance, ChannelError, ChannelParams, Point3};
use crate::scenario::Scenario;

pub use cover::{greedy_cover, max_ues_per_uav, minimal_zone_cover, solve_cover, CoverGroup, CoverSolution};
pub use zones::{enumerate_zones, enumerate_zones_with_limit, EXACT_COMPONENT_LIMIT};

pub(crate) use witness::DeficitFn;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverageError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("UEs {0:?} cannot be served from inside the feasible box")]
    Unservable(Vec<usize>),
    #[error("UEs {0:?} are not contained in any candidate zone")]
    Uncoverable(Vec<usize>),
    #[error("invalid feasible box: {0}")]
    InvalidBox(String),
}

/// Axis-aligned region where UAVs may be placed, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibleBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(rename = "z_uav")]
    pub z: [f64; 2],
}

impl FeasibleBox {
    pub fn new(x: [f64; 2], y: [f64; 2], z: [f64; 2]) -> Result<Self, CoverageError> {
        let b = Self { x, y, z };
        b.validate()?;
        Ok(b)
    }

    /// Box with the altitude pinned to a single value.
    pub fn with_fixed_altitude(&self, altitude: f64) -> Self {
        Self { z: [altitude, altitude], ..*self }
    }

    pub fn validate(&self) -> Result<(), CoverageError> {
        let axes = [("x", self.x), ("y", self.y), ("z_uav", self.z)];
        for (name, [lo, hi]) in axes {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(CoverageError::InvalidBox(format!("{name} bounds must be finite")));
            }
            if lo >= hi && !(name == "z_uav" && lo == hi) {
                return Err(CoverageError::InvalidBox(format!("{name} requires min < max, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn clamp(&self, p: Point3) -> Point3 {
        Point3::new(
            p.x.clamp(self.x[0], self.x[1]),
            p.y.clamp(self.y[0], self.y[1]),
            p.z.clamp(self.z[0], self.z[1]),
        )
    }

    pub fn contains(&self, p: Point3) -> bool {
        (self.x[0]..=self.x[1]).contains(&p.x)
            && (self.y[0]..=self.y[1]).contains(&p.y)
            && (self.z[0]..=self.z[1]).contains(&p.z)
    }

    pub fn min_corner(&self) -> Point3 {
        Point3::new(self.x[0], self.y[0], self.z[0])
    }

    pub fn max_corner(&self) -> Point3 {
        Point3::new(self.x[1], self.y[1], self.z[1])
    }

    pub fn center(&self) -> Point3 {
        (self.min_corner() + self.max_corner()) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        (self.max_corner() - self.min_corner()).norm()
    }

    /// Intersection with another box, `None` when empty.
    pub fn intersect(&self, other: &FeasibleBox) -> Option<FeasibleBox> {
        let axis = |a: [f64; 2], b: [f64; 2]| {
            let lo = a[0].max(b[0]);
            let hi = a[1].min(b[1]);
            (lo <= hi).then_some([lo, hi])
        };
        Some(FeasibleBox { x: axis(self.x, other.x)?, y: axis(self.y, other.y)?, z: axis(self.z, other.z)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageSphere {
    pub ue_index: usize,
    pub center: Point3,
    pub radius: f64,
}

/// A nonempty intersection of coverage regions, certified by `witness`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateZone {
    /// Sorted UE indices.
    pub members: Vec<usize>,
    pub witness: Point3,
    /// Minus the worst member deficit at the witness; >= 0 for enumerated zones.
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessOutcome {
    Feasible { point: Point3, slack: f64 },
    /// Best point found and its (positive) worst deficit.
    Infeasible { best: Point3, deficit: f64 },
}

impl WitnessOutcome {
    pub fn point(&self) -> Point3 {
        match *self {
            WitnessOutcome::Feasible { point, .. } => point,
            WitnessOutcome::Infeasible { best, .. } => best,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, WitnessOutcome::Feasible { .. })
    }
}

/// One coverage sphere per UE, radius from the UE's demand and design bandwidth.
///
/// Fails with [`CoverageError::Unservable`] when a sphere cannot reach the
/// lowest permitted UAV altitude.
pub fn build_spheres(scenario: &Scenario, params: &ChannelParams) -> Result<Vec<CoverageSphere>, CoverageError> {
    let mut spheres = Vec::with_capacity(scenario.ues.len());
    let mut unservable = Vec::new();
    for (i, ue) in scenario.ues.iter().enumerate() {
        let radius = max_service_distance(ue.demand_bps, scenario.design_bandwidth(i), params)?;
        if radius < scenario.venue.z[0] - ue.position.z {
            unservable.push(i);
        }
        spheres.push(CoverageSphere { ue_index: i, center: ue.position, radius });
    }
    if unservable.is_empty() {
        Ok(spheres)
    } else {
        Err(CoverageError::Unservable(unservable))
    }
}

/// Spheres plus the feasible box and optional elevation mask.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    centers: Vec<Point3>,
    radii: Vec<f64>,
    bounds: FeasibleBox,
    elevation_sine: Option<f64>,
}

impl CoverageModel {
    /// `min_elevation_deg = None` uses the bare spheres.
    pub fn new(spheres: &[CoverageSphere], bounds: FeasibleBox, min_elevation_deg: Option<f64>) -> Self {
        let elevation_sine = min_elevation_deg.filter(|t| *t > 0.0).map(|t| t.min(90.0).to_radians().sin());
        Self {
            centers: spheres.iter().map(|s| s.center).collect(),
            radii: spheres.iter().map(|s| s.radius).collect(),
            bounds,
            elevation_sine,
        }
    }

    /// Spheres for the scenario, masked at the LoS-threshold elevation when
    /// `elevation_mask` is set.
    pub fn for_scenario(scenario: &Scenario, params: &ChannelParams, elevation_mask: bool) -> Result<Self, CoverageError> {
        let spheres = build_spheres(scenario, params)?;
        let mask = elevation_mask.then(|| params.threshold_elevation_deg());
        Ok(Self::new(&spheres, scenario.venue, mask))
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn bounds(&self) -> &FeasibleBox {
        &self.bounds
    }

    pub fn center(&self, ue: usize) -> Point3 {
        self.centers[ue]
    }

    pub fn radius(&self, ue: usize) -> f64 {
        self.radii[ue]
    }

    pub fn elevation_sine(&self) -> Option<f64> {
        self.elevation_sine
    }

    /// Coverage deficit of one UE at `p`, in metres; <= 0 means covered.
    pub fn deficit(&self, ue: usize, p: Point3) -> f64 {
        let c = self.centers[ue];
        let d = (p - c).norm();
        let ball = d - self.radii[ue];
        match self.elevation_sine {
            Some(s) => ball.max(s * d - (p.z - c.z)),
            None => ball,
        }
    }

    pub fn max_deficit(&self, members: &[usize], p: Point3) -> f64 {
        members.iter().map(|&i| self.deficit(i, p)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn covers(&self, ue: usize, p: Point3) -> bool {
        self.bounds.contains(p) && self.deficit(ue, p) <= 0.0
    }

    fn deficit_fn<'a>(&'a self, members: &[usize], centers: &'a mut Vec<Point3>, radii: &'a mut Vec<f64>) -> DeficitFn<'a> {
        centers.clear();
        radii.clear();
        for &i in members {
            centers.push(self.centers[i]);
            radii.push(self.radii[i]);
        }
        DeficitFn { centers, radii, elevation_sine: self.elevation_sine }
    }

    fn search(&self, members: &[usize], stop_on_sign: bool, start: Option<Point3>) -> (Point3, f64) {
        assert!(!members.is_empty(), "zone witness needs at least one member");
        let (mut centers, mut radii) = (Vec::new(), Vec::new());
        let f = self.deficit_fn(members, &mut centers, &mut radii);
        let m = f.minimize(&self.bounds, start, stop_on_sign);
        (m.point, m.value)
    }

    /// Point in the box minimising the worst member deficit.
    pub fn zone_witness(&self, members: &[usize]) -> WitnessOutcome {
        self.witness_from(members, None)
    }

    /// As [`Self::zone_witness`], also trying `start` as a seed.
    pub fn witness_from(&self, members: &[usize], start: Option<Point3>) -> WitnessOutcome {
        let (point, value) = self.search(members, false, start);
        if value <= 0.0 {
            WitnessOutcome::Feasible { point, slack: -value }
        } else {
            WitnessOutcome::Infeasible { best: point, deficit: value }
        }
    }

    /// Some point covering every member, without maximising the slack.
    pub fn feasible_point(&self, members: &[usize], start: Option<Point3>) -> Option<Point3> {
        let (point, value) = self.search(members, true, start);
        (value <= 0.0).then_some(point)
    }

    /// Zone for `members` with a slack-maximising witness.
    pub fn zone(&self, members: &[usize]) -> Option<CandidateZone> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        match self.zone_witness(&members) {
            WitnessOutcome::Feasible { point, slack } => Some(CandidateZone { members, witness: point, slack }),
            WitnessOutcome::Infeasible { .. } => None,
        }
    }

    /// Axis-aligned bounds of the member-ball intersection, clipped to the box.
    pub fn zone_bounds(&self, members: &[usize]) -> Option<FeasibleBox> {
        let mut b = self.bounds;
        for &i in members {
            let c = self.centers[i];
            let r = self.radii[i];
            let ball = FeasibleBox { x: [c.x - r, c.x + r], y: [c.y - r, c.y + r], z: [c.z - r, c.z + r] };
            b = b.intersect(&ball)?;
        }
        Some(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(i: usize, c: Point3, r: f64) -> CoverageSphere {
        CoverageSphere { ue_index: i, center: c, radius: r }
    }

    fn open_box() -> FeasibleBox {
        FeasibleBox::new([-50.0, 50.0], [-50.0, 50.0], [0.5, 30.0]).unwrap()
    }

    #[test]
    fn singleton_witness_is_inside() {
        let m = CoverageModel::new(&[sphere(0, Point3::new(3.0, 4.0, 0.0), 10.0)], open_box(), None);
        match m.zone_witness(&[0]) {
            WitnessOutcome::Feasible { point, slack } => {
                assert!(slack > 0.0);
                assert!(m.covers(0, point));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disjoint_balls_are_infeasible() {
        let spheres = [sphere(0, Point3::new(-10.0, 0.0, 0.0), 4.0), sphere(1, Point3::new(10.0, 0.0, 0.0), 5.0)];
        let m = CoverageModel::new(&spheres, open_box(), None);
        assert!(!m.zone_witness(&[0, 1]).is_feasible());
        assert!(m.feasible_point(&[0, 1], None).is_none());
    }

    #[test]
    fn unit_balls_one_metre_apart() {
        let b = FeasibleBox::new([-5.0, 5.0], [-5.0, 5.0], [0.0, 5.0]).unwrap();
        let spheres = [sphere(0, Point3::new(0.0, 0.0, 0.0), 1.0), sphere(1, Point3::new(1.0, 0.0, 0.0), 1.0)];
        let m = CoverageModel::new(&spheres, b, None);
        let WitnessOutcome::Feasible { point, slack } = m.zone_witness(&[0, 1]) else { panic!() };
        // analytic optimum: the midpoint, deficit -0.5
        assert!((slack - 0.5).abs() < 1e-4);
        assert!((point.x - 0.5).abs() < 1e-2);
        for i in 0..2 {
            assert!((point - spheres[i].center).norm() - 1.0 < 0.0);
        }
    }

    #[test]
    fn box_intersection() {
        let a = open_box();
        let b = FeasibleBox::new([40.0, 60.0], [-1.0, 1.0], [10.0, 40.0]).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.x, [40.0, 50.0]);
        assert_eq!(c.z, [10.0, 30.0]);
        let far = FeasibleBox::new([100.0, 101.0], [0.0, 1.0], [0.0, 1.0]).unwrap();
        assert!(a.intersect(&far).is_none());
        assert!(FeasibleBox::new([1.0, 1.0], [0.0, 1.0], [0.0, 1.0]).is_err());
        assert!(FeasibleBox::new([0.0, 1.0], [0.0, 1.0], [5.0, 5.0]).is_ok());
    }
}
