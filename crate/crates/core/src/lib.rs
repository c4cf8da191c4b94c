//! Traffic-aware multi-UAV deployment planning.
//!
//! Given ground UE positions and per-UE traffic demands, find the fewest
//! UAV access points and their 3D positions so that every demand is met
//! under a probabilistic air-to-ground channel. The pipeline is: coverage
//! spheres per UE, candidate zones where spheres intersect, a minimum zone
//! cover, and PSO refinement of one position per chosen zone.

pub mod channel;
pub mod coverage;
pub mod io;
pub mod planner;
pub mod positioning;
pub mod scenario;

pub use channel::{ChannelParams, Point3};
pub use coverage::{CandidateZone, CoverageModel, FeasibleBox};
pub use planner::{plan_deployment, validate_deployment, Deployment, PlanError, ValidationReport};
pub use positioning::SwarmConfig;
pub use scenario::{generate_scenario, BandwidthPolicy, Scenario, ScenarioKind};
