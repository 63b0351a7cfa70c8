//! Universes, relations, scenes, scenarios and the abstract road network.

mod ids;
mod network;
mod relation;
mod scenario;
mod scene;

pub use ids::{is_valid_ident, sanitize, InvalidId, LaneId, PointId, RoadId, VehicleId};
pub use network::{validate_network, Defect, DefectKind, NetworkIndex, PointClass, Road, RoadNetwork};
pub use relation::{lon_rel_of_ranges, InvalidRange, LonRel, SRange, UnknownRelation};
pub use scenario::{Scenario, ScenarioError};
pub use scene::{LaneSet, Scene};
