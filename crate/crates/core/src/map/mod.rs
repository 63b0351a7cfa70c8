//! OpenDRIVE subset ingestion, compilation into an abstract road network, and
//! abstraction of concrete trajectories into scenarios.

mod compile;
mod model;
mod opendrive;
mod sample;
mod trace;

use thiserror::Error;

pub use compile::{abstract_network, AbstractionParams, CompiledMap, LaneGeometry};
pub use model::{
    Contact, ElementType, Junction, JunctionConnection, LaneSection, MapLane, MapModel, MapRoad,
    Poly3, RoadLink,
};
pub use opendrive::parse_opendrive;
pub use sample::{sample_centerline, LaneRef};
pub use trace::{abstract_trace, parse_trace_csv, TraceSample};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("line {line}: {message}")]
    Invalid { line: u32, message: String },
    #[error("unsupported {what} (road {road})")]
    Unsupported { what: String, road: String },
    #[error("dangling link: {0}")]
    DanglingLink(String),
    #[error("unknown lane {0}")]
    UnknownLane(String),
    #[error("ambiguous geometry: {0}")]
    Ambiguous(String),
    #[error("compiled network is malformed: {0}")]
    Defects(String),
    #[error("trace: {0}")]
    Trace(String),
}

impl MapError {
    /// Input uses a feature outside the supported subset.
    pub fn is_unsupported(&self) -> bool {
        matches!(self, MapError::Unsupported { .. })
    }
}
