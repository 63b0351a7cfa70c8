//! Planar geometry: reference-line segments (line and arc) and sampled
//! polylines with Frenet projection.

mod polyline;
mod refline;

pub use polyline::{segment_crossing, FrenetPose, InvalidPolyline, Polyline};
pub use refline::{InvalidSegment, Pose, RefLineSegment, SegmentKind};

pub type Point2 = (f64, f64);
