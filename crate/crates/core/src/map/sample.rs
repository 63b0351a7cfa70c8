use super::model::MapModel;
use super::MapError;
use crate::geometry::{Point2, Polyline};

/// One lane of one lane section of an OpenDRIVE road.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaneRef {
    pub road: String,
    pub section: usize,
    pub lane: i32,
}

impl std::fmt::Display for LaneRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "road {} section {} lane {}", self.road, self.section, self.lane)
    }
}

/// Reference-line `s` values covering `[s0, s1]` at intervals of at most
/// `step`, both ends included.
pub(crate) fn stations(s0: f64, s1: f64, step: f64) -> Vec<f64> {
    let n = ((s1 - s0) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| s0 + (s1 - s0) * i as f64 / n as f64).collect()
}

/// Lane center sampled along the reference line, in the lane's direction of
/// travel.
pub fn sample_centerline(model: &MapModel, lane: &LaneRef, step: f64) -> Result<Polyline, MapError> {
    let unknown = || MapError::UnknownLane(lane.to_string());
    let road = model.road(&lane.road).ok_or_else(unknown)?;
    let sec = road.sections.get(lane.section).ok_or_else(unknown)?;
    sec.lane(lane.lane).ok_or_else(unknown)?;
    if !(step > 0.0) {
        return Err(MapError::Invalid { line: 0, message: format!("sampling step must be positive, got {step}") });
    }
    let (s0, s1) = (sec.s, road.section_end(lane.section));
    let mut pts: Vec<Point2> = stations(s0, s1, step)
        .into_iter()
        .map(|s| {
            let pose = road.reference_pose(s);
            let t = road.lane_center_t(lane.section, lane.lane, s);
            (pose.x - t * pose.heading.sin(), pose.y + t * pose.heading.cos())
        })
        .collect();
    if !road.travels_forward(lane.lane) {
        pts.reverse();
    }
    pts.dedup_by(|a, b| (a.0 - b.0).hypot(a.1 - b.1) < 1e-9);
    Polyline::new(pts).map_err(|e| MapError::Invalid { line: 0, message: format!("{lane}: {e}") })
}
