use crate::geometry::{Pose, RefLineSegment};

/// Cubic `a + b ds + c ds² + d ds³` starting at `start` (an `s` or `sOffset`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly3 {
    pub start: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Poly3 {
    pub fn constant(start: f64, a: f64) -> Self {
        Self { start, a, b: 0.0, c: 0.0, d: 0.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.start;
        self.a + t * (self.b + t * (self.c + t * self.d))
    }
}

/// Evaluates the last record starting at or before `x` (0 when none).
pub(crate) fn eval_records(records: &[Poly3], x: f64) -> f64 {
    records
        .iter()
        .rev()
        .find(|p| p.start <= x + 1e-12)
        .or(records.first())
        .map_or(0.0, |p| p.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Contact {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementType {
    Road,
    Junction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoadLink {
    pub element_type: ElementType,
    pub element_id: String,
    pub contact: Option<Contact>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapLane {
    /// Positive on the left of the reference line, negative on the right.
    pub id: i32,
    pub kind: String,
    /// Width records with `start` = `sOffset` from the section start.
    pub widths: Vec<Poly3>,
    pub predecessor: Option<i32>,
    pub successor: Option<i32>,
}

impl MapLane {
    pub fn is_driving(&self) -> bool {
        self.kind == "driving"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneSection {
    pub s: f64,
    /// Sorted by id; the center lane is not stored.
    pub lanes: Vec<MapLane>,
}

impl LaneSection {
    pub fn lane(&self, id: i32) -> Option<&MapLane> {
        self.lanes.iter().find(|l| l.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapRoad {
    pub id: String,
    pub length: f64,
    /// Junction this road belongs to (connecting roads).
    pub junction: Option<String>,
    /// Left-hand traffic flips which side travels along the reference line.
    pub left_hand: bool,
    pub plan_view: Vec<RefLineSegment>,
    pub lane_offsets: Vec<Poly3>,
    pub sections: Vec<LaneSection>,
    pub predecessor: Option<RoadLink>,
    pub successor: Option<RoadLink>,
}

impl MapRoad {
    pub fn reference_pose(&self, s: f64) -> Pose {
        let seg = self
            .plan_view
            .iter()
            .rev()
            .find(|g| g.s0 <= s + 1e-9)
            .unwrap_or(&self.plan_view[0]);
        seg.eval((s - seg.s0).clamp(0.0, seg.length))
    }

    pub fn section_end(&self, k: usize) -> f64 {
        self.sections.get(k + 1).map_or(self.length, |next| next.s)
    }

    /// Index of the section containing `s`.
    pub fn section_at(&self, s: f64) -> usize {
        self.sections.iter().rposition(|sec| sec.s <= s + 1e-9).unwrap_or(0)
    }

    pub fn lane_width(&self, k: usize, id: i32, s: f64) -> f64 {
        let sec = &self.sections[k];
        sec.lane(id).map_or(0.0, |l| eval_records(&l.widths, s - sec.s))
    }

    /// Lateral offset of a lane's center from the reference line.
    pub fn lane_center_t(&self, k: usize, id: i32, s: f64) -> f64 {
        let (inner, outer) = self.lane_bounds_t(k, id, s);
        0.5 * (inner + outer)
    }

    /// Lateral offsets `(inner, outer)` of a lane's borders.
    pub fn lane_bounds_t(&self, k: usize, id: i32, s: f64) -> (f64, f64) {
        let sign = if id > 0 { 1.0 } else { -1.0 };
        let base = eval_records(&self.lane_offsets, s);
        let inner: f64 = (1..id.abs()).map(|j| self.lane_width(k, j * id.signum(), s)).sum();
        let w = self.lane_width(k, id, s);
        (base + sign * inner, base + sign * (inner + w))
    }

    /// Lanes on the right travel along the reference line under right-hand
    /// traffic.
    pub fn travels_forward(&self, id: i32) -> bool {
        (id < 0) != self.left_hand
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionConnection {
    pub id: String,
    pub incoming_road: String,
    pub connecting_road: String,
    pub contact: Contact,
    /// `(incoming lane, connecting lane)` pairs.
    pub lane_links: Vec<(i32, i32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub id: String,
    pub connections: Vec<JunctionConnection>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MapModel {
    pub roads: Vec<MapRoad>,
    pub junctions: Vec<Junction>,
}

impl MapModel {
    pub fn road(&self, id: &str) -> Option<&MapRoad> {
        self.roads.iter().find(|r| r.id == id)
    }

    /// Roads that are connecting roads of some junction.
    pub fn connecting_roads(&self) -> impl Iterator<Item = &MapRoad> {
        self.roads.iter().filter(|r| r.junction.is_some())
    }
}
