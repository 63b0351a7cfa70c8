use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::ids::{LaneId, PointId, RoadId};

/// Class of a special point on the road network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointClass {
    /// Two unconnected lanes cross here.
    Intersection,
    /// Lane endpoint where vehicles continue onto successor lanes.
    Connection,
    /// Start of an opposite-direction overlap segment (reference direction).
    OverlapStart,
    /// End of an opposite-direction overlap segment.
    OverlapEnd,
}

impl PointClass {
    pub fn code(self) -> &'static str {
        match self {
            PointClass::Intersection => "x",
            PointClass::Connection => "c",
            PointClass::OverlapStart => "os",
            PointClass::OverlapEnd => "oe",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "x" => Some(PointClass::Intersection),
            "c" => Some(PointClass::Connection),
            "os" => Some(PointClass::OverlapStart),
            "oe" => Some(PointClass::OverlapEnd),
            _ => None,
        }
    }
}

/// Lanes of one uni-directional road, ordered left to right in the direction
/// of travel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Road {
    pub id: RoadId,
    pub lanes: Vec<LaneId>,
}

impl Road {
    pub fn new(id: RoadId, lanes: Vec<LaneId>) -> Self {
        Self { id, lanes }
    }
}

/// The abstract road network: roads, classified points, per-lane point order,
/// connection successors, overlap pairs and point-lane affiliation.
///
/// Construction never fails; [`validate_network`] reports structural defects.
/// The dense index built at construction skips anything it cannot resolve.
#[derive(Debug, Clone)]
pub struct RoadNetwork {
    roads: Vec<Road>,
    points: BTreeMap<PointId, PointClass>,
    succ_p: BTreeSet<(LaneId, PointId, PointId)>,
    succ_c: BTreeSet<(PointId, LaneId)>,
    overlaps: BTreeSet<(PointId, PointId)>,
    affiliation: BTreeSet<(LaneId, PointId)>,
    index: NetworkIndex,
}

impl PartialEq for RoadNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.roads == other.roads
            && self.points == other.points
            && self.succ_p == other.succ_p
            && self.succ_c == other.succ_c
            && self.overlaps == other.overlaps
            && self.affiliation == other.affiliation
    }
}

/// Dense lookup tables over lanes, roads and points.
#[derive(Debug, Clone, Default)]
pub struct NetworkIndex {
    pub lanes: Vec<LaneId>,
    pub lane_ix: HashMap<LaneId, usize>,
    pub lane_road: Vec<usize>,
    /// Position of the lane within its road, 0 = leftmost.
    pub lane_pos: Vec<usize>,
    pub road_ix: HashMap<RoadId, usize>,
    /// Lane indices per road, left to right.
    pub road_lanes: Vec<Vec<usize>>,
    pub points: Vec<PointId>,
    pub point_ix: HashMap<PointId, usize>,
    pub point_class: Vec<PointClass>,
    /// Lanes affiliated with each point.
    pub point_lanes: Vec<Vec<usize>>,
    /// `point_on_road[p * n_roads + r]`: some lane of road `r` carries `p`.
    point_on_road: Vec<bool>,
    /// Successor lanes per connection point.
    pub succ_lanes: Vec<Vec<usize>>,
    /// Per road, ordered point pairs `(p1, p2)` where `p1` comes before `p2`
    /// in the direction of travel on some lane of the road (transitive).
    pub road_point_order: Vec<Vec<(usize, usize)>>,
    /// Overlap segments as `(start, end)` point indices.
    pub overlaps: Vec<(usize, usize)>,
}

impl NetworkIndex {
    pub fn point_on_road(&self, p: usize, road: usize) -> bool {
        self.point_on_road[p * self.road_lanes.len() + road]
    }

    pub fn lane_has_point(&self, lane: usize, p: usize) -> bool {
        self.point_lanes[p].contains(&lane)
    }

    /// `a` is strictly left of `b` on the same road (transitive closure of
    /// the adjacent-left relation).
    pub fn cleft(&self, a: usize, b: usize) -> bool {
        self.lane_road[a] == self.lane_road[b] && self.lane_pos[a] < self.lane_pos[b]
    }
}

impl RoadNetwork {
    pub fn new(
        roads: Vec<Road>,
        points: BTreeMap<PointId, PointClass>,
        succ_p: BTreeSet<(LaneId, PointId, PointId)>,
        succ_c: BTreeSet<(PointId, LaneId)>,
        overlaps: BTreeSet<(PointId, PointId)>,
        affiliation: BTreeSet<(LaneId, PointId)>,
    ) -> Self {
        let mut net = Self {
            roads,
            points,
            succ_p,
            succ_c,
            overlaps,
            affiliation,
            index: NetworkIndex::default(),
        };
        net.index = build_index(&net);
        net
    }

    /// A single road with no special points, as used on highways.
    pub fn highway(road: Road) -> Self {
        Self::new(
            vec![road],
            BTreeMap::new(),
            BTreeSet::new(),
            BTreeSet::new(),
            BTreeSet::new(),
            BTreeSet::new(),
        )
    }

    pub fn roads(&self) -> &[Road] {
        &self.roads
    }

    pub fn points(&self) -> &BTreeMap<PointId, PointClass> {
        &self.points
    }

    pub fn succ_p(&self) -> &BTreeSet<(LaneId, PointId, PointId)> {
        &self.succ_p
    }

    pub fn succ_c(&self) -> &BTreeSet<(PointId, LaneId)> {
        &self.succ_c
    }

    pub fn overlaps(&self) -> &BTreeSet<(PointId, PointId)> {
        &self.overlaps
    }

    pub fn affiliation(&self) -> &BTreeSet<(LaneId, PointId)> {
        &self.affiliation
    }

    pub fn index(&self) -> &NetworkIndex {
        &self.index
    }

    pub fn lane_count(&self) -> usize {
        self.index.lanes.len()
    }

    pub fn point_count(&self) -> usize {
        self.index.points.len()
    }

    pub fn road_of(&self, lane: &LaneId) -> Option<&RoadId> {
        let ix = *self.index.lane_ix.get(lane)?;
        Some(&self.roads[self.index.lane_road[ix]].id)
    }
}

fn build_index(net: &RoadNetwork) -> NetworkIndex {
    let mut ix = NetworkIndex::default();
    for (r, road) in net.roads.iter().enumerate() {
        ix.road_ix.entry(road.id.clone()).or_insert(r);
        let mut lanes = Vec::new();
        for lane in &road.lanes {
            if ix.lane_ix.contains_key(lane) {
                continue;
            }
            let l = ix.lanes.len();
            ix.lanes.push(lane.clone());
            ix.lane_ix.insert(lane.clone(), l);
            ix.lane_road.push(r);
            ix.lane_pos.push(lanes.len());
            lanes.push(l);
        }
        ix.road_lanes.push(lanes);
    }
    for (p, (id, class)) in net.points.iter().enumerate() {
        ix.points.push(id.clone());
        ix.point_ix.insert(id.clone(), p);
        ix.point_class.push(*class);
    }
    let n_points = ix.points.len();
    let n_roads = ix.road_lanes.len();
    ix.point_lanes = vec![Vec::new(); n_points];
    ix.point_on_road = vec![false; n_points * n_roads];
    for (lane, point) in &net.affiliation {
        if let (Some(&l), Some(&p)) = (ix.lane_ix.get(lane), ix.point_ix.get(point)) {
            ix.point_lanes[p].push(l);
            ix.point_on_road[p * n_roads + ix.lane_road[l]] = true;
        }
    }
    for lanes in &mut ix.point_lanes {
        lanes.sort_unstable();
        lanes.dedup();
    }
    ix.succ_lanes = vec![Vec::new(); n_points];
    for (point, lane) in &net.succ_c {
        if let (Some(&p), Some(&l)) = (ix.point_ix.get(point), ix.lane_ix.get(lane)) {
            ix.succ_lanes[p].push(l);
        }
    }
    for succ in &mut ix.succ_lanes {
        succ.sort_unstable();
        succ.dedup();
    }

    // Transitive point order per road, from the per-lane successor chains.
    let mut lane_edges: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (lane, p1, p2) in &net.succ_p {
        if let (Some(&l), Some(&a), Some(&b)) = (
            ix.lane_ix.get(lane),
            ix.point_ix.get(p1),
            ix.point_ix.get(p2),
        ) {
            lane_edges.entry(l).or_default().push((a, b));
        }
    }
    let mut road_order: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); n_roads];
    let mut lanes_sorted: Vec<_> = lane_edges.into_iter().collect();
    lanes_sorted.sort();
    for (l, edges) in lanes_sorted {
        let closure = transitive_closure(&edges);
        road_order[ix.lane_road[l]].extend(closure);
    }
    ix.road_point_order = road_order.into_iter().map(|s| s.into_iter().collect()).collect();

    for (a, b) in &net.overlaps {
        if let (Some(&pa), Some(&pb)) = (ix.point_ix.get(a), ix.point_ix.get(b)) {
            ix.overlaps.push((pa, pb));
        }
    }
    ix
}

/// Closure of a small edge set; cycles yield self pairs which callers treat
/// as defects.
fn transitive_closure(edges: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    let mut closure: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    loop {
        let mut added = Vec::new();
        for &(a, b) in &closure {
            for &(c, d) in &closure {
                if b == c && !closure.contains(&(a, d)) {
                    added.push((a, d));
                }
            }
        }
        if added.is_empty() {
            return closure;
        }
        closure.extend(added);
    }
}

/// One violated structural invariant of a road network.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Defect {
    pub kind: DefectKind,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DefectKind {
    EmptyRoad,
    DuplicateRoad,
    DuplicateLane,
    LaneInSeveralRoads,
    UnknownLane,
    UnknownPoint,
    OverlapClassMismatch,
    UnpairedOverlapPoint,
    ConnectionClassMismatch,
    PointOrderNotAcyclic,
    PointOrderNotChain,
    PointOrderUnaffiliated,
    UnaffiliatedPoint,
    IntersectionArity,
    ConnectionWithoutIncoming,
}

impl DefectKind {
    pub fn description(self) -> &'static str {
        match self {
            DefectKind::EmptyRoad => "road has no lanes",
            DefectKind::DuplicateRoad => "duplicate road id",
            DefectKind::DuplicateLane => "duplicate lane within road",
            DefectKind::LaneInSeveralRoads => "lane belongs to several roads",
            DefectKind::UnknownLane => "unknown lane",
            DefectKind::UnknownPoint => "unknown point",
            DefectKind::OverlapClassMismatch => "overlap pair class mismatch",
            DefectKind::UnpairedOverlapPoint => "overlap endpoint without pair",
            DefectKind::ConnectionClassMismatch => "connection successor class mismatch",
            DefectKind::PointOrderNotAcyclic => "point order not acyclic",
            DefectKind::PointOrderNotChain => "point order not a single chain",
            DefectKind::PointOrderUnaffiliated => "ordered point not affiliated with lane",
            DefectKind::UnaffiliatedPoint => "point not affiliated with any lane",
            DefectKind::IntersectionArity => {
                "intersection point needs exactly two lanes on different roads"
            }
            DefectKind::ConnectionWithoutIncoming => "connection point without incoming lane",
        }
    }
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.kind.description(), self.ids.join(", "))
    }
}

/// Checks every structural invariant; an empty list means the network is
/// well formed. Defects come back sorted.
pub fn validate_network(n: &RoadNetwork) -> Vec<Defect> {
    let mut defects = Vec::new();
    let mut push = |kind: DefectKind, ids: Vec<String>| defects.push(Defect { kind, ids });

    let mut lane_owner: HashMap<&LaneId, &RoadId> = HashMap::new();
    let mut seen_roads = BTreeSet::new();
    for road in &n.roads {
        if !seen_roads.insert(&road.id) {
            push(DefectKind::DuplicateRoad, vec![road.id.to_string()]);
        }
        if road.lanes.is_empty() {
            push(DefectKind::EmptyRoad, vec![road.id.to_string()]);
        }
        let mut in_road = BTreeSet::new();
        for lane in &road.lanes {
            if !in_road.insert(lane) {
                push(DefectKind::DuplicateLane, vec![road.id.to_string(), lane.to_string()]);
                continue;
            }
            if let Some(other) = lane_owner.insert(lane, &road.id) {
                push(
                    DefectKind::LaneInSeveralRoads,
                    vec![lane.to_string(), other.to_string(), road.id.to_string()],
                );
            }
        }
    }

    let known_lane = |l: &LaneId| lane_owner.contains_key(l);
    let class_of = |p: &PointId| n.points.get(p).copied();

    for (lane, point) in &n.affiliation {
        if !known_lane(lane) {
            push(DefectKind::UnknownLane, vec![lane.to_string()]);
        }
        if class_of(point).is_none() {
            push(DefectKind::UnknownPoint, vec![point.to_string()]);
        }
    }

    for (p1, p2) in &n.overlaps {
        match (class_of(p1), class_of(p2)) {
            (Some(PointClass::OverlapStart), Some(PointClass::OverlapEnd)) => {}
            (None, _) => push(DefectKind::UnknownPoint, vec![p1.to_string()]),
            (_, None) => push(DefectKind::UnknownPoint, vec![p2.to_string()]),
            _ => push(DefectKind::OverlapClassMismatch, vec![p1.to_string(), p2.to_string()]),
        }
    }
    for (p, class) in &n.points {
        let paired = match class {
            PointClass::OverlapStart => n.overlaps.iter().any(|(a, _)| a == p),
            PointClass::OverlapEnd => n.overlaps.iter().any(|(_, b)| b == p),
            _ => true,
        };
        if !paired {
            push(DefectKind::UnpairedOverlapPoint, vec![p.to_string()]);
        }
    }

    for (p, lane) in &n.succ_c {
        match class_of(p) {
            Some(PointClass::Connection) => {}
            Some(_) => push(DefectKind::ConnectionClassMismatch, vec![p.to_string()]),
            None => push(DefectKind::UnknownPoint, vec![p.to_string()]),
        }
        if !known_lane(lane) {
            push(DefectKind::UnknownLane, vec![lane.to_string()]);
        }
    }

    // Per-lane point order: a single acyclic chain over the affiliated points.
    let mut per_lane: BTreeMap<&LaneId, Vec<(&PointId, &PointId)>> = BTreeMap::new();
    for (lane, a, b) in &n.succ_p {
        if !known_lane(lane) {
            push(DefectKind::UnknownLane, vec![lane.to_string()]);
        }
        for p in [a, b] {
            if class_of(p).is_none() {
                push(DefectKind::UnknownPoint, vec![p.to_string()]);
            } else if !n.affiliation.contains(&(lane.clone(), p.clone())) {
                push(DefectKind::PointOrderUnaffiliated, vec![lane.to_string(), p.to_string()]);
            }
        }
        per_lane.entry(lane).or_default().push((a, b));
    }
    let mut lane_points: BTreeMap<&LaneId, BTreeSet<&PointId>> = BTreeMap::new();
    for (lane, p) in &n.affiliation {
        lane_points.entry(lane).or_default().insert(p);
    }
    for (lane, points) in &lane_points {
        let edges = per_lane.get(lane).cloned().unwrap_or_default();
        if let Some(cycle_at) = find_cycle(&edges) {
            push(DefectKind::PointOrderNotAcyclic, vec![lane.to_string(), cycle_at.to_string()]);
            continue;
        }
        if points.len() >= 2 && !is_single_chain(&edges, points) {
            push(DefectKind::PointOrderNotChain, vec![lane.to_string()]);
        }
    }
    for (lane, edges) in &per_lane {
        if !lane_points.contains_key(lane) {
            if let Some(cycle_at) = find_cycle(edges) {
                push(DefectKind::PointOrderNotAcyclic, vec![lane.to_string(), cycle_at.to_string()]);
            }
        }
    }

    for (p, class) in &n.points {
        let lanes: Vec<&LaneId> = n
            .affiliation
            .iter()
            .filter(|(_, q)| q == p)
            .map(|(l, _)| l)
            .collect();
        if lanes.is_empty() {
            push(DefectKind::UnaffiliatedPoint, vec![p.to_string()]);
            continue;
        }
        match class {
            PointClass::Intersection => {
                let ok = lanes.len() == 2 && {
                    let r0 = lane_owner.get(lanes[0]);
                    let r1 = lane_owner.get(lanes[1]);
                    r0.is_some() && r1.is_some() && r0 != r1
                };
                if !ok {
                    let mut ids = vec![p.to_string()];
                    ids.extend(lanes.iter().map(|l| l.to_string()));
                    push(DefectKind::IntersectionArity, ids);
                }
            }
            PointClass::Connection => {
                let incoming = lanes
                    .iter()
                    .any(|l| !n.succ_c.contains(&(p.clone(), (*l).clone())));
                if !incoming {
                    push(DefectKind::ConnectionWithoutIncoming, vec![p.to_string()]);
                }
            }
            _ => {}
        }
    }

    defects.sort();
    defects.dedup();
    defects
}

fn find_cycle<'a>(edges: &[(&'a PointId, &'a PointId)]) -> Option<&'a PointId> {
    let mut nodes: BTreeSet<&PointId> = BTreeSet::new();
    for (a, b) in edges {
        nodes.insert(a);
        nodes.insert(b);
    }
    // Kahn's algorithm; leftover nodes sit on or behind a cycle.
    let mut indeg: BTreeMap<&PointId, usize> = nodes.iter().map(|n| (*n, 0)).collect();
    for (_, b) in edges {
        *indeg.get_mut(b).unwrap() += 1;
    }
    let mut queue: Vec<&PointId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut removed = 0;
    while let Some(n) = queue.pop() {
        removed += 1;
        for (a, b) in edges {
            if *a == n {
                let d = indeg.get_mut(b).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push(b);
                }
            }
        }
    }
    if removed == nodes.len() {
        None
    } else {
        indeg.into_iter().find(|(_, d)| *d > 0).map(|(n, _)| n)
    }
}

fn is_single_chain(edges: &[(&PointId, &PointId)], points: &BTreeSet<&PointId>) -> bool {
    if edges.len() + 1 != points.len() {
        return false;
    }
    let mut next: BTreeMap<&PointId, &PointId> = BTreeMap::new();
    let mut has_pred: BTreeSet<&PointId> = BTreeSet::new();
    for (a, b) in edges {
        if next.insert(a, b).is_some() || !has_pred.insert(b) {
            return false;
        }
    }
    let starts: Vec<_> = points.iter().filter(|p| !has_pred.contains(*p)).collect();
    if starts.len() != 1 {
        return false;
    }
    let mut cur = *starts[0];
    let mut visited = 1;
    while let Some(n) = next.get(cur) {
        cur = n;
        visited += 1;
    }
    visited == points.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane(s: &str) -> LaneId {
        LaneId::new(s).unwrap()
    }
    fn point(s: &str) -> PointId {
        PointId::new(s).unwrap()
    }
    fn road(s: &str, lanes: &[&str]) -> Road {
        Road::new(RoadId::new(s).unwrap(), lanes.iter().map(|l| lane(l)).collect())
    }

    fn intersection_network() -> RoadNetwork {
        RoadNetwork::new(
            vec![road("ra", &["la"]), road("rb", &["lb"])],
            [(point("px"), PointClass::Intersection)].into(),
            BTreeSet::new(),
            BTreeSet::new(),
            BTreeSet::new(),
            [(lane("la"), point("px")), (lane("lb"), point("px"))].into(),
        )
    }

    #[test]
    fn intersection_network_is_valid() {
        assert!(validate_network(&intersection_network()).is_empty());
    }

    #[test]
    fn cyclic_point_order_is_reported() {
        let n = RoadNetwork::new(
            vec![road("ra", &["la"])],
            [(point("p1"), PointClass::Connection), (point("p2"), PointClass::Connection)].into(),
            [(lane("la"), point("p1"), point("p2")), (lane("la"), point("p2"), point("p1"))].into(),
            BTreeSet::new(),
            BTreeSet::new(),
            [(lane("la"), point("p1")), (lane("la"), point("p2"))].into(),
        );
        let defects = validate_network(&n);
        assert!(defects.iter().any(|d| d.kind == DefectKind::PointOrderNotAcyclic));
        assert!(defects.iter().any(|d| d.to_string().starts_with("point order not acyclic")));
    }

    #[test]
    fn overlap_with_connection_end_is_reported() {
        let n = RoadNetwork::new(
            vec![road("ra", &["la"]), road("rb", &["lb"])],
            [(point("ps"), PointClass::OverlapStart), (point("pc"), PointClass::Connection)].into(),
            [(lane("la"), point("ps"), point("pc"))].into(),
            BTreeSet::new(),
            [(point("ps"), point("pc"))].into(),
            [(lane("la"), point("ps")), (lane("la"), point("pc")), (lane("lb"), point("ps"))].into(),
        );
        let defects = validate_network(&n);
        let d = defects
            .iter()
            .find(|d| d.kind == DefectKind::OverlapClassMismatch)
            .expect("class mismatch");
        assert_eq!(d.ids, vec!["ps", "pc"]);
        assert_eq!(d.kind.description(), "overlap pair class mismatch");
    }

    #[test]
    fn structural_defects() {
        let n = RoadNetwork::new(
            vec![road("ra", &["la", "la"]), road("rb", &["la"]), road("rc", &[])],
            [(point("px"), PointClass::Intersection), (point("pz"), PointClass::Connection)].into(),
            BTreeSet::new(),
            [(point("px"), lane("la"))].into(),
            BTreeSet::new(),
            [(lane("la"), point("px")), (lane("zz"), point("px"))].into(),
        );
        let kinds: BTreeSet<DefectKind> = validate_network(&n).into_iter().map(|d| d.kind).collect();
        for k in [
            DefectKind::DuplicateLane,
            DefectKind::LaneInSeveralRoads,
            DefectKind::EmptyRoad,
            DefectKind::UnknownLane,
            DefectKind::ConnectionClassMismatch,
            DefectKind::UnaffiliatedPoint,
            DefectKind::IntersectionArity,
        ] {
            assert!(kinds.contains(&k), "missing {k:?}");
        }
    }

    #[test]
    fn point_chain_and_road_order() {
        let n = RoadNetwork::new(
            vec![road("ra", &["la"]), road("rb", &["lb"]), road("rc", &["lc"])],
            [(point("p1"), PointClass::Intersection), (point("p2"), PointClass::Intersection)].into(),
            [(lane("la"), point("p1"), point("p2"))].into(),
            BTreeSet::new(),
            BTreeSet::new(),
            [
                (lane("la"), point("p1")),
                (lane("la"), point("p2")),
                (lane("lb"), point("p1")),
                (lane("lc"), point("p2")),
            ]
            .into(),
        );
        assert!(validate_network(&n).is_empty());
        let ix = n.index();
        assert_eq!(ix.road_point_order[0], vec![(0, 1)]);
        assert!(ix.point_on_road(0, 0) && ix.point_on_road(0, 1) && !ix.point_on_road(0, 2));

        let broken = RoadNetwork::new(
            n.roads().to_vec(),
            n.points().clone(),
            BTreeSet::new(),
            BTreeSet::new(),
            BTreeSet::new(),
            n.affiliation().clone(),
        );
        assert!(validate_network(&broken)
            .iter()
            .any(|d| d.kind == DefectKind::PointOrderNotChain));
    }

    #[test]
    fn cleft_is_positional() {
        let n = RoadNetwork::highway(road("r", &["l1", "l2", "l3"]));
        let ix = n.index();
        assert!(ix.cleft(0, 2) && ix.cleft(0, 1) && !ix.cleft(2, 0) && !ix.cleft(1, 1));
    }
}
