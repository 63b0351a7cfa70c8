//! Compilation of a [`MapModel`] into a [`RoadNetwork`].
//!
//! Each lane section of an OpenDRIVE road becomes up to two abstract roads,
//! one per travel direction. Linked lane endpoints are merged into
//! connection points; centerline crossings become intersection points; and
//! anti-parallel lanes running inside a shared corridor become overlap
//! segments.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use tracing::debug;

use super::model::{Contact, ElementType, MapModel};
use super::sample::{sample_centerline, stations, LaneRef};
use super::MapError;
use crate::domain::{sanitize, validate_network, LaneId, PointClass, PointId, Road, RoadId, RoadNetwork};
use crate::geometry::{segment_crossing, Point2, Polyline};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbstractionParams {
    /// Centerline sampling step, meters.
    pub step: f64,
    /// Crossings closer than this are merged, meters.
    pub crossing_tolerance: f64,
    /// Overlap corridor as a fraction of the narrower lane width.
    pub corridor_factor: f64,
    /// Minimal overlap length, meters.
    pub min_overlap: f64,
    /// Lateral half-extent of a vehicle footprint for lane occupancy, meters.
    pub half_width: f64,
}

impl Default for AbstractionParams {
    fn default() -> Self {
        Self { step: 0.5, crossing_tolerance: 0.05, corridor_factor: 0.5, min_overlap: 1.0, half_width: 0.9 }
    }
}

impl AbstractionParams {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("step", self.step),
            ("crossing_tolerance", self.crossing_tolerance),
            ("corridor_factor", self.corridor_factor),
            ("min_overlap", self.min_overlap),
            ("half_width", self.half_width),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Geometry of one abstract lane.
#[derive(Debug, Clone)]
pub struct LaneGeometry {
    pub id: LaneId,
    pub road: RoadId,
    pub source: LaneRef,
    pub forward: bool,
    /// Center line in the direction of travel.
    pub centerline: Polyline,
    /// Lane width at each centerline vertex.
    pub widths: Vec<f64>,
}

impl LaneGeometry {
    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Width at centerline arclength `s`.
    pub fn width_at(&self, s: f64) -> f64 {
        let arc = self.centerline.arclengths();
        let i = arc.partition_point(|&v| v < s).min(arc.len() - 1);
        if i == 0 {
            return self.widths[0];
        }
        let t = ((s - arc[i - 1]) / (arc[i] - arc[i - 1])).clamp(0.0, 1.0);
        self.widths[i - 1] + t * (self.widths[i] - self.widths[i - 1])
    }
}

#[derive(Debug, Clone)]
pub struct CompiledMap {
    pub network: RoadNetwork,
    pub lanes: Vec<LaneGeometry>,
    pub coords: BTreeMap<PointId, (f64, f64, f64)>,
    /// Arclength of each affiliated point along the lane's centerline.
    pub point_s: BTreeMap<(LaneId, PointId), f64>,
    pub params: AbstractionParams,
}

impl CompiledMap {
    pub fn lane(&self, id: &LaneId) -> Option<&LaneGeometry> {
        self.lanes.iter().find(|l| &l.id == id)
    }

    /// `% meta key=value` lines recording the tolerances used.
    pub fn metadata_lines(&self) -> Vec<String> {
        let p = &self.params;
        vec![
            format!("% meta step={}", p.step),
            format!("% meta crossing_tolerance={}", p.crossing_tolerance),
            format!("% meta corridor_factor={}", p.corridor_factor),
            format!("% meta min_overlap={}", p.min_overlap),
            format!("% meta half_width={}", p.half_width),
        ]
    }

    /// `point,x,y,z` rows for every point.
    pub fn coords_csv(&self) -> String {
        let mut out = String::from("point,x,y,z\n");
        for (p, (x, y, z)) in &self.coords {
            out.push_str(&format!("{p},{x:.3},{y:.3},{z:.3}\n"));
        }
        out
    }
}

type End = (usize, Contact);

struct Builder<'a> {
    model: &'a MapModel,
    params: AbstractionParams,
    lanes: Vec<LaneGeometry>,
    by_ref: HashMap<LaneRef, usize>,
    roads: Vec<Road>,
    pairs: BTreeSet<(End, End)>,
    points: BTreeMap<PointId, PointClass>,
    affiliation: BTreeSet<(LaneId, PointId)>,
    point_s: BTreeMap<(LaneId, PointId), f64>,
    coords: BTreeMap<PointId, (f64, f64, f64)>,
    succ_c: BTreeSet<(PointId, LaneId)>,
    overlaps: BTreeSet<(PointId, PointId)>,
    /// Per lane pair, connection points shared by both: `(s on a, s on b)`.
    shared: HashMap<(usize, usize), Vec<(f64, f64)>>,
    /// Overlap windows per lane pair `(a, b)`: `(s0, s1)` on `a`.
    windows: HashMap<(usize, usize), Vec<(f64, f64, f64)>>,
}

pub fn abstract_network(model: &MapModel, params: &AbstractionParams) -> Result<CompiledMap, MapError> {
    params.validate().map_err(|m| MapError::Invalid { line: 0, message: m })?;
    let mut b = Builder {
        model,
        params: *params,
        lanes: Vec::new(),
        by_ref: HashMap::new(),
        roads: Vec::new(),
        pairs: BTreeSet::new(),
        points: BTreeMap::new(),
        affiliation: BTreeSet::new(),
        point_s: BTreeMap::new(),
        coords: BTreeMap::new(),
        succ_c: BTreeSet::new(),
        overlaps: BTreeSet::new(),
        shared: HashMap::new(),
        windows: HashMap::new(),
    };
    b.build_lanes()?;
    b.collect_links()?;
    b.connections()?;
    b.overlap_segments()?;
    b.intersections()?;
    b.finish()
}

fn sec_suffix(n_sections: usize, k: usize) -> String {
    if n_sections > 1 {
        format!("_s{k}")
    } else {
        String::new()
    }
}

impl Builder<'_> {
    fn add_point(&mut self, id: PointId, class: PointClass, at: Point2, on: &[(usize, f64)]) {
        self.points.insert(id.clone(), class);
        self.coords.insert(id.clone(), (at.0, at.1, 0.0));
        for &(l, s) in on {
            let lane = self.lanes[l].id.clone();
            self.affiliation.insert((lane.clone(), id.clone()));
            self.point_s.insert((lane, id.clone()), s);
        }
    }

    fn build_lanes(&mut self) -> Result<(), MapError> {
        let mut seen = BTreeSet::new();
        for r in &self.model.roads {
            for (k, sec) in r.sections.iter().enumerate() {
                if r.section_end(k) - sec.s <= 1e-9 {
                    return Err(MapError::Invalid {
                        line: 0,
                        message: format!("road {} lane section {k} has no length", r.id),
                    });
                }
                for forward in [true, false] {
                    let mut ids: Vec<i32> = sec
                        .lanes
                        .iter()
                        .filter(|l| l.is_driving() && r.travels_forward(l.id) == forward)
                        .map(|l| l.id)
                        .collect();
                    if ids.is_empty() {
                        continue;
                    }
                    ids.sort_by_key(|i| i.abs());
                    let suffix = sec_suffix(r.sections.len(), k);
                    let road_name = format!(
                        "{}_{}",
                        sanitize("r", &format!("{}{suffix}", r.id)),
                        if forward { "f" } else { "b" }
                    );
                    let road_id = RoadId::new(road_name.clone()).map_err(|e| MapError::Invalid {
                        line: 0,
                        message: e.to_string(),
                    })?;
                    if !seen.insert(road_name.clone()) {
                        return Err(MapError::Invalid {
                            line: 0,
                            message: format!("road ids collide after sanitizing: {road_name}"),
                        });
                    }
                    let mut lane_ids = Vec::new();
                    for id in ids {
                        let source = LaneRef { road: r.id.clone(), section: k, lane: id };
                        let name = format!(
                            "{}_{}{}",
                            sanitize("l", &format!("{}{suffix}", r.id)),
                            if id < 0 { "m" } else { "p" },
                            id.abs()
                        );
                        let lane_id = LaneId::new(name).map_err(|e| MapError::Invalid {
                            line: 0,
                            message: e.to_string(),
                        })?;
                        let centerline = sample_centerline(self.model, &source, self.params.step)?;
                        let mut widths: Vec<f64> = stations(sec.s, r.section_end(k), self.params.step)
                            .into_iter()
                            .map(|s| r.lane_width(k, id, s))
                            .collect();
                        if !forward {
                            widths.reverse();
                        }
                        widths.resize(centerline.points().len(), *widths.last().unwrap_or(&0.0));
                        self.by_ref.insert(source.clone(), self.lanes.len());
                        lane_ids.push(lane_id.clone());
                        self.lanes.push(LaneGeometry {
                            id: lane_id,
                            road: road_id.clone(),
                            source,
                            forward,
                            centerline,
                            widths,
                        });
                    }
                    self.roads.push(Road::new(road_id, lane_ids));
                }
            }
        }
        debug!(lanes = self.lanes.len(), roads = self.roads.len(), "abstract lanes");
        Ok(())
    }

    fn pair(&mut self, a: LaneRef, ea: Contact, b: LaneRef, eb: Contact) -> Result<(), MapError> {
        let driving = |r: &LaneRef| -> Result<bool, MapError> {
            let lane = self
                .model
                .road(&r.road)
                .and_then(|road| road.sections.get(r.section))
                .and_then(|s| s.lane(r.lane))
                .ok_or_else(|| MapError::DanglingLink(format!("link to missing {r}")))?;
            Ok(lane.is_driving())
        };
        if !driving(&a)? || !driving(&b)? {
            return Ok(());
        }
        let (x, y) = ((self.by_ref[&a], ea), (self.by_ref[&b], eb));
        self.pairs.insert(if x <= y { (x, y) } else { (y, x) });
        Ok(())
    }

    fn collect_links(&mut self) -> Result<(), MapError> {
        let model = self.model;
        let section_at = |road: &str, c: Contact| -> Result<usize, MapError> {
            let r = model.road(road).ok_or_else(|| MapError::DanglingLink(format!("road {road}")))?;
            Ok(match c {
                Contact::Start => 0,
                Contact::End => r.sections.len() - 1,
            })
        };
        for r in &model.roads {
            for k in 0..r.sections.len().saturating_sub(1) {
                for lane in &r.sections[k].lanes {
                    if let Some(j) = lane.successor {
                        self.pair(
                            LaneRef { road: r.id.clone(), section: k, lane: lane.id },
                            Contact::End,
                            LaneRef { road: r.id.clone(), section: k + 1, lane: j },
                            Contact::Start,
                        )?;
                    }
                }
                for lane in &r.sections[k + 1].lanes {
                    if let Some(j) = lane.predecessor {
                        self.pair(
                            LaneRef { road: r.id.clone(), section: k, lane: j },
                            Contact::End,
                            LaneRef { road: r.id.clone(), section: k + 1, lane: lane.id },
                            Contact::Start,
                        )?;
                    }
                }
            }
            let ends = [
                (&r.successor, r.sections.len() - 1, Contact::End),
                (&r.predecessor, 0, Contact::Start),
            ];
            for (link, k, own_end) in ends {
                let Some(link) = link else { continue };
                if link.element_type != ElementType::Road {
                    continue;
                }
                let contact = link.contact.ok_or_else(|| MapError::Invalid {
                    line: 0,
                    message: format!("road {} links to road {} without contactPoint", r.id, link.element_id),
                })?;
                let other_k = section_at(&link.element_id, contact)?;
                for lane in &r.sections[k].lanes {
                    let target = if own_end == Contact::End { lane.successor } else { lane.predecessor };
                    if let Some(j) = target {
                        self.pair(
                            LaneRef { road: r.id.clone(), section: k, lane: lane.id },
                            own_end,
                            LaneRef { road: link.element_id.clone(), section: other_k, lane: j },
                            contact,
                        )?;
                    }
                }
            }
        }
        for j in &model.junctions {
            for c in &j.connections {
                let incoming = model.road(&c.incoming_road).expect("links checked at parse time");
                let at_junction = |l: &Option<super::model::RoadLink>| {
                    l.as_ref().is_some_and(|l| l.element_type == ElementType::Junction && l.element_id == j.id)
                };
                let end = if at_junction(&incoming.successor) {
                    Contact::End
                } else if at_junction(&incoming.predecessor) {
                    Contact::Start
                } else {
                    return Err(MapError::DanglingLink(format!(
                        "junction {} connection {}: road {} is not linked to the junction",
                        j.id, c.id, c.incoming_road
                    )));
                };
                let k_in = section_at(&c.incoming_road, end)?;
                let k_conn = section_at(&c.connecting_road, c.contact)?;
                for &(from, to) in &c.lane_links {
                    self.pair(
                        LaneRef { road: c.incoming_road.clone(), section: k_in, lane: from },
                        end,
                        LaneRef { road: c.connecting_road.clone(), section: k_conn, lane: to },
                        c.contact,
                    )?;
                }
            }
        }
        Ok(())
    }

    fn is_travel_end(&self, (l, e): End) -> bool {
        (e == Contact::End) == self.lanes[l].forward
    }

    fn end_point(&self, (l, e): End) -> (Point2, f64) {
        let line = &self.lanes[l].centerline;
        if self.is_travel_end((l, e)) {
            (*line.points().last().expect("non-empty"), line.length())
        } else {
            (line.points()[0], 0.0)
        }
    }

    fn connections(&mut self) -> Result<(), MapError> {
        let mut links = Vec::new();
        for &(a, b) in &self.pairs {
            let (ta, tb) = (self.is_travel_end(a), self.is_travel_end(b));
            match (ta, tb) {
                (true, false) => links.push((a, b)),
                (false, true) => links.push((b, a)),
                _ => {
                    return Err(MapError::Invalid {
                        line: 0,
                        message: format!(
                            "lane link between {} and {} joins lanes of incompatible travel directions",
                            self.lanes[a.0].source, self.lanes[b.0].source
                        ),
                    })
                }
            }
        }
        // Union-find over linked endpoints.
        let ends: Vec<End> = links.iter().flat_map(|&(a, b)| [a, b]).collect::<BTreeSet<_>>().into_iter().collect();
        let index: HashMap<End, usize> = ends.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut parent: Vec<usize> = (0..ends.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut x = x;
            while p[x] != r {
                let next = p[x];
                p[x] = r;
                x = next;
            }
            r
        }
        for &(a, b) in &links {
            let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut comps: BTreeMap<usize, Vec<End>> = BTreeMap::new();
        for (i, e) in ends.iter().enumerate() {
            comps.entry(find(&mut parent, i)).or_default().push(*e);
        }
        for (n, members) in comps.values().enumerate() {
            let id = PointId::new(format!("pc{}", n + 1)).expect("valid id");
            let mut on = Vec::new();
            let (mut x, mut y) = (0.0, 0.0);
            for &e in members {
                let (pt, s) = self.end_point(e);
                x += pt.0;
                y += pt.1;
                on.push((e.0, s));
            }
            let k = members.len() as f64;
            self.add_point(id.clone(), PointClass::Connection, (x / k, y / k), &on);
            for &(a, b) in &links {
                if members.contains(&a) {
                    self.succ_c.insert((id.clone(), self.lanes[b.0].id.clone()));
                }
            }
            for (i, &(la, sa)) in on.iter().enumerate() {
                for &(lb, sb) in &on[i + 1..] {
                    self.shared.entry((la, lb)).or_default().push((sa, sb));
                    self.shared.entry((lb, la)).or_default().push((sb, sa));
                }
            }
        }
        Ok(())
    }
}

fn bbox(line: &Polyline, pad: f64) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in line.points() {
        b = (b.0.min(p.0), b.1.min(p.1), b.2.max(p.0), b.3.max(p.1));
    }
    (b.0 - pad, b.1 - pad, b.2 + pad, b.3 + pad)
}

fn boxes_meet(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> bool {
    a.0 <= b.2 && b.0 <= a.2 && a.1 <= b.3 && b.1 <= a.3
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Near {
    No,
    Opposite,
    Same,
}

impl Builder<'_> {
    fn near_shared(&self, a: usize, b: usize, sa: f64, radius: f64) -> bool {
        self.shared.get(&(a, b)).is_some_and(|v| v.iter().any(|&(s, _)| (s - sa).abs() <= radius))
    }

    fn lane_pairs(&self, pad: f64) -> Vec<(usize, usize)> {
        let boxes: Vec<_> = self.lanes.iter().map(|l| bbox(&l.centerline, pad)).collect();
        let mut out = Vec::new();
        for a in 0..self.lanes.len() {
            for b in a + 1..self.lanes.len() {
                if self.lanes[a].road != self.lanes[b].road && boxes_meet(boxes[a], boxes[b]) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn overlap_segments(&mut self) -> Result<(), MapError> {
        let max_width = self.lanes.iter().map(|l| l.min_width()).fold(0.0, f64::max);
        let mut count = 0;
        for (a, b) in self.lane_pairs(self.params.corridor_factor * max_width) {
            let (la, lb) = (self.lanes[a].clone(), self.lanes[b].clone());
            let corridor = self.params.corridor_factor * la.min_width().min(lb.min_width());
            let arc = la.centerline.arclengths().to_vec();
            let class: Vec<Near> = la
                .centerline
                .points()
                .iter()
                .zip(&arc)
                .map(|(&p, &s)| {
                    let f = lb.centerline.project(p);
                    let inside = f.s > 1e-9 && f.s < lb.centerline.length() - 1e-9;
                    if f.d.abs() > corridor || !inside {
                        return Near::No;
                    }
                    let cos = (la.centerline.heading_at(s) - lb.centerline.heading_at(f.s)).cos();
                    if cos < -0.95 {
                        Near::Opposite
                    } else if cos > 0.95 {
                        Near::Same
                    } else {
                        Near::No
                    }
                })
                .collect();
            let mut i = 0;
            while i < class.len() {
                if class[i] == Near::No {
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j + 1 < class.len() && class[j + 1] == class[i] {
                    j += 1;
                }
                let (s0, s1) = (arc[i], arc[j]);
                let kind = class[i];
                i = j + 1;
                if s1 - s0 < self.params.min_overlap {
                    continue;
                }
                let touches_end = s0 <= self.params.step + 1e-9 || s1 >= la.centerline.length() - self.params.step - 1e-9;
                let radius = 2.0 * corridor + self.params.step;
                if touches_end && (self.near_shared(a, b, s0, radius) || self.near_shared(a, b, s1, radius)) {
                    continue;
                }
                if kind == Near::Same {
                    return Err(MapError::Unsupported {
                        what: format!("same-direction overlap between lanes {} and {}", la.id, lb.id),
                        road: la.source.road.clone(),
                    });
                }
                count += 1;
                let (p0, p1) = (la.centerline.point_at(s0), la.centerline.point_at(s1));
                let (t0, t1) = (lb.centerline.project(p0).s, lb.centerline.project(p1).s);
                let pos = PointId::new(format!("pos{count}")).expect("valid id");
                let poe = PointId::new(format!("poe{count}")).expect("valid id");
                self.windows.entry((a, b)).or_default().push((s0, s1, s1 - s0));
                self.windows.entry((b, a)).or_default().push((t1, t0, s1 - s0));
                self.add_point(pos.clone(), PointClass::OverlapStart, p0, &[(a, s0), (b, t0)]);
                self.add_point(poe.clone(), PointClass::OverlapEnd, p1, &[(a, s1), (b, t1)]);
                self.overlaps.insert((pos, poe));
            }
        }
        Ok(())
    }

    fn intersections(&mut self) -> Result<(), MapError> {
        let tol = self.params.crossing_tolerance;
        let mut found: Vec<(usize, f64, usize, f64, Point2)> = Vec::new();
        for (a, b) in self.lane_pairs(tol) {
            let (pa, pb) = (self.lanes[a].centerline.points(), self.lanes[b].centerline.points());
            let (sa, sb) = (self.lanes[a].centerline.arclengths(), self.lanes[b].centerline.arclengths());
            let mut hits: Vec<(f64, f64, Point2)> = Vec::new();
            for i in 0..pa.len() - 1 {
                for j in 0..pb.len() - 1 {
                    let Some((t, u)) = segment_crossing(pa[i], pa[i + 1], pb[j], pb[j + 1]) else { continue };
                    let at = (pa[i].0 + t * (pa[i + 1].0 - pa[i].0), pa[i].1 + t * (pa[i + 1].1 - pa[i].1));
                    let s_a = sa[i] + t * (sa[i + 1] - sa[i]);
                    let s_b = sb[j] + u * (sb[j + 1] - sb[j]);
                    if hits.iter().any(|h| (h.2 .0 - at.0).hypot(h.2 .1 - at.1) <= tol.max(1e-6)) {
                        continue;
                    }
                    hits.push((s_a, s_b, at));
                }
            }
            for (s_a, s_b, at) in hits {
                if self.near_shared(a, b, s_a, 2.0 * self.params.step.max(tol)) {
                    continue;
                }
                let window = self
                    .windows
                    .get(&(a, b))
                    .and_then(|w| w.iter().find(|w| s_a >= w.0 - self.params.step && s_a <= w.1 + self.params.step));
                if let Some(&(_, _, len)) = window {
                    let corridor = self.params.corridor_factor
                        * self.lanes[a].min_width().min(self.lanes[b].min_width());
                    if len < 4.0 * corridor {
                        return Err(MapError::Ambiguous(format!(
                            "lanes {} and {} cross inside a {len:.2} m overlap window; intersection or overlap?",
                            self.lanes[a].id, self.lanes[b].id
                        )));
                    }
                    continue;
                }
                found.push((a, s_a, b, s_b, at));
            }
        }
        found.sort_by(|x, y| (x.0, x.2).cmp(&(y.0, y.2)).then(x.1.total_cmp(&y.1)));
        for (n, (a, s_a, b, s_b, at)) in found.into_iter().enumerate() {
            let id = PointId::new(format!("px{}", n + 1)).expect("valid id");
            self.add_point(id, PointClass::Intersection, at, &[(a, s_a), (b, s_b)]);
        }
        Ok(())
    }

    fn finish(self) -> Result<CompiledMap, MapError> {
        let mut succ_p = BTreeSet::new();
        let mut per_lane: BTreeMap<&LaneId, Vec<(f64, &PointId)>> = BTreeMap::new();
        for ((lane, p), s) in &self.point_s {
            per_lane.entry(lane).or_default().push((*s, p));
        }
        for (lane, mut pts) in per_lane {
            pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(y.1)));
            for w in pts.windows(2) {
                succ_p.insert((lane.clone(), w[0].1.clone(), w[1].1.clone()));
            }
        }
        let network = RoadNetwork::new(self.roads, self.points, succ_p, self.succ_c, self.overlaps, self.affiliation);
        let defects = validate_network(&network);
        if !defects.is_empty() {
            let text: Vec<String> = defects.iter().map(|d| d.to_string()).collect();
            return Err(MapError::Defects(text.join("; ")));
        }
        Ok(CompiledMap { network, lanes: self.lanes, coords: self.coords, point_s: self.point_s, params: self.params })
    }
}
