//! Abstraction of sampled vehicle trajectories into a scenario.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use super::compile::CompiledMap;
use super::MapError;
use crate::domain::{lon_rel_of_ranges, LaneSet, Scenario, Scene, SRange, VehicleId};
use crate::rules::{derive, transition_ok};

/// One row of a trace file: the vehicle's center, heading and length.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub vehicle: String,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub length: f64,
    #[serde(skip)]
    pub row: usize,
}

/// Reads `t,vehicle,x,y,heading,length` rows.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceSample>, MapError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rd.headers().map_err(|e| MapError::Trace(e.to_string()))?.clone();
    let expected = ["t", "vehicle", "x", "y", "heading", "length"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(MapError::Trace(format!("header must be `{}`", expected.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.deserialize::<TraceSample>().enumerate() {
        let row = i + 2;
        let mut s = rec.map_err(|e| MapError::Trace(format!("row {row}: {e}")))?;
        s.row = row;
        if !(s.length > 0.0) || ![s.t, s.x, s.y, s.heading].iter().all(|v| v.is_finite()) {
            return Err(MapError::Trace(format!("row {row}: non-finite value or non-positive length")));
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(MapError::Trace("no samples".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct State {
    x: f64,
    y: f64,
    heading: f64,
    length: f64,
    row: usize,
}

fn lerp_state(a: State, b: State, f: f64) -> State {
    let dh = (b.heading - a.heading + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    State {
        x: a.x + f * (b.x - a.x),
        y: a.y + f * (b.y - a.y),
        heading: a.heading + f * dh,
        length: a.length + f * (b.length - a.length),
        row: a.row,
    }
}

struct Abstractor<'a> {
    map: &'a CompiledMap,
    /// Per network road, the lane used as longitudinal axis.
    axis: Vec<usize>,
    /// Network lane index -> geometry index.
    geom: Vec<usize>,
}

impl<'a> Abstractor<'a> {
    fn new(map: &'a CompiledMap) -> Self {
        let ix = map.network.index();
        let geom: Vec<usize> = ix
            .lanes
            .iter()
            .map(|l| map.lanes.iter().position(|g| &g.id == l).expect("every network lane has geometry"))
            .collect();
        let axis = ix.road_lanes.iter().map(|lanes| lanes[0]).collect();
        Self { map, axis, geom }
    }

    fn placement(&self, st: State) -> Option<(usize, LaneSet, SRange)> {
        let ix = self.map.network.index();
        let half = self.map.params.half_width;
        let (dx, dy) = (st.heading.cos(), st.heading.sin());
        let rear = (st.x - 0.5 * st.length * dx, st.y - 0.5 * st.length * dy);
        let center = (st.x, st.y);
        let fits = |l: usize, p: (f64, f64), clamp_ok: bool| -> Option<f64> {
            let g = &self.map.lanes[self.geom[l]];
            let f = g.centerline.project(p);
            let len = g.centerline.length();
            let inside = clamp_ok || (f.s > 1e-6 && f.s < len - 1e-6);
            let aligned = (st.heading - g.centerline.heading_at(f.s)).cos() > 0.0;
            (inside && aligned && f.d.abs() < 0.5 * g.width_at(f.s) + half).then_some(f.d.abs())
        };
        // The road is the one under the rear of the vehicle.
        let road = (0..ix.lanes.len())
            .filter_map(|l| fits(l, rear, false).map(|d| (d, l)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, l)| ix.lane_road[l])?;
        let mut occ = LaneSet::new();
        for &l in &ix.road_lanes[road] {
            if fits(l, center, true).is_some() {
                occ.insert(l);
            }
        }
        if occ.is_empty() {
            let nearest = ix.road_lanes[road]
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let da = self.map.lanes[self.geom[a]].centerline.project(center).d.abs();
                    let db = self.map.lanes[self.geom[b]].centerline.project(center).d.abs();
                    da.total_cmp(&db)
                })
                .expect("roads have lanes");
            occ.insert(nearest);
        }
        let axis = &self.map.lanes[self.geom[self.axis[road]]].centerline;
        let s_rear = axis.project(rear).s;
        let range = SRange::new(s_rear, s_rear + st.length).expect("positive length");
        Some((road, occ, range))
    }

    fn scene(&self, states: &[State]) -> Result<Scene, MapError> {
        let ix = self.map.network.index();
        let nv = states.len();
        let np = ix.points.len();
        let mut s = Scene::new(nv, np);
        let mut placed = Vec::with_capacity(nv);
        for (c, st) in states.iter().enumerate() {
            let (road, occ, range) = self
                .placement(*st)
                .ok_or_else(|| MapError::Trace(format!("row {}: vehicle is off the road network", st.row)))?;
            s.set_occ(c, occ);
            for p in 0..np {
                if ix.point_on_road(p, road) {
                    let sp = self.point_axis_s(road, p);
                    s.set_prel(c, p, lon_rel_of_ranges(range, SRange::point(sp), true));
                }
            }
            placed.push((road, range));
        }
        for a in 0..nv {
            for b in a + 1..nv {
                if placed[a].0 == placed[b].0 {
                    s.set_vrel(a, b, lon_rel_of_ranges(placed[a].1, placed[b].1, true));
                }
            }
        }
        if !ix.overlaps.is_empty() {
            let d = derive(&s, &self.map.network).expect("scene built from the network");
            for a in 0..nv {
                for b in a + 1..nv {
                    let shared = d.memberships(a).find_map(|(o, fa)| {
                        d.memberships(b).find(|(ob, _)| *ob == o).map(|(_, fb)| (o, fa, fb))
                    });
                    let Some((o, fa, fb)) = shared else { continue };
                    let rel = match (fa, fb) {
                        (true, true) => s.vrel(a, b),
                        (false, false) => s.vrel(a, b).invert(),
                        _ => {
                            let r = self.reference_lane(o);
                            lon_rel_of_ranges(self.ref_range(r, states[a]), self.ref_range(r, states[b]), true)
                        }
                    };
                    s.set_orel(a, b, rel);
                }
            }
        }
        Ok(s)
    }

    fn point_axis_s(&self, road: usize, p: usize) -> f64 {
        let ix = self.map.network.index();
        let axis = &self.map.lanes[self.geom[self.axis[road]]];
        if let Some(s) = self.map.point_s.get(&(axis.id.clone(), ix.points[p].clone())) {
            return *s;
        }
        let (x, y, _) = self.map.coords[&ix.points[p]];
        axis.centerline.project((x, y)).s
    }

    /// The lane along which the overlap runs from its start to its end.
    fn reference_lane(&self, o: usize) -> usize {
        let ix = self.map.network.index();
        let (ps, pe) = ix.overlaps[o];
        ix.point_lanes[ps]
            .iter()
            .copied()
            .find(|&l| {
                let g = &self.map.lanes[self.geom[l]];
                let s = |p: usize| self.map.point_s[&(g.id.clone(), ix.points[p].clone())];
                s(ps) < s(pe)
            })
            .unwrap_or(ix.point_lanes[ps][0])
    }

    fn ref_range(&self, lane: usize, st: State) -> SRange {
        let line = &self.map.lanes[self.geom[lane]].centerline;
        let (dx, dy) = (0.5 * st.length * st.heading.cos(), 0.5 * st.length * st.heading.sin());
        let a = line.project((st.x - dx, st.y - dy)).s;
        let b = line.project((st.x + dx, st.y + dy)).s;
        SRange::new(a.min(b), a.max(b)).expect("ordered")
    }
}

const MAX_REFINE_DEPTH: u32 = 30;

/// Abstracts trajectories into a scenario. Every vehicle needs a sample at
/// every time stamp. Transitions that skip an intermediate qualitative state
/// are refined by interpolating the samples; repeated scenes collapse.
pub fn abstract_trace(samples: &[TraceSample], map: &CompiledMap) -> Result<Scenario, MapError> {
    let mut names: Vec<String> = samples.iter().map(|s| s.vehicle.clone()).collect();
    names.sort();
    names.dedup();
    let vehicles: Vec<VehicleId> = names
        .iter()
        .map(|n| VehicleId::new(n.as_str()).map_err(|e| MapError::Trace(e.to_string())))
        .collect::<Result<_, _>>()?;
    let mut by_time: BTreeMap<u64, Vec<Option<State>>> = BTreeMap::new();
    let mut times: BTreeMap<u64, f64> = BTreeMap::new();
    for s in samples {
        // Order-preserving key for finite floats.
        let bits = s.t.to_bits();
        let key = if s.t >= 0.0 { bits | 1 << 63 } else { !bits };
        times.insert(key, s.t);
        let slot = by_time.entry(key).or_insert_with(|| vec![None; names.len()]);
        let c = names.binary_search(&s.vehicle).expect("collected above");
        if slot[c].is_some() {
            return Err(MapError::Trace(format!("row {}: second sample for {} at t={}", s.row, s.vehicle, s.t)));
        }
        slot[c] = Some(State { x: s.x, y: s.y, heading: s.heading, length: s.length, row: s.row });
    }
    let mut frames: Vec<Vec<State>> = Vec::new();
    for (key, slot) in by_time {
        let frame: Option<Vec<State>> = slot.into_iter().collect();
        frames.push(frame.ok_or_else(|| {
            MapError::Trace(format!("t={}: not every vehicle has a sample", times[&key]))
        })?);
    }
    let ab = Abstractor::new(map);
    let mut scenes: Vec<Scene> = Vec::new();
    let mut prev: Option<(Vec<State>, Scene)> = None;
    for frame in frames {
        let scene = ab.scene(&frame)?;
        if let Some((pf, ps)) = &prev {
            refine(&ab, pf, ps, &frame, &scene, 0, &mut scenes)?;
        }
        if scenes.last() != Some(&scene) {
            scenes.push(scene.clone());
        }
        prev = Some((frame, scene));
    }
    Scenario::new(Arc::new(vehicles), Arc::new(map.network.clone()), scenes)
        .map_err(|e| MapError::Trace(e.to_string()))
}

/// Pushes the scenes strictly between `a` and `b` needed to make every
/// transition valid.
fn refine(
    ab: &Abstractor<'_>,
    fa: &[State],
    sa: &Scene,
    fb: &[State],
    sb: &Scene,
    depth: u32,
    out: &mut Vec<Scene>,
) -> Result<(), MapError> {
    if sa == sb || depth >= MAX_REFINE_DEPTH || transition_ok(sa, sb, &ab.map.network) {
        return Ok(());
    }
    let mid: Vec<State> = fa.iter().zip(fb).map(|(a, b)| lerp_state(*a, *b, 0.5)).collect();
    let sm = ab.scene(&mid)?;
    refine(ab, fa, sa, &mid, &sm, depth + 1, out)?;
    if out.last() != Some(&sm) && &sm != sa {
        out.push(sm.clone());
    }
    refine(ab, &mid, &sm, fb, sb, depth + 1, out)
}
