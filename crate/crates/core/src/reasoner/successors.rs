//! Successor generation: per-atom candidate moves under a one-event budget
//! per vehicle, then the full scene and transition checks.

use crate::domain::{LaneSet, LonRel, PointClass, RoadNetwork, Scene};
use crate::rules::{scene_ok, transition_ok};

use crate::rules::DerivedFacts;

use LonRel::{Ahead as A, Behind as B, Cover as C};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SuccessorStats {
    /// Candidates produced by the local moves.
    pub candidates: u64,
    /// Candidates rejected by the full checks.
    pub rejected: u64,
}

/// All valid non-stuttering successors of `scene`, sorted. Vehicles whose
/// flag in `fixed` is set keep their lanes.
pub fn successors(scene: &Scene, n: &RoadNetwork, fixed: &[bool]) -> (Vec<Scene>, SuccessorStats) {
    let mut g = Gen {
        n,
        prev: scene,
        fixed,
        next: scene.clone(),
        budget: vec![1u8; scene.n_vehicles()],
        crossing: vec![None; scene.n_vehicles()],
        roads: vec![None; scene.n_vehicles()],
        out: Vec::new(),
        stats: SuccessorStats::default(),
    };
    g.occupancy(0);
    let mut out = g.out;
    out.sort();
    out.dedup();
    (out, g.stats)
}

struct Gen<'a> {
    n: &'a RoadNetwork,
    prev: &'a Scene,
    fixed: &'a [bool],
    next: Scene,
    budget: Vec<u8>,
    /// Connection point crossed by each vehicle's occupancy move, if any.
    crossing: Vec<Option<usize>>,
    roads: Vec<Option<usize>>,
    out: Vec<Scene>,
    stats: SuccessorStats,
}

fn road_of(occ: &LaneSet, n: &RoadNetwork) -> Option<usize> {
    let ix = n.index();
    let mut it = occ.iter().map(|l| ix.lane_road[l]);
    let first = it.next()?;
    it.all(|r| r == first).then_some(first)
}

/// Values a relation may take next, paired with whether the move is an event.
fn next_values(prev: LonRel, forward_only: bool) -> &'static [LonRel] {
    match (prev, forward_only) {
        (LonRel::None, _) => &[A, C, B],
        (A, true) => &[A],
        (A, false) => &[A, C],
        (C, true) => &[C, A],
        (C, false) => &[C, A, B],
        (B, _) => &[B, C],
    }
}

impl Gen<'_> {
    fn occupancy(&mut self, c: usize) {
        let nv = self.prev.n_vehicles();
        if c == nv {
            self.points(0, 0);
            return;
        }
        let ix = self.n.index();
        let cur = self.prev.occ(c).clone();
        let mut options: Vec<(LaneSet, Option<usize>)> = vec![(cur.clone(), None)];
        if !self.fixed.get(c).copied().unwrap_or(false) {
            if cur.len() >= 2 {
                for l in cur.iter() {
                    let mut o = cur.clone();
                    o.remove(l);
                    options.push((o, None));
                }
            }
            for l in cur.iter() {
                for &m in &ix.road_lanes[ix.lane_road[l]] {
                    let adjacent = ix.lane_pos[m] + 1 == ix.lane_pos[l] || ix.lane_pos[l] + 1 == ix.lane_pos[m];
                    if adjacent && !cur.contains(m) {
                        let mut o = cur.clone();
                        o.insert(m);
                        options.push((o, None));
                    }
                }
            }
            for p in 0..self.prev.n_points() {
                if ix.point_class[p] != PointClass::Connection || self.prev.prel(c, p) != C {
                    continue;
                }
                if !cur.iter().any(|l| ix.lane_has_point(l, p)) {
                    continue;
                }
                for &l2 in &ix.succ_lanes[p] {
                    options.push((LaneSet::single(l2), Some(p)));
                }
            }
        }
        for (occ, crossing) in options {
            let event = occ != cur;
            if event && self.budget[c] == 0 {
                continue;
            }
            if event {
                self.budget[c] -= 1;
            }
            self.roads[c] = road_of(&occ, self.n);
            self.crossing[c] = crossing;
            self.next.set_occ(c, occ);
            self.occupancy(c + 1);
            if event {
                self.budget[c] += 1;
            }
        }
        self.next.set_occ(c, cur);
        self.crossing[c] = None;
    }

    fn points(&mut self, c: usize, p: usize) {
        let nv = self.prev.n_vehicles();
        let np = self.prev.n_points();
        if c == nv {
            self.vehicle_pairs(0, 1);
            return;
        }
        if p == np {
            self.points(c + 1, 0);
            return;
        }
        let ix = self.n.index();
        let defined = match self.roads[c] {
            Some(r) => ix.point_on_road(p, r),
            None => false,
        };
        let old = self.prev.prel(c, p);
        if !defined {
            self.next.set_prel(c, p, LonRel::None);
            self.points(c, p + 1);
            self.next.set_prel(c, p, old);
            return;
        }
        let free = self.crossing[c] == Some(p);
        for &d in next_values(old, true) {
            let event = !old.is_none() && d != old && !free;
            if event && self.budget[c] == 0 {
                continue;
            }
            if event {
                self.budget[c] -= 1;
            }
            self.next.set_prel(c, p, d);
            self.points(c, p + 1);
            if event {
                self.budget[c] += 1;
            }
        }
        self.next.set_prel(c, p, old);
    }

    fn vehicle_pairs(&mut self, a: usize, b: usize) {
        let nv = self.prev.n_vehicles();
        if a + 1 >= nv {
            self.overlap_pairs();
            return;
        }
        if b == nv {
            self.vehicle_pairs(a + 1, a + 2);
            return;
        }
        let defined = matches!((self.roads[a], self.roads[b]), (Some(x), Some(y)) if x == y);
        let old = self.prev.vrel(a, b);
        if !defined {
            self.next.set_vrel(a, b, LonRel::None);
            self.vehicle_pairs(a, b + 1);
            self.next.set_vrel(a, b, old);
            return;
        }
        for &d in next_values(old, false) {
            let event = !old.is_none() && d != old;
            if event && (self.budget[a] == 0 || self.budget[b] == 0) {
                continue;
            }
            if event {
                self.budget[a] -= 1;
                self.budget[b] -= 1;
            }
            self.next.set_vrel(a, b, d);
            self.vehicle_pairs(a, b + 1);
            if event {
                self.budget[a] += 1;
                self.budget[b] += 1;
            }
        }
        self.next.set_vrel(a, b, old);
    }

    fn overlap_pairs(&mut self) {
        if self.n.index().overlaps.is_empty() {
            self.emit();
            return;
        }
        let d = crate::rules::derive(&self.next, self.n).expect("generated scene matches network");
        let nv = self.prev.n_vehicles();
        let pairs: Vec<(usize, usize)> = (0..nv)
            .flat_map(|a| (a + 1..nv).map(move |b| (a, b)))
            .collect();
        self.orel(&d, &pairs, 0);
    }

    fn orel(&mut self, d: &DerivedFacts, pairs: &[(usize, usize)], i: usize) {
        let Some(&(a, b)) = pairs.get(i) else {
            self.emit();
            return;
        };
        let shared = d.memberships(a).any(|(o, _)| d.memberships(b).any(|(ob, _)| ob == o));
        let old = self.prev.orel(a, b);
        if !shared {
            self.next.set_orel(a, b, LonRel::None);
            self.orel(d, pairs, i + 1);
            self.next.set_orel(a, b, old);
            return;
        }
        let counts = self.next.vrel(a, b).is_none();
        for &v in next_values(old, false) {
            let event = counts && !old.is_none() && v != old;
            if event && (self.budget[a] == 0 || self.budget[b] == 0) {
                continue;
            }
            if event {
                self.budget[a] -= 1;
                self.budget[b] -= 1;
            }
            self.next.set_orel(a, b, v);
            self.orel(d, pairs, i + 1);
            if event {
                self.budget[a] += 1;
                self.budget[b] += 1;
            }
        }
        self.next.set_orel(a, b, old);
    }

    fn emit(&mut self) {
        if self.next == *self.prev {
            return;
        }
        self.stats.candidates += 1;
        if scene_ok(&self.next, self.n) && transition_ok(self.prev, &self.next, self.n) {
            self.out.push(self.next.clone());
        } else {
            self.stats.rejected += 1;
        }
    }
}
