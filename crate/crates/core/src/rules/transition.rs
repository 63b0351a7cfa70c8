use crate::domain::{LonRel, PointClass, RoadNetwork, Scene, VehicleId};

use super::derive::{derive_unchecked, DerivedFacts};
use super::{Reporter, RuleId, StepRef, Violation, W};

use LonRel::{Ahead as A, Behind as B, Cover as C};

/// All violations of the transition `prev -> next`, sorted.
pub fn check_transition(
    prev: &Scene,
    next: &Scene,
    vehicles: &[VehicleId],
    n: &RoadNetwork,
) -> Vec<Violation> {
    let mut r = Reporter::new(vehicles, n, StepRef::Transition(0), false);
    check_transition_into(prev, next, n, &mut r);
    r.into_violations()
}

pub(crate) fn check_transition_into(s0: &Scene, s1: &Scene, n: &RoadNetwork, r: &mut Reporter<'_>) {
    let d0 = derive_unchecked(s0, n);
    let d1 = derive_unchecked(s1, n);
    let t = T { s0, s1, n, d0: &d0, d1: &d1 };
    let checks: [fn(&T<'_>, &mut Reporter<'_>); 6] =
        [vehicle_continuity, lane_changes, point_continuity, connections, overlap_continuity, step];
    for check in checks {
        check(&t, r);
        if r.done() {
            return;
        }
    }
}

struct T<'a> {
    s0: &'a Scene,
    s1: &'a Scene,
    n: &'a RoadNetwork,
    d0: &'a DerivedFacts,
    d1: &'a DerivedFacts,
}

impl T<'_> {
    /// The vehicle leaves its road through connection point `p`: it covered
    /// `p`, is now ahead of it, and occupies one successor lane of `p`.
    fn crosses_at(&self, c: usize, p: usize) -> bool {
        let ix = self.n.index();
        ix.point_class[p] == PointClass::Connection
            && self.s0.prel(c, p) == C
            && self.s1.prel(c, p) == A
            && self.s0.occ(c).iter().any(|l| ix.lane_has_point(l, p))
            && matches!(self.s1.occ(c).iter().collect::<Vec<_>>().as_slice(),
                        [l2] if ix.succ_lanes[p].contains(l2))
    }

    fn switches_road(&self, c: usize) -> bool {
        matches!((self.d0.road(c), self.d1.road(c)), (Some(a), Some(b)) if a != b)
    }
}

/// Relations change only between neighbouring values.
fn continuous(from: LonRel, to: LonRel) -> bool {
    !matches!((from, to), (A, B) | (B, A))
}

/// PR4.
fn vehicle_continuity(t: &T<'_>, r: &mut Reporter<'_>) {
    for (a, b) in t.s0.pairs() {
        let (x, y) = (t.s0.vrel(a, b), t.s1.vrel(a, b));
        if !x.is_none() && !y.is_none() && !continuous(x, y) {
            r.report(RuleId::PR4, &[W::V(a), W::V(b)]);
        }
    }
}

/// PR7: at most one lane is entered or left per step, and a vehicle changes
/// roads only by crossing a connection point.
fn lane_changes(t: &T<'_>, r: &mut Reporter<'_>) {
    for c in 0..t.s0.n_vehicles() {
        if t.switches_road(c) {
            let ok = (0..t.s0.n_points()).any(|p| t.crosses_at(c, p));
            if !ok {
                r.report(RuleId::PR7, &[W::V(c)]);
            }
        } else if t.s0.occ(c).symmetric_difference_len(t.s1.occ(c)) > 1 {
            r.report(RuleId::PR7, &[W::V(c)]);
        }
    }
}

/// PR9: a vehicle passes points only forward.
fn point_continuity(t: &T<'_>, r: &mut Reporter<'_>) {
    for c in 0..t.s0.n_vehicles() {
        for p in 0..t.s0.n_points() {
            let ok = match (t.s0.prel(c, p), t.s1.prel(c, p)) {
                (LonRel::None, _) | (_, LonRel::None) => true,
                (B, y) => y == B || y == C,
                (C, y) => y == C || y == A,
                (A, y) => y == A,
            };
            if !ok {
                r.report(RuleId::PR9, &[W::V(c), W::P(p)]);
            }
        }
    }
}

/// PR12: while covering a connection point a vehicle stays on its lanes
/// until it has moved past the point onto a successor lane.
fn connections(t: &T<'_>, r: &mut Reporter<'_>) {
    let ix = t.n.index();
    for c in 0..t.s0.n_vehicles() {
        for p in 0..t.s0.n_points() {
            if ix.point_class[p] != PointClass::Connection || t.s0.prel(c, p) != C {
                continue;
            }
            let next = t.s1.prel(c, p);
            for l1 in t.s0.occ(c).iter() {
                let stays = next == C && t.s1.occ(c).contains(l1);
                let moves_on =
                    next == A && t.s1.occ(c).iter().any(|l2| ix.succ_lanes[p].contains(&l2));
                if !stays && !moves_on {
                    r.report(RuleId::PR12, &[W::V(c), W::P(p), W::L(l1)]);
                }
            }
        }
    }
}

/// Overlap relations change continuously; between opposing vehicles inside
/// the same overlap they can only progress from behind to ahead (seen from
/// the vehicle driving forward through it).
fn overlap_continuity(t: &T<'_>, r: &mut Reporter<'_>) {
    for (a, b) in t.s0.pairs() {
        let (x, y) = (t.s0.orel(a, b), t.s1.orel(a, b));
        if x.is_none() || y.is_none() {
            continue;
        }
        let opposing = |d: &DerivedFacts| {
            d.memberships(a)
                .find_map(|(o, fa)| d.memberships(b).find(|&(ob, fb)| ob == o && fb != fa).map(|_| fa))
        };
        let ok = match (opposing(t.d0), opposing(t.d1)) {
            (Some(fa0), Some(fa1)) if fa0 == fa1 => {
                let (x, y) = if fa0 { (x, y) } else { (x.invert(), y.invert()) };
                match x {
                    B => y == B || y == C,
                    C => y == C || y == A,
                    _ => y == A,
                }
            }
            _ => continuous(x, y),
        };
        if !ok {
            r.report(RuleId::PR14Cont, &[W::V(a), W::V(b)]);
        }
    }
}

/// STEP: at most one qualitative event per vehicle and transition.
fn step(t: &T<'_>, r: &mut Reporter<'_>) {
    let nv = t.s0.n_vehicles();
    let mut events = vec![0u32; nv];
    for (c, e) in events.iter_mut().enumerate() {
        if t.s0.occ(c) != t.s1.occ(c) {
            *e += 1;
        }
        let switching = t.switches_road(c);
        for p in 0..t.s0.n_points() {
            let (x, y) = (t.s0.prel(c, p), t.s1.prel(c, p));
            if x.is_none() || y.is_none() || x == y {
                continue;
            }
            if switching && t.crosses_at(c, p) {
                continue;
            }
            *e += 1;
        }
    }
    for (a, b) in t.s0.pairs().filter(|(a, b)| a < b) {
        let changed = |x: LonRel, y: LonRel| !x.is_none() && !y.is_none() && x != y;
        let v = changed(t.s0.vrel(a, b), t.s1.vrel(a, b));
        let o = t.s1.vrel(a, b).is_none() && changed(t.s0.orel(a, b), t.s1.orel(a, b));
        if v || o {
            events[a] += 1;
            events[b] += 1;
        }
    }
    for (c, &e) in events.iter().enumerate() {
        if e > 1 {
            r.report(RuleId::Step, &[W::V(c)]);
        }
    }
}
