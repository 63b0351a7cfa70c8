use crate::domain::{LonRel, RoadNetwork, Scene, VehicleId};

use super::derive::{derive_unchecked, DerivedFacts};
use super::{Reporter, RuleId, StepRef, Violation, W};

use LonRel::{Ahead as A, Behind as B, Cover as C};

/// All per-scene violations, sorted. Scene dimensions must match the
/// vehicle list and the network.
pub fn check_scene(scene: &Scene, vehicles: &[VehicleId], n: &RoadNetwork) -> Vec<Violation> {
    let mut r = Reporter::new(vehicles, n, StepRef::Scene(0), false);
    check_scene_into(scene, n, &mut r);
    r.into_violations()
}

pub(crate) fn check_scene_into(s: &Scene, n: &RoadNetwork, r: &mut Reporter<'_>) {
    let d = derive_unchecked(s, n);
    let checks: [fn(&Scene, &RoadNetwork, &DerivedFacts, &mut Reporter<'_>); 7] = [
        occupancy, vehicle_pairs, triples, points, overlaps, overlap_triples, point_order,
    ];
    for check in checks {
        check(s, n, &d, r);
        if r.done() {
            return;
        }
    }
}

/// PR5, PR6, PR8 (single road) and TR1.
fn occupancy(s: &Scene, n: &RoadNetwork, d: &DerivedFacts, r: &mut Reporter<'_>) {
    let ix = n.index();
    for c in 0..s.n_vehicles() {
        let occ = s.occ(c);
        if occ.is_empty() {
            r.report(RuleId::PR6, &[W::V(c)]);
        }
        if occ.len() >= 3 {
            r.report(RuleId::TR1, &[W::V(c)]);
        }
        if d.roads[c].len() >= 2 {
            r.report(RuleId::PR8, &[W::V(c), W::R(d.roads[c][0]), W::R(d.roads[c][1])]);
        }
        for l1 in occ.iter() {
            for l2 in occ.iter() {
                if !ix.cleft(l1, l2) {
                    continue;
                }
                for &l3 in &ix.road_lanes[ix.lane_road[l1]] {
                    if ix.cleft(l1, l3) && ix.cleft(l3, l2) && !occ.contains(l3) {
                        r.report(RuleId::PR5, &[W::V(c), W::L(l3)]);
                    }
                }
            }
        }
        if r.done() {
            return;
        }
    }
}

/// PR1, TR2, and vehicle-relation definedness (PR8): defined exactly when
/// both vehicles are on the same road.
fn vehicle_pairs(s: &Scene, _n: &RoadNetwork, d: &DerivedFacts, r: &mut Reporter<'_>) {
    let nv = s.n_vehicles();
    for a in 0..nv {
        for b in 0..nv {
            if a == b {
                continue;
            }
            let rel = s.vrel(a, b);
            if a < b && rel != s.vrel(b, a).invert() {
                r.report(RuleId::PR1, &[W::V(a), W::V(b)]);
            }
            if let (Some(ra), Some(rb)) = (d.road(a), d.road(b)) {
                if (ra == rb) == rel.is_none() {
                    r.report(RuleId::PR8, &[W::V(a), W::V(b)]);
                }
            }
            if a < b && (rel == C || s.vrel(b, a) == C) {
                for l in s.occ(a).iter().filter(|&l| s.occ(b).contains(l)) {
                    r.report(RuleId::TR2, &[W::V(a), W::V(b), W::L(l)]);
                }
            }
        }
        if r.done() {
            return;
        }
    }
}

/// PR2 and PR3 over defined relations.
fn triples(s: &Scene, _n: &RoadNetwork, _d: &DerivedFacts, r: &mut Reporter<'_>) {
    let nv = s.n_vehicles();
    for a in 0..nv {
        for b in 0..nv {
            if b == a {
                continue;
            }
            let ab = s.vrel(a, b);
            if ab.is_none() {
                continue;
            }
            for c in 0..nv {
                if c == a || c == b {
                    continue;
                }
                let bc = s.vrel(b, c);
                let ac = s.vrel(a, c);
                if ab == bc && (ab == A || ab == B) && ac != ab {
                    r.report(RuleId::PR2, &[W::V(a), W::V(b), W::V(c)]);
                }
                if ab == A && bc == C && s.vrel(c, a) == A {
                    r.report(RuleId::PR3, &[W::V(a), W::V(b), W::V(c)]);
                }
            }
            if r.done() {
                return;
            }
        }
    }
}

/// PR10 (defined exactly for points on the vehicle's road) and PR11.
fn points(s: &Scene, n: &RoadNetwork, d: &DerivedFacts, r: &mut Reporter<'_>) {
    let ix = n.index();
    for p in 0..s.n_points() {
        for c in 0..s.n_vehicles() {
            let rel = s.prel(c, p);
            let required = match d.road(c) {
                Some(road) => Some(ix.point_on_road(p, road)),
                None if s.occ(c).iter().any(|l| ix.lane_has_point(l, p)) => Some(true),
                None => None,
            };
            if required.is_some_and(|req| req == rel.is_none()) {
                r.report(RuleId::PR10, &[W::V(c), W::P(p)]);
            }
        }
        let covering: Vec<usize> = (0..s.n_vehicles())
            .filter(|&c| s.prel(c, p) == C && s.occ(c).iter().any(|l| ix.lane_has_point(l, p)))
            .collect();
        for (i, &a) in covering.iter().enumerate() {
            for &b in &covering[i + 1..] {
                r.report(RuleId::PR11, &[W::V(a), W::V(b), W::P(p)]);
            }
        }
        if r.done() {
            return;
        }
    }
}

/// PR13, PR14 symmetry and the head-on collision analog of TR2.
fn overlaps(s: &Scene, n: &RoadNetwork, d: &DerivedFacts, r: &mut Reporter<'_>) {
    let ix = n.index();
    let nv = s.n_vehicles();
    for a in 0..nv {
        for b in 0..nv {
            if a == b {
                continue;
            }
            let rel = s.orel(a, b);
            if a < b && rel != s.orel(b, a).invert() {
                r.report(RuleId::PR14Sym, &[W::V(a), W::V(b)]);
            }
            let shared: Vec<(usize, bool, bool)> = d
                .memberships(a)
                .filter_map(|(o, fa)| {
                    d.memberships(b).find(|(ob, _)| *ob == o).map(|(_, fb)| (o, fa, fb))
                })
                .collect();
            if shared.is_empty() {
                if !rel.is_none() {
                    r.report(RuleId::PR13, &[W::V(a), W::V(b)]);
                }
                continue;
            }
            for (o, fa, fb) in shared {
                let (ps, pe) = ix.overlaps[o];
                let expected = match (fa, fb) {
                    (true, true) => Some(s.vrel(a, b)),
                    (false, false) => Some(s.vrel(a, b).invert()),
                    _ => None,
                };
                let bad = match expected {
                    Some(e) => !e.is_none() && rel != e,
                    None => rel.is_none(),
                };
                if bad {
                    r.report(RuleId::PR13, &[W::V(a), W::V(b), W::P(ps), W::P(pe)]);
                }
                if expected.is_none() && a < b && rel == C {
                    r.report(RuleId::TR2, &[W::V(a), W::V(b), W::P(ps), W::P(pe)]);
                }
            }
        }
        if r.done() {
            return;
        }
    }
}

/// PR14 transitivity of overlap relations.
fn overlap_triples(s: &Scene, _n: &RoadNetwork, _d: &DerivedFacts, r: &mut Reporter<'_>) {
    let nv = s.n_vehicles();
    for a in 0..nv {
        for b in 0..nv {
            let ab = s.orel(a, b);
            if b == a || !(ab == A || ab == B) {
                continue;
            }
            for c in 0..nv {
                if c == a || c == b {
                    continue;
                }
                if s.orel(b, c) == ab && s.orel(a, c) != ab {
                    r.report(RuleId::PR14Trans, &[W::V(a), W::V(b), W::V(c)]);
                }
            }
        }
        if r.done() {
            return;
        }
    }
}

/// Point relations along a road must agree with the order of the points:
/// being behind a point means being behind every later one, and being ahead
/// of or covering a point means being ahead of every earlier one.
fn point_order(s: &Scene, n: &RoadNetwork, d: &DerivedFacts, r: &mut Reporter<'_>) {
    let ix = n.index();
    for c in 0..s.n_vehicles() {
        let Some(road) = d.road(c) else { continue };
        for &(p1, p2) in &ix.road_point_order[road] {
            let (r1, r2) = (s.prel(c, p1), s.prel(c, p2));
            if r1.is_none() || r2.is_none() {
                continue;
            }
            let bad = (r1 == B && r2 != B) || (r2 != B && r1 != A && !(r1 == C && r2 == C));
            if bad {
                r.report(RuleId::PR14Trans, &[W::V(c), W::P(p1), W::P(p2)]);
            }
        }
        if r.done() {
            return;
        }
    }
}
