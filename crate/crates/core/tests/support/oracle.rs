//! Brute-force enumeration of scenarios for small universes.

use std::collections::BTreeSet;
use std::sync::Arc;

use tsl_core::domain::{validate_network, LaneSet, LonRel, RoadNetwork, Scenario, Scene, VehicleId};
use tsl_core::facts::{parse_network_text, render_scenario};
use tsl_core::reasoner::{expand, ExpansionRequest, Mode};
use tsl_core::rules::{check_scenario, check_scene};

const REL: [LonRel; 4] = [LonRel::None, LonRel::Ahead, LonRel::Cover, LonRel::Behind];

/// Every scene over the universes, without any filtering.
pub fn all_raw_scenes(nv: usize, n: &RoadNetwork) -> Vec<Scene> {
    let nl = n.lane_count();
    let np = n.point_count();
    let pairs: Vec<(usize, usize)> =
        (0..nv).flat_map(|a| (0..nv).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let slots = nv + pairs.len() + nv * np;
    let mut radix = Vec::new();
    radix.extend(std::iter::repeat(1usize << nl).take(nv));
    radix.extend(std::iter::repeat(4).take(pairs.len() + nv * np));
    let total: usize = radix.iter().product();
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut digits = Vec::with_capacity(slots);
        for &r in &radix {
            digits.push(code % r);
            code /= r;
        }
        let mut s = Scene::new(nv, np);
        for c in 0..nv {
            s.set_occ(c, LaneSet::from_lanes((0..nl).filter(|l| digits[c] >> l & 1 == 1)));
        }
        for (i, &(a, b)) in pairs.iter().enumerate() {
            s.set_vrel_raw(a, b, REL[digits[nv + i]]);
        }
        for c in 0..nv {
            for p in 0..np {
                s.set_prel(c, p, REL[digits[nv + pairs.len() + c * np + p]]);
            }
        }
        out.push(s);
    }
    out
}

pub fn vehicles(nv: usize) -> Arc<Vec<VehicleId>> {
    Arc::new((1..=nv).map(|i| VehicleId::new(format!("c{i}")).unwrap()).collect())
}

pub fn brute_force(n: &Arc<RoadNetwork>, vs: &Arc<Vec<VehicleId>>, valid: &[Scene], init: &Scene, t: usize) -> BTreeSet<String> {
    let mut frontier = vec![vec![init.clone()]];
    for _ in 1..t {
        let mut next = Vec::new();
        for path in &frontier {
            for s in valid {
                if s == path.last().unwrap() {
                    continue;
                }
                let mut p = path.clone();
                p.push(s.clone());
                let sc = Scenario::new(vs.clone(), n.clone(), p.clone()).unwrap();
                if check_scenario(&sc).is_empty() {
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    frontier
        .into_iter()
        .map(|p| render_scenario(&Scenario::new(vs.clone(), n.clone(), p).unwrap()))
        .collect()
}

/// Runs expansion and brute force from up to `max_inits` valid initial
/// scenes (all of them for `None`) for every horizon up to `max_t`.
/// Returns how many initial scenes admit a scenario of length `max_t`.
pub fn compare(net: &str, nv: usize, max_t: usize, max_inits: Option<usize>) -> Result<usize, String> {
    let n = Arc::new(parse_network_text(net).map_err(|e| e.to_string())?);
    let vs = vehicles(nv);
    let valid: Vec<Scene> = all_raw_scenes(nv, &n)
        .into_iter()
        .filter(|s| check_scene(s, &vs, &n).is_empty())
        .collect();
    if valid.is_empty() {
        return Ok(0);
    }
    let step = max_inits.map_or(1, |m| (valid.len() / m).max(1));
    let mut nonempty = 0;
    for init in valid.iter().step_by(step) {
        for t in 1..=max_t {
            let req = ExpansionRequest {
                network: n.clone(),
                vehicles: vs.clone(),
                initial: init.clone(),
                horizon: t,
                goal: None,
                mode: Mode::Exact,
                fixed: vec![false; nv],
            };
            let got: BTreeSet<String> =
                expand(&req, 2).map_err(|e| e.to_string())?.scenarios.iter().map(render_scenario).collect();
            let want = brute_force(&n, &vs, &valid, init, t);
            if got != want {
                return Err(format!(
                    "network:\n{net}initial: {init:?}\nT={t}: {} generated, {} enumerated",
                    got.len(),
                    want.len()
                ));
            }
            if t == max_t && !got.is_empty() {
                nonempty += 1;
            }
        }
    }
    Ok(nonempty)
}

/// Every well-formed network with one or two lanes and at most one point,
/// as fact text.
pub fn small_networks() -> Vec<String> {
    let mut lane_sets = vec!["lane(l1,r1).\n".to_string()];
    lane_sets.push("lane(l1,r1).\nlane(l2,r1).\nleft(l2,l1).\n".into());
    lane_sets.push("lane(l1,r1).\nlane(l2,r2).\n".into());
    let mut out = Vec::new();
    for (i, lanes) in lane_sets.iter().enumerate() {
        let names: Vec<&str> = if i == 0 { vec!["l1"] } else { vec!["l1", "l2"] };
        out.push(lanes.clone());
        let subsets: Vec<Vec<&str>> = (1..1usize << names.len())
            .map(|m| names.iter().enumerate().filter(|(k, _)| m >> k & 1 == 1).map(|(_, l)| *l).collect())
            .collect();
        for class in ["x", "c"] {
            for on in &subsets {
                let succ: Vec<Vec<&str>> = if class == "c" { subsets.clone() } else { vec![vec![]] };
                for sl in &succ {
                    let mut text = format!("{lanes}class(p,{class}).\n");
                    for l in on {
                        text.push_str(&format!("pon(p,{l}).\n"));
                    }
                    for l in sl {
                        text.push_str(&format!("succl(p,{l}).\n"));
                    }
                    let n = parse_network_text(&text).expect("generated facts parse");
                    if validate_network(&n).is_empty() {
                        out.push(text);
                    }
                }
            }
        }
    }
    out
}
