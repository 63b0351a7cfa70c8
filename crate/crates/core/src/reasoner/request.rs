//! Request files: network facts, an `#init` block of scene atoms, and the
//! directives `#horizon T`, `#mode exact|shortest`, `#goal a, not b, ...` and
//! `#fixlanes c1,c2` (vehicles that keep their lanes).
//!
//! Vehicle and overlap relations in `#init` may be given in one orientation;
//! the other is filled in.

use std::sync::Arc;

use crate::domain::{LaneId, LonRel, PointId, RoadNetwork, VehicleId};
use crate::facts::{
    collect_vehicles, parse_network, parse_scene, tokenize, Atom, Line, NETWORK_PREDICATES,
    SCENE_PREDICATES,
};

use super::{ExpansionRequest, Goal, GoalAtom, GoalLiteral, Mode, ReasonerError};

fn err(line: usize, msg: impl std::fmt::Display) -> ReasonerError {
    ReasonerError::Request(format!("line {line}: {msg}"))
}

/// Splits `a(x,y), not b(z)` at top-level commas.
fn split_literals(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(text[start..].trim());
    out.retain(|s| !s.is_empty());
    out
}

pub fn parse_request(text: &str) -> Result<ExpansionRequest, ReasonerError> {
    let lines = tokenize(text).map_err(|e| ReasonerError::Request(e.to_string()))?;
    let mut net_atoms = Vec::new();
    let mut scene_atoms = Vec::new();
    let mut goal_atoms: Vec<(usize, Atom)> = Vec::new();
    let mut fixed_names: Vec<(usize, String)> = Vec::new();
    let (mut horizon, mut mode, mut saw_init) = (None, None, false);

    for (no, line) in lines {
        match line {
            Line::Directive { name, arg } => match name.as_str() {
                "init" => saw_init = true,
                "horizon" => {
                    horizon = Some(arg.parse::<usize>().map_err(|_| err(no, format!("bad horizon `{arg}`")))?)
                }
                "mode" => mode = Some(arg.parse::<Mode>().map_err(|e| err(no, e))?),
                "goal" => {
                    for lit in split_literals(&arg) {
                        goal_atoms.push((no, Atom::parse(lit).map_err(|e| err(no, e))?));
                    }
                }
                "fixlanes" => {
                    fixed_names.extend(arg.split(',').map(|s| (no, s.trim().to_string())).filter(|(_, s)| !s.is_empty()))
                }
                "meta" => {}
                other => return Err(err(no, format!("unknown directive #{other}"))),
            },
            Line::Atom(a) if NETWORK_PREDICATES.contains(&a.pred.as_str()) => net_atoms.push((no, a)),
            Line::Atom(a) if SCENE_PREDICATES.contains(&a.pred.as_str()) => {
                if !saw_init {
                    return Err(err(no, "scene atom before #init"));
                }
                scene_atoms.push((no, a));
            }
            Line::Atom(a) => return Err(err(no, format!("unexpected predicate `{}`", a.pred))),
        }
    }
    if !saw_init {
        return Err(ReasonerError::Request("missing #init block".into()));
    }
    let network = Arc::new(parse_network(&net_atoms).map_err(|e| ReasonerError::Request(e.to_string()))?);
    let vehicles = collect_vehicles(&scene_atoms).map_err(|e| ReasonerError::Request(e.to_string()))?;
    if vehicles.is_empty() {
        return Err(ReasonerError::Request("#init declares no vehicles".into()));
    }
    let mut initial =
        parse_scene(&scene_atoms, &vehicles, &network).map_err(|e| ReasonerError::Request(e.to_string()))?;
    for (a, b) in initial.pairs().collect::<Vec<_>>() {
        if initial.vrel(b, a).is_none() && !initial.vrel(a, b).is_none() {
            let d = initial.vrel(a, b);
            initial.set_vrel(a, b, d);
        }
        if initial.orel(b, a).is_none() && !initial.orel(a, b).is_none() {
            let d = initial.orel(a, b);
            initial.set_orel(a, b, d);
        }
    }
    let goal = if goal_atoms.is_empty() {
        None
    } else {
        Some(resolve_goal(&goal_atoms, &vehicles, &network)?)
    };
    let mut fixed = vec![false; vehicles.len()];
    for (no, name) in fixed_names {
        let i = vehicles
            .iter()
            .position(|v| v.as_str() == name)
            .ok_or_else(|| err(no, format!("unknown vehicle `{name}` in #fixlanes")))?;
        fixed[i] = true;
    }
    let mode = mode.unwrap_or(if goal.is_some() { Mode::Shortest } else { Mode::Exact });
    let horizon = horizon.ok_or_else(|| ReasonerError::Request("missing #horizon".into()))?;
    Ok(ExpansionRequest { network, vehicles: Arc::new(vehicles), initial, horizon, goal, mode, fixed })
}

pub(crate) fn resolve_goal(
    atoms: &[(usize, Atom)],
    vehicles: &[VehicleId],
    n: &RoadNetwork,
) -> Result<Goal, ReasonerError> {
    let ix = n.index();
    let vehicle = |s: &str| {
        vehicles
            .iter()
            .position(|v| v.as_str() == s)
            .ok_or_else(|| ReasonerError::UnknownGoalId { kind: "vehicle", id: s.to_string() })
    };
    let lane = |s: &str| {
        LaneId::new(s)
            .ok()
            .and_then(|l| ix.lane_ix.get(&l).copied())
            .ok_or_else(|| ReasonerError::UnknownGoalId { kind: "lane", id: s.to_string() })
    };
    let point = |s: &str| {
        PointId::new(s)
            .ok()
            .and_then(|p| ix.point_ix.get(&p).copied())
            .ok_or_else(|| ReasonerError::UnknownGoalId { kind: "point", id: s.to_string() })
    };
    let mut literals = Vec::new();
    for (no, a) in atoms {
        let args = &a.args;
        let arity = match a.pred.as_str() {
            "on" => 2,
            "lonr" | "lonpr" | "lonro" => 3,
            other => return Err(err(*no, format!("goal predicate `{other}` not supported"))),
        };
        if args.len() != arity {
            return Err(err(*no, format!("`{}` takes {arity} arguments", a.pred)));
        }
        let rel = |s: &str| s.parse::<LonRel>().map_err(|e| err(*no, e));
        let atom = match a.pred.as_str() {
            "on" => GoalAtom::On(vehicle(&args[0])?, lane(&args[1])?),
            "lonr" => GoalAtom::VRel(vehicle(&args[0])?, vehicle(&args[1])?, rel(&args[2])?),
            "lonpr" => GoalAtom::PRel(vehicle(&args[0])?, point(&args[1])?, rel(&args[2])?),
            _ => GoalAtom::ORel(vehicle(&args[0])?, vehicle(&args[1])?, rel(&args[2])?),
        };
        literals.push(GoalLiteral { negated: a.negated, atom });
    }
    Ok(Goal { literals })
}

/// Goal as a `#goal` directive argument.
pub fn render_goal(goal: &Goal, vehicles: &[VehicleId], n: &RoadNetwork) -> String {
    let ix = n.index();
    goal.literals
        .iter()
        .map(|l| {
            let body = match l.atom {
                GoalAtom::On(c, lane) => format!("on({},{})", vehicles[c], ix.lanes[lane]),
                GoalAtom::VRel(a, b, d) => format!("lonr({},{},{d})", vehicles[a], vehicles[b]),
                GoalAtom::PRel(c, p, d) => format!("lonpr({},{},{d})", vehicles[c], ix.points[p]),
                GoalAtom::ORel(a, b, d) => format!("lonro({},{},{d})", vehicles[a], vehicles[b]),
            };
            if l.negated { format!("not {body}") } else { body }
        })
        .collect::<Vec<_>>()
        .join(", ")
}
