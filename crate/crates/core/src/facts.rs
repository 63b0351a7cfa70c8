//! Line-oriented fact format shared by networks, scenarios and requests.
//!
//! One atom per line, terminated by `.`; `%` starts a comment; lines
//! starting with `#` are directives (`#step k`, `#init`, `#scenario n`, ...).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::domain::{
    LaneId, LonRel, PointClass, PointId, Road, RoadId, RoadNetwork, Scenario, Scene,
    VehicleId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FactError {
    pub line: usize,
    pub message: String,
}

impl FactError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub negated: bool,
    pub pred: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(pred: &str, args: &[&str]) -> Self {
        Self {
            negated: false,
            pred: pred.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// Parses `pred(a,b,c)` with an optional leading `not `.
    pub fn parse(text: &str) -> Result<Atom, String> {
        let mut text = text.trim();
        let mut negated = false;
        if let Some(rest) = text.strip_prefix("not ") {
            negated = true;
            text = rest.trim_start();
        }
        let open = text.find('(').ok_or_else(|| format!("expected `(` in `{text}`"))?;
        if !text.ends_with(')') {
            return Err(format!("expected `)` at end of `{text}`"));
        }
        let pred = text[..open].trim();
        if pred.is_empty() || !pred.chars().all(|c| c.is_ascii_lowercase()) {
            return Err(format!("bad predicate name `{pred}`"));
        }
        let inner = &text[open + 1..text.len() - 1];
        let args: Vec<String> = inner.split(',').map(|a| a.trim().to_string()).collect();
        if args.iter().any(|a| a.is_empty()) {
            return Err(format!("empty argument in `{text}`"));
        }
        if let Some(bad) = args
            .iter()
            .find(|a| !a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
        {
            return Err(format!("bad argument `{bad}`"));
        }
        Ok(Atom { negated, pred: pred.to_string(), args })
    }

    fn expect_arity(&self, n: usize, line: usize) -> Result<(), FactError> {
        if self.args.len() == n {
            Ok(())
        } else {
            Err(FactError::new(
                line,
                format!("`{}` takes {n} arguments, got {}", self.pred, self.args.len()),
            ))
        }
    }
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        write!(f, "{}({})", self.pred, self.args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Line {
    Directive { name: String, arg: String },
    Atom(Atom),
}

/// Splits a document into numbered directive and atom lines.
pub fn tokenize(text: &str) -> Result<Vec<(usize, Line)>, FactError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('%') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (name, arg) = match rest.find(char::is_whitespace) {
                Some(pos) => (&rest[..pos], rest[pos..].trim()),
                None => (rest, ""),
            };
            out.push((line_no, Line::Directive { name: name.to_string(), arg: arg.to_string() }));
            continue;
        }
        let body = line
            .strip_suffix('.')
            .ok_or_else(|| FactError::new(line_no, "atom must end with `.`"))?;
        let atom = Atom::parse(body).map_err(|m| FactError::new(line_no, m))?;
        out.push((line_no, Line::Atom(atom)));
    }
    Ok(out)
}

pub const NETWORK_PREDICATES: [&str; 7] =
    ["lane", "left", "pon", "class", "succp", "succl", "overlap"];
pub const SCENE_PREDICATES: [&str; 5] = ["vehicle", "on", "lonr", "lonpr", "lonro"];

fn id<T: std::str::FromStr<Err = crate::domain::InvalidId>>(
    s: &str,
    line: usize,
) -> Result<T, FactError> {
    s.parse::<T>().map_err(|e| FactError::new(line, e.to_string()))
}

/// Builds a network from network atoms. Lane order within a road follows the
/// `left` chain; lanes not ordered by it keep their order of appearance.
pub fn parse_network(atoms: &[(usize, Atom)]) -> Result<RoadNetwork, FactError> {
    let mut road_order: Vec<RoadId> = Vec::new();
    let mut road_lanes: HashMap<RoadId, Vec<LaneId>> = HashMap::new();
    let mut lane_road: HashMap<LaneId, RoadId> = HashMap::new();
    let mut left: Vec<(usize, LaneId, LaneId)> = Vec::new();
    let mut points: BTreeMap<PointId, PointClass> = BTreeMap::new();
    let mut succ_p = BTreeSet::new();
    let mut succ_c = BTreeSet::new();
    let mut overlaps = BTreeSet::new();
    let mut affiliation = BTreeSet::new();

    for (line, atom) in atoms {
        let line = *line;
        if atom.negated {
            return Err(FactError::new(line, "negated network fact"));
        }
        let a = &atom.args;
        match atom.pred.as_str() {
            "lane" => {
                atom.expect_arity(2, line)?;
                let lane: LaneId = id(&a[0], line)?;
                let road: RoadId = id(&a[1], line)?;
                if let Some(prev) = lane_road.get(&lane) {
                    if prev != &road {
                        return Err(FactError::new(line, format!("lane {lane} already on road {prev}")));
                    }
                    continue;
                }
                lane_road.insert(lane.clone(), road.clone());
                if !road_lanes.contains_key(&road) {
                    road_order.push(road.clone());
                }
                road_lanes.entry(road).or_default().push(lane);
            }
            "left" => {
                atom.expect_arity(2, line)?;
                left.push((line, id(&a[0], line)?, id(&a[1], line)?));
            }
            "pon" => {
                atom.expect_arity(2, line)?;
                affiliation.insert((id::<LaneId>(&a[1], line)?, id::<PointId>(&a[0], line)?));
            }
            "class" => {
                atom.expect_arity(2, line)?;
                let p: PointId = id(&a[0], line)?;
                let class = PointClass::from_code(&a[1])
                    .ok_or_else(|| FactError::new(line, format!("unknown point class `{}`", a[1])))?;
                if let Some(prev) = points.insert(p.clone(), class) {
                    if prev != class {
                        return Err(FactError::new(line, format!("point {p} has two classes")));
                    }
                }
            }
            "succp" => {
                atom.expect_arity(3, line)?;
                succ_p.insert((id(&a[0], line)?, id(&a[1], line)?, id(&a[2], line)?));
            }
            "succl" => {
                atom.expect_arity(2, line)?;
                succ_c.insert((id(&a[0], line)?, id(&a[1], line)?));
            }
            "overlap" => {
                atom.expect_arity(2, line)?;
                overlaps.insert((id(&a[0], line)?, id(&a[1], line)?));
            }
            other => return Err(FactError::new(line, format!("unexpected predicate `{other}`"))),
        }
    }

    // Points used in relations but never classified are kept out; validation
    // reports them as unknown.
    let mut successors: HashMap<LaneId, LaneId> = HashMap::new();
    let mut has_left: BTreeSet<LaneId> = BTreeSet::new();
    for (line, l1, l2) in &left {
        match (lane_road.get(l1), lane_road.get(l2)) {
            (Some(r1), Some(r2)) if r1 == r2 => {}
            _ => {
                return Err(FactError::new(
                    *line,
                    format!("left({l1},{l2}) must relate two lanes of one road"),
                ))
            }
        }
        if successors.insert(l1.clone(), l2.clone()).is_some() || !has_left.insert(l2.clone()) {
            return Err(FactError::new(*line, format!("lane order of {l1}/{l2} is not a chain")));
        }
    }

    let mut roads = Vec::new();
    for road in road_order {
        let lanes = road_lanes.remove(&road).unwrap_or_default();
        let mut ordered = Vec::with_capacity(lanes.len());
        let mut placed: BTreeSet<LaneId> = BTreeSet::new();
        for start in lanes.iter().filter(|l| !has_left.contains(*l)) {
            let mut cur = start.clone();
            loop {
                if !placed.insert(cur.clone()) {
                    break;
                }
                ordered.push(cur.clone());
                match successors.get(&cur) {
                    Some(next) => cur = next.clone(),
                    None => break,
                }
            }
        }
        if ordered.len() != lanes.len() {
            return Err(FactError::new(0, format!("lane order of road {road} is cyclic")));
        }
        roads.push(Road::new(road, ordered));
    }
    roads.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(RoadNetwork::new(roads, points, succ_p, succ_c, overlaps, affiliation))
}

pub fn parse_network_text(text: &str) -> Result<RoadNetwork, FactError> {
    let mut atoms = Vec::new();
    for (line, item) in tokenize(text)? {
        match item {
            Line::Atom(a) => atoms.push((line, a)),
            Line::Directive { name, .. } if name == "meta" => {}
            Line::Directive { name, .. } => {
                return Err(FactError::new(line, format!("unexpected directive #{name}")))
            }
        }
    }
    parse_network(&atoms)
}

/// Canonical network rendering: sorted atom lines.
pub fn render_network(n: &RoadNetwork) -> String {
    let mut lines = Vec::new();
    for road in n.roads() {
        for lane in &road.lanes {
            lines.push(format!("lane({lane},{}).", road.id));
        }
        for w in road.lanes.windows(2) {
            lines.push(format!("left({},{}).", w[0], w[1]));
        }
    }
    for (p, class) in n.points() {
        lines.push(format!("class({p},{}).", class.code()));
    }
    for (l, p) in n.affiliation() {
        lines.push(format!("pon({p},{l})."));
    }
    for (l, a, b) in n.succ_p() {
        lines.push(format!("succp({l},{a},{b})."));
    }
    for (p, l) in n.succ_c() {
        lines.push(format!("succl({p},{l})."));
    }
    for (a, b) in n.overlaps() {
        lines.push(format!("overlap({a},{b})."));
    }
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Scene atoms as unsorted lines; `None` relations are implicit.
pub fn scene_lines(scene: &Scene, vehicles: &[VehicleId], n: &RoadNetwork) -> Vec<String> {
    let ix = n.index();
    let mut lines = Vec::new();
    for (c, v) in vehicles.iter().enumerate() {
        for l in scene.occ(c).iter() {
            lines.push(format!("on({v},{}).", ix.lanes[l]));
        }
        for (p, pid) in ix.points.iter().enumerate() {
            let d = scene.prel(c, p);
            if !d.is_none() {
                lines.push(format!("lonpr({v},{pid},{d})."));
            }
        }
    }
    for (a, b) in scene.pairs() {
        let d = scene.vrel(a, b);
        if !d.is_none() {
            lines.push(format!("lonr({},{},{d}).", vehicles[a], vehicles[b]));
        }
        let d = scene.orel(a, b);
        if !d.is_none() {
            lines.push(format!("lonro({},{},{d}).", vehicles[a], vehicles[b]));
        }
    }
    lines
}

/// Canonical scenario rendering: vehicle declarations, then one `#step k`
/// block per scene with sorted atoms. Equal scenarios give equal strings.
pub fn render_scenario(sc: &Scenario) -> String {
    let mut out = String::new();
    for v in sc.vehicles() {
        let _ = writeln!(out, "vehicle({v}).");
    }
    for (k, scene) in sc.scenes().iter().enumerate() {
        let _ = writeln!(out, "#step {k}");
        let mut lines = scene_lines(scene, sc.vehicles(), sc.network());
        lines.sort();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
    }
    out
}

/// Vehicles mentioned by scene atoms, sorted.
pub fn collect_vehicles(atoms: &[(usize, Atom)]) -> Result<Vec<VehicleId>, FactError> {
    let mut set = BTreeSet::new();
    for (line, atom) in atoms {
        let names: &[String] = match atom.pred.as_str() {
            "vehicle" | "on" | "lonpr" => &atom.args[..1.min(atom.args.len())],
            "lonr" | "lonro" => &atom.args[..2.min(atom.args.len())],
            _ => &[],
        };
        for name in names {
            set.insert(id::<VehicleId>(name, *line)?);
        }
    }
    Ok(set.into_iter().collect())
}

/// Builds one scene from `vehicle/on/lonr/lonpr/lonro` atoms. Pair atoms are
/// stored exactly as given (one orientation each).
pub fn parse_scene(
    atoms: &[(usize, Atom)],
    vehicles: &[VehicleId],
    n: &RoadNetwork,
) -> Result<Scene, FactError> {
    let ix = n.index();
    let vix: HashMap<&str, usize> =
        vehicles.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let vehicle = |s: &str, line: usize| {
        vix.get(s).copied().ok_or_else(|| FactError::new(line, format!("unknown vehicle `{s}`")))
    };
    let lane = |s: &str, line: usize| {
        LaneId::new(s)
            .ok()
            .and_then(|l| ix.lane_ix.get(&l).copied())
            .ok_or_else(|| FactError::new(line, format!("unknown lane `{s}`")))
    };
    let point = |s: &str, line: usize| {
        PointId::new(s)
            .ok()
            .and_then(|p| ix.point_ix.get(&p).copied())
            .ok_or_else(|| FactError::new(line, format!("unknown point `{s}`")))
    };
    let rel = |s: &str, line: usize| {
        s.parse::<LonRel>().map_err(|e| FactError::new(line, e.to_string()))
    };

    let mut scene = Scene::new(vehicles.len(), ix.points.len());
    let mut seen: HashMap<(u8, usize, usize), LonRel> = HashMap::new();
    let mut set_once = |kind: u8, a: usize, b: usize, d: LonRel, line: usize| {
        match seen.insert((kind, a, b), d) {
            Some(prev) if prev != d => {
                Err(FactError::new(line, format!("conflicting relations {prev} and {d}")))
            }
            _ => Ok(()),
        }
    };
    for (line, atom) in atoms {
        let line = *line;
        if atom.negated {
            return Err(FactError::new(line, "negated scene atom"));
        }
        let a = &atom.args;
        match atom.pred.as_str() {
            "vehicle" => {
                atom.expect_arity(1, line)?;
                vehicle(&a[0], line)?;
            }
            "on" => {
                atom.expect_arity(2, line)?;
                let c = vehicle(&a[0], line)?;
                let l = lane(&a[1], line)?;
                scene.occ_mut(c).insert(l);
            }
            "lonr" => {
                atom.expect_arity(3, line)?;
                let (c1, c2, d) = (vehicle(&a[0], line)?, vehicle(&a[1], line)?, rel(&a[2], line)?);
                if c1 == c2 {
                    return Err(FactError::new(line, "lonr needs two distinct vehicles"));
                }
                set_once(0, c1, c2, d, line)?;
                scene.set_vrel_raw(c1, c2, d);
            }
            "lonpr" => {
                atom.expect_arity(3, line)?;
                let (c, p, d) = (vehicle(&a[0], line)?, point(&a[1], line)?, rel(&a[2], line)?);
                set_once(1, c, p, d, line)?;
                scene.set_prel(c, p, d);
            }
            "lonro" => {
                atom.expect_arity(3, line)?;
                let (c1, c2, d) = (vehicle(&a[0], line)?, vehicle(&a[1], line)?, rel(&a[2], line)?);
                if c1 == c2 {
                    return Err(FactError::new(line, "lonro needs two distinct vehicles"));
                }
                set_once(2, c1, c2, d, line)?;
                scene.set_orel_raw(c1, c2, d);
            }
            other => return Err(FactError::new(line, format!("unexpected predicate `{other}`"))),
        }
    }
    Ok(scene)
}

/// Parses a scenario file, or a result file holding several scenarios under
/// `#scenario n` headers.
pub fn parse_scenarios(text: &str, n: Arc<RoadNetwork>) -> Result<Vec<Scenario>, FactError> {
    let lines = tokenize(text)?;
    let mut groups: Vec<Vec<(usize, Line)>> = Vec::new();
    let mut current: Vec<(usize, Line)> = Vec::new();
    for (no, item) in lines {
        if let Line::Directive { name, .. } = &item {
            if name == "scenario" {
                if !current.is_empty() {
                    groups.push(std::mem::take(&mut current));
                }
                continue;
            }
        }
        current.push((no, item));
    }
    if !current.is_empty() {
        groups.push(current);
    }
    if groups.is_empty() {
        return Err(FactError::new(0, "no scenario found"));
    }
    groups.into_iter().map(|g| parse_scenario_lines(g, Arc::clone(&n))).collect()
}

fn parse_scenario_lines(lines: Vec<(usize, Line)>, n: Arc<RoadNetwork>) -> Result<Scenario, FactError> {
    let mut header: Vec<(usize, Atom)> = Vec::new();
    let mut steps: Vec<Vec<(usize, Atom)>> = Vec::new();
    let mut first_line = 0;
    for (no, item) in lines {
        if first_line == 0 {
            first_line = no;
        }
        match item {
            Line::Directive { name, arg } if name == "step" => {
                let k: usize = arg
                    .parse()
                    .map_err(|_| FactError::new(no, format!("bad step index `{arg}`")))?;
                if k != steps.len() {
                    return Err(FactError::new(no, format!("expected #step {}", steps.len())));
                }
                steps.push(Vec::new());
            }
            Line::Directive { name, .. } => {
                return Err(FactError::new(no, format!("unexpected directive #{name}")))
            }
            Line::Atom(a) => match steps.last_mut() {
                Some(step) => step.push((no, a)),
                None if a.pred == "vehicle" => header.push((no, a)),
                None => return Err(FactError::new(no, "scene atom before the first #step")),
            },
        }
    }
    if steps.is_empty() {
        return Err(FactError::new(first_line, "scenario without #step blocks"));
    }
    let mut all = header.clone();
    for s in &steps {
        all.extend(s.iter().cloned());
    }
    let vehicles = Arc::new(collect_vehicles(&all)?);
    let scenes = steps
        .iter()
        .map(|atoms| parse_scene(atoms, &vehicles, &n))
        .collect::<Result<Vec<_>, _>>()?;
    Scenario::new(vehicles, n, scenes).map_err(|e| FactError::new(first_line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NET: &str = "\
lane(l1,r1). lane(l2,r1).
";

    #[test]
    fn atom_parsing() {
        let a = Atom::parse("lonr(c1, c2,ahead)").unwrap();
        assert_eq!(a.args, vec!["c1", "c2", "ahead"]);
        assert!(Atom::parse("not on(c1,l1)").unwrap().negated);
        assert!(Atom::parse("on c1").is_err());
        assert!(Atom::parse("on(c1,)").is_err());
        assert!(tokenize("on(c1,l1)").is_err());
        assert_eq!(tokenize("% only a comment\n\n").unwrap(), vec![]);
    }

    #[test]
    fn one_atom_per_line() {
        assert!(tokenize(NET).is_err());
    }

    fn sample_network() -> RoadNetwork {
        parse_network_text(
            "lane(l2,r1).\nlane(l1,r1).\nleft(l1,l2).\nlane(la,ra).\nclass(px,x).\npon(px,l1).\npon(px,la).\n",
        )
        .unwrap()
    }

    #[test]
    fn network_round_trip() {
        let n = sample_network();
        assert_eq!(n.roads()[0].lanes.iter().map(|l| l.as_str()).collect::<Vec<_>>(), ["l1", "l2"]);
        let text = render_network(&n);
        let back = parse_network_text(&text).unwrap();
        assert_eq!(back, n);
        assert_eq!(render_network(&back), text);
    }

    #[test]
    fn scenario_round_trip_and_order_insensitivity() {
        let n = Arc::new(sample_network());
        let a = "#step 0\non(c1,l1).\nlonr(c1,c2,behind).\nlonr(c2,c1,ahead).\non(c2,l1).\nlonpr(c1,px,behind).\n";
        let b = "#step 0\nlonpr(c1,px,behind).\non(c2,l1).\nlonr(c2,c1,ahead).\non(c1,l1).\nlonr(c1,c2,behind).\n";
        let sa = parse_scenarios(a, n.clone()).unwrap().remove(0);
        let sb = parse_scenarios(b, n.clone()).unwrap().remove(0);
        assert_eq!(render_scenario(&sa), render_scenario(&sb));
        let again = parse_scenarios(&render_scenario(&sa), n).unwrap().remove(0);
        assert_eq!(again, sa);
    }

    #[test]
    fn conflicting_and_unknown_atoms() {
        let n = Arc::new(sample_network());
        assert!(parse_scenarios("#step 0\non(c1,zz).\n", n.clone()).is_err());
        assert!(parse_scenarios("#step 0\nlonr(c1,c2,ahead).\nlonr(c1,c2,cover).\n", n.clone()).is_err());
        assert!(parse_scenarios("on(c1,l1).\n", n.clone()).is_err());
        let err = parse_scenarios("#step 1\n", n).unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn multiple_scenarios() {
        let n = Arc::new(sample_network());
        let text = "#scenario 0\n#step 0\non(c1,l1).\n#scenario 1\n#step 0\non(c1,l2).\n#step 1\non(c1,l1).\n";
        let all = parse_scenarios(text, n).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].horizon(), 2);
    }
}
