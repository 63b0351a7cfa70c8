//! Bounded model expansion: every rule-satisfying scenario rooted at an
//! initial scene, either of an exact length or of minimal length reaching a
//! goal.

mod request;
mod successors;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;
use tracing::{debug, info};

use crate::domain::{LonRel, RoadNetwork, Scenario, Scene, VehicleId};
use crate::facts::render_scenario;
use crate::rules::{check_scene, Violation};

pub use request::{parse_request, render_goal};
pub use successors::{successors, SuccessorStats};

#[derive(Debug, Error)]
pub enum ReasonerError {
    #[error("initial scene violates the rules:\n{}", render(.0))]
    InvalidInitial(Vec<Violation>),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("shortest mode needs a goal")]
    MissingGoal,
    #[error("goal references unknown {kind} `{id}`")]
    UnknownGoalId { kind: &'static str, id: String },
    #[error("request: {0}")]
    Request(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn render(v: &[Violation]) -> String {
    crate::rules::render_violations(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Exact,
    #[default]
    Shortest,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "shortest" => Ok(Mode::Shortest),
            other => Err(format!("unknown mode `{other}` (expected exact or shortest)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalAtom {
    On(usize, usize),
    VRel(usize, usize, LonRel),
    PRel(usize, usize, LonRel),
    ORel(usize, usize, LonRel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalLiteral {
    pub negated: bool,
    pub atom: GoalAtom,
}

/// Conjunction of ground literals required in the final scene.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Goal {
    pub literals: Vec<GoalLiteral>,
}

impl Goal {
    pub fn holds(&self, s: &Scene) -> bool {
        self.literals.iter().all(|l| {
            let v = match l.atom {
                GoalAtom::On(c, lane) => s.occ(c).contains(lane),
                GoalAtom::VRel(a, b, d) => s.vrel(a, b) == d,
                GoalAtom::PRel(c, p, d) => s.prel(c, p) == d,
                GoalAtom::ORel(a, b, d) => s.orel(a, b) == d,
            };
            v != l.negated
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExpansionRequest {
    pub network: Arc<RoadNetwork>,
    pub vehicles: Arc<Vec<VehicleId>>,
    pub initial: Scene,
    /// Number of scenes: exact length, or upper bound in shortest mode.
    pub horizon: usize,
    pub goal: Option<Goal>,
    pub mode: Mode,
    /// Per vehicle: occupancy may not change.
    pub fixed: Vec<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExpansionStats {
    /// Scenes whose successors were generated.
    pub expanded: u64,
    /// Candidate successors rejected by the full checks.
    pub pruned: u64,
    pub wall_time: Duration,
    /// Minimal goal-reaching length in shortest mode.
    pub shortest_len: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub scenarios: Vec<Scenario>,
    pub stats: ExpansionStats,
}

/// Canonical text of a scenario; equal scenarios give equal strings.
pub fn canonicalize(sc: &Scenario) -> String {
    render_scenario(sc)
}

/// Renders results as `#scenario n` blocks.
pub fn render_result(scenarios: &[Scenario]) -> String {
    let mut out = String::new();
    for (i, sc) in scenarios.iter().enumerate() {
        out.push_str(&format!("#scenario {i}\n"));
        out.push_str(&canonicalize(sc));
    }
    out
}

struct Expander<'a> {
    req: &'a ExpansionRequest,
    memo: HashMap<Scene, Arc<Vec<Scene>>>,
    stats: ExpansionStats,
}

impl Expander<'_> {
    fn succ(&mut self, s: &Scene) -> Arc<Vec<Scene>> {
        if let Some(v) = self.memo.get(s) {
            return Arc::clone(v);
        }
        let (v, st) = successors(s, &self.req.network, &self.req.fixed);
        self.stats.expanded += 1;
        self.stats.pruned += st.rejected;
        let v = Arc::new(v);
        self.memo.insert(s.clone(), Arc::clone(&v));
        v
    }

    /// Successors of a whole layer, computed in parallel and memoized.
    fn succ_layer(&mut self, layer: &[Scene]) {
        let missing: Vec<&Scene> = layer.iter().filter(|s| !self.memo.contains_key(*s)).collect();
        let (network, fixed) = (&self.req.network, &self.req.fixed);
        let computed: Vec<(Scene, Vec<Scene>, SuccessorStats)> = missing
            .par_iter()
            .map(|s| {
                let (v, st) = successors(s, network, fixed);
                ((*s).clone(), v, st)
            })
            .collect();
        for (s, v, st) in computed {
            self.stats.expanded += 1;
            self.stats.pruned += st.rejected;
            self.memo.insert(s, Arc::new(v));
        }
    }
}

pub fn expand(req: &ExpansionRequest, workers: usize) -> Result<ExpansionResult, ReasonerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ReasonerError::ThreadPool(e.to_string()))?;
    pool.install(|| expand_in_pool(req))
}

fn expand_in_pool(req: &ExpansionRequest) -> Result<ExpansionResult, ReasonerError> {
    let start = Instant::now();
    if req.horizon == 0 {
        return Err(ReasonerError::ZeroHorizon);
    }
    let initial_violations = check_scene(&req.initial, &req.vehicles, &req.network);
    if !initial_violations.is_empty() {
        return Err(ReasonerError::InvalidInitial(initial_violations));
    }
    let mut ex = Expander { req, memo: HashMap::new(), stats: ExpansionStats::default() };
    let paths = match req.mode {
        Mode::Exact => exact(&mut ex),
        Mode::Shortest => {
            let goal = req.goal.as_ref().ok_or(ReasonerError::MissingGoal)?;
            shortest(&mut ex, goal)
        }
    };
    let mut scenarios: Vec<(String, Scenario)> = paths
        .into_iter()
        .map(|scenes| {
            let sc = Scenario::new(Arc::clone(&req.vehicles), Arc::clone(&req.network), scenes)
                .expect("generated scenes match the universes");
            (canonicalize(&sc), sc)
        })
        .collect();
    scenarios.sort_by(|a, b| a.0.cmp(&b.0));
    scenarios.dedup_by(|a, b| a.0 == b.0);
    let mut stats = ex.stats;
    stats.wall_time = start.elapsed();
    info!(scenarios = scenarios.len(), expanded = stats.expanded, pruned = stats.pruned, "expansion done");
    Ok(ExpansionResult { scenarios: scenarios.into_iter().map(|(_, s)| s).collect(), stats })
}

fn exact(ex: &mut Expander<'_>) -> Vec<Vec<Scene>> {
    let horizon = ex.req.horizon;
    // Layered reachability first so successor sets are built in parallel.
    let mut layer = vec![ex.req.initial.clone()];
    for depth in 1..horizon {
        ex.succ_layer(&layer);
        let mut next: Vec<Scene> = layer.iter().flat_map(|s| ex.memo[s].iter().cloned()).collect();
        next.sort();
        next.dedup();
        debug!(depth, frontier = next.len(), "exact layer");
        layer = next;
    }
    let mut out = Vec::new();
    let mut path = vec![ex.req.initial.clone()];
    dfs_exact(ex, &mut path, horizon, &mut out);
    out
}

fn dfs_exact(ex: &mut Expander<'_>, path: &mut Vec<Scene>, horizon: usize, out: &mut Vec<Vec<Scene>>) {
    if path.len() == horizon {
        let last = path.last().expect("non-empty path");
        if ex.req.goal.as_ref().map_or(true, |g| g.holds(last)) {
            out.push(path.clone());
        }
        return;
    }
    let succ = ex.succ(path.last().expect("non-empty path"));
    for s in succ.iter() {
        path.push(s.clone());
        dfs_exact(ex, path, horizon, out);
        path.pop();
    }
}

fn shortest(ex: &mut Expander<'_>, goal: &Goal) -> Vec<Vec<Scene>> {
    let horizon = ex.req.horizon;
    let mut dist: HashMap<Scene, usize> = HashMap::new();
    dist.insert(ex.req.initial.clone(), 0);
    let mut layers: Vec<Vec<Scene>> = vec![vec![ex.req.initial.clone()]];
    let mut found = goal.holds(&ex.req.initial);
    while !found && layers.len() < horizon {
        let layer = layers.last().expect("at least one layer").clone();
        ex.succ_layer(&layer);
        let depth = layers.len();
        let mut next = Vec::new();
        for s in &layer {
            for t in ex.memo[s].iter() {
                if !dist.contains_key(t) {
                    dist.insert(t.clone(), depth);
                    next.push(t.clone());
                }
            }
        }
        next.sort();
        debug!(depth, frontier = next.len(), "shortest layer");
        if next.is_empty() {
            break;
        }
        found = next.iter().any(|s| goal.holds(s));
        layers.push(next);
    }
    if !found {
        return Vec::new();
    }
    let last = layers.len() - 1;
    ex.stats.shortest_len = Some(layers.len());
    // Backward pass: scenes from which a goal scene in the last layer is
    // reachable along increasing distance.
    let mut useful: Vec<std::collections::HashSet<Scene>> = vec![Default::default(); layers.len()];
    useful[last] = layers[last].iter().filter(|s| goal.holds(s)).cloned().collect();
    for k in (0..last).rev() {
        let keep: std::collections::HashSet<Scene> = layers[k]
            .iter()
            .filter(|s| ex.memo[*s].iter().any(|t| useful[k + 1].contains(t)))
            .cloned()
            .collect();
        useful[k] = keep;
    }
    let mut out = Vec::new();
    let mut path = vec![ex.req.initial.clone()];
    dfs_shortest(ex, &useful, &mut path, &mut out);
    out
}

fn dfs_shortest(
    ex: &Expander<'_>,
    useful: &[std::collections::HashSet<Scene>],
    path: &mut Vec<Scene>,
    out: &mut Vec<Vec<Scene>>,
) {
    let k = path.len() - 1;
    if k + 1 == useful.len() {
        out.push(path.clone());
        return;
    }
    let succ = Arc::clone(&ex.memo[path.last().expect("non-empty path")]);
    for t in succ.iter().filter(|t| useful[k + 1].contains(*t)) {
        path.push(t.clone());
        dfs_shortest(ex, useful, path, out);
        path.pop();
    }
}
