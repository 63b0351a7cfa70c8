//! Executable physics and traffic rules over scenes and scene transitions.
//!
//! Every check carries one [`RuleId`]. Besides the catalog rules the module
//! enforces `STEP`: within one transition each vehicle takes part in at most
//! one qualitative event (a change of its occupancy, of one of its point
//! relations, or of one of its related vehicle relations). Changes to or from
//! `None` follow from road or overlap membership and are not events.

mod derive;
mod scene;
mod transition;

use std::fmt;

pub use derive::{derive, DeriveError, DerivedFacts};
pub use scene::check_scene;
pub use transition::check_transition;

use crate::domain::{Scenario, VehicleId};
use crate::domain::RoadNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    PR1,
    PR2,
    PR3,
    PR4,
    PR5,
    PR6,
    PR7,
    PR8,
    PR9,
    PR10,
    PR11,
    PR12,
    PR13,
    PR14Sym,
    PR14Trans,
    PR14Cont,
    TR1,
    TR2,
    Step,
}

impl RuleId {
    pub const ALL: [RuleId; 19] = [
        RuleId::PR1,
        RuleId::PR2,
        RuleId::PR3,
        RuleId::PR4,
        RuleId::PR5,
        RuleId::PR6,
        RuleId::PR7,
        RuleId::PR8,
        RuleId::PR9,
        RuleId::PR10,
        RuleId::PR11,
        RuleId::PR12,
        RuleId::PR13,
        RuleId::PR14Sym,
        RuleId::PR14Trans,
        RuleId::PR14Cont,
        RuleId::TR1,
        RuleId::TR2,
        RuleId::Step,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::PR1 => "PR1",
            RuleId::PR2 => "PR2",
            RuleId::PR3 => "PR3",
            RuleId::PR4 => "PR4",
            RuleId::PR5 => "PR5",
            RuleId::PR6 => "PR6",
            RuleId::PR7 => "PR7",
            RuleId::PR8 => "PR8",
            RuleId::PR9 => "PR9",
            RuleId::PR10 => "PR10",
            RuleId::PR11 => "PR11",
            RuleId::PR12 => "PR12",
            RuleId::PR13 => "PR13",
            RuleId::PR14Sym => "PR14_SYM",
            RuleId::PR14Trans => "PR14_TRANS",
            RuleId::PR14Cont => "PR14_CONT",
            RuleId::TR1 => "TR1",
            RuleId::TR2 => "TR2",
            RuleId::Step => "STEP",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a violation was found: a scene, or the transition `k -> k+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepRef {
    Scene(usize),
    Transition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub rule: RuleId,
    pub step: StepRef,
    /// Ids bound to the falsified formula's quantifiers.
    pub witnesses: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            StepRef::Scene(k) => write!(f, "{} @step {k}", self.rule)?,
            StepRef::Transition(k) => write!(f, "{} @step {k}->{}", self.rule, k + 1)?,
        }
        write!(f, " [{}]", self.witnesses.join(" "))
    }
}

/// One line per violation, sorted lexicographically.
pub fn render_violations(violations: &[Violation]) -> String {
    let mut lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Collects violations, or stops at the first one when only a verdict is
/// needed. Witness lists are built lazily.
pub(crate) struct Reporter<'a> {
    vehicles: &'a [VehicleId],
    network: &'a RoadNetwork,
    step: StepRef,
    first_only: bool,
    found: bool,
    out: Vec<Violation>,
}

pub(crate) enum W {
    V(usize),
    L(usize),
    P(usize),
    R(usize),
}

impl<'a> Reporter<'a> {
    pub(crate) fn new(
        vehicles: &'a [VehicleId],
        network: &'a RoadNetwork,
        step: StepRef,
        first_only: bool,
    ) -> Self {
        Self { vehicles, network, step, first_only, found: false, out: Vec::new() }
    }

    pub(crate) fn done(&self) -> bool {
        self.first_only && self.found
    }

    pub(crate) fn report(&mut self, rule: RuleId, witnesses: &[W]) {
        self.found = true;
        if self.first_only {
            return;
        }
        let ix = self.network.index();
        let witnesses = witnesses
            .iter()
            .map(|w| match *w {
                W::V(c) => self.vehicles[c].to_string(),
                W::L(l) => ix.lanes[l].to_string(),
                W::P(p) => ix.points[p].to_string(),
                W::R(r) => self.network.roads()[r].id.to_string(),
            })
            .collect();
        self.out.push(Violation { rule, step: self.step, witnesses });
    }

    pub(crate) fn found(&self) -> bool {
        self.found
    }

    pub(crate) fn into_violations(mut self) -> Vec<Violation> {
        self.out.sort();
        self.out.dedup();
        self.out
    }
}

/// Every violation of every scene and every consecutive transition.
pub fn check_scenario(sc: &Scenario) -> Vec<Violation> {
    let mut all = Vec::new();
    let scenes = sc.scenes();
    for (k, s) in scenes.iter().enumerate() {
        let mut r = Reporter::new(sc.vehicles(), sc.network(), StepRef::Scene(k), false);
        scene::check_scene_into(s, sc.network(), &mut r);
        all.extend(r.into_violations());
    }
    for k in 0..scenes.len().saturating_sub(1) {
        let mut r = Reporter::new(sc.vehicles(), sc.network(), StepRef::Transition(k), false);
        transition::check_transition_into(&scenes[k], &scenes[k + 1], sc.network(), &mut r);
        all.extend(r.into_violations());
    }
    all.sort();
    all
}

/// True when the scene violates no per-scene rule.
pub fn scene_ok(scene: &crate::domain::Scene, n: &RoadNetwork) -> bool {
    let mut r = Reporter::new(&[], n, StepRef::Scene(0), true);
    scene::check_scene_into(scene, n, &mut r);
    !r.found()
}

/// True when the transition violates no transition rule.
pub fn transition_ok(prev: &crate::domain::Scene, next: &crate::domain::Scene, n: &RoadNetwork) -> bool {
    let mut r = Reporter::new(&[], n, StepRef::Transition(0), true);
    transition::check_transition_into(prev, next, n, &mut r);
    !r.found()
}
