//! Rendering of scenarios as OpenSCENARIO DSL text.
//!
//! Vehicle-to-vehicle and vehicle-to-point relations become `position`
//! modifiers with symbolic distances, occupied lanes become `lateral`
//! modifiers. Opposite-direction relations have no counterpart and are left
//! out.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::domain::{LonRel, PointId, Scenario};
use crate::rules::{check_scenario, render_violations, Violation};

#[derive(Debug, Error)]
pub enum OscError {
    #[error("scenario violates the rules:\n{}", render_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("vehicle {vehicle} occupies no lane in scene {scene}")]
    NoLane { vehicle: String, scene: usize },
}

/// A rendered document together with its point declarations.
#[derive(Clone, Debug, PartialEq)]
pub struct OscDocument {
    pub text: String,
    /// point → declared `position_3d` name
    pub positions: BTreeMap<PointId, String>,
    pub blocks: usize,
}

const IND: &str = "    ";

fn phrase(rel: LonRel) -> Option<&'static str> {
    match rel {
        LonRel::Ahead => Some("ahead_of"),
        LonRel::Behind => Some("behind"),
        LonRel::Cover => Some("same_as"),
        LonRel::None => None,
    }
}

/// Emits the scenario. Without coordinates the points are declared without
/// an initializer.
pub fn emit_osc(
    sc: &Scenario,
    coords: Option<&BTreeMap<PointId, (f64, f64, f64)>>,
) -> Result<OscDocument, OscError> {
    for (k, scene) in sc.scenes().iter().enumerate() {
        if let Some(c) = (0..sc.vehicles().len()).find(|&c| scene.occ(c).is_empty()) {
            return Err(OscError::NoLane { vehicle: sc.vehicles()[c].as_str().to_string(), scene: k });
        }
    }
    let violations = check_scenario(sc);
    if !violations.is_empty() {
        return Err(OscError::Invalid(violations));
    }
    let n = sc.network();
    let ix = n.index();
    let vehicles = sc.vehicles();

    let mut out = String::from("scenario tsl_scenario:\n");
    let mut positions = BTreeMap::new();
    for p in n.points().keys() {
        let name = p.as_str().to_string();
        match coords.and_then(|c| c.get(p)) {
            Some((x, y, z)) => {
                let _ = writeln!(out, "{IND}{name}: position_3d = position_3d(x: {x:.3}m, y: {y:.3}m, z: {z:.3}m)");
            }
            None => {
                let _ = writeln!(out, "{IND}{name}: position_3d");
            }
        }
        positions.insert(p.clone(), name);
    }
    for v in vehicles {
        let _ = writeln!(out, "{IND}{}: vehicle", v.as_str());
    }
    out.push('\n');
    let _ = writeln!(out, "{IND}do serial:");
    for (k, scene) in sc.scenes().iter().enumerate() {
        let _ = writeln!(out, "{IND}{IND}scene{}: parallel:", k + 1);
        for (c, v) in vehicles.iter().enumerate() {
            let _ = writeln!(out, "{IND}{IND}{IND}{}.drive() with:", v.as_str());
            let body = format!("{IND}{IND}{IND}{IND}");
            for l in scene.occ(c).iter() {
                let _ = writeln!(out, "{body}lateral(lane: {})", ix.lanes[l].as_str());
            }
            for o in c + 1..vehicles.len() {
                if let Some(ph) = phrase(scene.vrel(c, o)) {
                    let _ = writeln!(out, "{body}position({ph}: {})", vehicles[o].as_str());
                }
            }
            for (p, name) in ix.points.iter().enumerate() {
                if let Some(ph) = phrase(scene.prel(c, p)) {
                    let _ = writeln!(out, "{body}position({ph}: {})", positions[name]);
                }
            }
        }
    }
    Ok(OscDocument { text: out, positions, blocks: sc.scenes().len() })
}
