use std::path::PathBuf;
use std::sync::Arc;

use tsl_core::domain::{LaneId, LaneSet, LonRel, Road, RoadId, RoadNetwork, Scene, Scenario, VehicleId};
use tsl_core::osc::{emit_osc, OscError};
use tsl_core::reasoner::{expand, parse_request};

fn first_scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    let req = parse_request(&std::fs::read_to_string(path).unwrap()).unwrap();
    expand(&req, 1).unwrap().scenarios.remove(0)
}

/// Compares against the frozen file; `BLESS=1` rewrites it.
fn golden(name: &str, text: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, text).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_default();
    assert_eq!(text, want, "{name} drifted (rerun with BLESS=1 after review)");
}

#[test]
fn goldens() {
    for ex in ["example1", "example2", "example5"] {
        let sc = first_scenario(&format!("{ex}.req"));
        let doc = emit_osc(&sc, None).unwrap();
        assert_eq!(doc.blocks, sc.horizon());
        assert_eq!(doc.text.matches("parallel:").count(), sc.horizon());
        assert_eq!(doc.text.matches("do serial:").count(), 1);
        golden(&format!("{ex}.osc"), &doc.text);
        assert_eq!(emit_osc(&sc, None).unwrap().text, doc.text);
    }
}

fn one_lane() -> Arc<RoadNetwork> {
    Arc::new(RoadNetwork::highway(Road::new(RoadId::new("r1").unwrap(), vec![LaneId::new("l1").unwrap()])))
}

fn cars(n: usize) -> Arc<Vec<VehicleId>> {
    Arc::new((1..=n).map(|i| VehicleId::new(format!("c{i}")).unwrap()).collect())
}

#[test]
fn minimal_skeleton() {
    let mut s = Scene::new(1, 0);
    s.set_occ(0, LaneSet::single(0));
    let sc = Scenario::new(cars(1), one_lane(), vec![s]).unwrap();
    let doc = emit_osc(&sc, None).unwrap();
    assert_eq!(doc.blocks, 1);
    assert_eq!(doc.text.matches(".drive()").count(), 1);
    assert_eq!(doc.text.matches("lateral(").count(), 1);
    assert_eq!(doc.text.matches("position(").count(), 0);
    assert!(doc.positions.is_empty());
}

#[test]
fn intersection_point_declared_once() {
    let sc = first_scenario("example2.req");
    let doc = emit_osc(&sc, None).unwrap();
    assert_eq!(doc.positions.len(), 1);
    let name = doc.positions.values().next().unwrap();
    assert_eq!(doc.text.matches(&format!("{name}: position_3d")).count(), 1);
    for v in ["c1", "c2"] {
        let block = doc.text.split(&format!("{v}.drive()")).nth(1).unwrap();
        let block = block.split(".drive()").next().unwrap();
        assert!(block.contains(&format!(": {name})")), "{v} does not reference {name}");
    }
}

#[test]
fn coordinates_are_used_when_given() {
    let sc = first_scenario("example2.req");
    let p = sc.network().points().keys().next().unwrap().clone();
    let coords = [(p, (1.0, -2.5, 0.0))].into_iter().collect();
    let doc = emit_osc(&sc, Some(&coords)).unwrap();
    assert!(doc.text.contains("position_3d(x: 1.000m, y: -2.500m, z: 0.000m)"));
}

#[test]
fn rejects_empty_occupancy_and_invalid_scenarios() {
    let sc = Scenario::new(cars(1), one_lane(), vec![Scene::new(1, 0)]).unwrap();
    assert!(matches!(emit_osc(&sc, None), Err(OscError::NoLane { .. })));

    // two cars on one lane without a relation between them
    let mut s = Scene::new(2, 0);
    s.set_occ(0, LaneSet::single(0));
    s.set_occ(1, LaneSet::single(0));
    s.set_vrel(0, 1, LonRel::None);
    let sc = Scenario::new(cars(2), one_lane(), vec![s]).unwrap();
    assert!(matches!(emit_osc(&sc, None), Err(OscError::Invalid(v)) if !v.is_empty()));
}
