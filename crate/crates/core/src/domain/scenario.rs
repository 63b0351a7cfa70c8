use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::ids::VehicleId;
use super::network::RoadNetwork;
use super::scene::Scene;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("a scenario needs at least one scene")]
    Empty,
    #[error("duplicate vehicle `{0}`")]
    DuplicateVehicle(VehicleId),
    #[error("scene {step} has dimensions for {vehicles} vehicles and {points} points")]
    Dimensions { step: usize, vehicles: usize, points: usize },
    #[error("scene {step} references lane index {lane} outside the network")]
    UnknownLane { step: usize, lane: usize },
    #[error("tail index {index} out of range for a scenario of length {len}")]
    TailOutOfRange { index: usize, len: usize },
}

/// A finite sequence of scenes over a fixed vehicle universe and network.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    vehicles: Arc<Vec<VehicleId>>,
    network: Arc<RoadNetwork>,
    scenes: Vec<Scene>,
}

impl Scenario {
    pub fn new(
        vehicles: Arc<Vec<VehicleId>>,
        network: Arc<RoadNetwork>,
        scenes: Vec<Scene>,
    ) -> Result<Self, ScenarioError> {
        if scenes.is_empty() {
            return Err(ScenarioError::Empty);
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in vehicles.iter() {
            if !seen.insert(v) {
                return Err(ScenarioError::DuplicateVehicle(v.clone()));
            }
        }
        let lanes = network.lane_count();
        for (step, scene) in scenes.iter().enumerate() {
            if scene.n_vehicles() != vehicles.len() || scene.n_points() != network.point_count() {
                return Err(ScenarioError::Dimensions {
                    step,
                    vehicles: scene.n_vehicles(),
                    points: scene.n_points(),
                });
            }
            for c in 0..scene.n_vehicles() {
                if let Some(lane) = scene.occ(c).iter().find(|&l| l >= lanes) {
                    return Err(ScenarioError::UnknownLane { step, lane });
                }
            }
        }
        Ok(Self { vehicles, network, scenes })
    }

    pub fn vehicles(&self) -> &[VehicleId] {
        &self.vehicles
    }

    pub fn vehicles_arc(&self) -> &Arc<Vec<VehicleId>> {
        &self.vehicles
    }

    pub fn network(&self) -> &RoadNetwork {
        &self.network
    }

    pub fn network_arc(&self) -> &Arc<RoadNetwork> {
        &self.network
    }

    pub fn scenes(&self) -> &[Scene] {
        &self.scenes
    }

    pub fn horizon(&self) -> usize {
        self.scenes.len()
    }

    pub fn vehicle_index(&self) -> HashMap<&VehicleId, usize> {
        self.vehicles.iter().enumerate().map(|(i, v)| (v, i)).collect()
    }

    /// Scenes `i..T` as a scenario of length `T - i`, sharing the universes.
    pub fn tail(&self, i: usize) -> Result<Scenario, ScenarioError> {
        if i >= self.scenes.len() {
            return Err(ScenarioError::TailOutOfRange { index: i, len: self.scenes.len() });
        }
        Ok(Scenario {
            vehicles: Arc::clone(&self.vehicles),
            network: Arc::clone(&self.network),
            scenes: self.scenes[i..].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LaneId, LaneSet, Road, RoadId};
    use proptest::prelude::*;

    fn scenario(t: usize) -> Scenario {
        let net = RoadNetwork::highway(Road::new(
            RoadId::new("r").unwrap(),
            vec![LaneId::new("l1").unwrap(), LaneId::new("l2").unwrap()],
        ));
        let scenes = (0..t)
            .map(|k| {
                let mut s = Scene::new(1, 0);
                s.set_occ(0, LaneSet::single(k % 2));
                s
            })
            .collect();
        Scenario::new(Arc::new(vec![VehicleId::new("c").unwrap()]), Arc::new(net), scenes).unwrap()
    }

    #[test]
    fn tail_examples() {
        let sc = scenario(3);
        assert_eq!(sc.tail(0).unwrap(), sc);
        let last = sc.tail(2).unwrap();
        assert_eq!(last.horizon(), 1);
        assert_eq!(last.scenes()[0], sc.scenes()[2]);
        assert!(matches!(scenario(1).tail(1), Err(ScenarioError::TailOutOfRange { .. })));
    }

    #[test]
    fn rejects_bad_scenes() {
        let sc = scenario(1);
        let mut bad = sc.scenes()[0].clone();
        bad.set_occ(0, LaneSet::single(7));
        let err = Scenario::new(sc.vehicles_arc().clone(), sc.network_arc().clone(), vec![bad]);
        assert!(matches!(err, Err(ScenarioError::UnknownLane { .. })));
        let err = Scenario::new(sc.vehicles_arc().clone(), sc.network_arc().clone(), vec![]);
        assert_eq!(err, Err(ScenarioError::Empty));
    }

    proptest! {
        #[test]
        fn tail_composes(t in 1usize..8, i in 0usize..8, j in 0usize..8) {
            let sc = scenario(t);
            if i + j < t {
                prop_assert_eq!(sc.tail(i).unwrap().tail(j).unwrap(), sc.tail(i + j).unwrap());
            }
        }
    }
}
