use thiserror::Error;

use crate::domain::{LonRel, RoadNetwork, Scene};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeriveError {
    #[error("scene has {got} point slots, network has {want} points")]
    PointCountMismatch { got: usize, want: usize },
    #[error("vehicle {vehicle} occupies unknown lane index {lane}")]
    UnknownLane { vehicle: usize, lane: usize },
}

/// Facts derived from one scene and the network.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DerivedFacts {
    /// Per vehicle, the sorted road indices of its occupied lanes.
    pub roads: Vec<Vec<usize>>,
    /// `(c, overlap)` pairs where `c` drives through the overlap in the
    /// direction of its start point.
    pub fwdover: Vec<(usize, usize)>,
    /// `(c, overlap)` pairs where `c` drives through it the other way.
    pub rvsover: Vec<(usize, usize)>,
}

impl DerivedFacts {
    /// The vehicle's road when it occupies lanes of exactly one road.
    pub fn road(&self, c: usize) -> Option<usize> {
        match self.roads[c].as_slice() {
            [r] => Some(*r),
            _ => None,
        }
    }

    pub fn is_fwd(&self, c: usize, o: usize) -> bool {
        self.fwdover.contains(&(c, o))
    }

    pub fn is_rvs(&self, c: usize, o: usize) -> bool {
        self.rvsover.contains(&(c, o))
    }

    /// Overlaps the vehicle is inside of, with `true` for forward.
    pub fn memberships(&self, c: usize) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.fwdover
            .iter()
            .filter(move |(v, _)| *v == c)
            .map(|(_, o)| (*o, true))
            .chain(self.rvsover.iter().filter(move |(v, _)| *v == c).map(|(_, o)| (*o, false)))
    }
}

pub fn derive(scene: &Scene, n: &RoadNetwork) -> Result<DerivedFacts, DeriveError> {
    let ix = n.index();
    if scene.n_points() != ix.points.len() {
        return Err(DeriveError::PointCountMismatch {
            got: scene.n_points(),
            want: ix.points.len(),
        });
    }
    for c in 0..scene.n_vehicles() {
        if let Some(lane) = scene.occ(c).iter().find(|&l| l >= ix.lanes.len()) {
            return Err(DeriveError::UnknownLane { vehicle: c, lane });
        }
    }
    Ok(derive_unchecked(scene, n))
}

pub(crate) fn derive_unchecked(scene: &Scene, n: &RoadNetwork) -> DerivedFacts {
    let ix = n.index();
    let mut d = DerivedFacts::default();
    for c in 0..scene.n_vehicles() {
        let mut rs: Vec<usize> = scene.occ(c).iter().map(|l| ix.lane_road[l]).collect();
        rs.sort_unstable();
        rs.dedup();
        d.roads.push(rs);
    }
    for (o, &(ps, pe)) in ix.overlaps.iter().enumerate() {
        for c in 0..scene.n_vehicles() {
            let carries = scene
                .occ(c)
                .iter()
                .any(|l| ix.lane_has_point(l, ps) && ix.lane_has_point(l, pe));
            if !carries {
                continue;
            }
            match (scene.prel(c, ps), scene.prel(c, pe)) {
                (LonRel::Ahead, LonRel::Behind) => d.fwdover.push((c, o)),
                (LonRel::Behind, LonRel::Ahead) => d.rvsover.push((c, o)),
                _ => {}
            }
        }
    }
    d
}
