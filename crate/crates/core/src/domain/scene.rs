use super::relation::LonRel;

/// Sorted set of lane indices occupied by one vehicle.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaneSet(Vec<u32>);

impl LaneSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn single(lane: usize) -> Self {
        Self(vec![lane as u32])
    }

    pub fn from_lanes(lanes: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<u32> = lanes.into_iter().map(|l| l as u32).collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn insert(&mut self, lane: usize) {
        if let Err(pos) = self.0.binary_search(&(lane as u32)) {
            self.0.insert(pos, lane as u32);
        }
    }

    pub fn remove(&mut self, lane: usize) {
        if let Ok(pos) = self.0.binary_search(&(lane as u32)) {
            self.0.remove(pos);
        }
    }

    pub fn contains(&self, lane: usize) -> bool {
        self.0.binary_search(&(lane as u32)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    /// Number of lanes in exactly one of the two sets.
    pub fn symmetric_difference_len(&self, other: &LaneSet) -> usize {
        let common = self.iter().filter(|l| other.contains(*l)).count();
        self.len() + other.len() - 2 * common
    }

    pub fn intersects(&self, other: &LaneSet) -> bool {
        self.iter().any(|l| other.contains(l))
    }
}

/// One time step: lane occupancy, vehicle-vehicle relations, vehicle-point
/// relations and overlap relations, all over dense indices of a scenario's
/// vehicle universe and its network's lanes and points.
///
/// Vehicle pair relations keep both orientations. [`Scene::set_vrel`] and
/// [`Scene::set_orel`] write both; the `_raw` setters write one so that
/// inconsistent input can be represented and checked.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scene {
    n_vehicles: usize,
    n_points: usize,
    occ: Vec<LaneSet>,
    vrel: Vec<LonRel>,
    prel: Vec<LonRel>,
    orel: Vec<LonRel>,
}

impl Scene {
    /// Empty occupancy and every relation `None`.
    pub fn new(n_vehicles: usize, n_points: usize) -> Self {
        Self {
            n_vehicles,
            n_points,
            occ: vec![LaneSet::new(); n_vehicles],
            vrel: vec![LonRel::None; n_vehicles * n_vehicles],
            prel: vec![LonRel::None; n_vehicles * n_points],
            orel: vec![LonRel::None; n_vehicles * n_vehicles],
        }
    }

    pub fn n_vehicles(&self) -> usize {
        self.n_vehicles
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn occ(&self, c: usize) -> &LaneSet {
        &self.occ[c]
    }

    pub fn occ_mut(&mut self, c: usize) -> &mut LaneSet {
        &mut self.occ[c]
    }

    pub fn set_occ(&mut self, c: usize, lanes: LaneSet) {
        self.occ[c] = lanes;
    }

    pub fn vrel(&self, a: usize, b: usize) -> LonRel {
        self.vrel[a * self.n_vehicles + b]
    }

    pub fn set_vrel(&mut self, a: usize, b: usize, d: LonRel) {
        self.vrel[a * self.n_vehicles + b] = d;
        self.vrel[b * self.n_vehicles + a] = d.invert();
    }

    pub fn set_vrel_raw(&mut self, a: usize, b: usize, d: LonRel) {
        self.vrel[a * self.n_vehicles + b] = d;
    }

    pub fn prel(&self, c: usize, p: usize) -> LonRel {
        self.prel[c * self.n_points + p]
    }

    pub fn set_prel(&mut self, c: usize, p: usize, d: LonRel) {
        self.prel[c * self.n_points + p] = d;
    }

    pub fn orel(&self, a: usize, b: usize) -> LonRel {
        self.orel[a * self.n_vehicles + b]
    }

    pub fn set_orel(&mut self, a: usize, b: usize, d: LonRel) {
        self.orel[a * self.n_vehicles + b] = d;
        self.orel[b * self.n_vehicles + a] = d.invert();
    }

    pub fn set_orel_raw(&mut self, a: usize, b: usize, d: LonRel) {
        self.orel[a * self.n_vehicles + b] = d;
    }

    /// Distinct ordered vehicle pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n_vehicles;
        (0..n).flat_map(move |a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
    }
}
