//! Random, collision-free, kinematically smooth traces on the highway and
//! overtake fixtures.

use rand::Rng;
use tsl_core::domain::LaneId;
use tsl_core::map::CompiledMap;

const LEN: f64 = 4.5;
const HZ: f64 = 10.0;
const DURATION: f64 = 8.0;
const LANE_Y: [f64; 2] = [-1.75, -5.25];

#[derive(Clone, Copy, Debug)]
pub enum Layout {
    /// two same-direction lanes
    Highway,
    /// highway plus an oncoming lane that swerves over the left lane
    Overtake,
}

struct Pose {
    x: f64,
    y: f64,
    heading: f64,
    /// +1 for traffic along road 1, −1 for the oncoming road
    dir: f64,
}

type Motion = Box<dyn Fn(f64) -> Pose>;

fn highway_vehicle<R: Rng>(rng: &mut R) -> Motion {
    let x0 = rng.gen_range(5.0..60.0);
    let v = rng.gen_range(5.0..15.0);
    let from = rng.gen_range(0..2usize);
    let to = if rng.gen_bool(0.5) { 1 - from } else { from };
    let t0 = rng.gen_range(0.0..DURATION - 3.0);
    let dur = rng.gen_range(2.0..4.0);
    let (y0, y1) = (LANE_Y[from], LANE_Y[to]);
    Box::new(move |t| {
        let u = ((t - t0) / dur).clamp(0.0, 1.0);
        let y = y0 + (y1 - y0) * (1.0 - (std::f64::consts::PI * u).cos()) / 2.0;
        let dy = if (0.0..1.0).contains(&u) {
            (y1 - y0) * std::f64::consts::PI * (std::f64::consts::PI * u).sin() / (2.0 * dur)
        } else {
            0.0
        };
        Pose { x: x0 + v * t, y, heading: dy.atan2(v), dir: 1.0 }
    })
}

fn oncoming_vehicle<R: Rng>(rng: &mut R, map: &CompiledMap) -> Motion {
    let line = map.lane(&LaneId::new("l2_m1").unwrap()).expect("oncoming lane").centerline.clone();
    let s0 = rng.gen_range(5.0..40.0);
    let v = rng.gen_range(5.0..12.0);
    Box::new(move |t| {
        let s = s0 + v * t;
        let (x, y) = line.point_at(s);
        Pose { x, y, heading: line.heading_at(s), dir: -1.0 }
    })
}

fn collides(a: &Pose, b: &Pose) -> bool {
    // anything that might put two bodies on one lane at the same station
    (a.y - b.y).abs() < 3.6 && (a.x - b.x).abs() < LEN + 1.0 && (a.dir == b.dir || (a.x - b.x).abs() < LEN + 3.0)
}

/// A trace CSV with 2–3 vehicles (plus one oncoming vehicle on the overtake
/// layout), sampled at 10 Hz. Candidates with conflicting bodies are redrawn.
pub fn random_trace<R: Rng>(rng: &mut R, layout: Layout, map: &CompiledMap) -> String {
    loop {
        let n = rng.gen_range(2..=3);
        let mut motions: Vec<Motion> = (0..n).map(|_| highway_vehicle(rng)).collect();
        if let Layout::Overtake = layout {
            motions.push(oncoming_vehicle(rng, map));
        }
        let steps = (DURATION * HZ) as usize;
        let mut ok = true;
        let mut out = String::from("t,vehicle,x,y,heading,length\n");
        'time: for k in 0..=steps {
            let t = k as f64 / HZ;
            let poses: Vec<Pose> = motions.iter().map(|m| m(t)).collect();
            for a in 0..poses.len() {
                for b in a + 1..poses.len() {
                    if collides(&poses[a], &poses[b]) {
                        ok = false;
                        break 'time;
                    }
                }
            }
            for (i, p) in poses.iter().enumerate() {
                out.push_str(&format!("{t:.1},c{},{:.4},{:.4},{:.6},{LEN}\n", i + 1, p.x, p.y, p.heading));
            }
        }
        if ok {
            return out;
        }
    }
}
