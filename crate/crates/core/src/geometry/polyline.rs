use thiserror::Error;

use super::Point2;

#[derive(Debug, Error, PartialEq)]
pub enum InvalidPolyline {
    #[error("polyline needs at least two points")]
    TooShort,
    #[error("polyline arclength must strictly increase (vertex {0})")]
    Degenerate(usize),
}

/// `s` along a polyline and signed lateral offset `d`, positive on the left.
/// Points beyond an end clamp `s` and measure `d` from the end segment's line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetPose {
    pub s: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pts: Vec<Point2>,
    s: Vec<f64>,
    /// Unit left normal per vertex, radial for vertices on a common circle.
    normals: Vec<Point2>,
}

impl Polyline {
    pub fn new(pts: Vec<Point2>) -> Result<Self, InvalidPolyline> {
        if pts.len() < 2 {
            return Err(InvalidPolyline::TooShort);
        }
        let mut s = Vec::with_capacity(pts.len());
        s.push(0.0);
        for i in 1..pts.len() {
            let seg = dist(pts[i - 1], pts[i]);
            if !(seg > 0.0) {
                return Err(InvalidPolyline::Degenerate(i));
            }
            s.push(s[i - 1] + seg);
        }
        let normals = (0..pts.len()).map(|i| vertex_normal(&pts, i)).collect();
        Ok(Self { pts, s, normals })
    }

    pub fn points(&self) -> &[Point2] {
        &self.pts
    }

    pub fn arclengths(&self) -> &[f64] {
        &self.s
    }

    pub fn length(&self) -> f64 {
        *self.s.last().expect("non-empty")
    }

    fn segment_at(&self, s: f64) -> usize {
        match self.s.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(i) => i.min(self.pts.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.pts.len() - 2),
        }
    }

    /// Point at arclength `s`, clamped to the ends.
    pub fn point_at(&self, s: f64) -> Point2 {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_at(s);
        let t = (s - self.s[i]) / (self.s[i + 1] - self.s[i]);
        lerp(self.pts[i], self.pts[i + 1], t)
    }

    /// Travel heading at arclength `s`.
    pub fn heading_at(&self, s: f64) -> f64 {
        let i = self.segment_at(s.clamp(0.0, self.length()));
        let (a, b) = (self.pts[i], self.pts[i + 1]);
        (b.1 - a.1).atan2(b.0 - a.0)
    }

    /// Closest projection; ties go to the smallest `s`.
    pub fn project(&self, p: Point2) -> FrenetPose {
        let mut best: Option<(f64, usize, f64)> = None;
        for i in 0..self.pts.len() - 1 {
            let (a, b) = (self.pts[i], self.pts[i + 1]);
            let (vx, vy) = (b.0 - a.0, b.1 - a.1);
            let len2 = vx * vx + vy * vy;
            let t = (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0);
            let q = lerp(a, b, t);
            let dist2 = (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
            if best.map_or(true, |(bd, _, _)| dist2 < bd - 1e-18) {
                best = Some((dist2, i, t));
            }
        }
        let (_, i, t) = best.expect("at least one segment");
        let last = self.pts.len() - 2;
        let at_end = (i == 0 && t == 0.0) || (i == last && t == 1.0);
        if !at_end {
            // the foot along the normals may sit on a neighbouring segment
            for j in [Some(i), i.checked_sub(1), (i < last).then_some(i + 1)].into_iter().flatten() {
                let hint = if j < i { 1.0 } else if j > i { 0.0 } else { t };
                if let Some((tr, d)) = self.refine(j, p, hint) {
                    return FrenetPose { s: self.s[j] + tr * (self.s[j + 1] - self.s[j]), d };
                }
            }
        }
        // lateral offset from the segment's line; zero beyond the ends when
        // the point lies on the extension
        let (a, b) = (self.pts[i], self.pts[i + 1]);
        let len = dist(a, b);
        let d = cross((b.0 - a.0, b.1 - a.1), (p.0 - a.0, p.1 - a.1)) / len;
        FrenetPose { s: self.s[i] + t * len, d }
    }

    /// Foot point on segment `i` along the interpolated vertex normals, which
    /// makes projections onto sampled circles exact up to the sagitta.
    /// Returns the fraction along the segment and the signed offset.
    fn refine(&self, i: usize, p: Point2, t_chord: f64) -> Option<(f64, f64)> {
        let a = self.pts[i];
        let v = (self.pts[i + 1].0 - a.0, self.pts[i + 1].1 - a.1);
        let n0 = self.normals[i];
        let m = (self.normals[i + 1].0 - n0.0, self.normals[i + 1].1 - n0.1);
        let w0 = (p.0 - a.0, p.1 - a.1);
        // cross(w0 - t v, n0 + t m) = 0
        let c0 = cross(w0, n0);
        let c1 = cross(w0, m) - cross(v, n0);
        let c2 = -cross(v, m);
        let roots: Vec<f64> = if c2.abs() < 1e-15 * c1.abs().max(1.0) {
            if c1 == 0.0 {
                return None;
            }
            vec![-c0 / c1]
        } else {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc < 0.0 {
                return None;
            }
            // numerically stable pair
            let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
            let mut r = vec![q / c2];
            if q != 0.0 {
                r.push(c0 / q);
            }
            r
        };
        let t = roots
            .into_iter()
            .filter(|t| (-1e-9..=1.0 + 1e-9).contains(t))
            .min_by(|x, y| (x - t_chord).abs().total_cmp(&(y - t_chord).abs()))?
            .clamp(0.0, 1.0);
        let q = (a.0 + t * v.0, a.1 + t * v.1);
        let n = (n0.0 + t * m.0, n0.1 + t * m.1);
        let off = (p.0 - q.0, p.1 - q.1);
        let d = off.0.hypot(off.1);
        Some((t, if off.0 * n.0 + off.1 * n.1 < 0.0 { -d } else { d }))
    }
}

fn cross(a: Point2, b: Point2) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn left_normal(a: Point2, b: Point2) -> Point2 {
    let l = dist(a, b);
    (-(b.1 - a.1) / l, (b.0 - a.0) / l)
}

fn vertex_normal(pts: &[Point2], i: usize) -> Point2 {
    if i == 0 {
        return left_normal(pts[0], pts[1]);
    }
    if i == pts.len() - 1 {
        return left_normal(pts[i - 1], pts[i]);
    }
    let (a, b, c) = (pts[i - 1], pts[i], pts[i + 1]);
    let (n1, n2) = (left_normal(a, b), left_normal(b, c));
    let avg = (n1.0 + n2.0, n1.1 + n2.1);
    let u = (a.0 - b.0, a.1 - b.1);
    let w = (c.0 - b.0, c.1 - b.1);
    let den = 2.0 * cross(u, w);
    if den.abs() < 1e-12 * dist(a, b) * dist(b, c) {
        let l = avg.0.hypot(avg.1);
        return (avg.0 / l, avg.1 / l);
    }
    // circumcentre of a, b, c relative to b
    let (uu, ww) = (u.0 * u.0 + u.1 * u.1, w.0 * w.0 + w.1 * w.1);
    let o = ((w.1 * uu - u.1 * ww) / den, (u.0 * ww - w.0 * uu) / den);
    let l = o.0.hypot(o.1);
    let r = (o.0 / l, o.1 / l);
    // orient to the left of travel
    if r.0 * avg.0 + r.1 * avg.1 < 0.0 {
        (-r.0, -r.1)
    } else {
        r
    }
}

fn dist(a: Point2, b: Point2) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

fn lerp(a: Point2, b: Point2, t: f64) -> Point2 {
    (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)
}

/// Crossing of segments `a0-a1` and `b0-b1` as fractions `(t, u)` along each.
pub fn segment_crossing(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> Option<(f64, f64)> {
    let r = (a1.0 - a0.0, a1.1 - a0.1);
    let q = (b1.0 - b0.0, b1.1 - b0.1);
    let denom = r.0 * q.1 - r.1 * q.0;
    if denom.abs() < 1e-12 {
        return None;
    }
    let w = (b0.0 - a0.0, b0.1 - a0.1);
    let t = (w.0 * q.1 - w.1 * q.0) / denom;
    let u = (w.0 * r.1 - w.1 * r.0) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some((t, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line() -> Polyline {
        Polyline::new(vec![(0.0, 0.0), (10.0, 0.0)]).unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(line().project((3.0, 2.0)), FrenetPose { s: 3.0, d: 2.0 });
        assert_eq!(line().project((3.0, -2.0)), FrenetPose { s: 3.0, d: -2.0 });
        let end = line().project((12.0, 0.0));
        assert_eq!((end.s, end.d.abs()), (10.0, 0.0));
    }

    #[test]
    fn rejects_degenerate() {
        assert_eq!(Polyline::new(vec![(0.0, 0.0)]), Err(InvalidPolyline::TooShort));
        assert_eq!(Polyline::new(vec![(0.0, 0.0), (0.0, 0.0)]), Err(InvalidPolyline::Degenerate(1)));
    }

    #[test]
    fn crossing() {
        let c = segment_crossing((0.0, 0.0), (2.0, 0.0), (1.0, -1.0), (1.0, 1.0)).unwrap();
        assert!((c.0 - 0.5).abs() < 1e-12 && (c.1 - 0.5).abs() < 1e-12);
        assert!(segment_crossing((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)).is_none());
    }

    proptest! {
        #[test]
        fn points_on_the_line_project_onto_themselves(
            raw in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..8),
            frac in 0.0f64..1.0,
        ) {
            let mut pts: Vec<Point2> = Vec::new();
            for p in raw {
                if pts.last().map_or(true, |q: &Point2| dist(*q, p) > 0.5) {
                    pts.push(p);
                }
            }
            prop_assume!(pts.len() >= 2);
            let pl = Polyline::new(pts).unwrap();
            let s = frac * pl.length();
            let q = pl.point_at(s);
            let f = pl.project(q);
            prop_assert!(f.d.abs() < 1e-9);
            // A self-intersecting polyline may have an earlier equidistant
            // projection; the point found must coincide.
            let back = pl.point_at(f.s);
            prop_assert!(dist(back, q) < 1e-9);
            prop_assert!(f.s <= s + 1e-9);
        }
    }
}
