use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    Line,
    Arc { curvature: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum InvalidSegment {
    #[error("segment length must be positive, got {0}")]
    Length(f64),
    #[error("arc curvature must be non-zero")]
    ZeroCurvature,
}

/// Position and heading on a reference line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// One `planView/geometry` element.
#[derive(Debug, Clone, PartialEq)]
pub struct RefLineSegment {
    pub kind: SegmentKind,
    /// Road arclength at the segment start.
    pub s0: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub length: f64,
}

impl RefLineSegment {
    pub fn new(kind: SegmentKind, s0: f64, x: f64, y: f64, heading: f64, length: f64) -> Result<Self, InvalidSegment> {
        if !(length > 0.0) {
            return Err(InvalidSegment::Length(length));
        }
        if matches!(kind, SegmentKind::Arc { curvature } if curvature == 0.0) {
            return Err(InvalidSegment::ZeroCurvature);
        }
        Ok(Self { kind, s0, x, y, heading, length })
    }

    /// Pose at `ds` meters from the segment start (exact circle for arcs).
    pub fn eval(&self, ds: f64) -> Pose {
        match self.kind {
            SegmentKind::Line => Pose {
                x: self.x + ds * self.heading.cos(),
                y: self.y + ds * self.heading.sin(),
                heading: self.heading,
            },
            SegmentKind::Arc { curvature: k } => {
                let h = self.heading + k * ds;
                Pose {
                    x: self.x + (h.sin() - self.heading.sin()) / k,
                    y: self.y - (h.cos() - self.heading.cos()) / k,
                    heading: h,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_endpoint_matches_circle() {
        let k = 0.01;
        let seg = RefLineSegment::new(SegmentKind::Arc { curvature: k }, 0.0, 0.0, 0.0, 0.0, 10.0).unwrap();
        let p = seg.eval(10.0);
        // Circle centered at (0, 1/k), starting at the origin heading east.
        let theta = 10.0 * k;
        assert!((p.x - theta.sin() / k).abs() < 1e-9);
        assert!((p.y - (1.0 - theta.cos()) / k).abs() < 1e-9);
        assert!((p.heading - theta).abs() < 1e-12);
    }

    #[test]
    fn quarter_circle_right_turn() {
        let r = 8.25;
        let len = std::f64::consts::FRAC_PI_2 * r;
        let seg = RefLineSegment::new(SegmentKind::Arc { curvature: -1.0 / r }, 0.0, 0.0, 0.0, 0.0, len).unwrap();
        let p = seg.eval(len);
        assert!((p.x - r).abs() < 1e-9 && (p.y + r).abs() < 1e-9);
    }

    #[test]
    fn rejects_degenerate_segments() {
        assert!(RefLineSegment::new(SegmentKind::Line, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(RefLineSegment::new(SegmentKind::Arc { curvature: 0.0 }, 0.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }
}
