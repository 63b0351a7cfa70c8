use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Qualitative longitudinal relationship between two vehicles, or between a
/// vehicle and a point. `None` means the pair is unrelated (different roads,
/// point not on the vehicle's road, or not sharing an overlap segment).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LonRel {
    Ahead,
    Cover,
    Behind,
    None,
}

impl LonRel {
    pub const ALL: [LonRel; 4] = [LonRel::Ahead, LonRel::Cover, LonRel::Behind, LonRel::None];
    pub const RELATED: [LonRel; 3] = [LonRel::Ahead, LonRel::Cover, LonRel::Behind];

    /// The same relationship seen from the other side of the pair.
    pub fn invert(self) -> LonRel {
        match self {
            LonRel::Ahead => LonRel::Behind,
            LonRel::Behind => LonRel::Ahead,
            other => other,
        }
    }

    pub fn is_none(self) -> bool {
        self == LonRel::None
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LonRel::Ahead => "ahead",
            LonRel::Cover => "cover",
            LonRel::Behind => "behind",
            LonRel::None => "none",
        }
    }
}

impl fmt::Display for LonRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown relation `{0}`")]
pub struct UnknownRelation(pub String);

impl FromStr for LonRel {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ahead" => Ok(LonRel::Ahead),
            "cover" => Ok(LonRel::Cover),
            "behind" => Ok(LonRel::Behind),
            "none" => Ok(LonRel::None),
            other => Err(UnknownRelation(other.to_string())),
        }
    }
}

/// Occupied interval `[s_rear, s_front]` along a road's S axis, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SRange {
    s_rear: f64,
    s_front: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid range: rear {rear} is beyond front {front}")]
pub struct InvalidRange {
    pub rear: f64,
    pub front: f64,
}

impl SRange {
    pub fn new(s_rear: f64, s_front: f64) -> Result<Self, InvalidRange> {
        if s_rear <= s_front {
            Ok(Self { s_rear, s_front })
        } else {
            Err(InvalidRange { rear: s_rear, front: s_front })
        }
    }

    /// Zero-length range used for points.
    pub fn point(s: f64) -> Self {
        Self { s_rear: s, s_front: s }
    }

    pub fn rear(&self) -> f64 {
        self.s_rear
    }

    pub fn front(&self) -> f64 {
        self.s_front
    }
}

/// Classifies `a` relative to `b`. Boundary contact counts as `Cover`.
/// When the S axis runs against the vehicles' travel direction the result is
/// mirrored, so `Ahead` always means "further along the direction of travel".
pub fn lon_rel_of_ranges(a: SRange, b: SRange, axis_aligned_with_vehicles: bool) -> LonRel {
    let rel = if a.s_rear > b.s_front {
        LonRel::Ahead
    } else if a.s_front < b.s_rear {
        LonRel::Behind
    } else {
        LonRel::Cover
    };
    if axis_aligned_with_vehicles {
        rel
    } else {
        rel.invert()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: f64, b: f64) -> SRange {
        SRange::new(a, b).unwrap()
    }

    #[test]
    fn range_examples() {
        assert_eq!(lon_rel_of_ranges(r(6.0, 10.0), r(0.0, 4.0), true), LonRel::Ahead);
        assert_eq!(lon_rel_of_ranges(r(0.0, 4.0), r(4.0, 8.0), true), LonRel::Cover);
        assert_eq!(lon_rel_of_ranges(r(0.0, 4.0), r(6.0, 10.0), false), LonRel::Ahead);
        assert!(SRange::new(2.0, 1.0).is_err());
    }

    #[test]
    fn invert_examples() {
        assert_eq!(LonRel::Ahead.invert(), LonRel::Behind);
        assert_eq!(LonRel::Cover.invert(), LonRel::Cover);
        assert_eq!(LonRel::None.invert(), LonRel::None);
        for d in LonRel::ALL {
            assert_eq!(d.invert().invert(), d);
            assert_eq!(d.as_str().parse::<LonRel>().unwrap(), d);
        }
    }

    /// Exhaustive over small integer endpoints: exactly one of the three
    /// categories applies, checked against the raw inequalities.
    #[test]
    fn exactly_one_category_on_grid() {
        for a0 in -3..=3 {
            for a1 in a0..=3 {
                for b0 in -3..=3 {
                    for b1 in b0..=3 {
                        let (a0f, a1f, b0f, b1f) = (a0 as f64, a1 as f64, b0 as f64, b1 as f64);
                        let ahead = a0f > b1f;
                        let cover = a0f <= b1f && a1f >= b0f;
                        let behind = a1f < b0f;
                        assert_eq!(ahead as u8 + cover as u8 + behind as u8, 1);
                        let got = lon_rel_of_ranges(r(a0f, a1f), r(b0f, b1f), true);
                        let want = if ahead {
                            LonRel::Ahead
                        } else if cover {
                            LonRel::Cover
                        } else {
                            LonRel::Behind
                        };
                        assert_eq!(got, want);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn antisymmetric(a0 in -50.0f64..50.0, la in 0.0f64..10.0,
                         b0 in -50.0f64..50.0, lb in 0.0f64..10.0, aligned: bool) {
            let a = r(a0, a0 + la);
            let b = r(b0, b0 + lb);
            prop_assert_eq!(lon_rel_of_ranges(a, b, aligned), lon_rel_of_ranges(b, a, aligned).invert());
            prop_assert_ne!(lon_rel_of_ranges(a, b, aligned), LonRel::None);
        }
    }
}
