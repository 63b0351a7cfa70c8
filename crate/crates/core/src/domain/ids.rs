use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier `{0}`: expected [a-z][a-z0-9_]*")]
pub struct InvalidId(pub String);

/// Returns true when `s` matches `[a-z][a-z0-9_]*`.
pub fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

macro_rules! ident_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Result<Self, InvalidId> {
                let s = s.into();
                if is_valid_ident(&s) {
                    Ok(Self(s))
                } else {
                    Err(InvalidId(s))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = InvalidId;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

ident_type!(
    /// A vehicle in the scenario universe.
    VehicleId
);
ident_type!(
    /// A lane of the road network.
    LaneId
);
ident_type!(
    /// A uni-directional road: an ordered group of lanes.
    RoadId
);
ident_type!(
    /// A special point: intersection, connection or overlap endpoint.
    PointId
);

/// Turns an arbitrary string into a valid identifier by lowercasing and
/// replacing anything outside `[a-z0-9_]` with `_`. A `prefix` is prepended
/// so the result always starts with a letter.
pub fn sanitize(prefix: &str, raw: &str) -> String {
    let mut out = String::with_capacity(prefix.len() + raw.len());
    out.push_str(prefix);
    for c in raw.chars() {
        let c = c.to_ascii_lowercase();
        if c.is_ascii_lowercase() || c.is_ascii_digit() {
            out.push(c);
        } else if c == '-' {
            out.push('m');
        } else {
            out.push('_');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ident_validation() {
        assert!(VehicleId::new("c1").is_ok());
        assert!(LaneId::new("l_1_m1").is_ok());
        assert!(PointId::new("").is_err());
        assert!(PointId::new("1p").is_err());
        assert!(RoadId::new("Road").is_err());
        assert!(RoadId::new("r-1").is_err());
    }

    #[test]
    fn sanitize_produces_valid_ids() {
        assert_eq!(sanitize("l", "-1"), "lm1");
        assert_eq!(sanitize("r", "Main St.7"), "rmain_st_7");
        assert!(is_valid_ident(&sanitize("r", "??")));
    }
}
