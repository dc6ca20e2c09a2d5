//! Ordinals below w^2 and the fixed cofinal sequences of the limits.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The ordinal `w*omega_coeff + finite_part`.
///
/// Field order matters: the derived `Ord` is exactly the ordinal order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ordinal {
    pub omega_coeff: u32,
    pub finite_part: u32,
}

impl Ordinal {
    pub const ZERO: Ordinal = Ordinal::new(0, 0);
    pub const OMEGA: Ordinal = Ordinal::new(1, 0);

    pub const fn new(omega_coeff: u32, finite_part: u32) -> Self {
        Ordinal {
            omega_coeff,
            finite_part,
        }
    }

    pub const fn finite(r: u32) -> Self {
        Ordinal::new(0, r)
    }

    pub fn is_zero(self) -> bool {
        self == Ordinal::ZERO
    }

    pub fn is_limit(self) -> bool {
        self.finite_part == 0 && self.omega_coeff > 0
    }

    pub fn is_successor(self) -> bool {
        self.finite_part > 0
    }

    pub fn is_finite(self) -> bool {
        self.omega_coeff == 0
    }

    /// `self + 1`.
    pub fn succ(self) -> Self {
        Ordinal::new(self.omega_coeff, self.finite_part + 1)
    }

    /// Immediate predecessor, if `self` is a successor.
    pub fn pred(self) -> Option<Self> {
        self.is_successor()
            .then(|| Ordinal::new(self.omega_coeff, self.finite_part - 1))
    }

    /// The largest limit-or-zero ordinal `<= self` (the `delta` of `delta + k`).
    pub fn limit_part(self) -> Self {
        Ordinal::new(self.omega_coeff, 0)
    }
}

pub fn ord_compare(a: Ordinal, b: Ordinal) -> Ordering {
    a.cmp(&b)
}

/// `c_alpha(i) = w*n + i` for `alpha = w*(n+1)`.
pub fn cofinal_map(alpha: Ordinal, i: u32) -> Result<Ordinal> {
    if !alpha.is_limit() {
        return Err(Error::NotALimit(alpha));
    }
    Ok(Ordinal::new(alpha.omega_coeff - 1, i))
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.omega_coeff, self.finite_part) {
            (0, r) => write!(f, "{r}"),
            (1, 0) => write!(f, "w"),
            (1, r) => write!(f, "w+{r}"),
            (q, 0) => write!(f, "w*{q}"),
            (q, r) => write!(f, "w*{q}+{r}"),
        }
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<u32> for Ordinal {
    fn from(r: u32) -> Self {
        Ordinal::finite(r)
    }
}

/// Accepts `k`, `w`, `w+r`, `w*q` and `w*q+r`. Anything at or above w^2 is
/// rejected with `OutOfRange`.
impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("bad ordinal syntax: {s:?}"));
        let num = |t: &str| t.parse::<u32>().map_err(|_| bad());
        if s.is_empty() {
            return Err(bad());
        }
        if !s.starts_with('w') {
            return Ok(Ordinal::finite(num(&s)?));
        }
        let rest = &s[1..];
        if rest.starts_with('^') {
            return Err(Error::OutOfRange(format!("{s} is not below w^2")));
        }
        let (q_part, r_part) = match rest.split_once('+') {
            Some((a, b)) => (a, Some(b)),
            None => (rest, None),
        };
        let q = match q_part {
            "" => 1,
            t => {
                let t = t.strip_prefix('*').ok_or_else(bad)?;
                if t.starts_with('w') {
                    return Err(Error::OutOfRange(format!("{s} is not below w^2")));
                }
                num(t)?
            }
        };
        let r = match r_part {
            Some(t) => num(t)?,
            None => 0,
        };
        Ok(Ordinal::new(q, r))
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        [self.omega_coeff, self.finite_part].serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let [q, r] = <[u32; 2]>::deserialize(de)?;
        Ok(Ordinal::new(q, r))
    }
}
