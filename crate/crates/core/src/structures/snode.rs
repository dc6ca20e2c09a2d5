//! Piecewise-constant functions on ordinal intervals `[domain_min, top]`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ordinals::Ordinal;

/// A constant run: value `value` on every ordinal of `[lo, hi]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub lo: Ordinal,
    pub hi: Ordinal,
    pub value: u32,
}

/// A node of some `S_alpha(n)`: the empty function or a function on an
/// interval `[domain_min, alpha]`.
///
/// Stored as maximal constant runs in increasing order, so structural
/// equality is equality of functions.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SNode {
    segments: Vec<Segment>,
}

impl SNode {
    pub fn empty() -> Self {
        SNode::default()
    }

    pub fn point(at: Ordinal, value: u32) -> Self {
        SNode {
            segments: vec![Segment {
                lo: at,
                hi: at,
                value,
            }],
        }
    }

    /// Function on `[lo, lo + values.len() - 1]` (finite positions) taking the
    /// listed values in increasing order of position.
    pub fn from_values(lo: u32, values: &[u32]) -> Self {
        let mut s = SNode::empty();
        for (i, &v) in values.iter().enumerate() {
            s.push_run(Ordinal::finite(lo + i as u32), Ordinal::finite(lo + i as u32), v);
        }
        s
    }

    /// Build from runs, validating contiguity and merging equal neighbours.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        let mut s = SNode::empty();
        for seg in segments {
            if seg.lo > seg.hi {
                return Err(Error::InvalidParams(format!("empty run {:?}", seg)));
            }
            if let Some(top) = s.top() {
                if top.succ() != seg.lo {
                    return Err(Error::InvalidParams(format!(
                        "runs are not contiguous at {top} / {}",
                        seg.lo
                    )));
                }
            }
            s.push_run(seg.lo, seg.hi, seg.value);
        }
        Ok(s)
    }

    /// Append the run `[lo, hi] -> value` directly above the current top.
    pub(crate) fn push_run(&mut self, lo: Ordinal, hi: Ordinal, value: u32) {
        debug_assert!(self.top().is_none_or(|t| t.succ() == lo));
        match self.segments.last_mut() {
            Some(last) if last.value == value => last.hi = hi,
            _ => self.segments.push(Segment { lo, hi, value }),
        }
    }

    /// `self ∪ {(top+1, value)}`.
    pub fn extend_top(&self, value: u32) -> Self {
        let mut out = self.clone();
        let at = self.top().map_or(Ordinal::ZERO, Ordinal::succ);
        out.push_run(at, at, value);
        out
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn domain_min(&self) -> Option<Ordinal> {
        self.segments.first().map(|s| s.lo)
    }

    pub fn top(&self) -> Option<Ordinal> {
        self.segments.last().map(|s| s.hi)
    }

    pub fn top_value(&self) -> Option<u32> {
        self.segments.last().map(|s| s.value)
    }

    pub fn value_at(&self, at: Ordinal) -> Option<u32> {
        self.segments
            .iter()
            .find(|s| s.lo <= at && at <= s.hi)
            .map(|s| s.value)
    }

    /// `self ↾ [from, top]`; empty when `from` lies above the top.
    pub fn restrict_from(&self, from: Ordinal) -> Self {
        let mut segments = Vec::new();
        for s in &self.segments {
            if s.hi < from {
                continue;
            }
            segments.push(Segment {
                lo: s.lo.max(from),
                ..*s
            });
        }
        SNode { segments }
    }

    /// `self ↾ [domain_min, to]`; empty when `to` lies below the domain.
    pub fn restrict_to(&self, to: Ordinal) -> Self {
        let mut segments = Vec::new();
        for s in &self.segments {
            if s.lo > to {
                break;
            }
            segments.push(Segment {
                hi: s.hi.min(to),
                ..*s
            });
        }
        SNode { segments }
    }

    /// True iff `self = other ↾ [domain_min(self), top]` (the empty function is
    /// an initial piece of everything).
    pub fn is_restriction_of(&self, other: &SNode) -> bool {
        match self.domain_min() {
            None => true,
            Some(lo) => {
                other.top() == self.top()
                    && other.domain_min().is_some_and(|m| m <= lo)
                    && other.restrict_from(lo) == *self
            }
        }
    }

    /// Drop the lowest point of the domain: the immediate predecessor.
    pub fn parent(&self) -> Option<Self> {
        let lo = self.domain_min()?;
        Some(self.restrict_from(lo.succ()))
    }

    /// Distinct ordinals at which the function changes value, plus the ends.
    pub fn breakpoints(&self) -> impl Iterator<Item = Ordinal> + '_ {
        self.segments.iter().flat_map(|s| [s.lo, s.hi])
    }
}

impl fmt::Debug for SNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if s.lo == s.hi {
                write!(f, "({}:{})", s.lo, s.value)?;
            } else {
                write!(f, "([{},{}]:{})", s.lo, s.hi, s.value)?;
            }
        }
        write!(f, "}}")
    }
}

impl fmt::Display for SNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct SNodeRepr {
    domain_min: Option<Ordinal>,
    segments: Vec<Segment>,
}

impl Serialize for SNode {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SNodeRepr {
            domain_min: self.domain_min(),
            segments: self.segments.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SNode {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SNodeRepr::deserialize(de)?;
        let node = SNode::from_segments(repr.segments).map_err(serde::de::Error::custom)?;
        if node.domain_min() != repr.domain_min {
            return Err(serde::de::Error::custom("domain_min does not match segments"));
        }
        Ok(node)
    }
}

/// The lexicographic order: proper restrictions come first; otherwise the
/// value at the highest point of disagreement decides.
pub fn lex_compare(s: &SNode, t: &SNode) -> Result<Ordering> {
    if s == t {
        return Ok(Ordering::Equal);
    }
    if s.is_empty() {
        return Ok(Ordering::Less);
    }
    if t.is_empty() {
        return Ok(Ordering::Greater);
    }
    if s.top() != t.top() {
        return Err(Error::Incomparable);
    }
    let a = s.segments();
    let b = t.segments();
    let common = s.domain_min().max(t.domain_min()).unwrap();
    let (mut i, mut j) = (a.len() - 1, b.len() - 1);
    loop {
        if a[i].value != b[j].value {
            return Ok(a[i].value.cmp(&b[j].value));
        }
        let lo = a[i].lo.max(b[j].lo);
        if lo <= common {
            break;
        }
        if a[i].lo == lo {
            i -= 1;
        }
        if b[j].lo == lo {
            j -= 1;
        }
    }
    // One is a restriction of the other.
    Ok(t.domain_min().cmp(&s.domain_min()))
}
