//! Embeddings between downward closed sets, and the Rudin-Keisler and Tukey
//! classes they determine.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::canonical::{chain_s_beta, dc_family, DCSet};
use crate::error::{Error, Result};
use crate::indexed::IndexedBlock;
use crate::ordinals::Ordinal;

/// Children of `x` inside the set `members` (sorted indices).
fn children_in(block: &IndexedBlock, members: &[usize], x: usize) -> Vec<usize> {
    block.children[x]
        .iter()
        .copied()
        .filter(|c| members.binary_search(c).is_ok())
        .collect()
}

/// Whether `s` embeds into `t`: an injection preserving the lexicographic
/// order and immediate predecessors, with downward closed image.
pub fn embeds(s: &DCSet, t: &DCSet) -> bool {
    if s.alpha() != t.alpha() {
        return false;
    }
    if s.len() > t.len() {
        return false;
    }
    let (bs, bt) = (s.block(), t.block());
    let mut memo = std::collections::HashMap::new();
    embeds_at(&bs, s.indices(), 0, &bt, t.indices(), 0, &mut memo)
}

fn embeds_at(
    bs: &IndexedBlock,
    s: &[usize],
    x: usize,
    bt: &IndexedBlock,
    t: &[usize],
    y: usize,
    memo: &mut std::collections::HashMap<(usize, usize), bool>,
) -> bool {
    if let Some(&v) = memo.get(&(x, y)) {
        return v;
    }
    let xs = children_in(bs, s, x);
    let ys = children_in(bt, t, y);
    // Leftmost feasible placement is optimal for subsequence matching.
    let mut j = 0;
    let mut ok = true;
    for &c in &xs {
        let mut placed = false;
        while j < ys.len() {
            let d = ys[j];
            j += 1;
            if embeds_at(bs, s, c, bt, t, d, memo) {
                placed = true;
                break;
            }
        }
        if !placed {
            ok = false;
            break;
        }
    }
    memo.insert((x, y), ok);
    ok
}

/// Isomorphism as ordered trees.
pub fn dc_iso(s: &DCSet, t: &DCSet) -> bool {
    s.alpha() == t.alpha() && s.code() == t.code()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TukeyClass {
    /// `S = {∅}`.
    Principal,
    Chain(Ordinal),
}

impl Serialize for TukeyClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TukeyClass::Principal => s.serialize_str("principal"),
            TukeyClass::Chain(b) => b.serialize(s),
        }
    }
}

impl std::fmt::Display for TukeyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TukeyClass::Principal => f.write_str("principal"),
            TukeyClass::Chain(b) => write!(f, "{b}"),
        }
    }
}

/// The least `beta <= alpha` whose chain embeds into `s`.
pub fn tukey_class(alpha: Ordinal, s: &DCSet) -> Result<TukeyClass> {
    if s.alpha() != alpha {
        return Err(Error::InvalidParams(format!("set lives over {}, not {alpha}", s.alpha())));
    }
    if s.len() == 1 {
        return Ok(TukeyClass::Principal);
    }
    if !alpha.is_finite() {
        return Err(Error::InfiniteBlock(alpha));
    }
    for b in 0..=alpha.finite_part {
        let beta = Ordinal::finite(b);
        if embeds(&chain_s_beta(alpha, beta)?, s) {
            return Ok(TukeyClass::Chain(beta));
        }
    }
    unreachable!("the two-element chain embeds into every set other than {{∅}}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RkRelation {
    Below,
    Above,
    Isomorphic,
    Incomparable,
}

/// The Rudin-Keisler relation between the projections of `s` and `t`, read
/// off mutual embeddability.
pub fn rk_compare(s: &DCSet, t: &DCSet) -> RkRelation {
    match (embeds(s, t), embeds(t, s)) {
        (true, true) => RkRelation::Isomorphic,
        (true, false) => RkRelation::Below,
        (false, true) => RkRelation::Above,
        (false, false) => RkRelation::Incomparable,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HasseVertex {
    pub id: usize,
    pub representative: DCSet,
    /// Members of the family isomorphic to the representative.
    pub class_size: usize,
    pub tukey: TukeyClass,
}

/// Covering relations of the embedding order on isomorphism classes;
/// an edge `(a, b)` means `a` lies strictly below `b`.
#[derive(Clone, Debug, Serialize)]
pub struct Hasse {
    pub alpha: Ordinal,
    pub n: u32,
    pub m: u32,
    pub vertices: Vec<HasseVertex>,
    pub edges: Vec<(usize, usize)>,
}

impl Hasse {
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph RK {{");
        let _ = writeln!(out, "  label=\"S_{}({}, {})\";", self.alpha, self.n, self.m);
        let _ = writeln!(out, "  rankdir=BT;");
        for v in &self.vertices {
            let nodes: Vec<String> = v.representative.nodes().iter().map(|s| s.to_string()).collect();
            let _ = writeln!(
                out,
                "  v{} [label=\"{}\\ntukey {}\\nx{}\"];",
                v.id,
                nodes.join(" "),
                v.tukey,
                v.class_size
            );
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  v{a} -> v{b};");
        }
        out.push_str("}\n");
        out
    }
}

/// The embedding order on `𝔖_alpha(n, m)` up to isomorphism.
pub fn rk_hasse(alpha: Ordinal, n: u32, m: u32) -> Result<Hasse> {
    if n > m {
        return Err(Error::InvalidParams(format!("need n <= m, got {n} > {m}")));
    }
    let family = dc_family(alpha, n, m)?;
    let mut reps: Vec<(DCSet, usize)> = Vec::new();
    for s in family.iter() {
        match reps.iter_mut().find(|(r, _)| dc_iso(r, s)) {
            Some((_, count)) => *count += 1,
            None => reps.push((s.clone(), 1)),
        }
    }
    let k = reps.len();
    let below: Vec<Vec<bool>> = (0..k)
        .map(|a| (0..k).map(|b| a != b && embeds(&reps[a].0, &reps[b].0)).collect())
        .collect();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if below[a][b] && !(0..k).any(|c| below[a][c] && below[c][b]) {
                edges.push((a, b));
            }
        }
    }
    let vertices = reps
        .into_iter()
        .enumerate()
        .map(|(id, (representative, class_size))| {
            let tukey = tukey_class(alpha, &representative)?;
            Ok(HasseVertex {
                id,
                representative,
                class_size,
                tukey,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Hasse {
        alpha,
        n,
        m,
        vertices,
        edges,
    })
}
