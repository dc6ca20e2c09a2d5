//! The tree blocks `T_alpha(n)`, structure blocks `S_alpha(n)` and the maps
//! between them.

mod build;
mod snode;
mod tree;

use std::collections::{BTreeSet, HashMap};

pub use build::{
    build_s, build_t, child_range, covers, fiber_maxima, is_member, l_seq, leaf_count, limit_source,
    limit_table, maximal_through, tau_table, LimitRow, SBlock, LEAF_LIMIT,
};
pub(crate) use build::psi_unchecked;
pub use snode::{lex_compare, SNode, Segment};
pub use tree::{fmt_node, TreeBlock, TreeNode};

use crate::error::{Error, Result};
use crate::ordinals::Ordinal;

/// `psi_alpha(s)`; `s` must lie in some block of `S_alpha`.
pub fn psi(alpha: Ordinal, s: &SNode) -> Result<TreeNode> {
    let n = s.top_value().unwrap_or(0);
    if !is_member(alpha, n, s)? {
        return Err(Error::NotAMember(format!("{s} is not a node of S_{alpha}")));
    }
    psi_unchecked(alpha, s)
}

/// `sigma_{gamma,beta}(s)`: the part of `s` at or below `gamma`.
pub fn sigma(gamma: Ordinal, beta: Ordinal, s: &SNode) -> Result<SNode> {
    if gamma >= beta {
        return Err(Error::InvalidParams(format!("sigma needs {gamma} < {beta}")));
    }
    Ok(s.restrict_to(gamma))
}

/// The first entry of the non-root nodes of `T_alpha(i)`.
pub fn first_entry(alpha: Ordinal, i: u32) -> Result<u32> {
    if alpha.is_zero() {
        return Ok(i);
    }
    if let Some(xi) = alpha.pred() {
        return if i <= xi.finite_part { first_entry(xi, i) } else { Ok(i) };
    }
    let (c, m) = limit_source(alpha, i)?;
    first_entry(c, m)
}

/// The block of `T_beta` holding the non-root node `t`.
pub fn block_of(beta: Ordinal, t: &[u32]) -> Result<u32> {
    let Some(&head) = t.first() else {
        return Err(Error::InvalidParams("the root lies in every block".into()));
    };
    let mut i = 0;
    loop {
        let e = first_entry(beta, i)?;
        if e == head {
            if build_t(beta, i)?.contains(t) {
                return Ok(i);
            }
            break;
        }
        if e > head {
            break;
        }
        i += 1;
    }
    Err(Error::NotAMember(format!("{} is not a node of T_{beta}", fmt_node(t))))
}

/// `tau_{gamma,beta}(t)` inside block `m` of `T_beta`.
pub fn tau_in_block(gamma: Ordinal, beta: Ordinal, m: u32, t: &[u32]) -> Result<TreeNode> {
    tau_table(gamma, beta, m)?
        .get(t)
        .cloned()
        .ok_or_else(|| Error::NotAMember(format!("{} is not in T_{beta}({m})", fmt_node(t))))
}

/// `tau_{gamma,beta}(t)`. The root is only accepted for finite `beta`, where
/// its fiber is `{∅}` in every block.
pub fn tau(gamma: Ordinal, beta: Ordinal, t: &[u32]) -> Result<TreeNode> {
    if t.is_empty() {
        if beta.is_finite() {
            return tau_in_block(gamma, beta, 0, t);
        }
        return Err(Error::InvalidParams(format!(
            "the root of T_{beta} has a different fiber in each block; use tau_in_block"
        )));
    }
    let m = block_of(beta, t)?;
    tau_in_block(gamma, beta, m, t)
}

/// Splitting nodes of the block in lexicographic order: nodes whose domain
/// starts at a successor and which have at least two immediate successors.
pub fn splitting_nodes(block: &SBlock) -> Vec<SNode> {
    let mut below: HashMap<SNode, BTreeSet<u32>> = HashMap::new();
    for f in block.maximal() {
        let lo = f.domain_min().expect("nonempty");
        for s in block_restrictions(f) {
            let z = s.domain_min().expect("nonempty");
            if let Some(p) = z.pred() {
                if p >= lo {
                    below.entry(s).or_default().insert(f.value_at(p).expect("in domain"));
                }
            }
        }
    }
    let mut out: Vec<SNode> = below
        .into_iter()
        .filter(|(_, vals)| vals.len() >= 2)
        .map(|(s, _)| s)
        .collect();
    out.sort_by(|a, b| lex_compare(a, b).expect("same block"));
    out
}

fn block_restrictions(f: &SNode) -> impl Iterator<Item = SNode> + '_ {
    let top = f.top().expect("nonempty");
    let bound = f.breakpoints().map(|o| o.finite_part).max().unwrap_or(0) + 2;
    (0..=top.omega_coeff)
        .flat_map(move |q| (1..=bound).map(move |r| Ordinal::new(q, r)))
        .filter(move |z| *z <= top)
        .map(|z| f.restrict_from(z))
}

/// Lex-order and immediate-predecessor preserving bijection between two sets
/// of nodes of the same structure. The lex order forces the candidate map.
pub fn s_iso(a: &[SNode], b: &[SNode]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let shape = |set: &[SNode]| -> Option<Vec<Option<usize>>> {
        let mut sorted = set.to_vec();
        sorted.sort_by(|x, y| lex_compare(x, y).unwrap_or(std::cmp::Ordering::Equal));
        sorted.dedup();
        let index: HashMap<&SNode, usize> = sorted.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let parents = sorted
            .iter()
            .map(|s| s.parent().and_then(|p| index.get(&p).copied()))
            .collect();
        Some(parents)
    };
    match (shape(a), shape(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}
