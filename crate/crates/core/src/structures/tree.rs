use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinals::Ordinal;

/// A node of `T_alpha`: a finite sequence of naturals. `Vec` ordering is the
/// lexicographic order with prefixes first.
pub type TreeNode = Vec<u32>;

pub fn fmt_node(t: &[u32]) -> String {
    let inner: Vec<String> = t.iter().map(u32::to_string).collect();
    format!("<{}>", inner.join(","))
}

/// The finite tree `T_alpha(n)`; nodes kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeBlock {
    pub alpha: Ordinal,
    pub n: u32,
    pub nodes: Vec<TreeNode>,
}

impl TreeBlock {
    pub fn new(alpha: Ordinal, n: u32, nodes: BTreeSet<TreeNode>) -> Self {
        TreeBlock {
            alpha,
            n,
            nodes: nodes.into_iter().collect(),
        }
    }

    pub fn contains(&self, t: &[u32]) -> bool {
        self.nodes.binary_search_by(|x| x.as_slice().cmp(t)).is_ok()
    }

    pub fn index_of(&self, t: &[u32]) -> Option<usize> {
        self.nodes.binary_search_by(|x| x.as_slice().cmp(t)).ok()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().enumerate().filter_map(|(i, t)| {
            let has_child = self.nodes.get(i + 1).is_some_and(|next| next.starts_with(t));
            (!has_child).then_some(t)
        })
    }

    /// Checks the structural invariants of a block read from outside.
    pub fn validate(&self) -> Result<()> {
        if !self.nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams("tree nodes are not sorted and distinct".into()));
        }
        if !self.contains(&[]) {
            return Err(Error::InvalidParams("tree block lacks the root".into()));
        }
        for t in &self.nodes {
            if !t.is_empty() && !self.contains(&t[..t.len() - 1]) {
                return Err(Error::InvalidParams(format!(
                    "tree block is not prefix-closed at {}",
                    fmt_node(t)
                )));
            }
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph T {{");
        let _ = writeln!(out, "  label=\"T_{}({})\";", self.alpha, self.n);
        for (i, t) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", fmt_node(t));
        }
        for (i, t) in self.nodes.iter().enumerate() {
            if let Some((_, parent)) = t.split_last() {
                let p = self.index_of(parent).expect("prefix-closed");
                let _ = writeln!(out, "  n{p} -> n{i};");
            }
        }
        out.push_str("}\n");
        out
    }
}
