//! The finite levels `R_alpha(n)|T_alpha(m)`, finite approximations
//! `AR^n_alpha` and the order `<=_fin` between them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::indexed::{indexed, IndexedBlock};
use crate::ordinals::Ordinal;
use crate::structures::{build_t, fmt_node, TreeNode};

/// Cap on the number of members produced by one enumeration.
pub const ENUM_LIMIT: u64 = 1_000_000;

/// A member `u` of `R_alpha(level)` inside the block `T_alpha(host)`.
#[derive(Clone)]
pub struct RMember {
    alpha: Ordinal,
    level: u32,
    host: u32,
    nodes: Vec<TreeNode>,
    /// `iota[x]`: index in `S_alpha(host)` of the image of node `x` of
    /// `S_alpha(level)` under the unique isomorphism onto `psi^-1(u)`.
    iota: Arc<Vec<usize>>,
}

impl RMember {
    pub fn alpha(&self) -> Ordinal {
        self.alpha
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn host(&self) -> u32 {
        self.host
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn iota(&self) -> &[usize] {
        &self.iota
    }

    pub fn contains(&self, t: &[u32]) -> bool {
        self.nodes.binary_search_by(|x| x.as_slice().cmp(t)).is_ok()
    }

    /// `self ⊆ other` as node sets.
    pub fn is_subtree_of(&self, other: &RMember) -> bool {
        self.alpha == other.alpha && self.nodes.iter().all(|t| other.contains(t))
    }

    /// Validates `nodes` as a member of `R_alpha(level)` inside block `host`.
    pub fn from_nodes(alpha: Ordinal, level: u32, host: u32, nodes: &[TreeNode]) -> Result<RMember> {
        let set: BTreeSet<TreeNode> = nodes.iter().cloned().collect();
        match preimage_iso(alpha, level, host, &set)? {
            Some(iota) => Ok(RMember {
                alpha,
                level,
                host,
                nodes: set.into_iter().collect(),
                iota: Arc::new(iota),
            }),
            None => Err(Error::NotAMember(format!(
                "node set is not a member of R_{alpha}({level}) in block {host}"
            ))),
        }
    }
}

impl PartialEq for RMember {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.level == other.level && self.nodes == other.nodes
    }
}

impl Eq for RMember {}

impl PartialOrd for RMember {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RMember {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.alpha, self.level, &self.nodes).cmp(&(other.alpha, other.level, &other.nodes))
    }
}

impl std::hash::Hash for RMember {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.alpha.hash(state);
        self.level.hash(state);
        self.nodes.hash(state);
    }
}

impl fmt::Debug for RMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<String> = self.nodes.iter().map(|t| fmt_node(t)).collect();
        write!(f, "R_{}({})@{}{{{}}}", self.alpha, self.level, self.host, nodes.join(" "))
    }
}

impl Serialize for RMember {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RMember", 4)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("host", &self.host)?;
        st.serialize_field("nodes", &self.nodes)?;
        st.end()
    }
}

/// If `psi^-1(u)` inside `S_alpha(m)` is isomorphic to `S_alpha(n)`, the
/// isomorphism as a list of indices.
fn preimage_iso(alpha: Ordinal, n: u32, m: u32, u: &BTreeSet<TreeNode>) -> Result<Option<Vec<usize>>> {
    let tree = build_t(alpha, m)?;
    if u.iter().any(|t| !tree.contains(t)) {
        return Err(Error::HostMismatch(m));
    }
    if !u.contains(&Vec::new()) || u.iter().any(|t| !t.is_empty() && !u.contains(&t[..t.len() - 1])) {
        return Ok(None);
    }
    let host = indexed(alpha, m)?;
    let small = indexed(alpha, n)?;
    let wanted: BTreeSet<usize> = u.iter().filter_map(|t| tree.index_of(t)).collect();
    let pre: Vec<usize> = (0..host.len()).filter(|&x| wanted.contains(&host.psi[x])).collect();
    if pre.len() != small.len() || !host.is_downset(&pre) || host.code(&pre) != small.full_code() {
        return Ok(None);
    }
    Ok(Some(pre))
}

/// Whether `u ⊆ T_alpha(m)` lies in `R_alpha(n)`: its `psi`-preimage in
/// `S_alpha(m)` is isomorphic to `S_alpha(n)`.
pub fn is_r_member(alpha: Ordinal, n: u32, m: u32, u: &[TreeNode]) -> Result<bool> {
    let set: BTreeSet<TreeNode> = u.iter().cloned().collect();
    Ok(preimage_iso(alpha, n, m, &set)?.is_some())
}

fn member_from_image(small: &IndexedBlock, host: &IndexedBlock, map: &[usize]) -> RMember {
    let mut img = map.to_vec();
    img.sort_unstable();
    debug_assert_eq!(img, map, "ordered embeddings preserve the preorder");
    let nodes: BTreeSet<TreeNode> = img.iter().map(|&x| host.tree.nodes[host.psi[x]].clone()).collect();
    RMember {
        alpha: host.alpha,
        level: small.n,
        host: host.n,
        nodes: nodes.into_iter().collect(),
        iota: Arc::new(img),
    }
}

/// `R_alpha(n)|T_alpha(m)`, sorted by node set.
pub fn enumerate_r(alpha: Ordinal, n: u32, m: u32) -> Result<Vec<RMember>> {
    Ok(r_members(alpha, n, m)?.as_ref().clone())
}

type RCache = RwLock<HashMap<(Ordinal, u32, u32), Arc<Vec<RMember>>>>;

fn r_cache() -> &'static RCache {
    static C: OnceLock<RCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Shared, cached form of [`enumerate_r`].
pub(crate) fn r_members(alpha: Ordinal, n: u32, m: u32) -> Result<Arc<Vec<RMember>>> {
    if let Some(v) = r_cache().read().unwrap().get(&(alpha, n, m)) {
        return Ok(v.clone());
    }
    if n > m {
        return Err(Error::InvalidParams(format!("enumerate_R needs n <= m, got {n} > {m}")));
    }
    let small = indexed(alpha, n)?;
    let host = indexed(alpha, m)?;
    let maps = small.embeddings(&host, true, ENUM_LIMIT)?;
    let mut out: Vec<RMember> = maps.iter().map(|e| member_from_image(&small, &host, e)).collect();
    out.sort();
    out.dedup();
    let out = Arc::new(out);
    r_cache().write().unwrap().insert((alpha, n, m), out.clone());
    Ok(out)
}

/// An element of `AR^length_alpha`: one member per level, hosts increasing.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteApprox {
    pub alpha: Ordinal,
    pub length: u32,
    pub blocks: Vec<RMember>,
}

impl FiniteApprox {
    pub fn empty(alpha: Ordinal) -> Self {
        FiniteApprox {
            alpha,
            length: 0,
            blocks: Vec::new(),
        }
    }

    pub fn new(alpha: Ordinal, blocks: Vec<RMember>) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.alpha != alpha || b.level != i as u32 {
                return Err(Error::LevelMismatch {
                    expected: i as u32,
                    found: b.level,
                });
            }
        }
        if blocks.windows(2).any(|w| w[0].host >= w[1].host) {
            return Err(Error::InvalidParams("host blocks must increase".into()));
        }
        Ok(FiniteApprox {
            alpha,
            length: blocks.len() as u32,
            blocks,
        })
    }

    pub fn hosts(&self) -> Vec<u32> {
        self.blocks.iter().map(|b| b.host).collect()
    }
}

impl fmt::Debug for FiniteApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.blocks).finish()
    }
}

impl Serialize for FiniteApprox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

/// `AR^n_alpha` with all hosts below `m`, ordered by hosts, then members.
pub fn enumerate_ar(alpha: Ordinal, n: u32, m: u32) -> Result<Vec<FiniteApprox>> {
    if n > m {
        return Err(Error::InvalidParams(format!("enumerate_AR needs n <= m, got {n} > {m}")));
    }
    let mut levels: Vec<Vec<Vec<RMember>>> = Vec::with_capacity(n as usize);
    for i in 0..n {
        let per_host = (0..m).map(|h| if h >= i { enumerate_r(alpha, i, h) } else { Ok(Vec::new()) });
        levels.push(per_host.collect::<Result<_>>()?);
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n as usize);
    extend_ar(alpha, &levels, 0, 0, &mut cur, &mut out)?;
    Ok(out)
}

fn extend_ar(
    alpha: Ordinal,
    levels: &[Vec<Vec<RMember>>],
    i: usize,
    min_host: u32,
    cur: &mut Vec<RMember>,
    out: &mut Vec<FiniteApprox>,
) -> Result<()> {
    if i == levels.len() {
        if out.len() as u64 >= ENUM_LIMIT {
            return Err(Error::Infeasible {
                needed: format!("more than {ENUM_LIMIT} approximations"),
                budget: ENUM_LIMIT,
            });
        }
        out.push(FiniteApprox {
            alpha,
            length: cur.len() as u32,
            blocks: cur.clone(),
        });
        return Ok(());
    }
    for h in min_host..levels[i].len() as u32 {
        for u in &levels[i][h as usize] {
            cur.push(u.clone());
            extend_ar(alpha, levels, i + 1, h + 1, cur, out)?;
            cur.pop();
        }
    }
    Ok(())
}

/// `b <=_fin a`: each `b(i)` is a subtree of `a(k_i)` for some strictly
/// increasing `k_i`. Greedy leftmost choice is optimal.
pub fn le_fin(b: &FiniteApprox, a: &FiniteApprox) -> bool {
    if b.alpha != a.alpha && !b.blocks.is_empty() {
        return false;
    }
    let mut j = 0;
    for x in &b.blocks {
        match a.blocks[j..].iter().position(|y| x.is_subtree_of(y)) {
            Some(p) => j += p + 1,
            None => return false,
        }
    }
    true
}
