//! Recursive construction of the blocks `T_alpha(n)`, `S_alpha(n)` and the
//! projection `psi_alpha`, with a process-wide memo table.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use serde::Serialize;

use super::snode::{lex_compare, SNode};
use super::tree::{TreeBlock, TreeNode};
use crate::error::{Error, Result};
use crate::ordinals::{cofinal_map, Ordinal};

/// Blocks whose leaf count exceeds this are refused with `Infeasible`.
pub const LEAF_LIMIT: u64 = 1_000_000;

/// How far past the largest breakpoint the finite parts of domain minima are
/// sampled in infinite blocks.
const SAMPLE_SLACK: u32 = 3;

/// Upper bound on the search for covering blocks in the limit construction,
/// relative to the block being covered.
const COVER_SLACK: u32 = 16;

/// `l^xi_n`. Depends only on the finite part `k` of `xi`: identity up to
/// `k + 1`, then increments `j - k`.
pub fn l_seq(xi: Ordinal, n: u32) -> u32 {
    let k = xi.finite_part;
    if n <= k + 1 {
        return n;
    }
    let mut l = k + 1;
    for j in (k + 2)..=n {
        l += j - k;
    }
    l
}

/// Indices `i` of the sub-blocks `S_xi(i)` glued under block `n` at the
/// successor `xi + 1`. A single index when `n <= k`.
pub fn child_range(xi: Ordinal, n: u32) -> std::ops::Range<u32> {
    l_seq(xi, n)..l_seq(xi, n + 1)
}

/// One step of the limit construction: blocks `p_{n-1} < i <= p` of `alpha`
/// are blocks of `gamma = c_alpha(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitRow {
    pub n: u32,
    pub gamma: Ordinal,
    pub k: u32,
    pub m: u32,
    pub l: u32,
    pub p: u32,
}

#[derive(Default)]
struct LimitTable {
    rows: Vec<LimitRow>,
}

impl LimitTable {
    /// `(row, m)` with `T_alpha(i) = T_{c(row)}(m)`.
    fn locate(&self, i: u32) -> Option<(usize, u32)> {
        let mut prev: Option<&LimitRow> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if i <= row.p {
                let m = match prev {
                    None => i,
                    Some(pr) => pr.m + i - pr.p,
                };
                return Some((r, m));
            }
            prev = Some(row);
        }
        None
    }
}

#[derive(Default)]
struct Cache {
    t: RwLock<HashMap<(Ordinal, u32), Arc<TreeBlock>>>,
    s: RwLock<HashMap<(Ordinal, u32), Arc<SBlock>>>,
    limits: Mutex<HashMap<Ordinal, Arc<Mutex<LimitTable>>>>,
    leaves: RwLock<HashMap<(Ordinal, u32), u64>>,
    tau: RwLock<HashMap<(Ordinal, Ordinal, u32), Arc<TauTable>>>,
}

type TauTable = BTreeMap<TreeNode, TreeNode>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(Cache::default)
}

fn cached<K: std::hash::Hash + Eq + Copy, V: Clone>(
    map: &RwLock<HashMap<K, V>>,
    key: K,
    make: impl FnOnce() -> Result<V>,
) -> Result<V> {
    if let Some(v) = map.read().unwrap().get(&key) {
        return Ok(v.clone());
    }
    // Built outside the lock: construction recurses into the same table.
    let v = make()?;
    Ok(map.write().unwrap().entry(key).or_insert(v).clone())
}

/// Where block `i` of the limit `alpha` comes from: `(c_alpha(n), m)`.
pub fn limit_source(alpha: Ordinal, i: u32) -> Result<(Ordinal, u32)> {
    let table = {
        let mut all = cache().limits.lock().unwrap();
        all.entry(alpha).or_default().clone()
    };
    // Per-alpha lock; extension only recurses into smaller ordinals.
    let mut table = table.lock().unwrap();
    loop {
        if let Some((r, m)) = table.locate(i) {
            return Ok((table.rows[r].gamma, m));
        }
        let row = next_limit_row(alpha, &table.rows)?;
        table.rows.push(row);
    }
}

/// The construction rows of `alpha` needed to reach block `upto`.
pub fn limit_table(alpha: Ordinal, upto: u32) -> Result<Vec<LimitRow>> {
    limit_source(alpha, upto)?;
    let table = cache().limits.lock().unwrap().get(&alpha).cloned().unwrap();
    let rows = table.lock().unwrap().rows.clone();
    let mut out = Vec::new();
    for row in rows {
        let done = row.p >= upto;
        out.push(row);
        if done {
            break;
        }
    }
    Ok(out)
}

fn next_limit_row(alpha: Ordinal, rows: &[LimitRow]) -> Result<LimitRow> {
    let n = rows.len() as u32;
    let gamma = cofinal_map(alpha, n)?;
    let beta = cofinal_map(alpha, n + 1)?;
    let start = rows.last().map_or(0, |r| r.m + 1);
    let stalled = |detail: String| Error::Stalled { alpha, detail };

    let mut found = None;
    for k in start..=start + COVER_SLACK {
        if let Some(m) = least_cover(gamma, beta, k)? {
            found = Some((k, m));
            break;
        }
    }
    let (k, m) = found.ok_or_else(|| stalled(format!("no covered block of {gamma} from {start}")))?;
    let mut l = k;
    while covers(gamma, l + 1, beta, m)? {
        l += 1;
    }
    let p = match rows.last() {
        None => l,
        Some(prev) => {
            if l <= prev.m {
                return Err(stalled(format!("row {n} adds no blocks")));
            }
            prev.p + l - prev.m
        }
    };
    Ok(LimitRow { n, gamma, k, m, l, p })
}

fn least_cover(gamma: Ordinal, beta: Ordinal, q: u32) -> Result<Option<u32>> {
    for m in 0..=q + COVER_SLACK {
        if covers(gamma, q, beta, m)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// `T_gamma(q) ⊆ tau_{gamma,beta}'' T_beta(m)`.
pub fn covers(gamma: Ordinal, q: u32, beta: Ordinal, m: u32) -> Result<bool> {
    // For a successor the image is the root plus the child blocks of T_beta(m).
    if beta == gamma.succ() {
        return Ok(child_range(gamma, m).contains(&q));
    }
    covers_general(gamma, q, beta, m)
}

fn covers_general(gamma: Ordinal, q: u32, beta: Ordinal, m: u32) -> Result<bool> {
    let through = maximal_through(beta, m, gamma, q)?;
    if through.is_empty() {
        return Ok(false);
    }
    let image = tau_image_through(gamma, beta, &through)?;
    let block = build_t(gamma, q)?;
    Ok(block.nodes.iter().all(|t| image.contains(t)))
}

/// `{tau_{gamma,beta}(t)}` over the nodes `t` whose fibers meet the
/// restrictions of `maxima` at or below `gamma`, plus the root.
///
/// `maxima` must be closed in the sense of `maximal_through`: every maximal
/// function of the block with the same value at `gamma` is present.
pub(crate) fn tau_image_through(
    gamma: Ordinal,
    beta: Ordinal,
    maxima: &[SNode],
) -> Result<BTreeSet<TreeNode>> {
    let mut fibers: HashMap<TreeNode, Vec<SNode>> = HashMap::new();
    let mut seen = HashSet::new();
    for f in maxima {
        for z in domain_points(f) {
            if z > gamma {
                break;
            }
            let s = f.restrict_from(z);
            if seen.insert(s.clone()) {
                fibers.entry(psi_unchecked(beta, &s)?).or_default().push(s);
            }
        }
    }
    let mut image = BTreeSet::new();
    image.insert(Vec::new());
    for members in fibers.values() {
        for s in fiber_maxima(members) {
            image.insert(psi_unchecked(gamma, &s.restrict_to(gamma))?);
        }
    }
    Ok(image)
}

/// The ⊂-maximal members of a set of nodes.
pub fn fiber_maxima(members: &[SNode]) -> Vec<&SNode> {
    members
        .iter()
        .filter(|s| !members.iter().any(|t| t != *s && s.is_restriction_of(t)))
        .collect()
}

/// Domain minima worth visiting for restrictions of `f`: every breakpoint
/// neighbourhood, in increasing order. Exhaustive when `f` lives on a finite
/// ordinal.
fn domain_points(f: &SNode) -> Vec<Ordinal> {
    let top = f.top().expect("nonempty");
    let bound = f.breakpoints().map(|o| o.finite_part).max().unwrap_or(0) + SAMPLE_SLACK;
    let mut out = Vec::new();
    for q in 0..=top.omega_coeff {
        for r in 0..=bound {
            let z = Ordinal::new(q, r);
            if z > top {
                break;
            }
            if f.domain_min().is_some_and(|lo| lo <= z) {
                out.push(z);
            }
        }
    }
    out
}

/// Number of maximal nodes of `S_alpha(n)`, saturating just above `cap`.
pub fn leaf_count(alpha: Ordinal, n: u32, cap: u64) -> Result<u64> {
    if let Some(v) = cache().leaves.read().unwrap().get(&(alpha, n)) {
        if *v <= cap {
            return Ok(*v);
        }
    }
    let v = leaf_count_inner(alpha, n, cap)?;
    if v <= cap {
        cache().leaves.write().unwrap().insert((alpha, n), v);
    }
    Ok(v)
}

fn leaf_count_inner(alpha: Ordinal, n: u32, cap: u64) -> Result<u64> {
    if alpha.is_zero() {
        return Ok(1);
    }
    if alpha == Ordinal::finite(1) {
        // S_1(n) has n + 1 maximal nodes for n > 0.
        return Ok(if n == 0 { 1 } else { n as u64 + 1 });
    }
    if let Some(xi) = alpha.pred() {
        let mut total = 0u64;
        for i in child_range(xi, n) {
            total = total.saturating_add(leaf_count(xi, i, cap)?);
            if total > cap {
                return Ok(total);
            }
        }
        return Ok(total);
    }
    let (c, m) = limit_source(alpha, n)?;
    leaf_count(c, m, cap)
}

fn check_size(alpha: Ordinal, n: u32) -> Result<()> {
    let leaves = leaf_count(alpha, n, LEAF_LIMIT)?;
    if leaves > LEAF_LIMIT {
        return Err(Error::Infeasible {
            needed: format!("more than {LEAF_LIMIT} maximal nodes in S_{alpha}({n})"),
            budget: LEAF_LIMIT,
        });
    }
    Ok(())
}

/// `T_alpha(n)`.
pub fn build_t(alpha: Ordinal, n: u32) -> Result<Arc<TreeBlock>> {
    cached(&cache().t, (alpha, n), || {
        check_size(alpha, n)?;
        let mut nodes = BTreeSet::new();
        if alpha.is_zero() {
            nodes.insert(vec![]);
            nodes.insert(vec![n]);
        } else if let Some(xi) = alpha.pred() {
            if n <= xi.finite_part {
                nodes.extend(build_t(xi, n)?.nodes.iter().cloned());
            } else {
                nodes.insert(vec![]);
                for i in child_range(xi, n) {
                    for t in &build_t(xi, i)?.nodes {
                        let mut u = Vec::with_capacity(t.len() + 1);
                        u.push(n);
                        u.extend_from_slice(t);
                        nodes.insert(u);
                    }
                }
            }
        } else {
            let (c, m) = limit_source(alpha, n)?;
            nodes.extend(build_t(c, m)?.nodes.iter().cloned());
        }
        Ok(Arc::new(TreeBlock::new(alpha, n, nodes)))
    })
}

/// `S_alpha(n)`, given by its maximal functions. All nodes are materialized
/// when `alpha` is finite; otherwise the node list is a sample containing
/// every splitting node, every maximal node and the restrictions at the
/// domain minima that matter (see `SBlock::is_complete`).
#[derive(Clone, Debug, Serialize)]
pub struct SBlock {
    pub alpha: Ordinal,
    pub n: u32,
    maximal: Vec<SNode>,
    nodes: Vec<SNode>,
    complete: bool,
}

impl SBlock {
    fn from_maximal(alpha: Ordinal, n: u32, mut maximal: Vec<SNode>) -> Self {
        maximal.sort_by(|a, b| lex_compare(a, b).expect("same top"));
        maximal.dedup();
        let mut set: HashSet<SNode> = HashSet::new();
        set.insert(SNode::empty());
        for f in &maximal {
            for z in domain_points(f) {
                set.insert(f.restrict_from(z));
            }
        }
        let mut nodes: Vec<SNode> = set.into_iter().collect();
        nodes.sort_by(|a, b| lex_compare(a, b).expect("same top"));
        SBlock {
            alpha,
            n,
            maximal,
            nodes,
            complete: alpha.is_finite(),
        }
    }

    pub fn maximal(&self) -> &[SNode] {
        &self.maximal
    }

    /// Nodes in lexicographic order.
    pub fn nodes(&self) -> &[SNode] {
        &self.nodes
    }

    /// Whether `nodes` lists every node of the block.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn to_dot(&self) -> String {
        let index: HashMap<&SNode, usize> = self.nodes.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "digraph S {{");
        let _ = writeln!(out, "  label=\"S_{}({})\";", self.alpha, self.n);
        for (i, s) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{s}\"];");
        }
        for (i, s) in self.nodes.iter().enumerate() {
            if let Some(p) = s.parent().and_then(|p| index.get(&p).copied()) {
                let _ = writeln!(out, "  n{p} -> n{i};");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn contains(&self, s: &SNode) -> bool {
        if s.is_empty() {
            return true;
        }
        if s.top() != Some(self.alpha) || s.top_value() != Some(self.n) {
            return false;
        }
        if self.complete {
            return self
                .nodes
                .binary_search_by(|x| lex_compare(x, s).expect("same top"))
                .is_ok();
        }
        self.maximal.iter().any(|f| s.is_restriction_of(f))
    }
}

/// `S_alpha(n)`.
pub fn build_s(alpha: Ordinal, n: u32) -> Result<Arc<SBlock>> {
    cached(&cache().s, (alpha, n), || {
        check_size(alpha, n)?;
        Ok(Arc::new(SBlock::from_maximal(alpha, n, maximal_functions(alpha, n)?)))
    })
}

fn maximal_functions(alpha: Ordinal, n: u32) -> Result<Vec<SNode>> {
    if alpha.is_zero() {
        return Ok(vec![SNode::point(Ordinal::ZERO, n)]);
    }
    let mut out = Vec::new();
    if let Some(xi) = alpha.pred() {
        for i in child_range(xi, n) {
            for g in build_s(xi, i)?.maximal() {
                out.push(g.extend_top(n));
            }
        }
    } else {
        let (c, m) = limit_source(alpha, n)?;
        for g in build_s(c, m)?.maximal() {
            out.push(with_tail(g, alpha, n));
        }
    }
    Ok(out)
}

fn with_tail(g: &SNode, alpha: Ordinal, value: u32) -> SNode {
    let mut f = g.clone();
    let lo = g.top().expect("nonempty").succ();
    f.push_run(lo, alpha, value);
    f
}

/// The maximal functions `f` of `S_beta(m)` with `f(gamma) = l`, found
/// without materializing `S_beta(m)` (only paths through `S_gamma(l)` are
/// followed).
pub fn maximal_through(beta: Ordinal, m: u32, gamma: Ordinal, l: u32) -> Result<Vec<SNode>> {
    if gamma > beta {
        return Err(Error::InvalidParams(format!("{gamma} > {beta}")));
    }
    if beta == gamma {
        return Ok(if m == l { build_s(gamma, l)?.maximal().to_vec() } else { vec![] });
    }
    let mut out = Vec::new();
    if let Some(xi) = beta.pred() {
        let range = child_range(xi, m);
        if xi == gamma {
            if range.contains(&l) {
                out.extend(build_s(xi, l)?.maximal().iter().map(|g| g.extend_top(m)));
            }
        } else {
            for i in range {
                out.extend(maximal_through(xi, i, gamma, l)?.into_iter().map(|g| g.extend_top(m)));
            }
        }
    } else {
        let (c, mm) = limit_source(beta, m)?;
        if c >= gamma {
            for g in maximal_through(c, mm, gamma, l)? {
                out.push(with_tail(&g, beta, m));
            }
        } else if l == m {
            check_size(c, mm)?;
            for g in build_s(c, mm)?.maximal() {
                out.push(with_tail(g, beta, m));
            }
        }
    }
    Ok(out)
}

/// Membership of `s` in `S_alpha(n)` by recursion on `alpha`; never builds a
/// block.
pub fn is_member(alpha: Ordinal, n: u32, s: &SNode) -> Result<bool> {
    if s.is_empty() {
        return Ok(true);
    }
    if s.top() != Some(alpha) || s.top_value() != Some(n) {
        return Ok(false);
    }
    if alpha.is_zero() {
        return Ok(true);
    }
    if s.domain_min() == Some(alpha) {
        return Ok(true);
    }
    if let Some(xi) = alpha.pred() {
        let r = s.restrict_to(xi);
        let j = r.top_value().expect("domain reaches xi");
        return Ok(child_range(xi, n).contains(&j) && is_member(xi, j, &r)?);
    }
    let (c, m) = limit_source(alpha, n)?;
    let tail_ok = s.segments().iter().all(|seg| seg.hi <= c || seg.value == n);
    if !tail_ok {
        return Ok(false);
    }
    let r = s.restrict_to(c);
    if r.is_empty() {
        return Ok(true);
    }
    Ok(r.top_value() == Some(m) && is_member(c, m, &r)?)
}

/// `psi_alpha(s)` without checking membership.
pub(crate) fn psi_unchecked(alpha: Ordinal, s: &SNode) -> Result<TreeNode> {
    let Some(n) = s.top_value() else {
        return Ok(vec![]);
    };
    if s.domain_min() == Some(alpha) {
        return Ok(vec![n]);
    }
    if alpha.is_zero() {
        return Ok(vec![n]);
    }
    if let Some(xi) = alpha.pred() {
        let rest = psi_unchecked(xi, &s.restrict_to(xi))?;
        if n <= xi.finite_part {
            return Ok(rest);
        }
        let mut out = Vec::with_capacity(rest.len() + 1);
        out.push(n);
        out.extend(rest);
        return Ok(out);
    }
    let (c, _) = limit_source(alpha, n)?;
    psi_unchecked(c, &s.restrict_to(c))
}

/// `tau_{gamma,beta}` on block `m` of `T_beta`, as a table over its nodes.
///
/// Each node is sent to `psi_gamma(sigma(s))` for the ⊂-maximal `s` in its
/// fiber; `NotSingleton` if several maxima disagree.
pub fn tau_table(gamma: Ordinal, beta: Ordinal, m: u32) -> Result<Arc<TauTable>> {
    if gamma >= beta {
        return Err(Error::InvalidParams(format!("tau needs {gamma} < {beta}")));
    }
    cached(&cache().tau, (gamma, beta, m), || make_tau_table(gamma, beta, m).map(Arc::new))
}

fn make_tau_table(gamma: Ordinal, beta: Ordinal, m: u32) -> Result<TauTable> {
    let block = build_s(beta, m)?;
    let mut fibers: BTreeMap<TreeNode, Vec<SNode>> = BTreeMap::new();
    for s in block.nodes() {
        fibers.entry(psi_unchecked(beta, s)?).or_default().push(s.clone());
    }
    let mut out = BTreeMap::new();
    for (t, members) in fibers {
        let mut images = BTreeSet::new();
        for s in fiber_maxima(&members) {
            images.insert(psi_unchecked(gamma, &s.restrict_to(gamma))?);
        }
        if images.len() != 1 {
            return Err(Error::NotSingleton {
                gamma,
                beta,
                node: super::tree::fmt_node(&t),
            });
        }
        out.insert(t, images.into_iter().next().unwrap());
    }
    Ok(out)
}
