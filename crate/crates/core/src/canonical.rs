//! Downward closed sets `𝔖_alpha(n)`, their realizable parts
//! `𝔖_alpha(n, m)`, the projections `pi_S` and the relations `E_S`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::indexed::{indexed, IndexedBlock};
use crate::ordinals::Ordinal;
use crate::space::{r_members, RMember, ENUM_LIMIT};
use crate::structures::{child_range, SNode, TreeNode};

/// A downward closed subset of `S_alpha(level)`, stored as sorted node
/// indices of the indexed block. The derived order is by size, then by
/// indices, which puts `⊆`-smaller sets first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DCSet {
    alpha: Ordinal,
    level: u32,
    members: Vec<usize>,
}

impl DCSet {
    pub(crate) fn from_indices(alpha: Ordinal, level: u32, mut members: Vec<usize>) -> DCSet {
        members.sort_unstable();
        members.dedup();
        DCSet { alpha, level, members }
    }

    /// Validates a node set as a downward closed subset of `S_alpha(level)`.
    pub fn from_nodes(alpha: Ordinal, level: u32, nodes: &[SNode]) -> Result<DCSet> {
        let block = indexed(alpha, level)?;
        let mut members = Vec::with_capacity(nodes.len());
        for s in nodes {
            let i = block
                .index_of(s)
                .ok_or_else(|| Error::NotAMember(format!("{s} is not a node of S_{alpha}({level})")))?;
            members.push(i);
        }
        let set = DCSet::from_indices(alpha, level, members);
        if !block.is_downset(&set.members) {
            return Err(Error::InvalidParams("node set is not downward closed".into()));
        }
        Ok(set)
    }

    /// The whole block.
    pub fn full(alpha: Ordinal, level: u32) -> Result<DCSet> {
        let block = indexed(alpha, level)?;
        Ok(DCSet::from_indices(alpha, level, (0..block.len()).collect()))
    }

    /// `{∅}`.
    pub fn root(alpha: Ordinal, level: u32) -> DCSet {
        DCSet::from_indices(alpha, level, vec![0])
    }

    pub fn alpha(&self) -> Ordinal {
        self.alpha
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn block(&self) -> Arc<IndexedBlock> {
        indexed(self.alpha, self.level).expect("validated at construction")
    }

    pub fn nodes(&self) -> Vec<SNode> {
        let b = self.block();
        self.members.iter().map(|&i| b.nodes[i].clone()).collect()
    }

    pub fn is_subset(&self, other: &DCSet) -> bool {
        self.alpha == other.alpha
            && self.level == other.level
            && self.members.iter().all(|x| other.members.binary_search(x).is_ok())
    }

    /// Shape code of the set as an ordered tree.
    pub fn code(&self) -> Vec<Option<u32>> {
        self.block().code(&self.members)
    }
}

impl PartialOrd for DCSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DCSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.alpha, self.level, self.members.len(), &self.members).cmp(&(
            other.alpha,
            other.level,
            other.members.len(),
            &other.members,
        ))
    }
}

impl fmt::Debug for DCSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<String> = self.nodes().iter().map(|s| s.to_string()).collect();
        write!(f, "DC_{}({}){{{}}}", self.alpha, self.level, nodes.join(" "))
    }
}

impl Serialize for DCSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DCSet", 3)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("nodes", &self.nodes())?;
        st.end()
    }
}

/// A partition of a finite domain, as a restricted growth string: `labels[i]`
/// is the class of element `i`, classes numbered by first occurrence.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct EqRelation {
    labels: Vec<u32>,
}

impl EqRelation {
    /// Normalizes arbitrary keys into class labels.
    pub fn from_keys<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> EqRelation {
        let mut seen: HashMap<K, u32> = HashMap::new();
        let labels = keys
            .into_iter()
            .map(|k| {
                let next = seen.len() as u32;
                *seen.entry(k).or_insert(next)
            })
            .collect();
        EqRelation { labels }
    }

    /// From a restricted growth string, which is validated.
    pub fn from_rgs(labels: Vec<u32>) -> Result<EqRelation> {
        let mut max = None::<u32>;
        for &l in &labels {
            let ok = match max {
                None => l == 0,
                Some(m) => l <= m + 1,
            };
            if !ok {
                return Err(Error::InvalidParams("not a restricted growth string".into()));
            }
            max = Some(max.map_or(l, |m| m.max(l)));
        }
        Ok(EqRelation { labels })
    }

    /// From explicit classes of indices into a domain of size `len`.
    pub fn from_classes(len: usize, classes: &[Vec<usize>]) -> Result<EqRelation> {
        let mut key = vec![usize::MAX; len];
        for (c, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidParams("empty class".into()));
            }
            for &i in class {
                if i >= len || key[i] != usize::MAX {
                    return Err(Error::DomainMismatch(format!("index {i} is out of range or repeated")));
                }
                key[i] = c;
            }
        }
        if key.contains(&usize::MAX) {
            return Err(Error::DomainMismatch("classes do not cover the domain".into()));
        }
        Ok(EqRelation::from_keys(key))
    }

    pub fn discrete(len: usize) -> EqRelation {
        EqRelation {
            labels: (0..len as u32).collect(),
        }
    }

    pub fn indiscrete(len: usize) -> EqRelation {
        EqRelation { labels: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn related(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn class_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.class_count()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    /// The relation induced on the listed elements, renumbered in order.
    pub fn restrict(&self, indices: &[usize]) -> EqRelation {
        EqRelation::from_keys(indices.iter().map(|&i| self.labels[i]))
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &EqRelation) -> bool {
        let mut image: HashMap<u32, u32> = HashMap::new();
        self.labels
            .iter()
            .zip(&other.labels)
            .all(|(&a, &b)| *image.entry(a).or_insert(b) == b)
    }
}

impl Serialize for EqRelation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EqRelation", 1)?;
        st.serialize_field("classes", &self.classes())?;
        st.end()
    }
}

/// All of `𝔖_k(n)`: every downward closed subset of `S_k(n)`.
pub fn enumerate_dc_full(k: Ordinal, n: u32) -> Result<Vec<DCSet>> {
    if !k.is_finite() {
        return Err(Error::InfiniteFamily(k));
    }
    let block = indexed(k, n)?;
    let none = vec![None; block.len()];
    let mut out: Vec<DCSet> = block
        .downsets(&none, ENUM_LIMIT)?
        .into_iter()
        .map(|d| DCSet::from_indices(k, n, d))
        .collect();
    out.sort();
    Ok(out)
}

/// `|𝔖_k(n)|` counted on the block without listing it.
pub fn count_dc_full(k: Ordinal, n: u32) -> Result<BigUint> {
    if !k.is_finite() {
        return Err(Error::InfiniteFamily(k));
    }
    Ok(indexed(k, n)?.count_downsets())
}

type DcCache = RwLock<HashMap<(Ordinal, u32, u32), Arc<Vec<DCSet>>>>;

fn dc_cache() -> &'static DcCache {
    static C: OnceLock<DcCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// For each node `x` of `S_alpha(n)`, the child that `iota_u` sends into the
/// same `psi`-fiber as `x`.
fn pulled_back_fibers(small: &IndexedBlock, host: &IndexedBlock, u: &RMember) -> Vec<Option<usize>> {
    let iota = u.iota();
    (0..small.len())
        .map(|x| {
            small.children[x]
                .iter()
                .copied()
                .find(|&c| host.psi[iota[c]] == host.psi[iota[x]])
        })
        .collect()
}

/// `𝔖_alpha(n, m)`: downward closed sets isomorphic to `psi^-1(v)` for a
/// nonempty subtree `v` of some `u` in `R_alpha(n)|T_alpha(m)`.
pub fn enumerate_dc(alpha: Ordinal, n: u32, m: u32) -> Result<Vec<DCSet>> {
    Ok(dc_family(alpha, n, m)?.as_ref().clone())
}

pub(crate) fn dc_family(alpha: Ordinal, n: u32, m: u32) -> Result<Arc<Vec<DCSet>>> {
    if let Some(v) = dc_cache().read().unwrap().get(&(alpha, n, m)) {
        return Ok(v.clone());
    }
    let small = indexed(alpha, n)?;
    let host = indexed(alpha, m)?;
    let mut patterns: HashSet<Vec<Option<usize>>> = HashSet::new();
    for u in r_members(alpha, n, m)?.iter() {
        patterns.insert(pulled_back_fibers(&small, &host, u));
    }
    // Saturated downsets of the pulled-back partition, up to shape.
    let mut codes: HashSet<Vec<Option<u32>>> = HashSet::new();
    for p in &patterns {
        for d in small.downsets(p, ENUM_LIMIT)? {
            codes.insert(small.code(&d));
        }
    }
    let none = vec![None; small.len()];
    let mut out: Vec<DCSet> = small
        .downsets(&none, ENUM_LIMIT)?
        .into_iter()
        .filter(|d| codes.contains(&small.code(d)))
        .map(|d| DCSet::from_indices(alpha, n, d))
        .collect();
    out.sort();
    let out = Arc::new(out);
    dc_cache().write().unwrap().insert((alpha, n, m), out.clone());
    Ok(out)
}

/// The chain of constantly zero functions on `[gamma, alpha]`, `beta <= gamma`,
/// together with `∅`, inside `S_alpha(0)`.
pub fn chain_s_beta(alpha: Ordinal, beta: Ordinal) -> Result<DCSet> {
    if beta > alpha {
        return Err(Error::InvalidParams(format!("chain needs {beta} <= {alpha}")));
    }
    let block = indexed(alpha, 0)?;
    let members = (0..block.len())
        .filter(|&i| {
            let s = &block.nodes[i];
            s.domain_min().is_none_or(|d| d >= beta) && s.segments().iter().all(|g| g.value == 0)
        })
        .collect();
    Ok(DCSet::from_indices(alpha, 0, members))
}

/// `pi_S(u) = psi(iota_u(S))`.
pub fn pi_s(s: &DCSet, u: &RMember) -> Result<Vec<TreeNode>> {
    if u.level() != s.level {
        return Err(Error::LevelMismatch {
            expected: s.level,
            found: u.level(),
        });
    }
    if u.alpha() != s.alpha {
        return Err(Error::InvalidParams(format!("{} and {} differ", u.alpha(), s.alpha)));
    }
    let host = indexed(u.alpha(), u.host())?;
    let iota = u.iota();
    let set: BTreeSet<usize> = s.members.iter().map(|&x| host.psi[iota[x]]).collect();
    Ok(set.into_iter().map(|i| host.tree.nodes[i].clone()).collect())
}

/// `E_S` on `domain`.
pub fn eq_rel_from_s(s: &DCSet, domain: &[RMember]) -> Result<EqRelation> {
    let images = domain.iter().map(|u| pi_s(s, u)).collect::<Result<Vec<_>>>()?;
    Ok(EqRelation::from_keys(images))
}

/// The least member of `𝔖_alpha(n, m)` containing `s` and inducing the same
/// relation on `R_alpha(n)|T_alpha(m)`.
pub fn restrict_dc(s: &DCSet, m: u32) -> Result<Option<DCSet>> {
    let domain = r_members(s.alpha, s.level, m)?;
    let target = eq_rel_from_s(s, &domain)?;
    for cand in dc_family(s.alpha, s.level, m)?.iter() {
        if s.is_subset(cand) && eq_rel_from_s(cand, &domain)? == target {
            return Ok(Some(cand.clone()));
        }
    }
    Ok(None)
}

/// `N_k(n)`, the number of canonical relations on `R_k(n)`.
pub fn count_canonical(k: u32, n: u32) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::InvalidParams("count_canonical needs k >= 1".into()));
    }
    let mut memo = HashMap::new();
    Ok(count_rec(k, n, &mut memo))
}

fn count_rec(k: u32, n: u32, memo: &mut HashMap<(u32, u32), BigUint>) -> BigUint {
    if let Some(v) = memo.get(&(k, n)) {
        return v.clone();
    }
    let v = if k == 1 {
        (BigUint::from(1u32) << (n as usize + 1)) + 1u32
    } else if n < k {
        count_rec(k - 1, n, memo) + 1u32
    } else {
        let range = child_range(Ordinal::finite(k - 1), n);
        let prod: BigUint = range.map(|j| count_rec(k - 1, j, memo)).product();
        prod + 1u32
    };
    memo.insert((k, n), v.clone());
    v
}

/// `prod_{i<n} N_k(i)`, the number of canonical relations on `AR^n_k`.
pub fn count_canonical_ar(k: u32, n: u32) -> Result<BigUint> {
    (0..n).map(|i| count_canonical(k, i)).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::enumerate_r;

    fn o(r: u32) -> Ordinal {
        Ordinal::finite(r)
    }

    #[test]
    fn counts_from_the_recursion() {
        assert_eq!(count_canonical(1, 3).unwrap(), BigUint::from(17u32));
        assert_eq!(count_canonical(2, 2).unwrap(), BigUint::from(154u32));
        assert_eq!(count_canonical(2, 0).unwrap(), BigUint::from(4u32));
        assert_eq!(count_canonical(2, 1).unwrap(), BigUint::from(6u32));
        assert_eq!(count_canonical_ar(2, 2).unwrap(), BigUint::from(24u32));
        assert_eq!(count_canonical_ar(2, 3).unwrap(), BigUint::from(3696u32));
        assert_eq!(count_canonical_ar(1, 2).unwrap(), BigUint::from(15u32));
        assert!(count_canonical(0, 1).is_err());
    }

    #[test]
    fn enumeration_agrees_with_recursion() {
        for k in 1..=3 {
            for n in 0..=3 {
                let want = count_canonical(k, n).unwrap();
                assert_eq!(count_dc_full(o(k), n).unwrap(), want, "N_{k}({n})");
                if want <= BigUint::from(5000u32) {
                    assert_eq!(BigUint::from(enumerate_dc_full(o(k), n).unwrap().len()), want);
                }
            }
        }
        assert!(matches!(enumerate_dc_full(Ordinal::OMEGA, 1), Err(Error::InfiniteFamily(_))));
    }

    #[test]
    fn realizable_families() {
        assert_eq!(enumerate_dc(o(1), 1, 2).unwrap().len(), 5);
        assert_eq!(enumerate_dc(o(1), 1, 3).unwrap().len(), 5);
        // Block 0 of T_1 is a single branch: only {∅} and the whole chain.
        let zero = enumerate_dc(o(1), 0, 0).unwrap();
        assert_eq!(zero, vec![DCSet::root(o(1), 0), DCSet::full(o(1), 0).unwrap()]);
        assert_eq!(enumerate_dc(o(2), 2, 4).unwrap().len(), 154);
    }

    #[test]
    fn realizable_families_grow_with_the_host() {
        for (a, n) in [(1, 0), (1, 1), (2, 1), (2, 0)] {
            let mut prev: Option<Vec<DCSet>> = None;
            for m in n..n + 3 {
                let cur = enumerate_dc(o(a), n, m).unwrap();
                if let Some(p) = &prev {
                    assert!(p.iter().all(|s| cur.contains(s)));
                }
                prev = Some(cur);
            }
        }
    }

    #[test]
    fn chains() {
        let b = indexed(o(1), 0).unwrap();
        let c11 = chain_s_beta(o(1), o(1)).unwrap();
        assert_eq!(c11.nodes(), vec![SNode::empty(), SNode::from_values(1, &[0])]);
        assert_eq!(chain_s_beta(o(1), o(0)).unwrap().len(), b.len());
        let c22 = chain_s_beta(o(2), o(2)).unwrap();
        assert_eq!(c22.nodes(), vec![SNode::empty(), SNode::from_values(2, &[0])]);
        assert!(chain_s_beta(o(1), o(2)).is_err());
    }

    #[test]
    fn projections() {
        let u = enumerate_r(o(1), 1, 2).unwrap();
        for v in &u {
            assert_eq!(pi_s(&DCSet::root(o(1), 1), v).unwrap(), vec![Vec::<u32>::new()]);
            assert_eq!(pi_s(&DCSet::full(o(1), 1).unwrap(), v).unwrap(), v.nodes().to_vec());
        }
        // The leftmost 3-chain of S_1(1), sent to the leftmost branch.
        let chain = DCSet::from_nodes(
            o(1),
            1,
            &[SNode::empty(), SNode::from_values(1, &[1]), SNode::from_values(0, &[1, 1])],
        )
        .unwrap();
        let v = u.iter().find(|v| v.contains(&[2, 3]) && v.contains(&[2, 5])).unwrap();
        assert_eq!(pi_s(&chain, v).unwrap(), vec![vec![], vec![2], vec![2, 3]]);
        let wrong = enumerate_r(o(1), 0, 2).unwrap();
        assert!(matches!(pi_s(&chain, &wrong[0]), Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn projections_are_inner_and_relations_behave() {
        for (a, n, m) in [(1, 1, 3), (2, 1, 3), (2, 2, 3)] {
            let domain = enumerate_r(o(a), n, m).unwrap();
            for s in enumerate_dc_full(o(a), n).unwrap() {
                for u in &domain {
                    let img = pi_s(&s, u).unwrap();
                    assert!(img.iter().all(|t| u.contains(t)));
                }
                let e = eq_rel_from_s(&s, &domain).unwrap();
                assert_eq!(e.len(), domain.len());
                assert_eq!(EqRelation::from_rgs(e.labels().to_vec()).unwrap(), e);
            }
            let root = eq_rel_from_s(&DCSet::root(o(a), n), &domain).unwrap();
            assert_eq!(root.class_count(), 1);
            let full = eq_rel_from_s(&DCSet::full(o(a), n).unwrap(), &domain).unwrap();
            assert_eq!(full, EqRelation::discrete(domain.len()));
        }
    }

    /// Projections of proper sub-blocks are members of lower levels.
    #[test]
    fn projections_of_lower_blocks_are_members() {
        let domain = enumerate_r(o(2), 2, 3).unwrap();
        for s in enumerate_dc_full(o(2), 2).unwrap() {
            for lower in 0..2 {
                if s.code() == DCSet::full(o(2), lower).unwrap().code() {
                    for u in &domain {
                        let img = pi_s(&s, u).unwrap();
                        assert!(crate::space::is_r_member(o(2), lower, u.host(), &img).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn distinct_sets_give_distinct_relations_somewhere() {
        for (a, n) in [(1, 0), (1, 1), (2, 0), (2, 1)] {
            let all = enumerate_dc_full(o(a), n).unwrap();
            let mut domain: Vec<RMember> = Vec::new();
            for m in n..n + 3 {
                domain.extend(enumerate_r(o(a), n, m).unwrap());
            }
            let rels: Vec<EqRelation> = all.iter().map(|s| eq_rel_from_s(s, &domain).unwrap()).collect();
            let distinct: HashSet<&EqRelation> = rels.iter().collect();
            assert_eq!(distinct.len(), all.len(), "alpha {a}, n {n}");
        }
    }

    #[test]
    fn restriction() {
        for m in 1..4 {
            let full = DCSet::full(o(1), 1).unwrap();
            assert_eq!(restrict_dc(&full, m).unwrap(), Some(full.clone()));
        }
        let domain = enumerate_r(o(1), 0, 0).unwrap();
        let c = chain_s_beta(o(1), o(1)).unwrap();
        let r = restrict_dc(&c, 0).unwrap().unwrap();
        assert!(c.is_subset(&r));
        assert!(enumerate_dc(o(1), 0, 0).unwrap().contains(&r));
        assert_eq!(eq_rel_from_s(&r, &domain).unwrap(), eq_rel_from_s(&c, &domain).unwrap());
        for (a, n, m) in [(2, 1, 2), (2, 2, 3), (1, 2, 3)] {
            let domain = enumerate_r(o(a), n, m).unwrap();
            for s in enumerate_dc_full(o(a), n).unwrap() {
                let r = restrict_dc(&s, m).unwrap().expect("a realizable superset exists");
                assert!(s.is_subset(&r));
                assert_eq!(eq_rel_from_s(&r, &domain).unwrap(), eq_rel_from_s(&s, &domain).unwrap());
            }
        }
    }

    #[test]
    fn relation_helpers() {
        let e = EqRelation::from_classes(4, &[vec![2], vec![0, 3], vec![1]]).unwrap();
        assert_eq!(e.labels(), &[0, 1, 2, 0]);
        assert_eq!(e.classes(), vec![vec![0, 3], vec![1], vec![2]]);
        assert!(EqRelation::discrete(4).refines(&e));
        assert!(e.refines(&EqRelation::indiscrete(4)));
        assert!(!e.refines(&EqRelation::discrete(4)));
        assert_eq!(e.restrict(&[1, 3]), EqRelation::discrete(2));
        assert!(EqRelation::from_classes(3, &[vec![0, 1]]).is_err());
        assert!(EqRelation::from_rgs(vec![0, 2]).is_err());
    }
}
