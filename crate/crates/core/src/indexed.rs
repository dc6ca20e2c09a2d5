//! Finite blocks as indexed ordered trees: the common ground of the
//! combinatorial layers. Node `i` is the `i`-th node in lexicographic order,
//! which is a preorder of the restriction tree.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::ordinals::Ordinal;
use crate::structures::{build_s, build_t, psi, SNode, TreeBlock};

#[derive(Debug)]
pub struct IndexedBlock {
    pub alpha: Ordinal,
    pub n: u32,
    pub nodes: Vec<SNode>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Index into `tree.nodes` of `psi(nodes[i])`.
    pub psi: Vec<usize>,
    /// The child of `i` with the same projection, if any. Fibers are chains,
    /// so there is at most one.
    pub same_fiber_child: Vec<Option<usize>>,
    pub tree: Arc<TreeBlock>,
    index: HashMap<SNode, usize>,
}

impl IndexedBlock {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, s: &SNode) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Shape of a downset: parent positions in the induced preorder. Two
    /// downsets are isomorphic as ordered trees iff their codes agree.
    pub fn code(&self, members: &[usize]) -> Vec<Option<u32>> {
        let pos: HashMap<usize, u32> = members.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        members
            .iter()
            .map(|&x| self.parent[x].map(|p| pos[&p]))
            .collect()
    }

    pub fn full_code(&self) -> Vec<Option<u32>> {
        self.parent.iter().map(|p| p.map(|x| x as u32)).collect()
    }

    pub fn is_downset(&self, members: &[usize]) -> bool {
        let set: BTreeSet<usize> = members.iter().copied().collect();
        set.contains(&0) && set.iter().all(|&x| self.parent[x].is_none_or(|p| set.contains(&p)))
    }

    /// Number of downsets containing the root: a product over children.
    pub fn count_downsets(&self) -> BigUint {
        fn below(b: &IndexedBlock, x: usize) -> BigUint {
            b.children[x]
                .iter()
                .map(|&c| below(b, c) + 1u32)
                .product()
        }
        below(self, 0)
    }

    /// All downsets (sorted member lists), with `required[x]` forced in
    /// whenever `x` is. Errors when more than `cap` would be produced.
    pub fn downsets(&self, required: &[Option<usize>], cap: u64) -> Result<Vec<Vec<usize>>> {
        let mut count: u64 = 0;
        let out = self.downsets_from(0, required, cap, &mut count)?;
        let mut out: Vec<Vec<usize>> = out
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                v
            })
            .collect();
        out.sort();
        Ok(out)
    }

    fn downsets_from(
        &self,
        x: usize,
        required: &[Option<usize>],
        cap: u64,
        count: &mut u64,
    ) -> Result<Vec<Vec<usize>>> {
        let mut acc: Vec<Vec<usize>> = vec![vec![x]];
        for &c in &self.children[x] {
            let sub = self.downsets_from(c, required, cap, count)?;
            let forced = required[x] == Some(c);
            let mut next = Vec::new();
            for a in &acc {
                if !forced {
                    next.push(a.clone());
                }
                for s in &sub {
                    let mut v = a.clone();
                    v.extend_from_slice(s);
                    next.push(v);
                }
                if next.len() as u64 > cap {
                    return Err(Error::Infeasible {
                        needed: format!("more than {cap} downsets"),
                        budget: cap,
                    });
                }
            }
            acc = next;
        }
        *count = count.saturating_add(acc.len() as u64);
        Ok(acc)
    }

    /// Ordered embeddings of this block's tree into `dst`, root to root, as
    /// maps from node indices. With `saturated`, images are unions of
    /// `psi`-fibers of `dst`.
    pub fn embeddings(&self, dst: &IndexedBlock, saturated: bool, cap: u64) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut map = vec![usize::MAX; self.len()];
        map[0] = 0;
        let ok = self.embed_rec(dst, vec![(0, 0)], saturated, &mut map, &mut out, cap)?;
        if !ok {
            return Err(Error::Infeasible {
                needed: format!("more than {cap} embeddings"),
                budget: cap,
            });
        }
        Ok(out)
    }

    /// `pending`: mapped pairs whose children are still to be placed.
    fn embed_rec(
        &self,
        dst: &IndexedBlock,
        mut pending: Vec<(usize, usize)>,
        saturated: bool,
        map: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: u64,
    ) -> Result<bool> {
        let Some((x, y)) = pending.pop() else {
            out.push(map.clone());
            return Ok(out.len() as u64 <= cap);
        };
        let xs = &self.children[x];
        let ys = &dst.children[y];
        let must = if saturated { dst.same_fiber_child[y] } else { None };
        // Choose an increasing sequence of ys for xs.
        let mut choice = Vec::with_capacity(xs.len());
        self.choose(dst, xs, ys, 0, must, &mut choice, &pending, saturated, map, out, cap)
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        &self,
        dst: &IndexedBlock,
        xs: &[usize],
        ys: &[usize],
        from: usize,
        must: Option<usize>,
        choice: &mut Vec<usize>,
        pending: &[(usize, usize)],
        saturated: bool,
        map: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: u64,
    ) -> Result<bool> {
        if choice.len() == xs.len() {
            if let Some(req) = must {
                if !choice.contains(&req) {
                    return Ok(true);
                }
            }
            let mut next = pending.to_vec();
            for (&a, &b) in xs.iter().zip(choice.iter()) {
                map[a] = b;
                next.push((a, b));
            }
            return self.embed_rec(dst, next, saturated, map, out, cap);
        }
        let left = xs.len() - choice.len();
        for j in from..ys.len() {
            if ys.len() - j < left {
                break;
            }
            choice.push(ys[j]);
            let go = self.choose(dst, xs, ys, j + 1, must, choice, pending, saturated, map, out, cap)?;
            choice.pop();
            if !go {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Number of ordered embeddings into `dst` (not saturated).
    pub fn count_embeddings(&self, dst: &IndexedBlock) -> BigUint {
        let mut memo = HashMap::new();
        self.count_rec(dst, 0, 0, &mut memo)
    }

    fn count_rec(
        &self,
        dst: &IndexedBlock,
        x: usize,
        y: usize,
        memo: &mut HashMap<(usize, usize), BigUint>,
    ) -> BigUint {
        if let Some(v) = memo.get(&(x, y)) {
            return v.clone();
        }
        let xs = &self.children[x];
        let ys = &dst.children[y];
        // ways[i][j]: place the first i children of x among the first j of y.
        let mut ways = vec![vec![BigUint::from(0u32); ys.len() + 1]; xs.len() + 1];
        ways[0].fill(BigUint::from(1u32));
        for i in 1..=xs.len() {
            for j in 1..=ys.len() {
                let skip = ways[i][j - 1].clone();
                let take = &ways[i - 1][j - 1] * self.count_rec(dst, xs[i - 1], ys[j - 1], memo);
                ways[i][j] = skip + take;
            }
        }
        let v = ways[xs.len()][ys.len()].clone();
        memo.insert((x, y), v.clone());
        v
    }
}

type Table = RwLock<HashMap<(Ordinal, u32), Arc<IndexedBlock>>>;

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(Default::default)
}

/// The indexed form of `S_alpha(n)`; finite `alpha` only.
pub fn indexed(alpha: Ordinal, n: u32) -> Result<Arc<IndexedBlock>> {
    if !alpha.is_finite() {
        return Err(Error::InfiniteBlock(alpha));
    }
    if let Some(b) = table().read().unwrap().get(&(alpha, n)) {
        return Ok(b.clone());
    }
    let block = build_s(alpha, n)?;
    let tree = build_t(alpha, n)?;
    let nodes = block.nodes().to_vec();
    let index: HashMap<SNode, usize> = nodes.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let mut parent = vec![None; nodes.len()];
    let mut children = vec![Vec::new(); nodes.len()];
    for (i, s) in nodes.iter().enumerate() {
        if let Some(p) = s.parent() {
            let p = index[&p];
            parent[i] = Some(p);
            children[p].push(i);
        }
    }
    let mut psi_idx = Vec::with_capacity(nodes.len());
    for s in &nodes {
        let t = psi(alpha, s)?;
        psi_idx.push(tree.index_of(&t).expect("psi lands in the tree block"));
    }
    let same_fiber_child = (0..nodes.len())
        .map(|i| children[i].iter().copied().find(|&c| psi_idx[c] == psi_idx[i]))
        .collect();
    let b = Arc::new(IndexedBlock {
        alpha,
        n,
        nodes,
        parent,
        children,
        psi: psi_idx,
        same_fiber_child,
        tree,
        index,
    });
    Ok(table().write().unwrap().entry((alpha, n)).or_insert(b).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(r: u32) -> Ordinal {
        Ordinal::finite(r)
    }

    #[test]
    fn shape_of_small_blocks() {
        let b = indexed(o(1), 1).unwrap();
        assert_eq!(b.children[0], vec![1]);
        assert_eq!(b.children[1], vec![2, 3]);
        assert_eq!(b.psi, vec![0, 1, 2, 3]);
        let c = indexed(o(1), 0).unwrap();
        assert_eq!(c.same_fiber_child, vec![None, Some(2), None]);
        assert!(matches!(indexed(Ordinal::OMEGA, 0), Err(Error::InfiniteBlock(_))));
    }

    #[test]
    fn downset_enumeration_matches_count() {
        for (a, n) in [(1, 0), (1, 3), (2, 1), (2, 2), (3, 1)] {
            let b = indexed(o(a), n).unwrap();
            let none = vec![None; b.len()];
            let all = b.downsets(&none, 1 << 20).unwrap();
            assert_eq!(BigUint::from(all.len()), b.count_downsets());
            assert!(all.iter().all(|d| b.is_downset(d)));
            let distinct: BTreeSet<_> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
        }
    }

    #[test]
    fn embedding_count_matches_enumeration() {
        for (a, n, m) in [(1, 0, 3), (1, 1, 3), (2, 2, 3), (2, 1, 3)] {
            let src = indexed(o(a), n).unwrap();
            let dst = indexed(o(a), m).unwrap();
            let all = src.embeddings(&dst, false, 1 << 22).unwrap();
            assert_eq!(BigUint::from(all.len()), src.count_embeddings(&dst));
            for e in &all {
                let mut img: Vec<usize> = e.clone();
                img.sort();
                assert!(dst.is_downset(&img));
                assert_eq!(dst.code(&img), src.full_code());
            }
        }
    }
}
