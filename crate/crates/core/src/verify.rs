//! Exhaustive searches for the finite pigeonhole and canonization theorems,
//! and the block containment properties of the construction.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{dc_family, enumerate_dc_full, eq_rel_from_s, pi_s, DCSet, EqRelation};
use crate::error::{Error, Result};
use crate::ordinals::Ordinal;
use crate::space::{enumerate_ar, le_fin, r_members, FiniteApprox, RMember};
use crate::structures::{build_s, covers, maximal_through, SNode};

/// Default cap on the number of relations or colourings a search visits.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Restricted growth strings of length `n`, in lexicographic order.
#[derive(Clone, Debug)]
pub struct SetPartitions {
    labels: Vec<u32>,
    /// `max[i]`: largest label among `labels[..=i]`.
    max: Vec<u32>,
    started: bool,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        SetPartitions {
            labels: vec![0; n],
            max: vec![0; n],
            started: false,
            done: false,
        }
    }
}

impl Iterator for SetPartitions {
    type Item = EqRelation;

    fn next(&mut self) -> Option<EqRelation> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(EqRelation::from_rgs(self.labels.clone()).expect("valid"));
        }
        let n = self.labels.len();
        let Some(i) = (1..n).rev().find(|&i| self.labels[i] <= self.max[i - 1]) else {
            self.done = true;
            return None;
        };
        self.labels[i] += 1;
        self.max[i] = self.max[i - 1].max(self.labels[i]);
        for j in i + 1..n {
            self.labels[j] = 0;
            self.max[j] = self.max[i];
        }
        Some(EqRelation::from_rgs(self.labels.clone()).expect("valid"))
    }
}

/// The Bell number `B(n)`.
pub fn bell(n: usize) -> BigUint {
    let mut row = vec![BigUint::from(1u32)];
    for _ in 0..n {
        let mut next = vec![row.last().unwrap().clone()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0].clone()
}

fn over_budget(what: &str, needed: BigUint, budget: u64) -> Result<()> {
    if needed > BigUint::from(budget) {
        return Err(Error::Infeasible {
            needed: format!("{needed} {what}"),
            budget,
        });
    }
    Ok(())
}

/// The least `S` of `𝔖_alpha(n, m)` with `E_S = rel` on `R_alpha(n)|T_alpha(m)`.
pub fn is_canonical_relation(alpha: Ordinal, n: u32, m: u32, rel: &EqRelation) -> Result<Option<DCSet>> {
    let domain = r_members(alpha, n, m)?;
    if rel.len() != domain.len() {
        return Err(Error::DomainMismatch(format!(
            "relation on {} elements, domain has {}",
            rel.len(),
            domain.len()
        )));
    }
    for s in dc_family(alpha, n, m)?.iter() {
        if eq_rel_from_s(s, &domain)? == *rel {
            return Ok(Some(s.clone()));
        }
    }
    Ok(None)
}

/// Precomputed witnesses for one `(alpha, n, k, m)`: for each candidate `y`,
/// the relations `E_S` restricted to the members below `y`.
pub struct BlockCanonizer {
    pub domain: Vec<RMember>,
    pub ys: Vec<RMember>,
    pub family: Vec<DCSet>,
    /// Domain indices below each `y`.
    pub below: Vec<Vec<usize>>,
    table: Vec<HashMap<EqRelation, usize>>,
}

impl BlockCanonizer {
    pub fn new(alpha: Ordinal, n: u32, k: u32, m: u32) -> Result<Self> {
        if !(n <= k && k <= m) {
            return Err(Error::InvalidParams(format!("need n <= k <= m, got {n}, {k}, {m}")));
        }
        let domain = r_members(alpha, n, m)?.as_ref().clone();
        let ys = r_members(alpha, k, m)?.as_ref().clone();
        let family = enumerate_dc_full(alpha, n)?;
        let rels = family
            .iter()
            .map(|s| eq_rel_from_s(s, &domain))
            .collect::<Result<Vec<_>>>()?;
        let below: Vec<Vec<usize>> = ys
            .iter()
            .map(|y| (0..domain.len()).filter(|&i| domain[i].is_subtree_of(y)).collect())
            .collect();
        let table = below
            .iter()
            .map(|b| {
                let mut t = HashMap::new();
                for (si, r) in rels.iter().enumerate() {
                    t.entry(r.restrict(b)).or_insert(si);
                }
                t
            })
            .collect();
        Ok(BlockCanonizer {
            domain,
            ys,
            family,
            below,
            table,
        })
    }

    /// Lex-least `y`, then least `S`, with `rel` restricted below `y` equal to `E_S`.
    pub fn witness(&self, rel: &EqRelation) -> Option<(usize, usize)> {
        self.below.iter().enumerate().find_map(|(yi, b)| {
            let r = rel.restrict(b);
            self.table[yi].get(&r).map(|&si| (yi, si))
        })
    }
}

/// A witness `(y, S)` of the finite canonization theorem for `rel`.
pub fn canonize_block(
    alpha: Ordinal,
    n: u32,
    k: u32,
    m: u32,
    rel: &EqRelation,
) -> Result<Option<(RMember, DCSet)>> {
    let c = BlockCanonizer::new(alpha, n, k, m)?;
    if rel.len() != c.domain.len() {
        return Err(Error::DomainMismatch(format!(
            "relation on {} elements, domain has {}",
            rel.len(),
            c.domain.len()
        )));
    }
    Ok(c.witness(rel).map(|(y, s)| (c.ys[y].clone(), c.family[s].clone())))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    /// The least accepted `m`, if any up to the bound.
    pub m: Option<u32>,
    /// Relations or colourings examined over all candidate `m`.
    pub witnesses_checked: u64,
}

/// Least `m <= m_max` at which every relation on `R_alpha(n)|T_alpha(m)` has
/// a canonizing witness at level `k`.
pub fn fct_block_minimal_m(alpha: Ordinal, n: u32, k: u32, m_max: u32, budget: u64) -> Result<SearchOutcome> {
    let mut checked = 0;
    for m in k..=m_max {
        let c = BlockCanonizer::new(alpha, n, k, m)?;
        let d = c.domain.len();
        over_budget("partitions", bell(d), budget)?;
        let all: Vec<EqRelation> = SetPartitions::new(d).collect();
        let fails = all.par_iter().position_first(|r| c.witness(r).is_none());
        checked += fails.map_or(all.len(), |i| i + 1) as u64;
        if fails.is_none() {
            return Ok(SearchOutcome { m: Some(m), witnesses_checked: checked });
        }
    }
    Ok(SearchOutcome { m: None, witnesses_checked: checked })
}

/// Least `m <= m_max` at which every 2-colouring of `R_alpha(n)|T_alpha(m)`
/// is monochromatic below some `y` of level `k`.
pub fn pigeonhole_minimal_m(alpha: Ordinal, n: u32, k: u32, m_max: u32, budget: u64) -> Result<SearchOutcome> {
    if n > k {
        return Err(Error::InvalidParams(format!("need n <= k, got {n} > {k}")));
    }
    let mut checked = 0;
    for m in k..=m_max {
        let domain = r_members(alpha, n, m)?;
        let d = domain.len();
        if d >= 64 {
            return Err(Error::Infeasible {
                needed: format!("2^{d} colourings"),
                budget,
            });
        }
        over_budget("colourings", BigUint::from(1u32) << d, budget)?;
        let masks: Vec<u64> = r_members(alpha, k, m)?
            .iter()
            .map(|y| {
                (0..d)
                    .filter(|&i| domain[i].is_subtree_of(y))
                    .fold(0u64, |acc, i| acc | (1 << i))
            })
            .collect();
        let total = 1u64 << d;
        let mono = |c: u64| masks.iter().any(|&b| c & b == 0 || c & b == b);
        let fails = (0..total as usize).into_par_iter().position_first(|c| !mono(c as u64));
        checked += fails.map_or(total, |i| i as u64 + 1);
        if fails.is_none() {
            return Ok(SearchOutcome { m: Some(m), witnesses_checked: checked });
        }
    }
    Ok(SearchOutcome { m: None, witnesses_checked: checked })
}

/// Per level `i < n`, the `pi_S` class of `b(i)` for every `S` of `𝔖(i)`.
struct ArKeys {
    families: Vec<Vec<DCSet>>,
    /// `keys[i][s][b]`
    keys: Vec<Vec<Vec<u32>>>,
}

impl ArKeys {
    fn new(alpha: Ordinal, n: u32, domain: &[FiniteApprox]) -> Result<Self> {
        let mut families = Vec::new();
        let mut keys = Vec::new();
        for i in 0..n as usize {
            let fam = enumerate_dc_full(alpha, i as u32)?;
            let mut per_s = Vec::with_capacity(fam.len());
            for s in &fam {
                let mut ids: HashMap<Vec<Vec<u32>>, u32> = HashMap::new();
                let mut row = Vec::with_capacity(domain.len());
                for b in domain {
                    let img = pi_s(s, &b.blocks[i])?;
                    let next = ids.len() as u32;
                    row.push(*ids.entry(img).or_insert(next));
                }
                per_s.push(row);
            }
            families.push(fam);
            keys.push(per_s);
        }
        Ok(ArKeys { families, keys })
    }

    fn product(&self, choice: &[usize], among: &[usize]) -> EqRelation {
        EqRelation::from_keys(
            among
                .iter()
                .map(|&b| choice.iter().enumerate().map(|(i, &s)| self.keys[i][s][b]).collect::<Vec<u32>>()),
        )
    }
}

/// Visits canonizing witnesses `(a, S(0..n))` for `rel` on `AR^n_alpha`
/// below hosts `< m`, `a` ranging over `AR^{k_prime}`, in order, until the
/// visitor returns `true`. Returns the number of combinations examined.
fn ar_witnesses(
    alpha: Ordinal,
    n: u32,
    m: u32,
    k_prime: u32,
    rel: &EqRelation,
    budget: u64,
    mut visit: impl FnMut(&FiniteApprox, &[DCSet]) -> Result<bool>,
) -> Result<u64> {
    if n == 0 || k_prime < n {
        return Err(Error::InvalidParams(format!("need 1 <= n <= k', got n = {n}, k' = {k_prime}")));
    }
    let domain = enumerate_ar(alpha, n, m)?;
    if rel.len() != domain.len() {
        return Err(Error::DomainMismatch(format!(
            "relation on {} elements, domain has {}",
            rel.len(),
            domain.len()
        )));
    }
    let keys = ArKeys::new(alpha, n, &domain)?;
    let mut examined = 0u64;
    for a in enumerate_ar(alpha, k_prime, m)? {
        let below: Vec<usize> = (0..domain.len()).filter(|&b| le_fin(&domain[b], &a)).collect();
        let target = rel.restrict(&below);
        // Each factor must be refined by the target.
        let cands: Vec<Vec<usize>> = (0..n as usize)
            .map(|i| {
                (0..keys.families[i].len())
                    .filter(|&s| target.refines(&EqRelation::from_keys(below.iter().map(|&b| keys.keys[i][s][b]))))
                    .collect()
            })
            .collect();
        if cands.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; n as usize];
        loop {
            examined += 1;
            if examined > budget {
                return Err(Error::Infeasible {
                    needed: format!("more than {budget} block choices"),
                    budget,
                });
            }
            let choice: Vec<usize> = idx.iter().enumerate().map(|(i, &j)| cands[i][j]).collect();
            if keys.product(&choice, &below) == target {
                let s: Vec<DCSet> = choice.iter().enumerate().map(|(i, &j)| keys.families[i][j].clone()).collect();
                if visit(&a, &s)? {
                    return Ok(examined);
                }
            }
            // Odometer, last level fastest.
            let mut i = n as usize;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < cands[i].len() {
                    break;
                }
                idx[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
    }
    Ok(examined)
}

/// A witness `a` of `AR^{k_prime}` and blockwise sets `S(0..n)` with `rel`
/// equal to the product relation on the approximations `<=_fin a`.
pub fn canonize_ar(
    alpha: Ordinal,
    n: u32,
    m: u32,
    k_prime: u32,
    rel: &EqRelation,
    budget: u64,
) -> Result<Option<(FiniteApprox, Vec<DCSet>)>> {
    let mut found = None;
    ar_witnesses(alpha, n, m, k_prime, rel, budget, |a, s| {
        found = Some((a.clone(), s.to_vec()));
        Ok(true)
    })?;
    Ok(found)
}

/// Sequences `x(n0..n1)` with `x(i)` in `R_alpha(i)|T_alpha(h_i)`, hosts
/// strictly increasing and below `m`.
pub fn enumerate_segments(alpha: Ordinal, n0: u32, n1: u32, m: u32) -> Result<Vec<Vec<RMember>>> {
    fn go(
        alpha: Ordinal,
        i: u32,
        n1: u32,
        min_host: u32,
        m: u32,
        cur: &mut Vec<RMember>,
        out: &mut Vec<Vec<RMember>>,
    ) -> Result<()> {
        if i == n1 {
            out.push(cur.clone());
            return Ok(());
        }
        for h in min_host.max(i)..m {
            for u in r_members(alpha, i, h)?.iter() {
                cur.push(u.clone());
                go(alpha, i + 1, n1, h + 1, m, cur, out)?;
                cur.pop();
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(alpha, n0, n1, 0, m, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// `x <= y` for segments: each `x(i)` below some `y(j_i)`, `j_i` increasing.
fn segment_below(x: &[RMember], y: &[RMember]) -> bool {
    let mut j = 0;
    for u in x {
        match y[j..].iter().position(|v| u.is_subtree_of(v)) {
            Some(p) => j += p + 1,
            None => return false,
        }
    }
    true
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentWitness {
    /// `y(k0..k1)`.
    pub y: Vec<RMember>,
    /// `S(n0..n1)`.
    pub s: Vec<DCSet>,
}

/// Canonization on a segment `R_alpha[n0, n1)`, by reduction to the
/// approximation canonizer on `AR^{n1}` with witnesses in `AR^{k1}`.
#[allow(clippy::too_many_arguments)]
pub fn canonize_segment(
    alpha: Ordinal,
    n0: u32,
    n1: u32,
    k0: u32,
    k1: u32,
    m: u32,
    rel: &EqRelation,
    budget: u64,
) -> Result<Option<SegmentWitness>> {
    if !(n0 < n1 && k0 >= n0 && k1 >= k0 && k1 - k0 >= n1 - n0) {
        return Err(Error::InvalidParams(format!(
            "need n0 < n1, k0 >= n0, k1 - k0 >= n1 - n0; got {n0}, {n1}, {k0}, {k1}"
        )));
    }
    let segments = enumerate_segments(alpha, n0, n1, m)?;
    if rel.len() != segments.len() {
        return Err(Error::DomainMismatch(format!(
            "relation on {} elements, domain has {}",
            rel.len(),
            segments.len()
        )));
    }
    let index: HashMap<&[RMember], usize> = segments.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let lifted = EqRelation::from_keys(
        enumerate_ar(alpha, n1, m)?
            .iter()
            .map(|a| rel.labels()[index[&a.blocks[n0 as usize..]]]),
    );
    let mut found = None;
    ar_witnesses(alpha, n1, m, k1, &lifted, budget, |c, s| {
        let y = &c.blocks[k0 as usize..];
        let below: Vec<usize> = (0..segments.len()).filter(|&i| segment_below(&segments[i], y)).collect();
        let s_seg = &s[n0 as usize..];
        let mut keys = Vec::with_capacity(below.len());
        for &i in &below {
            let key = segments[i]
                .iter()
                .zip(s_seg)
                .map(|(u, st)| pi_s(st, u))
                .collect::<Result<Vec<_>>>()?;
            keys.push(key);
        }
        if EqRelation::from_keys(keys) == rel.restrict(&below) {
            found = Some(SegmentWitness {
                y: y.to_vec(),
                s: s_seg.to_vec(),
            });
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok(found)
}

/// Does every maximal function of `S_gamma(l)` extend to one of `S_beta(m)`?
pub fn dagger_holds(gamma: Ordinal, beta: Ordinal, l: u32, m: u32) -> Result<bool> {
    if gamma == beta {
        return Ok(l == m);
    }
    let through = maximal_through(beta, m, gamma, l)?;
    let restricted: HashSet<SNode> = through.iter().map(|f| f.restrict_to(gamma)).collect();
    Ok(build_s(gamma, l)?.maximal().iter().all(|g| restricted.contains(g)))
}

/// `T_gamma(l) ⊆ tau_{gamma,beta}'' T_beta(m)`.
pub fn ddagger_holds(gamma: Ordinal, beta: Ordinal, l: u32, m: u32) -> Result<bool> {
    if gamma == beta {
        return Ok(l == m);
    }
    covers(gamma, l, beta, m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DaggerRow {
    pub l: u32,
    pub dagger_m: Option<u32>,
    pub ddagger_m: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DaggerReport {
    pub gamma: Ordinal,
    pub beta: Ordinal,
    pub rows: Vec<DaggerRow>,
}

impl DaggerReport {
    pub fn violations(&self) -> Vec<u32> {
        self.rows
            .iter()
            .filter(|r| r.dagger_m.is_none() || r.ddagger_m.is_none())
            .map(|r| r.l)
            .collect()
    }
}

/// Search bound for `m` in the containment checks, relative to `l`.
pub const DAGGER_SLACK: u32 = 8;

/// For each `l` in `[l_lo, l_hi]`, the least `m <= l + DAGGER_SLACK` with
/// each containment.
pub fn check_dagger(gamma: Ordinal, beta: Ordinal, l_lo: u32, l_hi: u32) -> Result<DaggerReport> {
    if gamma > beta {
        return Err(Error::InvalidParams(format!("need {gamma} <= {beta}")));
    }
    let mut rows = Vec::new();
    for l in l_lo..=l_hi {
        let mut dagger_m = None;
        let mut ddagger_m = None;
        for m in 0..=l + DAGGER_SLACK {
            if dagger_m.is_none() && dagger_holds(gamma, beta, l, m)? {
                dagger_m = Some(m);
            }
            if ddagger_m.is_none() && ddagger_holds(gamma, beta, l, m)? {
                ddagger_m = Some(m);
            }
            if dagger_m.is_some() && ddagger_m.is_some() {
                break;
            }
        }
        rows.push(DaggerRow { l, dagger_m, ddagger_m });
    }
    Ok(DaggerReport { gamma, beta, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct DistinctnessReport {
    pub alpha: Ordinal,
    pub n: u32,
    pub family_size: usize,
    /// Least horizon `m` at which every pair is separated.
    pub separated_at: Option<u32>,
    /// Groups of indices into `enumerate_dc_full` still sharing a relation at
    /// the last horizon examined.
    pub ties: Vec<Vec<usize>>,
}

/// Separates the sets of `enumerate_dc_full(alpha, n)` by their relations on
/// the members of `R_alpha(n)` with hosts in `n..=m`, for `m <= n + slack`.
pub fn check_distinctness(alpha: Ordinal, n: u32, slack: u32) -> Result<DistinctnessReport> {
    let family = enumerate_dc_full(alpha, n)?;
    let mut domain = Vec::new();
    let mut ties = Vec::new();
    for m in n..=n + slack {
        domain.extend(r_members(alpha, n, m)?.iter().cloned());
        let mut groups: HashMap<EqRelation, Vec<usize>> = HashMap::new();
        for (i, s) in family.iter().enumerate() {
            groups.entry(eq_rel_from_s(s, &domain)?).or_default().push(i);
        }
        ties = groups.into_values().filter(|g| g.len() > 1).collect();
        ties.sort();
        if ties.is_empty() {
            return Ok(DistinctnessReport {
                alpha,
                n,
                family_size: family.len(),
                separated_at: Some(m),
                ties,
            });
        }
    }
    Ok(DistinctnessReport {
        alpha,
        n,
        family_size: family.len(),
        separated_at: None,
        ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::enumerate_r;

    fn o(r: u32) -> Ordinal {
        Ordinal::finite(r)
    }

    #[test]
    fn partition_and_colouring_generators_are_exhaustive() {
        for n in 0..=6 {
            let all: Vec<EqRelation> = SetPartitions::new(n).collect();
            assert_eq!(BigUint::from(all.len()), bell(n));
            let distinct: HashSet<&EqRelation> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
        }
        assert_eq!(bell(5), BigUint::from(52u32));
        assert_eq!(bell(10), BigUint::from(115_975u32));
    }

    #[test]
    fn canonical_relation_examples() {
        let d = enumerate_r(o(1), 0, 2).unwrap().len();
        let one = is_canonical_relation(o(1), 0, 2, &EqRelation::indiscrete(d)).unwrap();
        assert_eq!(one, Some(DCSet::root(o(1), 0)));
        let id = is_canonical_relation(o(1), 0, 2, &EqRelation::discrete(d)).unwrap();
        assert_eq!(id, Some(DCSet::full(o(1), 0).unwrap()));
        let lopsided = EqRelation::from_rgs(vec![0, 0, 1]).unwrap();
        assert_eq!(is_canonical_relation(o(1), 0, 2, &lopsided).unwrap(), None);
        assert!(matches!(
            is_canonical_relation(o(1), 0, 2, &EqRelation::discrete(2)),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn canonize_block_examples() {
        // Two classes on the three branches of T_1(2). Every pair is a
        // witness; the lex-least pair holds two different classes.
        let domain = enumerate_r(o(1), 0, 2).unwrap();
        let rel = EqRelation::from_rgs(vec![0, 1, 0]).unwrap();
        let (y, s) = canonize_block(o(1), 0, 1, 2, &rel).unwrap().unwrap();
        let below: Vec<usize> = (0..3).filter(|&i| domain[i].is_subtree_of(&y)).collect();
        assert_eq!(below, vec![0, 1]);
        assert_eq!(s, DCSet::full(o(1), 0).unwrap());
        // The same-class pair is a witness with S = {∅}.
        let c = BlockCanonizer::new(o(1), 0, 1, 2).unwrap();
        let same = c.below.iter().position(|b| b == &vec![0, 2]).unwrap();
        assert_eq!(c.table[same].get(&rel.restrict(&c.below[same])), Some(&0));
        assert_eq!(c.family[0], DCSet::root(o(1), 0));
        let (_, s) = canonize_block(o(1), 0, 1, 2, &EqRelation::discrete(3)).unwrap().unwrap();
        assert_eq!(s, DCSet::full(o(1), 0).unwrap());
        // k = n: each member is its own witness.
        let d = enumerate_r(o(2), 1, 2).unwrap().len();
        let rel = EqRelation::from_keys((0..d).map(|i| i % 2));
        let (y, s) = canonize_block(o(2), 1, 1, 2, &rel).unwrap().unwrap();
        assert_eq!(y, enumerate_r(o(2), 1, 2).unwrap()[0]);
        assert_eq!(s, DCSet::root(o(2), 1));
    }

    #[test]
    fn canonical_relations_canonize_at_k_equal_n() {
        let domain = enumerate_r(o(2), 1, 3).unwrap();
        for s in enumerate_dc(o(2), 1, 3) {
            let rel = eq_rel_from_s(&s, &domain).unwrap();
            let got = is_canonical_relation(o(2), 1, 3, &rel).unwrap().unwrap();
            assert_eq!(eq_rel_from_s(&got, &domain).unwrap(), rel);
            let (_, w) = canonize_block(o(2), 1, 1, 3, &rel).unwrap().unwrap();
            assert!(w <= got);
        }
    }

    fn enumerate_dc(a: Ordinal, n: u32, m: u32) -> Vec<DCSet> {
        crate::canonical::enumerate_dc(a, n, m).unwrap()
    }

    #[test]
    fn search_examples() {
        let b = DEFAULT_BUDGET;
        assert_eq!(pigeonhole_minimal_m(o(1), 0, 1, 5, b).unwrap().m, Some(2));
        assert_eq!(pigeonhole_minimal_m(o(1), 1, 1, 5, b).unwrap().m, Some(1));
        assert_eq!(fct_block_minimal_m(o(1), 0, 1, 4, b).unwrap().m, Some(1));
        assert_eq!(fct_block_minimal_m(o(1), 1, 1, 1, b).unwrap().m, Some(1));
        let r = fct_block_minimal_m(o(1), 0, 2, 4, b).unwrap();
        assert!(r.m.is_some(), "{r:?}");
        assert!(matches!(
            fct_block_minimal_m(o(1), 0, 1, 40, 10),
            Err(Error::Infeasible { .. }) | Ok(SearchOutcome { m: Some(1), .. })
        ));
        assert!(matches!(pigeonhole_minimal_m(o(1), 0, 2, 9, 4), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn pigeonhole_is_monotone_in_the_host() {
        let b = DEFAULT_BUDGET;
        for (a, n, k) in [(1, 0, 1), (1, 0, 2), (2, 0, 1), (1, 1, 2)] {
            let r = pigeonhole_minimal_m(o(a), n, k, 6, b);
            let Ok(SearchOutcome { m: Some(m0), .. }) = r else { continue };
            for m in m0..=m0 + 1 {
                // Accepted at m: rerun with the search starting there.
                let domain = enumerate_r(o(a), n, m).unwrap();
                if domain.len() > 16 {
                    break;
                }
                let masks: Vec<u64> = enumerate_r(o(a), k, m)
                    .unwrap()
                    .iter()
                    .map(|y| (0..domain.len()).filter(|&i| domain[i].is_subtree_of(y)).fold(0, |s, i| s | 1 << i))
                    .collect();
                for c in 0..1u64 << domain.len() {
                    assert!(masks.iter().any(|&y| c & y == 0 || c & y == y), "{a} {n} {k} {m}");
                }
            }
        }
    }

    /// Re-checks an approximation witness from scratch.
    fn ar_sound(n: u32, m: u32, rel: &EqRelation, a: &FiniteApprox, s: &[DCSet]) -> bool {
        let dom = enumerate_ar(o(1), n, m).unwrap();
        let below: Vec<usize> = (0..dom.len()).filter(|&b| le_fin(&dom[b], a)).collect();
        let keys = below.iter().map(|&b| {
            (0..n as usize).map(|i| pi_s(&s[i], &dom[b].blocks[i]).unwrap()).collect::<Vec<_>>()
        });
        EqRelation::from_keys(keys) == rel.restrict(&below)
    }

    #[test]
    fn ar_canonizer_examples() {
        let b = DEFAULT_BUDGET;
        let d = enumerate_ar(o(1), 2, 4).unwrap().len();
        let one = EqRelation::indiscrete(d);
        let (a, s) = canonize_ar(o(1), 2, 4, 3, &one, b).unwrap().unwrap();
        assert_eq!(s, vec![DCSet::root(o(1), 0), DCSet::root(o(1), 1)]);
        assert!(ar_sound(2, 4, &one, &a, &s));
        let id = EqRelation::discrete(d);
        let (a, s) = canonize_ar(o(1), 2, 4, 3, &id, b).unwrap().unwrap();
        assert_eq!(s, vec![DCSet::full(o(1), 0).unwrap(), DCSet::full(o(1), 1).unwrap()]);
        assert!(ar_sound(2, 4, &id, &a, &s));
        // Equality of block 0 only.
        let dom = enumerate_ar(o(1), 2, 4).unwrap();
        let rel = EqRelation::from_keys(dom.iter().map(|x| x.blocks[0].nodes().to_vec()));
        let (a, s) = canonize_ar(o(1), 2, 4, 3, &rel, b).unwrap().unwrap();
        assert_eq!(s, vec![DCSet::full(o(1), 0).unwrap(), DCSet::root(o(1), 1)]);
        assert!(ar_sound(2, 4, &rel, &a, &s));
    }

    #[test]
    fn segment_canonizer() {
        let b = DEFAULT_BUDGET;
        let d = enumerate_segments(o(1), 0, 1, 3).unwrap().len();
        let w = canonize_segment(o(1), 0, 1, 0, 2, 3, &EqRelation::indiscrete(d), b).unwrap().unwrap();
        assert_eq!(w.s, vec![DCSet::root(o(1), 0)]);
        assert_eq!(w.y.len(), 2);
        let w = canonize_segment(o(1), 0, 1, 0, 2, 3, &EqRelation::discrete(d), b).unwrap().unwrap();
        assert_eq!(w.s, vec![DCSet::full(o(1), 0).unwrap()]);
        let d = enumerate_segments(o(1), 1, 2, 4).unwrap().len();
        let w = canonize_segment(o(1), 1, 2, 1, 3, 4, &EqRelation::discrete(d), b).unwrap().unwrap();
        assert_eq!(w.s, vec![DCSet::full(o(1), 1).unwrap()]);
        assert!(canonize_segment(o(1), 1, 2, 0, 2, 4, &EqRelation::discrete(d), b).is_err());
    }

    /// The one-block segment and the block canonizer agree on which
    /// relations restricted to a single host are canonical.
    #[test]
    fn segment_and_block_paths_agree() {
        let b = DEFAULT_BUDGET;
        let segs = enumerate_segments(o(1), 0, 1, 3).unwrap();
        for rel in SetPartitions::new(segs.len()) {
            let w = canonize_segment(o(1), 0, 1, 0, 2, 3, &rel, b).unwrap();
            let w = w.expect("the segment lemma gives a witness at this size");
            for (i, x) in segs.iter().enumerate() {
                for (j, z) in segs.iter().enumerate() {
                    let below = |u: &RMember| w.y.iter().any(|v| u.is_subtree_of(v));
                    if below(&x[0]) && below(&z[0]) && x[0].host() == z[0].host() {
                        let same = pi_s(&w.s[0], &x[0]).unwrap() == pi_s(&w.s[0], &z[0]).unwrap();
                        assert_eq!(rel.related(i, j), same);
                    }
                }
            }
        }
    }

    #[test]
    fn dagger_examples() {
        let r = check_dagger(o(0), o(1), 0, 3).unwrap();
        assert!(r.violations().is_empty(), "{r:?}");
        assert_eq!(r.rows[0].dagger_m, Some(0));
        let id = check_dagger(o(2), o(2), 0, 3).unwrap();
        assert!(id.rows.iter().all(|r| r.dagger_m == Some(r.l) && r.ddagger_m == Some(r.l)));
        let w = check_dagger(o(0), Ordinal::OMEGA, 0, 2).unwrap();
        assert!(w.violations().is_empty(), "{w:?}");
    }

    #[test]
    fn distinctness_needs_more_than_one_block() {
        let r = check_distinctness(o(1), 0, 4).unwrap();
        assert_eq!(r.family_size, 3);
        assert!(r.separated_at.is_some_and(|m| m > 0));
        let short = check_distinctness(o(1), 0, 0).unwrap();
        assert_eq!(short.separated_at, None);
        assert!(!short.ties.is_empty());
    }
}
