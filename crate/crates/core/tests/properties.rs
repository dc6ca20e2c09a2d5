//! Cross-module invariants over small, randomly chosen parameters.

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use proptest::sample::select;
use ramsey_core::canonical::{
    chain_s_beta, enumerate_dc, enumerate_dc_full, eq_rel_from_s, pi_s, restrict_dc, EqRelation,
};
use ramsey_core::order::{dc_iso, embeds, tukey_class, TukeyClass};
use ramsey_core::space::{enumerate_ar, enumerate_r, is_r_member, le_fin};
use ramsey_core::structures::{build_s, build_t, lex_compare, psi, splitting_nodes, SNode};
use ramsey_core::verify::{canonize_block, is_canonical_relation, pigeonhole_minimal_m, DEFAULT_BUDGET};
use ramsey_core::Ordinal;

fn o(r: u32) -> Ordinal {
    Ordinal::finite(r)
}

/// Blocks small enough to scan in full.
fn block() -> impl Strategy<Value = (Ordinal, u32)> {
    select(vec![
        (o(0), 0),
        (o(0), 3),
        (o(1), 0),
        (o(1), 2),
        (o(2), 1),
        (o(2), 2),
        (o(3), 1),
        (o(3), 2),
        (Ordinal::OMEGA, 1),
        (Ordinal::OMEGA, 2),
    ])
}

/// `(alpha, n, m)` with the families `S_alpha(n, m)` cheap to enumerate.
fn horizon() -> impl Strategy<Value = (Ordinal, u32, u32)> {
    select(vec![
        (o(1), 0, 0),
        (o(1), 0, 2),
        (o(1), 1, 3),
        (o(2), 0, 2),
        (o(2), 0, 3),
        (o(2), 1, 2),
        (o(2), 1, 3),
        (o(3), 0, 2),
    ])
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn blocks_are_closed_and_psi_is_onto((alpha, n) in block()) {
        let t = build_t(alpha, n).unwrap();
        prop_assert!(t.validate().is_ok());
        let s = build_s(alpha, n).unwrap();
        prop_assert!(s.nodes().contains(&SNode::empty()));
        let members: HashSet<&SNode> = s.nodes().iter().collect();
        let mut image = BTreeSet::new();
        for x in s.nodes() {
            if let (true, Some(p)) = (s.is_complete(), x.parent()) {
                prop_assert!(members.contains(&p));
            }
            image.insert(psi(alpha, x).unwrap());
        }
        if s.is_complete() {
            prop_assert_eq!(image.into_iter().collect::<Vec<_>>(), t.nodes.clone());
        } else {
            prop_assert!(image.iter().all(|x| t.contains(x)));
        }
    }

    #[test]
    fn lex_is_a_total_order_on_blocks((alpha, n) in block(), seed in any::<u64>()) {
        let s = build_s(alpha, n).unwrap();
        let nodes = s.nodes();
        let pick = |k: u64| &nodes[(seed.rotate_left(k as u32 * 7) % nodes.len() as u64) as usize];
        let (a, b, c) = (pick(1), pick(2), pick(3));
        let ab = lex_compare(a, b).unwrap();
        prop_assert_eq!(ab.reverse(), lex_compare(b, a).unwrap());
        prop_assert_eq!(ab.is_eq(), a == b);
        if ab.is_le() && lex_compare(b, c).unwrap().is_le() {
            prop_assert!(lex_compare(a, c).unwrap().is_le());
        }
        prop_assert!(nodes.windows(2).all(|w| lex_compare(&w[0], &w[1]).unwrap().is_lt()));
    }

    #[test]
    fn fibers_are_chains_topped_by_maximal_or_splitting((alpha, n) in block()) {
        prop_assume!(alpha.is_finite());
        let s = build_s(alpha, n).unwrap();
        let tops: HashSet<SNode> = s.maximal().iter().cloned().chain(splitting_nodes(&s)).collect();
        let t = build_t(alpha, n).unwrap();
        for node in &t.nodes {
            let fiber: Vec<&SNode> = s.nodes().iter().filter(|x| &psi(alpha, x).unwrap() == node).collect();
            prop_assert!(!fiber.is_empty());
            let top = fiber.iter().max_by(|a, b| lex_compare(a, b).unwrap()).unwrap();
            prop_assert!(fiber.iter().all(|x| x.is_restriction_of(top)));
            prop_assert!(node.is_empty() || tops.contains(*top), "{:?}", top);
        }
    }

    #[test]
    fn r_members_are_valid_and_present((alpha, n, m) in horizon()) {
        let members = enumerate_r(alpha, n, m).unwrap();
        prop_assert!(!members.is_empty());
        for u in &members {
            prop_assert!(is_r_member(alpha, n, m, u.nodes()).unwrap());
        }
    }

    #[test]
    fn le_fin_is_a_partial_order(q in 1u32..3, n in 1u32..3, extra in 0u32..2) {
        let list = enumerate_ar(o(q), n, n + extra + 1).unwrap();
        let sample: Vec<_> = list.iter().take(12).collect();
        for a in &sample {
            prop_assert!(le_fin(a, a));
            for b in &sample {
                if le_fin(a, b) && le_fin(b, a) {
                    prop_assert_eq!(a, b);
                }
                for c in &sample {
                    if le_fin(a, b) && le_fin(b, c) {
                        prop_assert!(le_fin(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn families_grow_with_the_horizon((alpha, n, m) in horizon()) {
        let small: HashSet<_> = enumerate_dc(alpha, n, m).unwrap().into_iter().collect();
        let large: HashSet<_> = enumerate_dc(alpha, n, m + 1).unwrap().into_iter().collect();
        let full: HashSet<_> = enumerate_dc_full(alpha, n).unwrap().into_iter().collect();
        prop_assert!(small.is_subset(&large));
        prop_assert!(large.is_subset(&full));
    }

    #[test]
    fn projections_are_inner_and_relations_consistent((alpha, n, m) in horizon()) {
        let domain = enumerate_r(alpha, n, m).unwrap();
        for s in enumerate_dc(alpha, n, m).unwrap() {
            for u in &domain {
                let img = pi_s(&s, u).unwrap();
                prop_assert!(img.iter().all(|t| u.contains(t)));
            }
            let rel = eq_rel_from_s(&s, &domain).unwrap();
            for i in 0..domain.len() {
                prop_assert!(rel.related(i, i));
                for j in 0..domain.len() {
                    let same = pi_s(&s, &domain[i]).unwrap() == pi_s(&s, &domain[j]).unwrap();
                    prop_assert_eq!(rel.related(i, j), same);
                }
            }
            if let Some(r) = restrict_dc(&s, m).unwrap() {
                prop_assert!(s.is_subset(&r));
                prop_assert_eq!(eq_rel_from_s(&r, &domain).unwrap(), rel);
            }
        }
    }

    #[test]
    fn canonical_relations_are_recognized_and_canonized((alpha, n, m) in horizon()) {
        let domain = enumerate_r(alpha, n, m).unwrap();
        for s in enumerate_dc(alpha, n, m).unwrap() {
            let rel = eq_rel_from_s(&s, &domain).unwrap();
            let found = is_canonical_relation(alpha, n, m, &rel).unwrap().unwrap();
            prop_assert_eq!(eq_rel_from_s(&found, &domain).unwrap(), rel.clone());
            let (y, w) = canonize_block(alpha, n, n, m, &rel).unwrap().unwrap();
            let below: Vec<usize> = (0..domain.len()).filter(|&i| domain[i].is_subtree_of(&y)).collect();
            let direct = EqRelation::from_keys(below.iter().map(|&i| pi_s(&w, &domain[i]).unwrap()));
            prop_assert_eq!(rel.restrict(&below), direct);
        }
    }

    #[test]
    fn embedding_order_laws((alpha, n, m) in horizon()) {
        let fam = enumerate_dc(alpha, n, m).unwrap();
        let classes: Vec<TukeyClass> = fam.iter().map(|s| tukey_class(alpha, s).unwrap()).collect();
        for (i, s) in fam.iter().enumerate() {
            prop_assert!(embeds(s, s));
            for (j, t) in fam.iter().enumerate() {
                let both = embeds(s, t) && embeds(t, s);
                prop_assert_eq!(both, dc_iso(s, t));
                if embeds(s, t) {
                    match (classes[i], classes[j]) {
                        (TukeyClass::Chain(x), TukeyClass::Chain(y)) => prop_assert!(y <= x),
                        (TukeyClass::Chain(_), TukeyClass::Principal) => prop_assert!(false, "principal above a chain"),
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn chains_have_their_own_class(a in 1u32..4, b in 0u32..4) {
        prop_assume!(b <= a);
        let c = chain_s_beta(o(a), o(b)).unwrap();
        prop_assert_eq!(tukey_class(o(a), &c).unwrap(), TukeyClass::Chain(o(b)));
    }
}

/// Every 2-colouring of `R_alpha(n)|T_alpha(m)` is constant below some `y`.
/// `None` when the domain is too large to colour exhaustively here.
fn pigeonhole_holds(alpha: Ordinal, n: u32, k: u32, m: u32) -> Option<bool> {
    let domain = enumerate_r(alpha, n, m).unwrap();
    if domain.len() > 20 {
        return None;
    }
    let below: Vec<Vec<usize>> = enumerate_r(alpha, k, m)
        .unwrap()
        .iter()
        .map(|y| (0..domain.len()).filter(|&i| domain[i].is_subtree_of(y)).collect())
        .collect();
    Some((0u32..1 << domain.len()).all(|c| {
        below.iter().any(|b| {
            let ones = b.iter().filter(|&&i| c >> i & 1 == 1).count();
            ones == 0 || ones == b.len()
        })
    }))
}

#[test]
fn pigeonhole_holds_above_the_least_m() {
    for (alpha, n, k) in [(o(1), 0, 1), (o(1), 1, 1), (o(2), 0, 1), (o(2), 1, 1)] {
        let m0 = pigeonhole_minimal_m(alpha, n, k, 5, DEFAULT_BUDGET).unwrap().m.unwrap();
        for m in k..m0 {
            assert_eq!(pigeonhole_holds(alpha, n, k, m), Some(false));
        }
        let mut checked = 0;
        for m in m0..=m0 + 2 {
            if let Some(holds) = pigeonhole_holds(alpha, n, k, m) {
                assert!(holds, "{alpha} {n} {k} {m}");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}
