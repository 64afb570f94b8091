mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{all_words, deriv, l, q, Shape};
use crpq_contain::embedding::find_embedding;
use crpq_contain::kb::KnowledgeBase;
use crpq_contain::query_model::{
    classify_query, classify_regex, connected_components, normalize_query, parse_query, parse_regex,
    Crpq, Label,
};
use crpq_contain::reductions::{qbf_to_containment, Literal, Qbf2Instance};
use proptest::prelude::*;
use rand::Rng;

fn shape(i: u8) -> Shape {
    [Shape::Single, Shape::DisjAstar, Shape::W, Shape::General][i as usize % 4]
}

#[test]
fn parse_examples() {
    let j = q("Q(x1,x2) <- x1 <app> jm1, x2 <app> jm1, jm1 <app> jm2");
    assert_eq!(j.arity(), 2);
    assert_eq!(j.atoms.len(), 3);
    assert_eq!(j.variables().len(), 4);
    assert_eq!(q("Q() <- x ab y").to_string(), "Q() <- x ab y");
    assert!(parse_query("Q(z) <- x a y").is_err());
    assert!(parse_query("Q(x) <- x (a y").is_err());
    assert!(parse_regex("a**").is_ok());
    assert!(parse_regex("+a").is_err());
}

#[test]
fn classification_examples() {
    let name = |s: &str| classify_regex(&parse_regex(s).unwrap()).name();
    assert_eq!(name("a"), "a");
    assert_eq!(name("a+b"), "A");
    assert_eq!(name("a*"), "(a,a*)");
    assert_eq!(name("(a+b)*"), "(a,A*)");
    assert_eq!(name("ab*c"), "(a,a*)");
    assert_eq!(name("a(bc)*"), "W");
    assert_eq!(name("(ab)*"), "W");
    assert_eq!(name("_"), "W");
    assert_eq!(name("(a+bc)*"), "CRPQ");
    assert_eq!(classify_query(&q("Q() <- x a y, y (a+b)* z, z (b+c) w")).name(), "(A,A*)");
    assert_eq!(classify_query(&Crpq::default()).name(), "a");
}

#[test]
fn qbf_right_query_merges_shared_variables() {
    let lit = |s: &str| s.parse::<Literal>().unwrap();
    let phi = Qbf2Instance {
        universal: 1,
        existential: 2,
        clauses: vec![[lit("x1"), lit("y1"), lit("y2")], [lit("!x1"), lit("!y1"), lit("y2")]],
    };
    let (_, q2) = qbf_to_containment(&phi).unwrap();
    let comps = connected_components(&q2);
    assert!(comps.len() < q2.atoms.len());
    let total: usize = comps.iter().map(|c| c.atoms.len()).sum();
    assert_eq!(total, q2.atoms.len());
}

fn random_kb(g: &mut rand_chacha::ChaCha8Rng, n: usize) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    for i in 0..n {
        kb.add_node(&format!("n{i}"));
    }
    for _ in 0..g.gen_range(0..=2 * n) {
        let (u, v) = (g.gen_range(0..n), g.gen_range(0..n));
        kb.add_edge_ids(u, l(common::LETTERS[g.gen_range(0..2)]), v);
    }
    kb
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>(), s in 0u8..4) {
        let mut g = common::rng(seed);
        let arity = g.gen_range(0..=2);
        let query = common::query(&mut g, shape(s), 3, 4, 6, arity);
        let text = query.to_string();
        let back = parse_query(&text).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        prop_assert_eq!(classify_query(&back), classify_query(&query));
        let json = serde_json::to_string(&query).unwrap();
        prop_assert_eq!(serde_json::from_str::<Crpq>(&json).unwrap().to_string(), text);
    }

    #[test]
    fn render_then_parse_preserves_language(seed in any::<u64>()) {
        let mut g = common::rng(seed);
        let size = g.gen_range(1..=7);
        let r = common::general(&mut g, 2, size);
        let back = parse_regex(&r.to_string()).unwrap();
        let al: BTreeSet<Label> = [l("a"), l("b")].into();
        let letters: Vec<Label> = al.iter().cloned().collect();
        for x in all_words(&letters, 5) {
            prop_assert_eq!(deriv::matches(&r, &x, &al), deriv::matches(&back, &x, &al), "{}", r);
            prop_assert_eq!(deriv::matches(&r, &x, &al), deriv::matches(&r.simplify(), &x, &al), "{}", r);
        }
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>(), s in 0u8..4) {
        let mut g = common::rng(seed);
        let query = common::query(&mut g, shape(s), 3, 4, 6, 1);
        let once = normalize_query(&query);
        prop_assert_eq!(normalize_query(&once), once.clone());
        prop_assert_eq!(once.distinguished.clone(), query.distinguished.clone());
        prop_assert!(query.variables().is_subset(&once.variables()));
        prop_assert!(classify_query(&once).le(&classify_query(&query)) || classify_query(&query).name() == "W");
    }

    #[test]
    fn normalization_preserves_answers(seed in any::<u64>()) {
        let mut g = common::rng(seed);
        let query = common::query(&mut g, Shape::General, 2, 3, 5, 1);
        let norm = normalize_query(&query);
        let n = g.gen_range(1..=4);
        let kb = random_kb(&mut g, n);
        for u in 0..kb.node_count() {
            let pin: BTreeMap<String, usize> = [(query.distinguished[0].clone(), u)].into();
            prop_assert_eq!(find_embedding(&query, &kb, &pin).is_some(), find_embedding(&norm, &kb, &pin).is_some(), "{}", query);
        }
    }

    #[test]
    fn classification_is_monotone(seed in any::<u64>(), s in 0u8..4, t in 0u8..4) {
        let mut g = common::rng(seed);
        let a = common::query(&mut g, shape(s), 3, 3, 6, 0);
        let b = common::query(&mut g, shape(t), 3, 3, 6, 0);
        let both = Crpq { distinguished: vec![], atoms: a.atoms.iter().chain(&b.atoms).cloned().collect() };
        let (ca, cb, cab) = (classify_query(&a), classify_query(&b), classify_query(&both));
        prop_assert!(ca.le(&cab) && cb.le(&cab));
        prop_assert_eq!(ca.join(&cb), cab);
    }

    #[test]
    fn components_partition_atoms(seed in any::<u64>()) {
        let mut g = common::rng(seed);
        let query = common::query(&mut g, Shape::General, 2, 5, 3, 1);
        let comps = connected_components(&query);
        let total: usize = comps.iter().map(|c| c.atoms.len()).sum();
        prop_assert_eq!(total, query.atoms.len());
        for (i, a) in comps.iter().enumerate() {
            for b in &comps[i + 1..] {
                prop_assert!(a.variables().is_disjoint(&b.variables()));
            }
        }
        let heads: Vec<String> = comps.iter().flat_map(|c| c.distinguished.clone()).collect();
        prop_assert_eq!(heads, query.distinguished);
    }
}
