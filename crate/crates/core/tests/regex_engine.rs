mod common;

use std::collections::BTreeSet;

use common::{all_words, bmat, deriv, l, w};
use crpq_contain::query_model::{parse_regex, Label};
use crpq_contain::regex_engine::{
    compile, find_word_with_constraints, matrix_for_word, matrix_power, TransitionMatrix,
};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

fn ab() -> BTreeSet<Label> {
    [l("a"), l("b")].into_iter().collect()
}

fn nfa(s: &str) -> crpq_contain::regex_engine::Nfa {
    compile(&parse_regex(s).unwrap(), &ab()).unwrap()
}

#[test]
fn compile_examples() {
    let e = nfa("()");
    assert!(e.accepts(&[]).unwrap());
    assert!(!e.accepts(&w("a")).unwrap());
    assert!(nfa("(a+b)*").accepts(&w("abba")).unwrap());
    assert!(nfa("a*").accepts(&w("aaa")).unwrap());
    assert!(!nfa("ab").accepts(&w("ba")).unwrap());
    assert!(nfa("a").accepts(&[l("c")]).is_err());
    assert!(compile(&parse_regex("c").unwrap(), &ab()).is_err());
}

#[test]
fn wildcard_is_any_letter() {
    let n = nfa("_");
    let letters: Vec<Label> = ab().into_iter().collect();
    let accepted: Vec<Vec<Label>> = all_words(&letters, 2).into_iter().filter(|x| n.accepts(x).unwrap()).collect();
    assert_eq!(accepted, vec![w("a"), w("b")]);
}

#[test]
fn state_count_bound() {
    let mut g = common::rng(11);
    for _ in 0..200 {
        let size = g.gen_range(1..=8);
        let r = common::general(&mut g, 2, size);
        assert!(compile(&r, &ab()).unwrap().n_states() <= 2 * r.leaves() + 2, "{r}");
    }
}

/// Run relation computed by stepping the automaton one letter at a time.
fn run_relation(n: &crpq_contain::regex_engine::Nfa, word: &[Label]) -> bmat::M {
    let k = n.n_states();
    (0..k)
        .map(|i| {
            let mut set = fixedbitset::FixedBitSet::with_capacity(k);
            set.insert(i);
            for c in word {
                set = n.step(&set, n.symbol_index(c).unwrap());
            }
            (0..k).map(|j| set.contains(j)).collect()
        })
        .collect()
}

fn as_bmat(m: &TransitionMatrix) -> bmat::M {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect()).collect()
}

#[test]
fn empty_word_matrix_is_identity() {
    let n = nfa("(ab)*a");
    assert_eq!(matrix_for_word(&n, &[]).unwrap(), TransitionMatrix::identity(n.n_states()));
}

#[test]
fn matrix_cycle_exists() {
    let mut g = common::rng(12);
    for _ in 0..50 {
        let m: bmat::M = (0..4).map(|_| (0..4).map(|_| g.gen_bool(0.4)).collect()).collect();
        let tm = TransitionMatrix::from_fn(4, |i, j| m[i][j]);
        let (i, p) = crpq_contain::regex_engine::index_and_period(&tm, 1 << 16).unwrap();
        assert!(i + p <= 1 << 16);
        assert_eq!(bmat::pow_iter(&m, i as u64), bmat::pow_iter(&m, (i + p) as u64));
    }
}

#[test]
fn find_word_examples() {
    let a_star = nfa("a*");
    assert_eq!(find_word_with_constraints(&a_star, &w("a"), &w("a"), None, 10), Some(w("aa")));
    assert_eq!(find_word_with_constraints(&a_star, &w("a"), &w("a"), Some(&w("aa")), 10), None);
    let ab_star = nfa("(ab)*");
    assert_eq!(find_word_with_constraints(&ab_star, &w("a"), &w("b"), Some(&w("ba")), 10), Some(w("ab")));
}

#[test]
fn huge_length_bound_on_finite_language() {
    assert_eq!(nfa("a+ab").words_up_to(usize::MAX - 1), vec![w("a"), w("ab")]);
    let mut seen = 0;
    nfa("(aa)*").for_each_word(1 << 40, &mut |_| {
        seen += 1;
        seen < 5
    });
    assert_eq!(seen, 5);
}

fn contains_factor(x: &[Label], f: &[Label]) -> bool {
    f.is_empty() || x.windows(f.len()).any(|s| s == f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn membership_matches_derivatives(seed in any::<u64>()) {
        let mut g = common::rng(seed);
        let size = g.gen_range(1..=8);
        let r = common::general(&mut g, 2, size);
        let n = compile(&r, &ab()).unwrap();
        let letters: Vec<Label> = ab().into_iter().collect();
        for x in all_words(&letters, 6) {
            prop_assert_eq!(n.accepts(&x).unwrap(), deriv::matches(&r, &x, &ab()), "{} on {:?}", r, x);
        }
    }

    #[test]
    fn enumeration_matches_filter(seed in any::<u64>()) {
        let mut g = common::rng(seed);
        let size = g.gen_range(1..=7);
        let r = common::general(&mut g, 2, size);
        let n = compile(&r, &ab()).unwrap();
        let letters: Vec<Label> = ab().into_iter().collect();
        let naive: Vec<Vec<Label>> = all_words(&letters, 5).into_iter().filter(|x| deriv::matches(&r, x, &ab())).collect();
        prop_assert_eq!(n.words_up_to(5), naive, "{}", r);
    }

    #[test]
    fn word_matrix_is_run_relation(seed in any::<u64>(), u in "[ab]{0,4}", v in "[ab]{0,4}") {
        let mut g = common::rng(seed);
        let size = g.gen_range(1..=6);
        let n = compile(&common::general(&mut g, 2, size), &ab()).unwrap();
        let (u, v) = (w(&u), w(&v));
        let uv: Vec<Label> = u.iter().chain(&v).cloned().collect();
        let mu = matrix_for_word(&n, &u).unwrap();
        let mv = matrix_for_word(&n, &v).unwrap();
        prop_assert_eq!(as_bmat(&mu), run_relation(&n, &u));
        prop_assert_eq!(mu.mul(&mv), matrix_for_word(&n, &uv).unwrap());
    }

    #[test]
    fn power_is_additive(bits in proptest::collection::vec(any::<bool>(), 25), j in 0u64..40, k in 0u64..40) {
        let m: bmat::M = bits.chunks(5).map(|c| c.to_vec()).collect();
        let tm = TransitionMatrix::from_fn(5, |i, x| m[i][x]);
        let pj = matrix_power(&tm, &BigUint::from(j));
        let pk = matrix_power(&tm, &BigUint::from(k));
        prop_assert_eq!(pj.mul(&pk), matrix_power(&tm, &BigUint::from(j + k)));
        prop_assert_eq!(as_bmat(&pj), bmat::pow_iter(&m, j));
    }

    #[test]
    fn constrained_search_matches_enumeration(
        seed in any::<u64>(),
        prefix in "[ab]{0,2}",
        suffix in "[ab]{0,2}",
        forbidden in proptest::option::of("[ab]{1,3}"),
    ) {
        let mut g = common::rng(seed);
        let size = g.gen_range(1..=6);
        let r = common::general(&mut g, 2, size);
        let n = compile(&r, &ab()).unwrap();
        let (p, s) = (w(&prefix), w(&suffix));
        let f = forbidden.map(|f| w(&f));
        let letters: Vec<Label> = ab().into_iter().collect();
        let naive = all_words(&letters, 8).into_iter().find(|x| {
            x.len() >= p.len() + s.len()
                && x.starts_with(&p)
                && x.ends_with(&s)
                && f.as_ref().map_or(true, |f| !contains_factor(x, f))
                && deriv::matches(&r, x, &ab())
        });
        let got = find_word_with_constraints(&n, &p, &s, f.as_deref(), 8);
        prop_assert_eq!(got.as_ref().map(|x| x.len()), naive.as_ref().map(|x| x.len()), "{} p={:?} s={:?}", r, p, s);
        if let Some(x) = got {
            prop_assert!(x.starts_with(&p) && x.ends_with(&s) && n.accepts(&x).unwrap());
            prop_assert!(f.as_ref().map_or(true, |f| !contains_factor(&x, f)));
        }
    }
}
