//! Left-side fragment algorithms: the unique canonical model of a CRPQ(a)
//! query, and compressed canonical models of a CRPQ(W) query.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::One;

use super::{pins, q2_embeds, timed_out, Config, Decision, Method, Verdict};
use crate::canonical::{build_from_words, enumerate_compressed_w_with, w_alternatives, WItem};
use crate::embedding::{find_embedding_compressed_with, word_matrix, Embedder};
use crate::error::{Error, Result};
use crate::query_model::{
    classify_query, is_w_query, working_alphabet, Crpq, Label, WildcardPolicy,
};
use crate::regex_engine::{compile, index_and_period, Nfa};

/// Exact check for left queries in CRPQ(a): the single canonical model decides.
pub fn contain_left_single(q1: &Crpq, q2: &Crpq) -> Result<Decision> {
    super::check_arity(q1, q2)?;
    let start = Instant::now();
    let class = classify_query(q1);
    if !class.is_a() {
        return Err(Error::Fragment { method: Method::LeftSingle.as_str(), class: class.name().into() });
    }
    let al = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol)?;
    let mut words = Vec::with_capacity(q1.atoms.len());
    for a in &q1.atoms {
        let nfa = compile(&a.regex, &al)?;
        let mut ws = nfa.words_up_to(a.regex.leaves());
        debug_assert_eq!(ws.len(), 1);
        words.push(ws.pop().expect("single-symbol atoms denote one word"));
    }
    let model = build_from_words(q1, &words);
    let emb = Embedder::new(q2, &al)?;
    let verdict = if q2_embeds(&emb, q1, q2, &model.kb, &model.nu) {
        Verdict::Contained
    } else {
        Verdict::NotContained(model)
    };
    Ok(Decision::new(verdict, Method::LeftSingle, 1, start))
}

/// Power-word thresholds `(index, period, theta)`: multiplicities at or above
/// `theta` can be lowered by `period` without creating an embedding of `q2`.
pub fn w_thresholds(
    q1: &Crpq,
    q2: &Crpq,
    period_limit: usize,
) -> Result<BTreeMap<Vec<Label>, (usize, usize, usize)>> {
    let q1s = substituted(q1);
    let al = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol)?;
    let nfas: Vec<Nfa> = q2.atoms.iter().map(|a| compile(&a.regex, &al)).collect::<Result<_>>()?;
    let v = q2.variables().len();
    let mut out = BTreeMap::new();
    for a in &q1s.atoms {
        for alt in w_alternatives(&a.regex.simplify())? {
            for it in alt {
                if let WItem::Power(w) = it {
                    if out.contains_key(&w) {
                        continue;
                    }
                    let (mut index, mut period) = (0usize, 1usize);
                    for nfa in &nfas {
                        let (i, p) = index_and_period(&word_matrix(nfa, &w), period_limit)
                            .ok_or_else(|| Error::SizeCap(format!("no matrix cycle within {period_limit} powers")))?;
                        index = index.max(i);
                        period = lcm(period, p);
                    }
                    let theta = period + v + (v + 1) * index + 1;
                    out.insert(w, (index, period, theta));
                }
            }
        }
    }
    Ok(out)
}

fn lcm(a: usize, b: usize) -> usize {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn substituted(q1: &Crpq) -> Crpq {
    if q1.has_wildcard() {
        q1.substitute_wildcard(&Label::fresh())
    } else {
        q1.clone()
    }
}

/// Largest canonical word length needed by the W-left procedure.
pub(crate) fn certificate(q1: &Crpq, q2: &Crpq, period_limit: usize) -> Option<usize> {
    if !is_w_query(q1) {
        return None;
    }
    let th = w_thresholds(q1, q2, period_limit).ok()?;
    let mut best = 0;
    for a in &substituted(q1).atoms {
        for alt in w_alternatives(&a.regex.simplify()).ok()? {
            let len: usize = alt
                .iter()
                .map(|it| match it {
                    WItem::Letter(_) => 1,
                    WItem::Power(w) => (th[w].2 - 1) * w.len(),
                })
                .sum();
            best = best.max(len);
        }
    }
    Some(best)
}

/// Exact check for left queries in CRPQ(W) against arbitrary right queries.
pub fn contain_left_w(q1: &Crpq, q2: &Crpq, cfg: &Config) -> Result<Decision> {
    super::check_arity(q1, q2)?;
    let start = Instant::now();
    let deadline = cfg.deadline(start);
    if !is_w_query(q1) {
        return Err(Error::Fragment { method: Method::LeftW.as_str(), class: classify_query(q1).name().into() });
    }
    let q1s = substituted(q1);
    let al = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol)?;
    let th = w_thresholds(q1, q2, cfg.period_limit)?;
    let sentinel = |w: &[Label]| -> BigUint {
        let (_, p, theta) = th[w];
        BigUint::from(theta) + BigUint::from(p) * (BigUint::one() << 40u32)
    };
    let mut count = 1u128;
    for a in &q1s.atoms {
        let mut per_atom = 0u128;
        for alt in w_alternatives(&a.regex.simplify())? {
            let mut c = 1u128;
            for it in &alt {
                if let WItem::Power(w) = it {
                    c = c.saturating_mul(th[w].2 as u128 + 1);
                }
            }
            per_atom = per_atom.saturating_add(c);
        }
        count = count.saturating_mul(per_atom);
    }
    if count > cfg.enum_cap as u128 {
        return Ok(Decision::new(Verdict::Unknown(None), Method::LeftW, 0, start));
    }
    let simplified = Crpq {
        distinguished: q1s.distinguished.clone(),
        atoms: q1s
            .atoms
            .iter()
            .map(|a| crate::query_model::Atom::new(&a.src, a.regex.simplify(), &a.dst))
            .collect(),
    };
    let models = enumerate_compressed_w_with(&simplified, &|w| {
        let mut v: Vec<BigUint> = (0..th[w].2).map(BigUint::from).collect();
        v.push(sentinel(w));
        v
    })?;
    let emb = Embedder::new(q2, &al)?;
    let mut examined = 0u64;
    for cm in &models {
        if timed_out(deadline) {
            return Ok(Decision::new(Verdict::Unknown(None), Method::LeftW, examined, start));
        }
        examined += 1;
        let Some(pin) = pins(q1, q2, &cm.nu) else {
            return Ok(witness_decision(q1, q2, cm, &th, examined, start));
        };
        if find_embedding_compressed_with(&emb, cm, &pin, cfg.period_limit)?.is_none() {
            return Ok(witness_decision(q1, q2, cm, &th, examined, start));
        }
    }
    Ok(Decision::new(Verdict::Contained, Method::LeftW, examined, start))
}

/// Explicit witness for a rejecting compressed model; pumped multiplicities
/// are lowered below their threshold first.
fn witness_decision(
    q1: &Crpq,
    q2: &Crpq,
    cm: &crate::canonical::CompressedCanonicalModel,
    th: &BTreeMap<Vec<Label>, (usize, usize, usize)>,
    examined: u64,
    start: Instant,
) -> Decision {
    let words: Vec<Vec<Label>> = cm
        .decomposition
        .iter()
        .map(|items| {
            let mut w = Vec::new();
            for (it, m) in items {
                match it {
                    WItem::Letter(l) => w.push(l.clone()),
                    WItem::Power(p) => {
                        let (_, period, theta) = th[p];
                        let mut m = m.clone();
                        let t = BigUint::from(theta);
                        if m >= t {
                            let excess = &m - &t;
                            let steps = excess / BigUint::from(period) + BigUint::one();
                            m -= steps * BigUint::from(period);
                        }
                        let reps: usize = m.try_into().expect("below threshold");
                        for _ in 0..reps {
                            w.extend(p.iter().cloned());
                        }
                    }
                }
            }
            w
        })
        .collect();
    let model = build_from_words(q1, &words);
    debug_assert!(super::verify_witness(q1, q2, &model));
    Decision::new(Verdict::NotContained(model), Method::LeftW, examined, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query_model::parse_query;

    fn q(s: &str) -> Crpq {
        parse_query(s).unwrap()
    }

    #[test]
    fn single_left() {
        let d = contain_left_single(&q("Q() <- x a y"), &q("Q() <- x a y")).unwrap();
        assert!(d.is_contained());
        let d = contain_left_single(&q("Q(x,y) <- x a y"), &q("Q(x,y) <- x b y")).unwrap();
        assert_eq!(d.witness().unwrap().kb.edges().len(), 1);
        assert!(contain_left_single(&q("Q() <- x a* y"), &q("Q() <- x a y")).is_err());
    }

    #[test]
    fn w_left() {
        let cfg = Config::default();
        assert!(contain_left_w(&q("Q(x,y) <- x (ab)* y"), &q("Q(x,y) <- x (ab)* y"), &cfg).unwrap().is_contained());
        let d = contain_left_w(&q("Q(x,y) <- x _ y"), &q("Q(x,y) <- x a y"), &cfg).unwrap();
        let w = d.witness().unwrap();
        assert_eq!(w.words, vec![vec![Label::fresh()]]);
        assert!(contain_left_w(&q("Q(x,y) <- x (aa)* y"), &q("Q(x,y) <- x (a a a)* y"), &cfg)
            .unwrap()
            .is_not_contained());
        assert!(contain_left_w(&q("Q(x,y) <- x (aaaaaa)* y"), &q("Q(x,y) <- x (aa)* y"), &cfg)
            .unwrap()
            .is_contained());
    }
}
