//! ν-canonical models: one simple path per atom, disjoint except at shared
//! variable endpoints. Atoms whose word is empty merge their endpoints.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::json;

use crate::error::{Error, Result};
use crate::kb::{CompressedKb, KnowledgeBase};
use crate::query_model::{is_fixed_word, Crpq, Label, Regex};
use crate::regex_engine::{compile, Nfa};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalModel {
    pub kb: KnowledgeBase,
    pub nu: BTreeMap<String, usize>,
    pub atom_paths: Vec<Vec<(usize, Label, usize)>>,
    pub words: Vec<Vec<Label>>,
}

impl CanonicalModel {
    /// Witness artifact: the KB JSON plus a `nu` object mapping variables to node names.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.kb.to_json();
        let nu: BTreeMap<&str, &str> =
            self.nu.iter().map(|(x, &n)| (x.as_str(), self.kb.node_name(n))).collect();
        v["nu"] = json!(nu);
        v
    }

    pub fn from_json(v: &serde_json::Value) -> Result<CanonicalModel> {
        let kb = KnowledgeBase::from_json(v)?;
        let mut nu = BTreeMap::new();
        if let Some(obj) = v.get("nu").and_then(|n| n.as_object()) {
            for (x, n) in obj {
                let name = n.as_str().ok_or_else(|| Error::UnknownNode(n.to_string()))?;
                let id = kb.node_id(name).ok_or_else(|| Error::UnknownNode(name.to_string()))?;
                nu.insert(x.clone(), id);
            }
        }
        Ok(CanonicalModel { kb, nu, atom_paths: Vec::new(), words: Vec::new() })
    }
}

struct VarClasses {
    rep: BTreeMap<String, String>,
    names: BTreeMap<String, String>,
}

/// Union variables joined by atoms flagged `merge`; node names list the
/// merged variables in order of first occurrence.
fn merge_variables(q: &Crpq, merge: &[bool]) -> VarClasses {
    let order = q.variables_ordered();
    let pos: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..order.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for (a, &m) in q.atoms.iter().zip(merge) {
        if m {
            let (x, y) = (find(&mut parent, pos[a.src.as_str()]), find(&mut parent, pos[a.dst.as_str()]));
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, v) in order.iter().enumerate() {
        let r = find(&mut parent, i);
        members.entry(r).or_default().push(v);
    }
    let mut rep = BTreeMap::new();
    let mut names = BTreeMap::new();
    for (i, v) in order.iter().enumerate() {
        let r = find(&mut parent, i);
        rep.insert(v.clone(), order[r].clone());
        names.insert(order[r].clone(), members[&r].join("="));
    }
    VarClasses { rep, names }
}

/// Canonical structure for arbitrary per-atom words, without membership
/// checks. A shorter word list yields the partial model over the leading atoms.
pub(crate) fn build_from_words(q: &Crpq, words: &[Vec<Label>]) -> CanonicalModel {
    assert!(words.len() <= q.atoms.len());
    let merge: Vec<bool> = words.iter().map(|w| w.is_empty()).collect();
    let classes = merge_variables(q, &merge);
    let mut kb = KnowledgeBase::new();
    let mut nu = BTreeMap::new();
    for v in q.variables_ordered() {
        let r = &classes.rep[&v];
        let id = kb.add_node(&classes.names[r]);
        nu.insert(v, id);
    }
    let mut atom_paths = Vec::with_capacity(words.len());
    for (i, (a, w)) in q.atoms.iter().zip(words).enumerate() {
        let mut path = Vec::with_capacity(w.len());
        let mut prev = nu[&a.src];
        for (k, l) in w.iter().enumerate() {
            let next = if k + 1 == w.len() {
                nu[&a.dst]
            } else {
                kb.add_node(&format!("_a{}_{}", i + 1, k + 1))
            };
            kb.add_edge_ids(prev, l.clone(), next);
            path.push((prev, l.clone(), next));
            prev = next;
        }
        atom_paths.push(path);
    }
    CanonicalModel { kb, nu, atom_paths, words: words.to_vec() }
}

fn model_alphabet(q: &Crpq, extra: impl IntoIterator<Item = Label>) -> BTreeSet<Label> {
    let mut al = q.labels();
    al.extend(extra);
    if q.has_wildcard() {
        al.insert(Label::fresh());
    }
    al
}

/// Build the canonical model for the chosen per-atom words.
pub fn build_canonical(q: &Crpq, words: &[Vec<Label>]) -> Result<CanonicalModel> {
    if words.len() != q.atoms.len() {
        return Err(Error::WordCount { expected: q.atoms.len(), got: words.len() });
    }
    let al = model_alphabet(q, words.iter().flatten().cloned());
    for (i, (a, w)) in q.atoms.iter().zip(words).enumerate() {
        let nfa = compile(&a.regex, &al)?;
        if !nfa.accepts(w)? {
            return Err(Error::NotInLanguage {
                atom: i,
                word: w.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(" "),
            });
        }
    }
    Ok(build_from_words(q, words))
}

/// Lazily enumerates canonical models over the cartesian product of
/// per-atom word lists (odometer, first atom slowest).
pub struct CanonicalIter<'a> {
    q: &'a Crpq,
    lists: Vec<Vec<Vec<Label>>>,
    idx: Vec<usize>,
    done: bool,
}

impl<'a> Iterator for CanonicalIter<'a> {
    type Item = CanonicalModel;

    fn next(&mut self) -> Option<CanonicalModel> {
        if self.done {
            return None;
        }
        let words: Vec<Vec<Label>> =
            self.idx.iter().zip(&self.lists).map(|(&i, l)| l[i].clone()).collect();
        let mut k = self.idx.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.idx[k] += 1;
            if self.idx[k] < self.lists[k].len() {
                break;
            }
            self.idx[k] = 0;
        }
        Some(build_from_words(self.q, &words))
    }
}

/// Per-atom word lists in length-lexicographic order.
pub fn atom_word_lists(q: &Crpq, max_word_len: usize, alphabet: &BTreeSet<Label>) -> Result<Vec<Vec<Vec<Label>>>> {
    q.atoms
        .iter()
        .map(|a| Ok(compile(&a.regex, alphabet)?.words_up_to(max_word_len)))
        .collect()
}

pub fn enumerate_canonical_over<'a>(
    q: &'a Crpq,
    max_word_len: usize,
    alphabet: &BTreeSet<Label>,
) -> Result<CanonicalIter<'a>> {
    let lists = atom_word_lists(q, max_word_len, alphabet)?;
    let done = lists.iter().any(|l| l.is_empty());
    Ok(CanonicalIter { q, idx: vec![0; lists.len()], lists, done })
}

/// Canonical models with every atom word of length at most `max_word_len`.
pub fn enumerate_canonical(q: &Crpq, max_word_len: usize) -> Result<CanonicalIter<'_>> {
    let al = model_alphabet(q, []);
    enumerate_canonical_over(q, max_word_len, &al)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WItem {
    Letter(Label),
    Power(Vec<Label>),
}

fn fixed_word(r: &Regex, out: &mut Vec<Label>) -> Result<()> {
    match r {
        Regex::Symbol(l) => out.push(l.clone()),
        Regex::Concat(a, b) => {
            fixed_word(a, out)?;
            fixed_word(b, out)?;
        }
        _ => {
            return Err(Error::Fragment { method: "W decomposition", class: r.to_string() })
        }
    }
    Ok(())
}

/// Alternatives of a wildcard-free W regex as sequences of letters and powers.
pub fn w_alternatives(r: &Regex) -> Result<Vec<Vec<WItem>>> {
    let r = r.simplify();
    let alts = match &r {
        Regex::Symbol(l) => vec![vec![WItem::Letter(l.clone())]],
        Regex::Star(s) if is_fixed_word(s) => {
            let mut w = Vec::new();
            fixed_word(s, &mut w)?;
            vec![vec![WItem::Power(w)]]
        }
        Regex::Concat(a, b) => {
            let (la, lb) = (w_alternatives(a)?, w_alternatives(b)?);
            let mut out = Vec::new();
            for x in &la {
                for y in &lb {
                    out.push(x.iter().chain(y).cloned().collect());
                }
            }
            out
        }
        Regex::Union(a, b) => {
            let mut out = w_alternatives(a)?;
            out.extend(w_alternatives(b)?);
            out
        }
        other => {
            return Err(Error::Fragment { method: "W decomposition", class: other.to_string() })
        }
    };
    let mut seen = BTreeSet::new();
    Ok(alts.into_iter().filter(|a| seen.insert(a.clone())).collect())
}

#[derive(Clone, Debug)]
pub struct CompressedCanonicalModel {
    pub ckb: CompressedKb,
    pub nu: BTreeMap<String, usize>,
    /// Per atom: the items with the multiplicity chosen for each power.
    pub decomposition: Vec<Vec<(WItem, BigUint)>>,
}

impl CompressedCanonicalModel {
    /// The word of each atom when all multiplicities fit in `cap`.
    pub fn words(&self, cap: u64) -> Option<Vec<Vec<Label>>> {
        use num_traits::ToPrimitive;
        self.decomposition
            .iter()
            .map(|items| {
                let mut w = Vec::new();
                for (it, m) in items {
                    match it {
                        WItem::Letter(l) => w.push(l.clone()),
                        WItem::Power(p) => {
                            let m = m.to_u64().filter(|&m| m <= cap)?;
                            for _ in 0..m {
                                w.extend(p.iter().cloned());
                            }
                        }
                    }
                }
                Some(w)
            })
            .collect()
    }
}

/// Build the compressed model for per-atom item sequences with multiplicities.
pub fn build_compressed(q: &Crpq, choice: &[Vec<(WItem, BigUint)>]) -> CompressedCanonicalModel {
    let merge: Vec<bool> = choice
        .iter()
        .map(|items| {
            items.iter().all(|(it, m)| matches!(it, WItem::Power(_)) && m.is_zero())
        })
        .collect();
    let classes = merge_variables(q, &merge);
    let mut ckb = CompressedKb::default();
    let mut nu = BTreeMap::new();
    for v in q.variables_ordered() {
        let id = ckb.add_node(&classes.names[&classes.rep[&v]]);
        nu.insert(v, id);
    }
    for (i, (a, items)) in q.atoms.iter().zip(choice).enumerate() {
        let live: Vec<&(WItem, BigUint)> = items
            .iter()
            .filter(|(it, m)| matches!(it, WItem::Letter(_)) || !m.is_zero())
            .collect();
        let mut prev = nu[&a.src];
        for (k, (it, m)) in live.iter().enumerate() {
            let next = if k + 1 == live.len() {
                nu[&a.dst]
            } else {
                ckb.add_node(&format!("_a{}_{}", i + 1, k + 1))
            };
            match it {
                WItem::Letter(l) => ckb.plain_edges.push((prev, l.clone(), next)),
                WItem::Power(w) => ckb
                    .add_power_edge(prev, w.clone(), m.clone(), next)
                    .expect("nonzero multiplicity and nonempty word"),
            }
            prev = next;
        }
    }
    CompressedCanonicalModel { ckb, nu, decomposition: choice.to_vec() }
}

/// Enumerate compressed canonical models of a wildcard-free W query, where
/// each power `w` ranges over `exponents(w)`.
pub fn enumerate_compressed_w_with(
    q: &Crpq,
    exponents: &dyn Fn(&[Label]) -> Vec<BigUint>,
) -> Result<Vec<CompressedCanonicalModel>> {
    let mut per_atom: Vec<Vec<Vec<(WItem, BigUint)>>> = Vec::new();
    for a in &q.atoms {
        let mut choices = Vec::new();
        for alt in w_alternatives(&a.regex)? {
            let mut partial: Vec<Vec<(WItem, BigUint)>> = vec![Vec::new()];
            for it in alt {
                let opts = match &it {
                    WItem::Letter(_) => vec![BigUint::zero()],
                    WItem::Power(w) => exponents(w),
                };
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        let it = &it;
                        opts.iter().map(move |m| {
                            let mut p = p.clone();
                            p.push((it.clone(), m.clone()));
                            p
                        })
                    })
                    .collect();
            }
            choices.extend(partial);
        }
        per_atom.push(choices);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_atom.len()];
    if per_atom.iter().any(|c| c.is_empty()) {
        return Ok(out);
    }
    loop {
        let choice: Vec<Vec<(WItem, BigUint)>> =
            idx.iter().zip(&per_atom).map(|(&i, c)| c[i].clone()).collect();
        out.push(build_compressed(q, &choice));
        let mut k = idx.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_atom[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Same exponent set for every power.
pub fn enumerate_compressed_w(q: &Crpq, exponents: &[BigUint]) -> Result<Vec<CompressedCanonicalModel>> {
    enumerate_compressed_w_with(q, &|_| exponents.to_vec())
}

/// NFA for each atom over a shared alphabet.
pub fn atom_nfas(q: &Crpq, alphabet: &BTreeSet<Label>) -> Result<Vec<Nfa>> {
    q.atoms.iter().map(|a| compile(&a.regex, alphabet)).collect()
}
