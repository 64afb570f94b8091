//! Regex compilation to ε-free NFAs, membership, boolean transition matrices
//! with fast squaring, and shortest constrained word search.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::query_model::{Label, Regex};

#[derive(Clone, Debug)]
pub struct Nfa {
    alphabet: Vec<Label>,
    index: BTreeMap<Label, usize>,
    /// `delta[sym][state]` = successor set.
    delta: Vec<Vec<FixedBitSet>>,
    start: FixedBitSet,
    finals: FixedBitSet,
    n: usize,
}

struct Thompson {
    eps: Vec<Vec<usize>>,
    sym: Vec<Vec<(usize, usize)>>,
}

impl Thompson {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.sym.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, r: &Regex, index: &BTreeMap<Label, usize>) -> Result<(usize, usize)> {
        let (s, f) = (self.state(), self.state());
        match r {
            Regex::Empty => {}
            Regex::Epsilon => self.eps[s].push(f),
            Regex::Symbol(l) => {
                let a = *index.get(l).ok_or_else(|| Error::UnknownSymbol(l.to_string()))?;
                self.sym[s].push((a, f));
            }
            Regex::Wildcard => {
                for a in 0..index.len() {
                    self.sym[s].push((a, f));
                }
            }
            Regex::Concat(a, b) => {
                let (s1, f1) = self.build(a, index)?;
                let (s2, f2) = self.build(b, index)?;
                self.eps[s].push(s1);
                self.eps[f1].push(s2);
                self.eps[f2].push(f);
            }
            Regex::Union(a, b) => {
                let (s1, f1) = self.build(a, index)?;
                let (s2, f2) = self.build(b, index)?;
                self.eps[s].extend([s1, s2]);
                self.eps[f1].push(f);
                self.eps[f2].push(f);
            }
            Regex::Star(a) => {
                let (s1, f1) = self.build(a, index)?;
                self.eps[s].extend([s1, f]);
                self.eps[f1].extend([s1, f]);
            }
        }
        Ok((s, f))
    }

    fn closure(&self, p: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([p]);
        let mut stack = vec![p];
        while let Some(q) = stack.pop() {
            for &r in &self.eps[q] {
                if seen.insert(r) {
                    stack.push(r);
                }
            }
        }
        seen
    }
}

/// Compile `r` over `alphabet`; wildcards expand to every alphabet symbol.
pub fn compile(r: &Regex, alphabet: &BTreeSet<Label>) -> Result<Nfa> {
    let alpha: Vec<Label> = alphabet.iter().cloned().collect();
    let index: BTreeMap<Label, usize> =
        alpha.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    let mut t = Thompson { eps: Vec::new(), sym: Vec::new() };
    let (s0, f0) = t.build(r, &index)?;

    // Keep the start state and every target of a letter transition.
    let mut keep: Vec<usize> = vec![s0];
    let mut seen = BTreeSet::from([s0]);
    for edges in &t.sym {
        for &(_, dst) in edges {
            if seen.insert(dst) {
                keep.push(dst);
            }
        }
    }
    let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = keep.len();
    let mut delta = vec![vec![FixedBitSet::with_capacity(n); n]; alpha.len()];
    let mut finals = FixedBitSet::with_capacity(n);
    for (i, &p) in keep.iter().enumerate() {
        let cl = t.closure(p);
        if cl.contains(&f0) {
            finals.insert(i);
        }
        for q in cl {
            for &(a, dst) in &t.sym[q] {
                delta[a][i].insert(pos[&dst]);
            }
        }
    }
    let mut start = FixedBitSet::with_capacity(n);
    start.insert(0);
    let nfa = Nfa { alphabet: alpha, index, delta, start, finals, n };
    Ok(nfa.trim())
}

/// States from which some word of length exactly `r` is accepted, computed
/// on demand. The sequence is eventually periodic, so only its prefix up to
/// the first repeat is stored.
struct ExactAcceptance<'a> {
    nfa: &'a Nfa,
    seen: Vec<FixedBitSet>,
    cycle: Option<(usize, usize)>,
}

impl ExactAcceptance<'_> {
    fn get(&mut self, r: usize) -> &FixedBitSet {
        let idx = self.index(r);
        &self.seen[idx]
    }

    fn index(&mut self, r: usize) -> usize {
        while self.cycle.is_none() && self.seen.len() <= r {
            let prev = self.seen.last().unwrap();
            let mut next = FixedBitSet::with_capacity(self.nfa.n);
            for q in 0..self.nfa.n {
                if (0..self.nfa.alphabet.len()).any(|a| !self.nfa.delta[a][q].is_disjoint(prev)) {
                    next.insert(q);
                }
            }
            match self.seen.iter().position(|x| *x == next) {
                Some(j) => self.cycle = Some((j, self.seen.len() - j)),
                None => self.seen.push(next),
            }
        }
        match self.cycle {
            Some((j, p)) if r >= self.seen.len() => j + (r - j) % p,
            _ => r,
        }
    }

    /// True when no length `>= from` is accepted starting in `start`.
    fn no_word_from(&mut self, start: &FixedBitSet, from: usize) -> bool {
        self.index(from);
        let Some((j, _)) = self.cycle else { return false };
        (from.min(j)..self.seen.len()).all(|i| start.is_disjoint(&self.seen[i]))
    }
}

impl Nfa {
    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    pub fn symbol_index(&self, l: &Label) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn start(&self) -> &FixedBitSet {
        &self.start
    }

    pub fn finals(&self) -> &FixedBitSet {
        &self.finals
    }

    pub fn successors(&self, sym: usize, state: usize) -> &FixedBitSet {
        &self.delta[sym][state]
    }

    pub fn step(&self, set: &FixedBitSet, sym: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.n);
        for q in set.ones() {
            out.union_with(&self.delta[sym][q]);
        }
        out
    }

    pub fn is_accepting(&self, set: &FixedBitSet) -> bool {
        !set.is_disjoint(&self.finals)
    }

    fn indices(&self, w: &[Label]) -> Result<Vec<usize>> {
        w.iter()
            .map(|l| self.symbol_index(l).ok_or_else(|| Error::UnknownSymbol(l.to_string())))
            .collect()
    }

    pub fn accepts(&self, w: &[Label]) -> Result<bool> {
        let mut cur = self.start.clone();
        for a in self.indices(w)? {
            cur = self.step(&cur, a);
        }
        Ok(self.is_accepting(&cur))
    }

    /// Remove states that are unreachable or cannot reach a final state.
    fn trim(self) -> Nfa {
        let n = self.n;
        let mut fwd = self.start.clone();
        let mut stack: Vec<usize> = fwd.ones().collect();
        while let Some(q) = stack.pop() {
            for a in 0..self.alphabet.len() {
                for r in self.delta[a][q].ones() {
                    if !fwd.contains(r) {
                        fwd.insert(r);
                        stack.push(r);
                    }
                }
            }
        }
        let mut bwd = self.finals.clone();
        loop {
            let mut changed = false;
            for q in 0..n {
                if bwd.contains(q) {
                    continue;
                }
                if (0..self.alphabet.len()).any(|a| !self.delta[a][q].is_disjoint(&bwd)) {
                    bwd.insert(q);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut useful = fwd.clone();
        useful.intersect_with(&bwd);
        if useful.count_ones(..) == n {
            return self;
        }
        let keep: Vec<usize> = if useful.count_ones(..) == 0 {
            vec![0]
        } else {
            useful.ones().collect()
        };
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let m = keep.len();
        let remap = |set: &FixedBitSet| {
            let mut out = FixedBitSet::with_capacity(m);
            for q in set.ones() {
                if let Some(&i) = pos.get(&q) {
                    out.insert(i);
                }
            }
            out
        };
        let delta = (0..self.alphabet.len())
            .map(|a| keep.iter().map(|&q| remap(&self.delta[a][q])).collect())
            .collect();
        let empty_lang = useful.count_ones(..) == 0;
        let start = if empty_lang {
            let mut s = FixedBitSet::with_capacity(m);
            s.insert(0);
            s
        } else {
            remap(&self.start)
        };
        let finals = if empty_lang { FixedBitSet::with_capacity(m) } else { remap(&self.finals) };
        Nfa { alphabet: self.alphabet, index: self.index, delta, start, finals, n: m }
    }

    pub fn is_empty(&self) -> bool {
        self.finals.count_ones(..) == 0 || self.start.count_ones(..) == 0
    }

    fn exact_acceptance(&self) -> ExactAcceptance<'_> {
        ExactAcceptance { nfa: self, seen: vec![self.finals.clone()], cycle: None }
    }

    /// All accepted words of length `<= max_len`, shortest first and
    /// lexicographic within each length.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<Label>> {
        let mut out = Vec::new();
        self.for_each_word(max_len, &mut |w| {
            out.push(w.to_vec());
            true
        });
        out
    }

    /// Visit accepted words in length-lexicographic order until `f` returns false.
    pub fn for_each_word(&self, max_len: usize, f: &mut dyn FnMut(&[Label]) -> bool) -> bool {
        let mut acc = self.exact_acceptance();
        let mut buf = Vec::new();
        let mut len = 0;
        while len <= max_len {
            if !self.dfs_words(&self.start, len, &mut acc, &mut buf, f) {
                return false;
            }
            if acc.no_word_from(&self.start, len + 1) {
                break;
            }
            len += 1;
        }
        true
    }

    fn dfs_words(
        &self,
        cur: &FixedBitSet,
        remaining: usize,
        acc: &mut ExactAcceptance<'_>,
        buf: &mut Vec<Label>,
        f: &mut dyn FnMut(&[Label]) -> bool,
    ) -> bool {
        if cur.is_disjoint(acc.get(remaining)) {
            return true;
        }
        if remaining == 0 {
            return f(buf);
        }
        for a in 0..self.alphabet.len() {
            let next = self.step(cur, a);
            if next.is_disjoint(acc.get(remaining - 1)) {
                continue;
            }
            buf.push(self.alphabet[a].clone());
            let go_on = self.dfs_words(&next, remaining - 1, acc, buf, f);
            buf.pop();
            if !go_on {
                return false;
            }
        }
        true
    }

    /// Length of a longest accepted word, or `None` if the language is
    /// infinite (or empty).
    pub fn max_word_len(&self) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        // Trimmed automaton: the language is finite iff the graph is acyclic.
        let n = self.n;
        let succ = |q: usize| -> Vec<usize> {
            let mut s = FixedBitSet::with_capacity(n);
            for a in 0..self.alphabet.len() {
                s.union_with(&self.delta[a][q]);
            }
            s.ones().collect()
        };
        let mut longest: Vec<Option<usize>> = vec![None; n];
        let mut state = vec![0u8; n];
        fn visit(
            q: usize,
            succ: &dyn Fn(usize) -> Vec<usize>,
            finals: &FixedBitSet,
            state: &mut [u8],
            longest: &mut [Option<usize>],
        ) -> bool {
            if state[q] == 2 {
                return true;
            }
            if state[q] == 1 {
                return false;
            }
            state[q] = 1;
            let mut best = if finals.contains(q) { Some(0) } else { None };
            for r in succ(q) {
                if !visit(r, succ, finals, state, longest) {
                    return false;
                }
                if let Some(l) = longest[r] {
                    best = Some(best.map_or(l + 1, |b: usize| b.max(l + 1)));
                }
            }
            longest[q] = best;
            state[q] = 2;
            true
        }
        let mut best = None;
        for q in self.start.ones() {
            if !visit(q, &succ, &self.finals, &mut state, &mut longest) {
                return None;
            }
            if let Some(l) = longest[q] {
                best = Some(best.map_or(l, |b: usize| b.max(l)));
            }
        }
        best
    }

    pub fn symbol_matrix(&self, sym: usize) -> TransitionMatrix {
        TransitionMatrix { dim: self.n, rows: self.delta[sym].clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    dim: usize,
    rows: Vec<FixedBitSet>,
}

impl TransitionMatrix {
    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| {
                let mut r = FixedBitSet::with_capacity(dim);
                r.insert(i);
                r
            })
            .collect();
        TransitionMatrix { dim, rows }
    }

    pub fn zero(dim: usize) -> Self {
        TransitionMatrix { dim, rows: vec![FixedBitSet::with_capacity(dim); dim] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                if f(i, j) {
                    m.rows[i].insert(j);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.rows[i].set(j, v);
    }

    pub fn row(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }

    /// Boolean product; corresponds to word concatenation.
    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        assert_eq!(self.dim, other.dim);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = FixedBitSet::with_capacity(self.dim);
                for k in r.ones() {
                    out.union_with(&other.rows[k]);
                }
                out
            })
            .collect();
        TransitionMatrix { dim: self.dim, rows }
    }

    /// Image of a state set under the relation.
    pub fn apply(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.dim);
        for q in set.ones() {
            out.union_with(&self.rows[q]);
        }
        out
    }
}

pub fn matrix_for_word(n: &Nfa, w: &[Label]) -> Result<TransitionMatrix> {
    let mut m = TransitionMatrix::identity(n.n_states());
    for a in n.indices(w)? {
        m = m.mul(&n.symbol_matrix(a));
    }
    Ok(m)
}

/// `m^e` by repeated squaring.
pub fn matrix_power(m: &TransitionMatrix, e: &BigUint) -> TransitionMatrix {
    let mut result = TransitionMatrix::identity(m.dim());
    if e.is_zero() {
        return result;
    }
    let mut base = m.clone();
    let bits = e.bits();
    for i in 0..bits {
        if e.bit(i) {
            result = result.mul(&base);
        }
        if i + 1 < bits {
            base = base.mul(&base);
        }
    }
    result
}

/// Smallest `(index, period)` with `m^index = m^(index+period)`, searching at
/// most `limit` powers.
pub fn index_and_period(m: &TransitionMatrix, limit: usize) -> Option<(usize, usize)> {
    let mut seen: BTreeMap<Vec<Vec<usize>>, usize> = BTreeMap::new();
    let mut cur = TransitionMatrix::identity(m.dim());
    for k in 0..=limit {
        let key: Vec<Vec<usize>> = cur.rows.iter().map(|r| r.ones().collect()).collect();
        if let Some(&j) = seen.get(&key) {
            return Some((j, k - j));
        }
        seen.insert(key, k);
        cur = cur.mul(m);
    }
    None
}

/// Multi-pattern matcher (Aho–Corasick) over symbol classes.
#[derive(Clone, Debug)]
pub(crate) struct FactorMatcher {
    goto: Vec<Vec<usize>>,
    hit: Vec<bool>,
    depth: Vec<usize>,
}

impl FactorMatcher {
    pub(crate) fn new(patterns: &[Vec<usize>], n_classes: usize) -> FactorMatcher {
        let mut trie: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new()];
        let mut hit = vec![false];
        let mut depth = vec![0];
        for p in patterns {
            let mut cur = 0;
            for &c in p {
                cur = match trie[cur].get(&c) {
                    Some(&nx) => nx,
                    None => {
                        trie.push(BTreeMap::new());
                        hit.push(false);
                        depth.push(depth[cur] + 1);
                        let nx = trie.len() - 1;
                        trie[cur].insert(c, nx);
                        nx
                    }
                };
            }
            hit[cur] = true;
        }
        let n = trie.len();
        let mut fail = vec![0usize; n];
        let mut goto = vec![vec![0usize; n_classes]; n];
        let mut queue = VecDeque::new();
        for c in 0..n_classes {
            if let Some(&nx) = trie[0].get(&c) {
                goto[0][c] = nx;
                queue.push_back(nx);
            }
        }
        while let Some(s) = queue.pop_front() {
            hit[s] = hit[s] || hit[fail[s]];
            for c in 0..n_classes {
                match trie[s].get(&c) {
                    Some(&nx) => {
                        fail[nx] = goto[fail[s]][c];
                        goto[s][c] = nx;
                        queue.push_back(nx);
                    }
                    None => goto[s][c] = goto[fail[s]][c],
                }
            }
        }
        FactorMatcher { goto, hit, depth }
    }

    pub(crate) fn n_states(&self) -> usize {
        self.goto.len()
    }

    pub(crate) fn next(&self, s: usize, c: usize) -> usize {
        self.goto[s][c]
    }

    pub(crate) fn is_hit(&self, s: usize) -> bool {
        self.hit[s]
    }

    /// For a single-pattern matcher: has the text just ended with the pattern?
    pub(crate) fn at_full_match(&self, s: usize, len: usize) -> bool {
        self.depth[s] == len
    }
}

/// Constraints for [`find_word_classes`]: patterns are over symbol classes
/// given by `class_of` (identity when each NFA symbol is its own class).
#[derive(Clone, Debug, Default)]
pub struct WordConstraints {
    pub class_of: Vec<usize>,
    pub n_classes: usize,
    pub prefix: Vec<usize>,
    pub suffix: Vec<usize>,
    pub forbidden: Vec<Vec<usize>>,
    pub max_len: Option<usize>,
}

/// Shortest word `w` in `L(nfa)` of the form prefix·Σ*·suffix (class-wise)
/// containing no forbidden factor, by BFS over the product automaton.
/// Returns NFA symbol indices.
pub fn find_word_classes(nfa: &Nfa, c: &WordConstraints) -> Option<Vec<usize>> {
    let n_sym = nfa.alphabet().len();
    let plen = c.prefix.len();
    let forbid = FactorMatcher::new(&c.forbidden, c.n_classes);
    let suff = FactorMatcher::new(std::slice::from_ref(&c.suffix), c.n_classes);
    let (nq, ns, nf) = (nfa.n_states(), suff.n_states(), forbid.n_states());
    let product = (plen + 1) * nq * ns * nf;
    let max_len = c.max_len.unwrap_or(product + plen + c.suffix.len());
    let enc = |p: usize, q: usize, s: usize, f: usize| ((p * nq + q) * ns + s) * nf + f;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; product];
    let mut depth: Vec<usize> = vec![usize::MAX; product];
    let mut queue = VecDeque::new();
    if forbid.is_hit(0) {
        return None;
    }
    for q in nfa.start().ones() {
        let id = enc(0, q, 0, 0);
        if depth[id] == usize::MAX {
            depth[id] = 0;
            queue.push_back((0usize, q, 0usize, 0usize));
        }
    }
    while let Some((p, q, s, f)) = queue.pop_front() {
        let id = enc(p, q, s, f);
        if p == plen && suff.at_full_match(s, c.suffix.len()) && nfa.finals().contains(q) {
            let mut w = Vec::new();
            let mut cur = id;
            while let Some((prev, sym)) = parent[cur] {
                w.push(sym);
                cur = prev;
            }
            w.reverse();
            return Some(w);
        }
        if depth[id] >= max_len {
            continue;
        }
        for a in 0..n_sym {
            let cls = c.class_of[a];
            let (np, ns2) = if p < plen {
                if c.prefix[p] != cls {
                    continue;
                }
                (p + 1, 0)
            } else {
                (p, suff.next(s, cls))
            };
            let nf2 = forbid.next(f, cls);
            if forbid.is_hit(nf2) {
                continue;
            }
            for r in nfa.successors(a, q).ones() {
                let nid = enc(np, r, ns2, nf2);
                if depth[nid] == usize::MAX {
                    depth[nid] = depth[id] + 1;
                    parent[nid] = Some((id, a));
                    queue.push_back((np, r, ns2, nf2));
                }
            }
        }
    }
    None
}

/// Shortest `w ∈ prefix·Σ*·suffix ∩ L(r)` avoiding `forbidden_factor`, of
/// length at most `max_len`.
pub fn find_word_with_constraints(
    r: &Nfa,
    prefix: &[Label],
    suffix: &[Label],
    forbidden_factor: Option<&[Label]>,
    max_len: usize,
) -> Option<Vec<Label>> {
    let idx = |w: &[Label]| -> Option<Vec<usize>> {
        w.iter().map(|l| r.symbol_index(l)).collect()
    };
    let prefix = idx(prefix)?;
    let suffix = idx(suffix)?;
    let forbidden = match forbidden_factor {
        Some(f) => match idx(f) {
            Some(v) => vec![v],
            None => vec![],
        },
        None => vec![],
    };
    let n = r.alphabet().len();
    let c = WordConstraints {
        class_of: (0..n).collect(),
        n_classes: n,
        prefix,
        suffix,
        forbidden,
        max_len: Some(max_len),
    };
    find_word_classes(r, &c).map(|w| w.into_iter().map(|a| r.alphabet()[a].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query_model::{parse_regex, word};

    fn nfa(r: &str, alpha: &[&str]) -> Nfa {
        compile(&parse_regex(r).unwrap(), &word(alpha).into_iter().collect()).unwrap()
    }

    #[test]
    fn membership_basics() {
        let e = nfa("()", &["a"]);
        assert!(e.accepts(&[]).unwrap());
        assert!(!e.accepts(&word(&["a"])).unwrap());
        assert!(nfa("(a+b)*", &["a", "b"]).accepts(&word(&["a", "b", "b", "a"])).unwrap());
        assert!(nfa("a*", &["a"]).accepts(&word(&["a", "a", "a"])).unwrap());
        assert!(!nfa("ab", &["a", "b"]).accepts(&word(&["b", "a"])).unwrap());
        assert!(nfa("a", &["a"]).accepts(&word(&["b"])).is_err());
        assert!(compile(&parse_regex("c").unwrap(), &word(&["a"]).into_iter().collect()).is_err());
    }

    #[test]
    fn state_bound() {
        for r in ["(a+b)*abb", "((ab)*+c)*a", "_(a_)*", "()", "{}"] {
            let re = parse_regex(r).unwrap();
            let n = nfa(r, &["a", "b", "c"]);
            assert!(n.n_states() <= 2 * re.leaves() + 2, "{r}");
        }
    }

    #[test]
    fn word_enumeration_order() {
        let n = nfa("(a+b)*", &["a", "b"]);
        let ws: Vec<String> = n.words_up_to(2).iter().map(|w| render(w)).collect();
        assert_eq!(ws, vec!["", "a", "b", "aa", "ab", "ba", "bb"]);
    }

    fn render(w: &[Label]) -> String {
        w.iter().map(|l| l.as_str()).collect()
    }

    #[test]
    fn finite_lengths() {
        assert_eq!(nfa("a(b+cc)", &["a", "b", "c"]).max_word_len(), Some(3));
        assert_eq!(nfa("ab*", &["a", "b"]).max_word_len(), None);
        assert_eq!(nfa("()", &["a"]).max_word_len(), Some(0));
    }

    #[test]
    fn constrained_search() {
        let a = nfa("a*", &["a"]);
        let w = find_word_with_constraints(&a, &word(&["a"]), &word(&["a"]), None, 10).unwrap();
        assert_eq!(render(&w), "aa");
        let aa = word(&["a", "a"]);
        assert!(find_word_with_constraints(&a, &word(&["a"]), &word(&["a"]), Some(&aa), 10)
            .is_none());
        let ab = nfa("(ab)*", &["a", "b"]);
        let ba = word(&["b", "a"]);
        let w = find_word_with_constraints(&ab, &word(&["a"]), &word(&["b"]), Some(&ba), 10)
            .unwrap();
        assert_eq!(render(&w), "ab");
    }

    #[test]
    fn powers() {
        let m = TransitionMatrix::from_fn(3, |i, j| j == (i + 1) % 3);
        assert_eq!(matrix_power(&m, &BigUint::from(0u32)), TransitionMatrix::identity(3));
        assert_eq!(matrix_power(&m, &BigUint::from(1u32)), m);
        assert_eq!(matrix_power(&m, &BigUint::from(3u32)), TransitionMatrix::identity(3));
        assert_eq!(index_and_period(&m, 10), Some((0, 3)));
    }
}
