//! Left queries whose atoms all denote single words except one, joining two
//! distinct nodes. The canonical models are a fixed skeleton plus one path,
//! so `q2` holding on the model is a regular property of the path word. It is
//! decided by a subset construction over partial embeddings read along the
//! path.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use fixedbitset::FixedBitSet;

use super::{q2_embeds, timed_out, Config, Decision, Method, Verdict};
use crate::canonical::build_from_words;
use crate::embedding::Embedder;
use crate::error::{Error, Result};
use crate::query_model::{classify_query, working_alphabet, Crpq, Label, WildcardPolicy};
use crate::regex_engine::{compile, Nfa};

const FUT: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Tok {
    Idle,
    Open(FixedBitSet),
}

/// One partial embedding. `pos` lists the variables still to be placed on
/// the path (`FUT`) and the skeleton nodes that unfinished walks must reach;
/// `tok` holds the state set of every unfinished walk, keyed by atom. Any
/// variable or atom absent from both is settled.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Conf {
    pos: Vec<(u32, u32)>,
    tok: Vec<(u32, Tok)>,
}

impl Conf {
    fn pos_of(&self, x: usize) -> Option<u32> {
        self.pos.binary_search_by_key(&(x as u32), |e| e.0).ok().map(|i| self.pos[i].1)
    }

    fn tok_of(&self, e: usize) -> Option<&Tok> {
        self.tok.binary_search_by_key(&(e as u32), |t| t.0).ok().map(|i| &self.tok[i].1)
    }

    fn pending(&self) -> bool {
        self.pos.iter().any(|p| p.1 == FUT)
    }
}

type Type = Vec<Conf>;

struct RightAtom {
    src: usize,
    dst: usize,
    nfa: Nfa,
    eps: bool,
    /// States reachable at the path start by a skeleton walk from each node.
    at_u: Vec<FixedBitSet>,
    /// `closed[x][y]`: the atom holds between skeleton nodes `x` and `y`.
    closed: Vec<FixedBitSet>,
    /// States at the path end from which a skeleton walk accepts at each node.
    from_v: Vec<FixedBitSet>,
    /// Whether a walk using path letters only can join two path nodes.
    inner: bool,
    /// Skeleton targets reachable from a path node.
    out_ok: FixedBitSet,
    /// Skeleton sources reaching a path node.
    in_ok: FixedBitSet,
    /// `pass_ok[x][y]`: a walk from `x` through the whole path to `y` may exist.
    pass_ok: Vec<FixedBitSet>,
    /// States of `from_v[y]` that keep a run inside it on every path letter.
    safe: Vec<FixedBitSet>,
}

/// Largest subset of `set` in which every state has a successor on every
/// symbol.
fn stable_core(nfa: &Nfa, set: &FixedBitSet, syms: &[usize]) -> FixedBitSet {
    let mut g = set.clone();
    loop {
        let drop: Vec<usize> = g.ones().filter(|&q| syms.iter().any(|&s| nfa.successors(s, q).is_disjoint(&g))).collect();
        if drop.is_empty() {
            return g;
        }
        for q in drop {
            g.set(q, false);
        }
    }
}

/// States reachable from `set` using the given symbols.
fn closure(nfa: &Nfa, set: &FixedBitSet, syms: &[usize]) -> FixedBitSet {
    let mut seen = set.clone();
    let mut stack: Vec<usize> = seen.ones().collect();
    while let Some(q) = stack.pop() {
        for &s in syms {
            for r in nfa.successors(s, q).ones() {
                if !seen.put(r) {
                    stack.push(r);
                }
            }
        }
    }
    seen
}

/// States from which the given symbols lead into `target`.
fn co_closure(nfa: &Nfa, target: &FixedBitSet, syms: &[usize]) -> FixedBitSet {
    let mut co = target.clone();
    loop {
        let mut grew = false;
        for q in 0..nfa.n_states() {
            if !co.contains(q) && syms.iter().any(|&s| !nfa.successors(s, q).is_disjoint(&co)) {
                co.insert(q);
                grew = true;
            }
        }
        if !grew {
            return co;
        }
    }
}

struct Skeleton {
    n: usize,
    out: Vec<Vec<(usize, usize)>>,
}

impl Skeleton {
    /// Forward closure of `(node, state)` pairs.
    fn forward(&self, nfa: &Nfa, seeds: &[(usize, usize)]) -> Vec<FixedBitSet> {
        let k = nfa.n_states();
        let mut seen = vec![FixedBitSet::with_capacity(k); self.n];
        let mut queue = VecDeque::new();
        for &(x, q) in seeds {
            if !seen[x].put(q) {
                queue.push_back((x, q));
            }
        }
        while let Some((x, q)) = queue.pop_front() {
            for &(sym, y) in &self.out[x] {
                for r in nfa.successors(sym, q).ones() {
                    if !seen[y].put(r) {
                        queue.push_back((y, r));
                    }
                }
            }
        }
        seen
    }
}

/// The single atom of `q1` with more than one word, when the rest of `q1`
/// is rigid and the atom joins distinct nodes.
struct Shape {
    q1: Crpq,
    long: usize,
    words: Vec<Vec<Label>>,
}

fn shape(q1: &Crpq, al: &BTreeSet<Label>) -> Result<Option<Shape>> {
    let q1 = if q1.has_wildcard() { q1.substitute_wildcard(&Label::fresh()) } else { q1.clone() };
    let mut long = None;
    let mut words = Vec::with_capacity(q1.atoms.len());
    for (i, a) in q1.atoms.iter().enumerate() {
        let nfa = compile(&a.regex, al)?;
        let single = nfa.max_word_len().map(|k| nfa.words_up_to(k)).filter(|ws| ws.len() == 1);
        match single {
            Some(mut ws) => words.push(ws.pop().expect("one word")),
            None if long.is_none() => {
                long = Some(i);
                words.push(Vec::new());
            }
            None => return Ok(None),
        }
    }
    Ok(long.map(|long| Shape { q1, long, words }))
}

struct Problem {
    atoms: Vec<RightAtom>,
    /// Atoms entering each variable.
    ins: Vec<Vec<usize>>,
    n_vars: usize,
    skel: Skeleton,
    pins: BTreeMap<usize, usize>,
    /// Distinguished positions of `q2` demand two different nodes.
    clash: bool,
}

fn trim(nfa: &Nfa) -> (FixedBitSet, FixedBitSet) {
    let k = nfa.n_states();
    let syms = nfa.alphabet().len();
    let mut acc = nfa.start().clone();
    let mut stack: Vec<usize> = acc.ones().collect();
    while let Some(q) = stack.pop() {
        for s in 0..syms {
            for r in nfa.successors(s, q).ones() {
                if !acc.put(r) {
                    stack.push(r);
                }
            }
        }
    }
    let mut co = nfa.finals().clone();
    loop {
        let mut grew = false;
        for q in 0..k {
            if !co.contains(q) && (0..syms).any(|s| !nfa.successors(s, q).is_disjoint(&co)) {
                co.insert(q);
                grew = true;
            }
        }
        if !grew {
            return (acc, co);
        }
    }
}

fn build(q1: &Crpq, q2: &Crpq, sh: &Shape, al: &BTreeSet<Label>) -> Result<Option<Problem>> {
    let mut words = sh.words.clone();
    let sep = super::right::separator(q1, q2);
    words[sh.long] = vec![sep];
    let m = build_from_words(&sh.q1, &words);
    let (u, _, v) = m.atom_paths[sh.long][0].clone();
    if u == v {
        return Ok(None);
    }
    let alphabet: Vec<Label> = al.iter().cloned().collect();
    let mut out = vec![Vec::new(); m.kb.node_count()];
    for (i, path) in m.atom_paths.iter().enumerate() {
        if i == sh.long {
            continue;
        }
        for (a, l, b) in path {
            let sym = alphabet.iter().position(|x| x == l).expect("left labels are in the alphabet");
            out[*a].push((sym, *b));
        }
    }
    out.iter_mut().for_each(|o| {
        o.sort();
        o.dedup();
    });
    let skel = Skeleton { n: m.kb.node_count(), out };
    let r = compile(&sh.q1.atoms[sh.long].regex, al)?;
    let (r_acc, r_co) = trim(&r);
    let path_syms: Vec<usize> = (0..alphabet.len())
        .filter(|&s| r_acc.ones().any(|q| !r.successors(s, q).is_disjoint(&r_co)))
        .collect();
    let vars = q2.variables_ordered();
    let idx = |x: &str| vars.iter().position(|y| y == x).expect("known variable");
    let mut atoms = Vec::with_capacity(q2.atoms.len());
    for a in &q2.atoms {
        let nfa = compile(&a.regex, al)?;
        let (acc, co) = trim(&nfa);
        let mut from_v = vec![FixedBitSet::with_capacity(nfa.n_states()); skel.n];
        for q in 0..nfa.n_states() {
            let reach = skel.forward(&nfa, &[(v, q)]);
            if acc.contains(q) && !reach[u].is_disjoint(&co) {
                return Ok(None);
            }
            for (y, set) in reach.iter().enumerate() {
                if nfa.is_accepting(set) {
                    from_v[y].insert(q);
                }
            }
        }
        let mut at_u = Vec::with_capacity(skel.n);
        let mut closed = Vec::with_capacity(skel.n);
        for x in 0..skel.n {
            let seeds: Vec<(usize, usize)> = nfa.start().ones().map(|q| (x, q)).collect();
            let reach = skel.forward(&nfa, &seeds);
            at_u.push(reach[u].clone());
            let mut c = FixedBitSet::with_capacity(skel.n);
            for (y, set) in reach.iter().enumerate() {
                if nfa.is_accepting(set) {
                    c.insert(y);
                }
            }
            closed.push(c);
        }
        let eps = nfa.is_accepting(nfa.start());
        let lead = closure(&nfa, nfa.start(), &path_syms);
        let tail = co_closure(&nfa, nfa.finals(), &path_syms);
        let inner = nfa.is_accepting(&lead);
        let safe: Vec<FixedBitSet> = from_v.iter().map(|f| stable_core(&nfa, f, &path_syms)).collect();
        let mut out_ok = FixedBitSet::with_capacity(skel.n);
        let mut in_ok = FixedBitSet::with_capacity(skel.n);
        let mut pass_ok = Vec::with_capacity(skel.n);
        for x in 0..skel.n {
            out_ok.set(x, !lead.is_disjoint(&from_v[x]));
            in_ok.set(x, !at_u[x].is_disjoint(&tail));
            let through = closure(&nfa, &at_u[x], &path_syms);
            let mut row = FixedBitSet::with_capacity(skel.n);
            for y in 0..skel.n {
                row.set(y, !through.is_disjoint(&from_v[y]));
            }
            pass_ok.push(row);
        }
        atoms.push(RightAtom {
            src: idx(&a.src),
            dst: idx(&a.dst),
            nfa,
            eps,
            at_u,
            closed,
            from_v,
            inner,
            out_ok,
            in_ok,
            pass_ok,
            safe,
        });
    }
    let mut pins = BTreeMap::new();
    let mut clash = false;
    for (x, y) in sh.q1.distinguished.iter().zip(&q2.distinguished) {
        let n = m.nu[x];
        if *pins.entry(idx(y)).or_insert(n) != n {
            clash = true;
        }
    }
    let mut ins = vec![Vec::new(); vars.len()];
    for (i, a) in atoms.iter().enumerate() {
        ins[a.dst].push(i);
    }
    Ok(Some(Problem { atoms, ins, n_vars: vars.len(), skel, pins, clash }))
}

/// Whether the left query has the one-path shape this method needs.
pub fn path_applicable(q1: &Crpq, q2: &Crpq) -> bool {
    let Ok(al) = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol) else { return false };
    match shape(q1, &al) {
        Ok(Some(sh)) => matches!(build(q1, q2, &sh, &al), Ok(Some(_))),
        _ => false,
    }
}

/// Exact check for a left query made of single-word atoms plus one arbitrary
/// atom between distinct nodes, provided no right atom can walk from the end
/// of that atom's path back to its start through the rest of the model.
pub fn contain_left_path(q1: &Crpq, q2: &Crpq, cfg: &Config) -> Result<Decision> {
    super::check_arity(q1, q2)?;
    let start = Instant::now();
    let deadline = cfg.deadline(start);
    let al = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol)?;
    let not_fit = || Error::Fragment { method: Method::LeftPath.as_str(), class: classify_query(q1).name().into() };
    let sh = shape(q1, &al)?.ok_or_else(not_fit)?;
    let p = build(q1, q2, &sh, &al)?.ok_or_else(not_fit)?;
    let r = compile(&sh.q1.atoms[sh.long].regex, &al)?;
    let done = |v: Verdict, examined: u64| Ok(Decision::new(v, Method::LeftPath, examined, start));
    if r.is_empty() {
        return done(Verdict::Contained, 0);
    }
    let witness = |w: Vec<Label>| {
        let mut words = sh.words.clone();
        words[sh.long] = w;
        let model = build_from_words(q1, &words);
        debug_assert!(super::verify_witness(q1, q2, &model));
        Verdict::NotContained(model)
    };
    if r.is_accepting(r.start()) {
        let mut words = sh.words.clone();
        words[sh.long] = Vec::new();
        let m = build_from_words(q1, &words);
        if !q2_embeds(&Embedder::new(q2, &al)?, q1, q2, &m.kb, &m.nu) {
            return done(witness(Vec::new()), 1);
        }
    }
    let init = if p.clash { Some(Vec::new()) } else { p.initial(cfg.enum_cap) };
    let Some(init) = init else { return done(Verdict::Unknown(None), 0) };
    let alphabet = r.alphabet().to_vec();
    let mut index: HashMap<(FixedBitSet, Arc<Type>), usize> = HashMap::new();
    let mut nodes: Vec<(FixedBitSet, Arc<Type>, Option<(usize, usize)>)> = Vec::new();
    let init = Arc::new(init);
    index.insert((r.start().clone(), init.clone()), 0);
    nodes.push((r.start().clone(), init, None));
    let mut next = 0;
    while next < nodes.len() {
        if timed_out(deadline) || nodes.len() > cfg.enum_cap {
            return done(Verdict::Unknown(None), nodes.len() as u64);
        }
        let (rset, ty) = (nodes[next].0.clone(), nodes[next].1.clone());
        let cur = next;
        next += 1;
        if ty.iter().any(|c| p.safe(c)) {
            continue;
        }
        for sym in 0..alphabet.len() {
            let rs = r.step(&rset, sym);
            if rs.count_ones(..) == 0 {
                continue;
            }
            let pre = p.advance(&ty, sym);
            if r.is_accepting(&rs) && !p.finishes(&pre) {
                let mut w = vec![alphabet[sym].clone()];
                let mut at = cur;
                while let Some((prev, s)) = nodes[at].2 {
                    w.push(alphabet[s].clone());
                    at = prev;
                }
                w.reverse();
                return done(witness(w), nodes.len() as u64);
            }
            let Some(post) = p.place(pre, cfg.enum_cap) else {
                return done(Verdict::Unknown(None), nodes.len() as u64);
            };
            let key = (rs, Arc::new(post));
            if !index.contains_key(&key) {
                index.insert(key.clone(), nodes.len());
                nodes.push((key.0, key.1, Some((cur, sym))));
            }
        }
    }
    done(Verdict::Contained, nodes.len() as u64)
}

impl Problem {
    fn initial(&self, cap: usize) -> Option<Type> {
        let mut out = Vec::new();
        let mut pos = vec![FUT; self.n_vars];
        let mut order: Vec<usize> = (0..self.n_vars).collect();
        order.sort_by_key(|x| !self.pins.contains_key(x));
        let mut incident = vec![Vec::new(); self.n_vars];
        for (i, a) in self.atoms.iter().enumerate() {
            incident[a.src].push(i);
            incident[a.dst].push(i);
        }
        let mut set = vec![false; self.n_vars];
        let ok = self.assign(&order, 0, &mut pos, &mut set, &incident, &mut out, cap);
        ok.then(|| self.normalize(out))
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &self,
        order: &[usize],
        k: usize,
        pos: &mut Vec<u32>,
        set: &mut Vec<bool>,
        incident: &[Vec<usize>],
        out: &mut Vec<Conf>,
        cap: usize,
    ) -> bool {
        if k == order.len() {
            if let Some(c) = self.initial_conf(pos) {
                out.push(c);
                if out.len() > cap {
                    return false;
                }
            }
            return true;
        }
        let x = order[k];
        let choices: Vec<u32> = match self.pins.get(&x) {
            Some(&n) => vec![n as u32],
            None => (0..self.skel.n as u32).chain([FUT]).collect(),
        };
        set[x] = true;
        for c in choices {
            pos[x] = c;
            let consistent = incident[x].iter().all(|&i| {
                let a = &self.atoms[i];
                !(set[a.src] && set[a.dst]) || self.pair_ok(a, pos[a.src], pos[a.dst])
            });
            if consistent && !self.assign(order, k + 1, pos, set, incident, out, cap) {
                set[x] = false;
                pos[x] = FUT;
                return false;
            }
        }
        set[x] = false;
        pos[x] = FUT;
        true
    }

    fn pair_ok(&self, a: &RightAtom, ps: u32, pd: u32) -> bool {
        match (ps, pd) {
            (FUT, FUT) => a.inner,
            (FUT, y) => a.out_ok.contains(y as usize),
            (x, FUT) => a.in_ok.contains(x as usize),
            (x, y) => a.closed[x as usize].contains(y as usize) || a.pass_ok[x as usize].contains(y as usize),
        }
    }

    fn initial_conf(&self, pos: &[u32]) -> Option<Conf> {
        let mut tok = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            match (pos[a.src], pos[a.dst]) {
                (FUT, _) => tok.push((i as u32, Tok::Idle)),
                (x, y) if y != FUT && a.closed[x as usize].contains(y as usize) => {}
                (x, _) => {
                    let t = a.at_u[x as usize].clone();
                    if t.is_clear() {
                        return None;
                    }
                    tok.push((i as u32, Tok::Open(t)));
                }
            }
        }
        let pos = pos.iter().enumerate().map(|(x, &p)| (x as u32, p)).collect();
        Some(Conf { pos, tok })
    }

    /// Read one path letter.
    fn advance(&self, ty: &Type, sym: usize) -> Type {
        let mut out = Vec::with_capacity(ty.len());
        'conf: for c in ty {
            let mut c = c.clone();
            for (e, t) in c.tok.iter_mut() {
                if let Tok::Open(s) = t {
                    let next = self.atoms[*e as usize].nfa.step(s, sym);
                    if next.is_clear() {
                        continue 'conf;
                    }
                    *s = next;
                }
            }
            out.push(c);
        }
        out
    }

    /// Completes at the path end whatever the rest of the path is.
    fn safe(&self, c: &Conf) -> bool {
        !c.pending()
            && c.tok.iter().all(|(e, t)| {
                let a = &self.atoms[*e as usize];
                match (t, c.pos_of(a.dst)) {
                    (Tok::Open(s), Some(y)) if y != FUT => !s.is_disjoint(&a.safe[y as usize]),
                    _ => false,
                }
            })
    }

    /// Does some configuration complete with the current position as the
    /// path end?
    fn finishes(&self, ty: &Type) -> bool {
        ty.iter().any(|c| {
            !c.pending()
                && c.tok.iter().all(|(e, t)| {
                    let a = &self.atoms[*e as usize];
                    match (t, c.pos_of(a.dst)) {
                        (Tok::Open(s), Some(y)) if y != FUT => !s.is_disjoint(&a.from_v[y as usize]),
                        _ => false,
                    }
                })
        })
    }

    /// Place any admissible set of pending variables at the current
    /// (interior) position.
    fn place(&self, ty: Type, cap: usize) -> Option<Type> {
        let mut out = Vec::new();
        for c in ty {
            let fut: Vec<usize> = c.pos.iter().filter(|p| p.1 == FUT).map(|p| p.0 as usize).collect();
            if !fut.is_empty() {
                let mut chosen = vec![false; self.n_vars];
                self.subsets(&c, &fut, 0, &mut chosen, &mut out);
            }
            out.push(c);
            if out.len() > cap {
                return None;
            }
        }
        Some(self.normalize(out))
    }

    fn subsets(&self, c: &Conf, fut: &[usize], k: usize, chosen: &mut Vec<bool>, out: &mut Vec<Conf>) {
        if k == fut.len() {
            if chosen.contains(&true) {
                if let Some(next) = self.apply(c, chosen) {
                    out.push(next);
                }
            }
            return;
        }
        let x = fut[k];
        self.subsets(c, fut, k + 1, chosen, out);
        let ready = self.ins[x].iter().all(|&i| {
            let a = &self.atoms[i];
            match c.tok_of(i) {
                None => true,
                Some(Tok::Idle) => chosen[a.src] || fut[k + 1..].contains(&a.src) || a.src == x,
                Some(Tok::Open(s)) => a.nfa.is_accepting(s),
            }
        });
        if ready {
            chosen[x] = true;
            self.subsets(c, fut, k + 1, chosen, out);
            chosen[x] = false;
        }
    }

    fn apply(&self, c: &Conf, chosen: &[bool]) -> Option<Conf> {
        let mut tok: Vec<(u32, Tok)> = Vec::with_capacity(c.tok.len());
        for (e, t) in &c.tok {
            let a = &self.atoms[*e as usize];
            match (chosen[a.src], chosen[a.dst]) {
                (true, true) => {
                    if !a.eps {
                        return None;
                    }
                }
                (true, false) => tok.push((*e, Tok::Open(a.nfa.start().clone()))),
                (false, true) => match t {
                    Tok::Open(s) if a.nfa.is_accepting(s) => {}
                    _ => return None,
                },
                (false, false) => tok.push((*e, t.clone())),
            }
        }
        let pos = c.pos.iter().filter(|p| !chosen[p.0 as usize]).copied().collect();
        Some(Conf { pos, tok })
    }

    /// Forget skeleton nodes nothing depends on, merge configurations that
    /// differ in one walk only, and keep the undominated ones.
    fn normalize(&self, mut confs: Vec<Conf>) -> Type {
        for c in &mut confs {
            let needed: Vec<u32> = c.tok.iter().map(|(e, _)| self.atoms[*e as usize].dst as u32).collect();
            c.pos.retain(|p| p.1 == FUT || needed.contains(&p.0));
        }
        confs.sort();
        confs.dedup();
        loop {
            let before = confs.len();
            let mut groups: HashMap<(Conf, u32), FixedBitSet> = HashMap::new();
            let mut merged = vec![false; confs.len()];
            let mut order = Vec::new();
            for (ci, c) in confs.iter().enumerate() {
                for (k, (e, t)) in c.tok.iter().enumerate() {
                    if let Tok::Open(s) = t {
                        let mut key = c.clone();
                        key.tok.remove(k);
                        match groups.get_mut(&(key.clone(), *e)) {
                            Some(g) => {
                                g.union_with(s);
                                merged[ci] = true;
                            }
                            None => {
                                order.push((key.clone(), *e));
                                groups.insert((key, *e), s.clone());
                            }
                        }
                    }
                }
            }
            if !merged.contains(&true) {
                break;
            }
            // Rebuild from the merged groups; configurations without open
            // walks survive as they are.
            let mut next: Vec<Conf> = confs.iter().filter(|c| !c.tok.iter().any(|t| matches!(t.1, Tok::Open(_)))).cloned().collect();
            for (key, e) in order {
                let s = groups[&(key.clone(), e)].clone();
                let mut c = key;
                let at = c.tok.partition_point(|t| t.0 < e);
                c.tok.insert(at, (e, Tok::Open(s)));
                next.push(c);
            }
            next.sort();
            next.dedup();
            confs = next;
            if confs.len() >= before {
                break;
            }
        }
        let dominated = |a: &Conf, b: &Conf| {
            a.pos == b.pos
                && b.tok.iter().all(|(e, tb)| match (a.tok_of(*e as usize), tb) {
                    (Some(Tok::Open(s)), Tok::Open(t)) => s.is_subset(t),
                    (Some(x), y) => x == y,
                    (None, _) => false,
                })
        };
        let keep: Vec<bool> = (0..confs.len())
            .map(|i| !(0..confs.len()).any(|j| j != i && dominated(&confs[i], &confs[j])))
            .collect();
        confs.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect()
    }
}
