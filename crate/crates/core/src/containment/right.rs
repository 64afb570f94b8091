//! Right-side fragment algorithms. Every atom word of the left query is
//! abstracted by a window of units at each end (letters for CRPQ(a), capped
//! label runs for CRPQ(A,a*)); the middle of long words is cut by a separator
//! symbol, and interior matches are excluded by a forbidden-window search.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::time::Instant;

use fixedbitset::FixedBitSet;

use super::{timed_out, Config, Decision, Method, Verdict};
use crate::canonical::build_from_words;
use crate::embedding::Embedder;
use crate::error::{Error, Result};
use crate::kb::{IndexedKb, KnowledgeBase};
use crate::query_model::{
    classify_query, connected_components, normalize_query, working_alphabet, Crpq, Label, Regex,
    WildcardPolicy,
};
use crate::regex_engine::{compile, Nfa};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    Letters,
    Runs,
}

/// First `_sepN` label used by neither query.
pub(crate) fn separator(q1: &Crpq, q2: &Crpq) -> Label {
    let mut used = q1.labels();
    used.extend(q2.labels());
    (0..)
        .map(|i| Label::reserved(&format!("_sep{i}")))
        .find(|l| !used.contains(l))
        .expect("unbounded supply")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Unit {
    class: usize,
    len: usize,
    at_least: bool,
}

struct Classes {
    /// Class of each alphabet symbol.
    class_of: Vec<usize>,
    /// Label used to draw each class in an abstract model.
    render: Vec<Label>,
}

impl Classes {
    /// Letters of `c` are their own classes; every other symbol collapses
    /// into one class drawn as the separator.
    fn new(alphabet: &[Label], c_labels: &BTreeSet<Label>, sep: &Label) -> Classes {
        let mut render: Vec<Label> = c_labels.iter().filter(|l| alphabet.contains(l)).cloned().collect();
        let other = render.len();
        let mut class_of = Vec::with_capacity(alphabet.len());
        let mut has_other = false;
        for l in alphabet {
            match render.iter().position(|r| r == l) {
                Some(i) => class_of.push(i),
                None => {
                    class_of.push(other);
                    has_other = true;
                }
            }
        }
        if has_other {
            render.push(sep.clone());
        }
        Classes { class_of, render }
    }

    fn n(&self) -> usize {
        self.render.len()
    }
}

struct UnitSystem {
    units: Vec<Unit>,
    runs: bool,
    /// Window width in units.
    w: usize,
}

impl UnitSystem {
    fn new(mode: Mode, n_classes: usize, component: &Crpq) -> UnitSystem {
        let size = component.atoms.len();
        match mode {
            Mode::Letters => UnitSystem {
                units: (0..n_classes).map(|c| Unit { class: c, len: 1, at_least: false }).collect(),
                runs: false,
                w: letter_reach(component),
            },
            Mode::Runs => {
                let t = run_cap(component);
                let mut units = Vec::new();
                for c in 0..n_classes {
                    for len in 1..=t {
                        units.push(Unit { class: c, len, at_least: len == t });
                    }
                }
                UnitSystem { units, runs: true, w: size }
            }
        }
    }

    fn compatible(&self, prev: Option<usize>, u: usize) -> bool {
        !self.runs || prev.map_or(true, |p| self.units[p].class != self.units[u].class)
    }

    fn expand(&self, seq: &[usize], classes: &Classes, out: &mut Vec<Label>) {
        for &u in seq {
            let unit = self.units[u];
            for _ in 0..unit.len {
                out.push(classes.render[unit.class].clone());
            }
        }
    }
}

/// Largest `forward - backward` edge count along a simple undirected path of
/// a single-letter component, or its size when the search exceeds its cap.
/// No image of the component inside a path reaches deeper than this.
pub(crate) fn letter_reach(component: &Crpq) -> usize {
    let vars: Vec<String> = component.variables().into_iter().collect();
    let idx = |v: &str| vars.iter().position(|x| x == v).expect("known variable");
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); vars.len()];
    for a in &component.atoms {
        let (u, v) = (idx(&a.src), idx(&a.dst));
        if u != v {
            adj[u].push((v, 1));
            adj[v].push((u, -1));
        }
    }
    fn dfs(adj: &[Vec<(usize, i64)>], at: usize, h: i64, on: &mut Vec<bool>, best: &mut i64, steps: &mut u64) -> bool {
        *steps += 1;
        if *steps > 200_000 {
            return false;
        }
        *best = (*best).max(h.abs());
        for &(n, d) in &adj[at] {
            if !on[n] {
                on[n] = true;
                let ok = dfs(adj, n, h + d, on, best, steps);
                on[n] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let (mut best, mut steps) = (0i64, 0u64);
    let mut on = vec![false; vars.len()];
    for s in 0..vars.len() {
        on[s] = true;
        let ok = dfs(&adj, s, 0, &mut on, &mut best, &mut steps);
        on[s] = false;
        if !ok {
            return component.atoms.len().max(1);
        }
    }
    (best as usize).max(1)
}

/// Run lengths above the number of single-edge atoms are indistinguishable
/// to the component, even with both ends of the run pinned.
fn run_cap(component: &Crpq) -> usize {
    component.atoms.iter().filter(|a| !matches!(a.regex, Regex::Star(_))).count() + 1
}

/// Unit transition relation of one left atom's automaton.
struct UnitAutomaton<'a> {
    nfa: &'a Nfa,
    class_syms: Vec<Vec<usize>>,
    step: Vec<Vec<FixedBitSet>>,
}

impl<'a> UnitAutomaton<'a> {
    fn new(nfa: &'a Nfa, classes: &Classes, sys: &UnitSystem) -> UnitAutomaton<'a> {
        let n = nfa.n_states();
        let mut class_syms = vec![Vec::new(); classes.n()];
        for (s, &c) in classes.class_of.iter().enumerate() {
            class_syms[c].push(s);
        }
        let class_step = |c: usize, set: &FixedBitSet| {
            let mut out = FixedBitSet::with_capacity(n);
            for q in set.ones() {
                for &s in &class_syms[c] {
                    out.union_with(nfa.successors(s, q));
                }
            }
            out
        };
        let step = sys
            .units
            .iter()
            .map(|u| {
                (0..n)
                    .map(|q| {
                        let mut set = FixedBitSet::with_capacity(n);
                        set.insert(q);
                        for _ in 0..u.len {
                            set = class_step(u.class, &set);
                        }
                        if u.at_least {
                            loop {
                                let mut next = set.clone();
                                next.union_with(&class_step(u.class, &set));
                                if next == set {
                                    break;
                                }
                                set = next;
                            }
                        }
                        set
                    })
                    .collect()
            })
            .collect();
        UnitAutomaton { nfa, class_syms, step }
    }

    fn step_set(&self, u: usize, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.nfa.n_states());
        for q in set.ones() {
            out.union_with(&self.step[u][q]);
        }
        out
    }

    /// Shortest concrete word with exactly the given unit decomposition.
    fn realize(&self, sys: &UnitSystem, seq: &[usize]) -> Option<Vec<Label>> {
        type St = (usize, usize, usize);
        let mut parent: HashMap<St, Option<(St, Option<usize>)>> = HashMap::new();
        let mut queue = VecDeque::new();
        for q in self.nfa.start().ones() {
            parent.insert((0, 0, q), None);
            queue.push_back((0, 0, q));
        }
        while let Some(st @ (idx, cnt, q)) = queue.pop_front() {
            if idx == seq.len() {
                if self.nfa.finals().contains(q) {
                    let mut word = Vec::new();
                    let mut cur = st;
                    while let Some(Some((prev, sym))) = parent.get(&cur) {
                        if let Some(s) = sym {
                            word.push(self.nfa.alphabet()[*s].clone());
                        }
                        cur = *prev;
                    }
                    word.reverse();
                    return Some(word);
                }
                continue;
            }
            let unit = sys.units[seq[idx]];
            let mut push = |next: St, sym: Option<usize>, queue: &mut VecDeque<St>| {
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                    e.insert(Some((st, sym)));
                    queue.push_back(next);
                }
            };
            if cnt < unit.len || unit.at_least {
                let ncnt = (cnt + 1).min(unit.len);
                for &s in &self.class_syms[unit.class] {
                    for r in self.nfa.successors(s, q).ones() {
                        push((idx, ncnt, r), Some(s), &mut queue);
                    }
                }
            }
            if cnt == unit.len {
                push((idx + 1, 0, q), None, &mut queue);
            }
        }
        None
    }
}

/// One abstraction of a left atom word.
#[derive(Clone, Debug)]
struct Opt {
    path: Vec<Label>,
    units: Vec<usize>,
}

struct CapHit;

fn short_options(
    aut: &UnitAutomaton,
    sys: &UnitSystem,
    classes: &Classes,
    cap: usize,
) -> std::result::Result<Vec<Opt>, CapHit> {
    fn rec(
        aut: &UnitAutomaton,
        sys: &UnitSystem,
        classes: &Classes,
        seq: &mut Vec<usize>,
        set: &FixedBitSet,
        out: &mut Vec<Opt>,
        cap: usize,
    ) -> std::result::Result<(), CapHit> {
        if set.ones().any(|q| aut.nfa.finals().contains(q)) {
            let mut path = Vec::new();
            sys.expand(seq, classes, &mut path);
            out.push(Opt { path, units: seq.clone() });
            if out.len() > cap {
                return Err(CapHit);
            }
        }
        if seq.len() == 2 * sys.w {
            return Ok(());
        }
        for u in 0..sys.units.len() {
            if !sys.compatible(seq.last().copied(), u) {
                continue;
            }
            let next = aut.step_set(u, set);
            if next.count_ones(..) == 0 {
                continue;
            }
            seq.push(u);
            rec(aut, sys, classes, seq, &next, out, cap)?;
            seq.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    rec(aut, sys, classes, &mut Vec::new(), aut.nfa.start(), &mut out, cap)?;
    Ok(out)
}

/// All (prefix window, suffix window) pairs realized by words with more than
/// `2w` units, none of whose `w`-unit windows is `forbidden`.
fn long_options(
    aut: &UnitAutomaton,
    sys: &UnitSystem,
    classes: &Classes,
    sep: &Label,
    forbidden: &mut dyn FnMut(&[usize]) -> bool,
    cap: usize,
) -> std::result::Result<Vec<Opt>, CapHit> {
    #[derive(Clone, PartialEq, Eq, Hash)]
    struct St {
        i: usize,
        q: usize,
        window: Vec<usize>,
        prefix: Option<Vec<usize>>,
    }
    let w = sys.w;
    let full = 2 * w + 1;
    let mut parent: HashMap<St, Option<(St, usize)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for q in aut.nfa.start().ones() {
        let s = St { i: 0, q, window: Vec::new(), prefix: None };
        parent.insert(s.clone(), None);
        queue.push_back(s);
    }
    let mut seen_pairs: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    let mut out = Vec::new();
    while let Some(st) = queue.pop_front() {
        if parent.len() > cap {
            return Err(CapHit);
        }
        if st.i == full && aut.nfa.finals().contains(st.q) {
            let prefix = st.prefix.clone().expect("prefix fixed");
            if seen_pairs.insert((prefix.clone(), st.window.clone())) {
                let mut units = Vec::new();
                let mut cur = st.clone();
                while let Some(Some((prev, u))) = parent.get(&cur) {
                    units.push(*u);
                    cur = prev.clone();
                }
                units.reverse();
                let mut path = Vec::new();
                sys.expand(&prefix, classes, &mut path);
                path.push(sep.clone());
                sys.expand(&st.window, classes, &mut path);
                out.push(Opt { path, units });
            }
        }
        for u in 0..sys.units.len() {
            if !sys.compatible(st.window.last().copied(), u) {
                continue;
            }
            let mut window = st.window.clone();
            window.push(u);
            if window.len() > w {
                window.remove(0);
            }
            let i = (st.i + 1).min(full);
            if st.i + 1 >= w && forbidden(&window) {
                continue;
            }
            let prefix = if st.i + 1 == w { Some(window.clone()) } else { st.prefix.clone() };
            for r in aut.step[u][st.q].ones() {
                let next = St { i, q: r, window: window.clone(), prefix: prefix.clone() };
                if !parent.contains_key(&next) {
                    parent.insert(next.clone(), Some((st.clone(), u)));
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(out)
}

fn path_kb(path: &[Label]) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    let mut prev = kb.add_node("p0");
    for (i, l) in path.iter().enumerate() {
        let next = kb.add_node(&format!("p{}", i + 1));
        kb.add_edge_ids(prev, l.clone(), next);
        prev = next;
    }
    kb
}

fn component_pins(
    q1: &Crpq,
    q2: &Crpq,
    vars: &BTreeSet<String>,
    nu: &BTreeMap<String, usize>,
) -> Option<BTreeMap<String, usize>> {
    let mut pin = BTreeMap::new();
    for (x, y) in q1.distinguished.iter().zip(&q2.distinguished) {
        if !vars.contains(y) {
            continue;
        }
        let n = nu[x];
        if *pin.entry(y.clone()).or_insert(n) != n {
            return None;
        }
    }
    Some(pin)
}

enum Search {
    Found(Vec<usize>),
    Exhausted,
    Aborted,
}

struct ComponentCtx<'a> {
    q1: &'a Crpq,
    q2: &'a Crpq,
    vars: BTreeSet<String>,
    emb: Embedder,
    options: Vec<Vec<Opt>>,
    budget: u64,
    used: u64,
    deadline: Option<Instant>,
}

impl ComponentCtx<'_> {
    fn embeds(&self, paths: &[Vec<Label>]) -> bool {
        let m = build_from_words(self.q1, paths);
        match component_pins(self.q1, self.q2, &self.vars, &m.nu) {
            Some(pin) => self.emb.find(&IndexedKb::new(&m.kb), &pin).is_some(),
            None => false,
        }
    }

    fn search(&mut self, chosen: &mut Vec<usize>, paths: &mut Vec<Vec<Label>>) -> Search {
        self.used += 1;
        if self.used > self.budget || timed_out(self.deadline) {
            return Search::Aborted;
        }
        if self.embeds(paths) {
            return Search::Exhausted;
        }
        let level = chosen.len();
        if level == self.q1.atoms.len() {
            return Search::Found(chosen.clone());
        }
        for i in 0..self.options[level].len() {
            chosen.push(i);
            paths.push(self.options[level][i].path.clone());
            let r = self.search(chosen, paths);
            chosen.pop();
            paths.pop();
            match r {
                Search::Exhausted => {}
                other => return other,
            }
        }
        Search::Exhausted
    }
}

fn fragment_ok(mode: Mode, q2: &Crpq) -> bool {
    let c = classify_query(q2);
    match mode {
        Mode::Letters => c.is_a(),
        Mode::Runs => c.is_a_astar_upper(),
    }
}

fn right_search(q1: &Crpq, q2: &Crpq, mode: Mode, method: Method, cfg: &Config) -> Result<Decision> {
    let start = Instant::now();
    if !fragment_ok(mode, q2) {
        return Err(Error::Fragment { method: method.as_str(), class: classify_query(q2).name().into() });
    }
    let deadline = cfg.deadline(start);
    let al_set = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol)?;
    let alphabet: Vec<Label> = al_set.iter().cloned().collect();
    let sep = separator(q1, q2);
    let nfas: Vec<Nfa> = q1.atoms.iter().map(|a| compile(&a.regex, &al_set)).collect::<Result<_>>()?;
    if nfas.iter().any(|n| n.is_empty()) {
        return Ok(Decision::new(Verdict::Contained, method, 0, start));
    }
    let q2n = normalize_query(q2);
    let mut examined = 0u64;
    let mut unknown = false;
    for comp in connected_components(&q2n) {
        let pinned = !comp.distinguished.is_empty();
        let classes = Classes::new(&alphabet, &comp.labels(), &sep);
        let sys = UnitSystem::new(mode, classes.n(), &comp);
        let emb = Embedder::new(&comp, &al_set)?;
        let mut memo: HashMap<Vec<usize>, bool> = HashMap::new();
        let mut forbidden = |window: &[usize]| -> bool {
            if pinned {
                return false;
            }
            *memo.entry(window.to_vec()).or_insert_with(|| {
                let mut path = Vec::new();
                sys.expand(window, &classes, &mut path);
                emb.find(&IndexedKb::new(&path_kb(&path)), &BTreeMap::new()).is_some()
            })
        };
        let auts: Vec<UnitAutomaton> = nfas.iter().map(|n| UnitAutomaton::new(n, &classes, &sys)).collect();
        let mut options = Vec::with_capacity(auts.len());
        let mut capped = false;
        for aut in &auts {
            let short = short_options(aut, &sys, &classes, cfg.enum_cap);
            let long = long_options(aut, &sys, &classes, &sep, &mut forbidden, cfg.enum_cap);
            match (short, long) {
                (Ok(mut s), Ok(l)) => {
                    s.extend(l);
                    options.push(s);
                }
                _ => {
                    capped = true;
                    break;
                }
            }
        }
        if capped {
            unknown = true;
            continue;
        }
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut order: Vec<usize> = (0..options.len()).collect();
        order.sort_by_key(|&i| options[i].len());
        let q1p = Crpq {
            distinguished: q1.distinguished.clone(),
            atoms: order.iter().map(|&i| q1.atoms[i].clone()).collect(),
        };
        let mut slots: Vec<Option<Vec<Opt>>> = options.into_iter().map(Some).collect();
        let options: Vec<Vec<Opt>> = order.iter().map(|&i| slots[i].take().expect("each atom once")).collect();
        let mut ctx = ComponentCtx {
            q1: &q1p,
            q2,
            vars: comp.variables(),
            emb,
            options,
            budget: cfg.model_budget,
            used: 0,
            deadline,
        };
        let r = ctx.search(&mut Vec::new(), &mut Vec::new());
        examined += ctx.used;
        match r {
            Search::Found(choice) => {
                let mut words = vec![Vec::new(); q1.atoms.len()];
                for (k, &i) in choice.iter().enumerate() {
                    let a = order[k];
                    words[a] = auts[a].realize(&sys, &ctx.options[k][i].units).expect("option is realizable");
                }
                let model = build_from_words(q1, &words);
                debug_assert!(super::verify_witness(q1, q2, &model));
                return Ok(Decision::new(Verdict::NotContained(model), method, examined, start));
            }
            Search::Aborted => unknown = true,
            Search::Exhausted => {}
        }
    }
    let verdict = if unknown { Verdict::Unknown(None) } else { Verdict::Contained };
    Ok(Decision::new(verdict, method, examined, start))
}

/// Exact check for right queries in CRPQ(a).
pub fn contain_right_cq(q1: &Crpq, q2: &Crpq, cfg: &Config) -> Result<Decision> {
    super::check_arity(q1, q2)?;
    right_search(q1, q2, Mode::Letters, Method::RightCq, cfg)
}

/// Exact check for right queries in CRPQ(A,a*).
pub fn contain_right_a_astar(q1: &Crpq, q2: &Crpq, cfg: &Config) -> Result<Decision> {
    super::check_arity(q1, q2)?;
    right_search(q1, q2, Mode::Runs, Method::RightAAstar, cfg)
}

/// Word-length bound within which a counterexample exists whenever one
/// exists at all, from the size of the window search space.
pub(crate) fn certificate(q1: &Crpq, q2: &Crpq, mode: Mode) -> Option<usize> {
    if !fragment_ok(mode, q2) {
        return None;
    }
    let al = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol).ok()?;
    let q2n = normalize_query(q2);
    let mut best = 0usize;
    for comp in connected_components(&q2n) {
        let n_classes = comp.labels().len() + 1;
        let (w, t) = match mode {
            Mode::Letters => (letter_reach(&comp), 1),
            Mode::Runs => (comp.atoms.len(), run_cap(&comp)),
        };
        let units = n_classes * t;
        let mut windows = 0usize;
        let mut pow = 1usize;
        for _ in 0..=w {
            windows = windows.saturating_add(pow);
            pow = pow.saturating_mul(units);
        }
        for a in &q1.atoms {
            let nq = compile(&a.regex, &al).ok()?.n_states();
            let seq = (2 * w + 2).saturating_mul(nq).saturating_mul(windows).max(2 * w + 1);
            best = best.max(seq.saturating_mul(t + nq));
        }
    }
    Some(best)
}
