//! Satisfying-homomorphism search from a query into a knowledge base, plain
//! or compressed.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::canonical::CompressedCanonicalModel;
use crate::error::{Error, Result};
use crate::kb::{IndexedKb, KnowledgeBase};
use crate::query_model::{Crpq, Label};
use crate::regex_engine::{compile, index_and_period, matrix_power, Nfa, TransitionMatrix};

/// Variable assignment, by variable name.
pub type Homomorphism = BTreeMap<String, usize>;

/// A graph supporting regular reachability queries.
pub trait RegularGraph {
    fn node_count(&self) -> usize;
    /// Nodes reachable from `from` along a path labelled in `L(nfa)`;
    /// `nfa_id` identifies the automaton for caching.
    fn reach(&self, nfa_id: usize, nfa: &Nfa, from: usize) -> FixedBitSet;
}

impl RegularGraph for IndexedKb<'_> {
    fn node_count(&self) -> usize {
        self.kb.node_count()
    }

    fn reach(&self, _nfa_id: usize, nfa: &Nfa, from: usize) -> FixedBitSet {
        IndexedKb::reach(self, nfa, from)
    }
}

/// A query compiled against a fixed alphabet, ready for repeated searches.
#[derive(Clone, Debug)]
pub struct Embedder {
    vars: Vec<String>,
    atoms: Vec<(usize, usize)>,
    nfas: Vec<Nfa>,
}

struct Search<'g, G: RegularGraph + ?Sized> {
    emb: &'g Embedder,
    g: &'g G,
    fwd: RefCell<Vec<Vec<Option<FixedBitSet>>>>,
}

impl<'g, G: RegularGraph + ?Sized> Search<'g, G> {
    fn reach(&self, atom: usize, u: usize) -> FixedBitSet {
        if let Some(r) = &self.fwd.borrow()[atom][u] {
            return r.clone();
        }
        let r = self.g.reach(atom, &self.emb.nfas[atom], u);
        self.fwd.borrow_mut()[atom][u] = Some(r.clone());
        r
    }

    fn candidates(&self, v: usize, assign: &[Option<usize>], base: &FixedBitSet) -> FixedBitSet {
        let mut cand = base.clone();
        for (i, &(s, d)) in self.emb.atoms.iter().enumerate() {
            if s == v && d == v {
                let keep: Vec<usize> = cand.ones().filter(|&u| self.reach(i, u).contains(u)).collect();
                cand.clear();
                keep.into_iter().for_each(|u| cand.insert(u));
            } else if d == v {
                if let Some(hs) = assign[s] {
                    cand.intersect_with(&self.reach(i, hs));
                }
            } else if s == v {
                if let Some(hd) = assign[d] {
                    let keep: Vec<usize> =
                        cand.ones().filter(|&u| self.reach(i, u).contains(hd)).collect();
                    cand.clear();
                    keep.into_iter().for_each(|u| cand.insert(u));
                }
            }
            if cand.count_ones(..) == 0 {
                break;
            }
        }
        cand
    }

    fn run(&self, assign: &mut Vec<Option<usize>>, bases: &[FixedBitSet], order: &[usize]) -> bool {
        let mut best: Option<(usize, FixedBitSet)> = None;
        for &v in order {
            if assign[v].is_some() {
                continue;
            }
            let c = self.candidates(v, assign, &bases[v]);
            let n = c.count_ones(..);
            if n == 0 {
                return false;
            }
            if best.as_ref().map_or(true, |(_, b)| n < b.count_ones(..)) {
                best = Some((v, c));
            }
        }
        let Some((v, cand)) = best else { return true };
        for u in cand.ones() {
            assign[v] = Some(u);
            if self.run(assign, bases, order) {
                return true;
            }
        }
        assign[v] = None;
        false
    }
}

impl Embedder {
    pub fn new(q: &Crpq, alphabet: &BTreeSet<Label>) -> Result<Embedder> {
        let vars = q.variables_ordered();
        let pos: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let atoms = q.atoms.iter().map(|a| (pos[a.src.as_str()], pos[a.dst.as_str()])).collect();
        let nfas = q.atoms.iter().map(|a| compile(&a.regex, alphabet)).collect::<Result<_>>()?;
        Ok(Embedder { vars, atoms, nfas })
    }

    pub fn nfas(&self) -> &[Nfa] {
        &self.nfas
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Complete backtracking search with minimum-remaining-candidates
    /// ordering; ties are broken by variable name.
    pub fn find<G: RegularGraph + ?Sized>(
        &self,
        g: &G,
        pin: &BTreeMap<String, usize>,
    ) -> Option<Homomorphism> {
        let n = g.node_count();
        let mut bases = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let mut b = FixedBitSet::with_capacity(n);
            match pin.get(v) {
                Some(&u) if u < n => b.insert(u),
                Some(_) => {}
                None => b.insert_range(..),
            }
            bases.push(b);
        }
        let mut order: Vec<usize> = (0..self.vars.len()).collect();
        order.sort_by(|&a, &b| self.vars[a].cmp(&self.vars[b]));
        let search = Search { emb: self, g, fwd: RefCell::new(vec![vec![None; n]; self.atoms.len()]) };
        let mut assign = vec![None; self.vars.len()];
        if search.run(&mut assign, &bases, &order) {
            Some(
                self.vars
                    .iter()
                    .zip(assign)
                    .map(|(v, u)| (v.clone(), u.expect("all variables assigned")))
                    .collect(),
            )
        } else {
            None
        }
    }

    /// Independent per-atom check of a candidate homomorphism.
    pub fn verify<G: RegularGraph + ?Sized>(&self, g: &G, h: &Homomorphism) -> bool {
        self.atoms.iter().enumerate().all(|(i, &(s, d))| {
            match (h.get(&self.vars[s]), h.get(&self.vars[d])) {
                (Some(&u), Some(&v)) => u < g.node_count() && g.reach(i, &self.nfas[i], u).contains(v),
                _ => false,
            }
        })
    }
}

/// Alphabet used when embedding `q` into `kb`: labels of both.
pub fn embedding_alphabet(q: &Crpq, kb: &KnowledgeBase) -> BTreeSet<Label> {
    let mut al = q.labels();
    al.extend(kb.labels());
    if q.has_wildcard() && al.is_empty() {
        al.insert(Label::fresh());
    }
    al
}

/// Extend `pin` to a satisfying homomorphism of `q` into `kb`, if possible.
pub fn find_embedding(q: &Crpq, kb: &KnowledgeBase, pin: &BTreeMap<String, usize>) -> Option<Homomorphism> {
    let emb = Embedder::new(q, &embedding_alphabet(q, kb)).expect("alphabet covers the query");
    emb.find(&IndexedKb::new(kb), pin)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompressedPosition {
    Node(usize),
    Inside { edge: usize, copy: BigUint, offset: usize },
}

/// A compressed knowledge base with the middle of long power edges replaced
/// by a single jump whose effect is a matrix power.
pub struct WindowedGraph {
    n: usize,
    positions: Vec<CompressedPosition>,
    out: Vec<Vec<(Label, usize)>>,
    jumps: Vec<(usize, Vec<Label>, BigUint, usize)>,
    jump_mats: Vec<Vec<TransitionMatrix>>,
}

impl WindowedGraph {
    /// Window width in copies for `vars` query variables and combined
    /// index/period `(i, p)`.
    pub fn window(vars: usize, index: usize, period: usize) -> u64 {
        (vars.max(1) * (index + period)) as u64
    }

    pub fn build(
        cm: &CompressedCanonicalModel,
        nfas: &[Nfa],
        vars: usize,
        period_limit: usize,
    ) -> Result<WindowedGraph> {
        let ckb = &cm.ckb;
        let mut positions: Vec<CompressedPosition> =
            (0..ckb.nodes.len()).map(CompressedPosition::Node).collect();
        let mut out: Vec<Vec<(Label, usize)>> = vec![Vec::new(); ckb.nodes.len()];
        for (u, l, v) in &ckb.plain_edges {
            out[*u].push((l.clone(), *v));
        }
        let mut jumps = Vec::new();
        let new_node = |positions: &mut Vec<CompressedPosition>,
                            out: &mut Vec<Vec<(Label, usize)>>,
                            p: CompressedPosition| {
            positions.push(p);
            out.push(Vec::new());
            positions.len() - 1
        };
        for (ei, pe) in ckb.power_edges.iter().enumerate() {
            let wl = pe.word.len();
            let mut index = 0usize;
            let mut period = 1usize;
            for nfa in nfas {
                let m = word_matrix(nfa, &pe.word);
                let (i, p) = index_and_period(&m, period_limit).ok_or_else(|| {
                    Error::SizeCap(format!("no matrix cycle within {period_limit} powers"))
                })?;
                index = index.max(i);
                period = lcm(period, p);
            }
            let window = WindowedGraph::window(vars, index, period);
            let ell = pe.mult.clone();
            let explicit_all = ell <= BigUint::from(2 * window);
            // Copies [0, left) and [right, ell) are explicit.
            let (left, right) = if explicit_all {
                (ell.clone(), ell.clone())
            } else {
                (BigUint::from(window), &ell - BigUint::from(window))
            };
            let chain_segment = |start: usize,
                                     first_copy: &BigUint,
                                     copies: u64,
                                     end: Option<usize>,
                                     positions: &mut Vec<CompressedPosition>,
                                     out: &mut Vec<Vec<(Label, usize)>>|
             -> usize {
                let total = copies as usize * wl;
                let mut prev = start;
                for k in 0..total {
                    let next = if k + 1 == total && end.is_some() {
                        end.unwrap()
                    } else {
                        let copy = first_copy + BigUint::from((k + 1) / wl);
                        new_node(
                            positions,
                            out,
                            CompressedPosition::Inside { edge: ei, copy, offset: (k + 1) % wl },
                        )
                    };
                    out[prev].push((pe.word[k % wl].clone(), next));
                    prev = next;
                }
                prev
            };
            if explicit_all {
                let copies = ell.to_u64().expect("small multiplicity");
                if copies > 0 {
                    chain_segment(pe.src, &BigUint::zero(), copies, Some(pe.dst), &mut positions, &mut out);
                }
            } else {
                let l_end =
                    chain_segment(pe.src, &BigUint::zero(), window, None, &mut positions, &mut out);
                let r_start = new_node(
                    &mut positions,
                    &mut out,
                    CompressedPosition::Inside { edge: ei, copy: right.clone(), offset: 0 },
                );
                chain_segment(r_start, &right, window, Some(pe.dst), &mut positions, &mut out);
                jumps.push((l_end, pe.word.clone(), &right - &left, r_start));
            }
        }
        let jump_mats = nfas
            .iter()
            .map(|nfa| {
                jumps
                    .iter()
                    .map(|(_, w, e, _)| matrix_power(&word_matrix(nfa, w), e))
                    .collect()
            })
            .collect();
        Ok(WindowedGraph { n: positions.len(), positions, out, jumps, jump_mats })
    }

    pub fn position(&self, node: usize) -> &CompressedPosition {
        &self.positions[node]
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Transition matrix of `w`; zero if `w` uses a label outside the alphabet.
pub fn word_matrix(nfa: &Nfa, w: &[Label]) -> TransitionMatrix {
    let mut m = TransitionMatrix::identity(nfa.n_states());
    for l in w {
        match nfa.symbol_index(l) {
            Some(a) => m = m.mul(&nfa.symbol_matrix(a)),
            None => return TransitionMatrix::zero(nfa.n_states()),
        }
    }
    m
}

impl RegularGraph for WindowedGraph {
    fn node_count(&self) -> usize {
        self.n
    }

    fn reach(&self, nfa_id: usize, nfa: &Nfa, from: usize) -> FixedBitSet {
        let nq = nfa.n_states();
        let mut seen = FixedBitSet::with_capacity(nq * self.n);
        let mut result = FixedBitSet::with_capacity(self.n);
        let mut queue = VecDeque::new();
        for q in nfa.start().ones() {
            seen.insert(q * self.n + from);
            queue.push_back((q, from));
        }
        let mut visit = |q: usize, v: usize, queue: &mut VecDeque<(usize, usize)>| {
            let id = q * self.n + v;
            if !seen.contains(id) {
                seen.insert(id);
                queue.push_back((q, v));
            }
        };
        while let Some((q, u)) = queue.pop_front() {
            if nfa.finals().contains(q) {
                result.insert(u);
            }
            for (l, v) in &self.out[u] {
                if let Some(a) = nfa.symbol_index(l) {
                    for r in nfa.successors(a, q).ones() {
                        visit(r, *v, &mut queue);
                    }
                }
            }
            for (ji, (src, _, _, dst)) in self.jumps.iter().enumerate() {
                if *src == u {
                    for r in self.jump_mats[nfa_id][ji].row(q).ones() {
                        visit(r, *dst, &mut queue);
                    }
                }
            }
        }
        result
    }
}

/// Embedding into a compressed model: explicit boundary windows at each end
/// of long power edges, middle blocks crossed via matrix powers.
pub fn find_embedding_compressed(
    q: &Crpq,
    cm: &CompressedCanonicalModel,
    pin: &BTreeMap<String, usize>,
) -> Result<Option<BTreeMap<String, CompressedPosition>>> {
    let mut al = q.labels();
    al.extend(cm.ckb.plain_edges.iter().map(|e| e.1.clone()));
    al.extend(cm.ckb.power_edges.iter().flat_map(|p| p.word.iter().cloned()));
    let emb = Embedder::new(q, &al)?;
    find_embedding_compressed_with(&emb, cm, pin, 100_000)
}

pub fn find_embedding_compressed_with(
    emb: &Embedder,
    cm: &CompressedCanonicalModel,
    pin: &BTreeMap<String, usize>,
    period_limit: usize,
) -> Result<Option<BTreeMap<String, CompressedPosition>>> {
    let g = WindowedGraph::build(cm, emb.nfas(), emb.var_count(), period_limit)?;
    Ok(emb
        .find(&g, pin)
        .map(|h| h.into_iter().map(|(v, n)| (v, g.position(n).clone())).collect()))
}
