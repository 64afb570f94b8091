//! Knowledge bases (edge-labelled directed graphs), regular reachability and
//! the compressed representation with word-power edges.
//!
//! JSON format: `{"nodes": ["u", "v"], "edges": [["u", "a", "v"]]}`.
//! TSV format: one `src<TAB>label<TAB>dst` edge per line; a line
//! `node<TAB><TAB>` declares an isolated node.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query_model::Label;
use crate::regex_engine::Nfa;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<(usize, Label, usize)>,
    edge_set: BTreeSet<(usize, Label, usize)>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node if absent and returns its id.
    pub fn add_node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.nodes.push(name.to_string());
        self.index.insert(name.to_string(), self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    pub fn add_edge_ids(&mut self, u: usize, l: Label, v: usize) {
        assert!(u < self.nodes.len() && v < self.nodes.len());
        if self.edge_set.insert((u, l.clone(), v)) {
            self.edges.push((u, l, v));
        }
    }

    pub fn add_edge(&mut self, u: &str, l: Label, v: &str) {
        let (u, v) = (self.add_node(u), self.add_node(v));
        self.add_edge_ids(u, l, v);
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, Label, usize)] {
        &self.edges
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn node_name(&self, id: usize) -> &str {
        &self.nodes[id]
    }

    pub fn has_edge(&self, u: usize, l: &Label, v: usize) -> bool {
        self.edge_set.contains(&(u, l.clone(), v))
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.edges.iter().map(|e| e.1.clone()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(KbFile::from(self)).expect("kb serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<KnowledgeBase> {
        let f: KbFile = serde_json::from_value(v.clone())?;
        f.into_kb()
    }

    pub fn to_tsv(&self) -> String {
        let mut touched = vec![false; self.nodes.len()];
        let mut out = String::new();
        for (u, l, v) in &self.edges {
            touched[*u] = true;
            touched[*v] = true;
            let _ = writeln!(out, "{}\t{}\t{}", self.nodes[*u], l, self.nodes[*v]);
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !touched[i] {
                let _ = writeln!(out, "{n}\t\t");
            }
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<KnowledgeBase> {
        let mut kb = KnowledgeBase::new();
        let mut pending_nodes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            match cols.as_slice() {
                [n, "", ""] | [n] => pending_nodes.push(n.trim().to_string()),
                [u, l, v] => kb.add_edge(u.trim(), Label::reserved(l.trim()), v.trim()),
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: "expected three tab-separated columns".into(),
                    })
                }
            }
        }
        for n in pending_nodes {
            kb.add_node(&n);
        }
        Ok(kb)
    }
}

#[derive(Serialize, Deserialize)]
struct KbFile {
    nodes: Vec<String>,
    edges: Vec<(String, Label, String)>,
}

impl From<&KnowledgeBase> for KbFile {
    fn from(kb: &KnowledgeBase) -> Self {
        KbFile {
            nodes: kb.nodes.clone(),
            edges: kb
                .edges
                .iter()
                .map(|(u, l, v)| (kb.nodes[*u].clone(), l.clone(), kb.nodes[*v].clone()))
                .collect(),
        }
    }
}

impl KbFile {
    fn into_kb(self) -> Result<KnowledgeBase> {
        let mut kb = KnowledgeBase::new();
        for n in &self.nodes {
            kb.add_node(n);
        }
        for (u, l, v) in self.edges {
            let ui = kb.node_id(&u).ok_or(Error::UnknownNode(u))?;
            let vi = kb.node_id(&v).ok_or(Error::UnknownNode(v))?;
            kb.add_edge_ids(ui, l, vi);
        }
        Ok(kb)
    }
}

/// Adjacency view of a knowledge base for repeated reachability queries.
#[derive(Clone, Debug)]
pub struct IndexedKb<'a> {
    pub kb: &'a KnowledgeBase,
    labels: Vec<Label>,
    out: Vec<Vec<(usize, usize)>>,
}

impl<'a> IndexedKb<'a> {
    pub fn new(kb: &'a KnowledgeBase) -> Self {
        let labels: Vec<Label> = kb.labels().into_iter().collect();
        let pos: BTreeMap<&Label, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let mut out = vec![Vec::new(); kb.node_count()];
        for (u, l, v) in &kb.edges {
            out[*u].push((pos[l], *v));
        }
        IndexedKb { kb, labels, out }
    }

    /// Nodes reachable from `from` via a path labelled in `L(nfa)`.
    pub fn reach(&self, nfa: &Nfa, from: usize) -> FixedBitSet {
        let sym: Vec<Option<usize>> = self.labels.iter().map(|l| nfa.symbol_index(l)).collect();
        let nq = nfa.n_states();
        let n = self.kb.node_count();
        let mut seen = FixedBitSet::with_capacity(nq * n);
        let mut result = FixedBitSet::with_capacity(n);
        let mut queue = VecDeque::new();
        for q in nfa.start().ones() {
            seen.insert(q * n + from);
            queue.push_back((q, from));
        }
        while let Some((q, u)) = queue.pop_front() {
            if nfa.finals().contains(q) {
                result.insert(u);
            }
            for &(l, v) in &self.out[u] {
                if let Some(a) = sym[l] {
                    for r in nfa.successors(a, q).ones() {
                        let id = r * n + v;
                        if !seen.contains(id) {
                            seen.insert(id);
                            queue.push_back((r, v));
                        }
                    }
                }
            }
        }
        result
    }
}

/// Nodes `v` such that some path from `from` to `v` is labelled in `L(lang)`.
pub fn regular_reachable(kb: &KnowledgeBase, lang: &Nfa, from: usize) -> BTreeSet<usize> {
    IndexedKb::new(kb).reach(lang, from).ones().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerEdge {
    pub src: usize,
    pub word: Vec<Label>,
    pub mult: BigUint,
    pub dst: usize,
}

/// A knowledge base whose power edges `(u, w, ℓ, v)` stand for fresh chains
/// spelling `w^ℓ` from `u` to `v`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompressedKb {
    pub nodes: Vec<String>,
    pub plain_edges: Vec<(usize, Label, usize)>,
    pub power_edges: Vec<PowerEdge>,
}

impl CompressedKb {
    pub fn add_node(&mut self, name: &str) -> usize {
        if let Some(i) = self.nodes.iter().position(|n| n == name) {
            return i;
        }
        self.nodes.push(name.to_string());
        self.nodes.len() - 1
    }

    pub fn add_power_edge(&mut self, src: usize, word: Vec<Label>, mult: BigUint, dst: usize) -> Result<()> {
        if word.is_empty() {
            return Err(Error::EmptyPowerWord);
        }
        if mult.is_zero() && src != dst {
            return Err(Error::ZeroPowerEdge(self.nodes[src].clone(), self.nodes[dst].clone()));
        }
        self.power_edges.push(PowerEdge { src, word, mult, dst });
        Ok(())
    }

    pub fn max_multiplicity(&self) -> BigUint {
        self.power_edges.iter().map(|p| p.mult.clone()).max().unwrap_or_default()
    }

    /// Plain knowledge base with every power edge unfolded.
    pub fn expand(&self, cap: u64) -> Result<KnowledgeBase> {
        let mut kb = KnowledgeBase::new();
        for n in &self.nodes {
            kb.add_node(n);
        }
        for (u, l, v) in &self.plain_edges {
            kb.add_edge_ids(*u, l.clone(), *v);
        }
        for (ei, p) in self.power_edges.iter().enumerate() {
            if p.word.is_empty() {
                return Err(Error::EmptyPowerWord);
            }
            let ell = match p.mult.to_u64() {
                Some(l) if l <= cap => l as usize,
                _ => return Err(Error::MultiplicityCap { mult: p.mult.to_string(), cap }),
            };
            if ell == 0 {
                if p.src != p.dst {
                    return Err(Error::ZeroPowerEdge(
                        self.nodes[p.src].clone(),
                        self.nodes[p.dst].clone(),
                    ));
                }
                continue;
            }
            let total = ell * p.word.len();
            let mut prev = p.src;
            for k in 0..total {
                let next = if k + 1 == total {
                    p.dst
                } else {
                    kb.add_node(&format!("_p{}_{}", ei, k + 1))
                };
                kb.add_edge_ids(prev, p.word[k % p.word.len()].clone(), next);
                prev = next;
            }
        }
        Ok(kb)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<(String, Label, String)> = self
            .plain_edges
            .iter()
            .map(|(u, l, v)| (self.nodes[*u].clone(), l.clone(), self.nodes[*v].clone()))
            .collect();
        let powers: Vec<serde_json::Value> = self
            .power_edges
            .iter()
            .map(|p| {
                serde_json::json!([
                    self.nodes[p.src],
                    p.word,
                    p.mult.to_string(),
                    self.nodes[p.dst]
                ])
            })
            .collect();
        serde_json::json!({"nodes": self.nodes, "edges": edges, "power_edges": powers})
    }
}
