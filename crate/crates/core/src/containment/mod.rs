//! Containment decision procedures: fragment dispatch, the exact fragment
//! algorithms, and the bounded canonical-model oracle.

mod bounded;
mod left;
mod path;
mod right;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde_json::json;

pub use bounded::{certificate, contain_bounded};
pub use left::{contain_left_single, contain_left_w, w_thresholds};
pub use path::{contain_left_path, path_applicable};
pub use right::{contain_right_a_astar, contain_right_cq};

use crate::canonical::CanonicalModel;
use crate::embedding::{find_embedding, Embedder};
use crate::error::{Error, Result};
use crate::kb::{IndexedKb, KnowledgeBase};
use crate::query_model::{
    classify_query, is_w_query, working_alphabet, Atom, Crpq, Label, Regex, WildcardPolicy,
};
use crate::regex_engine::compile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Syntactic,
    EmptyLeft,
    LeftSingle,
    LeftPath,
    RightCq,
    RightAAstar,
    LeftW,
    Bounded,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Syntactic,
        Method::EmptyLeft,
        Method::LeftSingle,
        Method::LeftPath,
        Method::RightCq,
        Method::RightAAstar,
        Method::LeftW,
        Method::Bounded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Syntactic => "syntactic",
            Method::EmptyLeft => "empty_left",
            Method::LeftSingle => "left_single",
            Method::LeftPath => "left_path",
            Method::RightCq => "right_cq",
            Method::RightAAstar => "right_A_astar",
            Method::LeftW => "left_w",
            Method::Bounded => "bounded",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Instance(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Contained,
    NotContained(CanonicalModel),
    /// Search stopped at the given word-length bound or cap.
    Unknown(Option<usize>),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stats {
    pub models_examined: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub method: Method,
    /// Word-length bound behind a bounded-oracle verdict.
    pub bound: Option<usize>,
    pub stats: Stats,
}

impl Decision {
    fn new(verdict: Verdict, method: Method, models: u64, start: Instant) -> Decision {
        Decision {
            verdict,
            method,
            bound: None,
            stats: Stats { models_examined: models, elapsed: start.elapsed() },
        }
    }

    pub fn is_contained(&self) -> bool {
        matches!(self.verdict, Verdict::Contained)
    }

    pub fn is_not_contained(&self) -> bool {
        matches!(self.verdict, Verdict::NotContained(_))
    }

    pub fn is_definitive(&self) -> bool {
        !matches!(self.verdict, Verdict::Unknown(_))
    }

    pub fn witness(&self) -> Option<&CanonicalModel> {
        match &self.verdict {
            Verdict::NotContained(w) => Some(w),
            _ => None,
        }
    }

    pub fn verdict_str(&self) -> &'static str {
        match self.verdict {
            Verdict::Contained => "contained",
            Verdict::NotContained(_) => "not_contained",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "verdict": self.verdict_str(),
            "method": self.method.as_str(),
            "bound": match self.verdict {
                Verdict::Unknown(b) => b.or(self.bound),
                _ => self.bound,
            },
            "witness": self.witness().map(|w| w.to_json()),
            "stats": {
                "models_examined": self.stats.models_examined,
                "elapsed_ms": self.stats.elapsed.as_secs_f64() * 1000.0,
            },
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Decision> {
        let bad = |what: &str| Error::Instance(format!("decision JSON: bad `{what}`"));
        let method: Method = v["method"].as_str().ok_or_else(|| bad("method"))?.parse()?;
        let bound = v["bound"].as_u64().map(|b| b as usize);
        let verdict = match v["verdict"].as_str().ok_or_else(|| bad("verdict"))? {
            "contained" => Verdict::Contained,
            "not_contained" => Verdict::NotContained(CanonicalModel::from_json(&v["witness"])?),
            "unknown" => Verdict::Unknown(bound),
            _ => return Err(bad("verdict")),
        };
        let stats = Stats {
            models_examined: v["stats"]["models_examined"].as_u64().unwrap_or(0),
            elapsed: Duration::from_secs_f64(v["stats"]["elapsed_ms"].as_f64().unwrap_or(0.0) / 1000.0),
        };
        Ok(Decision { verdict, method, bound, stats })
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    /// Forced algorithm; `None` dispatches on the fragment.
    pub method: Option<Method>,
    /// Word-length bound for the bounded oracle when no certificate is known.
    pub max_word_len: usize,
    /// Cap on per-atom abstraction options and on enumerated compressed models.
    pub enum_cap: usize,
    /// Cap on homomorphism searches per top-level branch.
    pub model_budget: u64,
    /// Wall-clock budget.
    pub budget: Option<Duration>,
    /// Worker threads for the oracle; 0 uses the ambient rayon pool.
    pub workers: usize,
    /// Largest matrix power explored when looking for index and period.
    pub period_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            method: None,
            max_word_len: 4,
            enum_cap: 200_000,
            model_budget: 2_000_000,
            budget: None,
            workers: 0,
            period_limit: 1 << 16,
        }
    }
}

impl Config {
    pub(crate) fn deadline(&self, start: Instant) -> Option<Instant> {
        self.budget.map(|b| start + b)
    }
}

pub(crate) fn timed_out(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

fn check_arity(q1: &Crpq, q2: &Crpq) -> Result<()> {
    if q1.arity() != q2.arity() {
        return Err(Error::Arity { left: q1.arity(), right: q2.arity() });
    }
    Ok(())
}

/// Pin map for `q2`'s distinguished variables under `nu`; `None` when two
/// positions sharing a variable land on different nodes.
pub(crate) fn pins(
    q1: &Crpq,
    q2: &Crpq,
    nu: &BTreeMap<String, usize>,
) -> Option<BTreeMap<String, usize>> {
    let mut pin = BTreeMap::new();
    for (x, y) in q1.distinguished.iter().zip(&q2.distinguished) {
        let n = nu[x];
        if *pin.entry(y.clone()).or_insert(n) != n {
            return None;
        }
    }
    Some(pin)
}

/// Does `q2` embed into `kb` with its distinguished variables pinned?
pub(crate) fn q2_embeds(
    emb: &Embedder,
    q1: &Crpq,
    q2: &Crpq,
    kb: &KnowledgeBase,
    nu: &BTreeMap<String, usize>,
) -> bool {
    match pins(q1, q2, nu) {
        Some(pin) => emb.find(&IndexedKb::new(kb), &pin).is_some(),
        None => false,
    }
}

/// Independent re-check of a non-containment witness.
pub fn verify_witness(q1: &Crpq, q2: &Crpq, w: &CanonicalModel) -> bool {
    if q1.arity() != q2.arity() {
        return false;
    }
    let vars = q1.variables();
    if vars.iter().any(|v| w.nu.get(v).map_or(true, |&n| n >= w.kb.node_count())) {
        return false;
    }
    let mut al = q1.labels();
    al.extend(q2.labels());
    al.extend(w.kb.labels());
    if al.is_empty() {
        al.insert(Label::fresh());
    }
    let Ok(e1) = Embedder::new(q1, &al) else { return false };
    let ikb = IndexedKb::new(&w.kb);
    let h: BTreeMap<String, usize> = vars.iter().map(|v| (v.clone(), w.nu[v])).collect();
    if !e1.verify(&ikb, &h) {
        return false;
    }
    let Ok(e2) = Embedder::new(q2, &al) else { return false };
    match pins(q1, q2, &w.nu) {
        Some(pin) => e2.find(&ikb, &pin).is_none(),
        None => true,
    }
}

/// One-way homomorphism check on the query graphs, matching atoms with
/// syntactically identical regexes.
pub fn syntactic_homomorphism(q1: &Crpq, q2: &Crpq) -> bool {
    if q1.arity() != q2.arity() {
        return false;
    }
    let mut names: BTreeMap<String, Label> = BTreeMap::new();
    let mut kb = KnowledgeBase::new();
    for v in q1.variables_ordered() {
        kb.add_node(&v);
    }
    for a in &q1.atoms {
        let n = names.len();
        let l = names
            .entry(a.regex.to_string())
            .or_insert_with(|| Label::reserved(&format!("r{n}")))
            .clone();
        kb.add_edge(&a.src, l, &a.dst);
    }
    let mut atoms = Vec::new();
    for a in &q2.atoms {
        match names.get(&a.regex.to_string()) {
            Some(l) => atoms.push(Atom::new(&a.src, Regex::Symbol(l.clone()), &a.dst)),
            None => return false,
        }
    }
    let Ok(pattern) = Crpq::new(q2.distinguished.clone(), atoms) else { return false };
    let nu: BTreeMap<String, usize> =
        q1.variables_ordered().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    match pins(q1, q2, &nu) {
        Some(pin) => find_embedding(&pattern, &kb, &pin).is_some(),
        None => false,
    }
}

/// True when some atom of `q` denotes the empty language.
pub fn has_empty_atom(q: &Crpq) -> bool {
    let al: BTreeSet<Label> = working_alphabet(q, q, WildcardPolicy::FreshSymbol).unwrap_or_default();
    q.atoms.iter().any(|a| compile(&a.regex, &al).map_or(false, |n| n.is_empty()))
}

/// Methods applicable to the pair, in dispatch order.
pub fn applicable_methods(q1: &Crpq, q2: &Crpq) -> Vec<Method> {
    let c1 = classify_query(q1);
    let c2 = classify_query(q2);
    let mut out = Vec::new();
    if c1.is_a() {
        out.push(Method::LeftSingle);
    }
    if path_applicable(q1, q2) {
        out.push(Method::LeftPath);
    }
    if c2.is_a() {
        out.push(Method::RightCq);
    }
    if c2.is_a_astar_upper() {
        out.push(Method::RightAAstar);
    }
    if is_w_query(q1) {
        out.push(Method::LeftW);
    }
    out.push(Method::Bounded);
    out
}

/// Certificates up to this length are used automatically by the oracle.
const AUTO_CERT_MAX: usize = 12;

/// Run one named algorithm.
pub fn run_method(q1: &Crpq, q2: &Crpq, m: Method, cfg: &Config) -> Result<Decision> {
    check_arity(q1, q2)?;
    let start = Instant::now();
    match m {
        Method::Syntactic => Ok(if syntactic_homomorphism(q1, q2) {
            Decision::new(Verdict::Contained, m, 0, start)
        } else {
            Decision::new(Verdict::Unknown(None), m, 0, start)
        }),
        Method::EmptyLeft => Ok(if has_empty_atom(q1) {
            Decision::new(Verdict::Contained, m, 0, start)
        } else {
            Decision::new(Verdict::Unknown(None), m, 0, start)
        }),
        Method::LeftSingle => contain_left_single(q1, q2),
        Method::LeftPath => contain_left_path(q1, q2, cfg),
        Method::RightCq => contain_right_cq(q1, q2, cfg),
        Method::RightAAstar => contain_right_a_astar(q1, q2, cfg),
        Method::LeftW => contain_left_w(q1, q2, cfg),
        Method::Bounded => {
            let bound = match certificate(q1, q2, cfg) {
                Some(c) if c <= AUTO_CERT_MAX => c.max(cfg.max_word_len),
                _ => cfg.max_word_len,
            };
            contain_bounded(q1, q2, bound, cfg)
        }
    }
}

/// Decide `q1 ⊆ q2`, dispatching on the fragment of each side; an exact
/// method that gives up hands over to the next applicable one.
pub fn decide(q1: &Crpq, q2: &Crpq, cfg: &Config) -> Result<Decision> {
    check_arity(q1, q2)?;
    if let Some(m) = cfg.method {
        return run_method(q1, q2, m, cfg);
    }
    let start = Instant::now();
    if syntactic_homomorphism(q1, q2) {
        return Ok(Decision::new(Verdict::Contained, Method::Syntactic, 0, start));
    }
    if has_empty_atom(q1) {
        return Ok(Decision::new(Verdict::Contained, Method::EmptyLeft, 0, start));
    }
    let mut last = None;
    for m in applicable_methods(q1, q2) {
        let d = run_method(q1, q2, m, cfg)?;
        if d.is_definitive() {
            return Ok(d);
        }
        last = Some(d);
    }
    Ok(last.expect("bounded always applies"))
}
