//! CRPQ data model: labels, regular expressions, atoms, queries, fragment
//! classification and normalization.
//!
//! The text format for queries is
//!
//! ```text
//! Q(x1,x2) <- x1 <app> jm1, x2 <app> jm1, jm1 <app> jm2
//! ```
//!
//! Regex syntax: juxtaposition is concatenation, `+` is union, postfix `*` is
//! Kleene star, `_` is the wildcard, `()` is the empty word and `{}` the empty
//! language. A bare label is one letter followed by optional digits (`a`,
//! `t12`) or a single digit (`0`); any other label is written in angle
//! brackets (`<app>`, `<t_1>`). `.` and `·` may be used as explicit
//! concatenation separators and whitespace is ignored inside a regex.

mod classify;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use classify::{
    classify_query, classify_regex, is_fixed_word, is_w_query, is_w_regex, AtomKind,
    FragmentClass,
};
pub use parse::{parse_query, parse_regex};

/// Reserved label used for wildcard positions under the fresh-symbol policy.
pub const FRESH_LABEL: &str = "$fresh";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    /// A user label: a non-empty token of letters, digits and underscores.
    pub fn new(name: &str) -> Result<Label> {
        if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            Ok(Label(name.to_string()))
        } else {
            Err(Error::Label(name.to_string()))
        }
    }

    /// Internal labels (`$fresh`, separators) that may use `$`.
    pub fn reserved(name: &str) -> Label {
        assert!(!name.is_empty());
        Label(name.to_string())
    }

    pub fn fresh() -> Label {
        Label::reserved(FRESH_LABEL)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub(crate) fn is_bare(&self) -> bool {
        let mut cs = self.0.chars();
        match cs.next() {
            Some(c) if c.is_ascii_alphabetic() => cs.all(|d| d.is_ascii_digit()),
            Some(c) if c.is_ascii_digit() => self.0.len() == 1,
            _ => false,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty label"));
        }
        Ok(Label(s))
    }
}

pub fn label(name: &str) -> Label {
    Label::new(name).unwrap_or_else(|_| Label::reserved(name))
}

pub fn word(names: &[&str]) -> Vec<Label> {
    names.iter().map(|n| label(n)).collect()
}

pub fn render_word(w: &[Label]) -> String {
    w.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regex {
    Empty,
    Epsilon,
    Symbol(Label),
    Wildcard,
    Concat(Box<Regex>, Box<Regex>),
    Union(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    pub fn sym(name: &str) -> Regex {
        Regex::Symbol(label(name))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn union(a: Regex, b: Regex) -> Regex {
        Regex::Union(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex) -> Regex {
        Regex::Star(Box::new(a))
    }

    /// Left-nested concatenation; the empty list is ε.
    pub fn concat_all(items: impl IntoIterator<Item = Regex>) -> Regex {
        items.into_iter().reduce(Regex::concat).unwrap_or(Regex::Epsilon)
    }

    /// Left-nested union; the empty list is ∅.
    pub fn union_all(items: impl IntoIterator<Item = Regex>) -> Regex {
        items.into_iter().reduce(Regex::union).unwrap_or(Regex::Empty)
    }

    pub fn word(w: &[Label]) -> Regex {
        Regex::concat_all(w.iter().cloned().map(Regex::Symbol))
    }

    /// Number of leaves (symbols, wildcards, ε and ∅ nodes).
    pub fn leaves(&self) -> usize {
        match self {
            Regex::Empty | Regex::Epsilon | Regex::Symbol(_) | Regex::Wildcard => 1,
            Regex::Concat(a, b) | Regex::Union(a, b) => a.leaves() + b.leaves(),
            Regex::Star(a) => a.leaves(),
        }
    }

    pub fn collect_labels(&self, out: &mut BTreeSet<Label>) {
        match self {
            Regex::Symbol(l) => {
                out.insert(l.clone());
            }
            Regex::Concat(a, b) | Regex::Union(a, b) => {
                a.collect_labels(out);
                b.collect_labels(out);
            }
            Regex::Star(a) => a.collect_labels(out),
            _ => {}
        }
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    pub fn has_wildcard(&self) -> bool {
        match self {
            Regex::Wildcard => true,
            Regex::Concat(a, b) | Regex::Union(a, b) => a.has_wildcard() || b.has_wildcard(),
            Regex::Star(a) => a.has_wildcard(),
            _ => false,
        }
    }

    pub fn nullable(&self) -> bool {
        match self {
            Regex::Epsilon | Regex::Star(_) => true,
            Regex::Empty | Regex::Symbol(_) | Regex::Wildcard => false,
            Regex::Concat(a, b) => a.nullable() && b.nullable(),
            Regex::Union(a, b) => a.nullable() || b.nullable(),
        }
    }

    /// Top-level concatenation factors, flattened.
    pub fn factors(&self) -> Vec<&Regex> {
        let mut out = Vec::new();
        fn go<'a>(r: &'a Regex, out: &mut Vec<&'a Regex>) {
            match r {
                Regex::Concat(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Top-level union alternatives, flattened.
    pub fn alternatives(&self) -> Vec<&Regex> {
        let mut out = Vec::new();
        fn go<'a>(r: &'a Regex, out: &mut Vec<&'a Regex>) {
            match r {
                Regex::Union(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Star(ε), Star(∅) become ε and nested stars collapse.
    pub fn simplify(&self) -> Regex {
        match self {
            Regex::Concat(a, b) => Regex::concat(a.simplify(), b.simplify()),
            Regex::Union(a, b) => Regex::union(a.simplify(), b.simplify()),
            Regex::Star(a) => match a.simplify() {
                Regex::Epsilon | Regex::Empty => Regex::Epsilon,
                Regex::Star(inner) => Regex::Star(inner),
                other => Regex::star(other),
            },
            other => other.clone(),
        }
    }

    /// Replace every wildcard by the given label.
    pub fn substitute_wildcard(&self, l: &Label) -> Regex {
        match self {
            Regex::Wildcard => Regex::Symbol(l.clone()),
            Regex::Concat(a, b) => {
                Regex::concat(a.substitute_wildcard(l), b.substitute_wildcard(l))
            }
            Regex::Union(a, b) => Regex::union(a.substitute_wildcard(l), b.substitute_wildcard(l)),
            Regex::Star(a) => Regex::star(a.substitute_wildcard(l)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parse::render_regex(self))
    }
}

impl std::str::FromStr for Regex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Regex> {
        parse_regex(s)
    }
}

impl Serialize for Regex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Regex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_regex(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub src: String,
    pub regex: Regex,
    pub dst: String,
}

impl Atom {
    pub fn new(src: &str, regex: Regex, dst: &str) -> Atom {
        Atom { src: src.to_string(), regex, dst: dst.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Crpq {
    pub distinguished: Vec<String>,
    pub atoms: Vec<Atom>,
}

impl Crpq {
    pub fn new(distinguished: Vec<String>, atoms: Vec<Atom>) -> Result<Crpq> {
        let q = Crpq { distinguished, atoms };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let vars = self.variables();
        let in_atoms: BTreeSet<&String> =
            self.atoms.iter().flat_map(|a| [&a.src, &a.dst]).collect();
        for x in &self.distinguished {
            if !in_atoms.contains(x) {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("distinguished variable `{x}` occurs in no atom"),
                });
            }
        }
        for v in &vars {
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Parse { line: 1, msg: format!("invalid variable `{v}`") });
            }
        }
        Ok(())
    }

    /// Variables in order of first occurrence (head first, then atoms).
    pub fn variables_ordered(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let all = self
            .distinguished
            .iter()
            .chain(self.atoms.iter().flat_map(|a| [&a.src, &a.dst]));
        for v in all {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.variables_ordered().into_iter().collect()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            a.regex.collect_labels(&mut out);
        }
        out
    }

    pub fn has_wildcard(&self) -> bool {
        self.atoms.iter().any(|a| a.regex.has_wildcard())
    }

    /// |Q| = number of atoms + total number of regex leaves.
    pub fn size(&self) -> usize {
        self.atoms.len() + self.atoms.iter().map(|a| a.regex.leaves()).sum::<usize>()
    }

    pub fn arity(&self) -> usize {
        self.distinguished.len()
    }

    pub fn substitute_wildcard(&self, l: &Label) -> Crpq {
        Crpq {
            distinguished: self.distinguished.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(&a.src, a.regex.substitute_wildcard(l), &a.dst))
                .collect(),
        }
    }

    /// A fresh variable name of the form `_vN` not used in the query.
    pub fn fresh_variable(&self, counter: &mut usize) -> String {
        let vars = self.variables();
        loop {
            *counter += 1;
            let name = format!("_v{}", *counter);
            if !vars.contains(&name) {
                return name;
            }
        }
    }
}

impl fmt::Display for Crpq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parse::render_query(self))
    }
}

impl std::str::FromStr for Crpq {
    type Err = Error;
    fn from_str(s: &str) -> Result<Crpq> {
        parse_query(s)
    }
}

impl Serialize for Crpq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Crpq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_query(&s).map_err(serde::de::Error::custom)
    }
}

/// Split every concatenation atom into a chain over fresh variables.
pub fn normalize_query(q: &Crpq) -> Crpq {
    let mut counter = 0usize;
    let mut out = Crpq { distinguished: q.distinguished.clone(), atoms: Vec::new() };
    let mut taken = q.variables();
    for atom in &q.atoms {
        let r = atom.regex.simplify();
        let factors: Vec<Regex> = {
            let fs = r.factors();
            let non_eps: Vec<Regex> =
                fs.iter().filter(|f| ***f != Regex::Epsilon).map(|f| (*f).clone()).collect();
            if non_eps.is_empty() {
                vec![Regex::Epsilon]
            } else {
                non_eps
            }
        };
        if factors.len() == 1 {
            out.atoms.push(Atom::new(&atom.src, factors.into_iter().next().unwrap(), &atom.dst));
            continue;
        }
        let mut prev = atom.src.clone();
        let n = factors.len();
        for (i, f) in factors.into_iter().enumerate() {
            let next = if i + 1 == n {
                atom.dst.clone()
            } else {
                loop {
                    counter += 1;
                    let name = format!("_v{counter}");
                    if taken.insert(name.clone()) {
                        break name;
                    }
                }
            };
            out.atoms.push(Atom::new(&prev, f, &next));
            prev = next;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WildcardPolicy {
    #[default]
    FreshSymbol,
    StrictFinite,
}

/// Labels of both queries, plus the reserved fresh label when wildcards
/// occur under the fresh-symbol policy.
pub fn working_alphabet(q1: &Crpq, q2: &Crpq, policy: WildcardPolicy) -> Result<BTreeSet<Label>> {
    let mut out = q1.labels();
    out.extend(q2.labels());
    if q1.has_wildcard() || q2.has_wildcard() {
        match policy {
            WildcardPolicy::FreshSymbol => {
                out.insert(Label::fresh());
            }
            WildcardPolicy::StrictFinite => return Err(Error::WildcardStrict),
        }
    }
    Ok(out)
}

/// Partition atoms by connectivity of the undirected variable graph.
pub fn connected_components(q: &Crpq) -> Vec<Crpq> {
    let vars = q.variables_ordered();
    let index: BTreeMap<&str, usize> =
        vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let n = p[c];
            p[c] = r;
            c = n;
        }
        r
    }
    for a in &q.atoms {
        let (s, d) = (index[a.src.as_str()], index[a.dst.as_str()]);
        let (rs, rd) = (find(&mut parent, s), find(&mut parent, d));
        if rs != rd {
            parent[rs.max(rd)] = rs.min(rd);
        }
    }
    let mut order: Vec<usize> = Vec::new();
    let mut groups: BTreeMap<usize, Vec<Atom>> = BTreeMap::new();
    for a in &q.atoms {
        let r = find(&mut parent, index[a.src.as_str()]);
        if !groups.contains_key(&r) {
            order.push(r);
        }
        groups.entry(r).or_default().push(a.clone());
    }
    order
        .into_iter()
        .map(|r| {
            let atoms = groups.remove(&r).unwrap();
            let distinguished = q
                .distinguished
                .iter()
                .filter(|x| find(&mut parent, index[x.as_str()]) == r)
                .cloned()
                .collect();
            Crpq { distinguished, atoms }
        })
        .collect()
}
