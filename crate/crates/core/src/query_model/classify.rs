use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Crpq, Regex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomKind {
    SingleSymbol,
    SymbolDisjunction,
    SingleSymbolStar,
    DisjunctionStar,
    WStar,
    GeneralRegex,
}

use AtomKind::*;

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FragmentClass {
    pub atom_kinds: BTreeSet<AtomKind>,
    pub wildcard_used: bool,
}

impl FragmentClass {
    pub fn of(kinds: &[AtomKind]) -> FragmentClass {
        FragmentClass { atom_kinds: kinds.iter().copied().collect(), wildcard_used: false }
    }

    pub fn join(&self, other: &FragmentClass) -> FragmentClass {
        FragmentClass {
            atom_kinds: self.atom_kinds.union(&other.atom_kinds).copied().collect(),
            wildcard_used: self.wildcard_used || other.wildcard_used,
        }
    }

    /// Lattice order: set inclusion on kinds and on the wildcard flag.
    pub fn le(&self, other: &FragmentClass) -> bool {
        self.atom_kinds.is_subset(&other.atom_kinds) && (!self.wildcard_used || other.wildcard_used)
    }

    fn within(&self, allowed: &[AtomKind]) -> bool {
        self.atom_kinds.iter().all(|k| allowed.contains(k))
    }

    /// CRPQ(a): single symbols only.
    pub fn is_a(&self) -> bool {
        !self.wildcard_used && self.within(&[SingleSymbol])
    }

    /// CRPQ(A,a*).
    pub fn is_a_astar_upper(&self) -> bool {
        !self.wildcard_used && self.within(&[SingleSymbol, SymbolDisjunction, SingleSymbolStar])
    }

    /// Name of the smallest named fragment containing the class.
    pub fn name(&self) -> &'static str {
        let rows: [(&[AtomKind], &'static str); 6] = [
            (&[SingleSymbol], "a"),
            (&[SingleSymbol, SymbolDisjunction], "A"),
            (&[SingleSymbol, SingleSymbolStar], "(a,a*)"),
            (&[SingleSymbol, SymbolDisjunction, SingleSymbolStar], "(A,a*)"),
            (&[SingleSymbol, SingleSymbolStar, DisjunctionStar], "(a,A*)"),
            (&[SingleSymbol, SymbolDisjunction, SingleSymbolStar, DisjunctionStar], "(A,A*)"),
        ];
        if !self.wildcard_used {
            for (allowed, name) in rows {
                if self.within(allowed) {
                    return name;
                }
            }
        }
        if self.within(&[SingleSymbol, SymbolDisjunction, SingleSymbolStar, WStar]) {
            return "W";
        }
        "CRPQ"
    }
}

fn is_letter(r: &Regex) -> bool {
    matches!(r, Regex::Symbol(_) | Regex::Wildcard)
}

fn letter_set(r: &Regex) -> Option<(usize, bool)> {
    let alts = r.alternatives();
    if !alts.iter().all(|a| is_letter(a)) {
        return None;
    }
    let wildcard = alts.iter().any(|a| matches!(a, Regex::Wildcard));
    let distinct: BTreeSet<&Regex> = alts.into_iter().collect();
    Some((distinct.len(), wildcard))
}

/// A concatenation of symbols and wildcards (the `S` nonterminal).
pub fn is_fixed_word(r: &Regex) -> bool {
    match r {
        Regex::Symbol(_) | Regex::Wildcard => true,
        Regex::Concat(a, b) => is_fixed_word(a) && is_fixed_word(b),
        _ => false,
    }
}

/// Membership in the W grammar `R -> σ | _ | S* | R·R | (R+R)`.
pub fn is_w_regex(r: &Regex) -> bool {
    match r {
        Regex::Symbol(_) | Regex::Wildcard => true,
        Regex::Star(s) => is_fixed_word(s),
        Regex::Concat(a, b) | Regex::Union(a, b) => is_w_regex(a) && is_w_regex(b),
        _ => false,
    }
}

pub fn is_w_query(q: &Crpq) -> bool {
    q.atoms.iter().all(|a| is_w_regex(&a.regex.simplify()))
}

fn classify_factor(f: &Regex, class: &mut FragmentClass) {
    let kind = match f {
        Regex::Symbol(_) => SingleSymbol,
        Regex::Wildcard => {
            class.wildcard_used = true;
            SymbolDisjunction
        }
        Regex::Union(..) => match letter_set(f) {
            Some((n, wildcard)) => {
                class.wildcard_used |= wildcard;
                if n == 1 && !wildcard {
                    SingleSymbol
                } else {
                    SymbolDisjunction
                }
            }
            None => GeneralRegex,
        },
        Regex::Star(inner) => {
            if let Some((n, wildcard)) = letter_set(inner) {
                class.wildcard_used |= wildcard;
                if wildcard && n == 1 {
                    WStar
                } else if n == 1 {
                    SingleSymbolStar
                } else {
                    DisjunctionStar
                }
            } else if is_fixed_word(inner) {
                class.wildcard_used |= inner.has_wildcard();
                WStar
            } else {
                GeneralRegex
            }
        }
        _ => GeneralRegex,
    };
    class.atom_kinds.insert(kind);
}

/// Minimal class covering every top-level concatenation factor of `r`.
pub fn classify_regex(r: &Regex) -> FragmentClass {
    let r = r.simplify();
    let mut class = FragmentClass::default();
    let factors: Vec<&Regex> =
        r.factors().into_iter().filter(|f| !matches!(f, Regex::Epsilon)).collect();
    if factors.is_empty() {
        class.atom_kinds.insert(GeneralRegex);
        return class;
    }
    for f in factors {
        classify_factor(f, &mut class);
    }
    class
}

pub fn classify_query(q: &Crpq) -> FragmentClass {
    q.atoms
        .iter()
        .fold(FragmentClass::default(), |acc, a| acc.join(&classify_regex(&a.regex)))
}
