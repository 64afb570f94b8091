//! Independent oracles and random instance generators shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use crpq_contain::kb::KnowledgeBase;
use crpq_contain::query_model::{Atom, Crpq, Label, Regex};
use crpq_contain::reductions::{Boundary, Literal, Qbf2Instance, TilingInstance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn l(s: &str) -> Label {
    Label::new(s).unwrap()
}

pub fn w(s: &str) -> Vec<Label> {
    s.chars().map(|c| l(&c.to_string())).collect()
}

pub fn q(s: &str) -> Crpq {
    crpq_contain::query_model::parse_query(s).unwrap()
}

// ---------------------------------------------------------------- regexes

/// Brzozowski derivatives over the AST. The wildcard matches any letter of
/// `alphabet`.
pub mod deriv {
    use super::*;

    pub fn nullable(r: &Regex) -> bool {
        match r {
            Regex::Empty | Regex::Symbol(_) | Regex::Wildcard => false,
            Regex::Epsilon | Regex::Star(_) => true,
            Regex::Concat(a, b) => nullable(a) && nullable(b),
            Regex::Union(a, b) => nullable(a) || nullable(b),
        }
    }

    fn cat(a: Regex, b: Regex) -> Regex {
        match (&a, &b) {
            (Regex::Empty, _) | (_, Regex::Empty) => Regex::Empty,
            (Regex::Epsilon, _) => b,
            (_, Regex::Epsilon) => a,
            _ => Regex::Concat(Box::new(a), Box::new(b)),
        }
    }

    fn alt(a: Regex, b: Regex) -> Regex {
        match (&a, &b) {
            (Regex::Empty, _) => b,
            (_, Regex::Empty) => a,
            _ if a == b => a,
            _ => Regex::Union(Box::new(a), Box::new(b)),
        }
    }

    pub fn derive(r: &Regex, c: &Label, alphabet: &BTreeSet<Label>) -> Regex {
        match r {
            Regex::Empty | Regex::Epsilon => Regex::Empty,
            Regex::Symbol(s) => {
                if s == c {
                    Regex::Epsilon
                } else {
                    Regex::Empty
                }
            }
            Regex::Wildcard => {
                if alphabet.contains(c) {
                    Regex::Epsilon
                } else {
                    Regex::Empty
                }
            }
            Regex::Concat(a, b) => {
                let left = cat(derive(a, c, alphabet), (**b).clone());
                if nullable(a) {
                    alt(left, derive(b, c, alphabet))
                } else {
                    left
                }
            }
            Regex::Union(a, b) => alt(derive(a, c, alphabet), derive(b, c, alphabet)),
            Regex::Star(a) => cat(derive(a, c, alphabet), r.clone()),
        }
    }

    pub fn matches(r: &Regex, word: &[Label], alphabet: &BTreeSet<Label>) -> bool {
        let mut cur = r.clone();
        for c in word {
            cur = derive(&cur, c, alphabet);
            if cur == Regex::Empty {
                return false;
            }
        }
        nullable(&cur)
    }
}

/// All words over `alphabet` of length at most `n`, shortest first.
pub fn all_words(alphabet: &[Label], n: usize) -> Vec<Vec<Label>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &layer {
            for a in alphabet {
                let mut x: Vec<Label> = p.clone();
                x.push(a.clone());
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

// ---------------------------------------------------------------- matrices

/// Plain `Vec<Vec<bool>>` boolean matrices.
pub mod bmat {
    pub type M = Vec<Vec<bool>>;

    pub fn identity(n: usize) -> M {
        (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect()
    }

    pub fn mul(a: &M, b: &M) -> M {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
            .collect()
    }

    pub fn pow_iter(m: &M, e: u64) -> M {
        let mut r = identity(m.len());
        for _ in 0..e {
            r = mul(&r, m);
        }
        r
    }
}

// ---------------------------------------------------------------- graphs

/// Labels of every path of length at most `max_len` from `from`, grouped by
/// target node.
pub fn paths_from(kb: &KnowledgeBase, from: usize, max_len: usize) -> Vec<(usize, Vec<Label>)> {
    let mut out = vec![(from, vec![])];
    let mut layer = vec![(from, vec![])];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (u, word) in &layer {
            for (a, lab, b) in kb.edges() {
                if a == u {
                    let mut x: Vec<Label> = word.clone();
                    x.push(lab.clone());
                    next.push((*b, x));
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Targets reachable from `from` along a path of length at most `max_len`
/// whose label matches `r` (checked with derivatives).
pub fn naive_reach(kb: &KnowledgeBase, r: &Regex, from: usize, max_len: usize) -> BTreeSet<usize> {
    let al = kb.labels();
    paths_from(kb, from, max_len)
        .into_iter()
        .filter(|(_, word)| deriv::matches(r, word, &al))
        .map(|(t, _)| t)
        .collect()
}

/// Exhaustive search over all maps from the query variables to nodes.
pub fn naive_embeds(q: &Crpq, kb: &KnowledgeBase, pin: &BTreeMap<String, usize>, max_len: usize) -> bool {
    let vars: Vec<String> = q.variables().into_iter().collect();
    let n = kb.node_count();
    if n == 0 {
        return vars.is_empty();
    }
    let mut reach: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for (i, a) in q.atoms.iter().enumerate() {
        for u in 0..n {
            reach.insert((i, u), naive_reach(kb, &a.regex, u, max_len));
        }
    }
    let total = n.pow(vars.len() as u32);
    (0..total).any(|mut code| {
        let mut h = BTreeMap::new();
        for v in &vars {
            h.insert(v.clone(), code % n);
            code /= n;
        }
        pin.iter().all(|(v, &t)| h.get(v).map_or(true, |&x| x == t))
            && q.atoms.iter().enumerate().all(|(i, a)| reach[&(i, h[&a.src])].contains(&h[&a.dst]))
    })
}

// ---------------------------------------------------------------- logic

/// ∀∃ validity by walking the quantifier tree: universal levels take the
/// conjunction of both branches, existential levels the disjunction.
pub fn qbf_tree(phi: &Qbf2Instance) -> bool {
    fn go(phi: &Qbf2Instance, vals: &mut Vec<bool>) -> bool {
        let depth = vals.len();
        if depth == phi.universal + phi.existential {
            return phi.clauses.iter().all(|c| {
                c.iter().any(|lit| {
                    let i = if lit.universal { lit.index - 1 } else { phi.universal + lit.index - 1 };
                    vals[i] == lit.positive
                })
            });
        }
        let branch = |b: bool, vals: &mut Vec<bool>| {
            vals.push(b);
            let r = go(phi, vals);
            vals.pop();
            r
        };
        if depth < phi.universal {
            branch(false, vals) && branch(true, vals)
        } else {
            branch(false, vals) || branch(true, vals)
        }
    }
    go(phi, &mut Vec::new())
}

/// Every tile grid with `rows` rows of `width` tiles, checked cell by cell.
pub fn naive_tiling(t: &TilingInstance, width: usize, rows: usize) -> bool {
    let cells = width * rows;
    let total = t.tiles.pow(cells as u32);
    let shape_ok = |row: &[usize]| match &t.partition {
        None => true,
        Some([t1, t2, t3]) => {
            let kinds: Vec<u8> = row
                .iter()
                .map(|x| if t1.contains(x) { 1 } else if t2.contains(x) { 2 } else if t3.contains(x) { 3 } else { 0 })
                .collect();
            let rest: Vec<(usize, u8)> = kinds.iter().copied().enumerate().filter(|&(_, k)| k != 1).collect();
            match rest.as_slice() {
                [(_, 2)] => true,
                [(i, 3), (j, 3)] => j == &(i + 1),
                _ => false,
            }
        }
    };
    (0..total).any(|mut code| {
        let mut g = vec![vec![0usize; width]; rows];
        for r in g.iter_mut() {
            for c in r.iter_mut() {
                *c = code % t.tiles;
                code /= t.tiles;
            }
        }
        let first = &g[0];
        let last = &g[rows - 1];
        let bounds = match &t.boundary {
            Boundary::Rows { initial, last: fin } => first == initial && last == fin,
            Boundary::Corners { initial, last: fin } => first[0] == *initial && last[width - 1] == *fin,
        };
        bounds
            && g.iter().all(|r| shape_ok(r) && r.windows(2).all(|p| t.horizontal.contains(&(p[0], p[1]))))
            && g.windows(2).all(|p| (0..width).all(|c| t.vertical.contains(&(p[0][c], p[1][c]))))
    })
}

// ---------------------------------------------------------------- generators

pub const LETTERS: [&str; 3] = ["a", "b", "c"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Single symbols.
    Single,
    /// Single symbols, disjunctions of symbols and single-symbol stars.
    DisjAstar,
    /// Symbols, wildcards, stars over short fixed words, unions of those.
    W,
    /// Any regex.
    General,
}

fn sym(rng: &mut ChaCha8Rng, letters: usize) -> Regex {
    Regex::sym(LETTERS[rng.gen_range(0..letters)])
}

fn disj(rng: &mut ChaCha8Rng, letters: usize) -> Regex {
    let mut ls: Vec<&str> = LETTERS[..letters].to_vec();
    ls.shuffle(rng);
    let k = rng.gen_range(2..=letters.max(2)).min(letters);
    Regex::union_all(ls[..k].iter().map(|s| Regex::sym(s)))
}

fn factor(rng: &mut ChaCha8Rng, shape: Shape, letters: usize, budget: usize) -> (Regex, usize) {
    match shape {
        Shape::Single => (sym(rng, letters), 1),
        Shape::DisjAstar => match rng.gen_range(0..3) {
            0 => (sym(rng, letters), 1),
            1 if letters >= 2 && budget >= 2 => {
                let d = disj(rng, letters.min(budget));
                let n = d.leaves();
                (d, n)
            }
            _ => (Regex::star(sym(rng, letters)), 1),
        },
        Shape::W => match rng.gen_range(0..5) {
            0 | 1 => (sym(rng, letters), 1),
            2 => (Regex::Wildcard, 1),
            _ => {
                let k = rng.gen_range(1..=2.min(budget));
                let word = Regex::concat_all((0..k).map(|_| sym(rng, letters)));
                (Regex::star(word), k)
            }
        },
        Shape::General => {
            let size = rng.gen_range(1..=budget.min(4));
            let r = general(rng, letters, size);
            let n = r.leaves().max(1);
            (r, n)
        }
    }
}

/// A random regex tree with about `size` leaves.
pub fn general(rng: &mut ChaCha8Rng, letters: usize, size: usize) -> Regex {
    if size <= 1 {
        return match rng.gen_range(0..10) {
            0 => Regex::Epsilon,
            1 => Regex::star(sym(rng, letters)),
            _ => sym(rng, letters),
        };
    }
    match rng.gen_range(0..5) {
        0 | 1 => {
            let k = rng.gen_range(1..size);
            Regex::concat(general(rng, letters, k), general(rng, letters, size - k))
        }
        2 | 3 => {
            let k = rng.gen_range(1..size);
            Regex::union(general(rng, letters, k), general(rng, letters, size - k))
        }
        _ => Regex::star(general(rng, letters, size)),
    }
}

/// A regex of the given shape with at most `max_size` leaves.
pub fn regex(rng: &mut ChaCha8Rng, shape: Shape, letters: usize, max_size: usize) -> Regex {
    let target = rng.gen_range(1..=max_size);
    let mut used = 0;
    let mut items = Vec::new();
    while used < target {
        let (f, n) = factor(rng, shape, letters, target - used);
        used += n;
        items.push(f);
    }
    let r = Regex::concat_all(items);
    if shape == Shape::W && rng.gen_range(0..5) == 0 && used < max_size {
        let (f, _) = factor(rng, Shape::W, letters, max_size - used);
        return Regex::union(r, f);
    }
    r
}

const VARS: [&str; 4] = ["x", "y", "z", "u"];

/// A random query with 1..=`max_atoms` atoms over at most four variables.
/// The first `arity` variables used become distinguished.
pub fn query(rng: &mut ChaCha8Rng, shape: Shape, letters: usize, max_atoms: usize, max_size: usize, arity: usize) -> Crpq {
    let n = rng.gen_range(1..=max_atoms);
    let mut atoms = Vec::new();
    let mut used: Vec<&str> = vec!["x"];
    for _ in 0..n {
        let s = used[rng.gen_range(0..used.len())];
        let d = VARS[rng.gen_range(0..VARS.len())];
        if !used.contains(&d) {
            used.push(d);
        }
        let (s, d) = if rng.gen_bool(0.5) { (s, d) } else { (d, s) };
        atoms.push(Atom::new(s, regex(rng, shape, letters, max_size), d));
    }
    let mut vars: Vec<&str> = atoms.iter().flat_map(|a| [a.src.as_str(), a.dst.as_str()]).collect();
    vars.dedup();
    let mut distinguished = Vec::new();
    for v in vars {
        if distinguished.len() < arity && !distinguished.contains(&v.to_string()) {
            distinguished.push(v.to_string());
        }
    }
    while distinguished.len() < arity {
        distinguished.push(distinguished[0].clone());
    }
    Crpq::new(distinguished, atoms).unwrap()
}

pub fn qbf(rng: &mut ChaCha8Rng, n: usize, l: usize, clauses: usize) -> Qbf2Instance {
    let clauses = (0..clauses)
        .map(|_| {
            [0; 3].map(|_| {
                if rng.gen_bool(0.5) {
                    Literal::x(rng.gen_range(1..=n), rng.gen_bool(0.5))
                } else {
                    Literal::y(rng.gen_range(1..=l), rng.gen_bool(0.5))
                }
            })
        })
        .collect();
    Qbf2Instance { universal: n, existential: l, clauses }
}

/// A corridor instance satisfying the partition restrictions, or `None` when
/// the random draw admits fewer than two distinct boundary rows.
pub fn corridor(rng: &mut ChaCha8Rng, tiles: usize, width: usize) -> Option<TilingInstance> {
    let mut part = [vec![], vec![], vec![]];
    for k in 0..tiles {
        part[rng.gen_range(0..3)].push(k);
    }
    let mut h = BTreeSet::new();
    for a in 0..tiles {
        for b in 0..tiles {
            if rng.gen_bool(0.5) {
                h.insert((a, b));
            }
        }
    }
    for &a in &part[0] {
        for &b in part[0].iter().chain(&part[1]) {
            h.insert((a, b));
            if part[1].contains(&b) {
                h.insert((b, a));
            }
        }
    }
    let t3 = part[2].clone();
    for &u in &t3 {
        for &v in &t3 {
            if h.contains(&(u, v)) {
                for &a in &part[0] {
                    h.insert((a, u));
                    h.insert((v, a));
                }
            }
        }
    }
    let mut v = BTreeSet::new();
    for a in 0..tiles {
        for b in 0..tiles {
            if rng.gen_range(0..3) != 0 {
                v.insert((a, b));
            }
        }
    }
    let mut t = TilingInstance {
        tiles,
        horizontal: h,
        vertical: v,
        boundary: Boundary::Rows { initial: vec![], last: vec![] },
        width,
        partition: Some(part),
    };
    let rows: Vec<Vec<usize>> = (0..tiles.pow(width as u32))
        .map(|mut x| {
            (0..width)
                .map(|_| {
                    let r = x % tiles;
                    x /= tiles;
                    r
                })
                .collect()
        })
        .filter(|r: &Vec<usize>| row_admissible(&t, r))
        .collect();
    if rows.len() < 2 {
        return None;
    }
    let i = rng.gen_range(0..rows.len());
    let j = (i + rng.gen_range(1..rows.len())) % rows.len();
    t.boundary = Boundary::Rows { initial: rows[i].clone(), last: rows[j].clone() };
    t.validate_corridor().ok().map(|_| t)
}

fn row_admissible(t: &TilingInstance, r: &[usize]) -> bool {
    let mut probe = t.clone();
    probe.boundary = Boundary::Rows { initial: r.to_vec(), last: r.to_vec() };
    probe.check_tiling(&[r.to_vec()], r.len())
}

/// An exponential-width instance with address length 1 (rows of two tiles).
pub fn exp_instance(rng: &mut ChaCha8Rng, tiles: usize) -> TilingInstance {
    let mut h = BTreeSet::new();
    let mut v = BTreeSet::new();
    for a in 0..tiles {
        for b in 0..tiles {
            if rng.gen_range(0..3) != 0 {
                h.insert((a, b));
            }
            if rng.gen_range(0..3) != 0 {
                v.insert((a, b));
            }
        }
    }
    TilingInstance {
        tiles,
        horizontal: h,
        vertical: v,
        boundary: Boundary::Corners { initial: rng.gen_range(0..tiles), last: rng.gen_range(0..tiles) },
        width: 1,
        partition: None,
    }
}
