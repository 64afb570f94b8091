//! Generators for the hardness constructions (∀∃-QBF, corridor tiling and
//! exponential-width corridor tiling) and brute-force solvers for the source
//! problems, used to validate the generators at desk scale.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query_model::{Atom, Crpq, Regex};

/// A literal `x3`, `!y1`: universal (`x`) or existential (`y`), 1-based index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Literal {
    pub universal: bool,
    pub index: usize,
    pub positive: bool,
}

impl Literal {
    pub fn x(index: usize, positive: bool) -> Literal {
        Literal { universal: true, index, positive }
    }

    pub fn y(index: usize, positive: bool) -> Literal {
        Literal { universal: false, index, positive }
    }

    fn var_label(&self) -> String {
        format!("{}{}", if self.universal { 'x' } else { 'y' }, self.index)
    }

    fn eval(&self, xs: &[bool], ys: &[bool]) -> bool {
        let v = if self.universal { xs[self.index - 1] } else { ys[self.index - 1] };
        v == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = if self.positive { "" } else { "!" };
        write!(f, "{neg}{}", self.var_label())
    }
}

impl From<Literal> for String {
    fn from(l: Literal) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for Literal {
    type Error = Error;
    fn try_from(s: String) -> Result<Literal> {
        s.parse()
    }
}

impl std::str::FromStr for Literal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Literal> {
        let bad = || Error::Instance(format!("malformed literal `{s}`"));
        let t = s.trim();
        let (positive, t) = match t.strip_prefix(['!', '-', '~']) {
            Some(r) => (false, r),
            None => (true, t),
        };
        let mut cs = t.chars();
        let universal = match cs.next() {
            Some('x') => true,
            Some('y') => false,
            _ => return Err(bad()),
        };
        let index: usize = cs.as_str().parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        Ok(Literal { universal, index, positive })
    }
}

/// `∀x₁…x_n ∃y₁…y_ℓ φ` with φ in 3-CNF.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qbf2Instance {
    pub universal: usize,
    pub existential: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl Qbf2Instance {
    pub fn validate(&self) -> Result<()> {
        if self.universal == 0 || self.existential == 0 {
            return Err(Error::Instance("need at least one universal and one existential variable".into()));
        }
        if self.clauses.is_empty() {
            return Err(Error::Instance("no clauses".into()));
        }
        for c in &self.clauses {
            for l in c {
                let bound = if l.universal { self.universal } else { self.existential };
                if l.index > bound {
                    return Err(Error::Instance(format!("literal {l} out of range")));
                }
            }
        }
        Ok(())
    }

    /// Truth value of the matrix under one assignment.
    pub fn matrix(&self, xs: &[bool], ys: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(xs, ys)))
    }
}

impl fmt::Display for Qbf2Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| format!("({} | {} | {})", c[0], c[1], c[2]))
            .collect();
        write!(f, "A x1..x{} E y1..y{}: {}", self.universal, self.existential, clauses.join(" & "))
    }
}

/// Validity of the ∀∃ formula by exhaustive evaluation.
pub fn qbf_brute(phi: &Qbf2Instance) -> Result<bool> {
    phi.validate()?;
    if phi.universal + phi.existential > 20 {
        return Err(Error::SizeCap(format!("{} variables (limit 20)", phi.universal + phi.existential)));
    }
    let bits = |mask: u32, k: usize| (0..k).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>();
    Ok((0..1u32 << phi.universal).all(|mx| {
        let xs = bits(mx, phi.universal);
        (0..1u32 << phi.existential).any(|my| phi.matrix(&xs, &bits(my, phi.existential)))
    }))
}

struct QueryBuilder {
    atoms: Vec<Atom>,
}

impl QueryBuilder {
    fn new() -> Self {
        QueryBuilder { atoms: Vec::new() }
    }

    fn edge(&mut self, src: &str, r: Regex, dst: &str) {
        self.atoms.push(Atom::new(src, r, dst));
    }

    fn sym(&mut self, src: &str, l: &str, dst: &str) {
        self.edge(src, Regex::sym(l), dst);
    }

    fn boolean(self) -> Crpq {
        Crpq { distinguished: Vec::new(), atoms: self.atoms }
    }
}

fn qbf_queries(phi: &Qbf2Instance, star_variant: bool) -> Result<(Crpq, Crpq)> {
    phi.validate()?;
    let (n, l) = (phi.universal, phi.existential);
    let mut q1 = QueryBuilder::new();
    for k in 0..4 {
        q1.sym(&format!("p{k}"), "a", &format!("p{}", k + 1));
    }
    for k in 0..5 {
        let r = format!("p{k}");
        let d = k == 2;
        for i in 1..=n {
            let m = format!("{r}x{i}");
            q1.sym(&r, &format!("x{i}"), &m);
            if !d {
                q1.sym(&m, "t", &format!("{m}t"));
                q1.sym(&m, "f", &format!("{m}f"));
            } else if star_variant {
                q1.edge(&m, Regex::concat(Regex::star(Regex::sym("t")), Regex::sym("f")), &format!("{m}v"));
            } else {
                q1.edge(&m, Regex::union(Regex::sym("t"), Regex::sym("f")), &format!("{m}v"));
            }
        }
        for j in 1..=l {
            let m = format!("{r}y{j}");
            q1.sym(&r, &format!("y{j}"), &m);
            for v in ["t", "f"] {
                let target = format!("y{j}{v}");
                if d {
                    q1.sym(&m, v, &target);
                } else {
                    q1.sym(&m, "t", &target);
                    q1.sym(&m, "f", &target);
                }
            }
        }
    }

    let mut q2 = QueryBuilder::new();
    for (c, clause) in phi.clauses.iter().enumerate() {
        let c = c + 1;
        q2.sym(&format!("c{c}r1"), "a", &format!("c{c}r2"));
        q2.sym(&format!("c{c}r2"), "a", &format!("c{c}r3"));
        for (j, lit) in clause.iter().enumerate() {
            let j = j + 1;
            let mid = format!("c{c}m{j}");
            q2.sym(&format!("c{c}r{j}"), &lit.var_label(), &mid);
            let tf = if lit.positive { "t" } else { "f" };
            let end = if lit.universal { format!("c{c}e{j}") } else { format!("y{}tf", lit.index) };
            q2.sym(&mid, tf, &end);
        }
    }
    Ok((q1.boolean(), q2.boolean()))
}

/// Boolean queries with Q₁ ∈ CRPQ(A), Q₂ ∈ CRPQ(a) and Q₁ ⊆ Q₂ iff φ is valid.
pub fn qbf_to_containment(phi: &Qbf2Instance) -> Result<(Crpq, Crpq)> {
    qbf_queries(phi, false)
}

/// As [`qbf_to_containment`] with each `t+f` choice replaced by a `t*f` path,
/// so Q₁ ∈ CRPQ(a,a*).
pub fn qbf_to_containment_astar(phi: &Qbf2Instance) -> Result<(Crpq, Crpq)> {
    qbf_queries(phi, true)
}

/// How a tiling is anchored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Corridor tiling: the whole first and last rows are given.
    Rows { initial: Vec<usize>, last: Vec<usize> },
    /// Exponential-width tiling: first tile of the first row, last tile of
    /// the last row.
    Corners { initial: usize, last: usize },
}

/// Tiles are `0..tiles`. For row boundaries `width` is the row length; for
/// corner boundaries it is the address length n and rows hold 2ⁿ tiles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingInstance {
    pub tiles: usize,
    pub horizontal: BTreeSet<(usize, usize)>,
    pub vertical: BTreeSet<(usize, usize)>,
    pub boundary: Boundary,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<[Vec<usize>; 3]>,
}

pub type Tiling = Vec<Vec<usize>>;

impl TilingInstance {
    pub fn row_width(&self) -> usize {
        match self.boundary {
            Boundary::Rows { .. } => self.width,
            Boundary::Corners { .. } => 1usize.checked_shl(self.width as u32).unwrap_or(usize::MAX),
        }
    }

    fn check_tiles(&self) -> Result<()> {
        let ok = |t: usize| t < self.tiles;
        let pairs = self.horizontal.iter().chain(&self.vertical);
        if !pairs.clone().all(|&(a, b)| ok(a) && ok(b)) {
            return Err(Error::Instance("constraint mentions an unknown tile".into()));
        }
        let tiles_ok = match &self.boundary {
            Boundary::Rows { initial, last } => {
                if initial.len() != self.width || last.len() != self.width {
                    return Err(Error::Instance("boundary rows must have the corridor width".into()));
                }
                initial.iter().chain(last).all(|&t| ok(t))
            }
            Boundary::Corners { initial, last } => ok(*initial) && ok(*last),
        };
        if !tiles_ok {
            return Err(Error::Instance("boundary mentions an unknown tile".into()));
        }
        if let Some(p) = &self.partition {
            let mut seen = vec![false; self.tiles];
            for t in p.iter().flatten() {
                if !ok(*t) || std::mem::replace(&mut seen[*t], true) {
                    return Err(Error::Instance("partition is not a partition of the tiles".into()));
                }
            }
            if seen.contains(&false) {
                return Err(Error::Instance("partition does not cover every tile".into()));
            }
        }
        Ok(())
    }

    fn h_valid(&self, row: &[usize]) -> bool {
        row.windows(2).all(|p| self.horizontal.contains(&(p[0], p[1])))
    }

    /// Row shape T₁*T₂T₁* ∪ T₁*T₃T₃T₁* when a partition is present.
    fn shape_valid(&self, row: &[usize]) -> bool {
        let Some([t1, t2, t3]) = &self.partition else { return true };
        let class = |t: usize| {
            if t1.contains(&t) {
                1
            } else if t2.contains(&t) {
                2
            } else if t3.contains(&t) {
                3
            } else {
                0
            }
        };
        let rest: Vec<u8> = row.iter().map(|&t| class(t)).filter(|&c| c != 1).collect();
        rest == [2] || rest == [3, 3] && {
            let i = row.iter().position(|&t| class(t) == 3).expect("two T3 tiles");
            class(row[i + 1]) == 3
        }
    }

    fn row_ok(&self, row: &[usize]) -> bool {
        self.h_valid(row) && self.shape_valid(row)
    }

    fn v_ok(&self, lower: &[usize], upper: &[usize]) -> bool {
        lower.iter().zip(upper).all(|(&a, &b)| self.vertical.contains(&(a, b)))
    }

    /// Corridor restrictions: the partition and its conditions (i)/(ii),
    /// boundary rows that are themselves admissible, and distinct boundary rows.
    pub fn validate_corridor(&self) -> Result<()> {
        self.check_tiles()?;
        let Boundary::Rows { initial, last } = &self.boundary else {
            return Err(Error::Instance("corridor tiling needs boundary rows".into()));
        };
        if self.width < 2 {
            return Err(Error::Instance("corridor width must be at least 2".into()));
        }
        let Some([t1, t2, t3]) = &self.partition else {
            return Err(Error::Instance("corridor tiling needs a T1/T2/T3 partition".into()));
        };
        let h = |a: usize, b: usize| self.horizontal.contains(&(a, b));
        for &a in t1 {
            for &b in t1.iter().chain(t2) {
                if !h(a, b) || (t2.contains(&b) && !h(b, a)) {
                    return Err(Error::Instance(format!("condition (i) fails for tiles {a}, {b}")));
                }
            }
        }
        for &u in t3 {
            for &v in t3 {
                if h(u, v) && !t1.iter().all(|&a| h(a, u) && h(v, a)) {
                    return Err(Error::Instance(format!("condition (ii) fails for tiles {u}, {v}")));
                }
            }
        }
        if !self.row_ok(initial) || !self.row_ok(last) {
            return Err(Error::Instance("boundary row violates the horizontal or row-shape restrictions".into()));
        }
        if initial == last {
            return Err(Error::Instance("initial and final rows coincide".into()));
        }
        Ok(())
    }

    pub fn validate_exponential(&self) -> Result<()> {
        self.check_tiles()?;
        if !matches!(self.boundary, Boundary::Corners { .. }) {
            return Err(Error::Instance("exponential tiling needs corner tiles".into()));
        }
        if self.tiles < 2 || self.width < 1 {
            return Err(Error::Instance("need at least two tiles and address length at least 1".into()));
        }
        if self.width > 16 {
            return Err(Error::SizeCap(format!("address length {} (limit 16)", self.width)));
        }
        Ok(())
    }

    /// Whether `rows` is a valid tiling for this instance at row width `width`.
    pub fn check_tiling(&self, rows: &[Vec<usize>], width: usize) -> bool {
        let (Some(first), Some(last)) = (rows.first(), rows.last()) else { return false };
        let ends = match &self.boundary {
            Boundary::Rows { initial, last: f } => first == initial && last == f,
            Boundary::Corners { initial, last: f } => first.first() == Some(initial) && last.last() == Some(f),
        };
        ends && rows.iter().all(|r| r.len() == width && r.iter().all(|&t| t < self.tiles) && self.row_ok(r))
            && rows.windows(2).all(|p| self.v_ok(&p[0], &p[1]))
    }
}

const ROW_CAP: usize = 1 << 16;

/// Shortest valid tiling with rows of `width` tiles and at most `max_rows`
/// rows, by breadth-first search over admissible rows.
pub fn tiling_brute(t: &TilingInstance, width: usize, max_rows: usize) -> Result<Option<Tiling>> {
    t.check_tiles()?;
    if width == 0 || max_rows == 0 {
        return Ok(None);
    }
    if (t.tiles as f64).powi(width.min(64) as i32) > (ROW_CAP as f64) * 16.0 {
        return Err(Error::SizeCap(format!("{} tiles at width {width}", t.tiles)));
    }
    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut cur = Vec::with_capacity(width);
    fn extend(t: &TilingInstance, width: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) -> bool {
        if cur.len() == width {
            if t.shape_valid(cur) {
                out.push(cur.clone());
            }
            return out.len() <= ROW_CAP;
        }
        for x in 0..t.tiles {
            if cur.last().map_or(true, |&p| t.horizontal.contains(&(p, x))) {
                cur.push(x);
                let ok = extend(t, width, cur, out);
                cur.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    if !extend(t, width, &mut cur, &mut rows) {
        return Err(Error::SizeCap(format!("more than {ROW_CAP} admissible rows")));
    }
    let is_start = |r: &Vec<usize>| match &t.boundary {
        Boundary::Rows { initial, .. } => r == initial,
        Boundary::Corners { initial, .. } => r[0] == *initial,
    };
    let is_goal = |r: &Vec<usize>| match &t.boundary {
        Boundary::Rows { last, .. } => r == last,
        Boundary::Corners { last, .. } => r[width - 1] == *last,
    };
    let mut parent: Vec<Option<usize>> = vec![None; rows.len()];
    let mut depth = vec![usize::MAX; rows.len()];
    let mut queue = VecDeque::new();
    for (i, r) in rows.iter().enumerate() {
        if is_start(r) {
            depth[i] = 1;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if is_goal(&rows[i]) {
            let mut path = vec![rows[i].clone()];
            let mut k = i;
            while let Some(p) = parent[k] {
                path.push(rows[p].clone());
                k = p;
            }
            path.reverse();
            return Ok(Some(path));
        }
        if depth[i] >= max_rows {
            continue;
        }
        for (j, r) in rows.iter().enumerate() {
            if depth[j] == usize::MAX && t.v_ok(&rows[i], r) {
                depth[j] = depth[i] + 1;
                parent[j] = Some(i);
                queue.push_back(j);
            }
        }
    }
    Ok(None)
}

/// Existence of a tiling at the instance's own row width, with no row bound
/// (breadth-first search is exhaustive once every admissible row is visited).
pub fn tiling_exists(t: &TilingInstance) -> Result<Option<Tiling>> {
    tiling_brute(t, t.row_width(), usize::MAX)
}

pub mod labels {
    //! Label names used by the tiling encodings.
    pub const WHITE_DIAMOND: &str = "dw";
    pub const BLACK_DIAMOND: &str = "db";
    pub const WHITE_TRIANGLE: &str = "tw";
    pub const BLACK_TRIANGLE: &str = "tb";
    pub const DOLLAR: &str = "dol";
    pub const HASH: &str = "h";
    pub const OPEN_BRACKET: &str = "lb";
    pub const CLOSE_BRACKET: &str = "rb";
    pub const OPEN_ANGLE: &str = "lt";
    pub const CLOSE_ANGLE: &str = "gt";
    pub const BACK: &str = "b";
    pub const STAR: &str = "star";
}

use labels::*;

fn s(name: &str) -> Regex {
    Regex::sym(name)
}

fn cat(items: impl IntoIterator<Item = Regex>) -> Regex {
    Regex::concat_all(items)
}

fn alt(items: impl IntoIterator<Item = Regex>) -> Regex {
    Regex::union_all(items)
}

fn pow(r: &Regex, k: usize) -> Regex {
    cat(std::iter::repeat(r.clone()).take(k))
}

fn set(names: &[&str]) -> Regex {
    alt(names.iter().map(|n| s(n)))
}

fn set_star(names: &[&str]) -> Regex {
    Regex::star(set(names))
}

/// Corridor tile word: a one-hot first half over ◊/◆, then one △/▲ per tile
/// telling which tiles may sit above.
fn corridor_tile(t: &TilingInstance, k: usize) -> Vec<&'static str> {
    let m = t.tiles;
    let mut w: Vec<&str> = (0..m).map(|j| if j == k { BLACK_DIAMOND } else { WHITE_DIAMOND }).collect();
    w.extend((0..m).map(|j| if t.vertical.contains(&(k, j)) { BLACK_TRIANGLE } else { WHITE_TRIANGLE }));
    w
}

fn corridor_queries(t: &TilingInstance, dollar: bool) -> Result<(Crpq, Crpq)> {
    t.validate_corridor()?;
    let (m, n) = (t.tiles, t.width);
    let Boundary::Rows { initial, last } = &t.boundary else { unreachable!() };
    let [t1, t2, t3] = t.partition.as_ref().expect("validated");
    let enc = |k: usize| -> Regex {
        cat(corridor_tile(t, k).into_iter().map(|l| {
            if dollar {
                cat([s(l), s(DOLLAR)])
            } else {
                s(l)
            }
        }))
    };
    let row = |r: &[usize]| cat(r.iter().map(|&k| enc(k)));
    let t1_hat = alt(t1.iter().map(|&k| enc(k)));
    let in_set = |x: usize, p: &Vec<usize>| p.contains(&x);
    let h_tilde: Vec<(usize, usize)> = t
        .horizontal
        .iter()
        .copied()
        .filter(|&(a, b)| {
            (in_set(a, t2) && in_set(b, t1)) || (in_set(a, t1) && in_set(b, t2)) || (in_set(a, t3) && in_set(b, t3))
        })
        .collect();
    let mut middle = Vec::new();
    for i in 0..=n - 2 {
        for &(v1, v2) in &h_tilde {
            middle.push(cat([pow(&t1_hat, i), enc(v1), enc(v2), pow(&t1_hat, n - i - 2)]));
        }
    }
    let r1 = cat([row(initial), Regex::star(alt(middle)), row(last)]);
    let gap = (2 * n - 1) * m - 1;
    let r2 = if dollar {
        let any = cat([
            set_star(&[WHITE_DIAMOND]),
            set_star(&[BLACK_DIAMOND]),
            set_star(&[WHITE_TRIANGLE]),
            set_star(&[BLACK_TRIANGLE]),
            s(DOLLAR),
        ]);
        cat([s(WHITE_TRIANGLE), s(DOLLAR), pow(&any, gap), s(BLACK_DIAMOND), s(DOLLAR)])
    } else {
        let any = set(&[WHITE_TRIANGLE, BLACK_TRIANGLE, WHITE_DIAMOND, BLACK_DIAMOND]);
        cat([s(WHITE_TRIANGLE), pow(&any, gap), s(BLACK_DIAMOND)])
    };
    let mut q1 = QueryBuilder::new();
    q1.edge("x", r1, "y");
    let mut q2 = QueryBuilder::new();
    q2.edge("x", r2, "y");
    Ok((q1.boolean(), q2.boolean()))
}

/// Single-atom Q₁ spelling every horizontally valid tiling between the
/// boundary rows, and Q₂ ∈ CRPQ(A) matching a vertical error window;
/// Q₁ ⊆ Q₂ iff no valid tiling exists.
pub fn corridor_tiling_to_containment(t: &TilingInstance) -> Result<(Crpq, Crpq)> {
    corridor_queries(t, false)
}

/// As [`corridor_tiling_to_containment`] with every symbol followed by `$`,
/// so that Q₂ ∈ CRPQ(a,a*).
pub fn corridor_tiling_to_containment_aastar(t: &TilingInstance) -> Result<(Crpq, Crpq)> {
    corridor_queries(t, true)
}

/// Middle-path alphabet of the exponential construction: `$ 0 1 ◊ ◆ #`.
pub const EXP_CORE: [&str; 6] = [DOLLAR, "0", "1", WHITE_DIAMOND, BLACK_DIAMOND, HASH];

struct ExpBuilder<'a> {
    t: &'a TilingInstance,
    q: QueryBuilder,
    blocks: usize,
    cur: String,
}

impl ExpBuilder<'_> {
    fn tile(&self, k: usize) -> Regex {
        cat((0..self.t.tiles).map(|j| s(if j == k { BLACK_DIAMOND } else { WHITE_DIAMOND })))
    }

    /// Opens a block `[ … ]` and returns its left and right variables.
    fn open(&mut self) -> (String, String) {
        let b = self.blocks;
        self.blocks += 1;
        let (l, r) = (format!("l{b}"), format!("r{b}"));
        let next = format!("c{}", b + 1);
        let cur = std::mem::replace(&mut self.cur, next.clone());
        self.q.sym(&cur, OPEN_BRACKET, &l);
        self.q.sym(&r, CLOSE_BRACKET, &next);
        (l, r)
    }

    fn path(&mut self, r: Regex) {
        let (l, rr) = self.open();
        self.q.edge(&l, r, &rr);
    }

    /// `⟨ 𝔹* w 𝔹* ⟩`
    fn factor(&mut self, w: Regex) {
        let any = set_star(&EXP_CORE);
        self.path(cat([s(OPEN_ANGLE), any.clone(), w, any, s(CLOSE_ANGLE)]));
    }
}

fn bits_star() -> Regex {
    set_star(&["0", "1"])
}

/// `(bits #)^k`
fn skip_bits(k: usize) -> Regex {
    pow(&cat([bits_star(), s(HASH)]), k)
}

/// Q₁ with a free middle path between two bracketed double-self-loop hubs,
/// and Q₂ a chain of `[ bad pattern ]` blocks between two ★ edges; Q₁ ⊆ Q₂
/// iff no valid exponential-width tiling exists.
pub fn exp_tiling_to_containment(t: &TilingInstance) -> Result<(Crpq, Crpq)> {
    t.validate_exponential()?;
    let Boundary::Corners { initial, last } = t.boundary else { unreachable!() };
    let (m, n) = (t.tiles, t.width);

    let mut q1 = QueryBuilder::new();
    let full: Vec<&str> = EXP_CORE
        .iter()
        .copied()
        .chain([OPEN_BRACKET, CLOSE_BRACKET, OPEN_ANGLE, CLOSE_ANGLE, BACK])
        .collect();
    let inner: Vec<&str> = EXP_CORE.iter().copied().chain([OPEN_ANGLE, CLOSE_ANGLE]).collect();
    q1.sym("z1", STAR, "z2");
    for l in &full {
        q1.sym("z2", l, "z2");
    }
    q1.sym("z2", OPEN_BRACKET, "z3");
    for l in &inner {
        q1.sym("z3", l, "z3");
    }
    q1.sym("z3", OPEN_ANGLE, "z4");
    q1.edge("z4", set_star(&EXP_CORE), "z5");
    q1.sym("z5", CLOSE_ANGLE, "z6");
    for l in &inner {
        q1.sym("z6", l, "z6");
    }
    q1.sym("z6", BACK, "z3");
    q1.sym("z6", CLOSE_BRACKET, "z7");
    for l in &full {
        q1.sym("z7", l, "z7");
    }
    q1.sym("z7", STAR, "z8");

    let mut b = ExpBuilder { t, q: QueryBuilder::new(), blocks: 0, cur: "c0".into() };
    b.q.sym("s0", STAR, "c0");
    let diamonds = [WHITE_DIAMOND, BLACK_DIAMOND];
    let non_bits = [DOLLAR, WHITE_DIAMOND, BLACK_DIAMOND];
    let any_core = set_star(&EXP_CORE);

    // tile encodings: two black diamonds too close, no black diamond in m
    // symbols, runs that are too long, and short runs between non-tile symbols
    for i in 0..m {
        b.factor(cat([s(BLACK_DIAMOND), pow(&s(WHITE_DIAMOND), i), s(BLACK_DIAMOND)]));
    }
    b.factor(pow(&s(WHITE_DIAMOND), m));
    for w in 0..=m {
        b.factor(cat([pow(&s(WHITE_DIAMOND), w), s(BLACK_DIAMOND), pow(&s(WHITE_DIAMOND), m - w)]));
    }
    for k in 1..m {
        for ones in 0..=1usize {
            for pos in 0..k {
                if ones == 0 && pos > 0 {
                    break;
                }
                let run = cat((0..k).map(|j| s(if ones == 1 && j == pos { BLACK_DIAMOND } else { WHITE_DIAMOND })));
                for before in [DOLLAR, "0", "1"] {
                    for after in ["0", "1"] {
                        b.factor(cat([s(before), run.clone(), s(after)]));
                    }
                }
            }
        }
    }
    for d in diamonds {
        b.factor(cat([s(d), s(DOLLAR)]));
    }
    for a in [DOLLAR, "0", "1"] {
        b.factor(cat([s(DOLLAR), s(a)]));
    }
    // addresses: alternation of bits and #, # at the ends, bit counts
    for w in [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]] {
        b.factor(cat([s(w[0]), s(w[1])]));
    }
    let mut seen = BTreeSet::new();
    for a in EXP_CORE.iter().filter(|a| **a != "0" && **a != "1") {
        for pair in [(HASH, *a), (*a, HASH)] {
            if seen.insert(pair) {
                b.factor(cat([s(pair.0), s(pair.1)]));
            }
        }
    }
    b.factor(pow(&cat([s(HASH), bits_star()]), n));
    for short in 0..n.saturating_sub(1) {
        for a1 in non_bits {
            for a2 in non_bits {
                for c in ["0", "1"] {
                    b.factor(cat([s(a1), skip_bits(short), s(c), s(a2)]));
                }
            }
        }
    }
    // start and end of the encoding
    b.path(cat([s(OPEN_ANGLE), s(CLOSE_ANGLE)]));
    b.path(cat([s(OPEN_ANGLE), s(DOLLAR), s(CLOSE_ANGLE)]));
    for a in EXP_CORE.iter().filter(|a| **a != DOLLAR) {
        b.path(cat([s(OPEN_ANGLE), s(a), any_core.clone(), s(CLOSE_ANGLE)]));
    }
    for a in EXP_CORE.iter().filter(|a| **a != DOLLAR) {
        b.path(cat([s(OPEN_ANGLE), any_core.clone(), s(a), s(CLOSE_ANGLE)]));
    }
    for k in (0..m).filter(|&k| k != initial) {
        b.path(cat([s(OPEN_ANGLE), s(DOLLAR), b.tile(k), any_core.clone(), s(CLOSE_ANGLE)]));
    }
    for k in (0..m).filter(|&k| k != last) {
        let addr = set_star(&["0", "1", HASH]);
        b.path(cat([s(OPEN_ANGLE), any_core.clone(), b.tile(k), addr, s(DOLLAR), s(CLOSE_ANGLE)]));
    }
    // address increments
    let dstar = set_star(&diamonds);
    b.factor(cat([s(DOLLAR), dstar.clone(), set_star(&["0", HASH]), s("1")]));
    b.factor(cat([s("0"), set_star(&["1", HASH]), s(DOLLAR)]));
    let ones = |k: usize| pow(&cat([s(HASH), s("1")]), k);
    for i in 1..=n {
        for d in diamonds {
            b.factor(cat([s("0"), ones(n - i), dstar.clone(), s(d), skip_bits(i - 1), s("0")]));
            if i < n {
                b.factor(cat([
                    s("0"),
                    ones(n - i),
                    dstar.clone(),
                    s(d),
                    skip_bits(i),
                    set_star(&["0", "1", HASH]),
                    s("1"),
                ]));
            }
        }
    }
    for p in 1..=n {
        for k in 0..n {
            if p + k >= n {
                continue;
            }
            let j = n - k - p - 1;
            for a in [0usize, 1] {
                for d1 in diamonds {
                    for d2 in diamonds {
                        b.factor(cat([
                            s(d1),
                            skip_bits(p - 1),
                            s(if a == 0 { "0" } else { "1" }),
                            s(HASH),
                            skip_bits(j),
                            s("0"),
                            ones(k),
                            dstar.clone(),
                            s(d2),
                            skip_bits(p - 1),
                            s(if a == 0 { "1" } else { "0" }),
                        ]));
                    }
                }
            }
        }
    }
    for a in EXP_CORE.iter().filter(|a| **a != DOLLAR) {
        b.factor(cat([s("1"), ones(n - 1), s(a)]));
    }
    // horizontal errors
    for x in 0..m {
        for y in 0..m {
            if !t.horizontal.contains(&(x, y)) {
                b.factor(cat([b.tile(x), set_star(&["0", "1", HASH]), b.tile(y)]));
            }
        }
    }
    // vertical errors
    let not_dollar = set_star(&EXP_CORE[1..]);
    let l_lang = cat([
        set_star(&[BACK]),
        set_star(&EXP_CORE.iter().copied().chain([OPEN_ANGLE, CLOSE_ANGLE]).collect::<Vec<_>>()),
        set_star(&[BACK]),
    ]);
    let bit_at = |i: usize, a: &str| cat([skip_bits(i - 1), s(a), pow(&cat([s(HASH), bits_star()]), n - i)]);
    for x in 0..m {
        for y in 0..m {
            if t.vertical.contains(&(x, y)) {
                continue;
            }
            let (l, r) = b.open();
            let xv = |i: usize, c: usize| format!("{l}x{i}c{c}");
            let yv = |i: usize, c: usize| format!("{l}y{i}c{c}");
            for i in 1..=n {
                let step = |a: &str| {
                    cat([b.tile(x), bit_at(i, a), not_dollar.clone(), s(DOLLAR), not_dollar.clone(), b.tile(y), bit_at(i, a)])
                };
                let (s0, s1) = (step("0"), step("1"));
                b.q.edge(&l, cat([s(OPEN_ANGLE), any_core.clone()]), &xv(i, 0));
                b.q.edge(&xv(i, 0), s0, &yv(i, 0));
                b.q.edge(&yv(i, 0), cat([any_core.clone(), s(CLOSE_ANGLE), s(OPEN_ANGLE), any_core.clone()]), &xv(i, 1));
                b.q.edge(&xv(i, 1), s1, &yv(i, 1));
                b.q.edge(&yv(i, 1), cat([any_core.clone(), s(CLOSE_ANGLE)]), &r);
            }
            for i in 1..n {
                for c in 0..2 {
                    for d in 0..2 {
                        for v in [&xv as &dyn Fn(usize, usize) -> String, &yv] {
                            b.q.edge(&v(i, c), l_lang.clone(), &v(i + 1, d));
                            b.q.edge(&v(i + 1, d), l_lang.clone(), &v(i, c));
                        }
                    }
                }
            }
        }
    }
    let end = b.cur.clone();
    b.q.sym(&end, STAR, "s1");
    Ok((q1.boolean(), b.q.boolean()))
}
