//! Classification of property-path expressions from query logs and
//! frequency reports over the simple fragments.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::query_model::{classify_regex, parse_regex, AtomKind, FragmentClass};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub wildcard: bool,
    pub inverse: bool,
    pub unparseable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub raw: String,
    pub multiplicity: u64,
    pub flags: Flags,
}

/// The report columns, each cumulative over the simpler classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SimpleClass {
    #[serde(rename = "(a,a*)")]
    AAstar,
    #[serde(rename = "(a,A*)")]
    ADisjStar,
    #[serde(rename = "(A,a*)")]
    DisjAstar,
    #[serde(rename = "(A,A*)")]
    DisjDisjStar,
}

impl SimpleClass {
    pub const ALL: [SimpleClass; 4] =
        [SimpleClass::AAstar, SimpleClass::ADisjStar, SimpleClass::DisjAstar, SimpleClass::DisjDisjStar];

    pub fn name(self) -> &'static str {
        match self {
            SimpleClass::AAstar => "(a,a*)",
            SimpleClass::ADisjStar => "(a,A*)",
            SimpleClass::DisjAstar => "(A,a*)",
            SimpleClass::DisjDisjStar => "(A,A*)",
        }
    }

    fn allowed(self) -> &'static [AtomKind] {
        use AtomKind::*;
        match self {
            SimpleClass::AAstar => &[SingleSymbol, SingleSymbolStar],
            SimpleClass::ADisjStar => &[SingleSymbol, SingleSymbolStar, DisjunctionStar],
            SimpleClass::DisjAstar => &[SingleSymbol, SymbolDisjunction, SingleSymbolStar],
            SimpleClass::DisjDisjStar => &[SingleSymbol, SymbolDisjunction, SingleSymbolStar, DisjunctionStar],
        }
    }

    /// Type-based membership: every factor kind is allowed by the class.
    pub fn contains(self, class: &FragmentClass, flags: Flags) -> bool {
        !flags.unparseable
            && !flags.inverse
            && !class.wildcard_used
            && class.atom_kinds.iter().all(|k| self.allowed().contains(k))
    }
}

impl fmt::Display for SimpleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rewrite log syntax into the regex grammar: `/` concatenates, `|` unites,
/// `^` (inverse) and `!` (negated set) are dropped but reported.
fn desugar(s: &str) -> (String, bool) {
    let mut out = String::with_capacity(s.len());
    let mut inverse = false;
    for c in s.chars() {
        match c {
            '/' => out.push(' '),
            '|' => out.push('+'),
            '^' | '!' => inverse = true,
            c => out.push(c),
        }
    }
    (out, inverse)
}

/// Classify one expression string. Inverse and negation force the general
/// class; parse failures set the unparseable flag.
pub fn classify_expression_string(s: &str) -> (FragmentClass, Flags) {
    let (text, inverse) = desugar(s);
    let mut flags = Flags { inverse, ..Flags::default() };
    let general = FragmentClass::of(&[AtomKind::GeneralRegex]);
    match parse_regex(&text) {
        Err(_) => {
            flags.unparseable = true;
            (general, flags)
        }
        Ok(r) => {
            flags.wildcard = r.has_wildcard();
            if inverse {
                let mut c = general;
                c.wildcard_used = flags.wildcard;
                (c, flags)
            } else {
                (classify_regex(&r), flags)
            }
        }
    }
}

/// Split a log into records: one expression per line with an optional
/// tab-separated count. Blank lines are skipped; a bad count marks the line
/// unparseable.
pub fn parse_log(text: &str) -> Vec<LogRecord> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    lines
        .par_iter()
        .map(|line| {
            let (expr, count) = match line.rsplit_once('\t') {
                Some((e, c)) => (e, Some(c.trim())),
                None => (*line, None),
            };
            let raw = expr.trim().to_string();
            let (_, mut flags) = classify_expression_string(&raw);
            let multiplicity = match count {
                None => 1,
                Some(c) => match c.parse::<u64>() {
                    Ok(n) if n >= 1 => n,
                    _ => {
                        flags.unparseable = true;
                        1
                    }
                },
            };
            LogRecord { raw, multiplicity, flags }
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub total: u64,
    pub counts: BTreeMap<SimpleClass, u64>,
    pub percentages: BTreeMap<SimpleClass, f64>,
    /// Counts by minimal named fragment, with `2way` for inverse or negated paths.
    pub by_name: BTreeMap<String, u64>,
}

impl Column {
    fn add(&mut self, class: &FragmentClass, flags: Flags, n: u64) {
        self.total += n;
        for c in SimpleClass::ALL {
            if c.contains(class, flags) {
                *self.counts.entry(c).or_default() += n;
            }
        }
        let name = if flags.inverse { "2way" } else { class.name() };
        *self.by_name.entry(name.to_string()).or_default() += n;
    }

    fn finish(&mut self) {
        for c in SimpleClass::ALL {
            let n = *self.counts.entry(c).or_default();
            let p = if self.total == 0 { 0.0 } else { 100.0 * n as f64 / self.total as f64 };
            self.percentages.insert(c, p);
        }
    }

    pub fn count(&self, c: SimpleClass) -> u64 {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    pub fn percentage(&self, c: SimpleClass) -> f64 {
        self.percentages.get(&c).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    /// Every valid expression, weighted by multiplicity.
    pub valid: Column,
    /// Valid expressions after duplicate elimination when `dedupe` is set;
    /// otherwise identical to `valid`.
    pub unique: Column,
    pub dedupe: bool,
    pub unparseable: u64,
    pub records: u64,
}

/// Aggregate classified records. Aggregation is order-independent.
pub fn analyze_records(records: &[LogRecord], dedupe: bool) -> ClassReport {
    let classified: Vec<(FragmentClass, Flags)> =
        records.par_iter().map(|r| classify_expression_string(&r.raw)).collect();
    let mut report = ClassReport { dedupe, records: records.len() as u64, ..ClassReport::default() };
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for (r, (class, _)) in records.iter().zip(&classified) {
        if r.flags.unparseable {
            report.unparseable += r.multiplicity;
            continue;
        }
        report.valid.add(class, r.flags, r.multiplicity);
        if !dedupe {
            report.unique.add(class, r.flags, r.multiplicity);
        } else if seen.insert(&r.raw, ()).is_none() {
            report.unique.add(class, r.flags, 1);
        }
    }
    report.valid.finish();
    report.unique.finish();
    report
}

pub fn analyze_text(text: &str, dedupe: bool) -> ClassReport {
    analyze_records(&parse_log(text), dedupe)
}

pub fn analyze_log(path: impl AsRef<Path>, dedupe: bool) -> Result<ClassReport> {
    let text = std::fs::read_to_string(path)?;
    Ok(analyze_text(&text, dedupe))
}

impl ClassReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<ClassReport> {
        Ok(serde_json::from_value(v.clone())?)
    }

    /// Aligned-column table with the valid and unique columns side by side.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<8} {:>10} {:>8} {:>10} {:>8}\n", "class", "valid", "valid%", "unique", "unique%"));
        for c in SimpleClass::ALL {
            out.push_str(&format!(
                "{:<8} {:>10} {:>8.2} {:>10} {:>8.2}\n",
                c.name(),
                self.valid.count(c),
                self.valid.percentage(c),
                self.unique.count(c),
                self.unique.percentage(c),
            ));
        }
        out.push_str(&format!("{:<8} {:>10} {:>8} {:>10} {:>8}\n", "total", self.valid.total, "", self.unique.total, ""));
        out.push_str(&format!("unparseable: {}\n", self.unparseable));
        out
    }
}
