//! Bounded canonical-model oracle and the registry of word-length bounds
//! proven sufficient per fragment pair.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::right::Mode;
use super::{q2_embeds, timed_out, Config, Decision, Method, Verdict};
use crate::canonical::build_from_words;
use crate::embedding::Embedder;
use crate::error::Result;
use crate::query_model::{working_alphabet, Crpq, Label, WildcardPolicy};
use crate::regex_engine::{compile, Nfa};

/// Smallest registered bound on canonical word lengths that is exhaustive
/// for the pair, if any applies.
pub fn certificate(q1: &Crpq, q2: &Crpq, cfg: &Config) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut offer = |c: Option<usize>| {
        if let Some(c) = c {
            best = Some(best.map_or(c, |b| b.min(c)));
        }
    };
    if let Ok(al) = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol) {
        let lens: Option<Vec<usize>> = q1
            .atoms
            .iter()
            .map(|a| compile(&a.regex, &al).ok().and_then(|n| n.max_word_len()))
            .collect();
        offer(lens.map(|l| l.into_iter().max().unwrap_or(0)));
    }
    offer(super::right::certificate(q1, q2, Mode::Letters));
    offer(super::right::certificate(q1, q2, Mode::Runs));
    offer(super::left::certificate(q1, q2, cfg.period_limit));
    best
}

enum Branch {
    Found(Vec<Vec<Label>>),
    Done,
    Aborted,
}

struct Oracle<'a> {
    q1: &'a Crpq,
    q2: &'a Crpq,
    nfas: Vec<Nfa>,
    emb: Embedder,
    max_len: usize,
    budget: u64,
    deadline: Option<Instant>,
    examined: AtomicU64,
}

impl Oracle<'_> {
    fn branch(&self, first: Vec<Label>) -> Branch {
        let mut used = 0u64;
        let mut words = vec![first];
        let r = self.dfs(&mut words, &mut used);
        self.examined.fetch_add(used, Ordering::Relaxed);
        r
    }

    fn dfs(&self, words: &mut Vec<Vec<Label>>, used: &mut u64) -> Branch {
        *used += 1;
        if *used > self.budget || timed_out(self.deadline) {
            return Branch::Aborted;
        }
        let m = build_from_words(self.q1, words);
        if q2_embeds(&self.emb, self.q1, self.q2, &m.kb, &m.nu) {
            return Branch::Done;
        }
        let level = words.len();
        if level == self.q1.atoms.len() {
            return Branch::Found(words.clone());
        }
        let mut out = Branch::Done;
        self.nfas[level].for_each_word(self.max_len, &mut |w| {
            words.push(w.to_vec());
            let r = self.dfs(words, used);
            words.pop();
            match r {
                Branch::Done => true,
                other => {
                    out = other;
                    false
                }
            }
        });
        out
    }
}

/// First-atom words handed to the workers at a time.
const CHUNK: usize = 64;

/// Search canonical models with words of length at most `max_word_len`, in
/// enumeration order; the first rejecting model is the witness. Without a
/// counterexample the verdict is Contained only when a registered bound is
/// covered.
pub fn contain_bounded(q1: &Crpq, q2: &Crpq, max_word_len: usize, cfg: &Config) -> Result<Decision> {
    super::check_arity(q1, q2)?;
    let start = Instant::now();
    let al = working_alphabet(q1, q2, WildcardPolicy::FreshSymbol)?;
    let nfas: Vec<Nfa> = q1.atoms.iter().map(|a| compile(&a.regex, &al)).collect::<Result<_>>()?;
    let emb = Embedder::new(q2, &al)?;
    let finish = |verdict: Verdict, examined: u64| {
        let mut d = Decision::new(verdict, Method::Bounded, examined, start);
        d.bound = Some(max_word_len);
        d
    };
    if nfas.iter().any(|n| n.is_empty()) {
        return Ok(finish(Verdict::Contained, 0));
    }
    let oracle = Oracle {
        q1,
        q2,
        nfas,
        emb,
        max_len: max_word_len,
        budget: cfg.model_budget,
        deadline: cfg.deadline(start),
        examined: AtomicU64::new(0),
    };
    if q1.atoms.is_empty() {
        let m = build_from_words(q1, &[]);
        let verdict = if q2_embeds(&oracle.emb, q1, q2, &m.kb, &m.nu) {
            Verdict::Contained
        } else {
            Verdict::NotContained(m)
        };
        return Ok(finish(verdict, 1));
    }
    let pool = match cfg.workers {
        0 | 1 => None,
        n => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::error::Error::Instance(e.to_string()))?,
        ),
    };
    let aborted = AtomicBool::new(false);
    let run = |w: &Vec<Label>| match oracle.branch(w.clone()) {
        Branch::Found(ws) => Some(ws),
        Branch::Aborted => {
            aborted.store(true, Ordering::Relaxed);
            None
        }
        Branch::Done => None,
    };
    let search = |chunk: &[Vec<Label>]| match (cfg.workers, &pool) {
        (1, _) => chunk.iter().find_map(run),
        (_, Some(p)) => p.install(|| chunk.par_iter().find_map_first(run)),
        _ => chunk.par_iter().find_map_first(run),
    };
    let mut chunk = Vec::new();
    let mut seen = 0u64;
    let mut truncated = false;
    let mut found = None;
    let flush = |chunk: &mut Vec<Vec<Label>>, found: &mut Option<Vec<Vec<Label>>>| {
        *found = search(chunk);
        chunk.clear();
        found.is_none() && !aborted.load(Ordering::Relaxed)
    };
    let completed = oracle.nfas[0].for_each_word(max_word_len, &mut |w| {
        if seen >= cfg.model_budget {
            truncated = true;
            return false;
        }
        seen += 1;
        chunk.push(w.to_vec());
        chunk.len() < CHUNK || flush(&mut chunk, &mut found)
    });
    if completed || truncated {
        flush(&mut chunk, &mut found);
    }
    let examined = oracle.examined.load(Ordering::Relaxed);
    if let Some(words) = found {
        let model = build_from_words(q1, &words);
        debug_assert!(super::verify_witness(q1, q2, &model));
        return Ok(finish(Verdict::NotContained(model), examined));
    }
    if truncated || aborted.load(Ordering::Relaxed) {
        return Ok(finish(Verdict::Unknown(Some(max_word_len)), examined));
    }
    let verdict = match certificate(q1, q2, cfg) {
        Some(c) if c <= max_word_len => Verdict::Contained,
        _ => Verdict::Unknown(Some(max_word_len)),
    };
    Ok(finish(verdict, examined))
}
