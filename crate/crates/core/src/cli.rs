//! Batch command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::containment::{decide, Config, Decision, Method, Verdict};
use crate::corpus::analyze_log;
use crate::error::{Error, Result};
use crate::query_model::{classify_query, parse_query, render_word, Crpq};
use crate::reductions::{
    corridor_tiling_to_containment, corridor_tiling_to_containment_aastar, exp_tiling_to_containment,
    qbf_brute, qbf_to_containment, qbf_to_containment_astar, tiling_exists, Qbf2Instance, TilingInstance,
};

pub const EXIT_CONTAINED: i32 = 0;
pub const EXIT_NOT_CONTAINED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 10;
pub const EXIT_PARSE: i32 = 11;
pub const EXIT_IO: i32 = 12;
pub const EXIT_INSTANCE: i32 = 13;

#[derive(Parser, Debug)]
#[command(name = "crpq-contain", version, about = "Containment checking for conjunctive regular path queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether Q1 is contained in Q2.
    Check {
        q1: PathBuf,
        q2: PathBuf,
        #[command(flatten)]
        run: RunConfig,
        /// Write the counterexample as JSON to this file.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Print the fragment class of a query.
    Classify {
        q: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a containment pair from a reduction instance.
    Gen {
        kind: GenKind,
        instance: PathBuf,
        out_dir: PathBuf,
        /// Skip the brute-force oracle.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Classify the expressions of a query log.
    AnalyzeLog {
        path: PathBuf,
        #[arg(long)]
        dedupe: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunConfig {
    /// `auto` or one of the named algorithms.
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long, default_value_t = 4)]
    pub max_word_len: usize,
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub enum_cap: u64,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub json: bool,
    /// Oracle worker threads; 0 uses every core.
    #[arg(long, env = "CRPQ_CONTAIN_WORKERS", default_value_t = 0)]
    pub workers: usize,
}

impl RunConfig {
    pub fn to_config(&self) -> Result<Config> {
        let method = match self.method.as_str() {
            "auto" => None,
            m => Some(m.parse::<Method>()?),
        };
        let budget = match self.budget {
            None => None,
            Some(b) if b.is_finite() && b > 0.0 => Some(Duration::from_secs_f64(b)),
            Some(b) => return Err(Error::Instance(format!("budget must be positive, got {b}"))),
        };
        if self.max_word_len == 0 {
            return Err(Error::Instance("max word length must be positive".into()));
        }
        Ok(Config {
            method,
            max_word_len: self.max_word_len,
            enum_cap: self.enum_cap as usize,
            budget,
            workers: self.workers,
            ..Config::default()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Qbf,
    QbfAstar,
    Tiling,
    TilingAstar,
    ExpTiling,
}

impl GenKind {
    fn as_str(self) -> &'static str {
        match self {
            GenKind::Qbf => "qbf",
            GenKind::QbfAstar => "qbf-astar",
            GenKind::Tiling => "tiling",
            GenKind::TilingAstar => "tiling-astar",
            GenKind::ExpTiling => "exp-tiling",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Label(_) | Error::Json(_) => EXIT_PARSE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INSTANCE,
    }
}

/// Parse arguments, run one command and return the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let sink: &mut dyn std::io::Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read_query(path: &Path) -> Result<Crpq> {
    parse_query(&std::fs::read_to_string(path)?)
}

fn execute(cmd: &Command, out: &mut dyn std::io::Write) -> Result<i32> {
    match cmd {
        Command::Check { q1, q2, run, witness } => {
            let cfg = run.to_config()?;
            let (a, b) = (read_query(q1)?, read_query(q2)?);
            let d = decide(&a, &b, &cfg)?;
            if let (Some(path), Some(w)) = (witness, d.witness()) {
                std::fs::write(path, serde_json::to_string_pretty(&w.to_json())?)?;
            }
            if run.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&d.to_json())?)?;
            } else {
                out.write_all(render_decision(&d).as_bytes())?;
            }
            Ok(match d.verdict {
                Verdict::Contained => EXIT_CONTAINED,
                Verdict::NotContained(_) => EXIT_NOT_CONTAINED,
                Verdict::Unknown(_) => EXIT_UNKNOWN,
            })
        }
        Command::Classify { q, json } => {
            let class = classify_query(&read_query(q)?);
            if *json {
                let v = json!({ "class": class.name(), "detail": class });
                writeln!(out, "{}", serde_json::to_string(&v)?)?;
            } else {
                writeln!(out, "{}", class.name())?;
            }
            Ok(0)
        }
        Command::Gen { kind, instance, out_dir, no_oracle } => {
            let sidecar = generate(*kind, instance, out_dir, !no_oracle)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&sidecar)?)?;
            Ok(0)
        }
        Command::AnalyzeLog { path, dedupe, json } => {
            let r = analyze_log(path, *dedupe)?;
            if *json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r.to_json())?)?;
            } else {
                out.write_all(r.to_table().as_bytes())?;
            }
            Ok(0)
        }
    }
}

pub fn render_decision(d: &Decision) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {}", d.verdict_str());
    let _ = writeln!(s, "method: {}", d.method);
    let bound = match d.verdict {
        Verdict::Unknown(b) => b.or(d.bound),
        _ => d.bound,
    };
    if let Some(b) = bound {
        let _ = writeln!(s, "bound: {b}");
    }
    let _ = writeln!(s, "models examined: {}", d.stats.models_examined);
    let _ = writeln!(s, "elapsed: {:.3} ms", d.stats.elapsed.as_secs_f64() * 1000.0);
    if let Some(w) = d.witness() {
        s.push_str("witness:\n");
        for (i, word) in w.words.iter().enumerate() {
            let _ = writeln!(s, "  atom {i}: {}", if word.is_empty() { "()".to_string() } else { render_word(word) });
        }
        for line in w.kb.to_tsv().lines() {
            let _ = writeln!(s, "  {line}");
        }
        let nu: Vec<String> = w.nu.iter().map(|(x, &n)| format!("{x}={}", w.kb.node_name(n))).collect();
        let _ = writeln!(s, "  nu: {}", nu.join(" "));
    }
    s
}

/// Write `q1.crpq`, `q2.crpq` and `instance.json` to `out_dir`; returns the
/// sidecar. The expected verdict is present only when the oracle ran.
pub fn generate(kind: GenKind, instance: &Path, out_dir: &Path, oracle: bool) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(instance)?;
    let (q1, q2, inst, expected, detail) = match kind {
        GenKind::Qbf | GenKind::QbfAstar => {
            let phi: Qbf2Instance = serde_json::from_str(&text)?;
            let (q1, q2) =
                if kind == GenKind::Qbf { qbf_to_containment(&phi)? } else { qbf_to_containment_astar(&phi)? };
            let valid = if oracle { qbf_brute(&phi).ok() } else { None };
            let expected = valid.map(|v| if v { "contained" } else { "not_contained" });
            (q1, q2, serde_json::to_value(&phi)?, expected, json!({ "valid": valid }))
        }
        GenKind::Tiling | GenKind::TilingAstar | GenKind::ExpTiling => {
            let t: TilingInstance = serde_json::from_str(&text)?;
            let (q1, q2) = match kind {
                GenKind::Tiling => corridor_tiling_to_containment(&t)?,
                GenKind::TilingAstar => corridor_tiling_to_containment_aastar(&t)?,
                _ => exp_tiling_to_containment(&t)?,
            };
            let found = if oracle { tiling_exists(&t).ok() } else { None };
            let expected = found.as_ref().map(|f| if f.is_some() { "not_contained" } else { "contained" });
            (q1, q2, serde_json::to_value(&t)?, expected, json!({ "tiling": found }))
        }
    };
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("q1.crpq"), format!("{q1}\n"))?;
    std::fs::write(out_dir.join("q2.crpq"), format!("{q2}\n"))?;
    let sidecar = json!({
        "kind": kind.as_str(),
        "instance": inst,
        "q1": "q1.crpq",
        "q2": "q2.crpq",
        "expected": expected,
        "oracle": if oracle { detail } else { serde_json::Value::Null },
    });
    std::fs::write(out_dir.join("instance.json"), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(sidecar)
}
