use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid label `{0}`")]
    Label(String),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("wildcards are not allowed under the strict-finite alphabet policy")]
    WildcardStrict,
    #[error("word `{word}` is not in the language of atom {atom}")]
    NotInLanguage { atom: usize, word: String },
    #[error("expected {expected} per-atom words, got {got}")]
    WordCount { expected: usize, got: usize },
    #[error("query is outside the fragment required by {method}: class {class}")]
    Fragment { method: &'static str, class: String },
    #[error("arity mismatch: left query has {left} distinguished variables, right has {right}")]
    Arity { left: usize, right: usize },
    #[error("multiplicity {mult} exceeds expansion cap {cap}")]
    MultiplicityCap { mult: String, cap: u64 },
    #[error("power edge with zero multiplicity between distinct nodes {0} and {1}")]
    ZeroPowerEdge(String, String),
    #[error("power edge with empty word")]
    EmptyPowerWord,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
