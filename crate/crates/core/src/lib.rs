pub mod canonical;
pub mod cli;
pub mod containment;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod kb;
pub mod query_model;
pub mod reductions;
pub mod regex_engine;

pub use error::{Error, Result};
