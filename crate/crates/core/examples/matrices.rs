//! Boolean transition matrices of an automaton: word products, huge powers
//! by repeated squaring, and the index/period of a power sequence.
//!
//! ```bash
//! cargo run --example matrices
//! ```

use std::collections::BTreeSet;

use crpq_contain::query_model::{parse_regex, word, Label};
use crpq_contain::regex_engine::{compile, index_and_period, matrix_for_word, matrix_power};
use num_bigint::BigUint;

fn show(m: &crpq_contain::regex_engine::TransitionMatrix) {
    for i in 0..m.dim() {
        let row: String = (0..m.dim()).map(|j| if m.get(i, j) { '1' } else { '.' }).collect();
        println!("    {row}");
    }
}

fn main() -> crpq_contain::Result<()> {
    let alphabet: BTreeSet<Label> = word(&["a", "b"]).into_iter().collect();
    let nfa = compile(&parse_regex("(aab)*b")?, &alphabet)?;
    println!("(aab)*b: {} states", nfa.n_states());

    let m = matrix_for_word(&nfa, &word(&["a", "a", "b"]))?;
    println!("  M(aab):");
    show(&m);

    let e = (BigUint::from(1u8) << 64u32) - 1u8;
    println!("  M(aab)^(2^64 - 1):");
    show(&matrix_power(&m, &e));

    if let Some((index, period)) = index_and_period(&m, 1 << 16) {
        println!("  index {index}, period {period}");
    }
    Ok(())
}
