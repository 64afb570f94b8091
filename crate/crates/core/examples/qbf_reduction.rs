//! Build containment instances from forall-exists 3-CNF formulas and compare
//! the verdicts with brute-force evaluation.
//!
//! ```bash
//! cargo run --release --example qbf_reduction
//! ```

use crpq_contain::containment::{decide, Config};
use crpq_contain::query_model::classify_query;
use crpq_contain::reductions::{qbf_brute, qbf_to_containment, qbf_to_containment_astar, Literal, Qbf2Instance};

fn formula(n: usize, l: usize, clauses: &[[&str; 3]]) -> Qbf2Instance {
    let lit = |s: &str| s.parse::<Literal>().expect("literal");
    Qbf2Instance { universal: n, existential: l, clauses: clauses.iter().map(|c| c.map(lit)).collect() }
}

fn main() -> crpq_contain::Result<()> {
    let formulas = [
        formula(1, 1, &[["x1", "y1", "y1"]]),
        formula(1, 1, &[["x1", "x1", "x1"]]),
        formula(2, 1, &[["x1", "x2", "y1"], ["!x1", "!x2", "!y1"]]),
        formula(1, 2, &[["x1", "y1", "y2"], ["!x1", "!y1", "y2"], ["!y2", "y1", "x1"]]),
    ];
    let cfg = Config::default();
    for phi in &formulas {
        let valid = qbf_brute(phi)?;
        println!("{phi}\n  valid: {valid}");
        let (q1, q2) = qbf_to_containment(phi)?;
        println!("  Q1 has {} atoms ({}), Q2 has {} atoms ({})", q1.atoms.len(), classify_query(&q1).name(), q2.atoms.len(), classify_query(&q2).name());
        let d = decide(&q1, &q2, &cfg)?;
        println!("  (A) gadgets: {} via {}", d.verdict_str(), d.method);
        let (q1, q2) = qbf_to_containment_astar(phi)?;
        let d = decide(&q1, &q2, &cfg)?;
        println!("  (a,a*) gadgets: {} via {}", d.verdict_str(), d.method);
    }
    Ok(())
}
