//! Masters of masters: the two-hop apprentice query, with and without the
//! extra atom that makes it contained.
//!
//! ```bash
//! cargo run --example jedi
//! ```

use crpq_contain::containment::{decide, verify_witness, Config};
use crpq_contain::query_model::Crpq;

fn main() -> crpq_contain::Result<()> {
    let q1: Crpq = "Q(x1,x2) <- x1 <app> jm1, x2 <app> jm1, jm1 <app> jm2".parse()?;
    let short: Crpq = "Q(x1,x2) <- x1 <app> jm1, x2 <app> jm1".parse()?;
    let q2: Crpq = "Q(x1,x2) <- x1 <app><app> jm, x2 <app><app> jm".parse()?;
    let cfg = Config::default();

    let d = decide(&q1, &q2, &cfg)?;
    println!("Q1 in Q2: {} ({})", d.verdict_str(), d.method);

    let d = decide(&short, &q2, &cfg)?;
    println!("Q1' in Q2: {} ({})", d.verdict_str(), d.method);
    if let Some(w) = d.witness() {
        for (u, l, v) in w.kb.edges() {
            println!("  {} -{}-> {}", w.kb.node_name(*u), l, w.kb.node_name(*v));
        }
        for (var, node) in &w.nu {
            println!("  {var} = {}", w.kb.node_name(*node));
        }
        assert!(verify_witness(&short, &q2, w));
        println!("{}", serde_json::to_string_pretty(&w.to_json()).unwrap());
    }
    Ok(())
}
