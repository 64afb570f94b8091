//! Fragment classification and which algorithm `decide` ends up using.
//!
//! ```bash
//! cargo run --example fragments
//! ```

use crpq_contain::containment::{applicable_methods, decide, Config};
use crpq_contain::query_model::{classify_query, classify_regex, parse_regex, Crpq};

fn main() -> crpq_contain::Result<()> {
    for r in ["a", "a+b", "a*", "ab*", "(a+b)c*", "a(b+c)*d", "a(bc)*", "_", "(a+bc)*"] {
        println!("{r:>10}  {}", classify_regex(&parse_regex(r)?).name());
    }
    println!();

    let pairs = [
        ("Q(x,y) <- x a y, y b z", "Q(x,y) <- x (a+b)* y"),
        ("Q(x,y) <- x (a+b)* a (a+b)* y", "Q(x,y) <- x a y"),
        ("Q() <- x (a+b)* c (a+b)* y", "Q() <- u a* v, v c w"),
        ("Q(x,y) <- x a(bc)* y", "Q(x,y) <- x a u, u (bc)* y"),
        ("Q(x,y) <- x _ y", "Q(x,y) <- x a y"),
    ];
    let cfg = Config::default();
    for (a, b) in pairs {
        let (q1, q2): (Crpq, Crpq) = (a.parse()?, b.parse()?);
        let methods: Vec<String> = applicable_methods(&q1, &q2).iter().map(|m| m.to_string()).collect();
        let d = decide(&q1, &q2, &cfg)?;
        println!("{a}  in  {b}");
        println!(
            "    {} / {}, tried [{}] -> {} via {}",
            classify_query(&q1).name(),
            classify_query(&q2).name(),
            methods.join(", "),
            d.verdict_str(),
            d.method
        );
    }
    Ok(())
}
