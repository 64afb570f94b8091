//! Class mix of a small property-path log, as a table and as JSON.
//!
//! ```bash
//! cargo run --example log_report
//! ```

use crpq_contain::corpus::{analyze_text, classify_expression_string};

const LOG: &str = "\
a*\t120
a/b*\t40
(a|b)/c*\t12
a/(b|c)*/d\t7
(a/b)*\t3
^a/b\t9
!(a|b)\t2
a*\t5
((\t1
";

fn main() {
    for line in LOG.lines() {
        let expr = line.split('\t').next().unwrap_or_default();
        let (class, flags) = classify_expression_string(expr);
        let mut notes = Vec::new();
        if flags.wildcard {
            notes.push("wildcard");
        }
        if flags.inverse {
            notes.push("inverse");
        }
        if flags.unparseable {
            notes.push("unparseable");
        }
        println!("{expr:>14}  {:<7} {}", class.name(), notes.join(" "));
    }
    let report = analyze_text(LOG, true);
    println!("\n{}", report.to_table());
    println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
}
