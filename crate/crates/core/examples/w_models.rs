//! Power edges: compressed canonical models whose repetition counts are far
//! too large to expand, searched through their periodic abstraction.
//!
//! ```bash
//! cargo run --release --example w_models
//! ```

use std::collections::BTreeMap;

use crpq_contain::canonical::{build_compressed, WItem};
use crpq_contain::containment::{contain_left_w, Config};
use crpq_contain::embedding::find_embedding_compressed;
use crpq_contain::query_model::{word, Crpq};
use num_bigint::BigUint;

fn main() -> crpq_contain::Result<()> {
    let q1: Crpq = "Q(x,y) <- x a(bc)*a y".parse()?;
    let huge = BigUint::from(10u8).pow(30);
    let choice = vec![vec![
        (WItem::Letter(word(&["a"])[0].clone()), BigUint::from(1u8)),
        (WItem::Power(word(&["b", "c"])), huge.clone()),
        (WItem::Letter(word(&["a"])[0].clone()), BigUint::from(1u8)),
    ]];
    let model = build_compressed(&q1, &choice);
    println!("model: {} nodes, (bc)^{huge}", model.ckb.nodes.len());

    for probe in ["Q() <- u bcb v", "Q() <- u cbcbcbc v", "Q() <- u ab v, v c w", "Q() <- u cc v"] {
        let q: Crpq = probe.parse()?;
        let found = find_embedding_compressed(&q, &model, &BTreeMap::new())?.is_some();
        println!("  {probe}: {found}");
    }

    let cfg = Config::default();
    for q2 in ["Q(x,y) <- x a u, u (bc)* v, v a y", "Q(x,y) <- x (a+b+c)* y", "Q(x,y) <- x ab z, z (cb)* y"] {
        let q2: Crpq = q2.parse()?;
        println!("{q1} in {q2}: {}", contain_left_w(&q1, &q2, &cfg)?.verdict_str());
    }
    Ok(())
}
