//! Corridor and exponential-width tiling instances turned into containment
//! questions. A valid tiling shows up as a counterexample.
//!
//! ```bash
//! cargo run --release --example tiling_reduction
//! ```

use std::collections::BTreeSet;

use crpq_contain::containment::{decide, Config};
use crpq_contain::reductions::{
    corridor_tiling_to_containment, corridor_tiling_to_containment_aastar, exp_tiling_to_containment,
    tiling_exists, Boundary, TilingInstance,
};

fn all_pairs(n: usize) -> BTreeSet<(usize, usize)> {
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
}

fn main() -> crpq_contain::Result<()> {
    let corridor = |vertical: BTreeSet<(usize, usize)>| TilingInstance {
        tiles: 2,
        horizontal: all_pairs(2),
        vertical,
        boundary: Boundary::Rows { initial: vec![0, 1], last: vec![1, 0] },
        width: 2,
        partition: Some([vec![0], vec![1], vec![]]),
    };
    let exp = |horizontal: BTreeSet<(usize, usize)>| TilingInstance {
        tiles: 2,
        horizontal,
        vertical: BTreeSet::new(),
        boundary: Boundary::Corners { initial: 0, last: 1 },
        width: 1,
        partition: None,
    };
    let cfg = Config::default();

    for (name, t) in [("corridor, V = all", corridor(all_pairs(2))), ("corridor, V = none", corridor(BTreeSet::new()))] {
        println!("{name}: tiling {:?}", tiling_exists(&t)?);
        let (q1, q2) = corridor_tiling_to_containment(&t)?;
        println!("  Q1 = {q1}\n  Q2 = {q2}");
        println!("  plain: {}", decide(&q1, &q2, &cfg)?.verdict_str());
        let (q1, q2) = corridor_tiling_to_containment_aastar(&t)?;
        println!("  with markers: {}", decide(&q1, &q2, &cfg)?.verdict_str());
    }

    for (name, t) in [("2^1 wide, H = all", exp(all_pairs(2))), ("2^1 wide, H = {00, 11}", exp([(0, 0), (1, 1)].into()))] {
        let (q1, q2) = exp_tiling_to_containment(&t)?;
        let d = decide(&q1, &q2, &cfg)?;
        println!("{name}: tiling {:?}, Q2 has {} atoms, {} via {}", tiling_exists(&t)?, q2.atoms.len(), d.verdict_str(), d.method);
    }
    Ok(())
}
