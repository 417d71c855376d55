//! A chain of derandomized squares on a lazy cycle: per-level degrees,
//! eigenvalue bounds and measured eigenvalues.

use lapinv::dsquare::{build_chain, ChainConfig, ChainLabel, DegreePolicy};
use lapinv::families::cycle;
use lapinv::regularize;

fn main() -> lapinv::Result<()> {
    let base = regularize(&cycle(8)?)?.graph;
    let cfg = ChainConfig {
        mu: 1.0 / 16.0,
        k: 4,
        degrees: DegreePolicy::PerLevel,
    };
    // the lifted operator for level 4 has 8 * 2^16 rows
    let chain = build_chain(base, &cfg)?.with_dense_cap(1 << 20);
    let stats = chain.stats(true)?;
    println!("level  log2(deg)  expander  c       lambda(H)  bound    measured");
    for l in &stats.levels {
        println!(
            "{:5}  {:9}  {:8}  {:6}  {:9}  {:7}  {}",
            l.level,
            l.degree_log2,
            l.expander,
            l.c.map_or("-".into(), |c| c.to_string()),
            l.lambda_h.map_or("-".into(), |x| format!("{x:.4}")),
            l.lambda_bound.map_or("-".into(), |x| format!("{x:.4}")),
            l.lambda_measured.map_or("-".into(), |x| format!("{x:.4}")),
        );
    }

    chain.metrics().reset();
    let label = ChainLabel::new(vec![1, 2, 3, 4, 5]);
    let (w, back) = chain.rot_chain(4, 0, &label)?;
    println!("Rot_G4(0, {:?}) = ({w}, {:?})", label.digits(), back.digits());
    println!("{:?}", chain.metrics().snapshot());
    Ok(())
}
