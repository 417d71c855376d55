//! Entries of the pseudoinverse approximation computed one at a time from
//! rotation-map queries, with the instrumented space proxies.

use std::sync::Arc;

use lapinv::families::cycle;
use lapinv::pinv::{constant_approx, Backend};
use lapinv::{regularize, DerandChain, ExpanderSpec, LevelExpander};

fn main() -> lapinv::Result<()> {
    let base = regularize(&cycle(6)?)?.graph;
    // explicit generators: level i acts on the 2 + 2(i-1) label bits
    let exps = vec![
        LevelExpander::Cayley(ExpanderSpec::from_generators(2, 1.0, vec![0, 1, 2, 3])?),
        LevelExpander::Cayley(ExpanderSpec::from_generators(4, 1.0, vec![0, 3, 5, 14])?),
    ];
    let chain = Arc::new(DerandChain::new(base, exps)?);

    let dense = constant_approx(chain.clone(), Backend::Dense)?.to_dense()?;
    let lazy = constant_approx(chain.clone(), Backend::Entrywise)?;
    for (i, j) in [(0, 0), (0, 3), (2, 5)] {
        println!("Z[{i},{j}] entrywise {:.12}  dense {:.12}", lazy.entry(i, j)?, dense[(i, j)]);
    }
    println!("product metrics {:?}", lazy.product_metrics().snapshot());
    println!("rotation metrics {:?}", chain.metrics().snapshot());
    Ok(())
}
