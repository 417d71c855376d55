//! Constant-accuracy pseudoinverse from a squaring chain, checked against
//! the exact pseudoinverse.

use std::sync::Arc;

use lapinv::families::random_connected;
use lapinv::oracle::{approx_parameter, exact_pinv};
use lapinv::pinv::{constant_approx, Backend};
use lapinv::{regularize, DerandChain};

fn main() -> lapinv::Result<()> {
    let g = random_connected(10, 6, 2, 3)?;
    let base = regularize(&g)?.graph;
    let lp = exact_pinv(&base.transition_matrix()?.normalized_laplacian())?;

    for k in [2, 4, 8, 12] {
        let chain = Arc::new(DerandChain::exact_squaring(base.clone(), k)?);
        let z = constant_approx(chain, Backend::Dense)?;
        let measured = approx_parameter(&lp, &z.to_dense()?)?;
        println!("k={k:2}: certified delta {:.4}, measured {:.4}", z.delta, measured);
    }
    Ok(())
}
