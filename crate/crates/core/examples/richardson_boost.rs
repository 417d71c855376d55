//! Boost a rough pseudoinverse to high accuracy with preconditioned
//! Richardson iteration.

use lapinv::families::random_connected;
use lapinv::harness::random_approx;
use lapinv::oracle::{approx_parameter, exact_pinv};
use lapinv::richardson::{boost_matrix, certified_parameter, BoostConfig};
use lapinv::PinvApproximation;
use rand::SeedableRng;

fn main() -> lapinv::Result<()> {
    let g = random_connected(12, 8, 3, 11)?;
    let l = g.laplacian()?;
    let lp = exact_pinv(&l)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let alpha = 0.3;
    let rough = PinvApproximation::dense(random_approx(&lp, alpha, &mut rng), alpha);
    println!("rough: {:.4}", approx_parameter(&lp, &rough.to_dense()?)?);

    for k in [1, 2, 4, 8, 16] {
        let cfg = BoostConfig::with_iterations(alpha, k)?;
        let out = boost_matrix(&l, &rough, &cfg)?;
        println!(
            "k={k:2}: measured {:.3e}, certified {:.3e}",
            approx_parameter(&lp, &out.to_dense()?)?,
            certified_parameter(alpha, k)
        );
    }
    let cfg = BoostConfig::new(alpha, 1e-8)?;
    println!("eps 1e-8 needs {} iterations", cfg.iterations);
    Ok(())
}
