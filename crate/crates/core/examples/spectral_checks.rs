//! The spectral oracle: pseudoinverses, lambda, approximation checks and
//! the randomized property harness.

use lapinv::families::random_rotation;
use lapinv::harness::run_harness;
use lapinv::linalg::centering;
use lapinv::oracle::{check_approx, exact_pinv, lambda};
use lapinv::families::make_lazy;

fn main() -> lapinv::Result<()> {
    let j = centering(5);
    println!("(I - J)+ == I - J: {}", (exact_pinv(&j)? - &j).amax() < 1e-12);

    let g = make_lazy(&random_rotation(9, 3, 4)?)?;
    let lam = lambda(&g)?;
    let l = g.transition_matrix()?.normalized_laplacian();
    for eps in [(1.0 / (1.0 - lam)).ln(), (1.0 / (1.0 - 0.9 * lam)).ln()] {
        let c = check_approx(&l, &centering(9), eps, 1e-9)?;
        println!("lambda={lam:.4} eps={eps:.4}: pass={} slacks ({:.2e}, {:.2e})", c.pass, c.lower_slack, c.upper_slack);
    }

    let rep = run_harness(0, 20)?;
    for p in &rep.properties {
        println!("{:24} {} (worst margin {:.2e})", p.name, if p.pass { "pass" } else { "FAIL" }, p.worst_margin);
    }
    Ok(())
}
