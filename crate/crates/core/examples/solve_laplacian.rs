//! Solve (D - A)x = b on an irregular multigraph and compare with the
//! exact solution.

use lapinv::families::random_connected;
use lapinv::linalg::project_out_ones;
use lapinv::oracle::exact_pinv;
use lapinv::{solve, SolverConfig};
use nalgebra::DVector;

fn main() -> lapinv::Result<()> {
    let g = random_connected(20, 15, 3, 8)?;
    let mut b = DVector::from_fn(20, |i, _| ((i * 7) % 5) as f64 - 2.0);
    project_out_ones(&mut b);
    let exact = exact_pinv(&g.laplacian()?)? * &b;

    for eps in [1e-2, 1e-6] {
        let rep = solve(&g, &b, eps, &SolverConfig::default())?;
        let err = (DVector::from_vec(rep.x.clone()) - &exact).norm() / exact.norm();
        println!(
            "eps {eps:.0e}: f={} k={} eps'={:.2e} delta={:.2e} boost iterations={} relative error {err:.2e}",
            rep.f, rep.k, rep.eps_internal, rep.delta_chain, rep.boost_iterations
        );
    }
    println!("{}", serde_json::to_string(&solve(&g, &b, 1e-3, &SolverConfig::default())?.metrics)?);
    Ok(())
}
