//! Hitting times, commute times and escape probabilities, next to the
//! absorbing-chain answers.

use lapinv::oracle::{absorbing_hitting_times, absorption_probabilities};
use lapinv::solver::{commute_time, escape_probabilities, hitting_time};
use lapinv::{Multigraph, SolverConfig};

fn main() -> lapinv::Result<()> {
    // a lollipop: K4 on {0..3} with a tail 3-4-5
    let g = Multigraph::from_pairs(6, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4), (4, 5)])?;
    let cfg = SolverConfig::default();
    let eps = 1e-6;

    let h05 = hitting_time(&g, 0, 5, eps, &cfg)?.value.unwrap();
    let h50 = hitting_time(&g, 5, 0, eps, &cfg)?.value.unwrap();
    println!("H(0->5) = {h05:.6}  oracle {:.6}", absorbing_hitting_times(&g, &[5])?[0]);
    println!("H(5->0) = {h50:.6}  oracle {:.6}", absorbing_hitting_times(&g, &[0])?[5]);
    println!("C(0,5)  = {:.6}", commute_time(&g, 0, 5, eps, &cfg)?.value.unwrap());

    let p = escape_probabilities(&g, 0, 5, eps, &cfg)?.p.unwrap();
    let q = absorption_probabilities(&g, 0, 5)?;
    for (w, (a, b)) in p.iter().zip(&q).enumerate() {
        println!("P_{w}[reach 0 before 5] = {a:.6}  oracle {b:.6}");
    }
    Ok(())
}
