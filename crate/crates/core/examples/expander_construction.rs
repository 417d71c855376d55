//! Greedy small-bias sets over F_2^t, their certificates and JSON form.

use lapinv::expander::{bias, build_expander, min_degree_for_bias};
use lapinv::oracle::lambda;
use lapinv::ExpanderSpec;

fn main() -> lapinv::Result<()> {
    for (t, mu) in [(4u32, 0.25), (8, 0.1), (10, 1.0 / 16.0)] {
        let spec = build_expander(t, mu)?;
        println!(
            "t={t:2} mu={mu:.4}: c={:4} (trace floor {:4}), bias {:.4}",
            spec.c(),
            min_degree_for_bias(t, mu),
            spec.verified_bias()
        );
        if t <= 8 {
            println!("        eigensolver lambda(H) = {:.4}", lambda(&spec.to_graph())?);
        }
    }

    let spec = build_expander(6, 0.25)?;
    let text = spec.to_json()?;
    let back = ExpanderSpec::from_json(&text)?;
    assert_eq!(back.generators(), spec.generators());
    println!("round trip ok, bias recomputed {:.4}", bias(6, back.generators()));
    Ok(())
}
