//! Pad an irregular multigraph to a lazy f-regular graph and inspect its
//! canonical rotation map.

use lapinv::multigraph::{regularize, Rotation};
use lapinv::Multigraph;

fn main() -> lapinv::Result<()> {
    // a triangle with a pendant vertex and a doubled edge
    let g = Multigraph::from_edges(4, [(0, 1, 2), (1, 2, 1), (2, 0, 1), (2, 3, 1)])?;
    println!("degrees {:?}", g.degrees());

    let reg = regularize(&g)?;
    println!("f = {}, added loops per vertex {:?}", reg.f, reg.loops);
    let h = &reg.graph;
    println!("half lazy: {}, involution: {}", h.is_half_lazy(), h.is_involution());

    if let Rotation::Table(_) = h.rotation() {
        for v in 0..h.n() {
            let row: Vec<String> = (0..h.degree())
                .map(|i| {
                    let (w, j) = h.rot(v, i).unwrap();
                    format!("{i}->({w},{j})")
                })
                .collect();
            println!("Rot({v}, .): {}", row.join(" "));
        }
    }
    println!("normalized Laplacian of the padded graph:\n{}", reg.normalized_laplacian()?);
    Ok(())
}
