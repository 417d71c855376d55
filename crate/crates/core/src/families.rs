//! Small graph families for fixtures, examples and tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::multigraph::{LabeledMultigraph, Multigraph};

pub fn cycle(n: usize) -> Result<Multigraph> {
    if n < 3 {
        return Err(Error::invalid(format!("a simple cycle needs n >= 3, got {n}")));
    }
    let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Multigraph::from_pairs(n, &pairs)
}

pub fn path(n: usize) -> Result<Multigraph> {
    let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Multigraph::from_pairs(n, &pairs)
}

/// K_n without loops.
pub fn complete(n: usize) -> Result<Multigraph> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    Multigraph::from_pairs(n, &pairs)
}

pub fn star(n: usize) -> Result<Multigraph> {
    let pairs: Vec<_> = (1..n).map(|i| (0, i)).collect();
    Multigraph::from_pairs(n, &pairs)
}

/// d-regular multigraph from the pairing model. A half-edge paired with
/// another at the same vertex becomes two loops so degrees stay d.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Multigraph> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("random regular graph needs n, d >= 1"));
    }
    if (n * d) % 2 == 1 {
        return Err(Error::invalid(format!("n*d = {} is odd", n * d)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ends: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    ends.shuffle(&mut rng);
    let edges = ends.chunks(2).map(|p| {
        let m = if p[0] == p[1] { 2 } else { 1 };
        (p[0], p[1], m)
    });
    Multigraph::from_edges(n, edges)
}

/// Uniformly shuffled rotation map of degree d: the n·d edge-ends are paired
/// at random, with one fixed point (a loop labeled to itself) when n·d is odd.
pub fn random_rotation(n: usize, d: usize, seed: u64) -> Result<LabeledMultigraph> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("random rotation map needs n, d >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ends: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..d).map(move |i| (v, i))).collect();
    ends.shuffle(&mut rng);
    let mut table = vec![(0, 0); n * d];
    let mut it = ends.chunks(2);
    for pair in &mut it {
        match *pair {
            [a, b] => {
                table[a.0 * d + a.1] = b;
                table[b.0 * d + b.1] = a;
            }
            [a] => table[a.0 * d + a.1] = a,
            _ => unreachable!(),
        }
    }
    LabeledMultigraph::from_rotation_table(n, d, table)
}

/// Degree 2d: labels d..2d are fixed-point loops, so M = (I + M_G)/2.
pub fn make_lazy(g: &LabeledMultigraph) -> Result<LabeledMultigraph> {
    let (n, d) = (g.n(), g.degree());
    let mut table = Vec::with_capacity(n * 2 * d);
    for v in 0..n {
        for i in 0..d {
            let (w, j) = g.rot(v, i)?;
            table.push((w, j));
        }
        for i in d..2 * d {
            table.push((v, i));
        }
    }
    LabeledMultigraph::from_rotation_table(n, 2 * d, table)
}

/// Random spanning tree plus `extra` random edges (loops allowed), each with
/// multiplicity in 1..=max_mult.
pub fn random_connected(n: usize, extra: usize, max_mult: u64, seed: u64) -> Result<Multigraph> {
    if n == 0 || max_mult == 0 {
        return Err(Error::invalid("random connected graph needs n >= 1 and max_mult >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        edges.push((parent, order[i], rng.gen_range(1..=max_mult)));
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        edges.push((u, v, rng.gen_range(1..=max_mult)));
    }
    Multigraph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_degrees() {
        for seed in 0..5 {
            let g = random_regular(10, 3, seed).unwrap();
            assert_eq!(g.regular_degree(), Some(3));
        }
        assert!(random_regular(5, 3, 0).is_err());
    }

    #[test]
    fn rotations_are_involutions() {
        for (n, d) in [(5, 3), (4, 4), (1, 1)] {
            let g = random_rotation(n, d, 7).unwrap();
            assert!(g.is_involution());
            let lazy = make_lazy(&g).unwrap();
            assert!(lazy.is_half_lazy());
        }
    }

    #[test]
    fn connected_and_deterministic() {
        let a = random_connected(12, 5, 3, 42).unwrap();
        assert!(a.is_connected());
        assert_eq!(a, random_connected(12, 5, 3, 42).unwrap());
        assert_eq!(star(5).unwrap().max_degree(), 4);
        assert_eq!(complete(5).unwrap().regular_degree(), Some(4));
    }
}
