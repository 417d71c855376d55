//! Undirected multigraphs, two-way labelings and rotation maps.
//!
//! A self loop counts once toward the degree and occupies a single label
//! that the rotation map fixes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 1 << 20;
pub const MAX_MULTIPLICITY: u64 = 1 << 31;
/// Largest explicit rotation table (n·d entries).
pub const MAX_TABLE_ENTRIES: usize = 1 << 24;
/// Largest vertex count for which dense matrices are formed.
pub const MAX_DENSE_VERTICES: usize = 8192;

/// An undirected multigraph stored as a merged, sorted edge multiset.
/// Degrees need not be uniform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    /// (u, v, multiplicity) with u <= v, sorted, no repeated pairs.
    edges: Vec<(usize, usize, u64)>,
}

impl Multigraph {
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > MAX_VERTICES {
            return Err(Error::TooLarge {
                what: "vertex count",
                value: n as u128,
                limit: MAX_VERTICES as u128,
            });
        }
        let mut list = Vec::new();
        for (u, v, m) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if m == 0 {
                return Err(Error::invalid(format!("edge ({u}, {v}) has multiplicity 0")));
            }
            list.push((u.min(v), u.max(v), m));
        }
        list.sort_unstable();
        let mut edges: Vec<(usize, usize, u64)> = Vec::with_capacity(list.len());
        for (u, v, m) in list {
            match edges.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += m,
                _ => edges.push((u, v, m)),
            }
        }
        if let Some(&(_, _, m)) = edges.iter().find(|e| e.2 > MAX_MULTIPLICITY) {
            return Err(Error::TooLarge {
                what: "edge multiplicity",
                value: m as u128,
                limit: MAX_MULTIPLICITY as u128,
            });
        }
        Ok(Self { n, edges })
    }

    /// Convenience constructor for simple edge lists.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges(n, pairs.iter().map(|&(u, v)| (u, v, 1)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n];
        for &(u, v, m) in &self.edges {
            deg[u] += m;
            if u != v {
                deg[v] += m;
            }
        }
        deg
    }

    pub fn max_degree(&self) -> u64 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn regular_degree(&self) -> Option<u64> {
        let deg = self.degrees();
        let first = deg[0];
        deg.iter().all(|&d| d == first).then_some(first)
    }

    fn check_dense(&self) -> Result<()> {
        if self.n > MAX_DENSE_VERTICES {
            return Err(Error::TooLarge {
                what: "vertex count for a dense matrix",
                value: self.n as u128,
                limit: MAX_DENSE_VERTICES as u128,
            });
        }
        Ok(())
    }

    pub fn adjacency(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v, m) in &self.edges {
            a[(u, v)] += m as f64;
            if u != v {
                a[(v, u)] += m as f64;
            }
        }
        Ok(a)
    }

    /// Unnormalized Laplacian D − A. Self loops cancel.
    pub fn laplacian(&self) -> Result<DMatrix<f64>> {
        let mut l = -self.adjacency()?;
        for (v, d) in self.degrees().into_iter().enumerate() {
            l[(v, v)] += d as f64;
        }
        Ok(l)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(u, v, _) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut index = vec![usize::MAX; self.n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for v in 0..self.n {
            let r = find(&mut parent, v);
            if index[r] == usize::MAX {
                index[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[index[r]].push(v);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Subgraph on `vertices` (which must be sorted and distinct), relabeled
    /// to 0..len in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Multigraph> {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
            pos[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| pos[e.0] != usize::MAX && pos[e.1] != usize::MAX)
            .map(|&(u, v, m)| (pos[u], pos[v], m));
        Multigraph::from_edges(vertices.len(), edges)
    }

    /// Canonical two-way labeling of a regular multigraph: the edge-ends at
    /// each vertex are ordered by (neighbor, multiplicity index).
    pub fn label(&self) -> Result<LabeledMultigraph> {
        let deg = self.degrees();
        let (min, max) = (*deg.iter().min().unwrap(), *deg.iter().max().unwrap());
        if min != max {
            return Err(Error::NotRegular { min, max });
        }
        if max == 0 {
            return Err(Error::invalid("edgeless graph has degree 0; regularize it first"));
        }
        let d = max as usize;
        let entries = (self.n as u128) * (d as u128);
        if entries > MAX_TABLE_ENTRIES as u128 {
            return Err(Error::TooLarge {
                what: "rotation table size",
                value: entries,
                limit: MAX_TABLE_ENTRIES as u128,
            });
        }
        // Neighbor lists in increasing neighbor order; edges are sorted by
        // (u, v) so pushing from both endpoints needs a final sort.
        let mut nbrs: Vec<Vec<(usize, u64)>> = vec![Vec::new(); self.n];
        for &(u, v, m) in &self.edges {
            nbrs[u].push((v, m));
            if u != v {
                nbrs[v].push((u, m));
            }
        }
        let mut offsets: Vec<Vec<(usize, usize)>> = Vec::with_capacity(self.n);
        for list in nbrs.iter_mut() {
            list.sort_unstable();
            let mut off = 0usize;
            offsets.push(
                list.iter()
                    .map(|&(w, m)| {
                        let o = off;
                        off += m as usize;
                        (w, o)
                    })
                    .collect(),
            );
        }
        let offset_of = |u: usize, w: usize| -> usize {
            let row = &offsets[u];
            let k = row.binary_search_by_key(&w, |e| e.0).expect("neighbor present");
            row[k].1
        };
        let mut table = vec![(0u32, 0u32); self.n * d];
        for u in 0..self.n {
            for &(w, m) in &nbrs[u] {
                let ou = offset_of(u, w);
                let ow = offset_of(w, u);
                for idx in 0..m as usize {
                    table[u * d + ou + idx] = (w as u32, (ow + idx) as u32);
                }
            }
        }
        Ok(LabeledMultigraph {
            n: self.n,
            d,
            rot: Rotation::Table(table),
        })
    }
}

/// How a labeled graph evaluates its rotation map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rotation {
    /// Explicit table indexed by v·d + i.
    Table(Vec<(u32, u32)>),
    /// Cayley graph over F₂^t: Rot(v, i) = (v ⊕ s_i, i).
    Cayley(Vec<u32>),
    /// Complete graph with a self loop on every vertex: Rot(v, i) = (i, v).
    Complete,
}

/// A d-regular multigraph with a two-way labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMultigraph {
    n: usize,
    d: usize,
    rot: Rotation,
}

impl LabeledMultigraph {
    /// Build from an explicit rotation table; the table must be an involution.
    pub fn from_rotation_table(n: usize, d: usize, table: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if d == 0 {
            return Err(Error::invalid("degree must be at least 1"));
        }
        if table.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                found: table.len(),
            });
        }
        if n * d > MAX_TABLE_ENTRIES {
            return Err(Error::TooLarge {
                what: "rotation table size",
                value: (n * d) as u128,
                limit: MAX_TABLE_ENTRIES as u128,
            });
        }
        let mut packed = Vec::with_capacity(table.len());
        for &(w, j) in &table {
            if w >= n {
                return Err(Error::VertexOutOfRange { vertex: w, n });
            }
            if j >= d {
                return Err(Error::LabelOutOfRange {
                    label: j as u64,
                    degree: d as u64,
                });
            }
            packed.push((w as u32, j as u32));
        }
        let g = Self {
            n,
            d,
            rot: Rotation::Table(packed),
        };
        if let Some((v, i)) = g.involution_failure() {
            return Err(Error::invalid(format!(
                "rotation table is not an involution at ({v}, {i})"
            )));
        }
        Ok(g)
    }

    pub(crate) fn cayley(t: u32, generators: Vec<u32>) -> Self {
        let d = generators.len();
        Self {
            n: 1usize << t,
            d,
            rot: Rotation::Cayley(generators),
        }
    }

    /// Complete graph on d vertices with a self loop at every vertex.
    pub fn complete_with_loops(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("complete graph needs at least one vertex"));
        }
        Ok(Self {
            n: d,
            d,
            rot: Rotation::Complete,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rot
    }

    pub fn rot(&self, v: usize, i: usize) -> Result<(usize, usize)> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        if i >= self.d {
            return Err(Error::LabelOutOfRange {
                label: i as u64,
                degree: self.d as u64,
            });
        }
        Ok(self.rot_unchecked(v, i))
    }

    #[inline]
    pub(crate) fn rot_unchecked(&self, v: usize, i: usize) -> (usize, usize) {
        match &self.rot {
            Rotation::Table(t) => {
                let (w, j) = t[v * self.d + i];
                (w as usize, j as usize)
            }
            Rotation::Cayley(gens) => (v ^ gens[i] as usize, i),
            Rotation::Complete => (i, v),
        }
    }

    /// First (v, i) with Rot(Rot(v, i)) ≠ (v, i), if any.
    pub fn involution_failure(&self) -> Option<(usize, usize)> {
        for v in 0..self.n {
            for i in 0..self.d {
                let (w, j) = self.rot_unchecked(v, i);
                if self.rot_unchecked(w, j) != (v, i) {
                    return Some((v, i));
                }
            }
        }
        None
    }

    pub fn is_involution(&self) -> bool {
        self.involution_failure().is_none()
    }

    /// Materialize the rotation map as an explicit table.
    pub fn to_table(&self) -> Result<LabeledMultigraph> {
        if self.n * self.d > MAX_TABLE_ENTRIES {
            return Err(Error::TooLarge {
                what: "rotation table size",
                value: (self.n * self.d) as u128,
                limit: MAX_TABLE_ENTRIES as u128,
            });
        }
        let mut table = Vec::with_capacity(self.n * self.d);
        for v in 0..self.n {
            for i in 0..self.d {
                let (w, j) = self.rot_unchecked(v, i);
                table.push((w as u32, j as u32));
            }
        }
        Ok(Self {
            n: self.n,
            d: self.d,
            rot: Rotation::Table(table),
        })
    }

    /// Integer adjacency counts: entry (v, w) is the number of labels at v
    /// leading to w.
    pub fn adjacency_counts(&self) -> Result<DMatrix<u64>> {
        if self.n > MAX_DENSE_VERTICES {
            return Err(Error::TooLarge {
                what: "vertex count for a dense matrix",
                value: self.n as u128,
                limit: MAX_DENSE_VERTICES as u128,
            });
        }
        let mut a = DMatrix::<u64>::zeros(self.n, self.n);
        for v in 0..self.n {
            for i in 0..self.d {
                let (w, _) = self.rot_unchecked(v, i);
                a[(v, w)] += 1;
            }
        }
        Ok(a)
    }

    pub fn transition_matrix(&self) -> Result<TransitionMatrix> {
        let counts = self.adjacency_counts()?;
        let d = self.d as f64;
        Ok(TransitionMatrix(counts.map(|c| c as f64 / d)))
    }

    /// Unnormalized Laplacian dI − A.
    pub fn laplacian(&self) -> Result<DMatrix<f64>> {
        let counts = self.adjacency_counts()?;
        let mut l = counts.map(|c| -(c as f64));
        for v in 0..self.n {
            l[(v, v)] += self.d as f64;
        }
        Ok(l)
    }

    /// The underlying edge multiset. Each edge is seen from both ends, so it
    /// is counted once from the lexicographically smaller end. A loop whose
    /// two ends carry different labels becomes one loop of multiplicity 1, so
    /// degrees are only preserved when every loop label is fixed by Rot.
    pub fn to_multigraph(&self) -> Result<Multigraph> {
        let mut edges = Vec::new();
        for v in 0..self.n {
            for i in 0..self.d {
                let (w, j) = self.rot_unchecked(v, i);
                if (v, i) <= (w, j) {
                    edges.push((v, w, 1));
                }
            }
        }
        Multigraph::from_edges(self.n, edges)
    }

    pub fn components(&self) -> Result<Vec<Vec<usize>>> {
        Ok(self.to_multigraph()?.components())
    }

    /// Smallest diagonal entry of the transition matrix, as a ratio
    /// (self-loop labels, degree) at the worst vertex.
    pub fn min_self_loops(&self) -> (usize, u64) {
        let mut worst = (0usize, u64::MAX);
        for v in 0..self.n {
            let loops = (0..self.d)
                .filter(|&i| self.rot_unchecked(v, i).0 == v)
                .count() as u64;
            if loops < worst.1 {
                worst = (v, loops);
            }
        }
        worst
    }

    /// Every vertex has transition probability at least 1/2 to itself.
    pub fn is_half_lazy(&self) -> bool {
        2 * self.min_self_loops().1 >= self.d as u64
    }
}

/// Row-stochastic, symmetric transition matrix A/d of a regular graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(pub DMatrix<f64>);

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// I − M.
    pub fn normalized_laplacian(&self) -> DMatrix<f64> {
        DMatrix::identity(self.n(), self.n()) - &self.0
    }
}

/// A graph padded with self loops to degree f = 2^⌈log₂ 2Δ⌉.
#[derive(Debug, Clone)]
pub struct RegularizedGraph {
    pub graph: LabeledMultigraph,
    pub f: u64,
    pub loops: Vec<u64>,
    pub original_degrees: Vec<u64>,
    pub original: Multigraph,
}

/// Pad every vertex with f − d(v) self loops.
pub fn regularize(g: &Multigraph) -> Result<RegularizedGraph> {
    let degrees = g.degrees();
    let delta = degrees.iter().copied().max().unwrap_or(0);
    let f = if delta == 0 {
        2
    } else {
        (2 * delta)
            .checked_next_power_of_two()
            .ok_or(Error::TooLarge {
                what: "maximum degree",
                value: delta as u128,
                limit: (u64::MAX / 4) as u128,
            })?
    };
    let loops: Vec<u64> = degrees.iter().map(|&d| f - d).collect();
    let padded = Multigraph::from_edges(
        g.n(),
        g.edges()
            .iter()
            .copied()
            .chain(loops.iter().enumerate().filter(|(_, &l)| l > 0).map(|(v, &l)| (v, v, l))),
    )?;
    Ok(RegularizedGraph {
        graph: padded.label()?,
        f,
        loops,
        original_degrees: degrees,
        original: g.clone(),
    })
}

impl RegularizedGraph {
    /// D − A of the original graph, which equals fI − A' of the padded one.
    pub fn laplacian(&self) -> Result<DMatrix<f64>> {
        self.original.laplacian()
    }

    /// I − M of the padded graph, i.e. (D − A)/f.
    pub fn normalized_laplacian(&self) -> Result<DMatrix<f64>> {
        Ok(self.graph.transition_matrix()?.normalized_laplacian())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Multigraph {
        Multigraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle_labeling() {
        let g = triangle().label().unwrap();
        assert_eq!(g.degree(), 2);
        let (w, j) = g.rot(0, 0).unwrap();
        assert_eq!(w, 1);
        assert_eq!(g.rot(w, j).unwrap(), (0, 0));
        assert!(g.is_involution());
        let m = g.transition_matrix().unwrap();
        for i in 0..3 {
            assert_eq!(m.0[(i, i)], 0.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(m.0[(i, j)], 0.5);
                }
            }
        }
    }

    #[test]
    fn parallel_edges() {
        let g = Multigraph::from_edges(2, [(0, 1, 2)]).unwrap().label().unwrap();
        assert_eq!(g.degree(), 2);
        assert_eq!(g.rot(0, 1).unwrap(), (1, 1));
        assert!(g.is_involution());
    }

    #[test]
    fn out_of_range_and_empty() {
        assert!(matches!(
            Multigraph::from_pairs(3, &[(0, 5)]),
            Err(Error::VertexOutOfRange { vertex: 5, n: 3 })
        ));
        assert!(matches!(Multigraph::from_pairs(0, &[]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn self_loop_fixed_by_rotation() {
        let g = Multigraph::from_edges(2, [(0, 1, 1), (0, 0, 1), (1, 1, 1)])
            .unwrap()
            .label()
            .unwrap();
        assert_eq!(g.rot(0, 0).unwrap(), (0, 0));
        assert_eq!(g.rot(1, 1).unwrap(), (1, 1));
    }

    #[test]
    fn regularize_degrees() {
        let star = Multigraph::from_pairs(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let r = regularize(&star).unwrap();
        assert_eq!(r.f, 8);
        assert_eq!(r.loops, vec![5, 7, 7, 7]);
        assert!(r.graph.is_half_lazy());

        let c4 = Multigraph::from_edges(4, (0..4).map(|i| (i, (i + 1) % 4, 2))).unwrap();
        let r = regularize(&c4).unwrap();
        assert_eq!(r.f, 8);
        assert!(r.loops.iter().all(|&l| l == 4));

        let single = Multigraph::from_pairs(1, &[]).unwrap();
        let r = regularize(&single).unwrap();
        assert_eq!(r.f, 2);
        assert_eq!(r.loops, vec![2]);
    }

    #[test]
    fn regularize_preserves_laplacian() {
        let g = Multigraph::from_edges(4, [(0, 1, 3), (1, 2, 1), (2, 3, 2), (0, 0, 1)]).unwrap();
        let r = regularize(&g).unwrap();
        let padded = r.graph.laplacian().unwrap();
        assert_eq!(padded, g.laplacian().unwrap());
    }

    #[test]
    fn components_of_two_edges() {
        let g = Multigraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn complete_with_loops_is_uniform() {
        let k = LabeledMultigraph::complete_with_loops(4).unwrap();
        let m = k.transition_matrix().unwrap();
        assert!(m.0.iter().all(|&x| x == 0.25));
        assert!(k.is_involution());
    }

    #[test]
    fn non_regular_label_rejected() {
        let g = Multigraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(g.label(), Err(Error::NotRegular { min: 1, max: 2 })));
    }

    #[test]
    fn round_trip_through_edge_multiset() {
        let g = Multigraph::from_edges(3, [(0, 1, 2), (1, 2, 2), (0, 2, 2), (0, 0, 1), (1, 1, 1), (2, 2, 1)])
            .unwrap();
        let l = g.label().unwrap();
        assert_eq!(l.to_multigraph().unwrap(), g);
    }
}
