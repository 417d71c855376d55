//! Derandomized squaring and lazily evaluated chains G_i = G_{i−1} ⓢ H_i.
//!
//! A label of G_i is a digit vector (i₀, j₁, …, j_i): the base label of G₀
//! followed by one expander label per level. Flattening uses mixed radix with
//! the base label least significant, so for power-of-two degrees the label of
//! G_{i−1} is the bit string on which the Cayley expander H_i acts.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expander::{build_expander, fwht_f64, min_degree_for_bias, ExpanderSpec, MAX_BITS};
use crate::metrics::{Metrics, MetricsSnapshot};
use crate::multigraph::{LabeledMultigraph, TransitionMatrix, MAX_TABLE_ENTRIES};
use crate::oracle;

/// Default cap on the lifted dimension n·deg(G_{ℓ−1}) for dense levels.
pub const DEFAULT_DENSE_CAP: usize = 1 << 13;

/// Rotation map of G ⓢ H on explicit tables. Label (i₀, j₀) is stored as
/// i₀ + d·j₀.
pub fn dsquare(g: &LabeledMultigraph, h: &LabeledMultigraph) -> Result<LabeledMultigraph> {
    let (n, d, c) = (g.n(), g.degree(), h.degree());
    if h.n() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.n(),
        });
    }
    let entries = n as u128 * d as u128 * c as u128;
    if entries > MAX_TABLE_ENTRIES as u128 {
        return Err(Error::TooLarge {
            what: "rotation table size",
            value: entries,
            limit: MAX_TABLE_ENTRIES as u128,
        });
    }
    let mut table = Vec::with_capacity(n * d * c);
    for v0 in 0..n {
        for j0 in 0..c {
            for i0 in 0..d {
                let (v1, i1) = g.rot_unchecked(v0, i0);
                let (i2, j1) = h.rot_unchecked(i1, j0);
                let (v2, i3) = g.rot_unchecked(v1, i2);
                table.push((v2, i3 + d * j1));
            }
        }
    }
    LabeledMultigraph::from_rotation_table(n, d * c, table)
}

/// The expander placed on the labels of the previous level.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelExpander {
    /// Complete graph with loops: the level is the exact square.
    Complete,
    Cayley(ExpanderSpec),
    Graph(LabeledMultigraph),
}

impl LevelExpander {
    pub fn kind(&self) -> &'static str {
        match self {
            LevelExpander::Complete => "complete",
            LevelExpander::Cayley(_) => "cayley",
            LevelExpander::Graph(_) => "graph",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub expander: LevelExpander,
    /// λ(H_i); exact for complete and Cayley expanders.
    pub lambda_h: f64,
    /// Degree of H_i, when it fits in 64 bits.
    pub c: Option<u64>,
    /// Degree of G_i, when it fits in 64 bits.
    pub degree: Option<u64>,
    pub degree_log2: f64,
}

/// Digits (i₀, j₁, …, j_ℓ) of a level-ℓ label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainLabel(Vec<u64>);

impl ChainLabel {
    pub fn new(digits: Vec<u64>) -> Self {
        ChainLabel(digits)
    }

    pub fn base(i0: u64) -> Self {
        ChainLabel(vec![i0])
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len() - 1
    }

    /// (label of the previous level, expander label).
    pub fn split(&self) -> Option<(ChainLabel, u64)> {
        let (last, rest) = self.0.split_last()?;
        (!rest.is_empty()).then(|| (ChainLabel(rest.to_vec()), *last))
    }

    pub fn join(mut self, j: u64) -> ChainLabel {
        self.0.push(j);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DegreePolicy {
    /// One expander degree c for every level, found by search when `None`.
    Shared(Option<usize>),
    /// Each level uses the degree its own expander construction produced.
    PerLevel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub mu: f64,
    pub k: usize,
    pub degrees: DegreePolicy,
}

/// k = ⌈6·log₂(d²n²)⌉.
pub fn default_levels(d: u64, n: usize) -> usize {
    let x = (d as f64).powi(2) * (n as f64).powi(2);
    (6.0 * x.log2()).ceil().max(0.0) as usize
}

impl ChainConfig {
    /// k = ⌈6·log₂(d²n²)⌉, μ = 1/(30k), shared expander degree.
    pub fn defaults(d: u64, n: usize) -> Self {
        let k = default_levels(d, n);
        ChainConfig {
            mu: 1.0 / (30.0 * k.max(1) as f64),
            k,
            degrees: DegreePolicy::Shared(None),
        }
    }
}

#[derive(Debug)]
pub struct DerandChain {
    base: LabeledMultigraph,
    levels: Vec<Level>,
    /// radices[0] = d, radices[i] = degree of H_i (0 when it overflows).
    radices: Vec<u64>,
    metrics: Metrics,
    dense_cap: usize,
}

impl Clone for DerandChain {
    fn clone(&self) -> Self {
        DerandChain {
            base: self.base.clone(),
            levels: self.levels.clone(),
            radices: self.radices.clone(),
            metrics: Metrics::new(),
            dense_cap: self.dense_cap,
        }
    }
}

impl DerandChain {
    pub fn new(base: LabeledMultigraph, expanders: Vec<LevelExpander>) -> Result<Self> {
        let d = base.degree() as u64;
        let mut prev_deg = Some(d);
        let mut prev_log2 = (d as f64).log2();
        let mut levels = Vec::with_capacity(expanders.len());
        let mut radices = vec![d];
        for (idx, expander) in expanders.into_iter().enumerate() {
            let (c, lambda_h) = match &expander {
                LevelExpander::Complete => (prev_deg, 0.0),
                LevelExpander::Cayley(spec) => {
                    if prev_deg != Some(1u64 << spec.t()) {
                        return Err(Error::invalid(format!(
                            "level {} expander has 2^{} vertices but the previous level has degree {}",
                            idx + 1,
                            spec.t(),
                            fmt_degree(prev_deg, prev_log2)
                        )));
                    }
                    (Some(spec.c() as u64), spec.verified_bias())
                }
                LevelExpander::Graph(h) => {
                    if prev_deg != Some(h.n() as u64) {
                        return Err(Error::invalid(format!(
                            "level {} expander has {} vertices but the previous level has degree {}",
                            idx + 1,
                            h.n(),
                            fmt_degree(prev_deg, prev_log2)
                        )));
                    }
                    (Some(h.degree() as u64), oracle::lambda(h)?)
                }
            };
            let c_log2 = match &expander {
                LevelExpander::Complete => prev_log2,
                _ => (c.unwrap() as f64).log2(),
            };
            let degree = match (prev_deg, c) {
                (Some(a), Some(b)) => a.checked_mul(b),
                _ => None,
            };
            radices.push(c.unwrap_or(0));
            prev_log2 += c_log2;
            prev_deg = degree;
            levels.push(Level {
                expander,
                lambda_h,
                c,
                degree,
                degree_log2: prev_log2,
            });
        }
        Ok(DerandChain {
            base,
            levels,
            radices,
            metrics: Metrics::new(),
            dense_cap: DEFAULT_DENSE_CAP,
        })
    }

    /// Every H_i is the complete graph with loops, so M_i = M_{i−1}².
    pub fn exact_squaring(base: LabeledMultigraph, k: usize) -> Result<Self> {
        Self::new(base, vec![LevelExpander::Complete; k])
    }

    pub fn with_dense_cap(mut self, cap: usize) -> Self {
        self.dense_cap = cap;
        self
    }

    pub fn base(&self) -> &LabeledMultigraph {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn dense_cap(&self) -> usize {
        self.dense_cap
    }

    /// Degree of G_ℓ, if it fits in 64 bits.
    pub fn degree(&self, level: usize) -> Option<u64> {
        if level == 0 {
            Some(self.base.degree() as u64)
        } else {
            self.levels.get(level - 1).and_then(|l| l.degree)
        }
    }

    pub fn degree_log2(&self, level: usize) -> f64 {
        if level == 0 {
            (self.base.degree() as f64).log2()
        } else {
            self.levels[level - 1].degree_log2
        }
    }

    /// ln(1/(1 − λ(H_i))) for i = 1..=k.
    pub fn level_epsilons(&self) -> Vec<f64> {
        self.levels.iter().map(|l| (1.0 / (1.0 - l.lambda_h)).ln()).collect()
    }

    /// Upper bounds on λ(G_i) from λ(G₀) via
    /// λ(G ⓢ H) ≤ 1 − (1 − λ(G)²)(1 − λ(H)).
    pub fn lambda_bounds(&self, lambda0: f64) -> Vec<f64> {
        let mut out = vec![lambda0];
        let mut l = lambda0;
        for level in &self.levels {
            l = (1.0 - (1.0 - l * l) * (1.0 - level.lambda_h)).clamp(0.0, 1.0);
            out.push(l);
        }
        out
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.k() {
            return Err(Error::invalid(format!(
                "level {level} exceeds chain length {}",
                self.k()
            )));
        }
        Ok(())
    }

    fn check_label(&self, level: usize, label: &ChainLabel) -> Result<()> {
        self.check_level(level)?;
        if label.0.len() != level + 1 {
            return Err(Error::invalid(format!(
                "a level-{level} label has {} digits, got {}",
                level + 1,
                label.0.len()
            )));
        }
        if self.degree(level).is_none() {
            return Err(Error::TooLarge {
                what: "level degree (log2)",
                value: self.degree_log2(level).ceil() as u128,
                limit: 63,
            });
        }
        for (i, &digit) in label.0.iter().enumerate() {
            if digit >= self.radices[i] {
                return Err(Error::LabelOutOfRange {
                    label: digit,
                    degree: self.radices[i],
                });
            }
        }
        Ok(())
    }

    fn flatten(&self, digits: &[u64]) -> u64 {
        let mut q = 0u64;
        for i in (0..digits.len()).rev() {
            q = q * self.radices[i] + digits[i];
        }
        q
    }

    fn unflatten_into(&self, mut q: u64, digits: &mut [u64]) {
        for (i, digit) in digits.iter_mut().enumerate() {
            let r = self.radices[i];
            *digit = q % r;
            q /= r;
        }
    }

    pub fn flatten_label(&self, label: &ChainLabel) -> Result<u64> {
        self.check_label(label.level(), label)?;
        Ok(self.flatten(&label.0))
    }

    pub fn unflatten_label(&self, level: usize, q: u64) -> Result<ChainLabel> {
        self.check_level(level)?;
        let deg = self.degree(level).ok_or(Error::TooLarge {
            what: "level degree (log2)",
            value: self.degree_log2(level).ceil() as u128,
            limit: 63,
        })?;
        if q >= deg {
            return Err(Error::LabelOutOfRange { label: q, degree: deg });
        }
        let mut digits = vec![0u64; level + 1];
        self.unflatten_into(q, &mut digits);
        Ok(ChainLabel(digits))
    }

    /// Rot_{G_ℓ}(v, label), evaluated by unfolding the definition of ⓢ down
    /// to the base graph: two level-(ℓ−1) calls and one H_ℓ call per level.
    pub fn rot_chain(&self, level: usize, v: usize, label: &ChainLabel) -> Result<(usize, ChainLabel)> {
        self.check_label(level, label)?;
        if v >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n() });
        }
        let mut digits = label.0.clone();
        let w = self.rot_rec(level, v, &mut digits, level);
        Ok((w, ChainLabel(digits)))
    }

    fn rot_rec(&self, i: usize, v: usize, digits: &mut [u64], top: usize) -> usize {
        let depth = (top - i) as u64;
        // live words: the current vertex and base digit, plus the expander
        // digit saved by each enclosing frame
        self.metrics.observe_depth(depth, depth + 2);
        if i == 0 {
            self.metrics.base_eval();
            let (w, j) = self.base.rot_unchecked(v, digits[0] as usize);
            digits[0] = j as u64;
            return w;
        }
        let j0 = digits[i];
        let prefix = &mut digits[..i];
        let v1 = self.rot_rec(i - 1, v, prefix, top);
        let i1 = self.flatten(prefix);
        self.metrics.expander_eval();
        let (i2, j1) = match &self.levels[i - 1].expander {
            LevelExpander::Complete => (j0, i1),
            LevelExpander::Cayley(spec) => (i1 ^ spec.generators()[j0 as usize] as u64, j0),
            LevelExpander::Graph(h) => {
                let (a, b) = h.rot_unchecked(i1 as usize, j0 as usize);
                (a as u64, b as u64)
            }
        };
        self.unflatten_into(i2, prefix);
        let v2 = self.rot_rec(i - 1, v1, prefix, top);
        digits[i] = j1;
        v2
    }

    /// Number of level-ℓ labels at `i` leading to each vertex.
    pub fn row_counts(&self, level: usize, i: usize) -> Result<Vec<u64>> {
        self.check_level(level)?;
        if i >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: i, n: self.n() });
        }
        let deg = self.degree(level).ok_or(Error::TooLarge {
            what: "level degree (log2)",
            value: self.degree_log2(level).ceil() as u128,
            limit: 63,
        })?;
        let mut counts = vec![0u64; self.n()];
        let mut digits = vec![0u64; level + 1];
        for q in 0..deg {
            self.unflatten_into(q, &mut digits);
            let w = self.rot_rec(level, i, &mut digits, level);
            counts[w] += 1;
        }
        Ok(counts)
    }

    /// Entry (i, j) of M_ℓ. Levels built with a Cayley or explicit expander
    /// count labels; a complete-expander level is the exact square of the
    /// level below, so its entry is Σ_m M_{ℓ−1}(i, m) M_{ℓ−1}(m, j).
    pub fn entry(&self, level: usize, i: usize, j: usize) -> Result<f64> {
        self.check_level(level)?;
        for x in [i, j] {
            if x >= self.n() {
                return Err(Error::VertexOutOfRange { vertex: x, n: self.n() });
            }
        }
        self.metrics.entry_eval();
        if level > 0 && matches!(self.levels[level - 1].expander, LevelExpander::Complete) {
            let mut s = 0.0;
            for m in 0..self.n() {
                let a = self.entry(level - 1, i, m)?;
                if a != 0.0 {
                    s += a * self.entry(level - 1, m, j)?;
                }
            }
            return Ok(s);
        }
        let deg = self.degree(level).ok_or(Error::TooLarge {
            what: "level degree (log2)",
            value: self.degree_log2(level).ceil() as u128,
            limit: 63,
        })?;
        let mut digits = vec![0u64; level + 1];
        let mut hits = 0u64;
        for q in 0..deg {
            self.unflatten_into(q, &mut digits);
            if self.rot_rec(level, i, &mut digits, level) == j {
                hits += 1;
            }
        }
        Ok(hits as f64 / deg as f64)
    }

    /// Explicit rotation table of G_ℓ, built by repeated [`dsquare`].
    pub fn materialize(&self, level: usize) -> Result<LabeledMultigraph> {
        self.check_level(level)?;
        let mut g = self.base.to_table()?;
        for l in &self.levels[..level] {
            let h = match &l.expander {
                LevelExpander::Complete => LabeledMultigraph::complete_with_loops(g.degree())?,
                LevelExpander::Cayley(spec) => spec.to_graph(),
                LevelExpander::Graph(h) => h.clone(),
            };
            g = dsquare(&g, &h)?;
        }
        Ok(g)
    }

    /// Dense M_ℓ. A complete-expander level is the square of the level
    /// below. Otherwise M_ℓ = P·Ã·(I ⊗ M_H)·Ã·Q on the lifted space of
    /// (vertex, label) pairs of G_{ℓ−1}, where Q spreads a vertex uniformly
    /// over its labels, Ã permutes by Rot_{G_{ℓ−1}} and P sums labels. For a
    /// Cayley H, M_H is diagonal in the Walsh–Hadamard basis.
    pub fn dense_level_matrix(&self, level: usize) -> Result<TransitionMatrix> {
        self.check_level(level)?;
        if level == 0 {
            return self.base.transition_matrix();
        }
        let expander = &self.levels[level - 1].expander;
        if matches!(expander, LevelExpander::Complete) {
            let m = self.dense_level_matrix(level - 1)?.into_inner();
            return Ok(TransitionMatrix(square_stochastic(&m)));
        }
        let n = self.n();
        let dim = n as u128 * self.degree(level - 1).map_or(u128::MAX, |d| d as u128);
        if dim > self.dense_cap as u128 {
            return Err(Error::DenseCapExceeded {
                dim,
                cap: self.dense_cap,
            });
        }
        let prev = self.materialize(level - 1)?;
        let dp = prev.degree();
        let size = n * dp;
        let mut m = DMatrix::zeros(n, n);
        let mut y = vec![0f64; size];
        let mut z = vec![0f64; size];
        let spectrum: Option<Vec<f64>> = match expander {
            LevelExpander::Cayley(spec) => {
                let sums = crate::expander::character_sums(spec.t(), spec.generators());
                let scale = 1.0 / (spec.c() as f64 * dp as f64);
                Some(sums.iter().map(|&s| s as f64 * scale).collect())
            }
            _ => None,
        };
        for v0 in 0..n {
            y.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..dp {
                let (v1, i1) = prev.rot_unchecked(v0, i);
                y[v1 * dp + i1] += 1.0 / dp as f64;
            }
            match expander {
                LevelExpander::Cayley(_) => {
                    let spec = spectrum.as_ref().unwrap();
                    z.copy_from_slice(&y);
                    for block in z.chunks_mut(dp) {
                        if block.iter().all(|&x| x == 0.0) {
                            continue;
                        }
                        fwht_f64(block);
                        for (x, s) in block.iter_mut().zip(spec) {
                            *x *= s;
                        }
                        fwht_f64(block);
                    }
                }
                LevelExpander::Graph(h) => {
                    let c = h.degree() as f64;
                    for v in 0..n {
                        for x in 0..dp {
                            let mut acc = 0.0;
                            for j in 0..h.degree() {
                                acc += y[v * dp + h.rot_unchecked(x, j).0];
                            }
                            z[v * dp + x] = acc / c;
                        }
                    }
                }
                LevelExpander::Complete => unreachable!(),
            }
            for v1 in 0..n {
                for i2 in 0..dp {
                    let mass = z[v1 * dp + i2];
                    if mass != 0.0 {
                        let (v2, _) = prev.rot_unchecked(v1, i2);
                        m[(v0, v2)] += mass;
                    }
                }
            }
        }
        crate::linalg::symmetrize(&mut m);
        Ok(TransitionMatrix(m))
    }

    /// M₀..M_k, squaring directly at complete-expander levels.
    pub fn dense_levels(&self) -> Result<Vec<DMatrix<f64>>> {
        let mut out = vec![self.base.transition_matrix()?.into_inner()];
        for level in 1..=self.k() {
            let m = if matches!(self.levels[level - 1].expander, LevelExpander::Complete) {
                square_stochastic(out.last().unwrap())
            } else {
                self.dense_level_matrix(level)?.into_inner()
            };
            out.push(m);
        }
        Ok(out)
    }

    /// Per-level degrees, expander data and certificates, plus λ(G_ℓ)
    /// measured densely where the level matrix can be formed.
    pub fn stats(&self, measure: bool) -> Result<ChainStats> {
        let lambda0 = if measure && self.n() <= oracle::MAX_ORACLE_N {
            Some(oracle::lambda(&self.base)?)
        } else {
            None
        };
        let bounds = lambda0.map(|l| self.lambda_bounds(l));
        let mut levels = Vec::with_capacity(self.k() + 1);
        for level in 0..=self.k() {
            let measured = if measure && self.n() <= oracle::MAX_ORACLE_N {
                match self.dense_level_matrix(level) {
                    Ok(m) => Some(oracle::lambda_of_transition(m.matrix())?),
                    Err(Error::DenseCapExceeded { .. }) | Err(Error::TooLarge { .. }) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            let (kind, c, t, lambda_h) = if level == 0 {
                ("base", None, None, None)
            } else {
                let l = &self.levels[level - 1];
                let t = match &l.expander {
                    LevelExpander::Cayley(s) => Some(s.t()),
                    _ => None,
                };
                (l.expander.kind(), l.c, t, Some(l.lambda_h))
            };
            levels.push(LevelStats {
                level,
                degree: self.degree(level),
                degree_log2: self.degree_log2(level),
                expander: kind.to_string(),
                c,
                t,
                lambda_h,
                eps: lambda_h.map(|l| (1.0 / (1.0 - l)).ln()),
                lambda_measured: measured,
                lambda_bound: bounds.as_ref().map(|b| b[level]),
            });
        }
        Ok(ChainStats {
            n: self.n(),
            k: self.k(),
            levels,
            metrics: self.metrics.snapshot(),
        })
    }
}

fn fmt_degree(deg: Option<u64>, log2: f64) -> String {
    match deg {
        Some(d) => d.to_string(),
        None => format!("2^{log2:.1}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub degree: Option<u64>,
    pub degree_log2: f64,
    pub expander: String,
    pub c: Option<u64>,
    pub t: Option<u32>,
    pub lambda_h: Option<f64>,
    /// ln(1/(1 − λ(H))), the approximation parameter of this level.
    pub eps: Option<f64>,
    pub lambda_measured: Option<f64>,
    pub lambda_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub n: usize,
    pub k: usize,
    pub levels: Vec<LevelStats>,
    pub metrics: MetricsSnapshot,
}

/// Build H_1..H_k as Cayley expanders with bias at most μ.
///
/// H_i lives on the labels of G_{i−1}, so its bit-width is log₂ of that
/// degree. With a shared degree c the widths are t₀ + (i−1)·log₂c; the
/// search raises c until every constructed expander fits, and fails early
/// when the trace lower bound on degree shows no c can work within the
/// bit-width cap.
pub fn build_chain(base: LabeledMultigraph, cfg: &ChainConfig) -> Result<DerandChain> {
    let d = base.degree();
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::invalid(format!(
            "base degree {d} must be a power of two, at least 2"
        )));
    }
    if !base.is_half_lazy() {
        let (vertex, loops) = base.min_self_loops();
        return Err(Error::NotLazy {
            vertex,
            loops,
            degree: d as u64,
        });
    }
    if !(cfg.mu > 0.0 && cfg.mu < 1.0) {
        return Err(Error::invalid(format!("mu={} outside (0, 1)", cfg.mu)));
    }
    let t0 = d.trailing_zeros();
    let mu = cfg.mu;
    let mut cache: std::collections::BTreeMap<u32, ExpanderSpec> = Default::default();
    let mut get = |t: u32| -> Result<ExpanderSpec> {
        if let Some(s) = cache.get(&t) {
            return Ok(s.clone());
        }
        let s = build_expander(t, mu)?;
        cache.insert(t, s.clone());
        Ok(s)
    };
    let too_wide = |t: u32, c: u64| Error::ExpanderInfeasible { t, mu, cap: c };
    let specs: Vec<ExpanderSpec> = match cfg.degrees {
        DegreePolicy::PerLevel => {
            let mut specs = Vec::with_capacity(cfg.k);
            let mut t = t0;
            for _ in 0..cfg.k {
                if t > MAX_BITS {
                    return Err(too_wide(t, 0));
                }
                let s = get(t)?;
                t += s.c().trailing_zeros();
                specs.push(s);
            }
            specs
        }
        DegreePolicy::Shared(fixed) => {
            if let Some(c) = fixed {
                if !c.is_power_of_two() {
                    return Err(Error::invalid(format!("expander degree {c} is not a power of two")));
                }
            }
            let widths = |c: u64| -> Vec<u32> {
                (0..cfg.k as u32).map(|i| t0 + i * c.trailing_zeros()).collect()
            };
            let mut c: u64 = fixed.map_or(1, |c| c as u64);
            loop {
                let ts = widths(c);
                if let Some(&t) = ts.iter().find(|&&t| t > MAX_BITS) {
                    return Err(too_wide(t, c));
                }
                // the trace bound is necessary for every level, so a
                // violation only means c must grow
                let need = ts
                    .iter()
                    .map(|&t| min_degree_for_bias(t, mu).next_power_of_two())
                    .max()
                    .unwrap_or(1);
                if need > c {
                    if fixed.is_some() {
                        let t = *ts.iter().max().unwrap();
                        return Err(too_wide(t, c));
                    }
                    c = need;
                    continue;
                }
                let specs: Vec<ExpanderSpec> = ts.iter().map(|&t| get(t)).collect::<Result<_>>()?;
                let widest = specs.iter().map(|s| s.c() as u64).max().unwrap_or(1);
                if widest <= c {
                    break specs
                        .iter()
                        .map(|s| s.padded_to(c as usize))
                        .collect::<Result<_>>()?;
                }
                if fixed.is_some() {
                    let t = specs.iter().find(|s| s.c() as u64 > c).unwrap().t();
                    return Err(too_wide(t, c));
                }
                c = widest.next_power_of_two();
            }
        }
    };
    DerandChain::new(base, specs.into_iter().map(LevelExpander::Cayley).collect())
}

/// M² for a symmetric doubly stochastic M, computed as J + (M − J)² so that
/// rounding cannot push the top eigenvalue above 1 over many squarings.
fn square_stochastic(m: &DMatrix<f64>) -> DMatrix<f64> {
    let j = crate::linalg::averaging(m.nrows());
    let dev = m - &j;
    let mut sq = &dev * &dev;
    crate::linalg::project_both_sides(&mut sq);
    sq += j;
    crate::linalg::symmetrize(&mut sq);
    sq
}
