//! Cayley expanders over F₂^t generated by small-bias multisets.
//!
//! The Cayley graph with generator multiset S has eigenvalues S_α/|S| where
//! S_α = Σ_{s∈S} (−1)^{⟨α,s⟩}, so λ(H) is exactly the bias of S and can be
//! checked exhaustively with one Walsh–Hadamard transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::LabeledMultigraph;

pub const MAX_BITS: u32 = 16;
/// Degree cap is `DEGREE_CAP_CONSTANT · (t/μ)²`.
pub const DEGREE_CAP_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpanderSpec {
    t: u32,
    mu: f64,
    generators: Vec<u32>,
    verified_bias: f64,
}

/// In-place Walsh–Hadamard transform (unnormalized).
pub fn fwht_i64(a: &mut [i64]) {
    let n = a.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

pub fn fwht_f64(a: &mut [f64]) {
    let n = a.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Character sums S_α for every α ∈ F₂^t.
pub fn character_sums(t: u32, generators: &[u32]) -> Vec<i64> {
    let mut counts = vec![0i64; 1usize << t];
    for &s in generators {
        counts[s as usize] += 1;
    }
    fwht_i64(&mut counts);
    counts
}

/// max_{α≠0} |S_α| / |S|, checked over all 2^t − 1 nonzero characters.
pub fn bias(t: u32, generators: &[u32]) -> f64 {
    if generators.is_empty() {
        return 1.0;
    }
    let sums = character_sums(t, generators);
    let worst = sums.iter().skip(1).map(|s| s.unsigned_abs()).max().unwrap_or(0);
    worst as f64 / generators.len() as f64
}

pub fn degree_cap(t: u32, mu: f64) -> u64 {
    (DEGREE_CAP_CONSTANT * (t as f64 / mu).powi(2)).ceil() as u64
}

/// Smallest degree any multiset on F₂^t with bias ≤ μ can have:
/// Σ_α S_α² = 2^t·Σ_x m_x² ≥ 2^t·c gives c ≥ N/(1 + (N − 1)μ²), N = 2^t.
pub fn min_degree_for_bias(t: u32, mu: f64) -> u64 {
    let n = (1u64 << t) as f64;
    let c = n / (1.0 + (n - 1.0) * mu * mu);
    // guard against rounding just above an integer
    (c - 1e-9).ceil().max(1.0) as u64
}

fn check_bits(t: u32) -> Result<()> {
    if !(1..=MAX_BITS).contains(&t) {
        return Err(Error::invalid(format!(
            "expander bit-width t={t} outside 1..={MAX_BITS}"
        )));
    }
    Ok(())
}

/// Greedy construction by conditional expectations.
///
/// The potential Σ_{α≠0} cosh(η S_α) bounds the largest |S_α|. Adding s
/// moves every S_α by (−1)^{⟨α,s⟩}, so the potential after adding s is a
/// constant plus sinh(η)·Σ_α 2 sinh(η S_α)(−1)^{⟨α,s⟩}: one Walsh–Hadamard
/// transform scores all 2^t candidates. The weights e^{±η S_α} are kept
/// multiplicatively, rescaled by e^{−η·m} with m the running max of |S_α|.
/// Whenever the multiset size is a power of two its exact bias is checked.
pub fn build_expander(t: u32, mu: f64) -> Result<ExpanderSpec> {
    check_bits(t)?;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::invalid(format!("bias bound mu={mu} outside (0, 1)")));
    }
    let size = 1usize << t;
    let cap = degree_cap(t, mu);
    let floor = min_degree_for_bias(t, mu);
    if floor > cap {
        return Err(Error::ExpanderInfeasible { t, mu, cap });
    }
    if floor > (size / 2) as u64 {
        // no power of two below 2^t can work; the whole group has bias 0
        return Ok(ExpanderSpec {
            t,
            mu,
            generators: (0..size as u32).collect(),
            verified_bias: 0.0,
        });
    }
    let eta = mu;
    let (up, down) = (eta.exp(), (-eta).exp());
    let mut sums = vec![0i64; size];
    // a_α = e^{η(S_α − m)}, b_α = e^{−η(S_α + m)}
    let mut a = vec![1f64; size];
    let mut b = vec![1f64; size];
    let mut m = 0i64;
    let mut generators: Vec<u32> = Vec::new();
    let mut diff = vec![0f64; size];
    let mut next_check = floor.next_power_of_two() as usize;
    while (generators.len() as u64) < cap {
        diff[0] = 0.0;
        for alpha in 1..size {
            diff[alpha] = a[alpha] - b[alpha];
        }
        fwht_f64(&mut diff);
        let mut best = 0usize;
        for s in 1..size {
            if diff[s] < diff[best] {
                best = s;
            }
        }
        generators.push(best as u32);
        let mut worst = 0i64;
        for alpha in 0..size {
            if (alpha & best).count_ones().is_multiple_of(2) {
                sums[alpha] += 1;
                a[alpha] *= up;
                b[alpha] *= down;
            } else {
                sums[alpha] -= 1;
                a[alpha] *= down;
                b[alpha] *= up;
            }
            if alpha > 0 {
                worst = worst.max(sums[alpha].abs());
            }
        }
        if worst > m {
            for alpha in 0..size {
                a[alpha] *= down;
                b[alpha] *= down;
            }
            m = worst;
        }
        if generators.len() == next_check {
            let bias = worst as f64 / generators.len() as f64;
            if bias <= mu {
                return Ok(ExpanderSpec {
                    t,
                    mu,
                    generators,
                    verified_bias: bias,
                });
            }
            if next_check == size {
                // The whole group is a zero-bias multiset of this size.
                return Ok(ExpanderSpec {
                    t,
                    mu,
                    generators: (0..size as u32).collect(),
                    verified_bias: 0.0,
                });
            }
            next_check *= 2;
        }
    }
    Err(Error::ExpanderInfeasible { t, mu, cap })
}

impl ExpanderSpec {
    /// Wrap a caller-supplied multiset; the bias is computed exhaustively and
    /// must not exceed `mu`.
    pub fn from_generators(t: u32, mu: f64, generators: Vec<u32>) -> Result<Self> {
        check_bits(t)?;
        if generators.is_empty() {
            return Err(Error::invalid("generator multiset is empty"));
        }
        if let Some(&s) = generators.iter().find(|&&s| (s as u64) >> t != 0) {
            return Err(Error::invalid(format!("generator {s:#x} has more than {t} bits")));
        }
        let b = bias(t, &generators);
        if b > mu + 1e-12 {
            return Err(Error::invalid(format!(
                "generators have bias {b} above the stated bound {mu}"
            )));
        }
        Ok(Self {
            t,
            mu,
            generators,
            verified_bias: b,
        })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn c(&self) -> usize {
        self.generators.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn verified_bias(&self) -> f64 {
        self.verified_bias
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// Repeat the whole multiset `r` times; bias and transition matrix are
    /// unchanged.
    pub fn duplicated(&self, r: usize) -> ExpanderSpec {
        let mut generators = Vec::with_capacity(self.c() * r);
        for _ in 0..r {
            generators.extend_from_slice(&self.generators);
        }
        ExpanderSpec {
            generators,
            ..self.clone()
        }
    }

    /// Duplicate up to degree `c`, which must be a multiple of the current one.
    pub fn padded_to(&self, c: usize) -> Result<ExpanderSpec> {
        if c < self.c() || !c.is_multiple_of(self.c()) {
            return Err(Error::invalid(format!(
                "cannot pad degree {} to {c} by duplication",
                self.c()
            )));
        }
        Ok(self.duplicated(c / self.c()))
    }

    pub fn to_graph(&self) -> LabeledMultigraph {
        LabeledMultigraph::cayley(self.t, self.generators.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ExpanderJson {
            t: self.t,
            c: self.c(),
            mu: self.mu,
            verified_bias: self.verified_bias,
            generators: self.generators.iter().map(|s| format!("{s:#x}")).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Read a spec back; the bias is re-verified rather than trusted.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ExpanderJson = serde_json::from_str(text)?;
        let mut generators = Vec::with_capacity(doc.generators.len());
        for g in &doc.generators {
            let digits = g.trim_start_matches("0x").trim_start_matches("0X");
            let s = u32::from_str_radix(digits, 16)
                .map_err(|e| Error::invalid(format!("generator {g:?}: {e}")))?;
            generators.push(s);
        }
        if generators.len() != doc.c {
            return Err(Error::DimensionMismatch {
                expected: doc.c,
                found: generators.len(),
            });
        }
        let spec = Self::from_generators(doc.t, doc.mu, generators)?;
        if (spec.verified_bias - doc.verified_bias).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "stated bias {} differs from recomputed bias {}",
                doc.verified_bias, spec.verified_bias
            )));
        }
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize)]
struct ExpanderJson {
    t: u32,
    c: usize,
    mu: f64,
    verified_bias: f64,
    generators: Vec<String>,
}
