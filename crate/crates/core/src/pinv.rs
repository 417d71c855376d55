//! Constant-factor pseudoinverse of I − M₀ from a squaring chain:
//!
//! Z₀ = ½(I − J) + Σ_{i<k} W_i / 2^{i+2} + W_k / 2^{k+1},
//! W_i = (I+M₀)⋯(I+M_i)(I − J)(I+M_i)⋯(I+M₀).
//!
//! The dense backend forms Z₀ as Σ c_i S_i S_iᵀ with S_i = S_{i−1}(I + M_i),
//! S_{−1} = I − J. The entrywise backend evaluates each product entry by
//! recursive bisection over the factor list, touching only chain entries.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dsquare::{default_levels, DerandChain};
use crate::error::{Error, Result};
use crate::linalg::{centering, project_both_sides, symmetrize, LinearOperator};
use crate::metrics::Metrics;
use crate::multigraph::TransitionMatrix;
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    /// I + M_ℓ
    IdentityPlus(usize),
    /// I − J
    Center,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub factors: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionPlan {
    pub k: usize,
    /// Leading ½(I − J) first, then W₀..W_k.
    pub terms: Vec<Term>,
}

impl ExpansionPlan {
    pub fn new(k: usize) -> Self {
        let mut terms = vec![Term {
            coefficient: 0.5,
            factors: vec![Factor::Center],
        }];
        for i in 0..=k {
            let coefficient = if i < k {
                0.5f64.powi(i as i32 + 2)
            } else {
                0.5f64.powi(k as i32 + 1)
            };
            let mut factors: Vec<Factor> = (0..=i).map(Factor::IdentityPlus).collect();
            factors.push(Factor::Center);
            factors.extend((0..=i).rev().map(Factor::IdentityPlus));
            terms.push(Term { coefficient, factors });
        }
        ExpansionPlan { k, terms }
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }
}

/// Square matrix accessed one entry at a time.
pub trait EntryOracle {
    fn dim(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> Result<f64>;
}

impl EntryOracle for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self[(i, j)])
    }
}

struct ChainFactor<'a> {
    chain: &'a DerandChain,
    factor: Factor,
}

impl EntryOracle for ChainFactor<'_> {
    fn dim(&self) -> usize {
        self.chain.n()
    }

    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let delta = if i == j { 1.0 } else { 0.0 };
        match self.factor {
            Factor::IdentityPlus(level) => Ok(delta + self.chain.entry(level, i, j)?),
            Factor::Center => Ok(delta - 1.0 / self.chain.n() as f64),
        }
    }
}

/// Entry (i, j) of F₁⋯F_m: split the list into halves of sizes ⌈m/2⌉ and
/// ⌊m/2⌋ and sum left(i, ℓ)·right(ℓ, j) over the middle index. Recursion
/// depth is ⌈log₂ m⌉; each frame keeps (i, j, ℓ) live.
pub fn product_entry(factors: &[&dyn EntryOracle], i: usize, j: usize, metrics: &Metrics) -> Result<f64> {
    let first = factors.first().ok_or(Error::EmptyFactors)?;
    let n = first.dim();
    if let Some(f) = factors.iter().find(|f| f.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.dim(),
        });
    }
    for x in [i, j] {
        if x >= n {
            return Err(Error::VertexOutOfRange { vertex: x, n });
        }
    }
    product_rec(factors, i, j, 0, metrics)
}

fn product_rec(factors: &[&dyn EntryOracle], i: usize, j: usize, depth: u64, metrics: &Metrics) -> Result<f64> {
    metrics.observe_depth(depth, 3 * depth + 2);
    if factors.len() == 1 {
        metrics.entry_eval();
        return factors[0].entry(i, j);
    }
    let mid = factors.len().div_ceil(2);
    let (left, right) = factors.split_at(mid);
    let mut s = 0.0;
    for l in 0..factors[0].dim() {
        let a = product_rec(left, i, l, depth + 1, metrics)?;
        if a != 0.0 {
            s += a * product_rec(right, l, j, depth + 1, metrics)?;
        }
    }
    Ok(s)
}

/// Entry (i, j) of Z₀, term by term in increasing order.
pub fn expansion_entry(plan: &ExpansionPlan, chain: &DerandChain, i: usize, j: usize, metrics: &Metrics) -> Result<f64> {
    if plan.k > chain.k() {
        return Err(Error::invalid(format!(
            "plan has {} levels but the chain only {}",
            plan.k,
            chain.k()
        )));
    }
    let mut total = 0.0;
    for term in &plan.terms {
        let oracles: Vec<ChainFactor> = term
            .factors
            .iter()
            .map(|&factor| ChainFactor { chain, factor })
            .collect();
        let refs: Vec<&dyn EntryOracle> = oracles.iter().map(|o| o as &dyn EntryOracle).collect();
        total += term.coefficient * product_entry(&refs, i, j, metrics)?;
    }
    Ok(total)
}

/// Dense Z₀ from the level matrices M₀..M_k.
pub fn dense_expansion(levels: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let n = levels.first().ok_or(Error::EmptyFactors)?.nrows();
    let plan = ExpansionPlan::new(levels.len() - 1);
    let mut s = centering(n);
    let mut z = &s * plan.terms[0].coefficient;
    for (i, m) in levels.iter().enumerate() {
        s = &s + &s * m;
        project_both_sides(&mut s);
        z += (&s * s.transpose()) * plan.terms[i + 1].coefficient;
    }
    symmetrize(&mut z);
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Dense,
    Entrywise,
}

/// Why Z₀ ≈_δ L⁺ holds for a given chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCertificate {
    /// ln(1/(1 − λ(H_i))) per level.
    pub level_eps: Vec<f64>,
    pub lambda0: f64,
    /// λ(G_k) bound propagated from λ(G₀) level by level.
    pub lambda_final_bound: f64,
    pub lambda_final_measured: Option<f64>,
    /// k ≥ ⌈6 log₂(d²n²)⌉ and every λ(H_i) ≤ 1/100, so λ(G_k) ≤ 1/3.
    pub one_third_bound_applies: bool,
    /// ln(1/(1 − λ(G_k))) for the best available bound on λ(G_k).
    pub eps_final: f64,
    pub delta: f64,
}

impl ChainCertificate {
    pub fn for_chain(chain: &DerandChain, measured_final: Option<f64>) -> Result<Self> {
        let lambda0 = oracle::lambda(chain.base())?;
        let bounds = chain.lambda_bounds(lambda0);
        let lambda_final_bound = *bounds.last().unwrap();
        let level_eps = chain.level_epsilons();
        let one_third_bound_applies = chain.k() >= default_levels(chain.base().degree() as u64, chain.n())
            && chain.levels().iter().all(|l| l.lambda_h <= 0.01);
        let mut lam = lambda_final_bound;
        if let Some(m) = measured_final {
            lam = lam.min(m);
        }
        if one_third_bound_applies {
            lam = lam.min(1.0 / 3.0);
        }
        let eps_final = if lam < 1.0 { (1.0 / (1.0 - lam)).ln() } else { f64::INFINITY };
        let delta = level_eps.iter().sum::<f64>() + eps_final;
        Ok(ChainCertificate {
            level_eps,
            lambda0,
            lambda_final_bound,
            lambda_final_measured: measured_final,
            one_third_bound_applies,
            eps_final,
            delta,
        })
    }
}

#[derive(Debug, Clone)]
pub enum PinvStorage {
    Dense(DMatrix<f64>),
    /// Entries of Z₀ computed on demand from the chain.
    Expansion {
        chain: Arc<DerandChain>,
        plan: ExpansionPlan,
    },
    /// e^{−α} Σ_{i≤k} P(I − e^{−α} L P)^i applied matrix-free, P = `inner`.
    Boosted {
        inner: Box<PinvApproximation>,
        laplacian: DMatrix<f64>,
        alpha: f64,
        iterations: usize,
    },
}

/// An approximation of a Laplacian pseudoinverse: the represented operator
/// is the stored one divided by `scale`.
#[derive(Debug, Clone)]
pub struct PinvApproximation {
    pub storage: PinvStorage,
    /// Certified approximation parameter.
    pub delta: f64,
    pub scale: f64,
    pub certificate: Option<ChainCertificate>,
    product_metrics: Arc<Metrics>,
}

impl PinvApproximation {
    pub fn dense(m: DMatrix<f64>, delta: f64) -> Self {
        PinvApproximation {
            storage: PinvStorage::Dense(m),
            delta,
            scale: 1.0,
            certificate: None,
            product_metrics: Arc::new(Metrics::new()),
        }
    }

    pub(crate) fn boosted(inner: PinvApproximation, laplacian: DMatrix<f64>, alpha: f64, iterations: usize, delta: f64) -> Self {
        PinvApproximation {
            storage: PinvStorage::Boosted {
                inner: Box::new(inner),
                laplacian,
                alpha,
                iterations,
            },
            delta,
            scale: 1.0,
            certificate: None,
            product_metrics: Arc::new(Metrics::new()),
        }
    }

    pub fn n(&self) -> usize {
        match &self.storage {
            PinvStorage::Dense(m) => m.nrows(),
            PinvStorage::Expansion { chain, .. } => chain.n(),
            PinvStorage::Boosted { laplacian, .. } => laplacian.nrows(),
        }
    }

    /// Divide the represented operator by `f`.
    pub fn rescaled(mut self, f: f64) -> Self {
        self.scale *= f;
        self
    }

    pub fn chain(&self) -> Option<&Arc<DerandChain>> {
        match &self.storage {
            PinvStorage::Expansion { chain, .. } => Some(chain),
            PinvStorage::Boosted { inner, .. } => inner.chain(),
            PinvStorage::Dense(_) => None,
        }
    }

    /// Depth and work counters of product-entry evaluation.
    pub fn product_metrics(&self) -> &Metrics {
        match &self.storage {
            PinvStorage::Boosted { inner, .. } => inner.product_metrics(),
            _ => &self.product_metrics,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.n();
        for x in [i, j] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        let raw = match &self.storage {
            PinvStorage::Dense(m) => m[(i, j)],
            PinvStorage::Expansion { chain, plan } => expansion_entry(plan, chain, i, j, &self.product_metrics)?,
            PinvStorage::Boosted { .. } => return Ok(self.column(j)?[i]),
        };
        Ok(raw / self.scale)
    }

    pub fn try_apply(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let raw = match &self.storage {
            PinvStorage::Dense(m) => m * b,
            PinvStorage::Expansion { chain, plan } => {
                let mut out = DVector::zeros(n);
                for i in 0..n {
                    let mut s = 0.0;
                    for j in 0..n {
                        if b[j] != 0.0 {
                            s += expansion_entry(plan, chain, i, j, &self.product_metrics)? * b[j];
                        }
                    }
                    out[i] = s;
                }
                out
            }
            PinvStorage::Boosted {
                inner,
                laplacian,
                alpha,
                iterations,
            } => crate::richardson::boost_apply_with(laplacian, |x| inner.try_apply(x), b, *alpha, *iterations)?,
        };
        Ok(raw / self.scale)
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if let PinvStorage::Dense(m) = &self.storage {
            return Ok(m / self.scale);
        }
        let n = self.n();
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            out.set_column(j, &self.column(j)?);
        }
        symmetrize(&mut out);
        Ok(out)
    }

    /// Column j, applied to e_j − 1/n (the operator vanishes on 1 and the
    /// boosted form only accepts vectors in the image).
    fn column(&self, j: usize) -> Result<DVector<f64>> {
        let n = self.n();
        let mut e = DVector::from_element(n, -1.0 / n as f64);
        e[j] += 1.0;
        self.try_apply(&e)
    }
}

impl LinearOperator for PinvApproximation {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.try_apply(x).expect("pseudoinverse application failed")
    }
}

fn check_chain_base(chain: &DerandChain) -> Result<()> {
    let comps = chain.base().components()?;
    if comps.len() > 1 {
        return Err(Error::Disconnected {
            components: comps.len(),
        });
    }
    if !chain.base().is_half_lazy() {
        let (vertex, loops) = chain.base().min_self_loops();
        return Err(Error::NotLazy {
            vertex,
            loops,
            degree: chain.base().degree() as u64,
        });
    }
    Ok(())
}

/// Z₀ for the chain with its certificate δ. The base must be connected and
/// 1/2-lazy.
pub fn constant_approx(chain: Arc<DerandChain>, backend: Backend) -> Result<PinvApproximation> {
    check_chain_base(&chain)?;
    match backend {
        Backend::Dense => {
            let levels = chain.dense_levels()?;
            let lambda_k = oracle::lambda_of_transition(levels.last().unwrap())?;
            let certificate = ChainCertificate::for_chain(&chain, Some(lambda_k))?;
            let z = dense_expansion(&levels)?;
            Ok(PinvApproximation {
                storage: PinvStorage::Dense(z),
                delta: certificate.delta,
                scale: 1.0,
                certificate: Some(certificate),
                product_metrics: Arc::new(Metrics::new()),
            })
        }
        Backend::Entrywise => {
            let certificate = ChainCertificate::for_chain(&chain, None)?;
            let plan = ExpansionPlan::new(chain.k());
            Ok(PinvApproximation {
                storage: PinvStorage::Expansion { chain, plan },
                delta: certificate.delta,
                scale: 1.0,
                certificate: Some(certificate),
                product_metrics: Arc::new(Metrics::new()),
            })
        }
    }
}

/// ½(I − J + (I + M)(I − M²)⁺(I + M)) with the oracle pseudoinverse.
pub fn identity_step(m: &TransitionMatrix) -> Result<DMatrix<f64>> {
    let n = m.n();
    let mat = m.matrix();
    crate::linalg::check_symmetric(mat)?;
    let eig = crate::linalg::sym_eigen(mat);
    let ones = eig.eigenvalues.iter().filter(|&&x| x > 1.0 - 1e-9).count();
    if ones > 1 {
        return Err(Error::Disconnected { components: ones });
    }
    if eig.eigenvalues.iter().any(|&x| x < -1.0 + 1e-9) {
        return Err(Error::Periodic);
    }
    let id = DMatrix::<f64>::identity(n, n);
    let plus = &id + mat;
    let sq = &id - mat * mat;
    let inner = oracle::exact_pinv(&sq)?;
    let mut out = (centering(n) + &plus * inner * &plus) * 0.5;
    symmetrize(&mut out);
    Ok(out)
}
