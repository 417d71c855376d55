//! End-to-end pipelines on arbitrary undirected multigraphs.
//!
//! regularize → squaring chain → constant approximation → Richardson boost
//! → divide by f, giving an approximation of (D − A)⁺.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dsquare::{build_chain, default_levels, ChainConfig, DegreePolicy, DerandChain};
use crate::error::{Error, Result};
use crate::metrics::MetricsSnapshot;
use crate::multigraph::{regularize, Multigraph};
use crate::pinv::{constant_approx, Backend, PinvApproximation};
use crate::richardson::{boost_matrix, boost_operator, BoostConfig, IMAGE_TOLERANCE};

/// Which expanders the squaring chain uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChainPolicy {
    /// Complete graphs with loops: every level is the true square.
    ExactSquaring,
    /// Cayley expanders with bias ≤ μ (default 1/(30k)).
    Derandomized {
        mu: Option<f64>,
        degrees: DegreePolicy,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub chain: ChainPolicy,
    /// Chain length; default ⌈6 log₂(f²n²)⌉.
    pub k: Option<usize>,
    pub backend: Backend,
    /// Project right-hand sides onto the image instead of rejecting them.
    pub project: bool,
    /// Solve each connected component separately (dense backend only).
    pub auto_split: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            chain: ChainPolicy::ExactSquaring,
            k: None,
            backend: Backend::Dense,
            project: false,
            auto_split: false,
        }
    }
}

/// Parameters and certificates of one pseudoinverse construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineInfo {
    pub f: u64,
    pub k: usize,
    pub mu: Option<f64>,
    /// Expander degree per level (absent when it overflows 64 bits).
    pub c: Vec<Option<u64>>,
    pub delta_chain: f64,
    pub boost_iterations: usize,
    pub eps_certified: f64,
    pub metrics: MetricsSnapshot,
}

#[derive(Debug, Clone)]
pub struct PinvResult {
    pub pinv: PinvApproximation,
    pub info: PipelineInfo,
}

impl PinvResult {
    pub fn metrics(&self) -> MetricsSnapshot {
        let mut m = self.pinv.product_metrics().snapshot();
        if let Some(chain) = self.pinv.chain() {
            m = m.merge(chain.metrics().snapshot());
        }
        m
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps={eps} must be positive and finite")));
    }
    Ok(())
}

/// ε-approximation of (D − A)⁺ for a connected graph, or block-diagonal
/// over components with `auto_split`.
pub fn approx_pinv(g: &Multigraph, eps: f64, cfg: &SolverConfig) -> Result<PinvResult> {
    check_eps(eps)?;
    let comps = g.components();
    if comps.len() == 1 {
        return approx_pinv_connected(g, eps, cfg);
    }
    if !cfg.auto_split {
        return Err(Error::Disconnected {
            components: comps.len(),
        });
    }
    if cfg.backend != Backend::Dense {
        return Err(Error::invalid("component splitting is only available with the dense backend"));
    }
    let n = g.n();
    let mut out = DMatrix::zeros(n, n);
    let mut info: Option<PipelineInfo> = None;
    for comp in &comps {
        let sub = g.induced(comp)?;
        let part = approx_pinv_connected(&sub, eps, cfg)?;
        let m = part.pinv.to_dense()?;
        for (a, &i) in comp.iter().enumerate() {
            for (b, &j) in comp.iter().enumerate() {
                out[(i, j)] = m[(a, b)];
            }
        }
        let metrics = part.metrics();
        let pi = PipelineInfo { metrics, ..part.info };
        info = Some(match info {
            None => pi,
            Some(prev) => PipelineInfo {
                f: prev.f.max(pi.f),
                k: prev.k.max(pi.k),
                mu: prev.mu.or(pi.mu),
                c: if prev.c.len() >= pi.c.len() { prev.c } else { pi.c },
                delta_chain: prev.delta_chain.max(pi.delta_chain),
                boost_iterations: prev.boost_iterations.max(pi.boost_iterations),
                eps_certified: prev.eps_certified.max(pi.eps_certified),
                metrics: prev.metrics.merge(pi.metrics),
            },
        });
    }
    let info = info.unwrap();
    Ok(PinvResult {
        pinv: PinvApproximation::dense(out, info.eps_certified),
        info,
    })
}

fn approx_pinv_connected(g: &Multigraph, eps: f64, cfg: &SolverConfig) -> Result<PinvResult> {
    let reg = regularize(g)?;
    let n = g.n();
    let f = reg.f;
    if n == 1 {
        return Ok(PinvResult {
            pinv: PinvApproximation::dense(DMatrix::zeros(1, 1), 0.0),
            info: PipelineInfo {
                f,
                k: 0,
                mu: None,
                c: Vec::new(),
                delta_chain: 0.0,
                boost_iterations: 0,
                eps_certified: 0.0,
                metrics: MetricsSnapshot::default(),
            },
        });
    }
    let k = cfg.k.unwrap_or_else(|| default_levels(f, n));
    let (chain, mu) = match cfg.chain {
        ChainPolicy::ExactSquaring => (DerandChain::exact_squaring(reg.graph.clone(), k)?, None),
        ChainPolicy::Derandomized { mu, degrees } => {
            let mu = mu.unwrap_or(1.0 / (30.0 * k.max(1) as f64));
            (build_chain(reg.graph.clone(), &ChainConfig { mu, k, degrees })?, Some(mu))
        }
    };
    let c = chain.levels().iter().map(|l| l.c).collect();
    let z = constant_approx(Arc::new(chain), cfg.backend)?;
    let delta_chain = z.delta;
    let boost = BoostConfig::new(delta_chain, eps)?;
    let lnorm = reg.normalized_laplacian()?;
    let boosted = match cfg.backend {
        Backend::Dense => boost_matrix(&lnorm, &z, &boost)?,
        Backend::Entrywise => boost_operator(&lnorm, z, &boost)?,
    };
    let pinv = boosted.rescaled(f as f64);
    let mut result = PinvResult {
        pinv,
        info: PipelineInfo {
            f,
            k,
            mu,
            c,
            delta_chain,
            boost_iterations: boost.iterations,
            eps_certified: boost.certified(),
            metrics: MetricsSnapshot::default(),
        },
    };
    result.info.metrics = result.metrics();
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub eps_requested: f64,
    pub eps_internal: f64,
    pub delta_chain: f64,
    pub f: u64,
    pub k: usize,
    pub mu: Option<f64>,
    pub c: Vec<Option<u64>>,
    pub boost_iterations: usize,
    pub eps_certified: f64,
    /// γ₂ ≥ 1/(2fn²) for the normalized Laplacian of the padded graph.
    pub gamma2_lower: f64,
    /// γ_n ≤ 2f.
    pub gamman_upper: f64,
    pub projected: bool,
    pub metrics: MetricsSnapshot,
}

/// ε′ = (ε/(4d²n²))²/2.
pub fn internal_eps(eps: f64, d: u64, n: usize) -> f64 {
    let d = d as f64;
    let n = n as f64;
    (eps / (4.0 * d * d * n * n)).powi(2) / 2.0
}

/// Check (or enforce with `project`) that b sums to zero on every component.
fn into_image(g: &Multigraph, b: &DVector<f64>, project: bool) -> Result<(DVector<f64>, bool)> {
    let norm = b.norm();
    let mut out = b.clone();
    let mut projected = false;
    if norm == 0.0 {
        return Ok((out, false));
    }
    for comp in g.components() {
        let s: f64 = comp.iter().map(|&i| b[i]).sum();
        let ratio = s.abs() / (comp.len() as f64).sqrt() / norm;
        if ratio > IMAGE_TOLERANCE {
            if !project {
                return Err(Error::NotInImage { ratio });
            }
            projected = true;
        }
        if project {
            let mean = s / comp.len() as f64;
            for &i in &comp {
                out[i] -= mean;
            }
        }
    }
    Ok((out, projected))
}

fn check_vector(g: &Multigraph, b: &DVector<f64>) -> Result<()> {
    if b.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: b.len(),
        });
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("right-hand side has a non-finite entry"));
    }
    Ok(())
}

/// x with ‖x − L⁺b‖₂ ≤ ε‖L⁺b‖₂ for L = D − A.
pub fn solve(g: &Multigraph, b: &DVector<f64>, eps: f64, cfg: &SolverConfig) -> Result<SolveReport> {
    check_eps(eps)?;
    check_vector(g, b)?;
    let (b, projected) = into_image(g, b, cfg.project)?;
    let n = g.n();
    let f = regularize(g)?.f;
    let eps_internal = internal_eps(eps, f, n);
    let result = approx_pinv(g, eps_internal, cfg)?;
    let x = if b.norm() == 0.0 {
        DVector::zeros(n)
    } else {
        result.pinv.try_apply(&b)?
    };
    let info = PipelineInfo {
        metrics: result.metrics(),
        ..result.info
    };
    Ok(SolveReport {
        x: x.iter().copied().collect(),
        eps_requested: eps,
        eps_internal,
        delta_chain: info.delta_chain,
        f,
        k: info.k,
        mu: info.mu,
        c: info.c,
        boost_iterations: info.boost_iterations,
        eps_certified: info.eps_certified,
        gamma2_lower: 1.0 / (2.0 * f as f64 * (n * n) as f64),
        gamman_upper: 2.0 * f as f64,
        projected,
        metrics: info.metrics,
    })
}

/// x̃ ≈ ((D − A)D⁻¹)⁺ b, computed as K z̃ with K = D − (ddᵀ/‖d‖²)D and
/// z̃ ≈ (D − A)⁺ b at accuracy ε/(√n‖d‖₂).
pub fn apply_normalized_pinv(g: &Multigraph, b: &DVector<f64>, eps: f64, cfg: &SolverConfig) -> Result<DVector<f64>> {
    check_eps(eps)?;
    check_vector(g, b)?;
    let comps = g.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected {
            components: comps.len(),
        });
    }
    let (b, _) = into_image(g, b, cfg.project)?;
    let d = DVector::from_iterator(g.n(), g.degrees().into_iter().map(|x| x as f64));
    let dnorm = d.norm();
    if dnorm == 0.0 {
        return Ok(DVector::zeros(g.n()));
    }
    let inner = eps / ((g.n() as f64).sqrt() * dnorm);
    let z = approx_pinv(g, inner, cfg)?.pinv.try_apply(&b)?;
    let dz = d.component_mul(&z);
    let coef = d.dot(&dz) / (dnorm * dnorm);
    Ok(dz - &d * coef)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Hitting,
    Commute,
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkQuery {
    pub u: usize,
    pub v: usize,
    pub kind: WalkKind,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkReport {
    pub kind: WalkKind,
    pub u: usize,
    pub v: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    pub eps_requested: f64,
    pub eps_internal: f64,
    pub delta_chain: f64,
    pub f: u64,
    pub k: usize,
    pub metrics: MetricsSnapshot,
}

/// The component containing both u and v, relabeled, with their new indices.
fn shared_component(g: &Multigraph, u: usize, v: usize) -> Result<(Multigraph, Vec<usize>, usize, usize)> {
    let n = g.n();
    for x in [u, v] {
        if x >= n {
            return Err(Error::VertexOutOfRange { vertex: x, n });
        }
    }
    if u == v {
        return Err(Error::SameVertex { u });
    }
    let comp = g
        .components()
        .into_iter()
        .find(|c| c.contains(&u))
        .unwrap();
    if !comp.contains(&v) {
        return Err(Error::DifferentComponents { u, v });
    }
    let sub = g.induced(&comp)?;
    let pu = comp.iter().position(|&x| x == u).unwrap();
    let pv = comp.iter().position(|&x| x == v).unwrap();
    Ok((sub, comp, pu, pv))
}

struct Hit {
    value: f64,
    eps_internal: f64,
    info: PipelineInfo,
}

/// H_uv = (e_u − e_v)ᵀ L⁺ (d − vol·e_v) on a connected graph.
///
/// For E = L̃⁺ − L⁺ sandwiched by ±(e^{ε′} − 1)L⁺, Cauchy–Schwarz gives
/// |zᵀEy| ≤ (e^{ε′} − 1)·√(R_uv)·√(yᵀL⁺y) with R_uv ≤ n − 1 and
/// yᵀL⁺y ≤ ‖y‖²·2fn² (λ₂(D − A) ≥ 1/(2fn²)); ε′ is chosen to make this ≤ ε.
fn hitting_connected(g: &Multigraph, u: usize, v: usize, eps: f64, cfg: &SolverConfig) -> Result<Hit> {
    let n = g.n();
    let f = regularize(g)?.f as f64;
    let deg: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let vol: f64 = deg.iter().sum();
    let mut y = DVector::from_vec(deg);
    y[v] -= vol;
    let bound = ((n - 1) as f64).sqrt() * y.norm() * (2.0 * f).sqrt() * n as f64;
    let eps_internal = (eps / bound).ln_1p();
    let result = approx_pinv(g, eps_internal, cfg)?;
    let w = result.pinv.try_apply(&y)?;
    let info = PipelineInfo {
        metrics: result.metrics(),
        ..result.info
    };
    Ok(Hit {
        value: w[u] - w[v],
        eps_internal,
        info,
    })
}

pub fn hitting_time(g: &Multigraph, u: usize, v: usize, eps: f64, cfg: &SolverConfig) -> Result<WalkReport> {
    check_eps(eps)?;
    let (sub, _, pu, pv) = shared_component(g, u, v)?;
    let hit = hitting_connected(&sub, pu, pv, eps, cfg)?;
    Ok(WalkReport {
        kind: WalkKind::Hitting,
        u,
        v,
        value: Some(hit.value),
        p: None,
        eps_requested: eps,
        eps_internal: hit.eps_internal,
        delta_chain: hit.info.delta_chain,
        f: hit.info.f,
        k: hit.info.k,
        metrics: hit.info.metrics,
    })
}

/// C_uv = H_uv + H_vu, each computed to ε/2.
pub fn commute_time(g: &Multigraph, u: usize, v: usize, eps: f64, cfg: &SolverConfig) -> Result<WalkReport> {
    check_eps(eps)?;
    let (sub, _, pu, pv) = shared_component(g, u, v)?;
    let a = hitting_connected(&sub, pu, pv, eps / 2.0, cfg)?;
    let b = hitting_connected(&sub, pv, pu, eps / 2.0, cfg)?;
    Ok(WalkReport {
        kind: WalkKind::Commute,
        u,
        v,
        value: Some(a.value + b.value),
        p: None,
        eps_requested: eps,
        eps_internal: a.eps_internal.min(b.eps_internal),
        delta_chain: a.info.delta_chain.max(b.info.delta_chain),
        f: a.info.f,
        k: a.info.k,
        metrics: a.info.metrics.merge(b.info.metrics),
    })
}

/// p_w = P[walk from w reaches u before v] = (φ_w − φ_v)/(φ_u − φ_v) with
/// φ = L⁺(e_u − e_v).
///
/// Each difference φ_x − φ_v is off by at most η = (e^{ε′} − 1)(n − 1), and
/// the denominator is the effective resistance R_uv ≥ 1/Δ, so
/// |p̃_x − p_x| ≤ 2η/(R_uv − η) ≤ ε once η ≤ ε/(Δ(2 + ε)).
pub fn escape_probabilities(g: &Multigraph, u: usize, v: usize, eps: f64, cfg: &SolverConfig) -> Result<WalkReport> {
    check_eps(eps)?;
    let n = g.n();
    for x in [u, v] {
        if x >= n {
            return Err(Error::VertexOutOfRange { vertex: x, n });
        }
    }
    if u == v {
        return Err(Error::SameVertex { u });
    }
    let comps = g.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected {
            components: comps.len(),
        });
    }
    let delta = g.max_degree() as f64;
    let eta = eps / (delta * (2.0 + eps));
    let eps_internal = (eta / (n - 1) as f64).ln_1p();
    let result = approx_pinv(g, eps_internal, cfg)?;
    let mut rhs = DVector::zeros(n);
    rhs[u] = 1.0;
    rhs[v] = -1.0;
    let phi = result.pinv.try_apply(&rhs)?;
    let denom = phi[u] - phi[v];
    let p: Vec<f64> = (0..n)
        .map(|w| {
            if w == u {
                1.0
            } else if w == v {
                0.0
            } else {
                ((phi[w] - phi[v]) / denom).clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok(WalkReport {
        kind: WalkKind::Escape,
        u,
        v,
        value: None,
        p: Some(p),
        eps_requested: eps,
        eps_internal,
        delta_chain: result.info.delta_chain,
        f: result.info.f,
        k: result.info.k,
        metrics: result.metrics(),
    })
}

pub fn walk(g: &Multigraph, q: &WalkQuery, cfg: &SolverConfig) -> Result<WalkReport> {
    match q.kind {
        WalkKind::Hitting => hitting_time(g, q.u, q.v, q.eps, cfg),
        WalkKind::Commute => commute_time(g, q.u, q.v, q.eps, cfg),
        WalkKind::Escape => escape_probabilities(g, q.u, q.v, q.eps, cfg),
    }
}
