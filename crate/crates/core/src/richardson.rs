//! Preconditioned Richardson iteration for pseudoinverses.
//!
//! Given L̃⁺ ≈_α L⁺ with α < 1/2, the operator
//! e^{−α} Σ_{i=0}^{k} P(I − AP)^i with P = L̃⁺ and A = e^{−α}L satisfies
//! (1 − 3(2α)^{k+1}) L⁺ ⪯ · ⪯ L⁺, hence approximates L⁺ within 6(2α)^{k+1}
//! whenever that quantity is at most 3/2 (where 1 − x/2 ≥ e^{−x} still holds).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{project_both_sides, project_out_ones, symmetrize, LinearOperator};
use crate::pinv::PinvApproximation;

/// Largest certified parameter for which the exponential bound is valid.
pub const CERTIFIED_CAP: f64 = 1.5;
/// Accepted relative component of a right-hand side along 1.
pub const IMAGE_TOLERANCE: f64 = 1e-9;
const DRIFT_TOLERANCE: f64 = 1e-12;

/// 6(2α)^{k+1}.
pub fn certified_parameter(alpha: f64, k: usize) -> f64 {
    6.0 * (2.0 * alpha).powi(k as i32 + 1)
}

/// Smallest k with 6(2α)^{k+1} ≤ min(eps, 3/2).
pub fn iterations_for(alpha: f64, eps: f64) -> Result<usize> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::CertificateTooWeak { alpha });
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid(format!("target eps={eps} must be positive")));
    }
    let target = eps.min(CERTIFIED_CAP);
    let mut k = 0;
    while certified_parameter(alpha, k) > target {
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub alpha: f64,
    pub eps: f64,
    pub iterations: usize,
}

impl BoostConfig {
    pub fn new(alpha: f64, eps: f64) -> Result<Self> {
        Ok(BoostConfig {
            alpha,
            eps,
            iterations: iterations_for(alpha, eps)?,
        })
    }

    /// Fixed iteration count, bypassing the choice from `eps`.
    pub fn with_iterations(alpha: f64, iterations: usize) -> Result<Self> {
        if !(0.0..0.5).contains(&alpha) {
            return Err(Error::CertificateTooWeak { alpha });
        }
        Ok(BoostConfig {
            alpha,
            eps: certified_parameter(alpha, iterations),
            iterations,
        })
    }

    pub fn certified(&self) -> f64 {
        certified_parameter(self.alpha, self.iterations)
    }
}

/// Σ_{i=0}^{k} P(I − AP)^i.
pub fn richardson_sum(a: &DMatrix<f64>, p: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = p.nrows();
    let step = DMatrix::<f64>::identity(n, n) - a * p;
    let mut term = p.clone();
    let mut acc = p.clone();
    for _ in 0..k {
        term = &term * &step;
        acc += &term;
    }
    symmetrize(&mut acc);
    acc
}

/// Dense boosted pseudoinverse; `l` must be the Laplacian whose
/// pseudoinverse `ltil` approximates.
pub fn boost_matrix(l: &DMatrix<f64>, ltil: &PinvApproximation, cfg: &BoostConfig) -> Result<PinvApproximation> {
    if !(0.0..0.5).contains(&cfg.alpha) {
        return Err(Error::CertificateTooWeak { alpha: cfg.alpha });
    }
    if l.nrows() != ltil.n() {
        return Err(Error::DimensionMismatch {
            expected: ltil.n(),
            found: l.nrows(),
        });
    }
    let p = ltil.to_dense()?;
    let shrink = (-cfg.alpha).exp();
    let mut out = richardson_sum(&(l * shrink), &p, cfg.iterations) * shrink;
    project_both_sides(&mut out);
    symmetrize(&mut out);
    Ok(PinvApproximation::dense(out, cfg.certified()))
}

/// The boosted operator without forming it; each application runs the
/// recurrence of [`boost_apply`].
pub fn boost_operator(l: &DMatrix<f64>, ltil: PinvApproximation, cfg: &BoostConfig) -> Result<PinvApproximation> {
    if !(0.0..0.5).contains(&cfg.alpha) {
        return Err(Error::CertificateTooWeak { alpha: cfg.alpha });
    }
    if l.nrows() != ltil.n() {
        return Err(Error::DimensionMismatch {
            expected: ltil.n(),
            found: l.nrows(),
        });
    }
    Ok(PinvApproximation::boosted(ltil, l.clone(), cfg.alpha, cfg.iterations, cfg.certified()))
}

pub(crate) fn check_image(b: &DVector<f64>) -> Result<()> {
    let norm = b.norm();
    if norm == 0.0 {
        return Ok(());
    }
    let ratio = b.sum().abs() / (b.len() as f64).sqrt() / norm;
    if ratio > IMAGE_TOLERANCE {
        return Err(Error::NotInImage { ratio });
    }
    Ok(())
}

fn drifted(x: &DVector<f64>) -> bool {
    let along = x.sum().abs() / (x.len() as f64).sqrt();
    along > DRIFT_TOLERANCE * x.norm().max(f64::MIN_POSITIVE)
}

/// r₀ = b, r_{i+1} = r_i − e^{−α} L L̃⁺ r_i, x = e^{−α} Σ_i L̃⁺ r_i.
pub fn boost_apply(l: &DMatrix<f64>, ltil: &dyn LinearOperator, b: &DVector<f64>, cfg: &BoostConfig) -> Result<DVector<f64>> {
    if ltil.dim() != l.nrows() {
        return Err(Error::DimensionMismatch {
            expected: l.nrows(),
            found: ltil.dim(),
        });
    }
    boost_apply_with(l, |x| Ok(ltil.apply(x)), b, cfg.alpha, cfg.iterations)
}

pub(crate) fn boost_apply_with<F>(l: &DMatrix<f64>, apply_p: F, b: &DVector<f64>, alpha: f64, iterations: usize) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    if b.len() != l.nrows() {
        return Err(Error::DimensionMismatch {
            expected: l.nrows(),
            found: b.len(),
        });
    }
    check_image(b)?;
    let shrink = (-alpha).exp();
    let mut r = b.clone();
    let mut x = DVector::zeros(b.len());
    for i in 0..=iterations {
        let mut pr = apply_p(&r)?;
        if drifted(&pr) {
            project_out_ones(&mut pr);
        }
        x += &pr;
        if i < iterations {
            r -= (l * &pr) * shrink;
            if drifted(&r) {
                project_out_ones(&mut r);
            }
        }
    }
    x *= shrink;
    if drifted(&x) {
        project_out_ones(&mut x);
    }
    Ok(x)
}
