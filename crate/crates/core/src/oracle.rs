//! Dense ground truth: exact pseudoinverses, λ(G), the spectral
//! approximation checker, and absorbing-chain random-walk solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_square, check_symmetric, min_eigenvalue, sym_eigen};
use crate::multigraph::{LabeledMultigraph, Multigraph};

/// Eigenvalues at or below this magnitude are treated as kernel.
pub const PINV_THRESHOLD: f64 = 1e-10;
/// Default absolute tolerance on slack eigenvalues.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_ORACLE_N: usize = 512;

fn check_oracle_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_N {
        return Err(Error::TooLarge {
            what: "dense oracle dimension",
            value: n as u128,
            limit: MAX_ORACLE_N as u128,
        });
    }
    Ok(())
}

/// Moore–Penrose pseudoinverse of a symmetric matrix.
pub fn exact_pinv(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(l)?;
    check_oracle_size(l.nrows())?;
    let eig = sym_eigen(l);
    let inv = eig
        .eigenvalues
        .map(|x| if x.abs() > PINV_THRESHOLD { 1.0 / x } else { 0.0 });
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose())
}

/// Second largest absolute eigenvalue of a symmetric doubly stochastic
/// matrix, i.e. the largest on the complement of the all-ones vector.
pub fn lambda_of_transition(m: &DMatrix<f64>) -> Result<f64> {
    let n = check_square(m)?;
    check_oracle_size(n)?;
    if n == 1 {
        return Ok(0.0);
    }
    let shifted = m - DMatrix::from_element(n, n, 1.0 / n as f64);
    let eig = sym_eigen(&shifted);
    Ok(eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs())).min(1.0))
}

pub fn lambda(g: &LabeledMultigraph) -> Result<f64> {
    check_oracle_size(g.n())?;
    lambda_of_transition(g.transition_matrix()?.matrix())
}

pub fn spectral_gap(g: &LabeledMultigraph) -> Result<f64> {
    Ok(1.0 - lambda(g)?)
}

/// Outcome of checking e^{−ε}X ⪯ Y ⪯ e^{ε}X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    pub eps: f64,
    /// Smallest eigenvalue of Y − e^{−ε}X.
    pub lower_slack: f64,
    /// Smallest eigenvalue of e^{ε}X − Y.
    pub upper_slack: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_approx(x: &DMatrix<f64>, y: &DMatrix<f64>, eps: f64, tol: f64) -> Result<SpectralCertificate> {
    let n = check_square(x)?;
    if y.nrows() != n || y.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.nrows(),
        });
    }
    check_oracle_size(n)?;
    let lower_slack = min_eigenvalue(&(y - x * (-eps).exp()));
    let upper_slack = min_eigenvalue(&(x * eps.exp() - y));
    Ok(SpectralCertificate {
        eps,
        lower_slack,
        upper_slack,
        tol,
        pass: lower_slack >= -tol && upper_slack >= -tol,
    })
}

/// Smallest ε with X ≈_ε Y: the largest |ln μ| over the generalized
/// eigenvalues of (Y, X) on the range of X. Infinite when Y leaves the range
/// of X or is singular on it.
pub fn approx_parameter(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    let n = check_square(x)?;
    if y.nrows() != n || y.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.nrows(),
        });
    }
    check_oracle_size(n)?;
    let eig = sym_eigen(x);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let keep: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > PINV_THRESHOLD * top.max(1.0))
        .collect();
    if keep.is_empty() {
        return Ok(if y.amax() <= PINV_THRESHOLD { 0.0 } else { f64::INFINITY });
    }
    let r = keep.len();
    let v = DMatrix::from_fn(n, r, |i, j| eig.eigenvectors[(i, keep[j])]);
    let proj = &v * v.transpose();
    let leak = (y - &proj * y * &proj).amax();
    if leak > 1e-9 * y.amax().max(1e-300) {
        return Ok(f64::INFINITY);
    }
    let scale = DMatrix::from_diagonal(&DVector::from_fn(r, |j, _| {
        1.0 / eig.eigenvalues[keep[j]].sqrt()
    }));
    let b = &scale * v.transpose() * y * &v * &scale;
    let mus = sym_eigen(&b).eigenvalues;
    let mut worst = 0.0f64;
    for mu in mus.iter() {
        if *mu <= 0.0 {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(mu.ln().abs());
    }
    Ok(worst)
}

fn walk_matrix(g: &Multigraph) -> Result<(DMatrix<f64>, Vec<f64>)> {
    check_oracle_size(g.n())?;
    let a = g.adjacency()?;
    let deg: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    Ok((a, deg))
}

fn reachable(g: &Multigraph, from: usize) -> Vec<bool> {
    let comps = g.components();
    let mut seen = vec![false; g.n()];
    if let Some(c) = comps.iter().find(|c| c.contains(&from)) {
        for &v in c {
            seen[v] = true;
        }
    }
    seen
}

/// Expected number of steps until a walk from each vertex first reaches any
/// vertex of `targets` (zero on the targets). Solved as the dense absorbing
/// system (I − P_TT) h = 1 on the transient vertices.
pub fn absorbing_hitting_times(g: &Multigraph, targets: &[usize]) -> Result<Vec<f64>> {
    let n = g.n();
    if targets.is_empty() {
        return Err(Error::invalid("target set is empty"));
    }
    let mut is_target = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::VertexOutOfRange { vertex: t, n });
        }
        is_target[t] = true;
    }
    let mut hit = vec![false; n];
    for &t in targets {
        for (v, r) in reachable(g, t).into_iter().enumerate() {
            hit[v] |= r;
        }
    }
    if let Some(v) = hit.iter().position(|&h| !h) {
        return Err(Error::DifferentComponents { u: v, v: targets[0] });
    }
    let (a, deg) = walk_matrix(g)?;
    let transient: Vec<usize> = (0..n).filter(|&v| !is_target[v]).collect();
    let m = transient.len();
    let sys = DMatrix::from_fn(m, m, |i, j| {
        let (w, x) = (transient[i], transient[j]);
        (if i == j { 1.0 } else { 0.0 }) - a[(w, x)] / deg[w]
    });
    let h = sys
        .lu()
        .solve(&DVector::from_element(m, 1.0))
        .ok_or_else(|| Error::invalid("absorbing system is singular"))?;
    let mut out = vec![0.0; n];
    for (i, &w) in transient.iter().enumerate() {
        out[w] = h[i];
    }
    Ok(out)
}

/// Probability that a walk from each vertex reaches `u` before `v`.
pub fn absorption_probabilities(g: &Multigraph, u: usize, v: usize) -> Result<Vec<f64>> {
    let n = g.n();
    for x in [u, v] {
        if x >= n {
            return Err(Error::VertexOutOfRange { vertex: x, n });
        }
    }
    if u == v {
        return Err(Error::SameVertex { u });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected {
            components: g.components().len(),
        });
    }
    let (a, deg) = walk_matrix(g)?;
    let transient: Vec<usize> = (0..n).filter(|&w| w != u && w != v).collect();
    let m = transient.len();
    let mut out = vec![0.0; n];
    out[u] = 1.0;
    if m == 0 {
        return Ok(out);
    }
    let sys = DMatrix::from_fn(m, m, |i, j| {
        let (w, x) = (transient[i], transient[j]);
        (if i == j { 1.0 } else { 0.0 }) - a[(w, x)] / deg[w]
    });
    let rhs = DVector::from_fn(m, |i, _| a[(transient[i], u)] / deg[transient[i]]);
    let p = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::invalid("absorbing system is singular"))?;
    for (i, &w) in transient.iter().enumerate() {
        out[w] = p[i];
    }
    Ok(out)
}
