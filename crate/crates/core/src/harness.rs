//! Randomized property checks behind `lapinv verify`.
//!
//! Every property is evaluated on `instances` seeded instances and reports
//! the worst margin seen (non-negative means the property held everywhere).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::families::{make_lazy, random_connected, random_rotation};
use crate::linalg::{centering, project_out_ones, spectral_map, symmetrize};
use crate::multigraph::LabeledMultigraph;
use crate::oracle::{check_approx, exact_pinv, lambda, DEFAULT_TOL};
use crate::pinv::identity_step;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    /// Smallest margin over all instances; negative on a failure.
    pub worst_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub seed: u64,
    pub instances: usize,
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

/// n×r matrix with orthonormal columns.
pub fn random_orthonormal(n: usize, r: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0));
        let qr = a.qr();
        let rdiag = qr.r().diagonal();
        if rdiag.iter().all(|x: &f64| x.abs() > 1e-3) {
            return qr.q();
        }
    }
}

/// Rank-r PSD matrix with nonzero eigenvalues in [1/2, 2].
pub fn random_psd(n: usize, r: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let v = random_orthonormal(n, r, rng);
    let s = DMatrix::from_diagonal(&DVector::from_fn(r, |_, _| rng.gen_range(0.5..2.0)));
    let mut x = &v * s * v.transpose();
    symmetrize(&mut x);
    x
}

/// Y = X^{1/2} Q X^{1/2} with the spectrum of Q inside (e^{−ε}, e^{ε}), so
/// Y ≈_ε X with the same kernel.
pub fn random_approx(x: &DMatrix<f64>, eps: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = x.nrows();
    let u = random_orthonormal(n, n, rng);
    let s = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| (rng.gen_range(-eps..eps)).exp()));
    let q = &u * s * u.transpose();
    let root = spectral_map(x, |l| l.max(0.0).sqrt());
    let mut y = &root * q * &root;
    symmetrize(&mut y);
    y
}

fn approx_margin(x: &DMatrix<f64>, y: &DMatrix<f64>, eps: f64) -> Result<f64> {
    let c = check_approx(x, y, eps, DEFAULT_TOL)?;
    Ok(c.lower_slack.min(c.upper_slack) + DEFAULT_TOL)
}

struct Runner {
    rng: ChaCha8Rng,
    instances: usize,
    out: Vec<PropertyResult>,
}

impl Runner {
    fn run(&mut self, name: &str, mut case: impl FnMut(&mut ChaCha8Rng) -> Result<f64>) -> Result<()> {
        let mut worst = f64::INFINITY;
        let mut failures = 0;
        for _ in 0..self.instances {
            let m = case(&mut self.rng)?;
            if m.is_nan() || m < 0.0 {
                failures += 1;
            }
            worst = worst.min(m);
        }
        self.out.push(PropertyResult {
            name: name.to_string(),
            instances: self.instances,
            failures,
            worst_margin: worst,
            pass: failures == 0,
        });
        Ok(())
    }
}

fn psd_pair(rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>, f64) {
    let n = rng.gen_range(2..=8);
    let r = rng.gen_range(1..=n);
    let eps = rng.gen_range(0.01..1.0);
    let x = random_psd(n, r, rng);
    let y = random_approx(&x, eps, rng);
    (x, y, eps)
}

/// Connected 1/2-lazy regular graph with a shuffled labeling.
pub fn random_lazy_graph(rng: &mut impl Rng) -> Result<LabeledMultigraph> {
    loop {
        let n = rng.gen_range(3..=12);
        let d = rng.gen_range(2..=4);
        let g = make_lazy(&random_rotation(n, d, rng.gen())?)?;
        if g.components()?.len() == 1 {
            return Ok(g);
        }
    }
}

/// Connected aperiodic regular graph (no laziness imposed).
pub fn random_aperiodic_graph(rng: &mut impl Rng, max_n: usize) -> Result<LabeledMultigraph> {
    loop {
        let n = rng.gen_range(3..=max_n);
        let d = rng.gen_range(3..=5);
        let g = random_rotation(n, d, rng.gen())?;
        if identity_step(&g.transition_matrix()?).is_ok() {
            return Ok(g);
        }
    }
}

fn energy(l: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(l * x)).max(0.0).sqrt()
}

pub fn run_harness(seed: u64, instances: usize) -> Result<HarnessReport> {
    let mut r = Runner {
        rng: ChaCha8Rng::seed_from_u64(seed),
        instances,
        out: Vec::new(),
    };

    r.run("approx_symmetry", |rng| {
        let (x, y, eps) = psd_pair(rng);
        approx_margin(&y, &x, eps)
    })?;
    r.run("approx_scaling", |rng| {
        let (x, y, eps) = psd_pair(rng);
        let c = rng.gen_range(0.0..10.0);
        approx_margin(&(x * c), &(y * c), eps)
    })?;
    r.run("approx_add_common", |rng| {
        let (x, y, eps) = psd_pair(rng);
        let n = x.nrows();
        let w = random_psd(n, rng.gen_range(1..=n), rng);
        approx_margin(&(x + &w), &(y + &w), eps)
    })?;
    r.run("approx_add_pairs", |rng| {
        let (x, y, eps) = psd_pair(rng);
        let n = x.nrows();
        let w = random_psd(n, rng.gen_range(1..=n), rng);
        let z = random_approx(&w, eps, rng);
        approx_margin(&(x + w), &(y + z), eps)
    })?;
    r.run("approx_transitivity", |rng| {
        let (x, y, e1) = psd_pair(rng);
        let e2 = rng.gen_range(0.01..1.0);
        let z = random_approx(&y, e2, rng);
        approx_margin(&x, &z, e1 + e2)
    })?;
    r.run("approx_conjugation", |rng| {
        let (x, y, eps) = psd_pair(rng);
        let m = DMatrix::from_fn(x.nrows(), rng.gen_range(1..=8), |_, _| rng.gen_range(-1.0..1.0));
        let mut a = m.transpose() * x * &m;
        let mut b = m.transpose() * y * &m;
        symmetrize(&mut a);
        symmetrize(&mut b);
        approx_margin(&a, &b, eps)
    })?;
    r.run("approx_pseudoinverse", |rng| {
        let (x, y, eps) = psd_pair(rng);
        approx_margin(&exact_pinv(&x)?, &exact_pinv(&y)?, eps)
    })?;
    r.run("approx_tensor_identity", |rng| {
        let (x, y, eps) = psd_pair(rng);
        let m = rng.gen_range(1..=3);
        let id = DMatrix::<f64>::identity(m, m);
        approx_margin(&id.kronecker(&x), &id.kronecker(&y), eps)
    })?;
    r.run("lazy_gap_certifies", |rng| {
        let g = random_lazy_graph(rng)?;
        let lam = lambda(&g)?;
        let l = g.transition_matrix()?.normalized_laplacian();
        approx_margin(&l, &centering(g.n()), (1.0 / (1.0 - lam)).ln() + 1e-12)
    })?;
    r.run("lazy_gap_is_tight", |rng| {
        let g = random_lazy_graph(rng)?;
        let lam = lambda(&g)?;
        let l = g.transition_matrix()?.normalized_laplacian();
        let c = check_approx(&l, &centering(g.n()), (1.0 / (1.0 - 0.95 * lam)).ln(), DEFAULT_TOL)?;
        // the check must fail: report how far below −tol the slack went
        Ok(-(c.lower_slack.min(c.upper_slack) + DEFAULT_TOL))
    })?;
    r.run("energy_error_bound", |rng| {
        let n = rng.gen_range(2..=12);
        let g = random_connected(n, rng.gen_range(0..n), 3, rng.gen())?;
        let l = g.laplacian()?;
        let lp = exact_pinv(&l)?;
        let eps = rng.gen_range(0.001..2f64.ln());
        let approx = random_approx(&lp, eps, rng);
        let mut b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        project_out_ones(&mut b);
        let exact = &lp * &b;
        let err = energy(&l, &(&exact - approx * &b));
        let bound = (2.0 * eps).sqrt() * energy(&l, &exact);
        Ok(bound * (1.0 + 1e-9) + 1e-12 - err)
    })?;
    r.run("penrose_axioms", |rng| {
        let n = rng.gen_range(2..=10);
        let x = random_psd(n, rng.gen_range(1..=n), rng);
        let p = exact_pinv(&x)?;
        let xp = &x * &p;
        let px = &p * &x;
        let errs = [
            (&xp * &x - &x).amax(),
            (&px * &p - &p).amax(),
            (xp.transpose() - &xp).amax(),
            (px.transpose() - &px).amax(),
        ];
        Ok(1e-9 - errs.iter().fold(0.0f64, |a, &b| a.max(b)))
    })?;
    r.run("identity_step", |rng| {
        let g = random_aperiodic_graph(rng, 32)?;
        let m = g.transition_matrix()?;
        let lp = exact_pinv(&m.normalized_laplacian())?;
        Ok(1e-8 - (identity_step(&m)? - lp).amax())
    })?;
    r.run("energy_norm_bounds", |rng| {
        let n = rng.gen_range(2..=12);
        let g = random_connected(n, rng.gen_range(0..n), 3, rng.gen())?;
        let l = g.laplacian()?;
        let eig = crate::linalg::sym_eigen(&l).eigenvalues;
        let mut sorted: Vec<f64> = eig.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        let (g2, gn) = (sorted[1], sorted[n - 1]);
        let mut x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        project_out_ones(&mut x);
        let e = x.dot(&(&l * &x));
        let s = x.norm_squared();
        let tol = 1e-9 * gn * s;
        Ok((e - g2 * s + tol).min(gn * s - e + tol))
    })?;
    r.run("solution_residual", |rng| {
        let n = rng.gen_range(2..=12);
        let g = random_connected(n, rng.gen_range(0..n), 3, rng.gen())?;
        let l = g.laplacian()?;
        let mut b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        project_out_ones(&mut b);
        let x = exact_pinv(&l)? * &b;
        Ok(1e-9 - (&l * x - b).amax())
    })?;

    let pass = r.out.iter().all(|p| p.pass);
    Ok(HarnessReport {
        seed,
        instances,
        properties: r.out,
        pass,
    })
}
