//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are always printed; exits non-zero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lapinv::dsquare::{build_chain, dsquare, ChainConfig, DegreePolicy, DerandChain, LevelExpander};
use lapinv::expander::{build_expander, ExpanderSpec};
use lapinv::families::{cycle, make_lazy, random_connected, random_rotation};
use lapinv::harness::{random_aperiodic_graph, random_orthonormal, run_harness};
use lapinv::linalg::{project_out_ones, spectral_map, symmetrize};
use lapinv::metrics::Metrics;
use lapinv::multigraph::{regularize, LabeledMultigraph};
use lapinv::oracle::{absorbing_hitting_times, absorption_probabilities, approx_parameter, check_approx, exact_pinv, lambda, lambda_of_transition};
use lapinv::pinv::{constant_approx, identity_step, product_entry, Backend, EntryOracle};
use lapinv::richardson::{boost_matrix, certified_parameter, richardson_sum, BoostConfig};
use lapinv::solver::{commute_time, escape_probabilities, hitting_time, internal_eps, solve, SolverConfig};
use lapinv::PinvApproximation;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Debug>(err: E) -> String {
    format!("{err:?}")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rotation map with at least one edge-end per vertex, n ≤ 16, d ≤ 8.
fn random_regular_labeled(r: &mut ChaCha8Rng) -> Result<LabeledMultigraph, String> {
    let n = r.gen_range(2..=16);
    let d = r.gen_range(1..=8);
    random_rotation(n, d, r.gen()).map_err(e)
}

fn exhaustive_involution(g: &LabeledMultigraph) -> Result<usize, String> {
    let mut checked = 0;
    for v in 0..g.n() {
        for i in 0..g.degree() {
            let (w, j) = g.rot(v, i).map_err(e)?;
            ensure(g.rot(w, j).map_err(e)? == (v, i), || format!("rot(rot({v},{i})) != ({v},{i})"))?;
            checked += 1;
        }
    }
    Ok(checked)
}

fn random_cayley(t: u32, c: usize, r: &mut ChaCha8Rng) -> Result<ExpanderSpec, String> {
    let gens = (0..c).map(|_| r.gen_range(0..1u32 << t)).collect();
    ExpanderSpec::from_generators(t, 1.0, gens).map_err(e)
}

// 1
fn involution_suite() -> Outcome {
    let mut r = rng(1);
    let mut maps = 0;
    let mut pairs = 0;
    for _ in 0..20 {
        let g = random_regular_labeled(&mut r)?;
        pairs += exhaustive_involution(&g)?;
        maps += 1;
        let n = r.gen_range(2..=16);
        let mg = random_connected(n, n, 3, r.gen()).map_err(e)?;
        pairs += exhaustive_involution(&mg.label().map_err(|x| format!("{x}")).or_else(|_| {
            regularize(&mg).map(|reg| reg.graph).map_err(e)
        })?)?;
        maps += 1;
    }
    for t in 2..=8 {
        for mu in [0.25, 0.1] {
            pairs += exhaustive_involution(&build_expander(t, mu).map_err(e)?.to_graph())?;
            maps += 1;
        }
    }
    // chains: d ≤ 8, c ≤ 8, levels 0..4, every (vertex, label) pair
    for trial in 0..6 {
        let n = r.gen_range(2..=16);
        let d = [2usize, 4, 8][trial % 3];
        let c = [2usize, 4, 8][(trial / 3 + trial) % 3];
        let base = random_rotation(n, d, r.gen()).map_err(e)?;
        let mut exps = Vec::new();
        let mut t = d.trailing_zeros();
        for _ in 0..4 {
            exps.push(LevelExpander::Cayley(random_cayley(t, c, &mut r)?));
            t += c.trailing_zeros();
        }
        let chain = DerandChain::new(base, exps).map_err(e)?;
        for level in 0..=4 {
            let deg = chain.degree(level).unwrap();
            for v in 0..n {
                for q in 0..deg {
                    let label = chain.unflatten_label(level, q).map_err(e)?;
                    let (w, l2) = chain.rot_chain(level, v, &label).map_err(e)?;
                    let (v2, back) = chain.rot_chain(level, w, &l2).map_err(e)?;
                    ensure(v2 == v && back == label, || format!("chain level {level} not an involution at ({v},{q})"))?;
                    pairs += 1;
                }
            }
            maps += 1;
            if level <= 2 {
                ensure(chain.materialize(level).map_err(e)?.is_involution(), || "materialized table".into())?;
            }
        }
    }
    Ok(format!("{maps} rotation maps, {pairs} (vertex,label) pairs"))
}

// 2
fn exact_square_equivalence() -> Outcome {
    let mut r = rng(2);
    for trial in 0..50 {
        let g = random_regular_labeled(&mut r)?;
        let d = g.degree();
        let sq = dsquare(&g, &LabeledMultigraph::complete_with_loops(d).map_err(e)?).map_err(e)?;
        let a = g.adjacency_counts().map_err(e)?;
        let want = &a * &a;
        let got = sq.adjacency_counts().map_err(e)?;
        ensure(sq.degree() == d * d && got == want, || format!("instance {trial}: counts differ"))?;
    }
    Ok("50/50 integer count matrices identical (denominator d^2)".into())
}

fn random_pair(r: &mut ChaCha8Rng) -> Result<(LabeledMultigraph, LabeledMultigraph, f64), String> {
    let g = random_regular_labeled(r)?;
    let d = g.degree();
    loop {
        let h = if d.is_power_of_two() && d >= 4 && r.gen_bool(0.5) {
            random_cayley(d.trailing_zeros(), r.gen_range(1..=8), r)?.to_graph()
        } else {
            random_rotation(d, r.gen_range(1..=6), r.gen()).map_err(e)?
        };
        let lh = lambda(&h).map_err(e)?;
        if d == 1 || lh < 1.0 - 1e-6 {
            return Ok((g, h, lh));
        }
    }
}

// 3
fn dsquare_lambda_bound() -> Outcome {
    let mut r = rng(3);
    let mut worst = f64::INFINITY;
    for trial in 0..50 {
        let (g, h, lh) = random_pair(&mut r)?;
        let lg = lambda(&g).map_err(e)?;
        let ls = lambda(&dsquare(&g, &h).map_err(e)?).map_err(e)?;
        let margin = lg * lg + lh + 1e-9 - ls;
        worst = worst.min(margin);
        ensure(margin >= 0.0, || format!("instance {trial}: {ls} > {lg}^2 + {lh}"))?;
    }
    Ok(format!("50 pairs, min margin {worst:.3e}"))
}

// 4
fn dsquare_certificate() -> Outcome {
    let mut r = rng(3);
    let mut worst = f64::INFINITY;
    for trial in 0..50 {
        let (g, h, lh) = random_pair(&mut r)?;
        let m = g.transition_matrix().map_err(e)?.into_inner();
        let n = g.n();
        let mut sq = DMatrix::identity(n, n) - &m * &m;
        symmetrize(&mut sq);
        let ds = dsquare(&g, &h).map_err(e)?.transition_matrix().map_err(e)?.normalized_laplacian();
        let eps = (1.0 / (1.0 - lh)).ln();
        let c = check_approx(&sq, &ds, eps, 1e-9).map_err(e)?;
        worst = worst.min(c.lower_slack.min(c.upper_slack));
        ensure(c.pass, || format!("instance {trial}: slacks {} {}", c.lower_slack, c.upper_slack))?;
    }
    Ok(format!("50 pairs, min slack {worst:.3e}"))
}

// 5
fn identity_step_check() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let g = random_aperiodic_graph(&mut r, 32).map_err(e)?;
        let m = g.transition_matrix().map_err(e)?;
        let lp = exact_pinv(&m.normalized_laplacian()).map_err(e)?;
        worst = worst.max((identity_step(&m).map_err(e)? - lp).amax());
    }
    ensure(worst <= 1e-8, || format!("max error {worst:e}"))?;
    Ok(format!("40 graphs, max error {worst:.3e}"))
}

// 6
fn end_to_end_constant() -> Outcome {
    let mut r = rng(6);
    let mut worst_exact = f64::INFINITY;
    for trial in 0..10 {
        let n = r.gen_range(4..=16);
        let g = random_connected(n, n / 2, 2, r.gen()).map_err(e)?;
        let base = regularize(&g).map_err(e)?.graph;
        let lp = exact_pinv(&base.transition_matrix().map_err(e)?.normalized_laplacian()).map_err(e)?;
        let chain = DerandChain::exact_squaring(base, 12).map_err(e)?;
        let z = constant_approx(Arc::new(chain), Backend::Dense).map_err(e)?;
        let c = check_approx(&z.to_dense().map_err(e)?, &lp, 1.5f64.ln() + 1e-6, 1e-9).map_err(e)?;
        worst_exact = worst_exact.min(c.lower_slack.min(c.upper_slack));
        ensure(c.pass, || format!("exact chain instance {trial} (n={n}): slacks {} {}", c.lower_slack, c.upper_slack))?;
    }

    let mu = 1.0 / 16.0;
    let k = 4;
    let base = regularize(&cycle(8).map_err(e)?).map_err(e)?.graph;
    let lp = exact_pinv(&base.transition_matrix().map_err(e)?.normalized_laplacian()).map_err(e)?;
    let cfg = ChainConfig {
        mu,
        k,
        degrees: DegreePolicy::PerLevel,
    };
    let chain = build_chain(base, &cfg).map_err(e)?.with_dense_cap(1 << 21);
    let degrees: Vec<_> = chain.levels().iter().map(|l| l.c.unwrap_or(0)).collect();
    let z = constant_approx(Arc::new(chain), Backend::Dense).map_err(e)?;
    let cert = z.certificate.clone().ok_or("no certificate")?;
    let zd = z.to_dense().map_err(e)?;
    let loose = k as f64 * (1.0 / (1.0 - mu)).ln() + cert.eps_final;
    for (label, delta) in [("tight", cert.delta), ("k ln(1/(1-mu)) + eps_k", loose)] {
        let c = check_approx(&zd, &lp, delta, 1e-9).map_err(e)?;
        ensure(c.pass, || format!("derandomized chain, {label} delta={delta}: slacks {} {}", c.lower_slack, c.upper_slack))?;
    }
    let measured = approx_parameter(&lp, &zd).map_err(e)?;
    Ok(format!(
        "exact k=12: 10 graphs, min slack {worst_exact:.2e}; derandomized c={degrees:?}: delta={:.4}, loose={loose:.4}, measured {measured:.4}",
        cert.delta
    ))
}

/// L̃⁺ with approx_parameter exactly α: spectrum of Q pushed to e^{±α}.
fn extreme_approx(lp: &DMatrix<f64>, alpha: f64, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = lp.nrows();
    let u = random_orthonormal(n, n, r);
    let s = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| if i % 2 == 0 { alpha.exp() } else { (-alpha).exp() }));
    let root = spectral_map(lp, |l| l.max(0.0).sqrt());
    let mut y = &root * (&u * s * u.transpose()) * &root;
    symmetrize(&mut y);
    y
}

// 7
fn richardson_decay() -> Outcome {
    let mut r = rng(7);
    let alpha = 0.4;
    let mut worst_ratio = 0.0f64;
    for _ in 0..10 {
        let g = random_connected(8, 6, 3, r.gen()).map_err(e)?;
        let l = g.laplacian().map_err(e)?;
        let lp = exact_pinv(&l).map_err(e)?;
        let approx = PinvApproximation::dense(extreme_approx(&lp, alpha, &mut r), alpha);
        for k in 1..=8 {
            let cfg = BoostConfig::with_iterations(alpha, k).map_err(e)?;
            let out = boost_matrix(&l, &approx, &cfg).map_err(e)?.to_dense().map_err(e)?;
            let measured = approx_parameter(&lp, &out).map_err(e)?;
            let bound = certified_parameter(alpha, k);
            worst_ratio = worst_ratio.max(measured / bound);
            ensure(measured <= bound, || format!("k={k}: measured {measured} > {bound}"))?;
        }
    }
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let n = r.gen_range(2..=12);
        let eps = r.gen_range(0.05..0.95);
        let u = random_orthonormal(n, n, &mut r);
        let p = &u * DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| r.gen_range(0.2..5.0))) * u.transpose();
        let p_half_inv = spectral_map(&p, |x| 1.0 / x.sqrt());
        let w = random_orthonormal(n, n, &mut r);
        let q = &w * DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| r.gen_range(1.0 - eps..=1.0))) * w.transpose();
        let mut a = &p_half_inv * q * &p_half_inv;
        symmetrize(&mut a);
        let a_inv = a.clone().try_inverse().ok_or("singular A")?;
        for k in 1..=6 {
            let pk = richardson_sum(&a, &p, k);
            let low = 1.0 - eps.powi(k as i32 + 1) / (1.0 - eps);
            let s1 = lapinv::linalg::min_eigenvalue(&(&pk - &a_inv * low));
            let s2 = lapinv::linalg::min_eigenvalue(&(&a_inv - &pk));
            let scale = a_inv.amax();
            worst = worst.min(s1.min(s2) / scale);
            ensure(s1 >= -1e-9 * scale && s2 >= -1e-9 * scale, || format!("sandwich slack {s1} {s2}"))?;
        }
    }
    Ok(format!("max measured/bound {worst_ratio:.3}; sandwich min relative slack {worst:.2e}"))
}

// 8
fn solve_accuracy() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let n = r.gen_range(2..=32);
        let g = random_connected(n, r.gen_range(0..=n), 3, r.gen()).map_err(e)?;
        let lp = exact_pinv(&g.laplacian().map_err(e)?).map_err(e)?;
        let mut b = DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0));
        project_out_ones(&mut b);
        let exact = &lp * &b;
        for eps in [1e-2, 1e-4, 1e-6] {
            let rep = solve(&g, &b, eps, &SolverConfig::default()).map_err(e)?;
            let f = regularize(&g).map_err(e)?.f;
            let want_internal = (eps / (4.0 * (f * f) as f64 * (n * n) as f64)).powi(2) / 2.0;
            ensure(rep.eps_internal == want_internal && rep.eps_internal == internal_eps(eps, f, n), || {
                format!("eps_internal {} != {want_internal}", rep.eps_internal)
            })?;
            let err = (DVector::from_vec(rep.x) - &exact).norm() / exact.norm();
            worst = worst.max(err / eps);
            ensure(err <= eps, || format!("instance {trial}, eps {eps}: relative error {err}"))?;
        }
    }
    Ok(format!("30 solves, max error/eps {worst:.2e}"))
}

// 9
fn walk_quantities() -> Outcome {
    let cfg = SolverConfig::default();
    let edge = lapinv::Multigraph::from_pairs(2, &[(0, 1)]).map_err(e)?;
    let h = hitting_time(&edge, 0, 1, 1e-3, &cfg).map_err(e)?.value.unwrap();
    ensure((h - 1.0).abs() <= 1e-9, || format!("edge H = {h}"))?;
    let c = commute_time(&edge, 0, 1, 1e-3, &cfg).map_err(e)?.value.unwrap();
    ensure((c - 2.0).abs() <= 1e-9, || format!("edge C = {c}"))?;
    let path = lapinv::families::path(3).map_err(e)?;
    let p = escape_probabilities(&path, 0, 2, 1e-3, &cfg).map_err(e)?.p.unwrap();
    ensure((p[1] - 0.5).abs() <= 1e-9 && p[0] == 1.0 && p[2] == 0.0, || format!("path escape {p:?}"))?;

    let mut r = rng(9);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n = r.gen_range(3..=12);
        let g = random_connected(n, r.gen_range(0..=n), 3, r.gen()).map_err(e)?;
        let u = r.gen_range(0..n);
        let v = (u + r.gen_range(1..n)) % n;
        let eps = [1e-2, 1e-4, 1e-6][trial % 3];
        let huv = absorbing_hitting_times(&g, &[v]).map_err(e)?[u];
        let hvu = absorbing_hitting_times(&g, &[u]).map_err(e)?[v];
        let got_h = hitting_time(&g, u, v, eps, &cfg).map_err(e)?.value.unwrap();
        let got_c = commute_time(&g, u, v, eps, &cfg).map_err(e)?.value.unwrap();
        let truth_p = absorption_probabilities(&g, u, v).map_err(e)?;
        let got_p = escape_probabilities(&g, u, v, eps, &cfg).map_err(e)?.p.unwrap();
        let pe = got_p.iter().zip(&truth_p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let errs = [(got_h - huv).abs(), (got_c - huv - hvu).abs(), pe];
        worst = worst.max(errs.iter().fold(0.0f64, |a, &b| a.max(b)) / eps);
        ensure(errs.iter().all(|&x| x <= eps), || format!("instance {trial}: errors {errs:?} at eps {eps}"))?;
    }
    Ok(format!("fixtures exact; 20 instances, max error/eps {worst:.2e}"))
}

fn compare_backends(chain: DerandChain) -> Result<f64, String> {
    let n = chain.n();
    let shared = Arc::new(chain);
    let dense = constant_approx(shared.clone(), Backend::Dense).map_err(e)?.to_dense().map_err(e)?;
    let lazy = constant_approx(shared, Backend::Entrywise).map_err(e)?;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let diff = (lazy.entry(i, j).map_err(e)? - dense[(i, j)]).abs();
            ensure(diff.is_finite(), || format!("non-finite entry ({i},{j})"))?;
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

// 10
fn backend_equivalence() -> Outcome {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    let mut cases = 0;
    let lazy_cycle = |n| regularize(&cycle(n).unwrap()).unwrap().graph;
    // exact squaring, n = 4, k = 4
    worst = worst.max(compare_backends(DerandChain::exact_squaring(lazy_cycle(4), 4).map_err(e)?)?);
    cases += 1;
    // derandomized chains with explicit generators
    for &(n, k, c) in &[(8usize, 3usize, 2usize), (8, 2, 4), (16, 2, 2), (16, 1, 4), (4, 4, 2)] {
        let base = make_lazy(&random_rotation(n, 2, r.gen()).map_err(e)?).map_err(e)?;
        let base = if base.components().map_err(e)?.len() == 1 { base } else { lazy_cycle(n) };
        let mut exps = Vec::new();
        let mut t = base.degree().trailing_zeros();
        for _ in 0..k {
            exps.push(LevelExpander::Cayley(random_cayley(t, c, &mut r)?));
            t += c.trailing_zeros();
        }
        worst = worst.max(compare_backends(DerandChain::new(base, exps).map_err(e)?)?);
        cases += 1;
    }
    ensure(worst <= 1e-10, || format!("max entry difference {worst:e}"))?;
    Ok(format!("{cases} chains, max entry difference {worst:.2e}"))
}

// 11
fn space_proxies() -> Outcome {
    let base = regularize(&cycle(6).map_err(e)?).map_err(e)?.graph;
    let mut r = rng(11);
    let mut exps = Vec::new();
    let mut t = 2;
    for _ in 0..5 {
        exps.push(LevelExpander::Cayley(random_cayley(t, 4, &mut r)?));
        t += 2;
    }
    let chain = DerandChain::new(base, exps).map_err(e)?;
    for level in 0..=5 {
        chain.metrics().reset();
        let q = r.gen_range(0..chain.degree(level).unwrap());
        let label = chain.unflatten_label(level, q).map_err(e)?;
        chain.rot_chain(level, 3, &label).map_err(e)?;
        let s = chain.metrics().snapshot();
        ensure(s.peak_recursion_depth == level as u64 && s.rot_base_evals == 1 << level, || {
            format!("level {level}: depth {} base evals {}", s.peak_recursion_depth, s.rot_base_evals)
        })?;
    }
    let mats: Vec<DMatrix<f64>> = (0..20).map(|i| DMatrix::from_fn(3, 3, |a, b| ((a + 2 * b + i) % 5) as f64)).collect();
    for m in 1..=20usize {
        let factors: Vec<&dyn EntryOracle> = mats[..m].iter().map(|x| x as &dyn EntryOracle).collect();
        let metrics = Metrics::new();
        product_entry(&factors, 0, 1, &metrics).map_err(e)?;
        let want = (m as f64).log2().ceil() as u64;
        let got = metrics.snapshot().peak_recursion_depth;
        ensure(got == want, || format!("m={m}: depth {got} != {want}"))?;
    }
    Ok("rot_chain levels 0..5 and product_entry m=1..20 exact".into())
}

// 12
fn appendix_harness() -> Outcome {
    let rep = run_harness(12, 100).map_err(e)?;
    let failed: Vec<_> = rep.properties.iter().filter(|p| !p.pass).map(|p| p.name.clone()).collect();
    ensure(failed.is_empty(), || format!("failed: {failed:?}"))?;
    Ok(format!("{} properties x 100 instances", rep.properties.len()))
}

// 13
fn expander_certificates() -> Outcome {
    let mut worst = 0.0f64;
    let mut max_c = 0;
    for t in 2..=8 {
        for mu in [0.25, 0.1, 1.0 / 16.0] {
            let spec = build_expander(t, mu).map_err(e)?;
            ensure(spec.verified_bias() <= mu, || format!("t={t} mu={mu}: bias {}", spec.verified_bias()))?;
            let lam = lambda_of_transition(spec.to_graph().transition_matrix().map_err(e)?.matrix()).map_err(e)?;
            worst = worst.max((lam - spec.verified_bias()).abs());
            max_c = max_c.max(spec.c());
        }
    }
    ensure(worst <= 1e-9, || format!("|lambda - bias| up to {worst:e}"))?;
    Ok(format!("21 specs, max |lambda - bias| {worst:.2e}, max c {max_c}"))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "involution suite", limit: Duration::from_secs(10), run: involution_suite },
        Criterion { id: 2, name: "exact-square equivalence", limit: Duration::from_secs(10), run: exact_square_equivalence },
        Criterion { id: 3, name: "derandomized square lambda bound", limit: Duration::from_secs(30), run: dsquare_lambda_bound },
        Criterion { id: 4, name: "derandomized square certificate", limit: Duration::from_secs(30), run: dsquare_certificate },
        Criterion { id: 5, name: "pseudoinverse identity step", limit: Duration::from_secs(10), run: identity_step_check },
        Criterion { id: 6, name: "constant approximation end to end", limit: Duration::from_secs(60), run: end_to_end_constant },
        Criterion { id: 7, name: "Richardson decay and sandwich", limit: Duration::from_secs(30), run: richardson_decay },
        Criterion { id: 8, name: "Laplacian solve accuracy", limit: Duration::from_secs(60), run: solve_accuracy },
        Criterion { id: 9, name: "hitting, commute and escape", limit: Duration::from_secs(30), run: walk_quantities },
        Criterion { id: 10, name: "dense vs entrywise backend", limit: Duration::from_secs(60), run: backend_equivalence },
        Criterion { id: 11, name: "space proxies", limit: Duration::from_secs(5), run: space_proxies },
        Criterion { id: 12, name: "property harness", limit: Duration::from_secs(60), run: appendix_harness },
        Criterion { id: 13, name: "expander certificates", limit: Duration::from_secs(30), run: expander_certificates },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {}: {} ({:.2}s, limit {}s)",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
