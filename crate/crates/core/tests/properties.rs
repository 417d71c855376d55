use nalgebra::DVector;
use proptest::prelude::*;

use lapinv::expander::bias;
use lapinv::families::random_connected;
use lapinv::io::{emit_graph, emit_vector, parse_graph_str, parse_vector_str};
use lapinv::linalg::project_out_ones;
use lapinv::oracle::{exact_pinv, lambda};
use lapinv::solver::{escape_probabilities, solve, SolverConfig};
use lapinv::{regularize, ChainLabel, DerandChain, ExpanderSpec, LevelExpander, Multigraph};

fn graph_strategy() -> impl Strategy<Value = Multigraph> {
    (1usize..12, proptest::collection::vec((0usize..12, 0usize..12, 1u64..4), 0..20)).prop_map(|(n, raw)| {
        let edges: Vec<_> = raw.into_iter().map(|(u, v, m)| (u % n, v % n, m)).collect();
        Multigraph::from_edges(n, edges).unwrap()
    })
}

fn connected_strategy() -> impl Strategy<Value = Multigraph> {
    (2usize..14, 0usize..10, any::<u64>()).prop_map(|(n, extra, seed)| random_connected(n, extra, 3, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regularization_preserves_laplacian(g in graph_strategy()) {
        prop_assume!(g.max_degree() > 0);
        let reg = regularize(&g).unwrap();
        prop_assert!(reg.f.is_power_of_two() && reg.f >= 2 * g.max_degree());
        prop_assert!(reg.graph.is_half_lazy());
        prop_assert!(reg.graph.is_involution());
        let scaled = reg.normalized_laplacian().unwrap() * reg.f as f64;
        prop_assert!((scaled - g.laplacian().unwrap()).amax() < 1e-12);
    }

    #[test]
    fn edge_list_round_trip(g in graph_strategy()) {
        prop_assert_eq!(parse_graph_str(&emit_graph(&g)).unwrap(), g);
    }

    #[test]
    fn vector_round_trip(x in proptest::collection::vec(-1e6f64..1e6, 0..30)) {
        let back = parse_vector_str(&emit_vector(&x)).unwrap();
        prop_assert_eq!(back.as_slice(), &x[..]);
    }

    #[test]
    fn chain_labels_round_trip(seed in any::<u64>(), q in 0u64..1024) {
        let base = regularize(&random_connected(5, 2, 1, seed).unwrap()).unwrap().graph;
        let t = base.degree().trailing_zeros();
        let gens = vec![1, 2, 3, 0];
        let exps = vec![
            LevelExpander::Cayley(ExpanderSpec::from_generators(t, 1.0, gens.clone()).unwrap()),
            LevelExpander::Cayley(ExpanderSpec::from_generators(t + 2, 1.0, gens).unwrap()),
        ];
        let chain = DerandChain::new(base, exps).unwrap();
        let q = q % chain.degree(2).unwrap();
        let label = chain.unflatten_label(2, q).unwrap();
        prop_assert_eq!(chain.flatten_label(&label).unwrap(), q);
        let (rest, top) = label.split().unwrap();
        prop_assert_eq!(rest.join(top), label.clone());
        prop_assert_eq!(label.level(), 2);
        prop_assert_eq!(ChainLabel::base(3).level(), 0);
    }

    #[test]
    fn cayley_lambda_is_bias(t in 1u32..7, gens in proptest::collection::vec(0u32..64, 1..12)) {
        let gens: Vec<u32> = gens.into_iter().map(|g| g % (1 << t)).collect();
        let spec = ExpanderSpec::from_generators(t, 1.0, gens.clone()).unwrap();
        let lam = lambda(&spec.to_graph()).unwrap();
        prop_assert!((lam - bias(t, &gens)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_deterministic_and_accurate(g in connected_strategy(), seed in any::<u32>()) {
        let n = g.n();
        let mut b = DVector::from_fn(n, |i, _| ((i as u64 * 2654435761 + seed as u64) % 1000) as f64 / 500.0 - 1.0);
        project_out_ones(&mut b);
        let cfg = SolverConfig::default();
        let a = solve(&g, &b, 1e-5, &cfg).unwrap();
        let again = solve(&g, &b, 1e-5, &cfg).unwrap();
        prop_assert_eq!(&a, &again);
        let exact = exact_pinv(&g.laplacian().unwrap()).unwrap() * &b;
        let err = (DVector::from_vec(a.x.clone()) - &exact).norm();
        prop_assert!(err <= 1e-5 * exact.norm() + 1e-300);
        // gamma bounds bracket the spectrum of the padded normalized Laplacian
        let reg = regularize(&g).unwrap();
        let mut eig: Vec<f64> = reg.normalized_laplacian().unwrap().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        prop_assert!(a.gamma2_lower <= eig[1] && eig[n - 1] <= a.gamman_upper);
    }

    #[test]
    fn escape_vector_is_a_probability(g in connected_strategy(), u in 0usize..14, dv in 1usize..14) {
        let n = g.n();
        let u = u % n;
        let v = (u + 1 + dv % (n - 1)) % n;
        prop_assume!(u != v);
        let p = escape_probabilities(&g, u, v, 1e-4, &SolverConfig::default()).unwrap().p.unwrap();
        prop_assert_eq!(p[u], 1.0);
        prop_assert_eq!(p[v], 0.0);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}
