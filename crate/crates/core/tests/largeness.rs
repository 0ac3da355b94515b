use noflab_core::combinatorics::{
    graph_from_protocol, hd_premise_met, hd_witness, largeness_check, mean_common_neighbors, BipartiteGraph,
};
use noflab_core::functions::{make_two_party, LiftedFn, Params, TwoPartyKind};
use noflab_core::nof::{broadcast_z, disj3_broadcast_all, Disj3Target, NofTarget, OutputRule, Transcript};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random graph whose edge count meets `2·√|L|·|R|`.
fn premise_graph(seed: u64) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let l = rng.random_range(4..=128usize);
        let r = rng.random_range(1..=96usize);
        let floor = (2.0 / (l as f64).sqrt()).min(1.0);
        let p = rng.random_range(floor..=1.0);
        let g = BipartiteGraph::from_fn((0..l as u64).collect(), (0..r as u64).collect(), |_, _| rng.random_bool(p));
        if largeness_check(&g).premise_met {
            return g;
        }
    }
}

#[test]
fn lemma_conclusion_on_premise_graphs() {
    for seed in 0..100 {
        let g = premise_graph(seed);
        let rep = largeness_check(&g);
        assert!(rep.premise_met && rep.conclusion_met, "seed {seed}: {rep:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn mean_equals_pair_average(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, r) = (rng.random_range(2..=64usize), rng.random_range(1..=64usize));
        let p: f64 = rng.random();
        let g = BipartiteGraph::from_fn((0..l as u64).collect(), (0..r as u64).collect(), |_, _| rng.random_bool(p));
        let mut total = 0u64;
        for a in 0..l {
            for b in 0..l {
                if a != b {
                    total += g.common(a, b);
                }
            }
        }
        let brute = total as f64 / (l * (l - 1)) as f64;
        prop_assert!((mean_common_neighbors(&g).unwrap() - brute).abs() < 1e-9);
    }

    #[test]
    fn hypercube_witness_exists(seed in any::<u64>(), n in 4u32..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rng.random_range(8..=80usize);
        let p = rng.random_range(0.7..=1.0);
        let g = BipartiteGraph::from_fn((0..1u64 << n).collect(), (0..r as u64).collect(), |_, _| rng.random_bool(p));
        prop_assume!(hd_premise_met(&g, 0.05).unwrap());
        let w = hd_witness(&g, 0.05).unwrap().unwrap();
        prop_assert!(10 * w.distance >= n && w.common as f64 >= w.threshold);
        prop_assert_eq!(g.common(w.a as usize, w.b as usize), w.common);
    }
}

#[test]
fn protocol_graphs() {
    let params = Params::new(2, 1, 2).unwrap();
    let lf = LiftedFn::new(make_two_party(TwoPartyKind::Eq, 2, None).unwrap(), params).unwrap();
    let p = broadcast_z(lf.domain(), OutputRule::Constant { value: true }).unwrap();
    let g = graph_from_protocol(&p, &lf, &Transcript::parse_for(&p, "0").unwrap(), None).unwrap();
    assert_eq!((g.left_len(), g.right_len(), g.edge_count()), (2, 4, 4));
    assert_eq!((g.left_degree(0), g.left_degree(1)), (4, 0));
    let wrong = Transcript { bits: vec![], boundaries: vec![] };
    assert!(graph_from_protocol(&p, &lf, &wrong, None).is_err());

    let target = Disj3Target::new(4).unwrap();
    let all = disj3_broadcast_all(4).unwrap();
    let t = Transcript::parse_for(&all, "0000").unwrap();
    let d0 = |xs: &[u64]| xs[0] & xs[1] == 0;
    let g = graph_from_protocol(&all, &target, &t, Some(&d0)).unwrap();
    assert_eq!(g.right_len(), 81);
    assert_eq!(g.edge_count(), 81);
}
