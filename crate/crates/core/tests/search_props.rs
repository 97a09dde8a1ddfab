use proptest::prelude::*;

use warmstart::mcts::{puct_value, select_child, NodeStats, SearchConfig, SearchTree, SelectionMode, UniformEvaluator};
use warmstart::rng::substream;
use warmstart::warmstart::{
    leaf_value, make_enhanced_searcher, rave_beta, schedule_weight, uct_rave_value, PlainArm, RaveArm,
};
use warmstart::{EnhancementKind, GameKind, GameState, Move};

fn random_position(kind: GameKind, plies: usize, seed: u64) -> GameState {
    use rand::seq::SliceRandom;
    let mut rng = substream(seed, "pos", &[]);
    let mut s = GameState::new(kind, 6, 4).unwrap();
    for _ in 0..plies {
        let moves = s.legal_moves();
        match moves.choose(&mut rng) {
            Some(&m) if !s.apply_move(m).unwrap().is_terminal() => s = s.apply_move(m).unwrap(),
            _ => break,
        }
    }
    s
}

fn any_kind() -> impl Strategy<Value = GameKind> {
    prop_oneof![
        Just(GameKind::Othello),
        Just(GameKind::ConnectFour),
        Just(GameKind::Gobang)
    ]
}

fn any_enhancement() -> impl Strategy<Value = EnhancementKind> {
    prop_oneof![
        Just(EnhancementKind::Baseline),
        Just(EnhancementKind::Rollout),
        Just(EnhancementKind::Rave),
        Just(EnhancementKind::RoRa),
        Just(EnhancementKind::WRo),
        Just(EnhancementKind::WRoRa),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_falls_with_visits(n in 0u32..100_000, k in 1.0f64..1e4) {
        let a = rave_beta(n, k);
        let b = rave_beta(n + 1, k);
        prop_assert!(b < a && b > 0.0 && a <= 1.0);
    }

    #[test]
    fn schedule_weight_is_affine(ip in 1usize..200, i in 0usize..200) {
        prop_assume!(i < ip);
        let w = |i| schedule_weight(i, ip).unwrap();
        prop_assert!((w(i) - w(i + 1) - 1.0 / ip as f64).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&w(i)));
    }

    #[test]
    fn leaf_values_stay_in_range(
        kind in any_kind(),
        enh in any_enhancement(),
        v in -1.0f64..=1.0,
        w in 0.0f64..=1.0,
        plies in 0usize..20,
        seed in any::<u64>(),
    ) {
        let s = random_position(kind, plies, seed);
        let x = leaf_value(enh, &s, v, &mut substream(seed, "leaf", &[]), w);
        prop_assert!((-1.0..=1.0).contains(&x));
    }

    #[test]
    fn rave_score_lies_between_its_parts(
        q in -1.0f64..=1.0, qr in -1.0f64..=1.0, p in 0.0f64..=1.0,
        nt in 0u32..500, n in 0u32..500, nrt in 0u32..500, nr in 0u32..500, k in 1.0f64..500.0,
    ) {
        let u = puct_value(q, p, nt, n, 1.0);
        let ur = puct_value(qr, p, nrt, nr, 1.0);
        let x = uct_rave_value(PlainArm { q, prior: p, n_total: nt, n }, RaveArm { q: qr, n_total: nrt, n: nr }, 1.0, k);
        prop_assert!(x >= u.min(ur) - 1e-12 && x <= u.max(ur) + 1e-12);
    }

    #[test]
    fn select_child_takes_the_first_best_score(
        arms in prop::collection::vec((-1.0f64..=1.0, 0u32..20, 0.01f64..1.0), 1..12),
        c in 0.0f64..4.0,
    ) {
        let moves: Vec<Move> = (0..arms.len()).map(Move::new).collect();
        let raw: Vec<f64> = arms.iter().map(|a| a.2).collect();
        let mut node = NodeStats::new(moves, &raw);
        for (slot, a) in arms.iter().enumerate() {
            node.q[slot] = a.0;
            node.n[slot] = a.1;
        }
        node.n_total = node.n.iter().sum();
        let scores: Vec<f64> = (0..arms.len())
            .map(|s| puct_value(node.q[s], node.prior[s], node.n_total, node.n[s], c))
            .collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let want = scores.iter().position(|&x| x == best).unwrap();
        prop_assert_eq!(select_child(&node, SelectionMode::Plain, c), want);
    }

    #[test]
    fn search_policy_is_a_distribution_over_legal_moves(
        kind in any_kind(),
        enh in any_enhancement(),
        plies in 0usize..16,
        sims in 1usize..40,
        seed in any::<u64>(),
    ) {
        let s = random_position(kind, plies, seed);
        let searcher = make_enhanced_searcher(enh, 0, 2, SearchConfig { simulations: sims, c_puct: 1.0 }).unwrap();
        let pi = searcher
            .search(&s, &mut SearchTree::new(), &UniformEvaluator, &mut substream(seed, "search", &[]))
            .unwrap();
        prop_assert_eq!(pi.len(), s.action_size());
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let legal = s.legal_moves();
        for (a, &p) in pi.iter().enumerate() {
            prop_assert!(p >= 0.0);
            if !legal.contains(&Move::new(a)) {
                prop_assert_eq!(p, 0.0);
            }
        }
    }
}

#[test]
fn visit_counts_add_up() {
    let s = GameState::new(GameKind::ConnectFour, 6, 4).unwrap();
    for enh in [EnhancementKind::Baseline, EnhancementKind::RoRa] {
        let searcher = make_enhanced_searcher(
            enh,
            0,
            2,
            SearchConfig {
                simulations: 200,
                c_puct: 1.0,
            },
        )
        .unwrap();
        let mut tree = SearchTree::new();
        searcher
            .search(&s, &mut tree, &UniformEvaluator, &mut substream(1, "visits", &[]))
            .unwrap();
        let root = tree.get(&s.key()).unwrap();
        // The first simulation only expands the root.
        assert_eq!(root.n.iter().sum::<u32>(), 199);
        assert_eq!(root.n_total, 199);
        for (_, node) in tree.iter() {
            assert_eq!(node.n.iter().sum::<u32>(), node.n_total);
            assert_eq!(node.n_rave.iter().sum::<u32>(), node.n_rave_total);
            assert!(node.q.iter().chain(&node.q_rave).all(|q| (-1.0..=1.0).contains(q)));
        }
    }
}
