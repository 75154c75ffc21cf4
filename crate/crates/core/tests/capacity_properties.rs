use fsc_core::capacity::{
    dmc_capacity, evaluate_rate, finite_n_bracket, optimize_rate, tree_rate, CausalPolicy, OptimizerSettings,
};
use fsc_core::UnifilarChannel;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stochastic_row(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn arb_unifilar() -> impl Strategy<Value = UnifilarChannel> {
    (1usize..=2, 2usize..=3, 2usize..=3).prop_flat_map(|(s, x, y)| {
        (
            proptest::collection::vec(0.05f64..1.0, s * x * y),
            proptest::collection::vec(0..s, s * x * y),
        )
            .prop_map(move |(raw, f)| {
                let w: Vec<f64> = raw.chunks(y).flat_map(stochastic_row).collect();
                UnifilarChannel::new(x, y, s, w, f).unwrap()
            })
    })
}

fn relabel(u: &UnifilarChannel, xm: &[usize], ym: &[usize]) -> UnifilarChannel {
    let inv = |m: &[usize]| {
        let mut v = vec![0; m.len()];
        for (a, &b) in m.iter().enumerate() {
            v[b] = a;
        }
        v
    };
    let (xi, yi) = (inv(xm), inv(ym));
    UnifilarChannel::from_fn(
        u.x_size(),
        u.y_size(),
        u.s_size(),
        |s, x, y| u.w(s, xi[x], yi[y]),
        |s, x, y| u.next_state(s, xi[x], yi[y]),
    )
    .unwrap()
}

fn quick() -> OptimizerSettings {
    OptimizerSettings {
        restarts: 3,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dense_and_tree_rates_agree(u in arb_unifilar(), seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = CausalPolicy::random(n, u.x_size(), u.y_size(), &mut rng).unwrap();
        for s0 in 0..u.s_size() {
            let dense = evaluate_rate(&u, s0, &p).unwrap();
            let tree = tree_rate(&u, s0, &p).unwrap();
            prop_assert!((dense - tree).abs() < 1e-10);
            let cap = (u.x_size().min(u.y_size()) as f64).log2();
            prop_assert!(dense >= 0.0 && dense <= cap + 1e-12);
        }
    }

    #[test]
    fn relabeling_leaves_rates_unchanged(u in arb_unifilar(), seed in any::<u64>(), n in 1usize..=2) {
        let xm: Vec<usize> = (0..u.x_size()).rev().collect();
        let ym: Vec<usize> = (0..u.y_size()).map(|y| (y + 1) % u.y_size()).collect();
        let v = relabel(&u, &xm, &ym);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = CausalPolicy::random(n, u.x_size(), u.y_size(), &mut rng).unwrap();
        let q = p.relabel(&xm, &ym).unwrap();
        prop_assert!((evaluate_rate(&u, 0, &p).unwrap() - evaluate_rate(&v, 0, &q).unwrap()).abs() < 1e-10);
        let a = optimize_rate(&u, 0, n, &quick()).unwrap().value;
        let b = optimize_rate(&v, 0, n, &quick()).unwrap().value;
        prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
    }

    #[test]
    fn optimum_dominates_baseline_and_bracket_is_ordered(u in arb_unifilar(), n in 1usize..=2) {
        let b = finite_n_bracket(&u, n, &quick()).unwrap();
        prop_assert!(b.min <= b.max);
        for e in &b.per_state {
            prop_assert!(e.value >= e.diagnostics.baseline - 1e-9);
            let cap = (u.x_size().min(u.y_size()) as f64).log2();
            prop_assert!(e.value >= 0.0 && e.value <= cap + 1e-9);
        }
        if u.s_size() == 1 {
            prop_assert_eq!(b.min, b.max);
        }
    }

    #[test]
    fn memoryless_rates_match_blahut_arimoto(raw in proptest::collection::vec(0.02f64..1.0, 4), n in 1usize..=3) {
        let rows: Vec<Vec<f64>> = raw.chunks(2).map(stochastic_row).collect();
        let u = UnifilarChannel::memoryless(&rows).unwrap();
        let c = dmc_capacity(&rows).unwrap().capacity;
        let e = optimize_rate(&u, 0, n, &quick()).unwrap();
        prop_assert!((e.value - c).abs() < 1e-4, "{} vs {}", e.value, c);
    }
}
