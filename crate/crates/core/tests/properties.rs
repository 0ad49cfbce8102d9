use dnnclass::approx::build_square;
use dnnclass::harness::config::mix_seed;
use dnnclass::harness::Config;
use dnnclass::net::{concat, random_network, stack};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stacking_evaluates_like_nesting(
        seed in any::<u64>(),
        inner_width in 1usize..6,
        mid in 1usize..4,
        outer_width in 1usize..6,
        x in prop::collection::vec(0.0f64..1.0, 2),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inner = random_network(&mut rng, &[2, inner_width, mid], 0.7, 2.0).unwrap();
        let outer = random_network(&mut rng, &[mid, outer_width, 1], 0.7, 2.0).unwrap();
        let merged = stack(&outer, &inner).unwrap();
        let nested = outer.evaluate(&inner.evaluate(&x).unwrap()).unwrap();
        prop_assert!(close(merged.evaluate(&x).unwrap()[0], nested[0]));
        prop_assert_eq!(merged.depth(), outer.depth() + inner.depth());
    }

    #[test]
    fn concatenation_adds_nonzeros_and_outputs(
        seed in any::<u64>(),
        wa in 1usize..5,
        wb in 1usize..5,
        x in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_network(&mut rng, &[3, wa, 1], 0.6, 1.0).unwrap();
        let b = random_network(&mut rng, &[3, wb, 2], 0.6, 1.0).unwrap();
        let both = concat(&a, &b).unwrap();
        prop_assert_eq!(both.nnz(), a.nnz() + b.nnz());
        let out = both.evaluate(&x).unwrap();
        let expected: Vec<f64> = a.evaluate(&x).unwrap().into_iter().chain(b.evaluate(&x).unwrap()).collect();
        prop_assert_eq!(out.len(), expected.len());
        for (o, e) in out.iter().zip(&expected) {
            prop_assert!(close(*o, *e));
        }
    }

    #[test]
    fn square_network_error_within_bound(m in 1u32..10, x in 0.0f64..=1.0) {
        let net = build_square(m).unwrap();
        let err = (net.evaluate(&[x]).unwrap()[0] - x * x).abs();
        prop_assert!(err <= 0.25f64.powi(m as i32) / 4.0 + 1e-15);
    }

    #[test]
    fn seed_mixing_separates_cells(a in any::<u64>(), b in any::<u64>(), n in any::<u64>()) {
        prop_assume!(a != b);
        prop_assert_ne!(mix_seed(&[a, n]), mix_seed(&[b, n]));
        prop_assert_ne!(mix_seed(&[n, a]), mix_seed(&[n, b]));
    }

    #[test]
    fn config_survives_toml(seed in any::<u64>(), lr in 1e-4f64..1.0, epochs in 1usize..1000) {
        let mut cfg = Config { seed, ..Config::default() };
        cfg.train.learning_rate = lr;
        cfg.train.epochs = epochs;
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(Config::from_toml(&text).unwrap(), cfg);
    }
}
