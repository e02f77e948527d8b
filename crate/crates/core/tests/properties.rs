use proptest::prelude::*;

use deflator::analytic_models::{
    bachelier_call, bachelier_put, cdf_from_charfn, k_transform, BachelierParams, InversionConfig, KolmogorovId,
};
use deflator::cone_ftap::{classify, verify_position, Classification, OnePeriodMarket};
use deflator::filtration::{conditional_price_gap, RandomWalk};
use deflator::multi_period::{
    arbitrage_free_drift, binomial_panel, check_deflator, find_tree_deflator, is_arbitrage_strategy, TreeOutcome,
};

fn market_strategy() -> impl Strategy<Value = OnePeriodMarket> {
    (1usize..4, 2usize..6).prop_flat_map(|(m, k)| {
        (
            prop::collection::vec(-2.0f64..3.0, m),
            prop::collection::vec(prop::collection::vec(-2.0f64..3.0, m), k),
        )
            .prop_map(|(prices, payoffs)| OnePeriodMarket::new(prices, payoffs).unwrap())
    })
}

fn close(a: f64, b: f64, ulps: f64) -> bool {
    (a - b).abs() <= ulps * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn one_period_dichotomy(market in market_strategy()) {
        let tol = 1e-9;
        match classify(&market, tol).unwrap() {
            Classification::Deflator(d) => {
                prop_assert!(d.weights().iter().all(|&w| w >= 0.0));
                let norm = market.prices().iter().map(|x| x * x).sum::<f64>().sqrt();
                for (i, &x) in market.prices().iter().enumerate() {
                    let repriced: f64 = market.payoffs().iter().zip(d.weights()).map(|(r, w)| r[i] * w).sum();
                    prop_assert!((repriced - x).abs() <= tol * (1.0 + norm));
                }
            }
            Classification::Arbitrage(c) => {
                prop_assert!(verify_position(&market, &c.gamma, tol).unwrap().is_arbitrage);
            }
        }
    }

    #[test]
    fn classification_survives_scaling(market in market_strategy(), lambda in 0.01f64..100.0) {
        let tol = 1e-9;
        let kind = |m: &OnePeriodMarket| matches!(classify(m, tol).unwrap(), Classification::Deflator(_));
        prop_assert_eq!(kind(&market), kind(&market.scaled(lambda)));
    }

    #[test]
    fn tree_dichotomy(
        n in 1usize..5,
        sigma in 0.01f64..0.3,
        shift in -0.05f64..0.05,
        r in 1.0f64..1.08,
    ) {
        let tol = 1e-9;
        let mu = arbitrage_free_drift(r, sigma) + shift;
        let panel = binomial_panel(r, 50.0, mu, sigma, n).unwrap();
        match find_tree_deflator(&panel, tol).unwrap() {
            TreeOutcome::Deflator(d) => prop_assert!(check_deflator(&panel, &d, tol).unwrap().passes),
            TreeOutcome::Arbitrage(a) => {
                let check = is_arbitrage_strategy(&panel, &a.strategy, tol).unwrap();
                prop_assert!(check.is_arbitrage, "{:?}", check);
            }
        }
        // the one-step up/down moves bracket R exactly when a deflator exists
        let (up, down) = ((mu + sigma).exp(), (mu - sigma).exp());
        let fair = down < r && r < up;
        if fair && (up - r).min(r - down) > 1e-6 {
            prop_assert!(matches!(find_tree_deflator(&panel, tol).unwrap(), TreeOutcome::Deflator(_)));
        }
        if !fair && (r - up).max(down - r) > 1e-6 {
            prop_assert!(matches!(find_tree_deflator(&panel, tol).unwrap(), TreeOutcome::Arbitrage(_)));
        }
    }

    #[test]
    fn random_walk_restriction(n in 1usize..7, j in 0usize..7, k in 0usize..7) {
        let (j, k) = (j.min(n), k.min(n));
        let (j, k) = (j.min(k), j.max(k));
        let walk = RandomWalk::new(n);
        let gap = conditional_price_gap(
            &walk.positions[j],
            &walk.probability_at(j),
            &walk.positions[k],
            &walk.probability_at(k),
        )
        .unwrap();
        prop_assert!(gap <= 1e-12 * (n as f64));
    }

    #[test]
    fn tilt_composition(
        gamma in -1.0f64..1.0,
        nodes in prop::collection::vec((-2.0f64..2.0, 0.0f64..1.0), 1..5),
        s in -1.0f64..1.0,
        t in -1.0f64..1.0,
    ) {
        let id = KolmogorovId::new(gamma, nodes).unwrap();
        let two_step = k_transform(&k_transform(&id, s), t);
        let one_step = k_transform(&id, s + t);
        // γ is a sum of terms of mixed sign, so compare against its absolute scale
        let scale: f64 = gamma.abs()
            + one_step.nodes().iter().map(|&(x, g)| g * if x == 0.0 { 2.0 } else { 2.0 * (((s + t) * x).exp() + 1.0) / x.abs() }).sum::<f64>();
        prop_assert!((two_step.gamma() - one_step.gamma()).abs() <= 64.0 * f64::EPSILON * scale.max(1.0));
        for (a, b) in two_step.nodes().iter().zip(one_step.nodes()) {
            prop_assert_eq!(a.0, b.0);
            prop_assert!(close(a.1, b.1, 8.0), "{} vs {}", a.1, b.1);
        }
    }

    #[test]
    fn cdf_is_monotone_and_bounded(
        mean in -0.5f64..0.5,
        var in 0.05f64..1.0,
        jump in -1.0f64..1.0,
        mass in 0.0f64..0.3,
    ) {
        let id = KolmogorovId::new(mean, vec![(0.0, var), (jump, mass)]).unwrap();
        let grid: Vec<f64> = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
        let cdf = cdf_from_charfn(|u| id.charfn(u), &grid, &InversionConfig::default()).unwrap();
        prop_assert!(cdf.iter().all(|&p| (0.0..=1.0).contains(&p)));
        prop_assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn bachelier_parity(r in 0.9f64..1.2, s in 1.0f64..200.0, sigma in 0.01f64..0.5, m in 0.5f64..1.5) {
        let p = BachelierParams::new(r, s, sigma).unwrap();
        let k = m * r * s;
        let call = bachelier_call(&p, k);
        let put = bachelier_put(&p, k);
        prop_assert!((call.price - put.price - (s - k / r)).abs() <= 1e-12 * s);
        prop_assert!(call.price >= -1e-12 * s && put.price >= -1e-12 * s);
        prop_assert!((call.delta - put.delta - 1.0).abs() <= 1e-15);
    }
}
