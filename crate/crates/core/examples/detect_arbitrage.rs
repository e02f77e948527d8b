//! Classify a one-period market and print either a deflator or an arbitrage.
//!
//! Run with `cargo run --example detect_arbitrage`.

use deflator::cone_ftap::{classify, project_to_cone, Classification, OnePeriodMarket};
use deflator::one_period::{overpriced_call_market, rich_call_market};

fn report(name: &str, market: &OnePeriodMarket) -> deflator::Result<()> {
    let tol = 1e-9;
    let proj = project_to_cone(market, tol)?;
    println!("{name}: distance to payoff cone {:.6}", proj.residual_norm);
    match classify(market, tol)? {
        Classification::Deflator(d) => println!("  deflator weights {:?}", d.weights()),
        Classification::Arbitrage(c) => {
            println!("  arbitrage position {:?}", c.gamma);
            println!("  collects {:.6} now, worst payoff {:.3e}", c.setup_gain, c.min_payoff);
        }
    }
    Ok(())
}

fn main() -> deflator::Result<()> {
    report("overpriced call", &overpriced_call_market())?;
    report("rich call", &rich_call_market())?;

    // bond, stock and an at-the-money call on three outcomes, priced consistently
    let fair = OnePeriodMarket::new(
        vec![1.0, 100.0, 5.0],
        vec![vec![1.05, 90.0, 0.0], vec![1.05, 105.0, 5.0], vec![1.05, 120.0, 20.0]],
    )?
    .with_labels(vec!["bond".into(), "stock".into(), "call".into()])?;
    report("three-state market", &fair)
}
