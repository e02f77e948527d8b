//! Multi-period binomial trees: deflators, lifted arbitrage and replication.

use deflator::filtration::SimpleFunction;
use deflator::multi_period::{
    arbitrage_free_drift, binomial_deflators, binomial_panel, check_deflator, find_tree_deflator,
    is_arbitrage_strategy, replicate, TreeOutcome,
};

fn main() -> deflator::Result<()> {
    let (r, s, sigma, n) = (1.01, 100.0, 0.1, 4);
    let mu = arbitrage_free_drift(r, sigma);
    let panel = binomial_panel(r, s, mu, sigma, n)?;
    let check = check_deflator(&panel, &binomial_deflators(r, n)?, 1e-12)?;
    println!("e^mu = R/cosh(sigma): deflator passes {} ({:.2e})", check.passes, check.max_violation);

    // European call on the stock, replicated by backward induction
    let last = panel.filtration().algebra(n).clone();
    let stock = panel.price(n).component(1);
    let payoff = SimpleFunction::scalar(last, stock.values().iter().map(|x| (x - s).max(0.0)).collect())?;
    let rep = replicate(&panel, &payoff, 1e-10)?;
    println!("call value at time 0: {:.10}", rep.values[0].get(0));

    let skewed = binomial_panel(r, s, mu + 0.15, sigma, n)?;
    match find_tree_deflator(&skewed, 1e-9)? {
        TreeOutcome::Deflator(_) => println!("drift shift left the market arbitrage free"),
        TreeOutcome::Arbitrage(a) => {
            let check = is_arbitrage_strategy(&skewed, &a.strategy, 1e-9)?;
            println!("dead nodes {:?}", a.dead_nodes);
            println!("lifted strategy is an arbitrage: {}, gains {:?}", check.is_arbitrage, check.initial_gain);
        }
    }
    Ok(())
}
