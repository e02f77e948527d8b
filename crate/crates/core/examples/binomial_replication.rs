//! One-period binomial pricing by replication and by the cone projection.

use deflator::cone_ftap::{classify, Classification};
use deflator::one_period::{binomial_market, binomial_price, price_payoff};

fn main() -> deflator::Result<()> {
    let (r, s, d, u, k) = (1.05, 100.0, 0.9, 1.2, 100.0);
    let call = |x: f64| (x - k).max(0.0);
    let b = binomial_price(r, s, d, u, call)?;
    println!("replicating portfolio: {:.6} shares, {:.6} bonds", b.shares, b.bond);
    println!("call value {:.10}", b.v);

    // the same value from the deflator of the market holding bond and stock
    let market = binomial_market(r, s, d, u, b.v, call)?;
    if let Classification::Deflator(defl) = classify(&market, 1e-12)? {
        println!("state prices {:?}", defl.weights());
        println!("riskless return {:?}", defl.riskless_return());
        let payoff = [call(s * d), call(s * u)];
        println!("deflator price {:.10}", price_payoff(&market, &defl, &payoff)?);
    }
    Ok(())
}
