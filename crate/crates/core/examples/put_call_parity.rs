//! Put-call parity and cost of carry, checked by arbitrage detection.

use deflator::cone_ftap::{find_arbitrage, verify_position};
use deflator::one_period::{carry_implied_forward, parity_and_carry_fixtures, parity_market, parity_position};

fn main() -> deflator::Result<()> {
    let tol = 1e-9;
    for fx in parity_and_carry_fixtures() {
        let verdict = match find_arbitrage(&fx.market, tol)? {
            Some(c) => format!("arbitrage {:?}", c.gamma),
            None => "no arbitrage".to_string(),
        };
        println!("{:<28} {verdict}", fx.name);
    }

    let (r, s, k) = (1.04, 100.0, 95.0);
    let put = 3.0;
    let parity_call = put + s - k / r;
    let market = parity_market(r, s, k, parity_call + 0.5, put)?;
    let report = verify_position(&market, &parity_position(r, k), tol)?;
    println!("call 0.5 above parity: position cost {:.6}, arbitrage {}", report.cost, report.is_arbitrage);
    println!("forward implied by carry: {:.6}", carry_implied_forward(r, s)?);
    Ok(())
}
