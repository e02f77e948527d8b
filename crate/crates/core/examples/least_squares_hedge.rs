//! Best hedge of a straddle by bond and stock on a five-state market.

use deflator::cone_ftap::OnePeriodMarket;
use deflator::one_period::{least_squares_hedge, payoff_on_column, Deflator};

fn main() -> deflator::Result<()> {
    let r = 1.02;
    let stock = [80.0, 92.0, 100.0, 110.0, 128.0];
    let market = OnePeriodMarket::new(vec![1.0, 100.0], stock.iter().map(|&x| vec![r, x]).collect())?;
    // equal weights price both the bond and the stock
    let defl = Deflator::new(vec![1.0 / (5.0 * r); 5]);
    let straddle = payoff_on_column(&market, 1, |x| (x - 100.0).abs());
    let h = least_squares_hedge(&market, &defl, &straddle)?;
    println!("hedge: {:.6} bonds, {:.6} shares", h.gamma[0], h.gamma[1]);
    println!("hedge cost {:.6}", h.hedge_cost);
    println!("squared error {:.6} (closed form {:.6})", h.least_squared_error, h.formula_error);
    Ok(())
}
