//! Normal-model option prices and how well stock plus bond hedge them.

use deflator::analytic_models::{
    atm_call_correlation, bachelier_call, bachelier_put, hedge_error_estimate, BachelierParams,
};

fn main() -> deflator::Result<()> {
    let p = BachelierParams::new(1.05, 100.0, 0.1)?;
    let f = p.forward();
    let put = bachelier_put(&p, f);
    let call = bachelier_call(&p, f);
    println!("at the forward: put {:.8}, call {:.8}, hedge ratio {:.6}", put.price, call.price, call.delta);
    println!("corr(S, ATM call) = {:.6}", atm_call_correlation());

    // a smooth payoff with known slope and curvature at the forward
    let payoff = |x: f64| (x / f).powi(2) * f;
    let est = hedge_error_estimate(&p, payoff, 2.0, 2.0 / f, &[]);
    println!(
        "quadratic payoff: corr {:.6} (approx {:.6}), hedge error {:.6} (approx {:.6})",
        est.corr, est.corr_approx, est.lse, est.lse_approx
    );
    Ok(())
}
