//! Lognormal put values and greeks against finite differences.

use deflator::analytic_models::{gbm_put, GbmParams};

fn main() -> deflator::Result<()> {
    let p = GbmParams::new(0.05, 100.0, 0.2, 1.0)?;
    let h = 1e-3;
    for k in [80.0, 100.0, 120.0] {
        let put = gbm_put(&p, k)?;
        let up = gbm_put(&p.with_spot(100.0 + h)?, k)?.pv;
        let down = gbm_put(&p.with_spot(100.0 - h)?, k)?.pv;
        println!(
            "K={k}: pv {:.8}  delta {:.6} (fd {:.6})  gamma {:.6} (fd {:.6})",
            put.pv,
            put.delta,
            (up - down) / (2.0 * h),
            put.gamma,
            (up - 2.0 * put.pv + down) / (h * h)
        );
    }
    Ok(())
}
