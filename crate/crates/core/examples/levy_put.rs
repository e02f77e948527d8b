//! Puts under a Lévy-driven stock with a Gaussian part and one jump size.

use deflator::analytic_models::{
    gbm_put, k_transform, levy_put, GbmParams, InversionConfig, KolmogorovId, LevyModelParams,
};

fn main() -> deflator::Result<()> {
    let config = InversionConfig::default();

    let gaussian = KolmogorovId::gaussian(0.0, 1.0)?;
    let lp = LevyModelParams::new(0.05, 100.0, 0.2, 1.0, gaussian.clone())?;
    let gbm = gbm_put(&GbmParams::new(0.05, 100.0, 0.2, 1.0)?, 100.0)?;
    println!("Gaussian base: {:.10} vs lognormal {:.10}", levy_put(&lp, 100.0, &config)?.pv, gbm.pv);
    let tilted = k_transform(&gaussian, 0.2);
    println!("tilted normal: mean {}, variance {}", tilted.mean(), tilted.variance());

    // 80% of the variance diffusive, the rest from downward jumps of size 0.3
    let jumpy = KolmogorovId::new(0.0, vec![(0.0, 0.8), (-0.3, 0.2)])?;
    let lp = LevyModelParams::new(0.05, 100.0, 0.2, 1.0, jumpy)?;
    for k in [80.0, 90.0, 100.0, 110.0, 120.0] {
        let put = levy_put(&lp, k, &config)?;
        println!(
            "K={k}: pv {:.8}  P(S<=K) {:.6}  tilted {:.6}",
            put.pv, put.probability, put.tilted_probability
        );
    }
    Ok(())
}
