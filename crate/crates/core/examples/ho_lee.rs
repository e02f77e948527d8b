//! Ho-Lee discount factors, convexity and the martingale check.

use deflator::rates::{ho_lee_convexity, ho_lee_discount, ho_lee_forward_rate, ho_lee_martingale_check, HoLeeParams};

fn main() -> deflator::Result<()> {
    let sigma = 0.01;
    let params = HoLeeParams::constant(|s| 0.03 + 0.002 * s, sigma)?;
    for t in [1.0, 2.0, 4.0] {
        println!(
            "t={t}: forward {:.8}, convexity {:.3e} (σ²t²/2 = {:.3e})",
            ho_lee_forward_rate(&params, t)?,
            ho_lee_convexity(&params, t)?,
            0.5 * sigma * sigma * t * t
        );
    }
    for b in [-0.5, 0.0, 0.5] {
        println!("D_1(3) with B_1 = {b}: {:.10}", ho_lee_discount(&params, 1.0, 3.0, b)?);
    }
    let check = ho_lee_martingale_check(&params, 1.0, 3.0, 32)?;
    println!(
        "discounted D_1(3) has mean {:.12}, D_0(3) = {:.12} (rel {:.1e})",
        check.expected, check.initial, check.relative_error
    );

    // time-dependent volatility σ(s) = 0.01 e^{−s/5}
    let decaying = HoLeeParams::new(
        |_| 0.03,
        |s| 0.01 * (-s / 5.0_f64).exp(),
        |s| 0.05 * (1.0 - (-s / 5.0_f64).exp()),
    );
    println!("decaying-vol convexity at t=4: {:.3e}", ho_lee_convexity(&decaying, 4.0)?);
    Ok(())
}
