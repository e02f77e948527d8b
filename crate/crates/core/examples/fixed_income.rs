//! Zero-coupon bonds, forward rates, par coupons and swaps from a discount curve,
//! and the floating-leg identity on a short-rate tree.

use deflator::filtration::{FAMeasure, Filtration, SimpleFunction};
use deflator::rates::{
    bond_price, deflators_from_short_rate, floating_leg_value, forward_rate, par_coupon, swap_par, zcb_price,
    DiscountCurve, Schedule, ShortRateProcess,
};

fn main() -> deflator::Result<()> {
    let curve = DiscountCurve::parse("0.5 0.985\n1.0 0.969\n1.5 0.952\n2.0 0.934\n")?;
    let annual = Schedule::from_times(vec![0.0, 0.5, 1.0, 1.5, 2.0])?;
    let par = par_coupon(&curve, &annual)?;
    println!("par coupon {par:.8}, bond at par {:.12}", bond_price(&curve, &annual, par)?);
    println!("forward 1y to 2y {:.8}", forward_rate(&curve, 1.0, 2.0, 1.0)?);
    let swap = Schedule::from_times(vec![0.5, 1.0, 1.5, 2.0])?;
    println!("forward-start swap rate {:.8}", swap_par(&curve, &swap)?);

    // two periods on a binary tree; the rate moves up or down after period 1
    let filt = Filtration::binary(2);
    let rates = vec![
        SimpleFunction::scalar(filt.algebra(0).clone(), vec![1.02])?,
        SimpleFunction::scalar(filt.algebra(1).clone(), vec![1.01, 1.04])?,
    ];
    let sr = ShortRateProcess::new(&filt, rates)?;
    let defl = deflators_from_short_rate(&filt, &sr, &FAMeasure::uniform(filt.algebra(2).clone()))?;
    println!("two-period zero {:.12}", zcb_price(&defl, 0, 2)?.get(0));
    let leg = floating_leg_value(&defl, &[1.0, 1.0])?;
    println!(
        "floating leg {:.12} vs 1 − D(0,2) = {:.12}",
        leg.floating_leg[0], leg.telescoped[0]
    );
    Ok(())
}
