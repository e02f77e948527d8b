//! Conditional pricing on the symmetric random walk.

use deflator::filtration::{conditional_price_gap, RandomWalk};

fn main() -> deflator::Result<()> {
    let n = 5;
    let walk = RandomWalk::new(n);
    for j in 0..n {
        let gap = conditional_price_gap(
            &walk.positions[j],
            &walk.probability_at(j),
            &walk.positions[n],
            &walk.probability_at(n),
        )?;
        println!("Z_{j} P|A_{j} vs (Z_{n} P)|A_{j}: largest gap {gap:.2e}");
    }
    // Z² is not a martingale: E(Z_n² | A_j) = Z_j² + n − j
    let sq = walk.positions[n].map(|z| z * z);
    let sq_j = walk.positions[2].map(|z| z * z);
    let gap = conditional_price_gap(&sq_j, &walk.probability_at(2), &sq, &walk.probability_at(n))?;
    println!("Z² at 2 vs {n}: gap {gap:.4}");
    Ok(())
}
