//! Pricing and hedging with a one-period deflator, plus closed-form fixtures.

use crate::cone_ftap::OnePeriodMarket;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot, least_squares};

/// Nonnegative weights on the sampled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Deflator {
    weights: Vec<f64>,
}

impl Deflator {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total mass `Π(Ω)`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Riskless gross return `1/Π(Ω)`, if the mass is positive.
    pub fn riskless_return(&self) -> Option<f64> {
        let m = self.mass();
        (m > 0.0).then(|| 1.0 / m)
    }

    /// Normalized weights `P = ΠR`.
    pub fn probabilities(&self) -> Option<Vec<f64>> {
        let m = self.mass();
        (m > 0.0).then(|| self.weights.iter().map(|w| w / m).collect())
    }
}

/// Least-squares hedge of a payoff by the market instruments.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeResult {
    pub gamma: Vec<f64>,
    /// `⟨(γ·X − V)², Π⟩` evaluated directly.
    pub least_squared_error: f64,
    /// `⟨V², Π⟩ − ⟨XV,Π⟩ᵀγ`, the closed-form minimum.
    pub formula_error: f64,
    /// `γ·x`.
    pub hedge_cost: f64,
}

/// Replicating portfolio in a two-state model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialPrice {
    pub v: f64,
    pub shares: f64,
    pub bond: f64,
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `⟨V, Π⟩`.
pub fn price_payoff(market: &OnePeriodMarket, deflator: &Deflator, payoff: &[f64]) -> Result<f64> {
    check_len(market.outcomes(), payoff.len())?;
    check_len(market.outcomes(), deflator.weights.len())?;
    Ok(dot(payoff, &deflator.weights))
}

/// Sample a payoff that depends only on instrument `column`.
pub fn payoff_on_column<F: Fn(f64) -> f64>(market: &OnePeriodMarket, column: usize, f: F) -> Vec<f64> {
    market.payoffs().iter().map(|row| f(row[column])).collect()
}

/// Per-outcome realized return `γ·X(ω_j) / γ·x`.
pub fn realized_return(market: &OnePeriodMarket, gamma: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_len(market.instruments(), gamma.len())?;
    let cost = dot(gamma, market.prices());
    if cost.abs() <= tol {
        return Err(Error::ZeroCost { cost });
    }
    Ok(market.payoffs().iter().map(|row| dot(gamma, row) / cost).collect())
}

/// Relative pivot threshold used when factoring the hedge Gram matrix.
pub const GRAM_THRESHOLD: f64 = 1e-12;

/// Minimize `⟨(γ·X − V)², Π⟩` over positions `γ`.
pub fn least_squares_hedge(
    market: &OnePeriodMarket,
    deflator: &Deflator,
    payoff: &[f64],
) -> Result<HedgeResult> {
    let n = market.outcomes();
    let m = market.instruments();
    check_len(n, payoff.len())?;
    check_len(n, deflator.weights.len())?;
    let w = &deflator.weights;
    let rows = market.payoffs();

    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for (j, row) in rows.iter().enumerate() {
        for a in 0..m {
            rhs[a] += w[j] * row[a] * payoff[j];
            for b in 0..m {
                gram[a * m + b] += w[j] * row[a] * row[b];
            }
        }
    }
    let gamma = match cholesky_solve(&gram, m, &rhs, GRAM_THRESHOLD) {
        Ok(g) => g,
        Err(pivot) => {
            return Err(Error::SingularGram {
                instrument: pivot,
                collinear_with: collinear_partners(market, w, pivot),
            })
        }
    };
    let v2: f64 = payoff.iter().zip(w).map(|(v, p)| v * v * p).sum();
    let formula_error = v2 - dot(&rhs, &gamma);
    let least_squared_error = rows
        .iter()
        .zip(payoff)
        .zip(w)
        .map(|((row, v), p)| {
            let e = dot(&gamma, row) - v;
            e * e * p
        })
        .sum();
    Ok(HedgeResult {
        hedge_cost: dot(&gamma, market.prices()),
        gamma,
        least_squared_error,
        formula_error,
    })
}

// Instruments before `pivot` whose weighted span reproduces instrument `pivot`.
fn collinear_partners(market: &OnePeriodMarket, w: &[f64], pivot: usize) -> Vec<usize> {
    let sq: Vec<f64> = w.iter().map(|p| p.max(0.0).sqrt()).collect();
    let weighted = |i: usize| -> Vec<f64> {
        market
            .payoffs()
            .iter()
            .zip(&sq)
            .map(|(row, s)| row[i] * s)
            .collect()
    };
    let target = weighted(pivot);
    let cols: Vec<Vec<f64>> = (0..pivot).map(weighted).collect();
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let coef = least_squares(&refs, &target);
    let big = coef.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    (0..pivot).filter(|&i| coef[i].abs() > 1e-8 * big.max(1e-300)).collect()
}

/// Two-state price with terminal stock prices `s_down < s_up`.
pub fn binomial_price_states<F: Fn(f64) -> f64>(
    r: f64,
    s: f64,
    s_down: f64,
    s_up: f64,
    payoff: F,
) -> Result<BinomialPrice> {
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter("R and s must be positive".into()));
    }
    if !(s_up > s_down) {
        return Err(Error::InvalidParameter("up state must exceed down state".into()));
    }
    let forward = r * s;
    if forward < s_down || forward > s_up {
        return Err(Error::NoArbitrageViolation {
            r,
            lower: s_down / s,
            upper: s_up / s,
        });
    }
    let vd = payoff(s_down);
    let vu = payoff(s_up);
    let spread = s_up - s_down;
    let v = ((s_up - forward) / spread * vd + (forward - s_down) / spread * vu) / r;
    let shares = (vu - vd) / spread;
    let bond = (vd - shares * s_down) / r;
    Ok(BinomialPrice { v, shares, bond })
}

/// Price of `V(S)` when the stock moves from `s` to `sd` or `su` and the bond returns `R`.
pub fn binomial_price<F: Fn(f64) -> f64>(r: f64, s: f64, d: f64, u: f64, payoff: F) -> Result<BinomialPrice> {
    if !(r > 0.0 && s > 0.0 && d > 0.0) {
        return Err(Error::InvalidParameter("R, s and d must be positive".into()));
    }
    if !(u > d) {
        return Err(Error::InvalidParameter("u must exceed d".into()));
    }
    if r < d || r > u {
        return Err(Error::NoArbitrageViolation { r, lower: d, upper: u });
    }
    let vd = payoff(s * d);
    let vu = payoff(s * u);
    let v = ((u - r) / (u - d) * vd + (r - d) / (u - d) * vu) / r;
    let shares = (vu - vd) / (s * u - s * d);
    let bond = (vd - shares * s * d) / r;
    Ok(BinomialPrice { v, shares, bond })
}

/// Market with a bond (price 1, payoff `R`), the stock, and a derivative priced at `v`.
pub fn binomial_market<F: Fn(f64) -> f64>(r: f64, s: f64, d: f64, u: f64, v: f64, payoff: F) -> Result<OnePeriodMarket> {
    let rows = vec![
        vec![r, s * d, payoff(s * d)],
        vec![r, s * u, payoff(s * u)],
    ];
    OnePeriodMarket::new(vec![1.0, s, v], rows)?
        .with_labels(vec!["bond".into(), "stock".into(), "claim".into()])
}

/// Bond, stock, call and put struck at `k`.
///
/// Outcomes are the stock at 0 and at `k`, plus the ray `(0, 1, 1, 0)` that
/// the payoffs approach per unit of stock as the price grows.
pub fn parity_market(r: f64, s: f64, k: f64, call: f64, put: f64) -> Result<OnePeriodMarket> {
    let rows = vec![
        vec![r, 0.0, 0.0, k],
        vec![r, k, 0.0, 0.0],
        vec![0.0, 1.0, 1.0, 0.0],
    ];
    OnePeriodMarket::new(vec![1.0, s, call, put], rows)?.with_labels(vec![
        "bond".into(),
        "stock".into(),
        "call".into(),
        "put".into(),
    ])
}

/// The parity position: short `k/R` bonds, long stock, short call, long put.
pub fn parity_position(r: f64, k: f64) -> Vec<f64> {
    vec![-k / r, 1.0, -1.0, 1.0]
}

/// Bond, stock and a forward struck at `f` with zero price.
///
/// Outcomes are the stock at 0 and the unbounded ray `(0, 1, 1)`.
pub fn carry_market(r: f64, s: f64, f: f64) -> Result<OnePeriodMarket> {
    let rows = vec![vec![r, 0.0, -f], vec![0.0, 1.0, 1.0]];
    OnePeriodMarket::new(vec![1.0, s, 0.0], rows)?.with_labels(vec![
        "bond".into(),
        "stock".into(),
        "forward".into(),
    ])
}

/// Forward level implied by deflating the bond and stock of the carry market.
pub fn carry_implied_forward(r: f64, s: f64) -> Result<f64> {
    let m = OnePeriodMarket::new(vec![1.0, s], vec![vec![r, 0.0], vec![0.0, 1.0]])?;
    let proj = crate::cone_ftap::project_to_cone(&m, crate::cone_ftap::DEFAULT_TOL)?;
    let w = proj.weights;
    // the forward payoff S − f has zero price: w_ray·1 − w_0·f = 0
    Ok(w[1] / w[0])
}

/// A named market together with its expected classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub market: OnePeriodMarket,
    pub arbitrage_free: bool,
    /// A position with identically zero payoff, when one is known.
    pub zero_payoff_position: Option<Vec<f64>>,
}

/// Parity and cost-of-carry markets with `R = 1.1`, `s = k = 100`.
pub fn parity_and_carry_fixtures() -> Vec<Fixture> {
    let (r, s, k) = (1.1, 100.0, 100.0);
    let put = 5.0;
    let call = put + s - k / r;
    let f = r * s;
    let mk = |res: Result<OnePeriodMarket>| res.expect("fixture parameters are valid");
    vec![
        Fixture {
            name: "parity",
            market: mk(parity_market(r, s, k, call, put)),
            arbitrage_free: true,
            zero_payoff_position: Some(parity_position(r, k)),
        },
        Fixture {
            name: "parity_call_rich",
            market: mk(parity_market(r, s, k, call + 0.5, put)),
            arbitrage_free: false,
            zero_payoff_position: Some(parity_position(r, k)),
        },
        Fixture {
            name: "parity_call_cheap",
            market: mk(parity_market(r, s, k, call - 0.5, put)),
            arbitrage_free: false,
            zero_payoff_position: Some(parity_position(r, k)),
        },
        Fixture {
            name: "carry",
            market: mk(carry_market(r, s, f)),
            arbitrage_free: true,
            zero_payoff_position: None,
        },
        Fixture {
            name: "carry_forward_rich",
            market: mk(carry_market(r, s, f + 1.0)),
            arbitrage_free: false,
            zero_payoff_position: None,
        },
    ]
}

/// Bond, stock and a call struck at 100 priced at 6, sampled at 90, 95, …, 110.
///
/// The call can pay at most 10 while the price range leaves no room for 6.
pub fn overpriced_call_market() -> OnePeriodMarket {
    let rows = [90.0, 95.0, 100.0, 105.0, 110.0]
        .iter()
        .map(|&w: &f64| vec![1.0, w, (w - 100.0).max(0.0)])
        .collect();
    OnePeriodMarket::new(vec![1.0, 100.0, 6.0], rows)
        .expect("valid")
        .with_labels(vec!["bond".into(), "stock".into(), "call".into()])
        .expect("valid")
}

/// Stock at 100 and a call struck at 100 priced at 9.1, with the stock ending in `[90, 110]`.
pub fn rich_call_market() -> OnePeriodMarket {
    let rows = [90.0, 100.0, 110.0]
        .iter()
        .map(|&w: &f64| vec![w, (w - 100.0).max(0.0)])
        .collect();
    OnePeriodMarket::new(vec![100.0, 9.1], rows)
        .expect("valid")
        .with_labels(vec!["stock".into(), "call".into()])
        .expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_ftap::{classify, find_arbitrage, project_to_cone, Classification};

    #[test]
    fn zero_coupon_bond_price() {
        let m = OnePeriodMarket::new(vec![1.0 / 1.05], vec![vec![1.0], vec![1.0]]).unwrap();
        let d = Deflator::new(vec![0.4 / 1.05, 0.6 / 1.05]);
        let p = price_payoff(&m, &d, &[1.0, 1.0]).unwrap();
        assert!((p - 1.0 / 1.05).abs() < 1e-15);
        assert!((d.riskless_return().unwrap() - 1.05).abs() < 1e-14);
    }

    #[test]
    fn binomial_weights_match_risk_neutral_formula() {
        let (r, s, d, u) = (1.1, 100.0, 0.9, 1.2);
        let call = |x: f64| (x - 100.0).max(0.0);
        let v = binomial_price(r, s, d, u, call).unwrap().v;
        let m = binomial_market(r, s, d, u, v, call).unwrap();
        let proj = project_to_cone(&m, 1e-9).unwrap();
        let a = (u - r) / (r * (u - d));
        let b = (r - d) / (r * (u - d));
        assert!((proj.weights[0] - a).abs() < 1e-12);
        assert!((proj.weights[1] - b).abs() < 1e-12);
    }

    #[test]
    fn binomial_linear_payoff_and_bounds() {
        let p = binomial_price(1.05, 100.0, 0.95, 1.15, |x| 3.0 * x + 2.0).unwrap();
        assert!((p.v - (300.0 + 2.0 / 1.05)).abs() < 1e-12);
        assert!((p.shares - 3.0).abs() < 1e-12);
        let one = binomial_price(1.05, 100.0, 0.95, 1.15, |_| 1.0).unwrap();
        assert!((one.v - 1.0 / 1.05).abs() < 1e-15);
        assert!(matches!(
            binomial_price(1.2, 100.0, 0.95, 1.15, |x| x),
            Err(Error::NoArbitrageViolation { .. })
        ));
    }

    #[test]
    fn general_two_state_form() {
        let (r, s, lo, hi) = (1.02, 50.0, 45.0, 60.0);
        let put = |x: f64| (52.0 - x).max(0.0);
        let p = binomial_price_states(r, s, lo, hi, put).unwrap();
        let expect = ((hi - r * s) / (hi - lo) * put(lo) + (r * s - lo) / (hi - lo) * put(hi)) / r;
        assert!((p.v - expect).abs() < 1e-14);
        assert!((p.shares * s + p.bond - p.v).abs() < 1e-12);
    }

    #[test]
    fn realized_returns() {
        let m = overpriced_call_market();
        let bond = realized_return(&m, &[1.0, 0.0, 0.0], 1e-12).unwrap();
        assert!(bond.iter().all(|&r| r == 1.0));
        let arb = realized_return(&m, &[-90.0, 1.0, -2.0], 1e-12).unwrap();
        assert!(arb.iter().all(|&r| r <= 0.0));
        assert!(matches!(
            realized_return(&m, &[0.0, 0.0, 0.0], 1e-12),
            Err(Error::ZeroCost { .. })
        ));
    }

    #[test]
    fn hedge_of_scaled_instrument_is_exact() {
        let rows = vec![vec![1.0, 90.0], vec![1.0, 100.0], vec![1.0, 115.0]];
        let m = OnePeriodMarket::new(vec![1.0 / 1.02, 100.0], rows).unwrap();
        let d = Deflator::new(vec![0.3, 0.4, 0.28]);
        let v = m.payoff_column(0).iter().map(|x| 2.5 * x).collect::<Vec<_>>();
        let h = least_squares_hedge(&m, &d, &v).unwrap();
        assert!((h.gamma[0] - 2.5).abs() < 1e-10 && h.gamma[1].abs() < 1e-10);
        assert!(h.least_squared_error < 1e-20);
    }

    #[test]
    fn hedge_matches_covariance_formula() {
        let r = 1.03;
        let stock = [80.0, 95.0, 100.0, 110.0, 130.0];
        let probs = [0.1, 0.2, 0.3, 0.25, 0.15];
        let rows: Vec<Vec<f64>> = stock.iter().map(|&s| vec![r, s]).collect();
        let d = Deflator::new(probs.iter().map(|p| p / r).collect());
        let s0: f64 = stock.iter().zip(&probs).map(|(s, p)| s * p).sum::<f64>() / r;
        let m = OnePeriodMarket::new(vec![1.0, s0], rows).unwrap();
        let v: Vec<f64> = stock.iter().map(|s| (s - 100.0_f64).max(0.0)).collect();
        let h = least_squares_hedge(&m, &d, &v).unwrap();
        let mean = |f: &dyn Fn(usize) -> f64| (0..5).map(|i| probs[i] * f(i)).sum::<f64>();
        let es = mean(&|i| stock[i]);
        let ev = mean(&|i| v[i]);
        let cov = mean(&|i| (stock[i] - es) * (v[i] - ev));
        let var = mean(&|i| (stock[i] - es).powi(2));
        let n = cov / var;
        assert!((h.gamma[1] - n).abs() < 1e-10);
        assert!((h.gamma[0] - (ev - n * es) / r).abs() < 1e-10);
        assert!((h.formula_error - h.least_squared_error).abs() < 1e-9 * h.least_squared_error.max(1.0));
    }

    #[test]
    fn duplicated_instrument_is_singular() {
        let rows = vec![vec![1.0, 2.0, 2.0], vec![3.0, 1.0, 1.0]];
        let m = OnePeriodMarket::new(vec![1.0, 1.0, 1.0], rows).unwrap();
        let d = Deflator::new(vec![0.5, 0.5]);
        match least_squares_hedge(&m, &d, &[1.0, 0.0]) {
            Err(Error::SingularGram { instrument, collinear_with }) => {
                assert_eq!(instrument, 2);
                assert_eq!(collinear_with, vec![1]);
            }
            other => panic!("expected SingularGram, got {other:?}"),
        }
    }

    #[test]
    fn fixtures_classify_as_declared() {
        for fx in parity_and_carry_fixtures() {
            let c = classify(&fx.market, 1e-9).unwrap();
            assert_eq!(matches!(c, Classification::Deflator(_)), fx.arbitrage_free, "{}", fx.name);
            if let Some(g) = fx.zero_payoff_position {
                for row in fx.market.payoffs() {
                    assert!(dot(&g, row).abs() < 1e-12);
                }
            }
        }
        assert!((carry_implied_forward(1.1, 100.0).unwrap() - 110.0).abs() < 1e-10);
        assert!(find_arbitrage(&rich_call_market(), 1e-9).unwrap().is_some());
    }
}
