//! One-period arbitrage detection by projection onto the cone of payoffs.
//!
//! A market is a price vector `x ∈ Rᵐ` together with sampled payoff rows
//! `X(ω_1), …, X(ω_N)`. Either `x` lies in the closed cone generated by the
//! rows, and the nonnegative weights form a price deflator, or `γ = x* − x`
//! (with `x*` the nearest cone point) is an arbitrage: `γ·x < 0` and
//! `γ·X(ω) ≥ 0` on every sampled outcome.
//!
//! ```
//! use deflator::cone_ftap::{classify, Classification, OnePeriodMarket};
//!
//! // bond, stock and a call struck at 100, sampled at 90..110
//! let rows = [90.0, 95.0, 100.0, 105.0, 110.0]
//!     .iter()
//!     .map(|&w: &f64| vec![1.0, w, (w - 100.0).max(0.0)])
//!     .collect();
//! let market = OnePeriodMarket::new(vec![1.0, 100.0, 6.0], rows).unwrap();
//! match classify(&market, 1e-9).unwrap() {
//!     Classification::Arbitrage(cert) => assert!(cert.setup_gain > 0.0),
//!     Classification::Deflator(_) => unreachable!(),
//! }
//! ```

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::nnls::nnls;
use crate::one_period::Deflator;

/// Default relative tolerance for classification.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Prices of `m` instruments and their payoffs on `N` sampled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePeriodMarket {
    prices: Vec<f64>,
    payoffs: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl OnePeriodMarket {
    /// `payoffs[j]` is the payoff vector on outcome `j`.
    pub fn new(prices: Vec<f64>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let m = prices.len();
        if m == 0 {
            return Err(Error::InvalidMarket("no instruments".into()));
        }
        if payoffs.is_empty() {
            return Err(Error::InvalidMarket("no outcomes".into()));
        }
        for row in &payoffs {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
        }
        let finite = prices.iter().chain(payoffs.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidMarket("non-finite price or payoff".into()));
        }
        Ok(Self {
            prices,
            payoffs,
            labels: None,
        })
    }

    /// Attach instrument names.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.prices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.prices.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn payoffs(&self) -> &[Vec<f64>] {
        &self.payoffs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Number of instruments `m`.
    pub fn instruments(&self) -> usize {
        self.prices.len()
    }

    /// Number of sampled outcomes `N`.
    pub fn outcomes(&self) -> usize {
        self.payoffs.len()
    }

    /// Payoffs of instrument `i` across outcomes.
    pub fn payoff_column(&self, i: usize) -> Vec<f64> {
        self.payoffs.iter().map(|row| row[i]).collect()
    }

    /// Every price and payoff multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            prices: self.prices.iter().map(|v| v * lambda).collect(),
            payoffs: self
                .payoffs
                .iter()
                .map(|r| r.iter().map(|v| v * lambda).collect())
                .collect(),
            labels: self.labels.clone(),
        }
    }

    /// Largest absolute price or payoff.
    pub fn scale(&self) -> f64 {
        self.prices
            .iter()
            .chain(self.payoffs.iter().flatten())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Nearest point of the payoff cone to the price vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeProjection {
    pub x_star: Vec<f64>,
    pub weights: Vec<f64>,
    pub residual_norm: f64,
    /// `x* − x`.
    pub gamma: Vec<f64>,
    /// `‖x‖`, kept so classification can use a relative threshold.
    pub target_norm: f64,
}

impl ConeProjection {
    /// Whether the residual is below `tol · (1 + ‖x‖)`.
    pub fn is_in_cone(&self, tol: f64) -> bool {
        self.residual_norm <= tol * (1.0 + self.target_norm)
    }
}

/// A position with negative cost and nonnegative payoff on every sampled outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageCertificate {
    pub gamma: Vec<f64>,
    /// `−γ·x`, positive.
    pub setup_gain: f64,
    /// `min_j γ·X(ω_j)`.
    pub min_payoff: f64,
}

/// Cost and worst payoff of a position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionReport {
    pub cost: f64,
    pub min_payoff: f64,
    pub is_arbitrage: bool,
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Deflator(Deflator),
    Arbitrage(ArbitrageCertificate),
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")))
    }
}

/// Euclidean projection of the prices onto the cone generated by the payoff rows.
pub fn project_to_cone(market: &OnePeriodMarket, tol: f64) -> Result<ConeProjection> {
    check_tol(tol)?;
    let cols: Vec<&[f64]> = market.payoffs.iter().map(|r| r.as_slice()).collect();
    let sol = nnls(&cols, &market.prices)?;
    let gamma: Vec<f64> = sol
        .fitted
        .iter()
        .zip(&market.prices)
        .map(|(s, x)| s - x)
        .collect();
    Ok(ConeProjection {
        residual_norm: norm(&gamma),
        x_star: sol.fitted,
        weights: sol.coefficients,
        gamma,
        target_norm: norm(&market.prices),
    })
}

fn certificate(market: &OnePeriodMarket, gamma: Vec<f64>) -> ArbitrageCertificate {
    let report = position(market, &gamma);
    ArbitrageCertificate {
        gamma,
        setup_gain: -report.0,
        min_payoff: report.1,
    }
}

fn position(market: &OnePeriodMarket, gamma: &[f64]) -> (f64, f64) {
    let cost = dot(gamma, &market.prices);
    let min_payoff = market
        .payoffs
        .iter()
        .map(|row| dot(gamma, row))
        .fold(f64::INFINITY, f64::min);
    (cost, min_payoff)
}

/// An arbitrage `γ = x* − x`, or `None` when the prices lie in the cone.
pub fn find_arbitrage(market: &OnePeriodMarket, tol: f64) -> Result<Option<ArbitrageCertificate>> {
    let proj = project_to_cone(market, tol)?;
    if proj.is_in_cone(tol) {
        Ok(None)
    } else {
        Ok(Some(certificate(market, proj.gamma)))
    }
}

/// Cost `γ·x` and worst payoff of a position.
pub fn verify_position(market: &OnePeriodMarket, gamma: &[f64], tol: f64) -> Result<PositionReport> {
    if gamma.len() != market.instruments() {
        return Err(Error::DimensionMismatch {
            expected: market.instruments(),
            found: gamma.len(),
        });
    }
    let (cost, min_payoff) = position(market, gamma);
    Ok(PositionReport {
        cost,
        min_payoff,
        is_arbitrage: cost < -tol && min_payoff >= -tol,
    })
}

/// The projection weights as a deflator when the residual is within tolerance.
pub fn deflator_from_projection(projection: &ConeProjection, tol: f64) -> Option<Deflator> {
    if projection.is_in_cone(tol) {
        Some(Deflator::new(projection.weights.clone()))
    } else {
        None
    }
}

/// Run the projection once and return either a deflator or an arbitrage.
pub fn classify(market: &OnePeriodMarket, tol: f64) -> Result<Classification> {
    let proj = project_to_cone(market, tol)?;
    match deflator_from_projection(&proj, tol) {
        Some(d) => Ok(Classification::Deflator(d)),
        None => Ok(Classification::Arbitrage(certificate(market, proj.gamma))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straddle() -> OnePeriodMarket {
        let rows = [90.0, 95.0, 100.0, 105.0, 110.0]
            .iter()
            .map(|&w: &f64| vec![1.0, w, (w - 100.0).max(0.0)])
            .collect();
        OnePeriodMarket::new(vec![1.0, 100.0, 6.0], rows).unwrap()
    }

    #[test]
    fn overpriced_call_is_outside_cone() {
        let m = straddle();
        let p = project_to_cone(&m, 1e-9).unwrap();
        assert!(p.residual_norm > 1e-3);
        // orthogonality of the residual to the projection
        assert!(dot(&p.gamma, &p.x_star).abs() <= 1e-9 * dot(&p.x_star, &p.x_star).max(1.0));
        let cert = find_arbitrage(&m, 1e-9).unwrap().unwrap();
        assert!(cert.setup_gain > 0.0 && cert.min_payoff >= -1e-9);
    }

    #[test]
    fn listed_position_is_arbitrage() {
        let r = verify_position(&straddle(), &[-90.0, 1.0, -2.0], 1e-9).unwrap();
        assert_eq!(r.cost, -2.0);
        assert_eq!(r.min_payoff, 0.0);
        assert!(r.is_arbitrage);
        let z = verify_position(&straddle(), &[0.0; 3], 1e-9).unwrap();
        assert!(!z.is_arbitrage);
    }

    #[test]
    fn scaled_row_has_unit_weight() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 5.0], vec![0.5, -1.0]];
        let m = OnePeriodMarket::new(vec![2.0, 10.0], rows).unwrap();
        let p = project_to_cone(&m, 1e-9).unwrap();
        assert!(p.residual_norm < 1e-12);
        assert!((p.weights[1] - 2.0).abs() < 1e-12);
        assert!(p.weights[0].abs() < 1e-12 && p.weights[2].abs() < 1e-12);
        let d = deflator_from_projection(&p, 1e-9).unwrap();
        assert!((d.weights()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_payoffs_with_nonzero_price_is_arbitrage() {
        let m = OnePeriodMarket::new(vec![1.0], vec![vec![0.0]]).unwrap();
        let c = find_arbitrage(&m, 1e-9).unwrap().unwrap();
        assert_eq!(c.gamma, vec![-1.0]);
        assert_eq!(c.setup_gain, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(OnePeriodMarket::new(vec![], vec![vec![]]).is_err());
        assert!(OnePeriodMarket::new(vec![1.0], vec![]).is_err());
        assert!(OnePeriodMarket::new(vec![1.0], vec![vec![f64::NAN]]).is_err());
        assert!(matches!(
            OnePeriodMarket::new(vec![1.0, 2.0], vec![vec![1.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(project_to_cone(&straddle(), 0.0).is_err());
        assert!(verify_position(&straddle(), &[1.0], 1e-9).is_err());
    }
}
