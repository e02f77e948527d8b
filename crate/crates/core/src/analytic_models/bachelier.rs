//! Normal model `S = Rs(1 + σZ)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_pdf, HermiteExpectation, NormalExpectation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BachelierParams {
    r: f64,
    s: f64,
    sigma: f64,
}

impl BachelierParams {
    pub fn new(r: f64, s: f64, sigma: f64) -> Result<Self> {
        for (name, v) in [("R", r), ("s", s), ("sigma", sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { r, s, sigma })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `f = Rs`, the mean of `S`.
    pub fn forward(&self) -> f64 {
        self.r * self.s
    }

    /// Terminal price for a standard normal draw.
    pub fn terminal(&self, z: f64) -> f64 {
        self.forward() * (1.0 + self.sigma * z)
    }

    /// Standard normal point at which `S = x`.
    pub fn z_of(&self, x: f64) -> f64 {
        (x / self.forward() - 1.0) / self.sigma
    }

    /// `E g(S) / R` with `g` integrated piecewise between the given kinks in price space.
    pub fn discounted_expectation<F: Fn(f64) -> f64>(&self, kinks: &[f64], g: F) -> f64 {
        let breaks: Vec<f64> = kinks.iter().map(|&x| self.z_of(x)).collect();
        NormalExpectation::default().expect(&breaks, |z| g(self.terminal(z))) / self.r
    }
}

/// Price and hedge ratio of an option.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionValue {
    pub price: f64,
    /// Shares in the minimum-variance hedge, `Cov(S, V) / Var S`.
    pub delta: f64,
}

/// `p(k) = (k/R − s)Φ(z) + sσφ(z)` with `z = (k/(Rs) − 1)/σ`; delta `−Φ(z)`.
pub fn bachelier_put(params: &BachelierParams, k: f64) -> OptionValue {
    let z = params.z_of(k);
    let s = params.s;
    OptionValue {
        price: (k / params.r - s) * normal_cdf(z) + s * params.sigma * normal_pdf(z),
        delta: -normal_cdf(z),
    }
}

/// Call from the put by parity `c = p + s − k/R`.
pub fn bachelier_call(params: &BachelierParams, k: f64) -> OptionValue {
    let put = bachelier_put(params, k);
    OptionValue {
        price: put.price + params.s - k / params.r,
        delta: put.delta + 1.0,
    }
}

/// `E(k − S)^+ / R` by quadrature.
pub fn bachelier_put_quadrature(params: &BachelierParams, k: f64) -> f64 {
    params.discounted_expectation(&[k], |x| (k - x).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityCheck {
    pub call: f64,
    pub call_quadrature: f64,
    pub residual: f64,
}

/// Parity call against a direct quadrature of `E(S − k)^+ / R`.
pub fn bachelier_call_put_consistency(params: &BachelierParams, k: f64) -> ParityCheck {
    let call = bachelier_call(params, k).price;
    let call_quadrature = params.discounted_expectation(&[k], |x| (x - k).max(0.0));
    ParityCheck {
        call,
        call_quadrature,
        residual: (call - call_quadrature).abs(),
    }
}

/// `corr(S, (S − f)^+) = 1/√(2 − 2/π)`, the same for every parameter choice.
pub fn atm_call_correlation() -> f64 {
    1.0 / (2.0 - 2.0 / PI).sqrt()
}

/// Moments of a payoff under the normal model, by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffMoments {
    pub mean: f64,
    pub variance: f64,
    pub covariance: f64,
}

impl PayoffMoments {
    pub fn compute<F: Fn(f64) -> f64>(params: &BachelierParams, kinks: &[f64], payoff: F) -> Self {
        let f = params.forward();
        let q = NormalExpectation::default();
        let breaks: Vec<f64> = kinks.iter().map(|&x| params.z_of(x)).collect();
        let mean = q.expect(&breaks, |z| payoff(params.terminal(z)));
        let variance = q.expect(&breaks, |z| (payoff(params.terminal(z)) - mean).powi(2));
        let covariance = q.expect(&breaks, |z| (params.terminal(z) - f) * payoff(params.terminal(z)));
        Self {
            mean,
            variance,
            covariance,
        }
    }

    pub fn correlation(&self, params: &BachelierParams) -> f64 {
        let sd_s = params.forward() * params.sigma;
        if self.variance <= 0.0 {
            return 1.0;
        }
        self.covariance / (sd_s * self.variance.sqrt())
    }
}

/// Quadrature value of `corr(S, (S − f)^+)`.
pub fn atm_call_correlation_quadrature(params: &BachelierParams) -> f64 {
    let f = params.forward();
    PayoffMoments::compute(params, &[f], |x| (x - f).max(0.0)).correlation(params)
}

/// Second-order estimates next to exact quadrature values for hedging `p(S)`
/// with the bond and the stock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeErrorEstimate {
    pub corr_approx: f64,
    pub lse_approx: f64,
    pub corr: f64,
    pub lse: f64,
    /// Shares and bonds (paying `R`) in the exact least-squares hedge.
    pub shares: f64,
    pub bonds: f64,
    /// `p′(f) = 0`: the best hedge holds no stock, only cash worth `E p(S)`.
    pub zero_slope: bool,
}

/// `slope` and `curvature` are `p′(f)` and `p″(f)`; `kinks` lists points
/// where `p` is not smooth, for the quadrature.
pub fn hedge_error_estimate<F: Fn(f64) -> f64>(
    params: &BachelierParams,
    payoff: F,
    slope: f64,
    curvature: f64,
    kinks: &[f64],
) -> HedgeErrorEstimate {
    let f = params.forward();
    let r = params.r;
    let fs = f * params.sigma;
    let quad = 0.5 * fs.powi(4) * curvature * curvature;
    let var_approx = fs * fs * slope * slope + quad;
    let corr_approx = if var_approx > 0.0 {
        fs * slope / var_approx.sqrt()
    } else {
        1.0
    };
    let m = PayoffMoments::compute(params, kinks, payoff);
    let shares = m.covariance / (fs * fs);
    let corr = m.correlation(params);
    let lse = (m.variance - m.covariance * m.covariance / (fs * fs)).max(0.0) / r;
    HedgeErrorEstimate {
        corr_approx,
        lse_approx: quad / r,
        corr,
        lse,
        shares,
        bonds: (m.mean - shares * f) / r,
        zero_slope: slope == 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovIdentity {
    pub covariance: f64,
    pub stein: f64,
    pub residual: f64,
}

/// Both sides of `Cov(N, f(M)) = Cov(N, M) E f′(M)` for `M = Z₁`, `N = aZ₁ + bZ₂`.
pub fn normal_cov_identity_check<F, D>(a: f64, b: f64, f: F, f_prime: D) -> CovIdentity
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let q = HermiteExpectation::new(64);
    let mean_f = q.expect(&f);
    let covariance = q.expect2(|z1, z2| (a * z1 + b * z2) * (f(z1) - mean_f));
    let stein = a * q.expect(&f_prime);
    CovIdentity {
        covariance,
        stein,
        residual: (covariance - stein).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atm_put_closed_form() {
        for r in [0.9, 1.0, 1.05] {
            let p = BachelierParams::new(r, 100.0, 0.2).unwrap();
            let v = bachelier_put(&p, p.forward());
            assert_eq!(v.price, 100.0 * 0.2 * normal_pdf(0.0));
            assert_eq!(v.delta, -0.5);
        }
        assert!((20.0 / (2.0 * PI).sqrt() - 7.978845608).abs() < 1e-9);
    }

    #[test]
    fn far_strikes() {
        let p = BachelierParams::new(1.0, 100.0, 0.1).unwrap();
        let v = bachelier_put(&p, -1e4);
        assert!(v.price.abs() < 1e-300 && v.delta.abs() < 1e-300);
        let c = bachelier_call(&p, 0.0);
        assert!((c.price - 100.0).abs() < 1e-12);
    }

    #[test]
    fn put_matches_quadrature() {
        let p = BachelierParams::new(1.05, 100.0, 0.15).unwrap();
        let a = bachelier_put(&p, 100.0).price;
        assert!((a - bachelier_put_quadrature(&p, 100.0)).abs() < 1e-10 * a);
    }

    #[test]
    fn atm_correlation_constant() {
        let p = BachelierParams::new(1.02, 50.0, 0.3).unwrap();
        assert!((atm_call_correlation_quadrature(&p) - atm_call_correlation()).abs() < 1e-10);
    }

    #[test]
    fn linear_and_quadratic_payoffs() {
        let p = BachelierParams::new(1.0, 100.0, 0.05).unwrap();
        let lin = hedge_error_estimate(&p, |x| 3.0 * x - 7.0, 3.0, 0.0, &[]);
        assert!((lin.corr - 1.0).abs() < 1e-12 && lin.lse.abs() < 1e-9 && lin.lse_approx == 0.0);
        assert!((lin.shares - 3.0).abs() < 1e-12);
        let f = p.forward();
        let quad = hedge_error_estimate(&p, |x| (x - f).powi(2), 0.0, 2.0, &[]);
        assert!(quad.zero_slope && quad.corr.abs() < 1e-10 && quad.shares.abs() < 1e-10);
        // cash worth E p(S) = Var S
        assert!((quad.bonds * p.r() - 25.0).abs() < 1e-9);
        // the second-order estimate is exact for a quadratic
        assert!((quad.lse - quad.lse_approx).abs() < 1e-8 * quad.lse);
    }

    #[test]
    fn stein_identity() {
        let c = normal_cov_identity_check(0.5, 0.75_f64.sqrt(), normal_cdf, normal_pdf);
        assert!(c.residual < 1e-8, "{c:?}");
        let id = normal_cov_identity_check(0.3, 0.9, |x| x, |_| 1.0);
        assert!((id.covariance - 0.3).abs() < 1e-12);
        let sq = normal_cov_identity_check(0.3, 0.9, |x| x * x, |x| 2.0 * x);
        assert!(sq.covariance.abs() < 1e-12 && sq.stein.abs() < 1e-12);
    }
}
