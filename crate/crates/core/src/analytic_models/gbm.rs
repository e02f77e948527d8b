//! Geometric Brownian motion with the arbitrage-free drift `r − σ²/2`.

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_pdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    r: f64,
    s: f64,
    sigma: f64,
    t: f64,
}

impl GbmParams {
    pub fn new(r: f64, s: f64, sigma: f64, t: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidParameter(format!("r must be finite, got {r}")));
        }
        for (name, v) in [("s", s), ("sigma", sigma), ("t", t)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { r, s, sigma, t })
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

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn forward(&self) -> f64 {
        self.s * (self.r * self.t).exp()
    }

    /// Standard deviation `σ√t` of `log S_t`.
    pub fn total_vol(&self) -> f64 {
        self.sigma * self.t.sqrt()
    }

    /// `S_t` for a standard normal draw.
    pub fn terminal(&self, z: f64) -> f64 {
        let v = self.total_vol();
        self.forward() * (v * z - 0.5 * v * v).exp()
    }

    pub fn with_spot(&self, s: f64) -> Result<Self> {
        Self::new(self.r, s, self.sigma, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmPut {
    /// `E(k − S_t)^+`.
    pub forward_value: f64,
    /// `e^{−rt}` times the forward value.
    pub pv: f64,
    /// Derivatives of `pv` with respect to the spot.
    pub delta: f64,
    pub gamma: f64,
}

/// `E(k − S_t)^+ = kΦ(z) − fΦ(z − σ√t)` with `z = σ√t/2 + log(k/f)/(σ√t)`.
pub fn gbm_put(params: &GbmParams, k: f64) -> Result<GbmPut> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("strike must be positive, got {k}")));
    }
    let v = params.total_vol();
    let f = params.forward();
    let z = 0.5 * v + (k / f).ln() / v;
    let forward_value = k * normal_cdf(z) - f * normal_cdf(z - v);
    Ok(GbmPut {
        forward_value,
        pv: (-params.r * params.t).exp() * forward_value,
        delta: -normal_cdf(z - v),
        gamma: normal_pdf(z - v) / (params.s * v),
    })
}
