//! Put prices when `log S_t` is driven by a Lévy process with finite variance.

use crate::error::{Error, Result};

use super::inversion::{cdf_from_charfn, InversionConfig};
use super::kolmogorov::{k_transform, KolmogorovId};

/// `S_t = s e^{μt + σL_t}` with `μ = r − κ_1(σ)` so that `e^{−rt} S_t` has constant mean.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModelParams {
    r: f64,
    s: f64,
    sigma: f64,
    t: f64,
    base: KolmogorovId,
}

impl LevyModelParams {
    /// `base` describes `L_1`.
    pub fn new(r: f64, s: f64, sigma: f64, t: f64, base: KolmogorovId) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidParameter(format!("r must be finite, got {r}")));
        }
        for (name, v) in [("s", s), ("sigma", sigma), ("t", t)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !base.cumulant(sigma).is_finite() {
            return Err(Error::InvalidParameter("cumulant is not finite".into()));
        }
        Ok(Self { r, s, sigma, t, base })
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

    pub fn base(&self) -> &KolmogorovId {
        &self.base
    }

    pub fn forward(&self) -> f64 {
        self.s * (self.r * self.t).exp()
    }

    /// `μ = r − κ_1(σ)`.
    pub fn drift(&self) -> f64 {
        self.r - self.base.cumulant(self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyPut {
    /// `E(k − S_t)^+`.
    pub forward_value: f64,
    pub pv: f64,
    /// `P(S_t ≤ k)`.
    pub probability: f64,
    /// The same event under the measure tilted by `e^{σL_t}`.
    pub tilted_probability: f64,
}

/// `E(k − S_t)^+ = k P(S_t ≤ k) − s e^{rt} P*(S_t ≤ k)`.
pub fn levy_put(params: &LevyModelParams, k: f64, config: &InversionConfig) -> Result<LevyPut> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("strike must be positive, got {k}")));
    }
    let law = params.base.scaled(params.t);
    let tilted = k_transform(&law, params.sigma);
    let c = ((k / params.s).ln() - params.drift() * params.t) / params.sigma;
    let probability = cdf_from_charfn(|u| law.charfn(u), &[c], config)?[0];
    let tilted_probability = cdf_from_charfn(|u| tilted.charfn(u), &[c], config)?[0];
    let forward_value = k * probability - params.forward() * tilted_probability;
    Ok(LevyPut {
        forward_value,
        pv: (-params.r * params.t).exp() * forward_value,
        probability,
        tilted_probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_models::gbm::{gbm_put, GbmParams};

    #[test]
    fn gaussian_base_is_gbm() {
        let base = KolmogorovId::gaussian(0.0, 1.0).unwrap();
        let lp = LevyModelParams::new(0.05, 100.0, 0.2, 1.0, base).unwrap();
        let g = gbm_put(&GbmParams::new(0.05, 100.0, 0.2, 1.0).unwrap(), 100.0).unwrap();
        let l = levy_put(&lp, 100.0, &InversionConfig::default()).unwrap();
        assert!((l.forward_value - g.forward_value).abs() < 1e-6 * g.forward_value);
    }

    #[test]
    fn deep_in_the_money() {
        let base = KolmogorovId::new(0.0, vec![(0.0, 0.04), (0.5, 0.02)]).unwrap();
        let lp = LevyModelParams::new(0.02, 100.0, 0.3, 0.5, base).unwrap();
        let k = 1e4;
        let l = levy_put(&lp, k, &InversionConfig::default()).unwrap();
        assert!((l.forward_value - (k - lp.forward())).abs() < 1e-6 * k);
    }
}
