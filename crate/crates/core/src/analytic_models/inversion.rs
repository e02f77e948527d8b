//! Distribution functions from characteristic functions by Gil-Pelaez inversion:
//! `F(x) = 1/2 − (1/π) ∫_0^∞ Im(e^{−iux} φ(u))/u du`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::CompositeLegendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    /// The integral stops at the first `U` with `|φ| ≤ threshold` on `[U, 2U]`.
    pub threshold: f64,
    /// Give up when `U` would exceed this.
    pub max_u: f64,
    /// Standard deviation of a Gaussian convolved with the law before inverting.
    /// Needed for laws with atoms, whose characteristic functions do not decay.
    pub smoothing: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            threshold: 1e-12,
            max_u: 1e6,
            smoothing: 0.0,
        }
    }
}

const PANEL_ORDER: usize = 16;
const DECAY_SAMPLES: usize = 16;

/// `F(x)` on each grid point, clipped to `[0, 1]` and made nondecreasing along the grid order.
pub fn cdf_from_charfn<F>(charfn: F, grid: &[f64], config: &InversionConfig) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Complex64,
{
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("grid points must be finite".into()));
    }
    let h = config.smoothing;
    let phi = |u: f64| {
        if h > 0.0 {
            charfn(u) * (-0.5 * h * h * u * u).exp()
        } else {
            charfn(u)
        }
    };
    let cutoff = truncation(&phi, config)?;
    // phase speed of φ near the origin, so panels resolve e^{iu(μ − x)}
    let d = 1e-6;
    let drift = ((phi(d) - phi(-d)).im / (2.0 * d)).abs();
    let mut out: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let freq = 1.0 + x.abs() + drift;
            let panels = ((cutoff * freq / 2.0).ceil() as usize).max(8);
            let rule = CompositeLegendre::new(PANEL_ORDER, panels);
            let integral = rule.integrate(0.0, cutoff, |u| {
                (Complex64::new(0.0, -u * x).exp() * phi(u)).im / u
            });
            (0.5 - integral / PI).clamp(0.0, 1.0)
        })
        .collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut running = 0.0_f64;
    for i in order {
        running = running.max(out[i]);
        out[i] = running;
    }
    Ok(out)
}

fn truncation<F: Fn(f64) -> Complex64>(phi: &F, config: &InversionConfig) -> Result<f64> {
    let mut u = 1.0;
    loop {
        if u > config.max_u {
            return Err(Error::TruncationFailure { u });
        }
        let decayed = (0..=DECAY_SAMPLES)
            .map(|i| u * (1.0 + i as f64 / DECAY_SAMPLES as f64))
            .all(|v| phi(v).norm() <= config.threshold);
        if decayed {
            return Ok(u);
        }
        u *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_cdf;

    fn normal(mean: f64, sd: f64) -> impl Fn(f64) -> Complex64 {
        move |u| Complex64::new(-0.5 * sd * sd * u * u, mean * u).exp()
    }

    #[test]
    fn standard_normal_cdf() {
        let grid: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
        let f = cdf_from_charfn(normal(0.0, 1.0), &grid, &InversionConfig::default()).unwrap();
        for (x, v) in grid.iter().zip(&f) {
            assert!((v - normal_cdf(*x)).abs() < 1e-8, "{x}");
        }
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn shifted_normal() {
        let grid = [-2.0, 0.3, 1.7];
        let f = cdf_from_charfn(normal(0.3, 1.0), &grid, &InversionConfig::default()).unwrap();
        for (x, v) in grid.iter().zip(&f) {
            assert!((v - normal_cdf(x - 0.3)).abs() < 1e-8);
        }
    }

    #[test]
    fn atom_needs_smoothing() {
        let atom = |u: f64| Complex64::new(0.0, 2.0 * u).exp();
        let err = cdf_from_charfn(atom, &[0.0], &InversionConfig::default()).unwrap_err();
        assert!(matches!(err, Error::TruncationFailure { .. }));
        let config = InversionConfig {
            smoothing: 1e-3,
            ..Default::default()
        };
        let f = cdf_from_charfn(atom, &[1.9, 2.0, 2.1], &config).unwrap();
        assert!(f[0] < 1e-12 && (f[1] - 0.5).abs() < 1e-8 && f[2] > 1.0 - 1e-12);
    }
}
