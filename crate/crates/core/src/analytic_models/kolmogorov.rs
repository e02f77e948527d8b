//! Infinitely divisible laws with finite variance, in the form
//! `log E e^{iuX} = iγu + ∫ K_u(x) dG(x)` with `K_u(x) = (e^{iux} − 1 − iux)/x²`.
//!
//! `G` is a finite list of point masses `(x_i, ΔG_i)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KolmogorovId {
    gamma: f64,
    nodes: Vec<(f64, f64)>,
}

// |y| below which the series forms are used
const SERIES_CUTOFF: f64 = 1.0;

impl KolmogorovId {
    pub fn new(gamma: f64, nodes: Vec<(f64, f64)>) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter("gamma must be finite".into()));
        }
        if nodes.iter().any(|&(x, g)| !x.is_finite() || !(g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter("nodes need finite x and nonnegative mass".into()));
        }
        Ok(Self { gamma, nodes })
    }

    /// `N(mean, variance)`: all of `G` at the origin.
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::new(mean, vec![(0.0, variance)])
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn mean(&self) -> f64 {
        self.gamma
    }

    /// `Var X = Σ ΔG_i`.
    pub fn variance(&self) -> f64 {
        self.nodes.iter().map(|n| n.1).sum()
    }

    /// Parameters of the sum of `t` independent copies (the law of `L_t`).
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            gamma: t * self.gamma,
            nodes: self.nodes.iter().map(|&(x, g)| (x, t * g)).collect(),
        }
    }

    pub fn log_charfn(&self, u: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, self.gamma * u);
        for &(x, g) in &self.nodes {
            acc += kernel(u, x) * g;
        }
        acc
    }

    pub fn charfn(&self, u: f64) -> Complex64 {
        self.log_charfn(u).exp()
    }

    /// `κ(σ) = log E e^{σX} = γσ + Σ (e^{σx} − 1 − σx)/x² ΔG`.
    pub fn cumulant(&self, sigma: f64) -> f64 {
        let mut acc = self.gamma * sigma;
        for &(x, g) in &self.nodes {
            acc += sigma * sigma * exp_remainder(sigma * x) * g;
        }
        acc
    }
}

/// `K_u(x)`, equal to `−u²/2` at `x = 0`.
pub fn kernel(u: f64, x: f64) -> Complex64 {
    let y = u * x;
    // K_u(x) = u² g(y) with g(y) = (e^{iy} − 1 − iy)/y²
    let half = 0.5 * y;
    let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
    let re = -0.5 * sinc * sinc;
    let im = if y.abs() < SERIES_CUTOFF {
        // (sin y − y)/y² = Σ_{n≥1} (−1)^n y^{2n−1}/(2n+1)!
        let y2 = y * y;
        let mut term = -y / 6.0;
        let mut sum = term;
        for n in 2..10 {
            let k = (2 * n) as f64;
            term *= -y2 / (k * (k + 1.0));
            sum += term;
        }
        sum
    } else {
        (y.sin() - y) / (y * y)
    };
    Complex64::new(re, im) * (u * u)
}

/// `(e^y − 1 − y)/y²`, equal to 1/2 at 0.
fn exp_remainder(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        let mut term = 0.5;
        let mut sum = term;
        for n in 1..20 {
            term *= y / (n as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (y.exp_m1() - y) / (y * y)
    }
}

/// `(e^{σx} − 1)/x`, equal to `σ` at `x = 0`.
fn tilt_factor(sigma: f64, x: f64) -> f64 {
    if x == 0.0 {
        sigma
    } else {
        (sigma * x).exp_m1() / x
    }
}

/// Parameters of `X` under the measure `e^{σX} / E e^{σX}`:
/// `γ* = γ + Σ (e^{σx} − 1)/x ΔG`, `ΔG* = e^{σx} ΔG`.
pub fn k_transform(id: &KolmogorovId, sigma: f64) -> KolmogorovId {
    let mut gamma = id.gamma;
    let mut nodes = Vec::with_capacity(id.nodes.len());
    for &(x, g) in &id.nodes {
        gamma += tilt_factor(sigma, x) * g;
        nodes.push((x, (sigma * x).exp() * g));
    }
    KolmogorovId { gamma, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal() {
        let n = KolmogorovId::gaussian(0.0, 1.0).unwrap();
        for u in [0.0, 0.3, 2.0, -5.0] {
            let l = n.log_charfn(u);
            assert_eq!(l, Complex64::new(-0.5 * u * u, 0.0));
        }
        assert_eq!(n.cumulant(0.4), 0.4 * 0.4 * 0.5);
    }

    #[test]
    fn deterministic_and_poisson() {
        let d = KolmogorovId::new(1.5, vec![]).unwrap();
        assert!((d.charfn(2.0) - Complex64::new(0.0, 3.0).exp()).norm() < 1e-15);
        let p = KolmogorovId::new(0.2, vec![(1.0, 3.0)]).unwrap();
        for u in [1e-6, 0.01, 0.7, 4.0] {
            let i = Complex64::i();
            let expect = i * 0.2 * u + 3.0 * ((i * u).exp() - 1.0 - i * u);
            assert!((p.log_charfn(u) - expect).norm() < 1e-14 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn kernel_small_argument() {
        // both branches agree across the cutoff
        for y in [0.999_999, 1.000_001] {
            let k = kernel(1.0, y);
            let i = Complex64::i();
            let direct = ((i * y).exp() - 1.0 - i * y) / (y * y);
            assert!((k - direct).norm() < 1e-14);
        }
        let tiny = kernel(1.0, 1e-9);
        assert!((tiny.re + 0.5).abs() < 1e-16 && (tiny.im + 1e-9 / 6.0).abs() < 1e-24);
    }

    #[test]
    fn tilt_of_normal_shifts_mean() {
        let n = KolmogorovId::gaussian(0.0, 1.0).unwrap();
        let t = k_transform(&n, 0.3);
        assert_eq!(t.gamma(), 0.3);
        assert_eq!(t.nodes(), n.nodes());
        assert_eq!(k_transform(&n, 0.0), n);
    }

    #[test]
    fn cumulant_matches_direct() {
        let id = KolmogorovId::new(0.1, vec![(0.0, 0.5), (0.4, 0.2), (-1.3, 0.1)]).unwrap();
        let s: f64 = 0.7;
        let direct = 0.1 * s
            + 0.5 * s * s / 2.0
            + 0.2 * ((s * 0.4).exp() - 1.0 - s * 0.4) / 0.16
            + 0.1 * ((-s * 1.3).exp() - 1.0 + s * 1.3) / 1.69;
        assert!((id.cumulant(s) - direct).abs() < 1e-14);
    }
}
