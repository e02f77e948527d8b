//! Normal distribution helpers and quadrature rules.
//!
//! Gaussian expectations of payoffs with kinks are integrated piecewise with
//! composite Gauss-Legendre panels split at the kinks; smooth integrands can
//! use Gauss-Hermite directly.

use gauss_quad::{GaussHermite, GaussLegendre};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::num::NonZeroUsize;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function, accurate in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

fn order(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).expect("nonzero")
}

/// Composite Gauss-Legendre rule: `panels` equal panels of an `order`-point rule.
#[derive(Debug, Clone)]
pub struct CompositeLegendre {
    nodes: Vec<(f64, f64)>,
    panels: usize,
}

impl CompositeLegendre {
    pub fn new(order_per_panel: usize, panels: usize) -> Self {
        let rule = GaussLegendre::new(order(order_per_panel));
        let nodes = rule.iter().map(|(x, w)| (*x, *w)).collect();
        Self {
            nodes,
            panels: panels.max(1),
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        if a == b {
            return 0.0;
        }
        let h = (b - a) / self.panels as f64;
        let mut total = 0.0;
        for p in 0..self.panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            let mut panel = 0.0;
            for &(x, w) in &self.nodes {
                panel += w * f(mid + 0.5 * h * x);
            }
            total += 0.5 * h * panel;
        }
        total
    }

    /// Total number of function evaluations per call to [`integrate`](Self::integrate).
    pub fn evaluations(&self) -> usize {
        self.nodes.len() * self.panels
    }

    /// Nodes and weights of the composite rule on `[a, b]`.
    pub fn nodes_on(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let h = (b - a) / self.panels as f64;
        let mut out = Vec::with_capacity(self.evaluations());
        for p in 0..self.panels {
            let mid = a + h * (p as f64 + 0.5);
            for &(x, w) in &self.nodes {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }
}

/// Expectations `E f(Z)` for a standard normal `Z`, integrated piecewise
/// between breakpoints on a truncated range.
#[derive(Debug, Clone)]
pub struct NormalExpectation {
    lower: f64,
    upper: f64,
    rule: CompositeLegendre,
}

impl Default for NormalExpectation {
    fn default() -> Self {
        Self::new(-14.0, 14.0, 20, 64)
    }
}

impl NormalExpectation {
    /// `panels` is the number of Gauss-Legendre panels per segment between breakpoints.
    pub fn new(lower: f64, upper: f64, order_per_panel: usize, panels: usize) -> Self {
        Self {
            lower,
            upper,
            rule: CompositeLegendre::new(order_per_panel, panels),
        }
    }

    fn segments(&self, breakpoints: &[f64]) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|z| z.is_finite() && *z > self.lower && *z < self.upper)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(self.lower);
        edges.extend(cuts);
        edges.push(self.upper);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// `E f(Z)`, splitting the integral at the standard-normal `breakpoints`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, breakpoints: &[f64], mut f: F) -> f64 {
        self.segments(breakpoints)
            .into_iter()
            .map(|(a, b)| self.rule.integrate(a, b, |z| f(z) * normal_pdf(z)))
            .sum()
    }

    /// Sample points `z_i` with probability weights `p_i` (summing to ~1).
    pub fn atoms(&self, breakpoints: &[f64]) -> Vec<(f64, f64)> {
        self.segments(breakpoints)
            .into_iter()
            .flat_map(|(a, b)| self.rule.nodes_on(a, b))
            .map(|(z, w)| (z, w * normal_pdf(z)))
            .collect()
    }
}

/// Gauss-Hermite rule rescaled for expectations of a standard normal variable.
#[derive(Debug, Clone)]
pub struct HermiteExpectation {
    atoms: Vec<(f64, f64)>,
}

impl HermiteExpectation {
    pub fn new(n: usize) -> Self {
        let rule = GaussHermite::new(order(n));
        let scale = 1.0 / PI.sqrt();
        let atoms = rule
            .iter()
            .map(|(x, w)| (std::f64::consts::SQRT_2 * x, w * scale))
            .collect();
        Self { atoms }
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.atoms.iter().map(|&(z, p)| p * f(z)).sum()
    }

    /// `E f(Z1, Z2)` for independent standard normals.
    pub fn expect2<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        for &(z1, p1) in &self.atoms {
            for &(z2, p2) in &self.atoms {
                total += p1 * p2 * f(z1, z2);
            }
        }
        total
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_symmetry_and_known_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-5.0) - 2.866_515_718_791_939e-7).abs() < 1e-20);
        assert!((normal_cdf(1.3) + normal_cdf(-1.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normal_moments() {
        let q = NormalExpectation::default();
        assert!((q.expect(&[], |_| 1.0) - 1.0).abs() < 1e-13);
        assert!(q.expect(&[], |z| z).abs() < 1e-13);
        assert!((q.expect(&[], |z| z * z) - 1.0).abs() < 1e-12);
        assert!((q.expect(&[], |z| z.powi(4)) - 3.0).abs() < 1e-11);
        // E (Z)^+ = 1/sqrt(2 pi), kink at zero
        let plus = q.expect(&[0.0], |z| z.max(0.0));
        assert!((plus - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hermite_exponential_moment() {
        let q = HermiteExpectation::new(40);
        let v = q.expect(|z| (0.7 * z).exp());
        assert!((v - (0.245_f64).exp()).abs() < 1e-13);
        let c = q.expect2(|a, b| a * (0.6 * a + 0.8 * b));
        assert!((c - 0.6).abs() < 1e-13);
    }

    #[test]
    fn simpson_polynomial_and_exp() {
        let v = adaptive_simpson(|x| x.exp(), 0.0, 2.0, 1e-12);
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-11);
        let p = adaptive_simpson(|x| x * x * x, -1.0, 3.0, 1e-12);
        assert!((p - 20.0).abs() < 1e-12);
    }
}
