//! Fixed income on a filtration and on a discount curve.
//!
//! A short-rate process `R_j` (gross one-period return, known at `t_j`)
//! determines predictable deflators `Π_j = P / (R_0 ⋯ R_{j−1})`. Zero coupon
//! bonds, forward rates, swaps and futures follow from ratios of deflators.
//! The curve functions work on a static discount curve `t ↦ D(t)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::filtration::{product, FAMeasure, Filtration, SimpleFunction};
use crate::multi_period::{price_cashflows, DeflatorSequence, MarketPanel};
use crate::numerics::{adaptive_simpson, HermiteExpectation};

/// Gross one-period returns `R_0, …, R_{n−1}`, with `R_j` on `A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortRateProcess {
    rates: Vec<SimpleFunction>,
}

impl ShortRateProcess {
    pub fn new(filtration: &Filtration, rates: Vec<SimpleFunction>) -> Result<Self> {
        if rates.len() != filtration.horizon() {
            return Err(Error::DimensionMismatch {
                expected: filtration.horizon(),
                found: rates.len(),
            });
        }
        for (j, r) in rates.iter().enumerate() {
            if r.algebra() != filtration.algebra(j) || r.dim() != 1 {
                return Err(Error::AlgebraMismatch);
            }
            if let Some(b) = r.values().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::NonpositiveRate { time: j, block: b });
            }
        }
        Ok(Self { rates })
    }

    /// The same gross return `r` in every period.
    pub fn constant(filtration: &Filtration, r: f64) -> Result<Self> {
        let rates = (0..filtration.horizon())
            .map(|j| SimpleFunction::constant(filtration.algebra(j).clone(), &[r]))
            .collect();
        Self::new(filtration, rates)
    }

    pub fn rates(&self) -> &[SimpleFunction] {
        &self.rates
    }

    pub fn rate(&self, j: usize) -> &SimpleFunction {
        &self.rates[j]
    }

    /// Money-market account `R_0 ⋯ R_{j−1}` on `A_j` for `j = 0..=n`.
    pub fn accumulation(&self, filtration: &Filtration) -> Result<Vec<SimpleFunction>> {
        let mut out = vec![SimpleFunction::constant(filtration.algebra(0).clone(), &[1.0])];
        for j in 0..self.rates.len() {
            let grown = out[j].dot(&self.rates[j])?;
            out.push(grown.refine_to(filtration.algebra(j + 1))?);
        }
        Ok(out)
    }
}

/// `Π_j = P|_{A_j} / (R_0 ⋯ R_{j−1})` for a base measure `P` on the last algebra.
pub fn deflators_from_short_rate(
    filtration: &Filtration,
    short_rate: &ShortRateProcess,
    base: &FAMeasure,
) -> Result<DeflatorSequence> {
    if base.algebra() != filtration.algebra(filtration.horizon()) {
        return Err(Error::AlgebraMismatch);
    }
    let growth = short_rate.accumulation(filtration)?;
    let measures = (0..=filtration.horizon())
        .map(|j| {
            let p = base.restrict(filtration.algebra(j))?;
            product(&growth[j].map(|g| 1.0 / g), &p)
        })
        .collect::<Result<Vec<_>>>()?;
    DeflatorSequence::new(measures)
}

/// Money-market account as a single instrument: `X_j = R_0 ⋯ R_{j−1}`, no cash flows.
pub fn money_market_panel(
    times: Vec<f64>,
    filtration: &Filtration,
    short_rate: &ShortRateProcess,
) -> Result<MarketPanel> {
    let prices = short_rate.accumulation(filtration)?;
    let cashflows = (1..=filtration.horizon())
        .map(|j| SimpleFunction::zeros(filtration.algebra(j).clone(), 1))
        .collect();
    MarketPanel::new(times, filtration.clone(), prices, cashflows)
}

/// One-period deposit from `t_j` to `t_{j+1}`: price 1 at `t_j`, pays `R_j` at
/// `t_{j+1}` and is then worthless. Pair with `deflators.window(j, j + 1)`.
pub fn deposit_panel(
    times: &[f64],
    filtration: &Filtration,
    short_rate: &ShortRateProcess,
    j: usize,
) -> Result<MarketPanel> {
    if j >= short_rate.rates.len() || times.len() != filtration.horizon() + 1 {
        return Err(Error::InvalidParameter(format!("no deposit period starting at {j}")));
    }
    let window = filtration.window(j, j + 1)?;
    let x0 = SimpleFunction::constant(window.algebra(0).clone(), &[1.0]);
    let x1 = SimpleFunction::zeros(window.algebra(1).clone(), 1);
    let c1 = short_rate.rates[j].refine_to(window.algebra(1))?;
    MarketPanel::new(vec![times[j], times[j + 1]], window, vec![x0, x1], vec![c1])
}

/// `D_j(k) = Π_k|_{A_j} / Π_j` on `A_j`.
pub fn zcb_price(deflators: &DeflatorSequence, j: usize, k: usize) -> Result<SimpleFunction> {
    if j > k || k >= deflators.len() {
        return Err(Error::InvalidParameter(format!("need j <= k < {}, got {j}, {k}", deflators.len())));
    }
    let pj = deflators.measure(j);
    let pk = deflators.measure(k).restrict(pj.algebra())?;
    ratio(&pk, pj, j)
}

fn ratio(num: &FAMeasure, den: &FAMeasure, time: usize) -> Result<SimpleFunction> {
    let mut values = Vec::with_capacity(num.weights().len());
    for (b, (&a, &d)) in num.weights().iter().zip(den.weights()).enumerate() {
        if d == 0.0 {
            return Err(Error::DeflatorZeroBlock { time, block: b });
        }
        values.push(a / d);
    }
    SimpleFunction::scalar(num.algebra().clone(), values)
}

/// Simple forward rate `(D(t_j) / D(t_k) − 1) / δ` from two discount factors.
pub fn forward_rate_from_discounts(d_j: f64, d_k: f64, delta: f64) -> f64 {
    (d_j - d_k) / (delta * d_k)
}

/// `F_i(j, k)` on `A_i`.
pub fn forward_rate_tree(
    deflators: &DeflatorSequence,
    i: usize,
    j: usize,
    k: usize,
    delta: f64,
) -> Result<SimpleFunction> {
    if !(i <= j && j < k) {
        return Err(Error::InvalidParameter(format!("need i <= j < k, got {i}, {j}, {k}")));
    }
    check_delta(delta)?;
    let dj = zcb_price(deflators, i, j)?;
    let dk = zcb_price(deflators, i, k)?;
    let values = dj
        .values()
        .iter()
        .zip(dk.values())
        .map(|(&a, &b)| forward_rate_from_discounts(a, b, delta))
        .collect();
    SimpleFunction::scalar(dj.algebra().clone(), values)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("day count fraction must be positive, got {delta}")))
    }
}

/// Discount factors `D(t)` at listed maturities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    maturities: Vec<f64>,
    discounts: Vec<f64>,
}

/// Two maturities closer than this (relative to `max(1, t)`) are the same date.
pub const MATURITY_MATCH: f64 = 1e-9;

impl DiscountCurve {
    /// Maturities must be nonnegative and increasing, discounts positive.
    /// A maturity of 0, if listed, must carry discount 1.
    pub fn new(maturities: Vec<f64>, discounts: Vec<f64>) -> Result<Self> {
        if maturities.len() != discounts.len() {
            return Err(Error::DimensionMismatch {
                expected: maturities.len(),
                found: discounts.len(),
            });
        }
        if maturities.iter().any(|t| !t.is_finite() || *t < 0.0)
            || maturities.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParameter("maturities must be nonnegative and increasing".into()));
        }
        if discounts.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidParameter("discount factors must be positive".into()));
        }
        if maturities.first() == Some(&0.0) && (discounts[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("discount at maturity 0 must be 1".into()));
        }
        Ok(Self { maturities, discounts })
    }

    /// Parse lines of `maturity discount`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut maturities = Vec::new();
        let mut discounts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed: Vec<f64> = fields.iter().filter_map(|f| f.parse().ok()).collect();
            if fields.len() != 2 || parsed.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "line {}: expected `maturity discount`",
                    lineno + 1
                )));
            }
            maturities.push(parsed[0]);
            discounts.push(parsed[1]);
        }
        if maturities.is_empty() {
            return Err(Error::InvalidParameter("curve has no points".into()));
        }
        Self::new(maturities, discounts)
    }

    /// Curve read off `D_0(k)` for a deflator sequence with a one-block `A_0`.
    pub fn from_deflators(times: &[f64], deflators: &DeflatorSequence) -> Result<Self> {
        if deflators.measure(0).algebra().block_count() != 1 {
            return Err(Error::InvalidParameter("initial algebra must be trivial".into()));
        }
        if times.len() != deflators.len() {
            return Err(Error::DimensionMismatch {
                expected: deflators.len(),
                found: times.len(),
            });
        }
        let shifted: Vec<f64> = times.iter().map(|t| t - times[0]).collect();
        let discounts = (0..deflators.len())
            .map(|k| zcb_price(deflators, 0, k).map(|d| d.get(0)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(shifted, discounts)
    }

    pub fn maturities(&self) -> &[f64] {
        &self.maturities
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    /// `D(t)` at a listed maturity; `D(0) = 1`.
    pub fn discount(&self, t: f64) -> Result<f64> {
        if let Some(i) = self
            .maturities
            .iter()
            .position(|&m| (m - t).abs() <= MATURITY_MATCH * t.abs().max(1.0))
        {
            return Ok(self.discounts[i]);
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        Err(Error::MissingMaturity { time: t })
    }
}

/// Payment dates `t_0 < … < t_n` with accrual fractions `δ_j` for `(t_{j−1}, t_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    times: Vec<f64>,
    deltas: Vec<f64>,
}

impl Schedule {
    pub fn new(times: Vec<f64>, deltas: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidParameter("schedule needs at least two dates".into()));
        }
        if deltas.len() != times.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: times.len() - 1,
                found: deltas.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("schedule dates must increase".into()));
        }
        for &d in &deltas {
            check_delta(d)?;
        }
        Ok(Self { times, deltas })
    }

    /// Accrual fractions equal to the gaps between dates.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        let deltas = times.windows(2).map(|w| w[1] - w[0]).collect();
        Self::new(times, deltas)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// Number of accrual periods.
    pub fn periods(&self) -> usize {
        self.deltas.len()
    }

    fn annuity(&self, curve: &DiscountCurve) -> Result<f64> {
        let mut total = 0.0;
        for (t, d) in self.times[1..].iter().zip(&self.deltas) {
            total += d * curve.discount(*t)?;
        }
        Ok(total)
    }
}

/// Simple forward rate for `(t_j, t_k]` from a curve.
pub fn forward_rate(curve: &DiscountCurve, t_j: f64, t_k: f64, delta: f64) -> Result<f64> {
    if t_k <= t_j {
        return Err(Error::InvalidInterval(format!("forward period ({t_j}, {t_k}] is empty")));
    }
    check_delta(delta)?;
    Ok(forward_rate_from_discounts(curve.discount(t_j)?, curve.discount(t_k)?, delta))
}

/// `c Σ δ_j D(t_j) + D(t_n)`.
pub fn bond_price(curve: &DiscountCurve, schedule: &Schedule, coupon: f64) -> Result<f64> {
    let annuity = schedule.annuity(curve)?;
    let last = *schedule.times.last().expect("schedule has dates");
    Ok(coupon * annuity + curve.discount(last)?)
}

/// Coupon that prices the bond at 1: `(1 − D(t_n)) / Σ δ_j D(t_j)`.
pub fn par_coupon(curve: &DiscountCurve, schedule: &Schedule) -> Result<f64> {
    let annuity = schedule.annuity(curve)?;
    let last = *schedule.times.last().expect("schedule has dates");
    Ok((1.0 - curve.discount(last)?) / annuity)
}

/// Par swap rate `(D(t_0) − D(t_n)) / Σ δ_j D(t_j)`.
pub fn swap_par(curve: &DiscountCurve, schedule: &Schedule) -> Result<f64> {
    let annuity = schedule.annuity(curve)?;
    let first = curve.discount(schedule.times[0])?;
    let last = curve.discount(*schedule.times.last().expect("schedule has dates"))?;
    Ok((first - last) / annuity)
}

/// Both sides of `Σ_j F_{j−1}(j−1, j) δ_j Π_j|_{A_0} = Π_0 − Π_n|_{A_0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatingLegCheck {
    pub floating_leg: Vec<f64>,
    pub telescoped: Vec<f64>,
    pub max_violation: f64,
}

/// Value of the floating leg paid in arrears on each period of the tree.
///
/// `deltas[j − 1]` is the accrual fraction for period `j`.
pub fn floating_leg_value(deflators: &DeflatorSequence, deltas: &[f64]) -> Result<FloatingLegCheck> {
    let n = deflators.len() - 1;
    if deltas.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: deltas.len(),
        });
    }
    let a0 = deflators.measure(0).algebra().clone();
    let mut leg = vec![0.0; a0.block_count()];
    for j in 1..=n {
        let f = forward_rate_tree(deflators, j - 1, j - 1, j, deltas[j - 1])?;
        let pj = deflators.measure(j);
        let coupon = f.refine_to(pj.algebra())?.scale(deltas[j - 1]);
        let paid = product(&coupon, pj)?.restrict(&a0)?;
        for (acc, w) in leg.iter_mut().zip(paid.weights()) {
            *acc += w;
        }
    }
    let end = deflators.measure(n).restrict(&a0)?;
    let telescoped: Vec<f64> = deflators
        .measure(0)
        .weights()
        .iter()
        .zip(end.weights())
        .map(|(a, b)| a - b)
        .collect();
    let max_violation = leg
        .iter()
        .zip(&telescoped)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(FloatingLegCheck {
        floating_leg: leg,
        telescoped,
        max_violation,
    })
}

/// Forward rate agreement on the dates `(t_i, t_j, t_k)`, struck at `F_i(j, k)`.
///
/// Returns the three-date panel (zero price at `t_i`, pays −1 at `t_j`, worth
/// `(1 + Fδ) D_j(k)` just after, pays `1 + Fδ` at `t_k`) and the matching deflators.
pub fn fra_panel(
    times: &[f64],
    filtration: &Filtration,
    deflators: &DeflatorSequence,
    (i, j, k): (usize, usize, usize),
    delta: f64,
) -> Result<(MarketPanel, DeflatorSequence)> {
    if !(i < j && j < k && k <= filtration.horizon()) || times.len() != filtration.horizon() + 1 {
        return Err(Error::InvalidParameter(format!("need i < j < k <= n, got {i}, {j}, {k}")));
    }
    let sub = filtration.select(&[i, j, k])?;
    let f = forward_rate_tree(deflators, i, j, k, delta)?;
    let notional = f.map(|r| 1.0 + r * delta);
    let d_jk = zcb_price(deflators, j, k)?;
    let x_j = notional.refine_to(sub.algebra(1))?.dot(&d_jk)?;
    let prices = vec![
        SimpleFunction::zeros(sub.algebra(0).clone(), 1),
        x_j,
        SimpleFunction::zeros(sub.algebra(2).clone(), 1),
    ];
    let cashflows = vec![
        SimpleFunction::constant(sub.algebra(1).clone(), &[-1.0]),
        notional.refine_to(sub.algebra(2))?,
    ];
    let panel = MarketPanel::new(vec![times[i], times[j], times[k]], sub, prices, cashflows)?;
    Ok((panel, deflators.select(&[i, j, k])?))
}

/// Bond paying `c δ_j` at every date `t_j`, `j ≥ 1`, and 1 at `t_n`, priced on the tree.
pub fn bond_panel(
    times: Vec<f64>,
    filtration: &Filtration,
    deflators: &DeflatorSequence,
    deltas: &[f64],
    coupon: f64,
) -> Result<MarketPanel> {
    let n = filtration.horizon();
    if deltas.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: deltas.len(),
        });
    }
    let flows: Vec<SimpleFunction> = (0..=n)
        .map(|j| {
            let amount = match j {
                0 => 0.0,
                _ if j == n => coupon * deltas[j - 1] + 1.0,
                _ => coupon * deltas[j - 1],
            };
            SimpleFunction::constant(filtration.algebra(j).clone(), &[amount])
        })
        .collect();
    let prices = price_cashflows(filtration, deflators, &flows)?;
    MarketPanel::new(times, filtration.clone(), prices, flows[1..].to_vec())
}

/// Futures quotes `Φ_j = E_P[S_k | A_j]` for `j = 0..=k`.
///
/// Requires `Π_j / P|_{A_j}` to be known one period ahead (constant on the
/// children of each `A_{j−1}` block).
pub fn futures_quotes(
    deflators: &DeflatorSequence,
    base: &FAMeasure,
    terminal: &SimpleFunction,
) -> Result<Vec<SimpleFunction>> {
    let k = (0..deflators.len())
        .find(|&j| deflators.measure(j).algebra() == terminal.algebra())
        .ok_or(Error::AlgebraMismatch)?;
    for j in 1..=k {
        let alg = deflators.measure(j).algebra();
        let prev = deflators.measure(j - 1).algebra();
        let p = base.restrict(alg)?;
        let map = alg.coarsening_map(prev).ok_or(Error::NotCoarser)?;
        let mut seen: Vec<Option<f64>> = vec![None; prev.block_count()];
        for (b, &parent) in map.iter().enumerate() {
            let pw = p.get(b);
            if pw == 0.0 {
                continue;
            }
            let d = deflators.measure(j).get(b) / pw;
            match seen[parent] {
                None => seen[parent] = Some(d),
                Some(e) if (d - e).abs() <= 1e-12 * d.abs().max(e.abs()) => {}
                Some(_) => return Err(Error::NonPredictableDeflator { time: j, block: b }),
            }
        }
    }
    let weighted = product(terminal, &base.restrict(terminal.algebra())?)?;
    (0..=k)
        .map(|j| {
            let alg = deflators.measure(j).algebra();
            let num = weighted.restrict(alg)?;
            let den = base.restrict(alg)?;
            ratio(&num, &den, j)
        })
        .collect()
}

/// Futures contract: always worth 0, with margin `Φ_j − Φ_{j−1}` paid at `t_j`.
pub fn futures_panel(times: Vec<f64>, filtration: &Filtration, quotes: &[SimpleFunction]) -> Result<MarketPanel> {
    let k = quotes.len() - 1;
    let sub = filtration.window(0, k)?;
    let prices = (0..=k)
        .map(|j| SimpleFunction::zeros(sub.algebra(j).clone(), 1))
        .collect();
    let cashflows = (1..=k)
        .map(|j| quotes[j].sub(&quotes[j - 1].refine_to(sub.algebra(j))?))
        .collect::<Result<Vec<_>>>()?;
    MarketPanel::new(times, sub, prices, cashflows)
}

/// `−Cov(F, D) / E D` from joint samples with probabilities `probs`.
pub fn futures_convexity(forward: &[f64], discount: &[f64], probs: &[f64]) -> Result<f64> {
    if forward.len() != discount.len() || forward.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: forward.len(),
            found: discount.len().min(probs.len()),
        });
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) || probs.iter().any(|p| *p < 0.0) {
        return Err(Error::InvalidParameter("probabilities must be nonnegative with positive sum".into()));
    }
    let e = |g: &dyn Fn(usize) -> f64| (0..probs.len()).map(|i| probs[i] * g(i)).sum::<f64>() / total;
    let ef = e(&|i| forward[i]);
    let ed = e(&|i| discount[i]);
    let cov = e(&|i| (forward[i] - ef) * (discount[i] - ed));
    if ed == 0.0 {
        return Err(Error::InvalidParameter("mean discount is zero".into()));
    }
    Ok(-cov / ed)
}

/// Forward price for delivery at `expiry` of an asset with spot `spot` paying
/// dividends `(t_j, d_j)` before delivery: `(S − Σ d_j D(t_j)) / D(expiry)`.
pub fn forward_price(spot: f64, curve: &DiscountCurve, expiry: f64, dividends: &[(f64, f64)]) -> Result<f64> {
    let mut carried = spot;
    for &(t, d) in dividends {
        if !(t > 0.0 && t <= expiry) {
            return Err(Error::InvalidInterval(format!("dividend date {t} outside (0, {expiry}]")));
        }
        carried -= d * curve.discount(t)?;
    }
    Ok(carried / curve.discount(expiry)?)
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Volatility of the Ho-Lee short rate.
#[derive(Clone)]
pub enum Volatility {
    Constant(f64),
    /// `sigma(s)` and its antiderivative `Sigma(s)` with `Sigma(0) = 0`.
    Function { sigma: RealFn, integral: RealFn },
}

/// Ho-Lee model with short rate `R_s = φ(s) − σ(s) B_s`.
#[derive(Clone)]
pub struct HoLeeParams {
    phi: RealFn,
    vol: Volatility,
}

impl fmt::Debug for HoLeeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vol = match &self.vol {
            Volatility::Constant(s) => format!("Constant({s})"),
            Volatility::Function { .. } => "Function".to_string(),
        };
        f.debug_struct("HoLeeParams").field("vol", &vol).finish_non_exhaustive()
    }
}

/// Absolute tolerance of the drift integrals.
pub const HO_LEE_QUADRATURE_TOL: f64 = 1e-10;

impl HoLeeParams {
    pub fn constant<F>(phi: F, sigma: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter("sigma must be nonnegative".into()));
        }
        Ok(Self {
            phi: Arc::new(phi),
            vol: Volatility::Constant(sigma),
        })
    }

    /// Time-dependent volatility; `integral` must be the antiderivative of `sigma` vanishing at 0.
    pub fn new<F, S, I>(phi: F, sigma: S, integral: I) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            phi: Arc::new(phi),
            vol: Volatility::Function {
                sigma: Arc::new(sigma),
                integral: Arc::new(integral),
            },
        }
    }

    pub fn phi(&self, s: f64) -> f64 {
        (self.phi)(s)
    }

    pub fn sigma(&self, s: f64) -> f64 {
        match &self.vol {
            Volatility::Constant(v) => *v,
            Volatility::Function { sigma, .. } => sigma(s),
        }
    }

    /// `Σ(s) = ∫_0^s σ`.
    pub fn big_sigma(&self, s: f64) -> f64 {
        match &self.vol {
            Volatility::Constant(v) => v * s,
            Volatility::Function { integral, .. } => integral(s),
        }
    }

    fn drift_integral(&self, t: f64, u: f64) -> f64 {
        adaptive_simpson(|s| self.phi(s), t, u, HO_LEE_QUADRATURE_TOL)
    }

    // ∫_t^u (Σ(s) − Σ(u))² ds
    fn variance_integral(&self, t: f64, u: f64) -> f64 {
        match &self.vol {
            Volatility::Constant(v) => v * v * (u - t).powi(3) / 3.0,
            Volatility::Function { .. } => {
                let su = self.big_sigma(u);
                adaptive_simpson(|s| (self.big_sigma(s) - su).powi(2), t, u, HO_LEE_QUADRATURE_TOL)
            }
        }
    }

    /// Short rate at `t` given `B_t`.
    pub fn short_rate(&self, t: f64, b_t: f64) -> f64 {
        self.phi(t) - self.sigma(t) * b_t
    }
}

fn check_interval(t: f64, u: f64) -> Result<()> {
    if t.is_finite() && u.is_finite() && 0.0 <= t && t <= u {
        Ok(())
    } else {
        Err(Error::InvalidInterval(format!("need 0 <= t <= u, got t={t}, u={u}")))
    }
}

/// `D_t(u) = exp(−∫_t^u φ + ½ ∫_t^u (Σ(s) − Σ(u))² ds + (Σ(u) − Σ(t)) B_t)`.
pub fn ho_lee_discount(params: &HoLeeParams, t: f64, u: f64, b_t: f64) -> Result<f64> {
    check_interval(t, u)?;
    let exponent = -params.drift_integral(t, u)
        + 0.5 * params.variance_integral(t, u)
        + (params.big_sigma(u) - params.big_sigma(t)) * b_t;
    Ok(exponent.exp())
}

/// Gap `φ(t) − f(t)` between the expected short rate and the instantaneous
/// forward rate: `σ(t) ∫_0^t (Σ(t) − Σ(s)) ds`, which is `½σ²t²` for constant vol.
pub fn ho_lee_convexity(params: &HoLeeParams, t: f64) -> Result<f64> {
    check_interval(0.0, t)?;
    Ok(match &params.vol {
        Volatility::Constant(v) => 0.5 * v * v * t * t,
        Volatility::Function { .. } => {
            let st = params.big_sigma(t);
            params.sigma(t) * adaptive_simpson(|s| st - params.big_sigma(s), 0.0, t, HO_LEE_QUADRATURE_TOL)
        }
    })
}

/// Instantaneous forward rate `f(t) = φ(t) − convexity(t)` seen from time 0.
pub fn ho_lee_forward_rate(params: &HoLeeParams, t: f64) -> Result<f64> {
    Ok(params.phi(t) - ho_lee_convexity(params, t)?)
}

/// Both sides of `E[exp(−∫_0^t R_s ds) D_t(u)] = D_0(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleCheck {
    pub expected: f64,
    pub initial: f64,
    pub relative_error: f64,
}

/// Evaluate the discounted bond price expectation by two-dimensional Gauss-Hermite
/// quadrature over `(B_t, ∫_0^t σ(s) B_s ds)`.
pub fn ho_lee_martingale_check(params: &HoLeeParams, t: f64, u: f64, nodes: usize) -> Result<MartingaleCheck> {
    check_interval(t, u)?;
    if t == 0.0 {
        let d = ho_lee_discount(params, 0.0, u, 0.0)?;
        return Ok(MartingaleCheck {
            expected: d,
            initial: d,
            relative_error: 0.0,
        });
    }
    // I = ∫_0^t σ(s) B_s ds = ∫_0^t (Σ(t) − Σ(r)) dB_r is jointly normal with B_t
    let st = params.big_sigma(t);
    let var_i = params.variance_integral(0.0, t);
    let cov = match &params.vol {
        Volatility::Constant(v) => 0.5 * v * t * t,
        Volatility::Function { .. } => {
            adaptive_simpson(|r| st - params.big_sigma(r), 0.0, t, HO_LEE_QUADRATURE_TOL)
        }
    };
    let a = cov / t.sqrt();
    let b = (var_i - a * a).max(0.0).sqrt();
    let drift = params.drift_integral(0.0, t);
    let tail = -params.drift_integral(t, u) + 0.5 * params.variance_integral(t, u);
    let k = params.big_sigma(u) - st;
    let q = HermiteExpectation::new(nodes);
    let expected = q.expect2(|z1, z2| {
        let bt = t.sqrt() * z1;
        let i = a * z1 + b * z2;
        (-drift + i + tail + k * bt).exp()
    });
    let initial = ho_lee_discount(params, 0.0, u, 0.0)?;
    Ok(MartingaleCheck {
        expected,
        initial,
        relative_error: (expected - initial).abs() / initial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_period::check_deflator;

    fn two_period_curve() -> (DiscountCurve, Schedule) {
        (
            DiscountCurve::new(vec![1.0, 2.0], vec![0.95, 0.90]).unwrap(),
            Schedule::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0]).unwrap(),
        )
    }

    #[test]
    fn par_coupon_arithmetic() {
        let (curve, sched) = two_period_curve();
        let c = par_coupon(&curve, &sched).unwrap();
        assert!((c - 0.10 / 1.85).abs() < 1e-15);
        assert!((bond_price(&curve, &sched, c).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(bond_price(&curve, &sched, 0.0).unwrap(), 0.90);
        assert!((swap_par(&curve, &sched).unwrap() - 0.10 / 1.85).abs() < 1e-15);
    }

    #[test]
    fn one_period_swap_is_fra() {
        let curve = DiscountCurve::new(vec![0.5, 1.25], vec![0.98, 0.951]).unwrap();
        let sched = Schedule::new(vec![0.5, 1.25], vec![0.76]).unwrap();
        assert_eq!(
            swap_par(&curve, &sched).unwrap(),
            forward_rate(&curve, 0.5, 1.25, 0.76).unwrap()
        );
    }

    #[test]
    fn flat_curve_forward() {
        let r: f64 = 0.03;
        let curve = DiscountCurve::new(vec![1.0, 3.5], vec![(-r).exp(), (-3.5 * r).exp()]).unwrap();
        let f = forward_rate(&curve, 1.0, 3.5, 2.5).unwrap();
        assert!((f - ((2.5 * r).exp() - 1.0) / 2.5).abs() < 1e-14);
        assert!(matches!(curve.discount(2.0), Err(Error::MissingMaturity { .. })));
    }

    #[test]
    fn curve_text_format() {
        let c = DiscountCurve::parse("# maturity discount\n0.5 0.99\n\n1.0 0.975 # one year\n").unwrap();
        assert_eq!(c.maturities(), &[0.5, 1.0]);
        assert_eq!(c.discount(0.0).unwrap(), 1.0);
        assert!(DiscountCurve::parse("1.0\n").is_err());
        assert!(DiscountCurve::parse("1.0 -0.5\n").is_err());
        assert!(DiscountCurve::parse("").is_err());
    }

    #[test]
    fn constant_rate_deflators() {
        let filt = Filtration::binary(3);
        let sr = ShortRateProcess::constant(&filt, 1.05).unwrap();
        let p = FAMeasure::uniform(filt.algebra(3).clone());
        let d = deflators_from_short_rate(&filt, &sr, &p).unwrap();
        let z = zcb_price(&d, 0, 2).unwrap();
        assert!((z.get(0) - 1.05_f64.powi(-2)).abs() < 1e-15);
        let one = zcb_price(&d, 1, 2).unwrap();
        assert!(one.values().iter().all(|v| (v * 1.05 - 1.0).abs() < 1e-15));
        let leg = floating_leg_value(&d, &[1.0, 0.5, 0.25]).unwrap();
        assert!(leg.max_violation < 1e-15);
        assert!((leg.telescoped[0] - (1.0 - 1.05_f64.powi(-3))).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_rate_rejected() {
        let filt = Filtration::binary(1);
        let r = SimpleFunction::constant(filt.algebra(0).clone(), &[0.0]);
        assert!(matches!(
            ShortRateProcess::new(&filt, vec![r]),
            Err(Error::NonpositiveRate { time: 0, block: 0 })
        ));
    }

    #[test]
    fn deposit_and_money_market_pass() {
        let filt = Filtration::binary(2);
        let rates = vec![
            SimpleFunction::scalar(filt.algebra(0).clone(), vec![1.02]).unwrap(),
            SimpleFunction::scalar(filt.algebra(1).clone(), vec![1.01, 1.04]).unwrap(),
        ];
        let sr = ShortRateProcess::new(&filt, rates).unwrap();
        let p = FAMeasure::uniform(filt.algebra(2).clone());
        let d = deflators_from_short_rate(&filt, &sr, &p).unwrap();
        let times = [0.0, 1.0, 2.0];
        for j in 0..2 {
            let panel = deposit_panel(&times, &filt, &sr, j).unwrap();
            assert!(check_deflator(&panel, &d.window(j, j + 1).unwrap(), 1e-12).unwrap().passes);
        }
        let mm = money_market_panel(times.to_vec(), &filt, &sr).unwrap();
        assert!(check_deflator(&mm, &d, 1e-12).unwrap().passes);
    }

    #[test]
    fn forward_price_cases() {
        let curve = DiscountCurve::new(vec![1.0], vec![1.0 / 1.1]).unwrap();
        assert!((forward_price(50.0, &curve, 1.0, &[]).unwrap() - 55.0).abs() < 1e-12);
        let div = 50.0 * (1.1 - 1.0);
        assert!((forward_price(50.0, &curve, 1.0, &[(1.0, div)]).unwrap() - 50.0).abs() < 1e-12);
        assert!(forward_price(50.0, &curve, 1.0, &[(2.0, 1.0)]).is_err());
    }

    #[test]
    fn convexity_sign() {
        let f = [0.01, 0.03, 0.05];
        let d = [0.99, 0.97, 0.95];
        assert!(futures_convexity(&f, &d, &[1.0, 1.0, 1.0]).unwrap() > 0.0);
    }

    #[test]
    fn ho_lee_constant_vol() {
        let hl = HoLeeParams::constant(|s| 0.02 + 0.001 * s, 0.01).unwrap();
        assert!((ho_lee_convexity(&hl, 2.0).unwrap() - 2e-4).abs() < 1e-18);
        let (t, u, b) = (1.0, 3.0, 0.4_f64);
        let drift = 0.02 * 2.0 + 0.0005 * (9.0 - 1.0);
        let expect = (-drift + 1e-4 * 8.0 / 6.0 + 0.01 * 2.0 * b).exp();
        assert!((ho_lee_discount(&hl, t, u, b).unwrap() - expect).abs() < 1e-12);
        assert!(ho_lee_discount(&hl, 2.0, 1.0, 0.0).is_err());
        let m = ho_lee_martingale_check(&hl, 1.5, 4.0, 40).unwrap();
        assert!(m.relative_error < 1e-10, "{m:?}");
    }

    #[test]
    fn ho_lee_time_dependent_vol() {
        let hl = HoLeeParams::new(|s| 0.01 + 0.002 * s, |s| 0.01 + 0.004 * s, |s| 0.01 * s + 0.002 * s * s);
        let m = ho_lee_martingale_check(&hl, 2.0, 5.0, 40).unwrap();
        assert!(m.relative_error < 1e-8, "{m:?}");
        let zero = HoLeeParams::constant(|_| 0.03, 0.0).unwrap();
        assert!((ho_lee_discount(&zero, 1.0, 2.0, 5.0).unwrap() - (-0.03_f64).exp()).abs() < 1e-14);
    }
}
