//! Multi-period markets on a filtration: strategies, accounts, deflators.
//!
//! Prices `X_j` and cash flows `C_j` are vector simple functions on `A_j`.
//! A deflator sequence `Π_0, …, Π_n` is valid when
//! `X_i Π_i = (C_{i+1} + X_{i+1}) Π_{i+1} |_{A_i}` for every `i < n`.
//! [`find_tree_deflator`] builds such a sequence node by node, or returns a
//! closed-out strategy that is an arbitrage.

use crate::cone_ftap::{project_to_cone, ArbitrageCertificate, OnePeriodMarket};
use crate::error::{Error, Result};
use crate::filtration::{product, Algebra, FAMeasure, Filtration, SimpleFunction};
use crate::linalg::{dot, least_squares, norm};

/// Prices and cash flows of `m` instruments at times `t_0 < … < t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPanel {
    times: Vec<f64>,
    filtration: Filtration,
    prices: Vec<SimpleFunction>,
    cashflows: Vec<SimpleFunction>,
    labels: Option<Vec<String>>,
}

impl MarketPanel {
    /// `prices[j]` lives on `A_j` for `j = 0..=n`; `cashflows[j − 1]` is `C_j` on
    /// `A_j` for `j = 1..=n`. `C_0` is zero.
    pub fn new(
        times: Vec<f64>,
        filtration: Filtration,
        prices: Vec<SimpleFunction>,
        cashflows: Vec<SimpleFunction>,
    ) -> Result<Self> {
        if filtration.is_relaxed() {
            return Err(Error::InvalidMarket("panels need an increasing filtration".into()));
        }
        let n = filtration.horizon();
        if n == 0 {
            return Err(Error::InvalidMarket("a panel needs at least two dates".into()));
        }
        if times.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: times.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMarket("times must be finite and increasing".into()));
        }
        if prices.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: prices.len(),
            });
        }
        if cashflows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: cashflows.len(),
            });
        }
        let m = prices[0].dim();
        let mut full = Vec::with_capacity(n + 1);
        full.push(SimpleFunction::zeros(filtration.algebra(0).clone(), m));
        full.extend(cashflows);
        for j in 0..=n {
            for f in [&prices[j], &full[j]] {
                if f.algebra() != filtration.algebra(j) {
                    return Err(Error::AlgebraMismatch);
                }
                if f.dim() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: f.dim(),
                    });
                }
                if f.values().iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidMarket(format!("non-finite value at time {j}")));
                }
            }
        }
        Ok(Self {
            times,
            filtration,
            prices,
            cashflows: full,
            labels: None,
        })
    }

    /// Two-date panel with `X_0 = x`, `C_1` the sampled payoffs and `X_1 = 0`.
    pub fn one_period(market: &OnePeriodMarket) -> Result<Self> {
        let n = market.outcomes();
        let m = market.instruments();
        let filtration = Filtration::new(vec![Algebra::trivial(n), Algebra::discrete(n)])?;
        let x0 = SimpleFunction::new(filtration.algebra(0).clone(), m, market.prices().to_vec())?;
        let c1 = SimpleFunction::from_blocks(filtration.algebra(1).clone(), market.payoffs())?;
        let x1 = SimpleFunction::zeros(filtration.algebra(1).clone(), m);
        let mut panel = Self::new(vec![0.0, 1.0], filtration, vec![x0, x1], vec![c1])?;
        panel.labels = market.labels().map(|l| l.to_vec());
        Ok(panel)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.instruments() {
            return Err(Error::DimensionMismatch {
                expected: self.instruments(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    /// Last time index `n`.
    pub fn horizon(&self) -> usize {
        self.prices.len() - 1
    }

    pub fn instruments(&self) -> usize {
        self.prices[0].dim()
    }

    pub fn price(&self, j: usize) -> &SimpleFunction {
        &self.prices[j]
    }

    /// `C_j`; zero at `j = 0`.
    pub fn cashflow(&self, j: usize) -> &SimpleFunction {
        &self.cashflows[j]
    }

    /// `max|X| + max|C|` over all times.
    pub fn scale(&self) -> f64 {
        let mx = self.prices.iter().fold(0.0_f64, |m, f| m.max(f.max_abs()));
        let mc = self.cashflows.iter().fold(0.0_f64, |m, f| m.max(f.max_abs()));
        mx + mc
    }

    /// Absolute tolerance for a relative `tol`.
    pub fn effective_tol(&self, tol: f64) -> f64 {
        tol * (1.0 + self.scale())
    }

    /// `(C_{j} + X_{j})` on block `b` of `A_j`.
    fn row(&self, j: usize, b: usize) -> Vec<f64> {
        self.cashflows[j]
            .value(b)
            .iter()
            .zip(self.prices[j].value(b))
            .map(|(c, x)| c + x)
            .collect()
    }
}

/// Trades `Γ_j` on `A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    trades: Vec<SimpleFunction>,
}

impl Strategy {
    pub fn new(trades: Vec<SimpleFunction>) -> Self {
        Self { trades }
    }

    /// No trades at all.
    pub fn zero(panel: &MarketPanel) -> Self {
        let m = panel.instruments();
        Self {
            trades: (0..=panel.horizon())
                .map(|j| SimpleFunction::zeros(panel.filtration.algebra(j).clone(), m))
                .collect(),
        }
    }

    /// Buy `gamma` at time 0 and sell it at time 1 in a two-date panel.
    pub fn open_close(panel: &MarketPanel, gamma: &[f64]) -> Result<Self> {
        let mut s = Self::zero(panel);
        if gamma.len() != panel.instruments() {
            return Err(Error::DimensionMismatch {
                expected: panel.instruments(),
                found: gamma.len(),
            });
        }
        s.trades[0] = SimpleFunction::constant(panel.filtration.algebra(0).clone(), gamma);
        let neg: Vec<f64> = gamma.iter().map(|g| -g).collect();
        s.trades[1] = SimpleFunction::constant(panel.filtration.algebra(1).clone(), &neg);
        Ok(s)
    }

    pub fn trades(&self) -> &[SimpleFunction] {
        &self.trades
    }

    /// Positions `Ξ_j = Γ_0 + … + Γ_j`, each on `A_j`.
    pub fn positions(&self) -> Result<Vec<SimpleFunction>> {
        let mut out: Vec<SimpleFunction> = Vec::with_capacity(self.trades.len());
        for g in &self.trades {
            let next = match out.last() {
                None => g.clone(),
                Some(prev) => prev.refine_to(g.algebra())?.add(g)?,
            };
            out.push(next);
        }
        Ok(out)
    }
}

/// Account entries `A_j = Ξ_{j−1}·C_j − Γ_j·X_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountProcess {
    pub entries: Vec<SimpleFunction>,
}

fn check_strategy(panel: &MarketPanel, strategy: &Strategy) -> Result<()> {
    let n = panel.horizon();
    if strategy.trades.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: strategy.trades.len(),
        });
    }
    for (j, g) in strategy.trades.iter().enumerate() {
        if g.algebra() != panel.filtration.algebra(j) {
            return Err(Error::AlgebraMismatch);
        }
        if g.dim() != panel.instruments() {
            return Err(Error::DimensionMismatch {
                expected: panel.instruments(),
                found: g.dim(),
            });
        }
    }
    Ok(())
}

/// Cash generated at each time by a strategy.
pub fn account_process(panel: &MarketPanel, strategy: &Strategy) -> Result<AccountProcess> {
    check_strategy(panel, strategy)?;
    let positions = strategy.positions()?;
    let mut entries = Vec::with_capacity(panel.horizon() + 1);
    for j in 0..=panel.horizon() {
        let bought = strategy.trades[j].dot(&panel.prices[j])?;
        let entry = if j == 0 {
            bought.scale(-1.0)
        } else {
            let held = positions[j - 1].refine_to(panel.filtration.algebra(j))?;
            held.dot(&panel.cashflows[j])?.sub(&bought)?
        };
        entries.push(entry);
    }
    Ok(AccountProcess { entries })
}

/// Result of [`is_arbitrage_strategy`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageCheck {
    pub is_arbitrage: bool,
    /// First `(time, block)` that breaks the definition.
    pub witness: Option<(usize, usize)>,
    /// `A_0` on each initial block.
    pub initial_gain: Vec<f64>,
}

/// Whether a closed-out strategy makes money up front and never loses afterwards.
///
/// `A_0` must be nonnegative on every initial block and strictly positive on at
/// least one; every later entry must be nonnegative. Comparisons use
/// `tol · (1 + max|X| + max|C|)`.
pub fn is_arbitrage_strategy(panel: &MarketPanel, strategy: &Strategy, tol: f64) -> Result<ArbitrageCheck> {
    let eps = panel.effective_tol(tol);
    let acct = account_process(panel, strategy)?;
    let positions = strategy.positions()?;
    if positions[panel.horizon()].max_abs() > eps {
        return Err(Error::NotClosedOut);
    }
    let initial_gain = acct.entries[0].values().to_vec();
    let mut witness = None;
    'outer: for (j, entry) in acct.entries.iter().enumerate() {
        for (b, &v) in entry.values().iter().enumerate() {
            if v < -eps {
                witness = Some((j, b));
                break 'outer;
            }
        }
    }
    let positive = initial_gain.iter().any(|&v| v > eps);
    if witness.is_none() && !positive {
        witness = Some((0, 0));
    }
    Ok(ArbitrageCheck {
        is_arbitrage: witness.is_none(),
        witness,
        initial_gain,
    })
}

/// Deflators `Π_j` on `A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatorSequence {
    measures: Vec<FAMeasure>,
}

impl DeflatorSequence {
    /// `Π_0` must be positive on every block and later measures nonnegative.
    pub fn new(measures: Vec<FAMeasure>) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::InvalidDeflator("empty sequence".into()));
        }
        for (j, mu) in measures.iter().enumerate() {
            if mu.dim() != 1 {
                return Err(Error::InvalidDeflator(format!("measure {j} is not scalar")));
            }
            for (b, &w) in mu.weights().iter().enumerate() {
                if (j == 0 && w <= 0.0) || w < 0.0 {
                    return Err(Error::InvalidDeflator(format!(
                        "weight {w} on block {b} at time {j}"
                    )));
                }
            }
        }
        Ok(Self { measures })
    }

    pub fn measures(&self) -> &[FAMeasure] {
        &self.measures
    }

    pub fn measure(&self, j: usize) -> &FAMeasure {
        &self.measures[j]
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    /// The measures at the listed times.
    pub fn select(&self, times: &[usize]) -> Result<Self> {
        if times.iter().any(|&t| t >= self.measures.len()) {
            return Err(Error::InvalidParameter("time index out of range".into()));
        }
        Self::new(times.iter().map(|&t| self.measures[t].clone()).collect())
    }

    /// `Π_j, …, Π_k`.
    pub fn window(&self, j: usize, k: usize) -> Result<Self> {
        self.select(&(j..=k).collect::<Vec<_>>())
    }

    fn check_against(&self, filtration: &Filtration) -> Result<()> {
        if self.measures.len() != filtration.horizon() + 1 {
            return Err(Error::DimensionMismatch {
                expected: filtration.horizon() + 1,
                found: self.measures.len(),
            });
        }
        for (j, mu) in self.measures.iter().enumerate() {
            if mu.algebra() != filtration.algebra(j) {
                return Err(Error::AlgebraMismatch);
            }
        }
        Ok(())
    }
}

/// Result of [`check_deflator`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatorCheck {
    pub passes: bool,
    pub max_violation: f64,
    /// `(time, block, instrument)` of the largest violation.
    pub location: Option<(usize, usize, usize)>,
}

/// Check `X_i Π_i = (C_{i+1} + X_{i+1}) Π_{i+1} |_{A_i}` for all `i < n`.
///
/// Passes when the largest violation is at most `tol · (1 + max|X| + max|C|)`.
pub fn check_deflator(panel: &MarketPanel, deflators: &DeflatorSequence, tol: f64) -> Result<DeflatorCheck> {
    deflators.check_against(&panel.filtration)?;
    let mut max_violation = 0.0_f64;
    let mut location = None;
    for i in 0..panel.horizon() {
        let lhs = product(&panel.prices[i], &deflators.measures[i])?;
        let next = panel.cashflows[i + 1].add(&panel.prices[i + 1])?;
        let rhs = product(&next, &deflators.measures[i + 1])?.restrict(panel.filtration.algebra(i))?;
        let m = panel.instruments();
        for (k, (a, b)) in lhs.weights().iter().zip(rhs.weights()).enumerate() {
            let v = (a - b).abs();
            if v > max_violation {
                max_violation = v;
                location = Some((i, k / m, k % m));
            }
        }
    }
    Ok(DeflatorCheck {
        passes: max_violation <= panel.effective_tol(tol),
        max_violation,
        location,
    })
}

/// `X_j` recomputed from later cash flows and the time-`k` price:
/// `(Σ_{j<i<k} C_i Π_i|_{A_j} + (C_k + X_k) Π_k|_{A_j}) / Π_j`.
pub fn propagate_prices(
    panel: &MarketPanel,
    deflators: &DeflatorSequence,
    j: usize,
    k: usize,
) -> Result<SimpleFunction> {
    deflators.check_against(&panel.filtration)?;
    if !(j < k && k <= panel.horizon()) {
        return Err(Error::InvalidParameter(format!("need j < k <= n, got j={j}, k={k}")));
    }
    let aj = panel.filtration.algebra(j);
    let m = panel.instruments();
    let mut total = FAMeasure::new(aj.clone(), m, vec![0.0; aj.block_count() * m])?;
    for i in j + 1..k {
        let term = product(&panel.cashflows[i], &deflators.measures[i])?.restrict(aj)?;
        total = total.add(&term)?;
    }
    let last = panel.cashflows[k].add(&panel.prices[k])?;
    total = total.add(&product(&last, &deflators.measures[k])?.restrict(aj)?)?;
    divide_by(&total, &deflators.measures[j], j)
}

fn divide_by(numerator: &FAMeasure, denom: &FAMeasure, time: usize) -> Result<SimpleFunction> {
    let dim = numerator.dim();
    let mut values = Vec::with_capacity(numerator.weights().len());
    for b in 0..numerator.algebra().block_count() {
        let d = denom.get(b);
        if d == 0.0 {
            return Err(Error::DeflatorZeroBlock { time, block: b });
        }
        values.extend(numerator.weight(b).iter().map(|v| v / d));
    }
    SimpleFunction::new(numerator.algebra().clone(), dim, values)
}

/// Ex-cash-flow prices `X_j = Σ_{k>j} CF_k Π_k|_{A_j} / Π_j` of a scalar cash-flow stream.
///
/// `cashflows[j]` lives on `A_j`; entry 0 is ignored. The returned prices are
/// zero at the last date.
pub fn price_cashflows(
    filtration: &Filtration,
    deflators: &DeflatorSequence,
    cashflows: &[SimpleFunction],
) -> Result<Vec<SimpleFunction>> {
    deflators.check_against(filtration)?;
    let n = filtration.horizon();
    if cashflows.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: cashflows.len(),
        });
    }
    let mut prices = vec![SimpleFunction::zeros(filtration.algebra(n).clone(), 1)];
    for j in (0..n).rev() {
        let next = cashflows[j + 1].add(&prices[0])?;
        let deflated = product(&next, &deflators.measures[j + 1])?.restrict(filtration.algebra(j))?;
        prices.insert(0, divide_by(&deflated, &deflators.measures[j], j)?);
    }
    Ok(prices)
}

/// A failing node and the strategy that exploits it.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeArbitrage {
    pub time: usize,
    pub block: usize,
    /// Position at the failing node against its children's payoffs.
    pub certificate: ArbitrageCertificate,
    pub strategy: Strategy,
    /// Every node `(time, block)` that admits no deflator continuation.
    pub dead_nodes: Vec<(usize, usize)>,
}

/// Outcome of [`find_tree_deflator`].
#[derive(Debug, Clone, PartialEq)]
pub enum TreeOutcome {
    Deflator(DeflatorSequence),
    Arbitrage(NodeArbitrage),
}

struct NodeSolve {
    live: bool,
    // weights on each child (zero on dead children)
    weights: Vec<f64>,
    gamma: Vec<f64>,
    gain: f64,
}

/// Build deflators node by node from the one-period problems of a tree, or
/// return an arbitrage strategy rooted at a time-0 node.
///
/// A node is live when its prices lie in the cone of `(C + X)` over its live
/// children; leaves are live. Dead children receive zero weight.
pub fn find_tree_deflator(panel: &MarketPanel, tol: f64) -> Result<TreeOutcome> {
    let n = panel.horizon();
    let filt = &panel.filtration;
    let eps = panel.effective_tol(tol);
    let m = panel.instruments();

    let mut children: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    for i in 0..n {
        let map = filt
            .algebra(i + 1)
            .coarsening_map(filt.algebra(i))
            .ok_or(Error::NotCoarser)?;
        let mut kids = vec![Vec::new(); filt.algebra(i).block_count()];
        for (c, &p) in map.iter().enumerate() {
            kids[p].push(c);
        }
        children.push(kids);
    }

    let mut live: Vec<Vec<bool>> = vec![Vec::new(); n + 1];
    live[n] = vec![true; filt.algebra(n).block_count()];
    let mut solves: Vec<Vec<NodeSolve>> = (0..n).map(|_| Vec::new()).collect();
    for i in (0..n).rev() {
        let mut layer = Vec::with_capacity(children[i].len());
        for (b, kids) in children[i].iter().enumerate() {
            let x = panel.prices[i].value(b).to_vec();
            let alive: Vec<usize> = kids.iter().copied().filter(|&c| live[i + 1][c]).collect();
            let solve = if alive.is_empty() {
                let live_node = norm(&x) <= eps;
                NodeSolve {
                    live: live_node,
                    weights: vec![0.0; kids.len()],
                    gain: dot(&x, &x),
                    gamma: x.iter().map(|v| -v).collect(),
                }
            } else {
                let rows: Vec<Vec<f64>> = alive.iter().map(|&c| panel.row(i + 1, c)).collect();
                let local = OnePeriodMarket::new(x.clone(), rows)?;
                let proj = project_to_cone(&local, tol)?;
                let mut weights = vec![0.0; kids.len()];
                for (w, &c) in proj.weights.iter().zip(&alive) {
                    let pos = kids.iter().position(|&k| k == c).expect("child");
                    weights[pos] = *w;
                }
                let live_node = proj.is_in_cone(tol);
                let gamma = if live_node {
                    proj.gamma
                } else {
                    clean_certificate(proj.gamma, &local, &proj.weights)
                };
                NodeSolve {
                    live: live_node,
                    weights,
                    gain: -dot(&gamma, &x),
                    gamma,
                }
            };
            layer.push(solve);
        }
        live[i] = layer.iter().map(|s| s.live).collect();
        solves[i] = layer;
    }

    if let Some(root) = live[0].iter().position(|&l| !l) {
        let mut trades: Vec<Vec<f64>> = (0..=n)
            .map(|j| vec![0.0; filt.algebra(j).block_count() * m])
            .collect();
        // a dead node's gain is ‖γ‖², which can sit below the panel tolerance;
        // rescale so the strategy collects one unit up front
        let unit = 1.0 / solves[0][root].gain;
        lift_arbitrage(panel, &children, &live, &solves, 0, root, unit, &mut trades);
        let strategy = Strategy::new(
            trades
                .into_iter()
                .enumerate()
                .map(|(j, v)| SimpleFunction::new(filt.algebra(j).clone(), m, v))
                .collect::<Result<Vec<_>>>()?,
        );
        let gamma = solves[0][root].gamma.clone();
        let min_payoff = children[0][root]
            .iter()
            .map(|&c| dot(&gamma, &panel.row(1, c)))
            .fold(f64::INFINITY, f64::min);
        let dead_nodes = live
            .iter()
            .enumerate()
            .flat_map(|(j, l)| {
                l.iter()
                    .enumerate()
                    .filter(|(_, &v)| !v)
                    .map(move |(b, _)| (j, b))
            })
            .collect();
        return Ok(TreeOutcome::Arbitrage(NodeArbitrage {
            time: 0,
            block: root,
            certificate: ArbitrageCertificate {
                setup_gain: solves[0][root].gain,
                min_payoff,
                gamma,
            },
            strategy,
            dead_nodes,
        }));
    }

    let mut measures = Vec::with_capacity(n + 1);
    let mut current = vec![1.0; filt.algebra(0).block_count()];
    measures.push(FAMeasure::scalar(filt.algebra(0).clone(), current.clone())?);
    for i in 0..n {
        let mut next = vec![0.0; filt.algebra(i + 1).block_count()];
        for (b, kids) in children[i].iter().enumerate() {
            for (w, &c) in solves[i][b].weights.iter().zip(kids) {
                next[c] = w * current[b];
            }
        }
        measures.push(FAMeasure::scalar(filt.algebra(i + 1).clone(), next.clone())?);
        current = next;
    }
    Ok(TreeOutcome::Deflator(DeflatorSequence::new(measures)?))
}

// The projection residual is orthogonal to the rows carrying weight. Remove
// the rounding left in those directions, since lifting may scale it up a lot.
fn clean_certificate(gamma: Vec<f64>, local: &OnePeriodMarket, weights: &[f64]) -> Vec<f64> {
    let support: Vec<&Vec<f64>> = local
        .payoffs()
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(r, _)| r)
        .collect();
    if support.is_empty() {
        return gamma;
    }
    let refs: Vec<&[f64]> = support.iter().map(|r| r.as_slice()).collect();
    let coef = least_squares(&refs, &gamma);
    let mut cleaned = gamma;
    for (c, row) in coef.iter().zip(&support) {
        for (g, v) in cleaned.iter_mut().zip(row.iter()) {
            *g -= c * v;
        }
    }
    cleaned
}

#[allow(clippy::too_many_arguments)]
fn lift_arbitrage(
    panel: &MarketPanel,
    children: &[Vec<Vec<usize>>],
    live: &[Vec<bool>],
    solves: &[Vec<NodeSolve>],
    i: usize,
    b: usize,
    scale: f64,
    trades: &mut [Vec<f64>],
) {
    let m = panel.instruments();
    let gamma = &solves[i][b].gamma;
    for k in 0..m {
        trades[i][b * m + k] += scale * gamma[k];
    }
    for &c in &children[i][b] {
        for k in 0..m {
            trades[i + 1][c * m + k] -= scale * gamma[k];
        }
        let payoff = dot(gamma, &panel.row(i + 1, c));
        if !live[i + 1][c] && payoff < 0.0 {
            // cover the shortfall at c with twice its size from c's own arbitrage
            let mu = 2.0 * (-payoff) / solves[i + 1][c].gain;
            lift_arbitrage(panel, children, live, solves, i + 1, c, scale * mu, trades);
        }
    }
}

/// Initial cost and terminal payout of a self-financing strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationCost {
    /// `Γ_0·X_0` on each initial block.
    pub cost: Vec<f64>,
    /// `Ξ_{n−1}·C_n − Γ_n·X_n`.
    pub terminal: SimpleFunction,
    /// Largest gap in `⟨Γ_0·X_0, Π_0⟩ = ⟨terminal, Π_n⟩` over initial blocks.
    pub pairing_residual: f64,
}

/// Cost of a closed-out self-financing strategy, checked against the deflator pairing.
pub fn replication_cost(
    panel: &MarketPanel,
    deflators: &DeflatorSequence,
    strategy: &Strategy,
    tol: f64,
) -> Result<ReplicationCost> {
    deflators.check_against(&panel.filtration)?;
    let eps = panel.effective_tol(tol);
    let acct = account_process(panel, strategy)?;
    let n = panel.horizon();
    let positions = strategy.positions()?;
    if positions[n].max_abs() > eps {
        return Err(Error::NotClosedOut);
    }
    for j in 1..n {
        for (b, &v) in acct.entries[j].values().iter().enumerate() {
            if v.abs() > eps {
                return Err(Error::NotSelfFinancing {
                    time: j,
                    block: b,
                    amount: v,
                });
            }
        }
    }
    let cost = strategy.trades[0].dot(&panel.prices[0])?;
    let terminal = acct.entries[n].clone();
    let lhs = product(&cost, &deflators.measures[0])?;
    let rhs = product(&terminal, &deflators.measures[n])?.restrict(panel.filtration.algebra(0))?;
    let pairing_residual = lhs
        .weights()
        .iter()
        .zip(rhs.weights())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let bound = eps * (1.0 + cost.max_abs());
    if pairing_residual > bound {
        return Err(Error::PairingViolation {
            residual: pairing_residual,
        });
    }
    Ok(ReplicationCost {
        cost: cost.values().to_vec(),
        terminal,
        pairing_residual,
    })
}

/// A self-financing strategy and its value process.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub strategy: Strategy,
    /// `v_j = Ξ_j·X_j` for `j < n` and the payoff at `n`.
    pub values: Vec<SimpleFunction>,
}

/// Replicate a payoff paid at the last date by backward induction.
pub fn replicate(panel: &MarketPanel, payoff: &SimpleFunction, tol: f64) -> Result<Replication> {
    let n = panel.horizon();
    let filt = &panel.filtration;
    if payoff.algebra() != filt.algebra(n) || payoff.dim() != 1 {
        return Err(Error::AlgebraMismatch);
    }
    let eps = panel.effective_tol(tol);
    let m = panel.instruments();
    let mut values = vec![payoff.clone()];
    let mut holdings: Vec<SimpleFunction> = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let next = &values[0];
        let map = filt
            .algebra(i + 1)
            .coarsening_map(filt.algebra(i))
            .ok_or(Error::NotCoarser)?;
        let ai = filt.algebra(i);
        let mut theta = vec![0.0; ai.block_count() * m];
        let mut value = vec![0.0; ai.block_count()];
        let scale_v = 1.0 + next.max_abs();
        for b in 0..ai.block_count() {
            let kids: Vec<usize> = (0..map.len()).filter(|&c| map[c] == b).collect();
            let rows: Vec<Vec<f64>> = kids.iter().map(|&c| panel.row(i + 1, c)).collect();
            let target: Vec<f64> = kids.iter().map(|&c| next.get(c)).collect();
            let cols: Vec<Vec<f64>> = (0..m).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
            let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            let th = least_squares(&refs, &target);
            let residual = rows
                .iter()
                .zip(&target)
                .fold(0.0_f64, |acc, (r, t)| acc.max((dot(r, &th) - t).abs()));
            if residual > eps * scale_v {
                return Err(Error::NotReplicable {
                    time: i,
                    block: b,
                    residual,
                });
            }
            value[b] = dot(&th, panel.prices[i].value(b));
            theta[b * m..(b + 1) * m].copy_from_slice(&th);
        }
        holdings.insert(0, SimpleFunction::new(ai.clone(), m, theta)?);
        values.insert(0, SimpleFunction::scalar(ai.clone(), value)?);
    }
    let mut trades = Vec::with_capacity(n + 1);
    trades.push(holdings[0].clone());
    for j in 1..n {
        let prev = holdings[j - 1].refine_to(filt.algebra(j))?;
        trades.push(holdings[j].sub(&prev)?);
    }
    trades.push(holdings[n - 1].refine_to(filt.algebra(n))?.scale(-1.0));
    Ok(Replication {
        strategy: Strategy::new(trades),
        values,
    })
}

/// Drift `μ` with `e^μ = R / cosh σ`, which makes the binomial stock a
/// discounted martingale under equal up/down weights.
pub fn arbitrage_free_drift(r_gross: f64, sigma: f64) -> f64 {
    r_gross.ln() - sigma.cosh().ln()
}

/// `n`-step binomial panel with a bond worth `R^j` and a stock `s·e^{μj + σZ_j}`,
/// where `Z_j` is the symmetric random walk. Times are `0, 1, …, n`.
pub fn binomial_panel(r_gross: f64, s: f64, mu: f64, sigma: f64, n: usize) -> Result<MarketPanel> {
    if !(r_gross > 0.0 && s > 0.0 && sigma >= 0.0) || n == 0 {
        return Err(Error::InvalidParameter("need R > 0, s > 0, σ ≥ 0 and n ≥ 1".into()));
    }
    let filtration = Filtration::binary(n);
    let mut prices = Vec::with_capacity(n + 1);
    let mut cashflows = Vec::with_capacity(n);
    for j in 0..=n {
        let alg = filtration.algebra(j).clone();
        let blocks: Vec<Vec<f64>> = (0..alg.block_count())
            .map(|b| {
                let z = 2.0 * (b as u64).count_ones() as f64 - j as f64;
                vec![r_gross.powi(j as i32), s * (mu * j as f64 + sigma * z).exp()]
            })
            .collect();
        prices.push(SimpleFunction::from_blocks(alg.clone(), &blocks)?);
        if j > 0 {
            cashflows.push(SimpleFunction::zeros(alg, 2));
        }
    }
    MarketPanel::new((0..=n).map(|j| j as f64).collect(), filtration, prices, cashflows)?
        .with_labels(vec!["bond".into(), "stock".into()])
}

/// `Π_j = R^{−j} P` with `P` uniform on the `2ⁿ` paths.
pub fn binomial_deflators(r_gross: f64, n: usize) -> Result<DeflatorSequence> {
    let filtration = Filtration::binary(n);
    let measures = (0..=n)
        .map(|j| {
            let alg = filtration.algebra(j).clone();
            let w = r_gross.powi(-(j as i32)) / (1u64 << j) as f64;
            FAMeasure::scalar(alg.clone(), vec![w; alg.block_count()])
        })
        .collect::<Result<Vec<_>>>()?;
    DeflatorSequence::new(measures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::one_period::overpriced_call_market;

    #[test]
    fn open_close_account() {
        let market = overpriced_call_market();
        let panel = MarketPanel::one_period(&market).unwrap();
        let gamma = [-90.0, 1.0, -2.0];
        let s = Strategy::open_close(&panel, &gamma).unwrap();
        let acct = account_process(&panel, &s).unwrap();
        assert_eq!(acct.entries[0].values(), &[2.0]);
        for (b, row) in market.payoffs().iter().enumerate() {
            assert_eq!(acct.entries[1].get(b), dot(&gamma, row));
        }
        let chk = is_arbitrage_strategy(&panel, &s, 1e-9).unwrap();
        assert!(chk.is_arbitrage);
        let zero = is_arbitrage_strategy(&panel, &Strategy::zero(&panel), 1e-9).unwrap();
        assert!(!zero.is_arbitrage);
    }

    #[test]
    fn unclosed_strategy_is_rejected() {
        let panel = MarketPanel::one_period(&overpriced_call_market()).unwrap();
        let mut s = Strategy::zero(&panel);
        s.trades[0] = SimpleFunction::constant(panel.filtration().algebra(0).clone(), &[1.0, 0.0, 0.0]);
        assert!(matches!(is_arbitrage_strategy(&panel, &s, 1e-9), Err(Error::NotClosedOut)));
    }

    #[test]
    fn binomial_deflator_passes() {
        let (r, sigma, n) = (1.01, 0.1, 4);
        let mu = arbitrage_free_drift(r, sigma);
        let panel = binomial_panel(r, 100.0, mu, sigma, n).unwrap();
        let d = binomial_deflators(r, n).unwrap();
        let chk = check_deflator(&panel, &d, 1e-12).unwrap();
        assert!(chk.passes, "{chk:?}");
        let bumped = binomial_panel(r, 100.0, mu + 0.01, sigma, n).unwrap();
        let bad = check_deflator(&bumped, &d, 1e-12).unwrap();
        assert!(!bad.passes);
        assert_eq!(bad.location.unwrap().2, 1);
    }

    #[test]
    fn tree_deflator_on_binomial() {
        let (r, sigma, n) = (1.02, 0.2, 3);
        let panel = binomial_panel(r, 50.0, arbitrage_free_drift(r, sigma), sigma, n).unwrap();
        match find_tree_deflator(&panel, 1e-9).unwrap() {
            TreeOutcome::Deflator(d) => {
                assert!(check_deflator(&panel, &d, 1e-10).unwrap().passes);
                let expect = binomial_deflators(r, n).unwrap();
                for j in 0..=n {
                    for (a, b) in d.measure(j).weights().iter().zip(expect.measure(j).weights()) {
                        assert!((a - b).abs() < 1e-12, "{a} {b}");
                    }
                }
            }
            TreeOutcome::Arbitrage(a) => panic!("unexpected arbitrage {a:?}"),
        }
    }

    #[test]
    fn one_period_panel_arbitrage_lifts() {
        let panel = MarketPanel::one_period(&overpriced_call_market()).unwrap();
        match find_tree_deflator(&panel, 1e-9).unwrap() {
            TreeOutcome::Arbitrage(a) => {
                assert_eq!((a.time, a.block), (0, 0));
                let chk = is_arbitrage_strategy(&panel, &a.strategy, 1e-9).unwrap();
                assert!(chk.is_arbitrage, "{chk:?}");
            }
            TreeOutcome::Deflator(_) => panic!("expected arbitrage"),
        }
    }

    #[test]
    fn deterministic_path() {
        // one atom, bond paying 1.1 at time 1 for price 1, then worthless
        let filt = Filtration::new(vec![Algebra::trivial(1); 3]).unwrap();
        let mk = |j: usize, v: f64| SimpleFunction::constant(filt.algebra(j).clone(), &[v]);
        let fair = MarketPanel::new(
            vec![0.0, 1.0, 2.0],
            filt.clone(),
            vec![mk(0, 1.0), mk(1, 1.1), mk(2, 0.0)],
            vec![mk(1, 0.0), mk(2, 1.21)],
        )
        .unwrap();
        assert!(matches!(find_tree_deflator(&fair, 1e-9).unwrap(), TreeOutcome::Deflator(_)));
        let unfair = MarketPanel::new(
            vec![0.0, 1.0, 2.0],
            filt.clone(),
            vec![mk(0, 1.0), mk(1, 1.1), mk(2, 0.0)],
            vec![mk(1, 0.0), mk(2, -0.5)],
        )
        .unwrap();
        match find_tree_deflator(&unfair, 1e-9).unwrap() {
            TreeOutcome::Arbitrage(a) => {
                assert!(is_arbitrage_strategy(&unfair, &a.strategy, 1e-9).unwrap().is_arbitrage);
                assert!(a.dead_nodes.contains(&(1, 0)));
            }
            TreeOutcome::Deflator(_) => panic!("expected arbitrage"),
        }
    }

    #[test]
    fn replication_of_call() {
        let (r, sigma, n) = (1.01, 0.15, 3);
        let panel = binomial_panel(r, 100.0, arbitrage_free_drift(r, sigma), sigma, n).unwrap();
        let d = binomial_deflators(r, n).unwrap();
        let payoff = panel.price(n).component(1).map(|s| (s - 100.0).max(0.0));
        let rep = replicate(&panel, &payoff, 1e-9).unwrap();
        let cost = replication_cost(&panel, &d, &rep.strategy, 1e-12).unwrap();
        assert!(cost.pairing_residual < 1e-12);
        let direct = d.measure(n).pair(&payoff).unwrap()[0];
        assert!((cost.cost[0] - direct).abs() < 1e-10);
        assert!((rep.values[0].get(0) - direct).abs() < 1e-10);
    }

    #[test]
    fn propagate_matches_prices() {
        let (r, sigma, n) = (1.03, 0.25, 4);
        let panel = binomial_panel(r, 10.0, arbitrage_free_drift(r, sigma), sigma, n).unwrap();
        let d = binomial_deflators(r, n).unwrap();
        for j in 0..n {
            for k in j + 1..=n {
                let p = propagate_prices(&panel, &d, j, k).unwrap();
                let diff = p.sub(panel.price(j)).unwrap().max_abs();
                assert!(diff < 1e-10, "j={j} k={k} diff={diff}");
            }
        }
    }

    #[test]
    fn not_self_financing_is_reported() {
        let (r, sigma, n) = (1.01, 0.15, 2);
        let panel = binomial_panel(r, 100.0, arbitrage_free_drift(r, sigma), sigma, n).unwrap();
        let d = binomial_deflators(r, n).unwrap();
        let mut trades = Strategy::zero(&panel).trades().to_vec();
        trades[0] = SimpleFunction::constant(panel.filtration().algebra(0).clone(), &[1.0, 0.0]);
        trades[1] = SimpleFunction::constant(panel.filtration().algebra(1).clone(), &[-1.0, 0.0]);
        let s = Strategy::new(trades);
        assert!(matches!(
            replication_cost(&panel, &d, &s, 1e-12),
            Err(Error::NotSelfFinancing { time: 1, .. })
        ));
    }
}
