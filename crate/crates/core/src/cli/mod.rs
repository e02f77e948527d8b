//! Command-line front end.
//!
//! ```text
//! deflator detect <spec.json> [--tol X]
//! deflator price  <spec.json> --payoff call:K|put:K|zcb|<file> [--tol X]
//! deflator hedge  <spec.json> --payoff ... [--tol X]
//! deflator curve  <curve.txt> --schedule "t0,t1,...;d1,..." par|fra|swap|price [--coupon c]
//! ```
//!
//! Exit codes: 0 success, 2 input error, 3 arbitrage in the input, 4 singular
//! hedge Gram matrix. Results go to standard output as JSON, diagnostics to
//! standard error.

pub mod result;
pub mod spec_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analytic_models::{
    bachelier_call, bachelier_put, gbm_put, levy_put, BachelierParams, GbmParams, InversionConfig, PayoffMoments,
};
use crate::cone_ftap::{classify, project_to_cone, Classification, OnePeriodMarket, DEFAULT_TOL};
use crate::error::Error;
use crate::filtration::SimpleFunction;
use crate::multi_period::{check_deflator, find_tree_deflator, price_cashflows, replicate, MarketPanel, TreeOutcome};
use crate::numerics::NormalExpectation;
use crate::one_period::{least_squares_hedge, price_payoff};
use crate::rates::{bond_price, forward_rate, par_coupon, swap_par, DiscountCurve, Schedule};

use result::{blocks, num, nums, Document};
use spec_file::{Model, SpecFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ARBITRAGE: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "deflator", version, about = "Arbitrage detection, pricing and hedging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a market: price deflator (exit 0) or arbitrage (exit 3).
    Detect {
        path: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Price a payoff with the market's deflator or a model formula.
    Price {
        path: PathBuf,
        #[arg(long)]
        payoff: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Least-squares hedge of a payoff.
    Hedge {
        path: PathBuf,
        #[arg(long)]
        payoff: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Fixed-income quantities from a discount curve.
    Curve {
        path: PathBuf,
        /// Dates and optional accrual fractions: `t0,t1,...;d1,...`.
        #[arg(long, allow_hyphen_values = true)]
        schedule: String,
        quantity: Quantity,
        /// Coupon rate for `price`.
        #[arg(long)]
        coupon: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Par,
    Fra,
    Swap,
    Price,
}

#[derive(Debug, Clone, PartialEq)]
enum Payoff {
    Call(f64),
    Put(f64),
    Zcb,
    Values(Vec<f64>),
}

struct Failure {
    code: i32,
    message: String,
    document: Option<Document>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SingularGram { .. } => EXIT_SINGULAR,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
            document: None,
        }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
        document: None,
    }
}

type Outcome = std::result::Result<(Document, i32), Failure>;

/// Run the tool on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let outcome = match &cli.command {
        Command::Detect { path, tol } => load(path).and_then(|s| detect(&s, *tol)),
        Command::Price { path, payoff, tol } => load(path).and_then(|s| price(&s, payoff, *tol)),
        Command::Hedge { path, payoff, tol } => load(path).and_then(|s| hedge(&s, payoff, *tol)),
        Command::Curve {
            path,
            schedule,
            quantity,
            coupon,
        } => curve(path, schedule, *quantity, *coupon),
    };
    match outcome {
        Ok((doc, code)) => {
            let _ = out.write_all(doc.render().as_bytes());
            code
        }
        Err(f) => {
            if let Some(doc) = f.document {
                let _ = out.write_all(doc.render().as_bytes());
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> std::result::Result<SpecFile, Failure> {
    Ok(SpecFile::parse(&read(path)?)?)
}

fn tolerance(spec: &SpecFile, flag: Option<f64>) -> std::result::Result<f64, Failure> {
    let tol = flag.or(spec.tol()).unwrap_or(DEFAULT_TOL);
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(input(format!("tolerance must be positive, got {tol}")))
    }
}

fn parse_payoff(text: &str) -> std::result::Result<Payoff, Failure> {
    let strike = |s: &str| -> std::result::Result<f64, Failure> {
        s.parse::<f64>()
            .ok()
            .filter(|k| k.is_finite())
            .ok_or_else(|| input(format!("bad strike `{s}`")))
    };
    if let Some(k) = text.strip_prefix("call:") {
        return Ok(Payoff::Call(strike(k)?));
    }
    if let Some(k) = text.strip_prefix("put:") {
        return Ok(Payoff::Put(strike(k)?));
    }
    if text == "zcb" {
        return Ok(Payoff::Zcb);
    }
    let values: Vec<f64> = serde_json::from_str(&read(Path::new(text))?)
        .map_err(|e| input(format!("payoff file {text}: {e}")))?;
    Ok(Payoff::Values(values))
}

impl Payoff {
    fn evaluate(&self, underlying: Option<&[f64]>, len: usize) -> std::result::Result<Vec<f64>, Failure> {
        let need = || underlying.ok_or_else(|| input("call/put payoffs need an instrument named `stock` or an `underlying`"));
        Ok(match self {
            Self::Call(k) => need()?.iter().map(|x| (x - k).max(0.0)).collect(),
            Self::Put(k) => need()?.iter().map(|x| (k - x).max(0.0)).collect(),
            Self::Zcb => vec![1.0; len],
            Self::Values(v) => {
                if v.len() != len {
                    return Err(input(format!("payoff file has {} values, expected {len}", v.len())));
                }
                v.clone()
            }
        })
    }

    fn strike(&self) -> std::result::Result<(f64, bool), Failure> {
        match self {
            Self::Call(k) => Ok((*k, true)),
            Self::Put(k) => Ok((*k, false)),
            _ => Err(input("model specs support call:K and put:K payoffs")),
        }
    }
}

fn labels(doc: &mut Document, names: Option<&[String]>) {
    if let Some(l) = names {
        doc.set("instruments", json!(l));
    }
}

fn one_period_payoff(market: &OnePeriodMarket, underlying: Option<usize>, payoff: &Payoff) -> std::result::Result<Vec<f64>, Failure> {
    let col = underlying.map(|i| market.payoff_column(i));
    payoff.evaluate(col.as_deref(), market.outcomes())
}

fn panel_payoff(panel: &MarketPanel, underlying: Option<usize>, payoff: &Payoff) -> std::result::Result<SimpleFunction, Failure> {
    let n = panel.horizon();
    let alg = panel.filtration().algebra(n).clone();
    let terminal = underlying.map(|i| {
        let x = panel.price(n).component(i);
        let c = panel.cashflow(n).component(i);
        x.values().iter().zip(c.values()).map(|(a, b)| a + b).collect::<Vec<f64>>()
    });
    let values = payoff.evaluate(terminal.as_deref(), alg.block_count())?;
    Ok(SimpleFunction::scalar(alg, values)?)
}

fn arbitrage_failure(doc: Document) -> Failure {
    Failure {
        code: EXIT_ARBITRAGE,
        message: "market admits arbitrage".into(),
        document: Some(doc),
    }
}

fn one_period_verdict(doc: &mut Document, market: &OnePeriodMarket, tol: f64) -> std::result::Result<Option<crate::one_period::Deflator>, Failure> {
    labels(doc, market.labels());
    doc.diagnostic("tolerance", num(tol));
    let projection = project_to_cone(market, tol)?;
    doc.diagnostic("residual_norm", num(projection.residual_norm));
    match classify(market, tol)? {
        Classification::Deflator(d) => {
            doc.set("verdict", json!("deflator")).set("weights", nums(d.weights()));
            if let Some(p) = d.probabilities() {
                doc.set("probabilities", nums(&p));
            }
            Ok(Some(d))
        }
        Classification::Arbitrage(cert) => {
            doc.set("verdict", json!("arbitrage")).set(
                "certificate",
                json!({
                    "gamma": nums(&cert.gamma),
                    "setup_gain": num(cert.setup_gain),
                    "min_payoff": num(cert.min_payoff),
                }),
            );
            Ok(None)
        }
    }
}

fn panel_verdict(doc: &mut Document, panel: &MarketPanel, tol: f64) -> std::result::Result<Option<crate::multi_period::DeflatorSequence>, Failure> {
    labels(doc, panel.labels());
    doc.diagnostic("tolerance", num(tol));
    match find_tree_deflator(panel, tol)? {
        TreeOutcome::Deflator(d) => {
            let check = check_deflator(panel, &d, tol)?;
            doc.set("verdict", json!("deflator"))
                .set("weights", json!(d.measures().iter().map(|m| nums(m.weights())).collect::<Vec<_>>()))
                .diagnostic("max_violation", num(check.max_violation));
            Ok(Some(d))
        }
        TreeOutcome::Arbitrage(a) => {
            doc.set("verdict", json!("arbitrage")).set(
                "certificate",
                json!({
                    "time": a.time,
                    "block": a.block,
                    "gamma": nums(&a.certificate.gamma),
                    "setup_gain": num(a.certificate.setup_gain),
                    "min_payoff": num(a.certificate.min_payoff),
                    "strategy": a.strategy.trades().iter().map(blocks).collect::<Vec<_>>(),
                    "dead_nodes": a.dead_nodes,
                }),
            );
            Ok(None)
        }
    }
}

fn detect(spec: &SpecFile, tol: Option<f64>) -> Outcome {
    let tol = tolerance(spec, tol)?;
    let mut doc = Document::new("detect", spec.kind());
    let found = match spec.build()? {
        Model::OnePeriod { market, .. } => one_period_verdict(&mut doc, &market, tol)?.is_some(),
        Model::Panel { panel, .. } => panel_verdict(&mut doc, &panel, tol)?.is_some(),
        _ => return Err(input("detect needs a one_period or panel spec")),
    };
    if found {
        Ok((doc, EXIT_OK))
    } else {
        Err(arbitrage_failure(doc))
    }
}

fn price(spec: &SpecFile, payoff: &str, tol: Option<f64>) -> Outcome {
    let tol = tolerance(spec, tol)?;
    let payoff = parse_payoff(payoff)?;
    let mut doc = Document::new("price", spec.kind());
    match spec.build()? {
        Model::OnePeriod { market, underlying } => {
            let v = one_period_payoff(&market, underlying, &payoff)?;
            let Some(d) = one_period_verdict(&mut doc, &market, tol)? else {
                return Err(arbitrage_failure(doc));
            };
            let p = price_payoff(&market, &d, &v)?;
            doc.set("prices", nums(&[p]));
        }
        Model::Panel { panel, underlying } => {
            let v = panel_payoff(&panel, underlying, &payoff)?;
            let Some(d) = panel_verdict(&mut doc, &panel, tol)? else {
                return Err(arbitrage_failure(doc));
            };
            let filt = panel.filtration();
            let n = panel.horizon();
            let mut flows: Vec<SimpleFunction> = (0..n)
                .map(|j| SimpleFunction::zeros(filt.algebra(j).clone(), 1))
                .collect();
            flows.push(v);
            let prices = price_cashflows(filt, &d, &flows)?;
            doc.set("prices", nums(prices[0].values()));
        }
        Model::Bachelier(p) => {
            let (k, call) = payoff.strike()?;
            bachelier_price(&mut doc, &p, k, call);
        }
        Model::Gbm(p) => {
            let (k, call) = payoff.strike()?;
            gbm_price(&mut doc, &p, k, call)?;
        }
        Model::Levy { params, smoothing } => {
            let (k, call) = payoff.strike()?;
            let config = InversionConfig {
                smoothing,
                ..Default::default()
            };
            let put = levy_put(&params, k, &config)?;
            let parity = if call { params.forward() - k } else { 0.0 };
            let fv = put.forward_value + parity;
            doc.set("forward_value", num(fv))
                .set("pv", num((-params.r() * params.t()).exp() * fv))
                .diagnostic("probability", num(put.probability))
                .diagnostic("tilted_probability", num(put.tilted_probability))
                .diagnostic("threshold", num(config.threshold));
        }
        Model::Curve(_) => return Err(input("use the curve command for discount curves")),
    }
    Ok((doc, EXIT_OK))
}

fn bachelier_price(doc: &mut Document, p: &BachelierParams, k: f64, call: bool) {
    let v = if call { bachelier_call(p, k) } else { bachelier_put(p, k) };
    let quad = p.discounted_expectation(&[k], |x| if call { (x - k).max(0.0) } else { (k - x).max(0.0) });
    doc.set("price", num(v.price))
        .set("delta", num(v.delta))
        .diagnostic("quadrature", num(quad))
        .diagnostic("quadrature_gap", num((v.price - quad).abs()));
}

fn gbm_price(doc: &mut Document, p: &GbmParams, k: f64, call: bool) -> std::result::Result<(), Failure> {
    let put = gbm_put(p, k)?;
    let f = p.forward();
    let (fv, delta) = if call {
        (put.forward_value + f - k, put.delta + 1.0)
    } else {
        (put.forward_value, put.delta)
    };
    let disc = (-p.r() * p.t()).exp();
    let z_k = ((k / f).ln() + 0.5 * p.total_vol().powi(2)) / p.total_vol();
    let quad = NormalExpectation::default().expect(&[z_k], |z| {
        let s = p.terminal(z);
        if call { (s - k).max(0.0) } else { (k - s).max(0.0) }
    });
    doc.set("forward_value", num(fv))
        .set("pv", num(disc * fv))
        .set("delta", num(delta))
        .set("gamma", num(put.gamma))
        .diagnostic("quadrature", num(quad))
        .diagnostic("quadrature_gap", num((fv - quad).abs()));
    Ok(())
}

fn hedge(spec: &SpecFile, payoff: &str, tol: Option<f64>) -> Outcome {
    let tol = tolerance(spec, tol)?;
    let payoff = parse_payoff(payoff)?;
    let mut doc = Document::new("hedge", spec.kind());
    match spec.build()? {
        Model::OnePeriod { market, underlying } => {
            let v = one_period_payoff(&market, underlying, &payoff)?;
            let Some(d) = one_period_verdict(&mut doc, &market, tol)? else {
                return Err(arbitrage_failure(doc));
            };
            let h = least_squares_hedge(&market, &d, &v).map_err(|e| singular_message(e, market.labels()))?;
            let hedged: Vec<f64> = market
                .payoffs()
                .iter()
                .map(|row| row.iter().zip(&h.gamma).map(|(a, b)| a * b).sum())
                .collect();
            doc.set("gamma", nums(&h.gamma))
                .set("hedge_cost", num(h.hedge_cost))
                .set("least_squared_error", num(h.least_squared_error))
                .diagnostic("formula_error", num(h.formula_error))
                .diagnostic("correlation", num(correlation(&hedged, &v, d.weights())));
        }
        Model::Panel { panel, underlying } => {
            let v = panel_payoff(&panel, underlying, &payoff)?;
            labels(&mut doc, panel.labels());
            let r = replicate(&panel, &v, tol)?;
            doc.set("cost", nums(r.values[0].values()))
                .set("strategy", json!(r.strategy.trades().iter().map(blocks).collect::<Vec<_>>()))
                .diagnostic("tolerance", num(tol));
        }
        Model::Bachelier(p) => {
            let (k, call) = payoff.strike()?;
            let m = PayoffMoments::compute(&p, &[k], |x| if call { (x - k).max(0.0) } else { (k - x).max(0.0) });
            let fs = p.forward() * p.sigma();
            let shares = m.covariance / (fs * fs);
            doc.set("shares", num(shares))
                .set("bonds", num((m.mean - shares * p.forward()) / p.r()))
                .set(
                    "least_squared_error",
                    num((m.variance - m.covariance * m.covariance / (fs * fs)).max(0.0) / p.r()),
                )
                .diagnostic("correlation", num(m.correlation(&p)));
        }
        _ => return Err(input("hedge needs a one_period, panel or bachelier spec")),
    }
    Ok((doc, EXIT_OK))
}

fn singular_message(e: Error, names: Option<&[String]>) -> Failure {
    let mut f = Failure::from(e.clone());
    if let (Error::SingularGram { instrument, collinear_with }, Some(names)) = (&e, names) {
        let partners: Vec<&str> = collinear_with.iter().map(|&i| names[i].as_str()).collect();
        f.message = format!(
            "Gram matrix is singular: `{}` is collinear with {:?}; drop one of them",
            names[*instrument], partners
        );
    }
    f
}

fn correlation(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    let mean = |x: &[f64]| x.iter().zip(w).map(|(v, p)| v * p).sum::<f64>() / total;
    let (ma, mb) = (mean(a), mean(b));
    let cov = |x: &[f64], mx: f64, y: &[f64], my: f64| {
        x.iter().zip(y).zip(w).map(|((u, v), p)| (u - mx) * (v - my) * p).sum::<f64>() / total
    };
    let va = cov(a, ma, a, ma);
    let vb = cov(b, mb, b, mb);
    if va <= 0.0 || vb <= 0.0 {
        return 1.0;
    }
    cov(a, ma, b, mb) / (va * vb).sqrt()
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| input(format!("bad number `{s}` in schedule"))))
        .collect()
}

fn parse_schedule(text: &str) -> std::result::Result<Schedule, Failure> {
    let (times, deltas) = match text.split_once(';') {
        Some((t, d)) => (parse_list(t)?, Some(parse_list(d)?)),
        None => (parse_list(text)?, None),
    };
    Ok(match deltas {
        Some(d) => Schedule::new(times, d)?,
        None => Schedule::from_times(times)?,
    })
}

fn load_curve(path: &Path) -> std::result::Result<DiscountCurve, Failure> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        match SpecFile::parse(&text)?.build()? {
            Model::Curve(c) => Ok(c),
            _ => Err(input("expected a curve spec")),
        }
    } else {
        Ok(DiscountCurve::parse(&text)?)
    }
}

fn curve(path: &Path, schedule: &str, quantity: Quantity, coupon: Option<f64>) -> Outcome {
    let curve = load_curve(path)?;
    let schedule = parse_schedule(schedule)?;
    let mut doc = Document::new("curve", "curve");
    doc.set("schedule", nums(schedule.times()))
        .set("deltas", nums(schedule.deltas()));
    match quantity {
        Quantity::Par => {
            doc.set("quantity", json!("par")).set("value", num(par_coupon(&curve, &schedule)?));
        }
        Quantity::Swap => {
            doc.set("quantity", json!("swap")).set("value", num(swap_par(&curve, &schedule)?));
        }
        Quantity::Fra => {
            let t = schedule.times();
            let rates = schedule
                .deltas()
                .iter()
                .enumerate()
                .map(|(j, &d)| forward_rate(&curve, t[j], t[j + 1], d))
                .collect::<crate::Result<Vec<_>>>()?;
            doc.set("quantity", json!("fra")).set("values", nums(&rates));
        }
        Quantity::Price => {
            let c = coupon.ok_or_else(|| input("price needs --coupon"))?;
            doc.set("quantity", json!("price"))
                .set("coupon", num(c))
                .set("value", num(bond_price(&curve, &schedule, c)?));
        }
    }
    Ok((doc, EXIT_OK))
}
