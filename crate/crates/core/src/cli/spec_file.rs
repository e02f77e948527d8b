//! JSON specification files, discriminated by `kind`.

use serde::{Deserialize, Serialize};

use crate::analytic_models::{BachelierParams, GbmParams, KolmogorovId, LevyModelParams};
use crate::cone_ftap::OnePeriodMarket;
use crate::error::{Error, Result};
use crate::filtration::{Algebra, Filtration, SimpleFunction};
use crate::multi_period::MarketPanel;
use crate::rates::DiscountCurve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecFile {
    OnePeriod {
        #[serde(default)]
        instruments: Option<Vec<String>>,
        prices: Vec<f64>,
        /// One payoff row per outcome.
        outcomes: Vec<Vec<f64>>,
        /// Instrument whose payoff is the terminal price used by `call:`/`put:` payoffs.
        #[serde(default)]
        underlying: Option<String>,
        #[serde(default)]
        tol: Option<f64>,
    },
    Panel {
        #[serde(default)]
        instruments: Option<Vec<String>>,
        times: Vec<f64>,
        /// `blocks[j][atom]` is the block containing `atom` at time `j`.
        blocks: Vec<Vec<usize>>,
        /// `prices[j][block][instrument]`.
        prices: Vec<Vec<Vec<f64>>>,
        /// `cashflows[j − 1][block][instrument]` for `j = 1..=n`; zero when omitted.
        #[serde(default)]
        cashflows: Option<Vec<Vec<Vec<f64>>>>,
        #[serde(default)]
        underlying: Option<String>,
        #[serde(default)]
        tol: Option<f64>,
    },
    Curve {
        maturities: Vec<f64>,
        discounts: Vec<f64>,
    },
    Bachelier {
        #[serde(rename = "R")]
        r: f64,
        s: f64,
        sigma: f64,
    },
    Gbm {
        r: f64,
        s: f64,
        sigma: f64,
        t: f64,
    },
    Levy {
        r: f64,
        s: f64,
        sigma: f64,
        t: f64,
        gamma: f64,
        /// Point masses `[x, ΔG]` of the Kolmogorov measure of `L_1`.
        nodes: Vec<[f64; 2]>,
        #[serde(default)]
        smoothing: Option<f64>,
    },
}

/// Parsed and validated model objects.
#[derive(Debug, Clone)]
pub enum Model {
    OnePeriod {
        market: OnePeriodMarket,
        underlying: Option<usize>,
    },
    Panel {
        panel: MarketPanel,
        underlying: Option<usize>,
    },
    Curve(DiscountCurve),
    Bachelier(BachelierParams),
    Gbm(GbmParams),
    Levy {
        params: LevyModelParams,
        smoothing: f64,
    },
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("spec file: {e}")))?;
        Ok(spec)
    }

    /// Tolerance given in the file, if any.
    pub fn tol(&self) -> Option<f64> {
        match self {
            Self::OnePeriod { tol, .. } | Self::Panel { tol, .. } => *tol,
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::OnePeriod { .. } => "one_period",
            Self::Panel { .. } => "panel",
            Self::Curve { .. } => "curve",
            Self::Bachelier { .. } => "bachelier",
            Self::Gbm { .. } => "gbm",
            Self::Levy { .. } => "levy",
        }
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            Self::OnePeriod {
                instruments,
                prices,
                outcomes,
                underlying,
                ..
            } => {
                let mut market = OnePeriodMarket::new(prices.clone(), outcomes.clone())?;
                if let Some(l) = instruments {
                    market = market.with_labels(l.clone())?;
                }
                let underlying = resolve_underlying(instruments.as_deref(), underlying.as_deref())?;
                Ok(Model::OnePeriod { market, underlying })
            }
            Self::Panel {
                instruments,
                times,
                blocks,
                prices,
                cashflows,
                underlying,
                ..
            } => {
                let panel = build_panel(times, blocks, prices, cashflows.as_deref())?;
                let panel = match instruments {
                    Some(l) => panel.with_labels(l.clone())?,
                    None => panel,
                };
                let underlying = resolve_underlying(instruments.as_deref(), underlying.as_deref())?;
                Ok(Model::Panel { panel, underlying })
            }
            Self::Curve { maturities, discounts } => {
                Ok(Model::Curve(DiscountCurve::new(maturities.clone(), discounts.clone())?))
            }
            Self::Bachelier { r, s, sigma } => Ok(Model::Bachelier(BachelierParams::new(*r, *s, *sigma)?)),
            Self::Gbm { r, s, sigma, t } => Ok(Model::Gbm(GbmParams::new(*r, *s, *sigma, *t)?)),
            Self::Levy {
                r,
                s,
                sigma,
                t,
                gamma,
                nodes,
                smoothing,
            } => {
                let base = KolmogorovId::new(*gamma, nodes.iter().map(|n| (n[0], n[1])).collect())?;
                let smoothing = smoothing.unwrap_or(0.0);
                if !(smoothing >= 0.0 && smoothing.is_finite()) {
                    return Err(Error::InvalidParameter("smoothing must be nonnegative".into()));
                }
                Ok(Model::Levy {
                    params: LevyModelParams::new(*r, *s, *sigma, *t, base)?,
                    smoothing,
                })
            }
        }
    }
}

fn resolve_underlying(labels: Option<&[String]>, name: Option<&str>) -> Result<Option<usize>> {
    let Some(labels) = labels else {
        return match name {
            Some(n) => Err(Error::InvalidParameter(format!("underlying `{n}` given without instrument names"))),
            None => Ok(None),
        };
    };
    let wanted = name.unwrap_or("stock");
    match labels.iter().position(|l| l == wanted) {
        Some(i) => Ok(Some(i)),
        None if name.is_some() => Err(Error::InvalidParameter(format!("no instrument named `{wanted}`"))),
        None => Ok(None),
    }
}

fn build_panel(
    times: &[f64],
    blocks: &[Vec<usize>],
    prices: &[Vec<Vec<f64>>],
    cashflows: Option<&[Vec<Vec<f64>>]>,
) -> Result<MarketPanel> {
    let algebras = blocks
        .iter()
        .map(|b| Algebra::new(b.clone()))
        .collect::<Result<Vec<_>>>()?;
    let filtration = Filtration::new(algebras)?;
    if prices.len() != filtration.horizon() + 1 {
        return Err(Error::DimensionMismatch {
            expected: filtration.horizon() + 1,
            found: prices.len(),
        });
    }
    let m = prices
        .first()
        .and_then(|p| p.first())
        .map(|row| row.len())
        .ok_or_else(|| Error::InvalidMarket("no prices".into()))?;
    let x = prices
        .iter()
        .enumerate()
        .map(|(j, p)| SimpleFunction::from_blocks(filtration.algebra(j).clone(), p))
        .collect::<Result<Vec<_>>>()?;
    let c = match cashflows {
        Some(cf) => {
            if cf.len() != filtration.horizon() {
                return Err(Error::DimensionMismatch {
                    expected: filtration.horizon(),
                    found: cf.len(),
                });
            }
            cf.iter()
                .enumerate()
                .map(|(j, p)| SimpleFunction::from_blocks(filtration.algebra(j + 1).clone(), p))
                .collect::<Result<Vec<_>>>()?
        }
        None => (1..=filtration.horizon())
            .map(|j| SimpleFunction::zeros(filtration.algebra(j).clone(), m))
            .collect(),
    };
    MarketPanel::new(times.to_vec(), filtration, x, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_fields_and_nonfinite() {
        assert!(SpecFile::parse(r#"{"kind":"gbm","r":0.0,"s":1,"sigma":0.2,"t":1,"extra":1}"#).is_err());
        assert!(SpecFile::parse(r#"{"kind":"gbm","r":NaN,"s":1,"sigma":0.2,"t":1}"#).is_err());
        assert!(SpecFile::parse(r#"{"kind":"gbm","r":1e999,"s":1,"sigma":0.2,"t":1}"#).is_err());
        assert!(SpecFile::parse(r#"{"kind":"nope"}"#).is_err());
    }

    #[test]
    fn panel_round_trip() {
        let text = r#"{"kind":"panel","instruments":["bond","stock"],"times":[0,1],
            "blocks":[[0,0],[0,1]],"prices":[[[1,100]],[[0,0],[0,0]]],
            "cashflows":[[[1.1,90],[1.1,120]]]}"#;
        let spec = SpecFile::parse(text).unwrap();
        let again = SpecFile::parse(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again);
        match spec.build().unwrap() {
            Model::Panel { panel, underlying } => {
                assert_eq!(panel.horizon(), 1);
                assert_eq!(underlying, Some(1));
            }
            other => panic!("{other:?}"),
        }
    }
}
