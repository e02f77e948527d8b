use thiserror::Error;

/// Errors produced by the pricing, detection and hedging routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("active-set iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("realized return undefined: position cost {cost:e} is zero within tolerance")]
    ZeroCost { cost: f64 },

    #[error("Gram matrix is singular: instrument {instrument} is collinear with instruments {collinear_with:?}")]
    SingularGram {
        instrument: usize,
        collinear_with: Vec<usize>,
    },

    #[error("no-arbitrage bound violated: gross return {r} outside [{lower}, {upper}]")]
    NoArbitrageViolation { r: f64, lower: f64, upper: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("algebra {index} does not refine algebra {previous}")]
    NotRefining { previous: usize, index: usize },

    #[error("algebras do not match")]
    AlgebraMismatch,

    #[error("target algebra is not coarser than the measure's algebra")]
    NotCoarser,

    #[error("strategy is not closed out: position at the final time is nonzero")]
    NotClosedOut,

    #[error("strategy is not self-financing: account entry {amount:e} at time {time}, block {block}")]
    NotSelfFinancing {
        time: usize,
        block: usize,
        amount: f64,
    },

    #[error("deflator vanishes on block {block} at time {time}")]
    DeflatorZeroBlock { time: usize, block: usize },

    #[error("deflator pairing identity violated by {residual:e}")]
    PairingViolation { residual: f64 },

    #[error("invalid deflator sequence: {0}")]
    InvalidDeflator(String),

    #[error("payoff is not replicable at time {time}, block {block} (residual {residual:e})")]
    NotReplicable {
        time: usize,
        block: usize,
        residual: f64,
    },

    #[error("short rate is not positive at time {time}, block {block}")]
    NonpositiveRate { time: usize, block: usize },

    #[error("deflators are not predictable at time {time}, block {block}")]
    NonPredictableDeflator { time: usize, block: usize },

    #[error("maturity {time} is not on the discount curve")]
    MissingMaturity { time: f64 },

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("characteristic function does not decay below threshold by u = {u:e}")]
    TruncationFailure { u: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
