//! Closed-form and transform-based option models.

pub mod bachelier;
pub mod gbm;
pub mod inversion;
pub mod kolmogorov;
pub mod levy;

pub use bachelier::{
    atm_call_correlation, atm_call_correlation_quadrature, bachelier_call, bachelier_call_put_consistency,
    bachelier_put, bachelier_put_quadrature, hedge_error_estimate, normal_cov_identity_check, BachelierParams,
    CovIdentity, HedgeErrorEstimate, OptionValue, ParityCheck, PayoffMoments,
};
pub use gbm::{gbm_put, GbmParams, GbmPut};
pub use inversion::{cdf_from_charfn, InversionConfig};
pub use kolmogorov::{k_transform, kernel, KolmogorovId};
pub use levy::{levy_put, LevyModelParams, LevyPut};
