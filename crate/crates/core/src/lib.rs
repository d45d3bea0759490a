//! Classical simulation and variational training of split-step quantum walks
//! (SSQW) used as probability-distribution loaders.
//!
//! The walker lives on a coin qubit tensored with an `N`-qubit position
//! register. A trained walk prepares a state whose position marginal matches a
//! target histogram over `2^N` bins; [`pricing`] then evaluates a European call
//! payoff on that histogram.
//!
//! Module map:
//! - [`statevector`]: amplitudes over coin ⊗ position and coin application.
//! - [`walk`]: coin matrices, shift operators, DTQW and SSQW evolution.
//! - [`target`]: histogram construction (analytic, sampled, Black-Scholes, CSV returns).
//! - [`optimize`]: MSE objective and derivative-free training loop.
//! - [`pricing`]: bin-to-price grid and expected call payoff.
//! - [`io`]: versioned JSON/CSV artifact formats.

pub mod error;
pub mod io;
pub mod optimize;
pub mod pricing;
pub mod statevector;
pub mod target;
pub mod walk;

pub use error::{Error, Result};
pub use optimize::{mse, objective, train, OptimizerConfig, OptimizerKind, TrainingResult};
pub use pricing::{expected_payoff, price_report, PayoffReport, PriceGrid};
pub use statevector::{Coin, CoinMatrix, WalkerState};
pub use target::{DistributionKind, Domain, OptionSpec, SigmaReading, TargetDistribution};
pub use walk::{CoinParams, SsqwParams, WalkSchedule};
