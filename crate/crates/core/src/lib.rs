//! Scaling analysis of high-frequency market activity series.
//!
//! The pipeline turns tick-by-tick trade records into four per-interval
//! quantities — logarithmic returns, volatility (absolute returns), trading
//! activity (trade counts), and volume traded — removes their intraday
//! seasonal pattern, and measures power-law autocorrelations (MFDFA) and
//! sign-preserving power-law cross-correlations (MFCCA, with DCCA as the
//! q = 2 case) between them.
//!
//! Stages, in order:
//!
//! * [`ingest`] — parse delimited tick files and aggregate onto a trading
//!   session grid.
//! * [`seasonality`] — per-slot intraday pattern estimation and removal by
//!   division.
//! * [`fractal`] — fluctuation surfaces `F_q(s)` for single series and
//!   signed `F_qxy(s)` for pairs.
//! * [`scaling`] — power-law fits producing generalized Hurst exponents
//!   `h(q)`, cross-correlation exponents `λ(q)`, and their spread, plus
//!   multi-instrument concatenation.
//! * [`surrogates`] — synthetic series with known exponents, used as
//!   analytic test oracles.
//! * [`table`] — plot-ready delimited text export with bit-exact float
//!   round-tripping.

pub mod error;
pub mod fractal;
pub mod ingest;
pub mod numeric;
pub mod scaling;
pub mod seasonality;
pub mod surrogates;
pub mod table;

pub use error::{Error, Result};
