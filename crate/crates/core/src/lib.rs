//! Seasonal fractional autoregression SFAR(1) driven by fractional Gaussian
//! noise.
//!
//! The crate covers exact path simulation, the spectral densities of the
//! seasonal subsequences and of the additive series, the GPH + GLS initial
//! estimator, the one-step Fisher-scoring correction, Monte Carlo studies of
//! both estimators, and a small pipeline for fitting observed seasonal data.

pub mod datafit;
pub mod error;
pub mod estimators;
pub mod fgn;
pub mod model;
pub mod montecarlo;
pub mod onestep;
pub mod quad;
pub mod rng;
pub mod toeplitz;

pub use error::{Error, Result};
pub use fgn::Hurst;
pub use model::{AdditiveSeries, SeasonalSeries, SpectralModel, Theta};
