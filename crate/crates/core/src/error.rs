// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    /// The frequency window misses more spectral weight than the solver tolerates.
    #[error("spectral truncation: captured weight fraction {captured:.3e} below 1 - {tolerance:.0e}")]
    Truncation { captured: f64, tolerance: f64 },
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("singular response at ω = {omega} rad/µs; this is a bound state, use find_localized_modes")]
    Singular { omega: f64 },
    #[error("range error: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;
