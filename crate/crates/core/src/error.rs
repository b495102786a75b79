//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Config text did not parse as the key=value schema.
    #[error("config schema error at key `{key}`: {reason}")]
    Schema { key: String, reason: String },

    /// A structural constant or model parameter violates an invariant.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// Unknown preset name.
    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: &'static str },

    /// A request that is inconsistent with the selected engine or model.
    #[error("configuration error: {0}")]
    Config(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge to {requested:.3e} (achieved {achieved:.3e})")]
    Accuracy { requested: f64, achieved: f64 },

    /// Step-size underflow in the time integrator.
    #[error("integrator step size underflow at t = {t:.6e}")]
    Stiffness { t: f64 },

    /// The flexural orbit did not close within the horizon bound.
    #[error("no period found within horizon {horizon:.6e} (q = {q:.6e})")]
    Horizon { q: f64, horizon: f64 },

    /// Non-finite state encountered during integration.
    #[error("non-finite state during integration at t = {t:.6e}")]
    NonFinite { t: f64 },

    /// The monodromy matrix lost area preservation beyond tolerance.
    #[error("monodromy determinant drift {drift:.3e} exceeds {limit:.3e}")]
    DetDrift { drift: f64, limit: f64 },

    /// The slackening model lacks an assumption required by the operation.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad configuration rather than numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::Validation { .. }
                | Error::UnknownPreset { .. }
                | Error::Config(_)
                | Error::UnsupportedModel(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
