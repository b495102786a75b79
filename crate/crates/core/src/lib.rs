//! Flexural-torsional stability toolkit for slackening-cable deck models.
//!
//! The crate builds the whole pipeline behind `(q, beta)` instability
//! diagrams of a coupled two-mode deck system:
//!
//! * [`slackening`] - restoring-force laws and their structural assumptions;
//! * [`projection`] - mode-projected forces and Hill kernels, by kink-split
//!   quadrature or closed form;
//! * [`flexural`] - the pure-flexural orbit, its period and energy audit;
//! * [`floquet`] - discriminants, by direct integration or exact multi-step
//!   Meissner products;
//! * [`piecewise`] - the diagonal closed-form stand-in system;
//! * [`limits`] - the high-energy limit discriminant and verdict;
//! * [`diagram`] - grid sweeps, tongue tips and exporters.

pub mod diagram;
pub mod error;
pub mod flexural;
pub mod floquet;
pub mod limits;
pub mod ode;
pub mod params;
pub mod piecewise;
pub mod projection;
pub mod quad;
pub mod slackening;
pub mod system;

pub use error::{Error, Result};
pub use params::{parse_config, preset, serialize_config, BridgeParams, Config};
pub use slackening::{Side, SlackeningModel};
