//! The reduced mode-pair system seen by the integrators.
//!
//! Both the projected system and its piecewise closed-form stand-in expose
//! the same surface: a restoring force for the flexural equation and a
//! kernel for the torsional Hill coefficient.  Kernel evaluations signal
//! failure with NaN, which the integrator turns into a solver error.

use crate::params::BridgeParams;
use crate::projection::ProjectionKernel;
use crate::error::Result;

pub trait ModeSystem: Sync {
    /// Flexural stiffness `alpha j^4`.
    fn alpha_j4(&self) -> f64;
    /// Deck geometry ratio multiplying the Hill kernel.
    fn gamma(&self) -> f64;
    /// Weight of the spectral parameter in the Hill coefficient (`k^2`).
    fn spectral_weight(&self) -> f64;
    /// Projected restoring force `f_j(r)`; NaN marks a failed evaluation.
    fn restoring(&self, r: f64) -> f64;
    /// Hill coefficient kernel `g_{j,k}(r)`; NaN marks a failed evaluation.
    fn hill_kernel(&self, r: f64) -> f64;
    /// `\int_0^u` of the restoring force (potential term of the energy).
    fn restoring_potential(&self, u: f64) -> Result<f64>;
    /// Slope of the restoring force at the origin (`f'(0)`), which sets the
    /// small-amplitude frequency `sqrt(alpha j^4 + 2 m)`.
    fn stiffness_at_zero(&self) -> f64;
}

/// The projected system for a concrete parameter set and kernel.
pub struct KernelSystem<'a> {
    params: &'a BridgeParams,
    kernel: &'a ProjectionKernel,
}

impl<'a> KernelSystem<'a> {
    pub fn new(params: &'a BridgeParams, kernel: &'a ProjectionKernel) -> Self {
        debug_assert_eq!(params.j, kernel.j());
        debug_assert_eq!(params.k, kernel.k());
        KernelSystem { params, kernel }
    }

    pub fn params(&self) -> &BridgeParams {
        self.params
    }

    pub fn kernel(&self) -> &ProjectionKernel {
        self.kernel
    }
}

impl ModeSystem for KernelSystem<'_> {
    fn alpha_j4(&self) -> f64 {
        self.params.alpha_j4()
    }

    fn gamma(&self) -> f64 {
        self.params.gamma
    }

    fn spectral_weight(&self) -> f64 {
        self.params.k_sq()
    }

    fn restoring(&self, r: f64) -> f64 {
        self.kernel.f_j(r).unwrap_or(f64::NAN)
    }

    fn hill_kernel(&self, r: f64) -> f64 {
        self.kernel.g_jk(r).unwrap_or(f64::NAN)
    }

    fn restoring_potential(&self, u: f64) -> Result<f64> {
        self.kernel.f_j_potential(u)
    }

    fn stiffness_at_zero(&self) -> f64 {
        self.kernel.model().m_at_zero()
    }
}
