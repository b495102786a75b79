//! High-energy limit of the discriminant and the instability predicate.
//!
//! As the flexural amplitude diverges, the rescaled orbit solves a two-band
//! piecewise-linear system (odd `j`) whose Hill equation is a two-step
//! Meissner equation; its discriminant has a closed form in the structural
//! constants.  For even `j` the limit decouples into constant-coefficient
//! oscillators and no instability can be predicted at any energy.

use crate::error::{Error, Result};
use crate::floquet::StepPotential;
use crate::params::BridgeParams;
use crate::projection::epsilon_jk;
use crate::slackening::SlackeningModel;
use serde::Serialize;
use std::f64::consts::PI;

/// All constants of the limit two-step system for odd `j`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitQuantities {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    /// Phase integrals `pi A / omega` over the two half-bands.
    pub phi_plus: f64,
    pub phi_minus: f64,
    /// Frequency ratio `A_plus / A_minus`.
    pub ratio: f64,
    pub epsilon: f64,
    pub delta_inf: f64,
    pub m_asymptotic: f64,
}

/// Limit constants for odd `j`; even `j` is rejected with a pointer to the
/// decoupled branch.
pub fn limit_quantities(params: &BridgeParams, m_inf: f64) -> Result<LimitQuantities> {
    if params.j % 2 == 0 {
        return Err(Error::Config(
            "the limit two-step system needs odd j; use high_energy_verdict for even j".into(),
        ));
    }
    if !(m_inf > 0.0) {
        return Err(Error::Validation {
            field: "M",
            reason: format!("asymptotic slope must be positive, got {m_inf}"),
        });
    }
    let (j, k) = (params.j, params.k);
    let jf = j as f64;
    let kf = k as f64;
    let aj4 = params.alpha_j4();
    let eps = epsilon_jk(j, k);

    let wp2 = aj4 + m_inf * (1.0 + 1.0 / jf);
    let wm2 = aj4 + m_inf * (1.0 - 1.0 / jf);
    let ap2 = params.beta * kf * kf + params.gamma * m_inf * (1.0 + eps);
    let am2 = params.beta * kf * kf + params.gamma * m_inf * (1.0 - eps);
    if !(wp2 > 0.0) || !(wm2 > 0.0) {
        return Err(Error::Validation {
            field: "params",
            reason: "limit flexural frequencies are not positive".into(),
        });
    }
    if !(ap2 > 0.0) || !(am2 > 0.0) {
        return Err(Error::Validation {
            field: "beta",
            reason: format!(
                "limit torsional frequencies must be positive (A+^2 = {ap2:.6e}, A-^2 = {am2:.6e})"
            ),
        });
    }
    let (wp, wm) = (wp2.sqrt(), wm2.sqrt());
    let (ap, am) = (ap2.sqrt(), am2.sqrt());
    let (php, phm) = (PI * ap / wp, PI * am / wm);
    let ratio = ap / am;
    let delta_inf =
        2.0 * (php.cos() * phm.cos() - 0.5 * (ratio + 1.0 / ratio) * php.sin() * phm.sin());
    Ok(LimitQuantities {
        omega_plus: wp,
        omega_minus: wm,
        a_plus: ap,
        a_minus: am,
        phi_plus: php,
        phi_minus: phm,
        ratio,
        epsilon: eps,
        delta_inf,
        m_asymptotic: m_inf,
    })
}

/// Limit discriminant via the displayed closed form; the two-step matrix
/// product route must give the same number.
pub fn delta_infinity(lq: &LimitQuantities) -> f64 {
    lq.delta_inf
}

/// The limit two-step potential `[(A+, pi/w+), (A-, pi/w-)]`.
pub fn limit_step_potential(lq: &LimitQuantities) -> Result<StepPotential> {
    StepPotential::from_frequencies(&[
        (lq.a_plus, PI / lq.omega_plus),
        (lq.a_minus, PI / lq.omega_minus),
    ])
}

/// Limit-period of the rescaled flexural orbit, `pi/w+ + pi/w-`.
pub fn limit_period(lq: &LimitQuantities) -> f64 {
    PI / lq.omega_plus + PI / lq.omega_minus
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HighEnergyVerdict {
    /// `|Delta_inf| > 2`: some amplitude threshold exists beyond which the
    /// pure flexural orbit is linearly unstable.
    UnstableAtHighEnergy { quantities: LimitQuantities },
    /// `|Delta_inf| <= 2`: the high-energy criterion is silent (this is not
    /// a stability certificate).
    NoInstabilityPredicted { quantities: LimitQuantities },
    /// Even `j`: the limit system decouples into constant-coefficient
    /// oscillators, so pure flexural motion stays linearly stable.
    EvenJAlwaysStable {
        flexural_frequency: f64,
        torsional_frequency: f64,
    },
}

/// Evaluates the high-energy instability predicate for a model satisfying
/// the slackening assumptions.
pub fn high_energy_verdict(
    params: &BridgeParams,
    model: &SlackeningModel,
) -> Result<HighEnergyVerdict> {
    let report = model.check_assumptions();
    if !report.s0 || !report.s1 {
        return Err(Error::UnsupportedModel(
            "the high-energy analysis requires the slackening assumptions to hold".into(),
        ));
    }
    let Some(m_inf) = report.m_asymptotic else {
        return Err(Error::UnsupportedModel(format!(
            "{} has no positive traction asymptote (assumption on the limit slope fails)",
            model.describe()
        )));
    };
    if params.j % 2 == 0 {
        let kf = params.k as f64;
        let fl2 = params.alpha_j4() + m_inf;
        let to2 = params.beta * kf * kf + params.gamma * m_inf;
        if !(to2 > 0.0) {
            return Err(Error::Validation {
                field: "beta",
                reason: "decoupled limit torsional frequency is not positive".into(),
            });
        }
        return Ok(HighEnergyVerdict::EvenJAlwaysStable {
            flexural_frequency: fl2.sqrt(),
            torsional_frequency: to2.sqrt(),
        });
    }
    let lq = limit_quantities(params, m_inf)?;
    if lq.delta_inf.abs() > 2.0 {
        Ok(HighEnergyVerdict::UnstableAtHighEnergy { quantities: lq })
    } else {
        Ok(HighEnergyVerdict::NoInstabilityPredicted { quantities: lq })
    }
}
