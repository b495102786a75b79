//! Pure-flexural orbits: integration, period detection and energy audit.
//!
//! The orbit starts at its turning point (`u(0) = q`, `du(0) = 0`), so the
//! period is the first later time where the velocity vanishes with `u > 0`.
//! Velocity roots are bracketed at accepted steps and polished on the dense
//! interpolant.  Conservation of the flexural energy over the period is the
//! standing accuracy audit.

use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeOptions};
use crate::system::ModeSystem;

/// Integrator tolerances (relative, absolute).
///
/// These are global-error targets: the stepper is driven at a fixed
/// fraction of them so that the accumulated error over one period lands
/// near the requested values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// Per-step fraction of the requested tolerances handed to the stepper.
pub(crate) const STEP_TOL_FRACTION: f64 = 0.02;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-10,
            abs: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: Tolerances,
    /// Period search aborts beyond this multiple of the small-amplitude
    /// period; exceeding it is an error, never silent truncation.
    pub horizon_factor: f64,
    /// Run the energy audit (skipped by pure period queries).
    pub audit_energy: bool,
    /// Cap on the number of audited sample points.
    pub max_audit_samples: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: Tolerances::default(),
            horizon_factor: 10.0,
            audit_energy: true,
            max_audit_samples: 256,
        }
    }
}

/// One sampled state of the orbit.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub u: f64,
    pub du: f64,
}

/// One period of the pure-flexural orbit.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub q: f64,
    pub samples: Vec<Sample>,
    pub period: f64,
    /// Max relative drift of the flexural energy over the sampled period
    /// (zero when the audit was skipped).
    pub energy_drift: f64,
    /// `|u(tau) - q|` and `|du(tau)|`, the orbit-closure residuals.
    pub closure_u: f64,
    pub closure_du: f64,
    pub tolerances: Tolerances,
}

/// Integrates the initial value problem and detects one full period.
pub fn solve_flexural(sys: &dyn ModeSystem, q: f64, opts: &SolveOptions) -> Result<Trajectory> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Validation {
            field: "q",
            reason: format!("initial amplitude must be positive, got {q}"),
        });
    }
    let omega_lin_sq = sys.alpha_j4() + 2.0 * sys.stiffness_at_zero();
    if !(omega_lin_sq > 0.0) {
        return Err(Error::Validation {
            field: "params",
            reason: "small-amplitude frequency is not positive".into(),
        });
    }
    let tau_lin = 2.0 * std::f64::consts::PI / omega_lin_sq.sqrt();
    let horizon = opts.horizon_factor * tau_lin;

    let rhs = |_t: f64, y: &[f64; 2]| [y[1], -sys.alpha_j4() * y[0] - 2.0 * sys.restoring(y[0])];
    let mut ode = Dopri5::new(
        rhs,
        0.0,
        [q, 0.0],
        OdeOptions {
            rtol: STEP_TOL_FRACTION * opts.tol.rel,
            atol: STEP_TOL_FRACTION * opts.tol.abs,
            h_max: 0.125 * tau_lin,
            max_steps: 50_000_000,
        },
    )?;

    let mut samples = vec![Sample { t: 0.0, u: q, du: 0.0 }];
    // du < 0 immediately after release (the restoring force is positive at q)
    let mut prev_sign = -1.0_f64;
    let period = loop {
        if ode.t > horizon {
            return Err(Error::Horizon { q, horizon });
        }
        let step = ode.step()?;
        let du = ode.y[1];
        let sign = if du == 0.0 { 0.0 } else { du.signum() };
        let crossed = sign != 0.0 && sign != prev_sign && prev_sign != 0.0;
        let mut found = None;
        if crossed || sign == 0.0 {
            let t_root = if sign == 0.0 {
                ode.t
            } else {
                refine_velocity_root(&step)
            };
            let y = step.eval(t_root);
            if y[0] > 0.0 && t_root > 0.0 {
                found = Some((t_root, y));
            }
        }
        if sign != 0.0 {
            prev_sign = sign;
        }
        match found {
            Some((tau, y)) => {
                samples.push(Sample {
                    t: tau,
                    u: y[0],
                    du: y[1],
                });
                break tau;
            }
            None => samples.push(Sample {
                t: ode.t,
                u: ode.y[0],
                du: ode.y[1],
            }),
        }
    };

    let end = samples.last().unwrap();
    let closure_u = (end.u - q).abs();
    let closure_du = end.du.abs();

    let mut energy_drift = 0.0_f64;
    if opts.audit_energy {
        let stride = (samples.len() / opts.max_audit_samples).max(1);
        let e0 = flexural_energy(sys, q, 0.0)?;
        let scale = e0.abs().max(f64::MIN_POSITIVE);
        for s in samples.iter().step_by(stride).chain(std::iter::once(end)) {
            let e = flexural_energy(sys, s.u, s.du)?;
            energy_drift = energy_drift.max((e - e0).abs() / scale);
        }
    }

    Ok(Trajectory {
        q,
        samples,
        period,
        energy_drift,
        closure_u,
        closure_du,
        tolerances: opts.tol,
    })
}

/// Period of the orbit through `u(0) = q` (no energy audit).
pub fn detect_period(sys: &dyn ModeSystem, q: f64, opts: &SolveOptions) -> Result<f64> {
    let mut o = *opts;
    o.audit_energy = false;
    Ok(solve_flexural(sys, q, &o)?.period)
}

/// Flexural energy `du^2/2 + (alpha j^4 / 2) u^2 + 2 F_j(u)`.
pub fn flexural_energy(sys: &dyn ModeSystem, u: f64, du: f64) -> Result<f64> {
    Ok(0.5 * du * du + 0.5 * sys.alpha_j4() * u * u + 2.0 * sys.restoring_potential(u)?)
}

/// Bisection on the dense interpolant for the `du = 0` crossing.
fn refine_velocity_root(step: &crate::ode::DenseStep<2>) -> f64 {
    let mut a = step.t0;
    let mut b = step.t1;
    let mut wa = step.eval(a)[1];
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let wm = step.eval(mid)[1];
        if (wa <= 0.0) == (wm <= 0.0) {
            a = mid;
            wa = wm;
        } else {
            b = mid;
        }
        if b - a <= f64::EPSILON * b.abs() {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::BridgeParams;
    use crate::projection::{ProjectionEngine, ProjectionKernel};
    use crate::slackening::SlackeningModel;
    use crate::system::KernelSystem;
    use std::f64::consts::PI;

    fn academic_system() -> (BridgeParams, ProjectionKernel) {
        let params = BridgeParams::new(1.0, 1.0, 3.0, 1, 1).unwrap();
        let model = SlackeningModel::mmk(3.0, 1.0 / 3.0).unwrap();
        let kernel =
            ProjectionKernel::new(model, 1, 1, ProjectionEngine::ClosedForm, 1e-11).unwrap();
        (params, kernel)
    }

    #[test]
    fn linear_regime_matches_harmonic_motion() {
        let (params, kernel) = academic_system();
        let sys = KernelSystem::new(&params, &kernel);
        // orbit confined to |u| <= r0 = 1/3: projected force is exactly 3 u
        let q = 0.2;
        let traj = solve_flexural(&sys, q, &SolveOptions::default()).unwrap();
        let omega = 7.0_f64.sqrt();
        assert!(
            (traj.period - 2.0 * PI / omega).abs() < 1e-11 * traj.period,
            "period {} vs {}",
            traj.period,
            2.0 * PI / omega
        );
        for s in &traj.samples {
            let want = q * (omega * s.t).cos();
            assert!((s.u - want).abs() < 1e-10, "t={} u={} want={}", s.t, s.u, want);
        }
        assert!(traj.energy_drift < 1e-9, "drift {}", traj.energy_drift);
    }

    #[test]
    fn nonlinear_orbit_closes_and_conserves() {
        let (params, kernel) = academic_system();
        let sys = KernelSystem::new(&params, &kernel);
        let traj = solve_flexural(&sys, 1.0, &SolveOptions::default()).unwrap();
        assert!(traj.closure_u < 1e-8, "closure_u {}", traj.closure_u);
        assert!(traj.closure_du < 1e-7, "closure_du {}", traj.closure_du);
        assert!(traj.energy_drift < 1e-8, "drift {}", traj.energy_drift);
        // hard turning point at the start: the orbit never exceeds q
        let max_u = traj.samples.iter().map(|s| s.u).fold(f64::MIN, f64::max);
        assert!(max_u <= 1.0 + 1e-9, "max u = {max_u}");
    }

    #[test]
    fn energy_formula_vanishes_at_rest() {
        let (params, kernel) = academic_system();
        let sys = KernelSystem::new(&params, &kernel);
        assert_eq!(flexural_energy(&sys, 0.0, 0.0).unwrap(), 0.0);
        // linear band: E = q^2 (alpha j^4 + 2m) / 2 at the turning point
        let q: f64 = 0.25;
        let e = flexural_energy(&sys, q, 0.0).unwrap();
        assert!((e - 0.5 * 7.0 * q * q).abs() < 1e-10);
    }

    #[test]
    fn period_continuity_in_q() {
        let (params, kernel) = academic_system();
        let sys = KernelSystem::new(&params, &kernel);
        let opts = SolveOptions::default();
        let base = detect_period(&sys, 1.0, &opts).unwrap();
        let mut prev_gap = f64::INFINITY;
        for delta in [1e-2, 1e-3, 1e-4] {
            let tau = detect_period(&sys, 1.0 + delta, &opts).unwrap();
            let gap = (tau - base).abs();
            assert!(gap < prev_gap, "gap {gap} did not shrink (delta {delta})");
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-4);
    }

    #[test]
    fn rejects_nonpositive_amplitude() {
        let (params, kernel) = academic_system();
        let sys = KernelSystem::new(&params, &kernel);
        assert!(solve_flexural(&sys, 0.0, &SolveOptions::default()).is_err());
        assert!(solve_flexural(&sys, -1.0, &SolveOptions::default()).is_err());
    }
}
