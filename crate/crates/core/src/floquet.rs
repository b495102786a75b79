//! Floquet discriminants of the torsional Hill equation.
//!
//! Two routes: direct integration of the fundamental pair alongside the
//! flexural orbit (any coefficient), and the exact transition-matrix product
//! for piecewise-constant (multi-step Meissner) coefficients.  `|trace| > 2`
//! marks unbounded solutions.

use crate::error::{Error, Result};
use crate::flexural::{solve_flexural, SolveOptions, Trajectory};
use crate::ode::{Dopri5, OdeOptions};
use crate::system::ModeSystem;
use serde::Serialize;

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        m11: 1.0,
        m12: 0.0,
        m21: 0.0,
        m22: 1.0,
    };

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// `|det - 1|` normalized by the size of the products entering the
    /// determinant, so the area-preservation audit stays meaningful when
    /// the entries are large.
    pub fn det_drift(&self) -> f64 {
        let scale = (self.m11 * self.m22).abs() + (self.m12 * self.m21).abs();
        (self.det() - 1.0).abs() / scale.max(1.0)
    }
}

/// One step of a piecewise-constant Hill coefficient.
///
/// `coeff` is the squared angular frequency; negative values (hyperbolic
/// steps) are legal and arise on spectral sweeps through negative `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub coeff: f64,
    pub dt: f64,
}

/// An ordered multi-step Hill coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPotential {
    steps: Vec<Step>,
}

impl StepPotential {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Validation {
                field: "steps",
                reason: "a step potential needs at least one step".into(),
            });
        }
        for s in &steps {
            if !(s.dt > 0.0) || !s.dt.is_finite() || !s.coeff.is_finite() {
                return Err(Error::Validation {
                    field: "steps",
                    reason: format!("bad step (coeff {}, dt {})", s.coeff, s.dt),
                });
            }
        }
        Ok(StepPotential { steps })
    }

    /// Builds from `(A, dt)` pairs with non-negative angular frequencies.
    pub fn from_frequencies(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.iter().any(|&(a, _)| a < 0.0) {
            return Err(Error::Validation {
                field: "steps",
                reason: "angular frequencies must be non-negative (use `new` for coefficients)"
                    .into(),
            });
        }
        Self::new(
            pairs
                .iter()
                .map(|&(a, dt)| Step { coeff: a * a, dt })
                .collect(),
        )
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn period(&self) -> f64 {
        self.steps.iter().map(|s| s.dt).sum()
    }

    /// The same potential translated in time by whole steps.
    pub fn rotated(&self, shift: usize) -> StepPotential {
        let n = self.steps.len();
        let steps = (0..n).map(|i| self.steps[(i + shift) % n]).collect();
        StepPotential { steps }
    }
}

/// Transition matrix of `v'' + c v = 0` over a window of length `dt`:
/// rotation block for `c > 0`, shear for `c = 0`, hyperbolic for `c < 0`.
pub fn transition_matrix(coeff: f64, dt: f64) -> Mat2 {
    if coeff > 0.0 {
        let w = coeff.sqrt();
        let (s, c) = (w * dt).sin_cos();
        Mat2 {
            m11: c,
            m12: s / w,
            m21: -w * s,
            m22: c,
        }
    } else if coeff == 0.0 {
        Mat2 {
            m11: 1.0,
            m12: dt,
            m21: 0.0,
            m22: 1.0,
        }
    } else {
        let mu = (-coeff).sqrt();
        let e = (mu * dt).exp();
        let ch = 0.5 * (e + 1.0 / e);
        let sh = 0.5 * (e - 1.0 / e);
        Mat2 {
            m11: ch,
            m12: sh / mu,
            m21: mu * sh,
            m22: ch,
        }
    }
}

/// Exact monodromy and discriminant of a multi-step Meissner coefficient.
pub fn meissner_discriminant(pot: &StepPotential) -> (Mat2, f64) {
    let mut m = Mat2::IDENTITY;
    for s in pot.steps() {
        m = transition_matrix(s.coeff, s.dt).mul(&m);
    }
    let delta = m.trace();
    (m, delta)
}

/// Cross-check route: the same monodromy by numerical integration of the
/// fundamental pair through each constant window (no trigonometric closed
/// form involved).
pub fn meissner_monodromy_ode(pot: &StepPotential, rtol: f64, atol: f64) -> Result<Mat2> {
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let mut t_off = 0.0;
    for s in pot.steps() {
        let c = s.coeff;
        let rhs = move |_t: f64, y: &[f64; 4]| [y[1], -c * y[0], y[3], -c * y[2]];
        let mut ode = Dopri5::new(
            rhs,
            t_off,
            y,
            OdeOptions {
                rtol,
                atol,
                h_max: f64::INFINITY,
                max_steps: 10_000_000,
            },
        )?;
        ode.run_to(t_off + s.dt)?;
        y = ode.y;
        t_off += s.dt;
    }
    Ok(Mat2 {
        m11: y[0],
        m12: y[2],
        m21: y[1],
        m22: y[3],
    })
}

/// Stability classification of a discriminant value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    Stable,
    Unstable,
    BoundaryPeriodic,
    BoundaryAntiperiodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub delta: f64,
    pub class: StabilityClass,
    pub tol: f64,
}

/// Default width of the `|delta| = 2` boundary band.
pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

/// Four-way classification: beyond `2 + tol` unstable, inside `2 - tol`
/// stable, otherwise the matching boundary case.
pub fn classify(delta: f64, tol: f64) -> Result<StabilityVerdict> {
    if !(tol > 0.0) {
        return Err(Error::Validation {
            field: "tol",
            reason: format!("classification tolerance must be positive, got {tol}"),
        });
    }
    if !delta.is_finite() {
        return Err(Error::Validation {
            field: "delta",
            reason: format!("discriminant must be finite, got {delta}"),
        });
    }
    let class = if delta.abs() > 2.0 + tol {
        StabilityClass::Unstable
    } else if delta.abs() < 2.0 - tol {
        StabilityClass::Stable
    } else if delta > 0.0 {
        StabilityClass::BoundaryPeriodic
    } else {
        StabilityClass::BoundaryAntiperiodic
    };
    Ok(StabilityVerdict { delta, class, tol })
}

/// Hard error threshold on the (normalized) determinant drift.
pub const DET_DRIFT_LIMIT: f64 = 1e-6;

/// Result of a numerically integrated monodromy.
#[derive(Debug, Clone, Copy)]
pub struct MonodromyOutcome {
    pub matrix: Mat2,
    pub verdict: StabilityVerdict,
    pub det_drift: f64,
    pub period: f64,
}

/// Monodromy of the torsional Hill equation around the flexural orbit of
/// amplitude `q`, integrating the augmented system (orbit and fundamental
/// pair together, so the coefficient carries full integrator accuracy).
///
/// `beta` is the spectral value (it replaces the structural one to support
/// sweeps); `known` reuses a previously solved trajectory for its period.
pub fn monodromy_numeric(
    sys: &dyn ModeSystem,
    beta: f64,
    q: f64,
    opts: &SolveOptions,
    known: Option<&Trajectory>,
    class_tol: f64,
) -> Result<MonodromyOutcome> {
    let period = match known {
        Some(t) => {
            debug_assert_eq!(t.q, q, "trajectory was solved for a different amplitude");
            t.period
        }
        None => {
            let mut o = *opts;
            o.audit_energy = false;
            solve_flexural(sys, q, &o)?.period
        }
    };

    let beta_term = beta * sys.spectral_weight();
    let gamma = sys.gamma();
    let alpha_j4 = sys.alpha_j4();
    let rhs = |_t: f64, y: &[f64; 6]| {
        let coeff = beta_term + 2.0 * gamma * sys.hill_kernel(y[0]);
        [
            y[1],
            -alpha_j4 * y[0] - 2.0 * sys.restoring(y[0]),
            y[3],
            -coeff * y[2],
            y[5],
            -coeff * y[4],
        ]
    };
    let mut ode = Dopri5::new(
        rhs,
        0.0,
        [q, 0.0, 1.0, 0.0, 0.0, 1.0],
        OdeOptions {
            rtol: crate::flexural::STEP_TOL_FRACTION * opts.tol.rel,
            atol: crate::flexural::STEP_TOL_FRACTION * opts.tol.abs,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        },
    )?;
    ode.run_to(period)?;
    let y = ode.y;
    let matrix = Mat2 {
        m11: y[2],
        m12: y[4],
        m21: y[3],
        m22: y[5],
    };
    let det_drift = matrix.det_drift();
    if det_drift > DET_DRIFT_LIMIT {
        return Err(Error::DetDrift {
            drift: det_drift,
            limit: DET_DRIFT_LIMIT,
        });
    }
    let verdict = classify(matrix.trace(), class_tol)?;
    Ok(MonodromyOutcome {
        matrix,
        verdict,
        det_drift,
        period,
    })
}
