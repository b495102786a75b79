//! Restoring-force laws for the hangers and their structural assumptions.
//!
//! All models are continuous, vanish at the origin and are non-decreasing;
//! derivative jumps (kinks) are allowed anywhere except the origin.  The
//! asymptotic behaviour splits the catalogue: slopes that flatten under
//! compression and slopes that settle to a positive constant under traction.

use crate::error::{Error, Result};
use serde::Serialize;

/// Which one-sided derivative to evaluate at a kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A strictly validated piecewise-linear law given by knot points.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinear {
    /// Builds from `(r, f(r))` knots sorted by `r`.
    ///
    /// Tails extrapolate linearly with the end-segment slopes; `right_slope`
    /// may be overridden to pin the traction asymptote.  Knots at the origin
    /// are rejected (kinks must avoid zero) and the law must pass through
    /// `(0, 0)`.
    pub fn new(knots: Vec<(f64, f64)>, right_slope_override: Option<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Validation {
                field: "knots",
                reason: "need at least two knot points".into(),
            });
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Validation {
                    field: "knots",
                    reason: format!("abscissae must strictly increase (saw {} then {})", w[0].0, w[1].0),
                });
            }
            if !(w[1].1 >= w[0].1) {
                return Err(Error::Validation {
                    field: "knots",
                    reason: "ordinates must be non-decreasing".into(),
                });
            }
        }
        if knots.iter().any(|&(r, _)| r.abs() < 1e-12) {
            return Err(Error::Validation {
                field: "knots",
                reason: "a knot at r = 0 puts a kink at the origin, which is not allowed".into(),
            });
        }
        let seg_slope = |i: usize| {
            let (r0, f0) = knots[i];
            let (r1, f1) = knots[i + 1];
            (f1 - f0) / (r1 - r0)
        };
        let left_slope = seg_slope(0);
        let right_slope = right_slope_override.unwrap_or_else(|| seg_slope(knots.len() - 2));
        if right_slope < 0.0 || left_slope < 0.0 {
            return Err(Error::Validation {
                field: "knots",
                reason: "tail slopes must be non-negative".into(),
            });
        }
        let pl = PiecewiseLinear {
            knots,
            left_slope,
            right_slope,
        };
        if pl.eval(0.0).abs() > 1e-9 {
            return Err(Error::Validation {
                field: "knots",
                reason: format!("law must vanish at the origin (f(0) = {})", pl.eval(0.0)),
            });
        }
        if pl.slope_at(0.0) <= 0.0 {
            return Err(Error::Validation {
                field: "knots",
                reason: "slope at the origin must be positive".into(),
            });
        }
        Ok(pl)
    }

    fn eval(&self, r: f64) -> f64 {
        let first = self.knots[0];
        let last = *self.knots.last().unwrap();
        if r <= first.0 {
            return first.1 + self.left_slope * (r - first.0);
        }
        if r >= last.0 {
            return last.1 + self.right_slope * (r - last.0);
        }
        let i = self.knots.partition_point(|&(x, _)| x <= r) - 1;
        let (r0, f0) = self.knots[i];
        let (r1, f1) = self.knots[i + 1];
        f0 + (f1 - f0) * (r - r0) / (r1 - r0)
    }

    fn slope_at(&self, r: f64) -> f64 {
        self.slope(r, Side::Right)
    }

    fn slope(&self, r: f64, side: Side) -> f64 {
        let first = self.knots[0];
        let last = *self.knots.last().unwrap();
        if r < first.0 || (r == first.0 && side == Side::Left) {
            return self.left_slope;
        }
        if r > last.0 || (r == last.0 && side == Side::Right) {
            return self.right_slope;
        }
        // interior; at a knot the side picks the segment
        let i = match side {
            Side::Right => self.knots.partition_point(|&(x, _)| x <= r) - 1,
            Side::Left => self.knots.partition_point(|&(x, _)| x < r) - 1,
        };
        let i = i.min(self.knots.len() - 2);
        let (r0, f0) = self.knots[i];
        let (r1, f1) = self.knots[i + 1];
        (f1 - f0) / (r1 - r0)
    }

    fn kinks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let n = self.knots.len();
        for i in 0..n {
            let r = self.knots[i].0;
            let sl = self.slope(r, Side::Left);
            let sr = self.slope(r, Side::Right);
            if (sl - sr).abs() > 1e-12 * (1.0 + sl.abs().max(sr.abs())) {
                out.push(r);
            }
        }
        out
    }
}

/// A slackening restoring-force law.
#[derive(Debug, Clone, PartialEq)]
pub enum SlackeningModel {
    /// Piecewise-linear hangers: linear under traction, slack beyond `-r0`.
    Mmk { m: f64, r0: f64 },
    /// Smooth law with linear odd part; traction slope settles to `2m`.
    SqrtSmooth { m: f64, h: f64 },
    /// Exponential law; traction slope diverges.
    Exponential { m: f64, h: f64 },
    /// User-supplied knots.
    PiecewiseLinear(PiecewiseLinear),
}

/// Outcome of checking the structural assumptions on a model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AssumptionReport {
    /// Continuity, monotonicity, f(0)=0, piecewise C1 away from the origin.
    pub s0: bool,
    /// Slope flattens to zero under compression.
    pub s1: bool,
    /// Slope settles to a positive constant under traction.
    pub s2: bool,
    /// The traction asymptote `M`, present when `s2` holds.
    pub m_asymptotic: Option<f64>,
}

impl SlackeningModel {
    pub fn mmk(m: f64, r0: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::Validation {
                field: "m",
                reason: format!("slope must be positive, got {m}"),
            });
        }
        if !(r0 > 0.0) {
            return Err(Error::Validation {
                field: "r0",
                reason: format!(
                    "slack offset must be positive (r0 = {r0} would put the kink at the origin)"
                ),
            });
        }
        Ok(SlackeningModel::Mmk { m, r0 })
    }

    pub fn sqrt_smooth(m: f64, h: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::Validation {
                field: "m",
                reason: format!("slope must be positive, got {m}"),
            });
        }
        if !(h > 0.0) {
            return Err(Error::Validation {
                field: "h",
                reason: format!("smoothing must be positive, got {h}"),
            });
        }
        Ok(SlackeningModel::SqrtSmooth { m, h })
    }

    pub fn exponential(m: f64, h: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::Validation {
                field: "m",
                reason: format!("slope must be positive, got {m}"),
            });
        }
        if !(h > 0.0) {
            return Err(Error::Validation {
                field: "h",
                reason: format!("scale must be positive, got {h}"),
            });
        }
        Ok(SlackeningModel::Exponential { m, h })
    }

    /// Restoring force at displacement `r`.
    pub fn eval_f(&self, r: f64) -> f64 {
        match *self {
            SlackeningModel::Mmk { m, r0 } => m * ((r + r0).max(0.0) - r0),
            SlackeningModel::SqrtSmooth { m, h } => m * r + (m * r).hypot(h) - h,
            SlackeningModel::Exponential { m, h } => h * ((m * r / h).exp() - 1.0),
            SlackeningModel::PiecewiseLinear(ref pl) => pl.eval(r),
        }
    }

    /// One-sided derivative at `r`; both sides agree away from kinks.
    pub fn eval_fprime(&self, r: f64, side: Side) -> f64 {
        match *self {
            SlackeningModel::Mmk { m, r0 } => {
                if r > -r0 {
                    m
                } else if r < -r0 {
                    0.0
                } else {
                    match side {
                        Side::Left => 0.0,
                        Side::Right => m,
                    }
                }
            }
            SlackeningModel::SqrtSmooth { m, h } => m + m * m * r / (m * r).hypot(h),
            SlackeningModel::Exponential { m, h } => m * (m * r / h).exp(),
            SlackeningModel::PiecewiseLinear(ref pl) => pl.slope(r, side),
        }
    }

    /// Abscissae where the derivative jumps, in increasing order.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            SlackeningModel::Mmk { r0, .. } => vec![-r0],
            SlackeningModel::SqrtSmooth { .. } | SlackeningModel::Exponential { .. } => vec![],
            SlackeningModel::PiecewiseLinear(ref pl) => pl.kinks(),
        }
    }

    /// Slope at the origin, `f'(0)`.
    pub fn m_at_zero(&self) -> f64 {
        match *self {
            SlackeningModel::Mmk { m, .. }
            | SlackeningModel::SqrtSmooth { m, .. }
            | SlackeningModel::Exponential { m, .. } => m,
            SlackeningModel::PiecewiseLinear(ref pl) => pl.slope_at(0.0),
        }
    }

    /// Odd part of the law.
    pub fn odd_part(&self, r: f64) -> f64 {
        0.5 * (self.eval_f(r) - self.eval_f(-r))
    }

    /// Even part of the law.
    pub fn even_part(&self, r: f64) -> f64 {
        0.5 * (self.eval_f(r) + self.eval_f(-r))
    }

    /// Checks the structural assumptions; built-in variants answer
    /// analytically, knot laws by their tail slopes.
    pub fn check_assumptions(&self) -> AssumptionReport {
        match *self {
            SlackeningModel::Mmk { m, .. } => AssumptionReport {
                s0: true,
                s1: true,
                s2: true,
                m_asymptotic: Some(m),
            },
            SlackeningModel::SqrtSmooth { m, .. } => AssumptionReport {
                s0: true,
                s1: true,
                s2: true,
                m_asymptotic: Some(2.0 * m),
            },
            SlackeningModel::Exponential { .. } => AssumptionReport {
                s0: true,
                s1: true,
                s2: false,
                m_asymptotic: None,
            },
            SlackeningModel::PiecewiseLinear(ref pl) => {
                let s2 = pl.right_slope > 0.0;
                AssumptionReport {
                    s0: true,
                    s1: pl.left_slope == 0.0,
                    s2,
                    m_asymptotic: s2.then_some(pl.right_slope),
                }
            }
        }
    }

    /// Short descriptor used in grid metadata and CLI output.
    pub fn describe(&self) -> String {
        match *self {
            SlackeningModel::Mmk { m, r0 } => format!("mmk(m={m}, r0={r0})"),
            SlackeningModel::SqrtSmooth { m, h } => format!("sqrt(m={m}, h={h})"),
            SlackeningModel::Exponential { m, h } => format!("exp(m={m}, h={h})"),
            SlackeningModel::PiecewiseLinear(ref pl) => {
                format!("piecewise({} knots)", pl.knots.len())
            }
        }
    }
}
