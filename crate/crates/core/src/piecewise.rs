//! Closed-form stand-in for the diagonal (`j = k`) mode pair.
//!
//! The transform of the piecewise-linear hanger law is replaced by a purely
//! piecewise-linear force with the same compression asymptote (offset
//! `4 r0 / pi` instead of `r0`).  The flexural orbit then solves in sines
//! and cosines per linear band, the switching times have arccos/arctan
//! expressions, and the torsional equation becomes a multi-step Meissner
//! equation whose discriminant is an exact matrix product.  This is the
//! fast engine behind dense instability diagrams and the oracle partner of
//! the numerical one.

use crate::error::{Error, Result};
use crate::floquet::{meissner_discriminant, Step, StepPotential};
use crate::params::BridgeParams;
use crate::system::ModeSystem;
use serde::Serialize;
use std::f64::consts::PI;

/// Slack offset of the stand-in force: `4 r0 / pi`.
pub fn r_bar(r0: f64) -> f64 {
    4.0 * r0 / PI
}

/// The stand-in hanger law itself (offset `r_bar`).
pub fn bar_f(m: f64, r0: f64, r: f64) -> f64 {
    let rb = r_bar(r0);
    m * ((r + rb).max(0.0) - rb)
}

/// Projected stand-in force: piecewise linear with slope `m` inside
/// `|r| <= r_bar` and `(m/2)(1 +- 1/j)` beyond (the `1/j` correction only
/// for odd `j`).
pub fn bar_f_j(j: u32, m: f64, r0: f64, r: f64) -> f64 {
    let rb = r_bar(r0);
    if r.abs() <= rb {
        return m * r;
    }
    if j % 2 == 0 {
        if r > rb {
            0.5 * (m * r + m * rb)
        } else {
            0.5 * (m * r - m * rb)
        }
    } else {
        let jf = j as f64;
        if r > rb {
            0.5 * m * (1.0 + 1.0 / jf) * r + 0.5 * m * (1.0 - 1.0 / jf) * rb
        } else {
            0.5 * m * (1.0 - 1.0 / jf) * r - 0.5 * m * (1.0 + 1.0 / jf) * rb
        }
    }
}

/// Slope of [`bar_f_j`]; at the kinks `|r| = r_bar` the inner (linear-band)
/// slope is returned, a measure-zero convention for the integrators.
pub fn bar_f_j_slope(j: u32, m: f64, r0: f64, r: f64) -> f64 {
    let rb = r_bar(r0);
    if r.abs() <= rb {
        return m;
    }
    if j % 2 == 0 {
        0.5 * m
    } else if r > 0.0 {
        0.5 * m * (1.0 + 1.0 / j as f64)
    } else {
        0.5 * m * (1.0 - 1.0 / j as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Orbit confined to the linear band (`q <= r_bar`).
    Linear,
    EvenJ,
    OddJ,
}

/// Switching structure of one orbit of the stand-in system at amplitude `q`,
/// with the Hill step coefficients for a given spectral value.
#[derive(Debug, Clone, Serialize)]
pub struct PiecewiseSolution {
    pub q: f64,
    pub regime: Regime,
    pub r_bar: f64,
    /// Flexural angular frequencies per band: `[w1]`, `[w0, w1]` or
    /// `[w0, w1, w2]`.
    pub frequencies: Vec<f64>,
    /// Band durations matching `frequencies` (`[tau]` in the linear case).
    pub durations: Vec<f64>,
    /// Hill coefficients (squared frequencies; may be negative) per band.
    pub hill_coeffs: Vec<f64>,
    pub period: f64,
}

impl PiecewiseSolution {
    /// Expands the cycle into the ordered step potential
    /// (`A0 A1 A0 A1` for even `j`, `A0 A1 A2 A1` for odd `j`).
    pub fn step_potential(&self) -> Result<StepPotential> {
        match self.regime {
            Regime::Linear => StepPotential::new(vec![Step {
                coeff: self.hill_coeffs[0],
                dt: self.period,
            }]),
            Regime::EvenJ => {
                let (a0, a1) = (self.hill_coeffs[0], self.hill_coeffs[1]);
                let (d0, d1) = (self.durations[0], self.durations[1]);
                StepPotential::new(vec![
                    Step { coeff: a0, dt: d0 },
                    Step { coeff: a1, dt: d1 },
                    Step { coeff: a0, dt: d0 },
                    Step { coeff: a1, dt: d1 },
                ])
            }
            Regime::OddJ => {
                let (a0, a1, a2) = (
                    self.hill_coeffs[0],
                    self.hill_coeffs[1],
                    self.hill_coeffs[2],
                );
                let (d0, d1, d2) = (self.durations[0], self.durations[1], self.durations[2]);
                StepPotential::new(vec![
                    Step { coeff: a0, dt: d0 },
                    Step { coeff: a1, dt: d1 },
                    Step { coeff: a2, dt: d2 },
                    Step { coeff: a1, dt: d1 },
                ])
            }
        }
    }
}

/// Orbit structure only (independent of the spectral value).
#[derive(Debug, Clone)]
pub struct BarOrbit {
    pub regime: Regime,
    pub r_bar: f64,
    pub frequencies: Vec<f64>,
    pub durations: Vec<f64>,
    pub period: f64,
}

/// Switching times of the stand-in orbit at amplitude `q`.
pub fn bar_orbit(alpha: f64, j: u32, m: f64, r0: f64, q: f64) -> Result<BarOrbit> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Validation {
            field: "q",
            reason: format!("amplitude must be positive, got {q}"),
        });
    }
    if !(m > 0.0) || !(r0 > 0.0) || !(alpha > 0.0) {
        return Err(Error::Validation {
            field: "params",
            reason: "alpha, m and r0 must be positive".into(),
        });
    }
    let rb = r_bar(r0);
    let aj4 = alpha * (j as f64).powi(4);
    let w1 = (aj4 + 2.0 * m).sqrt();
    if q <= rb {
        let tau = 2.0 * PI / w1;
        return Ok(BarOrbit {
            regime: Regime::Linear,
            r_bar: rb,
            frequencies: vec![w1],
            durations: vec![tau],
            period: tau,
        });
    }
    if j % 2 == 0 {
        let w0 = (aj4 + m).sqrt();
        let t0 = ((w0 * w0 * rb + m * rb) / (w0 * w0 * q + m * rb)).acos() / w0;
        let b = ((q - rb) * (w0 * w0 * (q + rb) + 2.0 * m * rb)).sqrt();
        let dt1_half = (w1 * rb / b).atan() / w1;
        let durations = vec![2.0 * t0, 2.0 * dt1_half];
        let period = 2.0 * durations[0] + 2.0 * durations[1];
        Ok(BarOrbit {
            regime: Regime::EvenJ,
            r_bar: rb,
            frequencies: vec![w0, w1],
            durations,
            period,
        })
    } else {
        let jf = j as f64;
        let w0 = (aj4 + m * (1.0 + 1.0 / jf)).sqrt();
        let w2 = (aj4 + m * (1.0 - 1.0 / jf)).sqrt();
        let d = m * (1.0 - 1.0 / jf) * rb;
        let e = m * (1.0 + 1.0 / jf) * rb;
        let dt0_half = ((w0 * w0 * rb + d) / (w0 * w0 * q + d)).acos() / w0;
        let b = ((q - rb) * (w0 * w0 * (q + rb) + 2.0 * d)).sqrt();
        let dt1_half = (w1 * rb / b).atan() / w1;
        let dt2_half = (w2 * b / (w2 * w2 * rb + e)).atan() / w2;
        let durations = vec![2.0 * dt0_half, 2.0 * dt1_half, 2.0 * dt2_half];
        let period = durations[0] + 2.0 * durations[1] + durations[2];
        Ok(BarOrbit {
            regime: Regime::OddJ,
            r_bar: rb,
            frequencies: vec![w0, w1, w2],
            durations,
            period,
        })
    }
}

/// Hill step coefficients of the stand-in system for spectral value `beta`.
fn hill_coeffs(regime: Regime, gamma: f64, j: u32, m: f64, beta: f64) -> Vec<f64> {
    let j2 = (j as f64) * (j as f64);
    let base = beta * j2;
    match regime {
        Regime::Linear => vec![base + 2.0 * gamma * m],
        Regime::EvenJ => vec![base + gamma * m, base + 2.0 * gamma * m],
        Regime::OddJ => {
            let jf = j as f64;
            vec![
                base + gamma * m * (1.0 + 1.0 / jf),
                base + 2.0 * gamma * m,
                base + gamma * m * (1.0 - 1.0 / jf),
            ]
        }
    }
}

/// Full switching data with the Hill coefficients at the structural `beta`.
pub fn bar_solution(params: &BridgeParams, m: f64, r0: f64, q: f64) -> Result<PiecewiseSolution> {
    bar_solution_at(params, m, r0, q, params.beta)
}

/// Same, at an explicit spectral value.
pub fn bar_solution_at(
    params: &BridgeParams,
    m: f64,
    r0: f64,
    q: f64,
    beta: f64,
) -> Result<PiecewiseSolution> {
    if params.j != params.k {
        return Err(Error::Config(
            "the closed-form stand-in system is diagonal only (j = k)".into(),
        ));
    }
    let orbit = bar_orbit(params.alpha, params.j, m, r0, q)?;
    let coeffs = hill_coeffs(orbit.regime, params.gamma, params.j, m, beta);
    Ok(PiecewiseSolution {
        q,
        regime: orbit.regime,
        r_bar: orbit.r_bar,
        frequencies: orbit.frequencies,
        durations: orbit.durations,
        hill_coeffs: coeffs,
        period: orbit.period,
    })
}

/// Exact discriminant of the stand-in system at `(q, beta)`.
pub fn bar_delta(params: &BridgeParams, m: f64, r0: f64, q: f64, beta: f64) -> Result<f64> {
    let sol = bar_solution_at(params, m, r0, q, beta)?;
    let (_, delta) = meissner_discriminant(&sol.step_potential()?);
    Ok(delta)
}

/// The stand-in system as a mode system, for the numerical route.
pub struct BarSystem {
    pub alpha: f64,
    pub gamma: f64,
    pub j: u32,
    pub m: f64,
    pub r0: f64,
}

impl BarSystem {
    pub fn from_params(params: &BridgeParams, m: f64, r0: f64) -> Result<Self> {
        if params.j != params.k {
            return Err(Error::Config(
                "the closed-form stand-in system is diagonal only (j = k)".into(),
            ));
        }
        Ok(BarSystem {
            alpha: params.alpha,
            gamma: params.gamma,
            j: params.j,
            m,
            r0,
        })
    }
}

impl ModeSystem for BarSystem {
    fn alpha_j4(&self) -> f64 {
        self.alpha * (self.j as f64).powi(4)
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn spectral_weight(&self) -> f64 {
        (self.j as f64) * (self.j as f64)
    }

    fn restoring(&self, r: f64) -> f64 {
        bar_f_j(self.j, self.m, self.r0, r)
    }

    fn hill_kernel(&self, r: f64) -> f64 {
        bar_f_j_slope(self.j, self.m, self.r0, r)
    }

    fn restoring_potential(&self, u: f64) -> Result<f64> {
        // exact continuous antiderivative with P(0) = 0
        let rb = r_bar(self.r0);
        let (j, m) = (self.j, self.m);
        let jf = j as f64;
        let (slope_up, offset_up, slope_low, offset_low) = if j % 2 == 0 {
            (0.5 * m, 0.5 * m * rb, 0.5 * m, -0.5 * m * rb)
        } else {
            (
                0.5 * m * (1.0 + 1.0 / jf),
                0.5 * m * (1.0 - 1.0 / jf) * rb,
                0.5 * m * (1.0 - 1.0 / jf),
                -0.5 * m * (1.0 + 1.0 / jf) * rb,
            )
        };
        let p_inner = |s: f64| 0.5 * m * s * s;
        let v = if u > rb {
            p_inner(rb) + 0.5 * slope_up * (u * u - rb * rb) + offset_up * (u - rb)
        } else if u < -rb {
            p_inner(rb) + 0.5 * slope_low * (u * u - rb * rb) + offset_low * (u + rb)
        } else {
            p_inner(u)
        };
        Ok(v)
    }

    fn stiffness_at_zero(&self) -> f64 {
        self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn academic() -> BridgeParams {
        BridgeParams::new(1.0, 1.0, 3.0, 1, 1).unwrap()
    }

    #[test]
    fn bar_force_branches() {
        let (m, r0) = (3.0, 1.0 / 3.0);
        let rb = r_bar(r0);
        // inside the band: m r, both parities
        for j in [1u32, 2, 3] {
            for r in [-rb, -0.1, 0.0, 0.2, rb] {
                assert!((bar_f_j(j, m, r0, r) - m * r).abs() < 1e-14, "j={j} r={r}");
            }
        }
        // even j above the band: (m r + m rb)/2
        let r = rb + 0.5;
        assert!((bar_f_j(2, m, r0, r) - 0.5 * (m * r + m * rb)).abs() < 1e-14);
        // odd j below the band: (m/2)(1-1/j) r - (m/2)(1+1/j) rb
        let r = -(rb + 0.7);
        let j = 3u32;
        let want = 0.5 * m * (1.0 - 1.0 / 3.0) * r - 0.5 * m * (1.0 + 1.0 / 3.0) * rb;
        assert!((bar_f_j(j, m, r0, r) - want).abs() < 1e-14);
    }

    #[test]
    fn bar_force_is_continuous_at_kinks() {
        let (m, r0) = (3.0, 1.0 / 3.0);
        let rb = r_bar(r0);
        for j in [1u32, 2, 3, 4, 5] {
            for s in [-1.0, 1.0] {
                let below = bar_f_j(j, m, r0, s * rb - s * 1e-12);
                let above = bar_f_j(j, m, r0, s * rb + s * 1e-12);
                assert!((below - above).abs() < 1e-10, "j={j} side={s}");
            }
        }
    }

    #[test]
    fn linear_regime_at_and_below_rbar() {
        let p = academic();
        let sol = bar_solution(&p, 3.0, 1.0 / 3.0, 0.3).unwrap();
        assert_eq!(sol.regime, Regime::Linear);
        let w = 7.0f64.sqrt();
        assert!((sol.period - 2.0 * PI / w).abs() < 1e-14);
        // q = r_bar exactly: t0 = acos(1) = 0, still the linear boundary
        let sol = bar_solution(&p, 3.0, 1.0 / 3.0, r_bar(1.0 / 3.0)).unwrap();
        assert_eq!(sol.regime, Regime::Linear);
    }

    #[test]
    fn degenerate_outer_durations_just_above_rbar() {
        let p = academic();
        let rb = r_bar(1.0 / 3.0);
        let sol = bar_solution(&p, 3.0, 1.0 / 3.0, rb * (1.0 + 1e-12)).unwrap();
        assert_eq!(sol.regime, Regime::OddJ);
        assert!(sol.durations[0] < 1e-5);
        assert!(sol.durations[2] < 1e-5);
        // the inner band tends to a half period of w1
        let w1 = 7.0f64.sqrt();
        assert!((sol.durations[1] - PI / w1).abs() < 1e-5);
    }

    #[test]
    fn large_q_durations_tend_to_limit_half_periods() {
        let p = academic();
        let sol = bar_solution(&p, 3.0, 1.0 / 3.0, 1e7).unwrap();
        let (w0, w2) = (sol.frequencies[0], sol.frequencies[2]);
        assert!((sol.durations[0] - PI / w0).abs() < 1e-3);
        assert!((sol.durations[2] - PI / w2).abs() < 1e-3);
        assert!(sol.durations[1] < 1e-3);
    }

    #[test]
    fn delta_continuous_across_rbar() {
        // the outer-band durations vanish like sqrt(q - rbar), so the gap to
        // the linear value must shrink accordingly
        let p = academic();
        let rb = r_bar(1.0 / 3.0);
        for beta in [-5.0, 0.7, 12.0] {
            let linear = bar_delta(&p, 3.0, 1.0 / 3.0, rb * (1.0 - 1e-15), beta).unwrap();
            let a_sq = beta + 2.0 * 3.0 * 3.0;
            let expect = 2.0 * (2.0 * PI * a_sq.sqrt() / 7.0f64.sqrt()).cos();
            assert!((linear - expect).abs() < 1e-12, "beta={beta}");
            let mut prev_gap = f64::INFINITY;
            for eps in [1e-6, 1e-8, 1e-10, 1e-12] {
                let above = bar_delta(&p, 3.0, 1.0 / 3.0, rb * (1.0 + eps), beta).unwrap();
                let gap = (above - linear).abs();
                assert!(gap < prev_gap, "beta={beta} eps={eps}: gap {gap} grew");
                prev_gap = gap;
            }
            assert!(prev_gap < 1e-4, "beta={beta}: final gap {prev_gap}");
        }
    }

    #[test]
    fn delta_equals_its_own_step_potential() {
        let p = academic();
        for (q, beta) in [(1.0, 4.0), (3.7, -2.25), (0.9, -18.0)] {
            let sol = bar_solution_at(&p, 3.0, 1.0 / 3.0, q, beta).unwrap();
            let (_, d1) = meissner_discriminant(&sol.step_potential().unwrap());
            let d2 = bar_delta(&p, 3.0, 1.0 / 3.0, q, beta).unwrap();
            assert_eq!(d1, d2);
        }
    }

    #[test]
    fn rejects_offdiagonal_modes() {
        let p = BridgeParams::new(1.0, 1.0, 3.0, 3, 2).unwrap();
        assert!(bar_delta(&p, 3.0, 1.0 / 3.0, 1.0, 0.5).is_err());
        assert!(BarSystem::from_params(&p, 3.0, 1.0 / 3.0).is_err());
    }

    #[test]
    fn bar_potential_matches_numeric_integral() {
        let sys = BarSystem {
            alpha: 1.0,
            gamma: 3.0,
            j: 3,
            m: 3.0,
            r0: 1.0 / 3.0,
        };
        for u in [-2.0, -0.3, 0.0, 0.4243, 1.7] {
            let exact = sys.restoring_potential(u).unwrap();
            let quad = crate::quad::integrate_adaptive(
                &|s| bar_f_j(3, 3.0, 1.0 / 3.0, s),
                0.0,
                u,
                &[-r_bar(1.0 / 3.0), r_bar(1.0 / 3.0)],
                1e-12,
            )
            .unwrap();
            assert!((exact - quad).abs() < 1e-10, "u={u}: {exact} vs {quad}");
        }
    }
}
