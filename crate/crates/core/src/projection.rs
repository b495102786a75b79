//! Galerkin-projected nonlinearities of the mode pair.
//!
//! The flexural force `f_j`, the Hill coefficient kernel `g_{j,k}` and the
//! coupling terms `psi_1`/`psi_2` are sine-mode integrals of the restoring
//! law.  Every integral is evaluated by kink-split adaptive quadrature for
//! any model; for the piecewise-linear hanger law the same quantities have
//! closed forms, which the quadrature route must reproduce (this is the
//! oracle pair the test suite leans on).  The high-energy limit kernels
//! `h_j`/`s_{j,k}` are the degenerate closed forms with zero slack offset.

use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;
use crate::slackening::{Side, SlackeningModel};
use std::f64::consts::PI;

/// Engine choice for the projected integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionEngine {
    /// Kink-split adaptive Gauss-Legendre; works for every model.
    Quadrature,
    /// Exact expressions; only the piecewise-linear hanger law has them.
    ClosedForm,
}

/// Projection of one model onto a fixed `(j, k)` mode pair.
#[derive(Debug, Clone)]
pub struct ProjectionKernel {
    model: SlackeningModel,
    j: u32,
    k: u32,
    engine: ProjectionEngine,
    quad_tol: f64,
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

impl ProjectionKernel {
    pub fn new(
        model: SlackeningModel,
        j: u32,
        k: u32,
        engine: ProjectionEngine,
        quad_tol: f64,
    ) -> Result<Self> {
        if j < 1 || k < 1 {
            return Err(Error::Validation {
                field: "j",
                reason: "mode indices must be >= 1".into(),
            });
        }
        if !(quad_tol > 0.0) {
            return Err(Error::Validation {
                field: "quad_tol",
                reason: format!("must be positive, got {quad_tol}"),
            });
        }
        if engine == ProjectionEngine::ClosedForm && !matches!(model, SlackeningModel::Mmk { .. })
        {
            return Err(Error::Config(
                "closed-form projection is only available for the mmk model".into(),
            ));
        }
        Ok(ProjectionKernel {
            model,
            j,
            k,
            engine,
            quad_tol,
        })
    }

    /// Picks the closed form when the model admits one.
    pub fn preferring_closed_form(model: SlackeningModel, j: u32, k: u32) -> Result<Self> {
        let engine = if matches!(model, SlackeningModel::Mmk { .. }) {
            ProjectionEngine::ClosedForm
        } else {
            ProjectionEngine::Quadrature
        };
        Self::new(model, j, k, engine, DEFAULT_QUAD_TOL)
    }

    pub fn model(&self) -> &SlackeningModel {
        &self.model
    }
    pub fn j(&self) -> u32 {
        self.j
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn engine(&self) -> ProjectionEngine {
        self.engine
    }

    /// The single-mode integral transform of the law,
    /// `(2/pi) \int_0^pi f(r sin x) sin x dx`.
    pub fn f_tilde(&self, r: f64) -> Result<f64> {
        match (self.engine, &self.model) {
            (ProjectionEngine::ClosedForm, &SlackeningModel::Mmk { m, r0 }) => {
                Ok(mmk_f_tilde(m, r0, r))
            }
            _ => self.tilde_of(&|s| self.model.eval_f(s), r),
        }
    }

    /// The transform applied to an arbitrary scalar law (shared by the
    /// parity route); breakpoints come from this kernel's model kinks.
    fn tilde_of(&self, law: &dyn Fn(f64) -> f64, r: f64) -> Result<f64> {
        let tol = self.quad_tol * (1.0 + r.abs());
        let breaks = self.mode_breakpoints(1, r);
        integrate_adaptive(&|x: f64| law(r * x.sin()) * x.sin(), 0.0, PI, &breaks, tol)
            .map(|v| v * 2.0 / PI)
    }

    /// Projected flexural force `f_j`: the `j`-mode transform of the law.
    pub fn f_j(&self, r: f64) -> Result<f64> {
        match (self.engine, &self.model) {
            (ProjectionEngine::ClosedForm, &SlackeningModel::Mmk { m, r0 }) => {
                Ok(mmk_f_j(self.j, m, r0, r))
            }
            _ => {
                let j = self.j;
                let tol = self.quad_tol * (1.0 + r.abs());
                let breaks = self.mode_breakpoints(j, r);
                integrate_adaptive(
                    &|x: f64| self.model.eval_f(r * (j as f64 * x).sin()) * (j as f64 * x).sin(),
                    0.0,
                    PI,
                    &breaks,
                    tol,
                )
                .map(|v| v * 2.0 / PI)
            }
        }
    }

    /// `f_j` assembled from the parity split of the transform; must agree
    /// with [`Self::f_j`] whichever engine is active.
    pub fn f_j_via_parity(&self, r: f64) -> Result<f64> {
        let odd = self.tilde_of(&|s| self.model.odd_part(s), r)?;
        if self.j % 2 == 0 {
            Ok(odd)
        } else {
            let even = self.tilde_of(&|s| self.model.even_part(s), r)?;
            Ok(odd + even / self.j as f64)
        }
    }

    /// Hill coefficient kernel
    /// `g_{j,k}(r) = (2/pi) \int_0^pi f'(r sin jx) sin^2 kx dx`.
    pub fn g_jk(&self, r: f64) -> Result<f64> {
        match (self.engine, &self.model) {
            (ProjectionEngine::ClosedForm, &SlackeningModel::Mmk { m, r0 }) => {
                Ok(mmk_g_jk(self.j, self.k, m, r0, r))
            }
            _ => {
                let (j, k) = (self.j as f64, self.k as f64);
                let breaks = self.mode_breakpoints(self.j, r);
                integrate_adaptive(
                    &|x: f64| {
                        self.model.eval_fprime(r * (j * x).sin(), Side::Right) * (k * x).sin().powi(2)
                    },
                    0.0,
                    PI,
                    &breaks,
                    self.quad_tol,
                )
                .map(|v| v * 2.0 / PI)
            }
        }
    }

    /// Flexural coupling term `psi_1(y, z)`.
    pub fn psi_1(&self, y: f64, z: f64) -> Result<f64> {
        let (j, k) = (self.j as f64, self.k as f64);
        let breaks = self.pair_breakpoints(y, z);
        let tol = self.quad_tol * (1.0 + y.abs() + z.abs());
        integrate_adaptive(
            &|x: f64| {
                let a = y * (j * x).sin();
                let b = z * (k * x).sin();
                (self.model.eval_f(a + b) + self.model.eval_f(a - b)) * (j * x).sin()
            },
            0.0,
            PI,
            &breaks,
            tol,
        )
        .map(|v| v * 2.0 / PI)
    }

    /// Torsional coupling term `psi_2(y, z)`; identically zero at `z = 0`.
    pub fn psi_2(&self, y: f64, z: f64) -> Result<f64> {
        let (j, k) = (self.j as f64, self.k as f64);
        let breaks = self.pair_breakpoints(y, z);
        let tol = self.quad_tol * (1.0 + y.abs() + z.abs());
        integrate_adaptive(
            &|x: f64| {
                let a = y * (j * x).sin();
                let b = z * (k * x).sin();
                (self.model.eval_f(a + b) - self.model.eval_f(a - b)) * (k * x).sin()
            },
            0.0,
            PI,
            &breaks,
            tol,
        )
        .map(|v| v * 2.0 / PI)
    }

    /// `d psi_1 / d y` by differentiating under the integral (valid away
    /// from the measure-zero kink set); used by the smoothness checks.
    pub fn psi_1_dy(&self, y: f64, z: f64) -> Result<f64> {
        let (j, k) = (self.j as f64, self.k as f64);
        let breaks = self.pair_breakpoints(y, z);
        integrate_adaptive(
            &|x: f64| {
                let sj = (j * x).sin();
                let a = y * sj;
                let b = z * (k * x).sin();
                (self.model.eval_fprime(a + b, Side::Right)
                    + self.model.eval_fprime(a - b, Side::Right))
                    * sj
                    * sj
            },
            0.0,
            PI,
            &breaks,
            self.quad_tol,
        )
        .map(|v| v * 2.0 / PI)
    }

    /// Antiderivative of the projected force, `\int_0^u f_j(s) ds`; the
    /// potential term of the flexural energy.
    pub fn f_j_potential(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        let tol = self.quad_tol * (1.0 + u * u);
        // f_j is C1; splitting at the kink radii still helps the panels
        let mut breaks = Vec::new();
        for rk in self.model.kinks() {
            breaks.push(rk.abs());
            breaks.push(-rk.abs());
        }
        let fj = |s: f64| self.f_j(s).unwrap_or(f64::NAN);
        let v = integrate_adaptive(&fj, 0.0, u, &breaks, tol)?;
        if v.is_nan() {
            return Err(Error::Accuracy {
                requested: self.quad_tol,
                achieved: f64::NAN,
            });
        }
        Ok(v)
    }

    /// Panel boundaries for integrands built on `r sin(jx)`: kink preimages
    /// plus the sign-change grid of the carrier sine.
    fn mode_breakpoints(&self, j: u32, r: f64) -> Vec<f64> {
        let mut breaks: Vec<f64> = (1..j).map(|n| n as f64 * PI / j as f64).collect();
        if r != 0.0 {
            for rk in self.model.kinks() {
                breaks.extend(sine_level_crossings(j, rk / r));
            }
        }
        breaks
    }

    /// Panel boundaries for the two-mode integrands: sign grids of both
    /// carriers plus numerically located kink preimages of both arguments.
    fn pair_breakpoints(&self, y: f64, z: f64) -> Vec<f64> {
        let (j, k) = (self.j, self.k);
        let mut breaks: Vec<f64> = (1..j)
            .map(|n| n as f64 * PI / j as f64)
            .chain((1..k).map(|n| n as f64 * PI / k as f64))
            .collect();
        let kinks = self.model.kinks();
        if kinks.is_empty() {
            return breaks;
        }
        let jf = j as f64;
        let kf = k as f64;
        for sign in [1.0, -1.0] {
            for &rk in &kinks {
                let w = |x: f64| y * (jf * x).sin() + sign * z * (kf * x).sin() - rk;
                scan_roots(&w, j.max(k), &mut breaks);
            }
        }
        breaks
    }
}

/// All `x` in `[0, pi]` with `sin(j x) = s`.
fn sine_level_crossings(j: u32, s: f64) -> Vec<f64> {
    if !(-1.0..=1.0).contains(&s) || !s.is_finite() {
        return Vec::new();
    }
    let base = s.asin();
    let jf = j as f64;
    let top = jf * PI;
    let mut out = Vec::new();
    let mut n = 0.0;
    loop {
        let t1 = base + 2.0 * PI * n;
        let t2 = PI - base + 2.0 * PI * n;
        let mut pushed = false;
        for t in [t1, t2] {
            if (0.0..=top).contains(&t) {
                out.push(t / jf);
                pushed = true;
            }
        }
        if t1 > top && t2 > top && !pushed {
            break;
        }
        n += 1.0;
        if n > jf + 2.0 {
            break;
        }
    }
    out
}

/// Bisection root scan of `w` on `[0, pi]` at a resolution tied to the mode
/// indices; appends every located root to `breaks`.
fn scan_roots(w: &dyn Fn(f64) -> f64, max_mode: u32, breaks: &mut Vec<f64>) {
    let cells = 64 * max_mode.max(1) as usize;
    let dx = PI / cells as f64;
    let mut x0 = 0.0;
    let mut w0 = w(0.0);
    for i in 1..=cells {
        let x1 = i as f64 * dx;
        let w1 = w(x1);
        if w0 == 0.0 {
            breaks.push(x0);
        } else if w0 * w1 < 0.0 {
            let (mut a, mut b, mut wa) = (x0, x1, w0);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let wm = w(mid);
                if wa * wm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    wa = wm;
                }
            }
            breaks.push(0.5 * (a + b));
        }
        x0 = x1;
        w0 = w1;
    }
}

// ---------------------------------------------------------------------------
// Closed forms for the piecewise-linear hanger law and the high-energy limit
// ---------------------------------------------------------------------------

/// Exact transform of the piecewise-linear law: linear down to `-r0`, then
/// the arcsine branch.
pub fn mmk_f_tilde(m: f64, r0: f64, r: f64) -> f64 {
    if r >= -r0 {
        return m * r;
    }
    let ratio = r0 / r; // in (-1, 0]
    -(2.0 / PI) * m * (r * ratio.asin() + r0 * (1.0 - ratio * ratio).max(0.0).sqrt())
}

/// Exact projected force for the piecewise-linear law via the parity split.
pub fn mmk_f_j(j: u32, m: f64, r0: f64, r: f64) -> f64 {
    let odd = 0.5 * (mmk_f_tilde(m, r0, r) - mmk_f_tilde(m, r0, -r));
    if j % 2 == 0 {
        odd
    } else {
        let even = 0.5 * (mmk_f_tilde(m, r0, r) + mmk_f_tilde(m, r0, -r));
        odd + even / j as f64
    }
}

/// `q(j,k)`: `j` when `j` divides `k`, else zero.
pub fn q_factor(j: u32, k: u32) -> u32 {
    if k % j == 0 {
        j
    } else {
        0
    }
}

/// `p(j,k)`: zero for even `j`, `-tan(k pi / j)` for odd `j` (always finite
/// there: `2k = j(2n+1)` has no solution with odd `j`).
pub fn p_factor(j: u32, k: u32) -> f64 {
    if j % 2 == 0 {
        0.0
    } else if k % j == 0 {
        // tangent of an integer multiple of pi
        0.0
    } else {
        -(k as f64 * PI / j as f64).tan()
    }
}

/// The mode-projected Heaviside integral
/// `H_{j,k}(r) = \int_0^pi H(r sin jx + r0) sin^2 kx dx` in closed form.
///
/// Equals `pi/2` on `|r| <= r0`; beyond, the arcsine angle `asin(r0/|r|)`
/// enters, and the sign-dependent row is present only for odd `j`.
pub fn mmk_h(j: u32, k: u32, r0: f64, r: f64) -> f64 {
    debug_assert!(r0 >= 0.0);
    if r.abs() <= r0 {
        return PI / 2.0;
    }
    let theta = (r0 / r.abs()).asin();
    let jf = j as f64;
    let kf = k as f64;
    let arg = 2.0 * kf * theta / jf;
    let mut h = PI / 4.0 + 0.5 * theta - q_factor(j, k) as f64 / (4.0 * kf) * arg.sin();
    if j % 2 == 1 {
        let sign = if r > 0.0 { 1.0 } else { -1.0 };
        h += sign
            * (PI / (4.0 * jf) - theta / (2.0 * jf)
                + p_factor(j, k) / (4.0 * kf) * arg.cos()
                + arg.sin() / (4.0 * kf));
    }
    h
}

/// Closed-form Hill kernel for the piecewise-linear law:
/// `g_{j,k} = (2m/pi) H_{j,k}`.
pub fn mmk_g_jk(j: u32, k: u32, m: f64, r0: f64, r: f64) -> f64 {
    2.0 * m / PI * mmk_h(j, k, r0, r)
}

/// High-energy limit of the projected force.
pub fn limit_h(j: u32, m_inf: f64, r: f64) -> f64 {
    if j % 2 == 0 {
        0.5 * m_inf * r
    } else {
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        0.5 * m_inf * (1.0 + sign / j as f64) * r
    }
}

/// High-energy limit of the Hill kernel.
///
/// At `r = 0` the positive branch is returned by convention; the limit
/// coefficient is evaluated along orbits that vanish only on a null set, so
/// the choice is immaterial to the discriminant.
pub fn limit_s(j: u32, k: u32, m_inf: f64, r: f64) -> f64 {
    if j % 2 == 0 {
        return 0.5 * m_inf;
    }
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    0.5 * m_inf * (1.0 + sign * epsilon_jk(j, k))
}

/// `epsilon_{j,k} = 1/j - tan(pi k / j) / (k pi)` for odd `j`.
///
/// When `j` divides `k` the tangent argument is a whole multiple of pi and
/// the term is exactly zero (taking it literally would leak the rounding of
/// pi into the band weights `1 - epsilon`, which can sit exactly at zero).
pub fn epsilon_jk(j: u32, k: u32) -> f64 {
    debug_assert!(j % 2 == 1, "epsilon is defined for odd j only");
    if k % j == 0 {
        return 1.0 / j as f64;
    }
    1.0 / j as f64 - (PI * k as f64 / j as f64).tan() / (k as f64 * PI)
}
