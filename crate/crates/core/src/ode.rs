//! Embedded Dormand-Prince 5(4) integrator with dense output.
//!
//! A hand-rolled stepper keeps the pieces the solvers need close at hand:
//! step-by-step driving, a quartic interpolant inside every accepted step
//! for event refinement, exact landing on a requested end time, and a
//! non-finite guard so failed kernel evaluations surface as solver errors.

use crate::error::{Error, Result};

// Butcher tableau (Dormand & Prince 1980).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// b - b_hat, the embedded error weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output weights (Hairer, Norsett, Wanner; DOPRI5 CONTD5)
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its interpolant.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// State at any `t` inside `[t0, t1]` (quartic interpolant, same order
    /// as the step error).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let theta1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.r[0][i]
                + theta
                    * (self.r[1][i]
                        + theta1
                            * (self.r[2][i] + theta * (self.r[3][i] + theta1 * self.r[4][i])));
        }
        y
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

/// Stepwise Dormand-Prince 5(4) driver.
pub struct Dopri5<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]> {
    f: F,
    pub t: f64,
    pub y: [f64; N],
    k1: [f64; N],
    h: f64,
    opts: OdeOptions,
    pub n_accepted: u64,
    pub n_rejected: u64,
}

impl<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]> Dopri5<N, F> {
    pub fn new(mut f: F, t0: f64, y0: [f64; N], opts: OdeOptions) -> Result<Self> {
        let k1 = f(t0, &y0);
        if !finite(&k1) || !finite(&y0) {
            return Err(Error::NonFinite { t: t0 });
        }
        // crude but serviceable initial step: limit the first-order change
        let mut ratio: f64 = 0.0;
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y0[i].abs();
            ratio = ratio.max(k1[i].abs() / sc);
        }
        let h0 = if ratio > 0.0 { 0.01 / ratio } else { 1e-6 };
        let h = h0.min(opts.h_max).max(1e-12);
        Ok(Dopri5 {
            f,
            t: t0,
            y: y0,
            k1,
            h,
            opts,
            n_accepted: 0,
            n_rejected: 0,
        })
    }

    /// Caps the next attempted step (used to land exactly on an end time).
    pub fn clamp_next_step(&mut self, h: f64) {
        if h < self.h {
            self.h = h;
        }
    }

    /// Advances by one accepted step and returns its dense interpolant.
    pub fn step(&mut self) -> Result<DenseStep<N>> {
        let mut h = self.h.min(self.opts.h_max);
        loop {
            if self.n_accepted + self.n_rejected >= self.opts.max_steps {
                return Err(Error::Stiffness { t: self.t });
            }
            if h.abs() <= self.t.abs() * f64::EPSILON * 4.0 || h < 1e-300 {
                return Err(Error::Stiffness { t: self.t });
            }

            let t = self.t;
            let y = self.y;
            let k1 = self.k1;

            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            k[1] = (self.f)(t + C[1] * h, &comb(&y, h, &[(A2[0], &k[0])]));
            k[2] = (self.f)(t + C[2] * h, &comb(&y, h, &[(A3[0], &k[0]), (A3[1], &k[1])]));
            k[3] = (self.f)(
                t + C[3] * h,
                &comb(&y, h, &[(A4[0], &k[0]), (A4[1], &k[1]), (A4[2], &k[2])]),
            );
            k[4] = (self.f)(
                t + C[4] * h,
                &comb(
                    &y,
                    h,
                    &[
                        (A5[0], &k[0]),
                        (A5[1], &k[1]),
                        (A5[2], &k[2]),
                        (A5[3], &k[3]),
                    ],
                ),
            );
            k[5] = (self.f)(
                t + C[5] * h,
                &comb(
                    &y,
                    h,
                    &[
                        (A6[0], &k[0]),
                        (A6[1], &k[1]),
                        (A6[2], &k[2]),
                        (A6[3], &k[3]),
                        (A6[4], &k[4]),
                    ],
                ),
            );
            // FSAL: the 5th-order solution doubles as the 7th stage node
            let mut y1 = y;
            for i in 0..N {
                let mut acc = 0.0;
                for s in 0..6 {
                    acc += B[s] * k[s][i];
                }
                y1[i] += h * acc;
            }
            k[6] = (self.f)(t + h, &y1);

            let mut finite_ok = finite(&y1);
            for ks in &k {
                finite_ok &= finite(ks);
            }
            if !finite_ok {
                self.n_rejected += 1;
                h *= 0.25;
                continue;
            }

            // scaled RMS error of the embedded pair
            let mut err_sq = 0.0;
            for i in 0..N {
                let mut e = 0.0;
                for s in 0..7 {
                    e += E[s] * k[s][i];
                }
                e *= h;
                let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y1[i].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / N as f64).sqrt();

            if err <= 1.0 {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 10.0);
                let dense = self.dense(h, &k, &y1);
                self.t = t + h;
                self.y = y1;
                self.k1 = k[6];
                self.h = (h * fac).min(self.opts.h_max);
                self.n_accepted += 1;
                return Ok(dense);
            }
            self.n_rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }

    fn dense(&self, h: f64, k: &[[f64; N]; 7], y1: &[f64; N]) -> DenseStep<N> {
        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = y1[i] - self.y[i];
            let bspl = h * k[0][i] - ydiff;
            r[0][i] = self.y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k[6][i] - bspl;
            let mut acc = 0.0;
            for s in 0..7 {
                acc += D[s] * k[s][i];
            }
            r[4][i] = h * acc;
        }
        DenseStep {
            t0: self.t,
            t1: self.t + h,
            r,
        }
    }

    /// Integrates up to exactly `t_end` (which must lie ahead of `t`).
    pub fn run_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            let remaining = t_end - self.t;
            if remaining <= t_end.abs() * f64::EPSILON * 4.0 {
                break;
            }
            self.clamp_next_step(remaining);
            self.step()?;
        }
        Ok(())
    }
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for &(a, k) in terms {
        for i in 0..N {
            out[i] += h * a * k[i];
        }
    }
    out
}
