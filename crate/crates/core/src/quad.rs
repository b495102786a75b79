//! Adaptive composite Gauss-Legendre quadrature.
//!
//! The projected nonlinearities are integrals of piecewise-smooth functions
//! whose breakpoints (kink preimages, sign changes of the carrier sine) are
//! known or computable.  Panels are split at every breakpoint first, then
//! bisected adaptively, so each panel sees an analytic integrand and the
//! fixed-order rule converges spectrally.

use crate::error::{Error, Result};

/// Fixed-order Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights by Newton iteration on the Legendre polynomial.
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "rule order must be at least 2");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Chebyshev-based initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Apply the rule to `f` on [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: &F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const PANEL_ORDER: usize = 15;
const MAX_DEPTH: u32 = 48;

thread_local! {
    static PANEL_RULE: GaussLegendre = GaussLegendre::new(PANEL_ORDER);
}

/// Integrate `f` over [a, b] to absolute tolerance `tol`, splitting first at
/// the supplied breakpoints and then by adaptive bisection.
///
/// Returns the integral value; fails with [`Error::Accuracy`] when the error
/// estimate cannot be brought under `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    assert!(tol > 0.0, "quadrature tolerance must be positive");
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * (hi - lo));

    let mut panels = Vec::with_capacity(cuts.len() + 1);
    let mut left = lo;
    for c in cuts {
        if c - left > 1e-14 * (hi - lo) {
            panels.push((left, c));
            left = c;
        }
    }
    panels.push((left, hi));

    let total = hi - lo;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut budget: u32 = 400_000; // rule applications, a hard stop
    PANEL_RULE.with(|rule| {
        for (pa, pb) in panels {
            let share = tol * (pb - pa) / total;
            let (v, e) = refine(rule, f, pa, pb, share, 0, &mut budget);
            value += v;
            err += e;
        }
    });
    if !(err <= tol) || !value.is_finite() {
        return Err(Error::Accuracy {
            requested: tol,
            achieved: err,
        });
    }
    Ok(sign * value)
}

fn refine<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    budget: &mut u32,
) -> (f64, f64) {
    let whole = rule.integrate(a, b, f);
    let mid = 0.5 * (a + b);
    let halves = rule.integrate(a, mid, f) + rule.integrate(mid, b, f);
    let est = (halves - whole).abs();
    *budget = budget.saturating_sub(3);
    // non-finite estimates cannot improve under bisection; give up here
    if est <= tol || depth >= MAX_DEPTH || !est.is_finite() || *budget == 0 {
        // Richardson-style: the bisected sum is the better value.
        return (halves, est);
    }
    let (v1, e1) = refine(rule, f, a, mid, 0.5 * tol, depth + 1, budget);
    let (v2, e2) = refine(rule, f, mid, b, 0.5 * tol, depth + 1, budget);
    (v1 + v2, e1 + e2)
}
