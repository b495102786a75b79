//! The closed-form stand-in system against numerical integration: switching
//! times by event detection, discriminants by the augmented monodromy.

use fishbone::flexural::SolveOptions;
use fishbone::floquet::monodromy_numeric;
use fishbone::limits::limit_quantities;
use fishbone::ode::{Dopri5, OdeOptions};
use fishbone::params::BridgeParams;
use fishbone::piecewise::{bar_f_j, bar_orbit, bar_solution_at, BarSystem, Regime, r_bar};
use std::f64::consts::PI;

fn academic() -> BridgeParams {
    BridgeParams::new(1.0, 1.0, 3.0, 1, 1).unwrap()
}

/// Event-detected band durations of the stand-in orbit, independent of the
/// arccos/arctan formulas: integrate the ODE and bisect
/// `|u| = r_bar` crossings on the dense output.
fn durations_by_events(alpha: f64, j: u32, m: f64, r0: f64, q: f64) -> (Vec<f64>, f64) {
    let rb = r_bar(r0);
    let aj4 = alpha * (j as f64).powi(4);
    let rhs = move |_t: f64, y: &[f64; 2]| [y[1], -aj4 * y[0] - 2.0 * bar_f_j(j, m, r0, y[0])];
    let mut ode = Dopri5::new(
        rhs,
        0.0,
        [q, 0.0],
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            h_max: 0.05,
            max_steps: 50_000_000,
        },
    )
    .unwrap();
    let mut events = Vec::new(); // times where |u| crosses r_bar
    let mut period = None;
    let mut prev_du_sign = -1.0;
    'outer: while ode.t < 100.0 {
        let step = ode.step().unwrap();
        // scan both thresholds inside the step
        for target in [rb, -rb] {
            let ga = step.eval(step.t0)[0] - target;
            let gb = step.eval(step.t1)[0] - target;
            if (ga > 0.0) != (gb > 0.0) {
                let (mut a, mut b, mut wa) = (step.t0, step.t1, ga);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    let wm = step.eval(mid)[0] - target;
                    if (wa > 0.0) == (wm > 0.0) {
                        a = mid;
                        wa = wm;
                    } else {
                        b = mid;
                    }
                }
                events.push(0.5 * (a + b));
            }
        }
        // period: next du = 0 with u > 0
        let du = ode.y[1];
        let sign = if du == 0.0 { 0.0 } else { du.signum() };
        if sign != 0.0 && sign != prev_du_sign {
            let (mut a, mut b) = (step.t0, step.t1);
            let mut wa = step.eval(a)[1];
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let wm = step.eval(mid)[1];
                if (wa > 0.0) == (wm > 0.0) {
                    a = mid;
                    wa = wm;
                } else {
                    b = mid;
                }
            }
            let t = 0.5 * (a + b);
            if step.eval(t)[0] > 0.0 {
                period = Some(t);
                break 'outer;
            }
            prev_du_sign = sign;
        } else if sign != 0.0 {
            prev_du_sign = sign;
        }
    }
    let tau = period.expect("closed orbit");
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.retain(|&t| t < tau);
    // durations between consecutive crossings, wrapping at the period; the
    // cycle starts inside the first band (u(0) = q > rb assumed)
    let mut durations = Vec::new();
    for w in events.windows(2) {
        durations.push(w[1] - w[0]);
    }
    // wrap: tail of the last band + head before the first crossing
    durations.push(tau - events.last().unwrap() + events.first().unwrap());
    (durations, tau)
}

#[test]
fn switching_times_match_event_detection_odd_j() {
    let p = academic();
    let (m, r0) = (3.0, 1.0 / 3.0);
    for q in [0.6, 1.0, 2.5] {
        let orbit = bar_orbit(p.alpha, p.j, m, r0, q).unwrap();
        assert_eq!(orbit.regime, Regime::OddJ);
        let (ev_durations, ev_tau) = durations_by_events(p.alpha, p.j, m, r0, q);
        assert!(
            (ev_tau - orbit.period).abs() < 1e-8,
            "q={q}: tau {} vs events {ev_tau}",
            orbit.period
        );
        // event durations run I1, I2, I3(=I1 length), then the wrapped I0
        assert_eq!(ev_durations.len(), 4, "q={q}");
        let want = [
            orbit.durations[1],
            orbit.durations[2],
            orbit.durations[1],
            orbit.durations[0],
        ];
        for (i, (got, want)) in ev_durations.iter().zip(want).enumerate() {
            assert!(
                (got - want).abs() < 1e-8,
                "q={q} band {i}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn switching_times_match_event_detection_even_j() {
    let p = BridgeParams::new(1.0, 1.0, 3.0, 2, 2).unwrap();
    let (m, r0) = (3.0, 1.0 / 3.0);
    for q in [0.9, 1.7] {
        let orbit = bar_orbit(p.alpha, p.j, m, r0, q).unwrap();
        assert_eq!(orbit.regime, Regime::EvenJ);
        let (ev_durations, ev_tau) = durations_by_events(p.alpha, p.j, m, r0, q);
        assert!((ev_tau - orbit.period).abs() < 1e-8, "q={q}");
        assert_eq!(ev_durations.len(), 4, "q={q}");
        let want = [
            orbit.durations[1],
            orbit.durations[0],
            orbit.durations[1],
            orbit.durations[0],
        ];
        for (i, (got, want)) in ev_durations.iter().zip(want).enumerate() {
            assert!((got - want).abs() < 1e-8, "q={q} band {i}: {got} vs {want}");
        }
    }
}

#[test]
fn closed_delta_matches_augmented_monodromy() {
    let p = academic();
    let (m, r0) = (3.0, 1.0 / 3.0);
    let sys = BarSystem::from_params(&p, m, r0).unwrap();
    let opts = SolveOptions {
        audit_energy: false,
        ..SolveOptions::default()
    };
    for (q, beta) in [
        (0.2, 4.0),
        (1.0, -16.25),
        (2.0, 10.0),
        (4.5, -2.25),
        (6.0, 20.0),
    ] {
        let closed = fishbone::piecewise::bar_delta(&p, m, r0, q, beta).unwrap();
        let numeric = monodromy_numeric(&sys, beta, q, &opts, None, 1e-9).unwrap();
        let diff = (closed - numeric.verdict.delta).abs() / closed.abs().max(1.0);
        assert!(
            diff < 1e-7,
            "q={q} beta={beta}: closed {closed} vs numeric {} (rel {diff:.2e})",
            numeric.verdict.delta
        );
    }
}

#[test]
fn large_q_band_structure_matches_limit_half_periods() {
    // the stand-in system has its own asymptotic slopes m(1 +- 1/j); its
    // outer-band durations converge to the half periods of the limit system
    // built with that effective slope
    let p = academic();
    let (m, r0) = (3.0, 1.0 / 3.0);
    let lq = limit_quantities(&p, m).unwrap();
    let orbit = bar_orbit(p.alpha, p.j, m, r0, 1e8).unwrap();
    // j = 1: w0 = sqrt(alpha + 2m) plays omega_plus, w2 = sqrt(alpha) omega_minus
    assert!((orbit.durations[0] - PI / lq.omega_plus).abs() < 1e-3);
    assert!((orbit.durations[2] - PI / lq.omega_minus).abs() < 1e-3);
    assert!(orbit.durations[1] < 1e-3);
    assert!(
        (orbit.period - (PI / lq.omega_plus + PI / lq.omega_minus)).abs() < 2e-3,
        "tau {} vs limit {}",
        orbit.period,
        PI / lq.omega_plus + PI / lq.omega_minus
    );
}

#[test]
fn q_at_rbar_is_the_regime_boundary() {
    let p = academic();
    let rb = r_bar(1.0 / 3.0);
    let at = bar_solution_at(&p, 3.0, 1.0 / 3.0, rb, 1.0).unwrap();
    assert_eq!(at.regime, Regime::Linear);
    let above = bar_solution_at(&p, 3.0, 1.0 / 3.0, rb * (1.0 + 1e-9), 1.0).unwrap();
    assert_eq!(above.regime, Regime::OddJ);
    // t0 -> 0 as q -> rbar from above (acos of ~1)
    assert!(above.durations[0] < 1e-4);
}
