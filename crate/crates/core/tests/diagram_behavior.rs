//! Grid-level behaviour: cache transparency, engine comparison in the
//! linear regime, tongue-width scaling at the splitting point, and the
//! spectral smoothness smoke check.

use fishbone::diagram::{
    compare_engines, sweep_closed_form, sweep_grid, AxisSpec, CellClass, EngineKind, GridSpec,
    SweepOptions,
};
use fishbone::flexural::{detect_period, solve_flexural, SolveOptions};
use fishbone::params::BridgeParams;
use fishbone::piecewise::{bar_delta, bar_f_j_slope, r_bar};
use fishbone::projection::{ProjectionEngine, ProjectionKernel};
use fishbone::slackening::SlackeningModel;
use fishbone::system::KernelSystem;

fn academic() -> BridgeParams {
    BridgeParams::new(1.0, 1.0, 3.0, 1, 1).unwrap()
}

#[test]
fn trajectory_cache_is_observationally_invisible() {
    let params = academic();
    let model = SlackeningModel::mmk(3.0, 1.0 / 3.0).unwrap();
    let spec = GridSpec {
        q: AxisSpec::new(0.3, 2.0, 4).unwrap(),
        beta: AxisSpec::new(-3.0, 9.0, 5).unwrap(),
    };
    let cached = sweep_grid(
        &params,
        &model,
        &spec,
        EngineKind::Numeric,
        &SweepOptions::default(),
    )
    .unwrap();
    let uncached = sweep_grid(
        &params,
        &model,
        &spec,
        EngineKind::Numeric,
        &SweepOptions {
            reuse_trajectory: false,
            ..SweepOptions::default()
        },
    )
    .unwrap();
    for bi in 0..5 {
        for qi in 0..4 {
            let a = cached.delta_at(bi, qi);
            let b = uncached.delta_at(bi, qi);
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "cell ({bi},{qi}): {a} vs {b}"
            );
        }
    }
}

#[test]
fn single_linear_cell_engine_discrepancy_is_tiny() {
    let spec = GridSpec {
        q: AxisSpec::new(0.2, 0.2, 1).unwrap(),
        beta: AxisSpec::new(5.0, 5.0, 1).unwrap(),
    };
    let cmp = compare_engines(&academic(), 3.0, 1.0 / 3.0, &spec, &SweepOptions::default())
        .unwrap();
    assert!(
        cmp.max_abs_discrepancy <= 1e-10,
        "linear cell discrepancy {}",
        cmp.max_abs_discrepancy
    );
}

#[test]
fn tongue_width_shrinks_toward_the_splitting_point() {
    // the exact system opens its tongues at a square-root rate in q - rbar
    // (the outer-band durations are O(sqrt(q - rbar))): much faster than the
    // order-N tangency of smooth laws, and vanishing at the tip
    let params = academic();
    let rb = r_bar(1.0 / 3.0);
    let band_width = |eps: f64| -> f64 {
        let q = rb * (1.0 + eps);
        let n = 6000;
        let betas: Vec<f64> = (0..n).map(|i| 9.0 + 3.0 * i as f64 / (n - 1) as f64).collect();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &b in &betas {
            let d = bar_delta(&params, 3.0, 1.0 / 3.0, q, b).unwrap();
            if d.abs() > 2.0 {
                lo = lo.min(b);
                hi = hi.max(b);
            }
        }
        (hi - lo).max(0.0)
    };
    let (w1, w2, w3) = (band_width(0.008), band_width(0.002), band_width(0.0005));
    assert!(w1 > w2 && w2 > w3, "widths must shrink: {w1} > {w2} > {w3}");
    // exponent of the opening rate, measured across a decade
    let p = (w1 / w3).ln() / (0.008f64 / 0.0005).ln();
    assert!(
        (0.35..=0.65).contains(&p),
        "opening exponent {p} (expected near 1/2)"
    );
    // and far wider than an order-N tangency would allow
    assert!(w3 > 10.0 * rb * 0.0005, "width {w3} vs delta {}", rb * 0.0005);
}

#[test]
fn delta_is_smooth_along_beta_sweeps() {
    // for fixed q > rbar the discriminant is analytic in beta: second
    // differences stay far below first differences on a fine sweep
    let params = academic();
    let (m, r0) = (3.0, 1.0 / 3.0);
    for q in [0.8, 2.3] {
        let n = 400;
        let h = 30.0 / n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|i| bar_delta(&params, m, r0, q, -10.0 + h * i as f64).unwrap())
            .collect();
        let max_d1 = vals
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0f64, f64::max);
        let max_d2 = vals
            .windows(3)
            .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
            .fold(0.0f64, f64::max);
        assert!(
            max_d2 < 0.5 * max_d1,
            "q={q}: second difference {max_d2} vs first {max_d1}"
        );
    }
}

#[test]
fn bar_slope_jumps_at_the_band_edges() {
    // negative test: f_j of the stand-in is not differentiable at the band
    // edges (for j = 1 the upper kink degenerates: the slope (m/2)(1 + 1/j)
    // equals m, so only the lower edge jumps there)
    let (m, r0) = (3.0, 1.0 / 3.0);
    let rb = r_bar(r0);
    for j in [1u32, 2, 3] {
        let inner = bar_f_j_slope(j, m, r0, -rb * (1.0 - 1e-9));
        let outer = bar_f_j_slope(j, m, r0, -rb * (1.0 + 1e-9));
        assert!(
            (inner - outer).abs() > 0.1,
            "j={j} lower edge: slopes {inner} vs {outer} should jump"
        );
    }
    for j in [2u32, 3] {
        let inner = bar_f_j_slope(j, m, r0, rb * (1.0 - 1e-9));
        let outer = bar_f_j_slope(j, m, r0, rb * (1.0 + 1e-9));
        assert!(
            (inner - outer).abs() > 0.1,
            "j={j} upper edge: slopes {inner} vs {outer} should jump"
        );
    }
    let upper_j1_inner = bar_f_j_slope(1, m, r0, rb * (1.0 - 1e-9));
    let upper_j1_outer = bar_f_j_slope(1, m, r0, rb * (1.0 + 1e-9));
    assert!((upper_j1_inner - upper_j1_outer).abs() < 1e-12);
}

#[test]
fn even_j_orbit_minimum_sits_at_half_period() {
    let params = BridgeParams::new(1.0, 1.0, 3.0, 2, 2).unwrap();
    let model = SlackeningModel::mmk(3.0, 1.0 / 3.0).unwrap();
    let kernel = ProjectionKernel::new(model, 2, 2, ProjectionEngine::ClosedForm, 1e-11).unwrap();
    let sys = KernelSystem::new(&params, &kernel);
    let traj = solve_flexural(&sys, 1.5, &SolveOptions::default()).unwrap();
    // the velocity root with u < 0 is the turning point of the symmetric well
    let min_sample = traj
        .samples
        .iter()
        .min_by(|a, b| a.u.partial_cmp(&b.u).unwrap())
        .unwrap();
    assert!(
        (min_sample.t - 0.5 * traj.period).abs() < 1e-3 * traj.period,
        "minimum at {} vs half period {}",
        min_sample.t,
        0.5 * traj.period
    );
}

#[test]
fn horizon_bound_is_an_error_not_a_truncation() {
    let params = academic();
    let model = SlackeningModel::mmk(3.0, 1.0 / 3.0).unwrap();
    let kernel = ProjectionKernel::new(model, 1, 1, ProjectionEngine::ClosedForm, 1e-11).unwrap();
    let sys = KernelSystem::new(&params, &kernel);
    let opts = SolveOptions {
        horizon_factor: 0.1,
        ..SolveOptions::default()
    };
    match detect_period(&sys, 5.0, &opts) {
        Err(fishbone::Error::Horizon { .. }) => {}
        other => panic!("expected a horizon error, got {other:?}"),
    }
}

#[test]
fn limit_frequencies_must_be_positive() {
    // strongly negative structural beta makes A-^2 < 0 for j = k = 1
    let params = BridgeParams::new(1.0, 0.0, 3.0, 1, 1).unwrap();
    // beta = 0 gives A-^2 = 0 exactly, also rejected
    let err = fishbone::limits::limit_quantities(&params, 3.0).unwrap_err();
    assert!(err.to_string().contains("positive"), "{err}");
}

#[test]
fn failed_cells_are_marked_not_zeroed() {
    // a sweep over negative amplitudes cannot solve any orbit; every cell
    // must come back failed with NaN delta
    let params = academic();
    let model = SlackeningModel::mmk(3.0, 1.0 / 3.0).unwrap();
    let spec = GridSpec {
        q: AxisSpec::new(-1.0, -0.5, 2).unwrap(),
        beta: AxisSpec::new(0.0, 1.0, 2).unwrap(),
    };
    let grid = sweep_grid(
        &params,
        &model,
        &spec,
        EngineKind::Numeric,
        &SweepOptions::default(),
    )
    .unwrap();
    assert_eq!(grid.meta.failed_cells, 4);
    for bi in 0..2 {
        for qi in 0..2 {
            assert_eq!(grid.class_at(bi, qi), CellClass::Failed);
            assert!(grid.delta_at(bi, qi).is_nan());
        }
    }
}

#[test]
fn closed_form_sweep_marks_no_failures_on_fig1_window() {
    let spec = GridSpec {
        q: AxisSpec::new(0.05, 6.0, 60).unwrap(),
        beta: AxisSpec::new(-20.0, 20.0, 60).unwrap(),
    };
    let grid = sweep_closed_form(&academic(), 3.0, 1.0 / 3.0, &spec, &SweepOptions::default())
        .unwrap();
    assert_eq!(grid.meta.failed_cells, 0);
    // both tones must actually appear on this window
    let mut saw_light = false;
    let mut saw_dark = false;
    for bi in 0..60 {
        for qi in 0..60 {
            if grid.class_at(bi, qi) == CellClass::Unstable {
                if grid.delta_at(bi, qi) > 2.0 {
                    saw_light = true;
                } else {
                    saw_dark = true;
                }
            }
        }
    }
    assert!(saw_light && saw_dark, "light {saw_light}, dark {saw_dark}");
}
