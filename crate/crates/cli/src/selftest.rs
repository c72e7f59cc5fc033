//! `supercrit selftest`: a fast, deterministic pass over the invariants the
//! rest of the toolchain leans on. Each check prints one line; any failure
//! makes the process exit nonzero. The whole suite runs in seconds — it is
//! a smoke gate, not the full test suite.

use std::ops::ControlFlow;

use supercrit_core::diagnostics::energy;
use supercrit_core::evolve::{evolve_streaming, linear_propagate, step_leapfrog};
use supercrit_core::exponents::p_window;
use supercrit_core::state::gaussian_data;
use supercrit_core::{cfl_dt, ModelParams, RadialGrid, RunOptions, Sign, SpectralBasis};

use crate::scenario::Scenario;

struct Check {
    name: &'static str,
    detail: String,
    pass: bool,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, detail, pass }
}

/// Run every check, print one line per check plus a closing summary, and
/// return the process exit code (0 when all pass).
pub fn run() -> i32 {
    let checks = vec![
        window_roots(),
        parseval_and_ground_mode(),
        energy_drift_and_determinism(),
        leapfrog_reversal(),
        linear_propagator_unitarity(),
        scenario_round_trip(),
    ];
    let mut failed = 0usize;
    for c in &checks {
        let verdict = if c.pass { "ok" } else { "FAIL" };
        println!("selftest: {:<28} {verdict:<4} {}", c.name, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("selftest: all {} checks passed", checks.len());
        0
    } else {
        println!("selftest: {failed} of {} checks FAILED", checks.len());
        1
    }
}

/// The high edge of the power window in dimensions 7..=12 must be a root of
/// its defining quadratic `(d+1)p^2 - d(d-1)p + 4(d+1)` to near machine
/// accuracy (residual scaled by the quadratic's largest coefficient).
fn window_roots() -> Check {
    let mut worst = 0.0f64;
    for d in 7..=12 {
        match p_window(d) {
            Ok((_, hi)) => {
                let df = d as f64;
                let poly = (df + 1.0) * hi * hi - df * (df - 1.0) * hi + 4.0 * (df + 1.0);
                let scale = df * (df - 1.0);
                worst = worst.max(poly.abs() / scale);
            }
            Err(e) => return check("window-roots", false, format!("d = {d}: {e}")),
        }
    }
    check(
        "window-roots",
        worst < 1e-10,
        format!("max scaled |poly(p_hi)| = {worst:.3e} over d = 7..12"),
    )
}

/// Transform round-trip (Parseval) on a deterministic field, and the ground
/// eigenvalue against the flat-space value it converges to.
fn parseval_and_ground_mode() -> Check {
    let grid = match RadialGrid::new(8.0, 256, 3) {
        Ok(g) => g,
        Err(e) => return check("spectral-basis", false, e.to_string()),
    };
    let basis = match SpectralBasis::new(&grid) {
        Ok(b) => b,
        Err(e) => return check("spectral-basis", false, e.to_string()),
    };
    let f: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| (-0.5 * r * r).exp() * (1.0 + 0.3 * (2.0 * r).sin()))
        .collect();
    let coeffs = basis.analyze(&f);
    let back = basis.synthesize(&coeffs);
    let mut err2 = 0.0;
    let mut norm2 = 0.0;
    for ((&a, &b), &w) in f.iter().zip(&back).zip(grid.weights()) {
        err2 += w * (a - b) * (a - b);
        norm2 += w * a * a;
    }
    let round_trip = (err2 / norm2).sqrt();
    let mu0 = basis.eigenvalues()[0];
    let flat = (std::f64::consts::PI / grid.r_max()).powi(2);
    let mu_rel = (mu0 - flat).abs() / flat;
    check(
        "spectral-basis",
        round_trip < 1e-10 && mu_rel < 1e-2,
        format!("round-trip {round_trip:.3e}, ground-mode offset {mu_rel:.3e}"),
    )
}

/// A short nonlinear run must conserve energy at the step-size-squared
/// level, and running it twice must produce bit-identical row strings.
fn energy_drift_and_determinism() -> Check {
    fn mini_run() -> Result<(f64, String), supercrit_core::Error> {
        let grid = RadialGrid::new(12.0, 192, 3)?;
        let params = ModelParams::new(3, 6.0, Sign::Defocusing)?;
        let state0 = gaussian_data(&grid, 1.0, 1.0);
        let dt = cfl_dt(&grid, 0.25, None)?;
        let mut drift = 0.0f64;
        let mut e0 = None;
        let mut rows = String::new();
        evolve_streaming(
            &state0,
            &params,
            &grid,
            1.0,
            dt,
            8,
            &RunOptions::default(),
            |s, _| {
                let e = energy(s, &grid, &params).total;
                let base = *e0.get_or_insert(e);
                drift = drift.max((e - base).abs() / base.abs());
                rows.push_str(&format!("{},{e}\n", s.t));
                ControlFlow::Continue(())
            },
        )?;
        Ok((drift, rows))
    }
    let (d1, r1) = match mini_run() {
        Ok(x) => x,
        Err(e) => return check("energy-and-determinism", false, e.to_string()),
    };
    let (_, r2) = match mini_run() {
        Ok(x) => x,
        Err(e) => return check("energy-and-determinism", false, e.to_string()),
    };
    check(
        "energy-and-determinism",
        d1 < 1e-3 && r1 == r2,
        format!("drift {d1:.3e}, identical reruns: {}", r1 == r2),
    )
}

/// Leapfrog is time-reversible: stepping forward then backward recovers the
/// data to roundoff.
fn leapfrog_reversal() -> Check {
    let grid = match RadialGrid::new(10.0, 128, 5) {
        Ok(g) => g,
        Err(e) => return check("leapfrog-reversal", false, e.to_string()),
    };
    let params = match ModelParams::new(5, 2.0, Sign::Defocusing) {
        Ok(p) => p,
        Err(e) => return check("leapfrog-reversal", false, e.to_string()),
    };
    let state0 = gaussian_data(&grid, 0.5, 1.5);
    let dt = match cfl_dt(&grid, 0.4, None) {
        Ok(dt) => dt,
        Err(e) => return check("leapfrog-reversal", false, e.to_string()),
    };
    let mut cur = state0.clone();
    for _ in 0..50 {
        cur = match step_leapfrog(&cur, &params, &grid, dt) {
            Ok(s) => s,
            Err(_) => return check("leapfrog-reversal", false, "unexpected halt".into()),
        };
    }
    for _ in 0..50 {
        cur = match step_leapfrog(&cur, &params, &grid, -dt) {
            Ok(s) => s,
            Err(_) => return check("leapfrog-reversal", false, "unexpected halt".into()),
        };
    }
    let diff = cur.difference(&state0).max_abs_pair();
    let scale = state0.max_abs_pair();
    check(
        "leapfrog-reversal",
        diff < 1e-10 * scale,
        format!("|forward∘backward - id| = {diff:.3e}"),
    )
}

/// The exact linear propagator conserves every quadratic invariant; check
/// the critical pair norm after a long flight, plus group composition
/// `Lin(t) ∘ Lin(-t) = id`.
fn linear_propagator_unitarity() -> Check {
    let grid = match RadialGrid::new(9.0, 160, 7) {
        Ok(g) => g,
        Err(e) => return check("linear-propagator", false, e.to_string()),
    };
    let basis = match SpectralBasis::new(&grid) {
        Ok(b) => b,
        Err(e) => return check("linear-propagator", false, e.to_string()),
    };
    let params = match ModelParams::new(7, 0.9, Sign::Defocusing) {
        Ok(p) => p,
        Err(e) => return check("linear-propagator", false, e.to_string()),
    };
    let s_c = params.critical_regularity();
    let state0 = gaussian_data(&grid, 1.0, 1.2);
    let n0 = basis.pair_norm(&state0, s_c);
    let flown = linear_propagate(&basis, &state0, 7.3);
    let n1 = basis.pair_norm(&flown, s_c);
    let back = linear_propagate(&basis, &flown, -7.3);
    let comp = back.difference(&state0).max_abs_pair() / state0.max_abs_pair();
    let norm_rel = (n1 - n0).abs() / n0;
    check(
        "linear-propagator",
        norm_rel < 1e-10 && comp < 1e-10,
        format!("norm drift {norm_rel:.3e}, composition defect {comp:.3e}"),
    )
}

/// Scenario emission feeds back through the parser to an equal value.
fn scenario_round_trip() -> Check {
    let text = "[model]\nd = 7\np = 0.9\nsign = \"focusing\"\n\
                [grid]\nn = 96\nr_max = 6.5\n\
                [data]\nfamily = \"bump\"\namplitude = 0.25\nwidth = 1.5\n\
                [run]\nt_end = 2.0\ncfl_factor = 0.4\n";
    let parsed = match Scenario::parse(text) {
        Ok((s, _)) => s,
        Err(e) => return check("scenario-round-trip", false, e.to_string()),
    };
    let again = match Scenario::parse(&parsed.to_config_string()) {
        Ok((s, _)) => s,
        Err(e) => return check("scenario-round-trip", false, e.to_string()),
    };
    check(
        "scenario-round-trip",
        parsed == again,
        "parse ∘ emit = id".to_string(),
    )
}
