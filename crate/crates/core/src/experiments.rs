//! The four laboratory protocols built from the lower layers: scattering
//! detection by linear-flow pullback, perturbative stability with optional
//! forcing, the focusing/defocusing blowup contrast, and the dispersal probe
//! that packages the concentration and monotonicity observables.

use serde::Serialize;

use crate::diagnostics::{
    frequency_scale_proxy, morawetz_lhs, morawetz_report, scattering_size, support_radius,
    MorawetzReport,
};
use crate::error::{Error, Result};
use crate::evolve::{
    evolve_with, linear_propagate, near_wall, step_split, step_with, RunOptions, Trajectory,
};
use crate::exponents::{xy_exponents, ModelParams, Sign};
use crate::spectral::SpectralBasis;
use crate::state::{gaussian_data, FieldState};

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

/// Pick a record stride that yields on the order of `target` snapshots.
fn stride_for(steps: usize, target: usize) -> usize {
    (steps / target).max(1)
}

// ---------------------------------------------------------------------------
// Scattering detection
// ---------------------------------------------------------------------------

/// Outcome of the linear-pullback scattering probe.
#[derive(Debug, Clone, Serialize)]
pub struct ScatterReport {
    /// Checkpoint times actually reached (the requested list snapped to the
    /// step lattice).
    pub times: Vec<f64>,
    /// `delta_i = ‖ w(T_{i+1}) - w(T_i) ‖` in the critical pair norm, where
    /// `w(T) = Lin(-T) u(T)` is the pullback of the solution by the exact
    /// linear flow. One entry per consecutive checkpoint pair.
    pub deltas: Vec<f64>,
    /// Critical pair norm of the initial data.
    pub data_norm: f64,
    /// `deltas.last() / data_norm` — the convergence tail relative to the
    /// data size.
    pub final_tail_ratio: f64,
    /// Whether the nonlinearity was active.
    pub nonlinear: bool,
}

/// Detect scattering by watching the linear-flow pullback
/// `w(T) = Lin(-T) u(T)` settle as `T` grows through `t_list`.
///
/// For a scattering solution `w(T)` converges to the data of the comparison
/// free wave, so consecutive gaps `delta_i` shrink; their decay rate
/// measures how fast the nonlinearity switches itself off. The evolution
/// uses Strang splitting with the *exact* spectral rotation, so the linear
/// part of the flow contributes nothing to the gaps — with the nonlinearity
/// disabled the pullback is constant to roundoff, and the reported deltas
/// are pure nonlinear Duhamel contributions rather than integrator
/// dispersion.
///
/// Requires defocusing sign, nonzero data, checkpoints that fit in the box
/// (initial support plus horizon below `R_max`), and aborts if the wave
/// reaches the wall anyway.
pub fn scattering_detect(
    params: &ModelParams,
    state0: &FieldState,
    basis: &SpectralBasis,
    t_list: &[f64],
    dt: f64,
    include_nonlinearity: bool,
) -> Result<ScatterReport> {
    if params.sign != Sign::Defocusing {
        return Err(Error::WrongSign {
            expected: "defocusing",
        });
    }
    if state0.is_zero() {
        return Err(Error::ZeroState("scattering probe needs nonzero data"));
    }
    let grid = basis.grid();
    if t_list.is_empty() || !dt.is_finite() || dt <= 0.0 {
        return Err(Error::EmptyInterval(format!(
            "checkpoint list of length {}, dt = {dt}",
            t_list.len()
        )));
    }
    let mut steps_list = Vec::with_capacity(t_list.len());
    let mut prev = 0usize;
    for &t in t_list {
        let k = (t / dt).round() as usize;
        if k <= prev && !steps_list.is_empty() {
            return Err(Error::EmptyInterval(format!(
                "checkpoint {t} does not advance past the previous one at step size {dt}"
            )));
        }
        if k == 0 {
            return Err(Error::EmptyInterval(format!(
                "checkpoint {t} rounds to zero steps"
            )));
        }
        steps_list.push(k);
        prev = k;
    }
    let t_max = *steps_list.last().unwrap() as f64 * dt;
    let support = support_radius(state0, grid, 1e-3);
    if support + t_max > grid.r_max() {
        return Err(Error::HorizonTooLong {
            t: t_max,
            r_max: grid.r_max(),
            support,
        });
    }
    let s_c = params.critical_regularity();
    let data_norm = basis.pair_norm(state0, s_c);
    let opts = RunOptions {
        nonlinearity: include_nonlinearity,
        ..RunOptions::default()
    };
    let cut = 1e-8 * state0.max_abs_pair();
    let t0 = state0.t;
    let mut cur = state0.clone();
    let mut step = 0usize;
    let mut times = Vec::with_capacity(t_list.len());
    let mut pullbacks: Vec<FieldState> = Vec::with_capacity(t_list.len());
    for &target in &steps_list {
        while step < target {
            match step_split(&cur, params, basis, dt, &opts) {
                Ok(next) => {
                    cur = next;
                    step += 1;
                    cur.t = t0 + step as f64 * dt;
                    if near_wall(&cur, grid, cut) {
                        return Err(Error::BoundaryTouched);
                    }
                }
                Err(halt) => return Err(Error::Halted { t: halt.t }),
            }
        }
        let elapsed = cur.t - t0;
        times.push(elapsed);
        pullbacks.push(linear_propagate(basis, &cur, -elapsed));
    }
    let deltas: Vec<f64> = pullbacks
        .windows(2)
        .map(|w| basis.pair_norm(&w[1].difference(&w[0]), s_c))
        .collect();
    let final_tail_ratio = deltas.last().map_or(0.0, |&d| d / data_norm);
    Ok(ScatterReport {
        times,
        deltas,
        data_norm,
        final_tail_ratio,
        nonlinear: include_nonlinearity,
    })
}

// ---------------------------------------------------------------------------
// Stability under perturbation and forcing
// ---------------------------------------------------------------------------

/// Outcome of the perturbative stability sweep.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// The perturbation sizes actually probed.
    pub eps: Vec<f64>,
    /// `D(eps)` — the space-time scattering size of the difference between
    /// the perturbed and the reference run over `[0, T]`; `None` marks runs
    /// the overflow monitor halted (the comparison is then meaningless).
    pub d_eps: Vec<Option<f64>>,
    /// Log-log slope of `D(eps)` over the valid entries (`None` when fewer
    /// than two survive). Near 1 in the linear-response regime.
    pub slope: Option<f64>,
    /// `sup_t` critical pair norm of the reference run — the size hypothesis
    /// a perturbation theorem would assume.
    pub sobolev_bound: f64,
    /// Space-time scattering size of the reference run over `[0, T]` — the
    /// smallness hypothesis on the reference.
    pub scattering_norm: f64,
    /// Whether a forcing profile was active.
    pub forced: bool,
}

/// Probe stability of a reference solution: perturb the initial data by a
/// fixed unit-norm bump scaled to `eps` (and, optionally, force the equation
/// with a constant-in-time profile whose dual-norm size is `eps`), then
/// report how the space-time size of the difference responds.
///
/// The forcing profile is normalized in the dual bootstrap norm
/// `L^{q_Y}_t L^{r_Y}_x` at derivative order `deriv_order` — for a
/// constant-in-time profile that norm is `T^{1/q_Y} ‖ |∇|^δ e ‖_{L^{r_Y}}` —
/// so `eps` measures exactly the source strength a perturbation theorem
/// would measure. Perturbation sizes must lie in `(0, 1/2]`.
pub fn stability_experiment(
    params: &ModelParams,
    base_state: &FieldState,
    basis: &SpectralBasis,
    eps_ladder: &[f64],
    e_profile: Option<&[f64]>,
    t_end: f64,
    dt: f64,
) -> Result<StabilityReport> {
    let grid = basis.grid();
    if eps_ladder.is_empty() {
        return Err(Error::EmptyInterval("empty perturbation ladder".into()));
    }
    for &eps in eps_ladder {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::EmptyInterval(format!(
                "perturbation size {eps} outside (0, 1/2]"
            )));
        }
    }
    let s_c = params.critical_regularity();
    let stride = stride_for((t_end / dt).round() as usize, 256);
    let reference = evolve_with(
        base_state,
        params,
        grid,
        t_end,
        dt,
        stride,
        &RunOptions::default(),
    )?;
    if reference.flags.overflow_halt {
        return Err(Error::Halted {
            t: reference.halt_time.unwrap_or(t_end),
        });
    }
    let sobolev_bound = reference
        .snapshots
        .iter()
        .map(|s| basis.pair_norm(s, s_c))
        .fold(0.0f64, f64::max);
    let scattering_norm = scattering_size(&reference, reference.first().t, reference.last().t)?;

    // Unit-critical-norm perturbation profile.
    let bump = gaussian_data(grid, 1.0, 1.0);
    let bump_norm = basis.sobolev_norm(&bump.u, s_c);

    // Forcing profile normalized in the dual space-time norm.
    let forcing_unit: Option<Vec<f64>> = match e_profile {
        None => None,
        Some(profile) => {
            if profile.len() != grid.n() {
                return Err(Error::LengthMismatch {
                    expected: grid.n(),
                    got: profile.len(),
                });
            }
            let xy = xy_exponents(params.d, params.p)?;
            let ce = basis.analyze(profile);
            let frac: Vec<f64> = basis
                .eigenvalues()
                .iter()
                .zip(&ce)
                .map(|(&mu, &c)| mu.powf(0.5 * xy.deriv_order) * c)
                .collect();
            let deriv_e = basis.synthesize(&frac);
            let space = grid.lp_norm(&deriv_e, xy.space_exp_y);
            let dual_norm = t_end.powf(1.0 / xy.time_exp_y) * space;
            if dual_norm <= 0.0 {
                return Err(Error::ZeroState("forcing profile has zero dual norm"));
            }
            Some(profile.iter().map(|&x| x / dual_norm).collect())
        }
    };

    let mut d_eps = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let mut pert = base_state.clone();
        let scale = eps / bump_norm;
        for (u, &b) in pert.u.iter_mut().zip(&bump.u) {
            *u += scale * b;
        }
        let opts = RunOptions {
            forcing: forcing_unit
                .as_ref()
                .map(|e| e.iter().map(|&x| eps * x).collect()),
            ..RunOptions::default()
        };
        let run = evolve_with(&pert, params, grid, t_end, dt, stride, &opts)?;
        if run.flags.overflow_halt || run.snapshots.len() != reference.snapshots.len() {
            d_eps.push(None);
            continue;
        }
        let diff = Trajectory {
            params: *params,
            grid: grid.clone(),
            dt,
            record_stride: stride,
            nonlinear: true,
            snapshots: run
                .snapshots
                .iter()
                .zip(&reference.snapshots)
                .map(|(a, b)| a.difference(b))
                .collect(),
            flags: Default::default(),
            halt_time: None,
        };
        d_eps.push(Some(scattering_size(
            &diff,
            diff.first().t,
            diff.last().t,
        )?));
    }
    let valid: (Vec<f64>, Vec<f64>) = eps_ladder
        .iter()
        .zip(&d_eps)
        .filter_map(|(&e, d)| d.map(|dv| (e, dv)))
        .unzip();
    let slope = loglog_slope(&valid.0, &valid.1);
    Ok(StabilityReport {
        eps: eps_ladder.to_vec(),
        d_eps,
        slope,
        sobolev_bound,
        scattering_norm,
        forced: e_profile.is_some(),
    })
}

// ---------------------------------------------------------------------------
// Blowup contrast
// ---------------------------------------------------------------------------

/// Outcome of a focusing run driven toward blowup.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupContrast {
    /// When the overflow monitor fired (`None`: survived to `t_max`).
    pub t_halt: Option<f64>,
    /// Snapshot times.
    pub times: Vec<f64>,
    /// Critical pair norm at each snapshot.
    pub crit_norms: Vec<f64>,
    /// `max_t crit_norm / crit_norm(0)`.
    pub growth_factor: f64,
}

/// Drive a focusing run to the overflow threshold and record how the
/// critical norm grows on the way — the numerical face of the dichotomy
/// between dispersing and concentrating behavior. Rejects defocusing
/// parameters (use the same data with flipped sign as the surviving twin).
///
/// Steps manually rather than through the trajectory driver so the norm
/// history includes the last completed step before the monitor fired — the
/// run's entire purpose is the growth *up to* the halt, which stride-aligned
/// recording would throw away.
pub fn blowup_contrast(
    params: &ModelParams,
    state0: &FieldState,
    basis: &SpectralBasis,
    dt: f64,
    t_max: f64,
    blowup_threshold: f64,
) -> Result<BlowupContrast> {
    if params.sign != Sign::Focusing {
        return Err(Error::WrongSign {
            expected: "focusing",
        });
    }
    if state0.is_zero() {
        return Err(Error::ZeroState("blowup probe needs nonzero data"));
    }
    let grid = basis.grid();
    let steps = ((t_max / dt).round() as usize).max(1);
    let stride = stride_for(steps, 512);
    let opts = RunOptions {
        blowup_threshold,
        ..RunOptions::default()
    };
    let s_c = params.critical_regularity();
    let t0 = state0.t;
    let mut cur = state0.clone();
    let mut times = vec![t0];
    let mut crit_norms = vec![basis.pair_norm(&cur, s_c)];
    let mut recorded_step = 0usize;
    let mut t_halt = None;
    for k in 1..=steps {
        match step_with(&cur, params, grid, dt, &opts) {
            Ok(next) => {
                cur = next;
                cur.t = t0 + k as f64 * dt;
                if k % stride == 0 || k == steps {
                    times.push(cur.t);
                    crit_norms.push(basis.pair_norm(&cur, s_c));
                    recorded_step = k;
                }
            }
            Err(halt) => {
                if recorded_step != k - 1 {
                    times.push(cur.t);
                    crit_norms.push(basis.pair_norm(&cur, s_c));
                }
                t_halt = Some(halt.t);
                break;
            }
        }
    }
    let base = crit_norms[0];
    let peak = crit_norms.iter().fold(0.0f64, |m, &x| m.max(x));
    Ok(BlowupContrast {
        t_halt,
        times,
        crit_norms,
        growth_factor: peak / base,
    })
}

// ---------------------------------------------------------------------------
// Dispersal probe
// ---------------------------------------------------------------------------

/// Outcome of the dispersal probe: concentration observables along a
/// defocusing run plus the measured interior monotonicity estimate.
#[derive(Debug, Clone, Serialize)]
pub struct DispersalReport {
    pub times: Vec<f64>,
    /// Frequency-scale proxy `N(t)` (zero where the state vanishes).
    pub n_series: Vec<f64>,
    /// `ω Σ_{r <= c/N(t)} w N(t) |u|^{p+2}` per snapshot — the near-origin
    /// potential concentration integrand.
    pub near_origin_potential: Vec<f64>,
    /// Both sides of the interior estimate over the full horizon.
    pub morawetz: MorawetzReport,
    /// The same left-hand side over the half horizon (time and radius both
    /// halved) — dispersing solutions gain little from doubling the horizon.
    pub lhs_half_horizon: f64,
    pub lhs_full_horizon: f64,
    /// The scaling exponent `d - 2 - 4/p` of the right-hand side.
    pub exponent: f64,
    /// The concentration constant used for the near-origin window.
    pub concentration_c: f64,
}

/// Run a defocusing evolution and package the dispersal diagnostics: the
/// frequency-scale history, the near-origin potential series, and the
/// interior monotonicity estimate at full and half horizon.
pub fn dispersal_probe(
    params: &ModelParams,
    state0: &FieldState,
    basis: &SpectralBasis,
    t_end: f64,
    dt: f64,
    concentration_c: f64,
) -> Result<DispersalReport> {
    if params.sign != Sign::Defocusing {
        return Err(Error::WrongSign {
            expected: "defocusing",
        });
    }
    if !concentration_c.is_finite() || concentration_c <= 0.0 {
        return Err(Error::EmptyInterval(format!(
            "concentration constant {concentration_c}"
        )));
    }
    let grid = basis.grid();
    let stride = stride_for((t_end / dt).round() as usize, 256);
    let traj = evolve_with(state0, params, grid, t_end, dt, stride, &RunOptions::default())?;
    if traj.flags.overflow_halt {
        return Err(Error::Halted {
            t: traj.halt_time.unwrap_or(t_end),
        });
    }
    let report = morawetz_report(&traj, basis)?;
    let lhs_half_horizon = morawetz_lhs(&traj, 0.5 * traj.duration())?;
    let omega = grid.sphere_area();
    let pexp = params.p + 2.0;
    let mut n_series = Vec::with_capacity(traj.snapshots.len());
    let mut near_origin = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let n_t = match frequency_scale_proxy(basis, snap, params) {
            Ok(v) => v,
            Err(Error::ZeroState(_)) => 0.0,
            Err(e) => return Err(e),
        };
        n_series.push(n_t);
        if n_t > 0.0 {
            let r_cut = concentration_c / n_t;
            let mut slab = 0.0;
            for (j, &r) in grid.nodes().iter().enumerate() {
                if r > r_cut {
                    break;
                }
                slab += grid.weights()[j] * snap.u[j].abs().powf(pexp);
            }
            near_origin.push(omega * n_t * slab);
        } else {
            near_origin.push(0.0);
        }
    }
    Ok(DispersalReport {
        times: traj.snapshots.iter().map(|s| s.t).collect(),
        n_series,
        near_origin_potential: near_origin,
        morawetz: report,
        lhs_half_horizon,
        lhs_full_horizon: report.lhs,
        exponent: params.d as f64 - 2.0 - 4.0 / params.p,
        concentration_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    fn setup(r_max: f64, n: usize, d: usize) -> (RadialGrid, SpectralBasis) {
        let g = RadialGrid::new(r_max, n, d).unwrap();
        let b = SpectralBasis::new(&g).unwrap();
        (g, b)
    }

    fn defoc() -> ModelParams {
        ModelParams::new(3, 6.0, Sign::Defocusing).unwrap()
    }

    #[test]
    fn scattering_deltas_decrease_and_linear_mode_is_flat() {
        // Amplitude matters here: the pullback gaps scale like A^{p+1}, so
        // they must sit far above the splitting's roundoff floor for the
        // decay to be measurable. A = 0.3 gives gaps ~1e-4 against a floor
        // ~1e-14 while staying firmly in the small-data regime.
        let (g, b) = setup(12.0, 192, 3);
        let p = defoc();
        let s0 = gaussian_data(&g, 0.3, 1.0);
        let dt = g.h() / 4.0;
        let t_list = [1.0, 2.0, 4.0];
        let rep = scattering_detect(&p, &s0, &b, &t_list, dt, true).unwrap();
        assert_eq!(rep.times.len(), 3);
        assert_eq!(rep.deltas.len(), 2);
        assert!(
            rep.deltas[1] < rep.deltas[0],
            "pullback gaps must shrink: {:?}",
            rep.deltas
        );
        // Well above the roundoff floor: this is a real nonlinear signal.
        assert!(rep.deltas[0] > 1e-8 * rep.data_norm);
        assert!(rep.final_tail_ratio < 1e-3, "tail {:.3e}", rep.final_tail_ratio);
        // Nonlinearity off: the pullback is constant to roundoff.
        let lin = scattering_detect(&p, &s0, &b, &t_list, dt, false).unwrap();
        for &d in &lin.deltas {
            assert!(d < 1e-10 * lin.data_norm, "linear delta {d:.3e}");
        }
    }

    #[test]
    fn scattering_guards() {
        let (g, b) = setup(12.0, 96, 3);
        let p = defoc();
        let s0 = gaussian_data(&g, 0.005, 1.0);
        let focusing = ModelParams::new(3, 6.0, Sign::Focusing).unwrap();
        assert!(matches!(
            scattering_detect(&focusing, &s0, &b, &[1.0], 0.01, true),
            Err(Error::WrongSign { .. })
        ));
        assert!(matches!(
            scattering_detect(&p, &FieldState::zero(g.n()), &b, &[1.0], 0.01, true),
            Err(Error::ZeroState(_))
        ));
        // Horizon outruns the box.
        assert!(matches!(
            scattering_detect(&p, &s0, &b, &[20.0], 0.01, true),
            Err(Error::HorizonTooLong { .. })
        ));
        // Empty checkpoint list.
        assert!(scattering_detect(&p, &s0, &b, &[], 0.01, true).is_err());
    }

    #[test]
    fn scattering_aborts_on_wall_contact() {
        // A wide Gaussian whose 1e-8-level tail already reaches the wall:
        // the support precheck (at the 1e-3 level) passes, but the per-step
        // monitor sees the wall immediately.
        let (g, b) = setup(4.5, 72, 3);
        let p = defoc();
        let s0 = gaussian_data(&g, 0.005, 1.0);
        assert!(matches!(
            scattering_detect(&p, &s0, &b, &[0.2], g.h() / 4.0, true),
            Err(Error::BoundaryTouched)
        ));
    }

    #[test]
    fn stability_slope_near_linear_response() {
        let (g, b) = setup(8.0, 128, 3);
        let p = defoc();
        let base = gaussian_data(&g, 0.25, 1.0);
        let dt = g.h() / 4.0;
        let ladder = [1e-2, 3e-2, 1e-1];
        let rep =
            stability_experiment(&p, &base, &b, &ladder, None, 1.0, dt).unwrap();
        assert_eq!(rep.d_eps.len(), 3);
        let d: Vec<f64> = rep.d_eps.iter().map(|x| x.unwrap()).collect();
        assert!(d[0] < d[1] && d[1] < d[2], "monotone response: {d:?}");
        let slope = rep.slope.unwrap();
        assert!(
            (0.85..1.15).contains(&slope),
            "linear-regime slope, got {slope}"
        );
        assert!(rep.sobolev_bound > 0.0);
        assert!(rep.scattering_norm > 0.0);
        assert!(!rep.forced);
    }

    #[test]
    fn stability_with_forcing_responds_linearly_too() {
        let (g, b) = setup(8.0, 96, 3);
        let p = defoc();
        let base = gaussian_data(&g, 0.2, 1.0);
        let dt = g.h() / 4.0;
        let profile: Vec<f64> = g.nodes().iter().map(|&r| (-r * r).exp()).collect();
        let rep = stability_experiment(
            &p,
            &base,
            &b,
            &[1e-2, 1e-1],
            Some(&profile),
            0.5,
            dt,
        )
        .unwrap();
        assert!(rep.forced);
        let d: Vec<f64> = rep.d_eps.iter().map(|x| x.unwrap()).collect();
        assert!(d[0] < d[1]);
        let slope = rep.slope.unwrap();
        assert!((0.8..1.2).contains(&slope), "forced slope {slope}");
    }

    #[test]
    fn stability_rejects_bad_ladder() {
        let (g, b) = setup(6.0, 64, 3);
        let p = defoc();
        let base = gaussian_data(&g, 0.2, 1.0);
        assert!(stability_experiment(&p, &base, &b, &[], None, 1.0, 0.01).is_err());
        assert!(stability_experiment(&p, &base, &b, &[0.7], None, 1.0, 0.01).is_err());
        assert!(stability_experiment(&p, &base, &b, &[0.0], None, 1.0, 0.01).is_err());
    }

    #[test]
    fn blowup_contrast_halts_focusing_and_rejects_defocusing() {
        let (g, b) = setup(5.0, 96, 3);
        let focusing = ModelParams::new(3, 6.0, Sign::Focusing).unwrap();
        let s0 = gaussian_data(&g, 10.0, 1.0);
        let dt = g.h() / 8.0;
        let rep = blowup_contrast(&focusing, &s0, &b, dt, 10.0, 1e6).unwrap();
        let t_halt = rep.t_halt.expect("focusing amp-10 data must halt");
        assert!(t_halt < 1.0, "halt at {t_halt}");
        assert!(
            rep.growth_factor > 10.0,
            "critical norm growth {}",
            rep.growth_factor
        );
        assert_eq!(rep.times.len(), rep.crit_norms.len());
        assert!(matches!(
            blowup_contrast(&defoc(), &s0, &b, dt, 10.0, 1e6),
            Err(Error::WrongSign { .. })
        ));
    }

    #[test]
    fn dispersal_probe_packages_consistent_series() {
        let (g, b) = setup(10.0, 160, 3);
        let p = defoc();
        let s0 = gaussian_data(&g, 0.5, 0.7);
        let dt = g.h() / 4.0;
        let rep = dispersal_probe(&p, &s0, &b, 3.0, dt, 1.0).unwrap();
        assert_eq!(rep.times.len(), rep.n_series.len());
        assert_eq!(rep.times.len(), rep.near_origin_potential.len());
        assert!(rep.n_series.iter().all(|&n| n > 0.0));
        assert!(rep.near_origin_potential.iter().all(|&v| v >= 0.0));
        assert!(rep.lhs_full_horizon >= rep.lhs_half_horizon);
        assert!(rep.morawetz.ratio > 0.0);
        // d = 3, p = 6: the scaling exponent is exactly 1/3 in double
        // precision up to one rounding step.
        assert!((rep.exponent - 1.0 / 3.0).abs() < 1e-15);
        // Focusing sign rejected.
        let focusing = ModelParams::new(3, 6.0, Sign::Focusing).unwrap();
        assert!(dispersal_probe(&focusing, &s0, &b, 3.0, dt, 1.0).is_err());
    }
}
