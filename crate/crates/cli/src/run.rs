//! Run orchestration: build the discrete laboratory a scenario describes,
//! execute one protocol, and persist the artifacts.
//!
//! Layout under the output root: `<out>/<scenario file stem>/` holding
//! `series.csv` (the fixed 12-column diagnostics series, written only by
//! `simulate`), `report.json` (the protocol's result), and `manifest.json`
//! (scenario echo, version, wall time, monitor flags, file list, and the
//! SHA-256 of the series). The series streams row by row — memory use is
//! independent of run length — and everything downstream of the scenario is
//! deterministic, so identical scenarios produce byte-identical CSVs.

use std::fs;
use std::io::Write as _;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use supercrit_core::diagnostics::{compute_record, DiagnosticsRecord, MorawetzWeight};
use supercrit_core::exponents::TimeExponent;
use supercrit_core::experiments::{
    blowup_contrast, dispersal_probe, scattering_detect, stability_experiment, BlowupContrast,
    DispersalReport, ScatterReport, StabilityReport,
};
use supercrit_core::state::{bump_data, gaussian_data, mode_data};
use supercrit_core::{
    evolve_streaming, stiff_dt, FieldState, ModelParams, RadialGrid, RunOptions, SpectralBasis,
};

use crate::error::{Error, Result};
use crate::scenario::{DataFamily, Scenario};

/// Perturbation sizes probed by the `stability` subcommand: three decades
/// ending at the largest size the protocol accepts as "small".
pub const STABILITY_LADDER: [f64; 3] = [1e-3, 1e-2, 1e-1];

// ---------------------------------------------------------------------------
// Output locations
// ---------------------------------------------------------------------------

/// Resolve the output root: `--out` wins, then the `SUPERCRIT_OUT`
/// environment variable, then `./out`.
pub fn out_root(cli_out: Option<&Path>) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    match std::env::var("SUPERCRIT_OUT") {
        Ok(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("out"),
    }
}

/// `<root>/<scenario file stem>/`.
pub fn run_dir(root: &Path, scenario_path: &Path) -> PathBuf {
    let stem = scenario_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    root.join(stem)
}

// ---------------------------------------------------------------------------
// Laboratory assembly
// ---------------------------------------------------------------------------

/// Everything a protocol needs, assembled once from a validated scenario.
pub struct Lab {
    pub params: ModelParams,
    pub grid: RadialGrid,
    pub basis: SpectralBasis,
    pub state0: FieldState,
    /// Amplitude-aware stable step for this scenario's data.
    pub dt: f64,
    pub weight: MorawetzWeight,
    /// Absolute amplitude cut for support radii, anchored to the initial
    /// state (1e-3 of its max amplitude) so the reported support is
    /// comparable across the whole series.
    pub support_cut: f64,
}

impl Lab {
    pub fn build(sc: &Scenario) -> Result<Lab> {
        let params = sc.params()?;
        let grid = RadialGrid::new(sc.grid.r_max, sc.grid.n, sc.model.d)?;
        let basis = SpectralBasis::new(&grid)?;
        let state0 = match sc.data.family {
            DataFamily::Gaussian => gaussian_data(&grid, sc.data.amplitude, sc.data.width),
            DataFamily::Bump => bump_data(&grid, sc.data.amplitude, sc.data.width),
            DataFamily::Mode => mode_data(&basis, sc.data.amplitude, sc.data.mode_index)?,
        };
        let dt = stiff_dt(&grid, sc.run.cfl_factor, Some(&basis), &params, &state0)?;
        let r_trunc = if sc.diagnostics.morawetz_r > 0.0 {
            sc.diagnostics.morawetz_r
        } else {
            sc.grid.r_max / 4.0
        };
        let weight = MorawetzWeight::new(r_trunc, sc.model.d)?;
        let support_cut = 1e-3 * state0.max_abs_pair();
        Ok(Lab {
            params,
            grid,
            basis,
            state0,
            dt,
            weight,
            support_cut,
        })
    }

    fn run_options(&self, sc: &Scenario) -> RunOptions {
        RunOptions {
            blowup_threshold: sc.run.blowup_threshold,
            support_cut: Some(self.support_cut),
            ..RunOptions::default()
        }
    }
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// Monitor flags surfaced in the manifest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ManifestFlags {
    pub boundary_touched: bool,
    pub overflow_halt: bool,
}

/// The run's closing record: what was asked, what version ran, what came
/// out, and how to verify the series.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub scenario_path: String,
    /// Full echo of the scenario with defaults filled in.
    pub scenario: Scenario,
    pub warnings: Vec<String>,
    pub flags: ManifestFlags,
    pub wall_time_s: f64,
    /// Files written by this run, relative to the run directory.
    pub outputs: Vec<String>,
    /// SHA-256 of `series.csv`, when one was written.
    pub series_sha256: Option<String>,
}

/// What `main` needs to finish up: where the artifacts went and the exit
/// code the flags dictate (0 clean, 3 when a monitor fired).
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub flags: ManifestFlags,
    pub exit: i32,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Common epilogue: write `report.json` and `manifest.json`, then return the
/// artifact summary. `series_sha256` is `Some` when the caller streamed a
/// `series.csv` first.
#[allow(clippy::too_many_arguments)]
fn persist<R: Serialize>(
    dir: &Path,
    command: &str,
    scenario_path: &Path,
    scenario: &Scenario,
    warnings: &[String],
    flags: ManifestFlags,
    report: &R,
    series_sha256: Option<String>,
    started: Instant,
) -> Result<RunArtifacts> {
    write_json(&dir.join("report.json"), report)?;
    let mut outputs = Vec::new();
    if series_sha256.is_some() {
        outputs.push("series.csv".to_string());
    }
    outputs.push("report.json".to_string());
    outputs.push("manifest.json".to_string());
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_path: scenario_path.display().to_string(),
        scenario: scenario.clone(),
        warnings: warnings.to_vec(),
        flags,
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
        series_sha256,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    let exit = if flags.boundary_touched || flags.overflow_halt {
        3
    } else {
        0
    };
    Ok(RunArtifacts {
        dir: dir.to_path_buf(),
        flags,
        exit,
    })
}

fn prepare_dir(root: &Path, scenario_path: &Path) -> Result<PathBuf> {
    let dir = run_dir(root, scenario_path);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SimulateReport {
    dt: f64,
    record_stride: usize,
    steps: usize,
    rows: usize,
    final_t: f64,
    energy_initial: f64,
    energy_final: f64,
    /// `max_t |E(t) - E(0)| / max(|E(0)|, 1e-300)` over the recorded rows.
    energy_drift_rel: f64,
    crit_norm_initial: f64,
    crit_norm_final: f64,
    support_initial: f64,
    support_final: f64,
    max_abs_u_final: f64,
    halt_time: Option<f64>,
    flags: ManifestFlags,
    warnings: Vec<String>,
}

/// Evolve the scenario and stream the diagnostics series to
/// `series.csv`, one row per recorded snapshot. Monitor flags land in the
/// report and the manifest; a fired monitor makes the exit code 3 while the
/// artifacts for the completed part of the run remain on disk.
pub fn run_simulate(
    sc: &Scenario,
    warnings: &[String],
    scenario_path: &Path,
    root: &Path,
) -> Result<RunArtifacts> {
    let started = Instant::now();
    let lab = Lab::build(sc)?;
    let dir = prepare_dir(root, scenario_path)?;
    let opts = lab.run_options(sc);

    fn emit_line(
        w: &mut std::io::BufWriter<fs::File>,
        h: &mut Sha256,
        line: &str,
    ) -> std::io::Result<()> {
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        h.update(line.as_bytes());
        h.update(b"\n");
        Ok(())
    }
    let file = fs::File::create(dir.join("series.csv"))?;
    let mut writer = std::io::BufWriter::new(file);
    let mut hasher = Sha256::new();
    emit_line(&mut writer, &mut hasher, &DiagnosticsRecord::csv_header())?;

    let mut io_error: Option<std::io::Error> = None;
    let mut first: Option<DiagnosticsRecord> = None;
    let mut last: Option<DiagnosticsRecord> = None;
    let mut drift = 0.0f64;
    let mut rows = 0usize;
    let summary = evolve_streaming(
        &lab.state0,
        &lab.params,
        &lab.grid,
        sc.run.t_end,
        lab.dt,
        sc.run.record_stride,
        &opts,
        |state, _| {
            let rec = compute_record(
                state,
                &lab.basis,
                &lab.params,
                &lab.weight,
                sc.diagnostics.tail_c,
                lab.support_cut,
            );
            if let Err(e) = emit_line(&mut writer, &mut hasher, &rec.csv_row()) {
                io_error = Some(e);
                return ControlFlow::Break(());
            }
            rows += 1;
            let e0 = first.get_or_insert(rec).e_total;
            drift = drift.max((rec.e_total - e0).abs() / e0.abs().max(1e-300));
            last = Some(rec);
            ControlFlow::Continue(())
        },
    )?;
    writer.flush()?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let sha = format!("{:x}", hasher.finalize());

    let flags = ManifestFlags {
        boundary_touched: summary.flags.boundary_touched,
        overflow_halt: summary.flags.overflow_halt,
    };
    let first = first.expect("at least the initial row is always recorded");
    let last = last.expect("at least the initial row is always recorded");
    let report = SimulateReport {
        dt: lab.dt,
        record_stride: sc.run.record_stride,
        steps: summary.steps,
        rows,
        final_t: last.t,
        energy_initial: first.e_total,
        energy_final: last.e_total,
        energy_drift_rel: drift,
        crit_norm_initial: pair_of(&first),
        crit_norm_final: pair_of(&last),
        support_initial: first.support_r,
        support_final: last.support_r,
        max_abs_u_final: summary.final_state.max_abs_u(),
        halt_time: summary.halt_time,
        flags,
        warnings: warnings.to_vec(),
    };
    persist(
        &dir,
        "simulate",
        scenario_path,
        sc,
        warnings,
        flags,
        &report,
        Some(sha),
        started,
    )
}

fn pair_of(rec: &DiagnosticsRecord) -> f64 {
    rec.hsc_u.hypot(rec.hsc1_v)
}

// ---------------------------------------------------------------------------
// scatter
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScatterFile {
    dt: f64,
    report: ScatterReport,
    warnings: Vec<String>,
}

/// Linear-pullback scattering probe at checkpoints `T/8, T/4, T/2, T`.
pub fn run_scatter(
    sc: &Scenario,
    warnings: &[String],
    scenario_path: &Path,
    root: &Path,
) -> Result<RunArtifacts> {
    let started = Instant::now();
    let lab = Lab::build(sc)?;
    let t = sc.run.t_end;
    let t_list = [t / 8.0, t / 4.0, t / 2.0, t];
    let report = scattering_detect(&lab.params, &lab.state0, &lab.basis, &t_list, lab.dt, true)?;
    let dir = prepare_dir(root, scenario_path)?;
    let file = ScatterFile {
        dt: lab.dt,
        report,
        warnings: warnings.to_vec(),
    };
    persist(
        &dir,
        "scatter",
        scenario_path,
        sc,
        warnings,
        ManifestFlags::default(),
        &file,
        None,
        started,
    )
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct StabilityFile {
    dt: f64,
    eps_ladder: Vec<f64>,
    report: StabilityReport,
    warnings: Vec<String>,
}

/// Perturbation-response ladder around the scenario's run.
pub fn run_stability(
    sc: &Scenario,
    warnings: &[String],
    scenario_path: &Path,
    root: &Path,
) -> Result<RunArtifacts> {
    let started = Instant::now();
    let lab = Lab::build(sc)?;
    let report = stability_experiment(
        &lab.params,
        &lab.state0,
        &lab.basis,
        &STABILITY_LADDER,
        None,
        sc.run.t_end,
        lab.dt,
    )?;
    let dir = prepare_dir(root, scenario_path)?;
    let file = StabilityFile {
        dt: lab.dt,
        eps_ladder: STABILITY_LADDER.to_vec(),
        report,
        warnings: warnings.to_vec(),
    };
    persist(
        &dir,
        "stability",
        scenario_path,
        sc,
        warnings,
        ManifestFlags::default(),
        &file,
        None,
        started,
    )
}

// ---------------------------------------------------------------------------
// blowup
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BlowupFile {
    dt: f64,
    blowup_threshold: f64,
    report: BlowupContrast,
    warnings: Vec<String>,
}

/// Drive a focusing scenario into the overflow monitor and record the
/// critical-norm growth on the way. Halting is this protocol's *success*
/// outcome, so the exit code stays 0; the halt time is in the report.
pub fn run_blowup(
    sc: &Scenario,
    warnings: &[String],
    scenario_path: &Path,
    root: &Path,
) -> Result<RunArtifacts> {
    let started = Instant::now();
    let lab = Lab::build(sc)?;
    let report = blowup_contrast(
        &lab.params,
        &lab.state0,
        &lab.basis,
        lab.dt,
        sc.run.t_end,
        sc.run.blowup_threshold,
    )?;
    let dir = prepare_dir(root, scenario_path)?;
    let file = BlowupFile {
        dt: lab.dt,
        blowup_threshold: sc.run.blowup_threshold,
        report,
        warnings: warnings.to_vec(),
    };
    persist(
        &dir,
        "blowup",
        scenario_path,
        sc,
        warnings,
        ManifestFlags::default(),
        &file,
        None,
        started,
    )
}

// ---------------------------------------------------------------------------
// morawetz
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MorawetzFile {
    dt: f64,
    report: DispersalReport,
    warnings: Vec<String>,
}

/// Dispersal diagnostics: frequency-scale history, near-origin potential
/// concentration, and the interior monotonicity estimate at full and half
/// horizon.
pub fn run_morawetz(
    sc: &Scenario,
    warnings: &[String],
    scenario_path: &Path,
    root: &Path,
) -> Result<RunArtifacts> {
    let started = Instant::now();
    let lab = Lab::build(sc)?;
    let report = dispersal_probe(
        &lab.params,
        &lab.state0,
        &lab.basis,
        sc.run.t_end,
        lab.dt,
        sc.diagnostics.concentration_c,
    )?;
    let dir = prepare_dir(root, scenario_path)?;
    let file = MorawetzFile {
        dt: lab.dt,
        report,
        warnings: warnings.to_vec(),
    };
    persist(
        &dir,
        "morawetz",
        scenario_path,
        sc,
        warnings,
        ManifestFlags::default(),
        &file,
        None,
        started,
    )
}

// ---------------------------------------------------------------------------
// exponents
// ---------------------------------------------------------------------------

/// Everything the `exponents` subcommand reports for one `(d, p)` query.
/// The power-dependent block is present only when `--p` was given.
#[derive(Serialize)]
pub struct ExponentsReport {
    pub d: usize,
    pub window_lo: f64,
    /// `None` means the window is unbounded above.
    pub window_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_p: Option<PowerReport>,
}

#[derive(Serialize)]
pub struct PowerReport {
    pub p: f64,
    pub s_c: f64,
    pub energy_supercritical: bool,
    pub in_window: bool,
    pub smoothness_margin: f64,
    /// `None` when the bootstrap exponents degenerate at this power.
    pub xy: Option<supercrit_core::exponents::XyExponents>,
    pub admissible_pairs: Vec<supercrit_core::exponents::AdmissiblePair>,
}

pub fn exponents_report(d: usize, p: Option<f64>) -> Result<ExponentsReport> {
    let (lo, hi) = supercrit_core::exponents::p_window(d)?;
    let at_p = match p {
        None => None,
        Some(p) => {
            let params = ModelParams::new(d, p, supercrit_core::Sign::Defocusing)?;
            Some(PowerReport {
                p,
                s_c: params.critical_regularity(),
                energy_supercritical: params.energy_supercritical(),
                in_window: p > lo && p < hi,
                smoothness_margin: supercrit_core::exponents::smoothness_margin(d, p),
                xy: supercrit_core::exponents::xy_exponents(d, p).ok(),
                admissible_pairs: supercrit_core::exponents::sample_admissible_pairs(&params),
            })
        }
    };
    Ok(ExponentsReport {
        d,
        window_lo: lo,
        window_hi: hi.is_finite().then_some(hi),
        at_p,
    })
}

impl ExponentsReport {
    /// Aligned-text rendering for the terminal.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let hi = match self.window_hi {
            Some(h) => format!("{h:.10}"),
            None => "inf".to_string(),
        };
        out.push_str(&format!("dimension        d      = {}\n", self.d));
        out.push_str(&format!(
            "power window     (lo,hi) = ({:.10}, {hi})\n",
            self.window_lo
        ));
        if let Some(pr) = &self.at_p {
            out.push_str(&format!("power            p      = {}\n", pr.p));
            out.push_str(&format!("critical index   s_c    = {:.10}\n", pr.s_c));
            out.push_str(&format!(
                "energy-supercritical    = {}\n",
                pr.energy_supercritical
            ));
            out.push_str(&format!("inside window           = {}\n", pr.in_window));
            out.push_str(&format!(
                "smoothness margin       = {:.10}\n",
                pr.smoothness_margin
            ));
            match &pr.xy {
                Some(xy) => {
                    out.push_str(&format!(
                        "X norm   |∇|^{:.6} u in L^{:.6}_t L^{:.6}_x\n",
                        xy.deriv_order, xy.time_exp_x, xy.space_exp_x
                    ));
                    out.push_str(&format!(
                        "Y norm   dual side  in L^{:.6}_t L^{:.6}_x\n",
                        xy.time_exp_y, xy.space_exp_y
                    ));
                }
                None => out.push_str("bootstrap exponents    : degenerate at this power\n"),
            }
            out.push_str("admissible pairs (q, r, gamma):\n");
            for pair in &pr.admissible_pairs {
                let q = match pair.q {
                    TimeExponent::Finite(q) => format!("{q:.6}"),
                    TimeExponent::Infinity => "inf".to_string(),
                };
                out.push_str(&format!(
                    "  q = {q:>9}   r = {:<9.6} gamma = {:.6}\n",
                    pair.r, pair.gamma
                ));
            }
        }
        out
    }
}

/// Write the exponents report under `<root>/exponents/report.json`; used
/// when `exponents` is invoked with an explicit `--out`.
pub fn persist_exponents(report: &ExponentsReport, root: &Path) -> Result<PathBuf> {
    let dir = root.join("exponents");
    fs::create_dir_all(&dir)?;
    let path = dir.join("report.json");
    write_json(&path, report)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Scenario entry point shared by main
// ---------------------------------------------------------------------------

/// Load a scenario, print its warnings to stderr, run the named protocol,
/// and report where the artifacts landed.
pub fn dispatch_scenario(
    command: &str,
    scenario_path: &Path,
    cli_out: Option<&Path>,
) -> Result<RunArtifacts> {
    let (sc, warnings) = Scenario::load(scenario_path)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let root = out_root(cli_out);
    let runner = match command {
        "simulate" => run_simulate,
        "scatter" => run_scatter,
        "stability" => run_stability,
        "blowup" => run_blowup,
        "morawetz" => run_morawetz,
        other => {
            return Err(Error::Scenario(format!(
                "internal: unknown scenario command {other}"
            )))
        }
    };
    runner(&sc, &warnings, scenario_path, &root)
}
