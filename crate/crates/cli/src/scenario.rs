//! Scenario files: a flat, sectioned `key = value` description of one run.
//!
//! The grammar is TOML restricted to one level of sections —
//! `[model]`, `[grid]`, `[data]`, `[run]`, `[diagnostics]` — with `#`
//! comments. Unknown keys are hard errors (they are almost always typos of
//! knobs that would otherwise be silently defaulted). Every field except the
//! model's `d` and `p` has a documented default, so a minimal file is just
//!
//! ```toml
//! [model]
//! d = 3
//! p = 6.0
//! ```
//!
//! Parsing and re-emission round-trip exactly: `parse(emit(s)) == s`.

use serde::{Deserialize, Serialize};
use supercrit_core::{ModelParams, Sign};

use crate::error::{Error, Result};

/// Initial-data family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFamily {
    /// `A exp(-r^2 / 2w^2)`.
    Gaussian,
    /// Compactly supported `A exp(1 - 1/(1 - (r/w)^2))` on `r < w`.
    Bump,
    /// A single eigenmode of the discrete operator (index `mode_index`).
    Mode,
}

impl std::fmt::Display for DataFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DataFamily::Gaussian => "gaussian",
            DataFamily::Bump => "bump",
            DataFamily::Mode => "mode",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Spatial dimension, 3 through 9.
    pub d: usize,
    /// Nonlinearity power `p` in `|u|^p u`.
    pub p: f64,
    /// Sign of the nonlinearity.
    #[serde(default = "default_sign")]
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Number of radial cells.
    pub n: usize,
    /// Box radius.
    pub r_max: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 1024, r_max: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub family: DataFamily,
    pub amplitude: f64,
    pub width: f64,
    /// Eigenmode index, used only by the `mode` family.
    pub mode_index: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            family: DataFamily::Gaussian,
            amplitude: 1.0,
            width: 1.0,
            mode_index: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Evolution horizon.
    pub t_end: f64,
    /// Step-size safety factor: `dt = cfl_factor / sqrt(stiffness bound)`.
    pub cfl_factor: f64,
    /// Record every this many steps.
    pub record_stride: usize,
    /// Amplitude overflow threshold for the halt monitor.
    pub blowup_threshold: f64,
    /// Seed echoed into reports for any randomized follow-up work; the
    /// protocols themselves are deterministic.
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_end: 5.0,
            cfl_factor: 0.5,
            record_stride: 4,
            blowup_threshold: 1e6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Truncation radius of the virial weight; `0` means `r_max / 4`, which
    /// keeps the weight's entire ramp in the interior half of the box.
    pub morawetz_r: f64,
    /// Constant `C` of the near-origin concentration window `r <= C/N(t)`.
    pub concentration_c: f64,
    /// Constant `C` of the tail-mass cuts (spatial `r >= C/N`, spectral
    /// `sqrt(mu) >= C N`). The default keeps the spatial cut out in the
    /// genuine tail of unit-scale data, where the fraction is informative;
    /// small `C` parks the sharp cut inside the core, whose critical-norm
    /// cost saturates the fraction at 1.
    pub tail_c: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            morawetz_r: 0.0,
            concentration_c: 1.0,
            tail_c: 4.0,
        }
    }
}

/// A fully described run. See the module docs for the file grammar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

fn default_sign() -> Sign {
    Sign::Defocusing
}

impl Scenario {
    /// Parse from TOML text. Syntax and type errors carry the line/column
    /// diagnostics of the underlying parser; constraint violations are
    /// checked by [`Scenario::validate`], which is called here.
    pub fn parse(text: &str) -> Result<(Self, Vec<String>)> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        let warnings = scenario.validate()?;
        Ok((scenario, warnings))
    }

    /// Read and parse a scenario file.
    pub fn load(path: &std::path::Path) -> Result<(Self, Vec<String>)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Emit the canonical TOML form (every field explicit). Feeding the
    /// output back through [`Scenario::parse`] reproduces an equal value.
    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// Hard constraint checks, returning soft warnings. Out-of-window powers
    /// warn rather than error: runs at and beyond the window edges are part
    /// of the laboratory's purpose.
    pub fn validate(&self) -> Result<Vec<String>> {
        let m = &self.model;
        if !(3..=9).contains(&m.d) {
            return Err(Error::Scenario(format!(
                "model.d = {} outside the supported range 3..=9",
                m.d
            )));
        }
        if !m.p.is_finite() || m.p <= 0.0 {
            return Err(Error::Scenario(format!(
                "model.p = {} must be finite and positive",
                m.p
            )));
        }
        let g = &self.grid;
        if g.n < 4 || g.n > 4096 {
            return Err(Error::Scenario(format!(
                "grid.n = {} outside the supported range 4..=4096",
                g.n
            )));
        }
        if !g.r_max.is_finite() || g.r_max <= 0.0 {
            return Err(Error::Scenario(format!(
                "grid.r_max = {} must be finite and positive",
                g.r_max
            )));
        }
        let d = &self.data;
        if !d.amplitude.is_finite() {
            return Err(Error::Scenario(format!(
                "data.amplitude = {} must be finite",
                d.amplitude
            )));
        }
        if !(d.width.is_finite() && d.width > 0.0) {
            return Err(Error::Scenario(format!(
                "data.width = {} must be finite and positive",
                d.width
            )));
        }
        if d.family == DataFamily::Mode && d.mode_index >= g.n {
            return Err(Error::Scenario(format!(
                "data.mode_index = {} out of range for grid.n = {}",
                d.mode_index, g.n
            )));
        }
        let r = &self.run;
        if !(r.t_end.is_finite() && r.t_end > 0.0) {
            return Err(Error::Scenario(format!(
                "run.t_end = {} must be finite and positive",
                r.t_end
            )));
        }
        if !(r.cfl_factor > 0.0 && r.cfl_factor <= 1.0) {
            return Err(Error::Scenario(format!(
                "run.cfl_factor = {} outside (0, 1]",
                r.cfl_factor
            )));
        }
        if r.record_stride == 0 {
            return Err(Error::Scenario("run.record_stride must be >= 1".into()));
        }
        if !(r.blowup_threshold.is_finite() && r.blowup_threshold > 0.0) {
            return Err(Error::Scenario(format!(
                "run.blowup_threshold = {} must be finite and positive",
                r.blowup_threshold
            )));
        }
        let dg = &self.diagnostics;
        for (name, v) in [
            ("diagnostics.morawetz_r", dg.morawetz_r),
            ("diagnostics.concentration_c", dg.concentration_c),
            ("diagnostics.tail_c", dg.tail_c),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Scenario(format!("{name} = {v} must be >= 0")));
            }
        }
        if dg.concentration_c == 0.0 || dg.tail_c == 0.0 {
            return Err(Error::Scenario(
                "diagnostics constants must be positive".into(),
            ));
        }

        let mut warnings = Vec::new();
        match supercrit_core::exponents::p_window(m.d) {
            Ok((lo, hi)) => {
                if m.p <= lo || m.p >= hi {
                    let hi_s = if hi.is_infinite() {
                        "inf".to_string()
                    } else {
                        format!("{hi:.6}")
                    };
                    warnings.push(format!(
                        "model.p = {} lies outside the supercritical window ({lo:.6}, {hi_s}) for d = {}",
                        m.p, m.d
                    ));
                }
            }
            Err(e) => warnings.push(format!("no power window for d = {}: {e}", m.d)),
        }
        let support = self.expected_support();
        if support + r.t_end > g.r_max {
            warnings.push(format!(
                "light cone from the data (support ~{support:.2} + T = {}) leaves the box r_max = {}; \
                 expect wall contact flags",
                r.t_end, g.r_max
            ));
        }
        Ok(warnings)
    }

    /// Rough initial support radius of the configured data (at the 1e-3
    /// relative level), for the light-cone-fits-the-box warning.
    pub fn expected_support(&self) -> f64 {
        match self.data.family {
            // exp(-r^2/2w^2) = 1e-3 at r = w sqrt(2 ln 1000).
            DataFamily::Gaussian => self.data.width * (2.0 * 1000.0_f64.ln()).sqrt(),
            DataFamily::Bump => self.data.width,
            DataFamily::Mode => self.grid.r_max,
        }
    }

    /// The validated model-parameter triple.
    pub fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(self.model.d, self.model.p, self.model.sign)?)
    }
}
