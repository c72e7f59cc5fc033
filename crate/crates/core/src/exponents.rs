//! Scaling exponents, admissibility conditions, and parameter windows for the
//! radial semilinear wave equation `u_tt - Δu + σ|u|^p u = 0` on `R^d`.
//!
//! Everything in this module is closed-form arithmetic on `(d, p)` and on
//! Lebesgue pairs `(q, r)`: the critical Sobolev index attached to the scaling
//! symmetry, the per-dimension window of powers the bootstrap machinery can
//! handle, wave admissibility of space-time norms, and the exponents of the
//! norm pair used to close the nonlinear estimates. No grids, no fields —
//! pure exponent calculus, cheap enough to recompute on every call.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Sign of the nonlinearity
// ---------------------------------------------------------------------------

/// Sign of the nonlinear term in `u_tt - Δu + σ|u|^p u = 0`.
///
/// Defocusing (`σ = +1`) pushes energy outward and is the scattering regime;
/// focusing (`σ = -1`) can drive finite-time blowup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Defocusing,
    Focusing,
}

impl Sign {
    /// The coefficient `σ` multiplying `|u|^p u` in the equation.
    pub fn coefficient(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Defocusing => write!(f, "defocusing"),
            Sign::Focusing => write!(f, "focusing"),
        }
    }
}

// ---------------------------------------------------------------------------
// Time Lebesgue exponent (q may be +infinity)
// ---------------------------------------------------------------------------

/// A time Lebesgue exponent, with `q = ∞` as an explicit tagged value so that
/// `1/q = 0` holds exactly rather than through floating-point infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeExponent {
    Finite(f64),
    Infinity,
}

impl TimeExponent {
    /// `1/q`, exactly zero for the infinite exponent.
    pub fn recip(self) -> f64 {
        match self {
            TimeExponent::Finite(q) => 1.0 / q,
            TimeExponent::Infinity => 0.0,
        }
    }

    /// The exponent as an `f64` (`+∞` for the infinite tag).
    pub fn as_f64(self) -> f64 {
        match self {
            TimeExponent::Finite(q) => q,
            TimeExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, TimeExponent::Finite(_))
    }
}

impl From<f64> for TimeExponent {
    fn from(q: f64) -> Self {
        if q.is_infinite() && q > 0.0 {
            TimeExponent::Infinity
        } else {
            TimeExponent::Finite(q)
        }
    }
}

impl fmt::Display for TimeExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeExponent::Finite(q) => write!(f, "{q}"),
            TimeExponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for TimeExponent {
    /// Serialized as a plain number, or as `null` for `∞` (JSON has no
    /// infinity literal; `null` is the unambiguous encoding).
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeExponent::Finite(q) => s.serialize_f64(*q),
            TimeExponent::Infinity => s.serialize_none(),
        }
    }
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

/// The model triple `(d, p, σ)`: spatial dimension, nonlinearity power, sign.
///
/// Validated once at construction (`d >= 3`, finite `p > 0`); all derived
/// quantities are recomputed on demand — nothing is cached, so the struct can
/// be freely copied and serialized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub d: usize,
    pub p: f64,
    pub sign: Sign,
}

impl ModelParams {
    pub fn new(d: usize, p: f64, sign: Sign) -> Result<Self> {
        if d < 3 {
            return Err(Error::Dimension(d));
        }
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::Power(p));
        }
        Ok(ModelParams { d, p, sign })
    }

    /// The critical Sobolev index `s_c = d/2 - 2/p` singled out by the scaling
    /// symmetry `u ↦ λ^{2/p} u(λt, λx)`.
    pub fn critical_regularity(&self) -> f64 {
        self.d as f64 / 2.0 - 2.0 / self.p
    }

    /// Whether the conserved energy lies below critical scaling, i.e.
    /// `s_c > 1`, equivalently `p > 4/(d-2)`.
    pub fn energy_supercritical(&self) -> bool {
        self.p > 4.0 / (self.d as f64 - 2.0)
    }

    /// Whether `p` lies strictly inside the tractable window for this
    /// dimension (see [`p_window`]).
    pub fn in_power_window(&self) -> Result<bool> {
        let (lo, hi) = p_window(self.d)?;
        Ok(self.p > lo && self.p < hi)
    }

    /// How the conserved energy responds to the scaling symmetry:
    /// `E(u_λ) = λ^e E(u)` with `e = 4/p + 2 - d`. Negative throughout the
    /// supercritical regime — shrinking a bubble *lowers* its energy, which is
    /// exactly why energy conservation fails to control concentration.
    pub fn energy_scale_exponent(&self) -> f64 {
        4.0 / self.p + 2.0 - self.d as f64
    }

    /// The nonlinear term `σ |u|^p u` evaluated pointwise. Zero input maps to
    /// exactly zero (the power is computed through `exp(p ln|u|)`, which is
    /// undefined at the origin).
    pub fn nonlinearity(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        self.sign.coefficient() * u.abs().powf(self.p) * u
    }
}

// ---------------------------------------------------------------------------
// Free functions: the exponent calculus
// ---------------------------------------------------------------------------

/// Critical Sobolev index `s_c = d/2 - 2/p` for the scaling symmetry.
pub fn critical_regularity(d: usize, p: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::Dimension(d));
    }
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::Power(p));
    }
    Ok(d as f64 / 2.0 - 2.0 / p)
}

/// The open window `(p_lo, p_hi)` of nonlinearity powers tractable in
/// dimension `d`.
///
/// The lower endpoint is always the energy-critical power `4/(d-2)`. The
/// upper endpoint is `+∞` in `d = 3`, the conformal-type barrier `4/(d-3)`
/// for `4 <= d <= 6`, and for `d >= 7` the smaller root of
///
/// ```text
/// (d+1) p^2 - d(d-1) p + 4(d+1) = 0,
/// ```
///
/// i.e. `p_hi = [d(d-1) - sqrt(d^2(d-1)^2 - 16(d+1)^2)] / (2(d+1))` — the
/// power at which the fractional-regularity budget of the nonlinear estimate
/// is exhausted (the root of [`smoothness_margin`] in `p`).
///
/// Guarantees `p_lo < p_hi` for every supported dimension; the window narrows
/// as `d` grows but never closes.
pub fn p_window(d: usize) -> Result<(f64, f64)> {
    if d < 3 {
        return Err(Error::Dimension(d));
    }
    let df = d as f64;
    let lo = 4.0 / (df - 2.0);
    let hi = match d {
        3 => f64::INFINITY,
        4..=6 => 4.0 / (df - 3.0),
        _ => {
            let b = df * (df - 1.0);
            let disc = b * b - 16.0 * (df + 1.0) * (df + 1.0);
            if disc < 0.0 {
                return Err(Error::WindowDiscriminant { d, disc });
            }
            (b - disc.sqrt()) / (2.0 * (df + 1.0))
        }
    };
    debug_assert!(lo < hi, "window must be nonempty: d = {d}, ({lo}, {hi})");
    Ok((lo, hi))
}

/// Wave admissibility of the space-time pair `(q, r)` in dimension `d`:
///
/// ```text
/// 1/q + (d-1)/(2r) <= (d-1)/4,   2 <= q <= ∞,   2 <= r < ∞.
/// ```
///
/// The comparison is exact (no tolerance): sharp pairs that satisfy the
/// constraint with equality in exact arithmetic, such as `(2, 4)` in `d = 5`,
/// evaluate to equality in floating point as well.
pub fn is_admissible(q: TimeExponent, r: f64, d: usize) -> bool {
    let q_ok = match q {
        TimeExponent::Finite(v) => v.is_finite() && v >= 2.0,
        TimeExponent::Infinity => true,
    };
    let r_ok = r.is_finite() && r >= 2.0;
    if !q_ok || !r_ok || d < 3 {
        return false;
    }
    let dm1 = d as f64 - 1.0;
    q.recip() + dm1 / (2.0 * r) <= dm1 / 4.0
}

/// The derivative order `γ = 1/q + d/r - 2/p` dictated by scaling: measuring a
/// solution in `L^q_t L^r_x` at homogeneous regularity `γ` makes the norm
/// invariant under the symmetry `u ↦ λ^{2/p} u(λt, λx)`.
///
/// Total on its stated domain (`q, r` positive with `q` possibly infinite,
/// `p > 0`); preconditions are debug-asserted rather than surfaced as errors.
pub fn scaling_gamma(q: TimeExponent, r: f64, d: usize, p: f64) -> f64 {
    debug_assert!(r > 0.0 && p > 0.0 && d >= 3);
    q.recip() + d as f64 / r - 2.0 / p
}

/// Available fractional smoothness left over by the nonlinear estimate:
///
/// ```text
/// margin(d, p) = (p + 1) - (1/(d+1) + p/2) - s_c
/// ```
///
/// — the Hölder regularity `p + 1` of the nonlinearity, minus the derivative
/// cost of the sharp in-window space-time norms, minus the critical index the
/// estimate must reach. Positive margin means the fixed-point argument
/// closes; the margin vanishes exactly at the upper window endpoint for
/// `d >= 7` (algebraically: `margin = (p^2 - bp + 4)/(2p)` with
/// `b = d(d-1)/(d+1)`, whose smaller root is `p_hi`).
pub fn smoothness_margin(d: usize, p: f64) -> f64 {
    debug_assert!(d >= 3 && p > 0.0);
    let df = d as f64;
    let s_c = df / 2.0 - 2.0 / p;
    (p + 1.0) - (1.0 / (df + 1.0) + p / 2.0) - s_c
}

/// The space-time Lebesgue exponents of the two-norm bootstrap scheme.
///
/// `X` is the norm that carries the solution: `|∇|^{deriv_order} u` measured
/// in `L^{time_exp_x}_t L^{space_exp_x}_x`. `Y` carries the nonlinearity on
/// the dual side in `L^{time_exp_y}_t L^{space_exp_y}_x`. In dimensions
/// `3..=6` both pairs are the classical diagonal endpoint pair and only the
/// derivative order moves with `p`; from `d = 7` the time exponents deform
/// with `p` and degenerate (denominator → 0) exactly when `p` leaves the
/// window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XyExponents {
    pub deriv_order: f64,
    pub time_exp_x: f64,
    pub space_exp_x: f64,
    pub time_exp_y: f64,
    pub space_exp_y: f64,
}

/// Exponents of the bootstrap norm pair for `(d, p)`; see [`XyExponents`].
///
/// For `d <= 6`: derivative order `s_c - 1/2`, both exponents of `X` equal to
/// `2(d+1)/(d-1)` and both exponents of `Y` equal to `2(d+1)/(d+3)`.
///
/// For `d >= 7`: derivative order `p/2`, spatial exponents as above, and time
/// exponents
///
/// ```text
/// time_x = 2p(d+1) / [4(d+1) + p^2(d+1) - p d(d-1)]
/// time_y = 2p(d+1) / [4(d+1) + p^2(d+1) - p (d^2 - d - 4)]
/// ```
///
/// Errors with the offending denominator when it is nonpositive, which for
/// `time_x` happens exactly when `p >= p_hi(d)`.
pub fn xy_exponents(d: usize, p: f64) -> Result<XyExponents> {
    if d < 3 {
        return Err(Error::Dimension(d));
    }
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::Power(p));
    }
    let df = d as f64;
    let space_x = 2.0 * (df + 1.0) / (df - 1.0);
    let space_y = 2.0 * (df + 1.0) / (df + 3.0);
    if d <= 6 {
        let s_c = df / 2.0 - 2.0 / p;
        Ok(XyExponents {
            deriv_order: s_c - 0.5,
            time_exp_x: space_x,
            space_exp_x: space_x,
            time_exp_y: space_y,
            space_exp_y: space_y,
        })
    } else {
        let den_x = 4.0 * (df + 1.0) + p * p * (df + 1.0) - p * df * (df - 1.0);
        if den_x <= 0.0 {
            return Err(Error::DegenerateExponent { d, p, denom: den_x });
        }
        let den_y = 4.0 * (df + 1.0) + p * p * (df + 1.0) - p * (df * df - df - 4.0);
        if den_y <= 0.0 {
            return Err(Error::DegenerateExponent { d, p, denom: den_y });
        }
        Ok(XyExponents {
            deriv_order: p / 2.0,
            time_exp_x: 2.0 * p * (df + 1.0) / den_x,
            space_exp_x: space_x,
            time_exp_y: 2.0 * p * (df + 1.0) / den_y,
            space_exp_y: space_y,
        })
    }
}

// ---------------------------------------------------------------------------
// Admissible pairs
// ---------------------------------------------------------------------------

/// A wave-admissible pair together with its scaling-dictated derivative order.
///
/// Invariant: `(q, r)` passed [`is_admissible`] for the owning dimension at
/// construction, and `gamma = 1/q + d/r - 2/p` for the owning power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissiblePair {
    pub q: TimeExponent,
    pub r: f64,
    pub gamma: f64,
}

impl AdmissiblePair {
    pub fn new(q: TimeExponent, r: f64, params: &ModelParams) -> Result<Self> {
        if !is_admissible(q, r, params.d) {
            return Err(Error::NotAdmissible {
                q: q.to_string(),
                r,
                d: params.d,
            });
        }
        Ok(AdmissiblePair {
            q,
            r,
            gamma: scaling_gamma(q, r, params.d, params.p),
        })
    }
}

/// A few canonical admissible pairs for the given model: the energy pair
/// `(∞, 2)`, the symmetric pair `q = r = 2(d+1)/(d-1)`, and (for `d >= 4`)
/// the sharp endpoint pair `(2, 2(d-1)/(d-3))`.
pub fn sample_admissible_pairs(params: &ModelParams) -> Vec<AdmissiblePair> {
    let df = params.d as f64;
    let mut pairs = vec![
        AdmissiblePair::new(TimeExponent::Infinity, 2.0, params)
            .expect("(inf, 2) is admissible in every dimension"),
        AdmissiblePair::new(
            TimeExponent::Finite(2.0 * (df + 1.0) / (df - 1.0)),
            2.0 * (df + 1.0) / (df - 1.0),
            params,
        )
        .expect("the symmetric pair is admissible in every dimension"),
    ];
    if params.d >= 4 {
        pairs.push(
            AdmissiblePair::new(TimeExponent::Finite(2.0), 2.0 * (df - 1.0) / (df - 3.0), params)
                .expect("the endpoint pair is admissible for d >= 4"),
        );
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    /// Root of `smoothness_margin(d, ·)` located by bisection — an oracle for
    /// the closed-form upper window endpoint that never touches the quadratic.
    fn margin_root_by_bisection(d: usize) -> f64 {
        let (lo, _) = p_window(d).unwrap();
        let (mut a, mut b) = (lo, 2.0);
        assert!(smoothness_margin(d, a) > 0.0);
        assert!(smoothness_margin(d, b) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if smoothness_margin(d, mid) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn critical_regularity_matches_hand_values() {
        // d = 3: s_c = 3/2 - 2/p
        assert_eq!(critical_regularity(3, 4.0).unwrap(), 1.0);
        assert!((critical_regularity(3, 6.0).unwrap() - 7.0 / 6.0).abs() < TOL);
        // d = 5, p = 2: 5/2 - 1 = 3/2 exactly
        assert_eq!(critical_regularity(5, 2.0).unwrap(), 1.5);
        // d = 7, p = 0.9
        assert!((critical_regularity(7, 0.9).unwrap() - (3.5 - 2.0 / 0.9)).abs() < TOL);
        assert!(critical_regularity(2, 1.0).is_err());
        assert!(critical_regularity(3, 0.0).is_err());
        assert!(critical_regularity(3, -1.0).is_err());
        assert!(critical_regularity(3, f64::NAN).is_err());
    }

    #[test]
    fn window_low_dimensions_exact() {
        let (lo, hi) = p_window(3).unwrap();
        assert_eq!(lo, 4.0);
        assert_eq!(hi, f64::INFINITY);
        assert_eq!(p_window(4).unwrap(), (2.0, 4.0));
        let (lo5, hi5) = p_window(5).unwrap();
        assert!((lo5 - 4.0 / 3.0).abs() < TOL);
        assert_eq!(hi5, 2.0);
        let (lo6, hi6) = p_window(6).unwrap();
        assert_eq!(lo6, 1.0);
        assert!((hi6 - 4.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn window_high_dimensions_match_frozen_roots() {
        // Frozen 40-digit evaluations of the closed-form root, computed
        // independently with arbitrary-precision arithmetic. The literals
        // keep the reference digits; f64 parsing rounds them.
        #[allow(clippy::excessive_precision)]
        let frozen = [
            (7, 0.9248161864080695818713),
            (8, 0.7280432678303092655969),
            (9, 0.6066740905808468915330),
            (10, 0.5222206497471779029293),
            (11, 0.4593856561137927065820),
            (12, 0.4105381882759688896881),
        ];
        for (d, expect) in frozen {
            let (lo, hi) = p_window(d).unwrap();
            assert!(
                (hi - expect).abs() < 1e-12,
                "d = {d}: hi = {hi}, frozen = {expect}"
            );
            assert!(lo < hi, "window nonempty at d = {d}");
        }
    }

    #[test]
    fn window_upper_endpoint_solves_quadratic() {
        for d in 7..=12 {
            let (_, hi) = p_window(d).unwrap();
            let df = d as f64;
            let residual = (df + 1.0) * hi * hi - df * (df - 1.0) * hi + 4.0 * (df + 1.0);
            assert!(
                residual.abs() < 1e-10,
                "d = {d}: quadratic residual {residual:.3e}"
            );
        }
    }

    #[test]
    fn window_upper_endpoint_agrees_with_margin_bisection() {
        for d in 7..=12 {
            let (_, hi) = p_window(d).unwrap();
            let root = margin_root_by_bisection(d);
            assert!(
                (hi - root).abs() < 1e-8,
                "d = {d}: closed form {hi} vs bisection {root}"
            );
        }
    }

    #[test]
    fn window_narrows_but_stays_open() {
        let mut prev_width = f64::INFINITY;
        for d in 4..=24 {
            let (lo, hi) = p_window(d).unwrap();
            let width = hi - lo;
            assert!(width > 0.0, "window closed at d = {d}");
            assert!(width < prev_width, "window widened at d = {d}");
            prev_width = width;
        }
    }

    #[test]
    fn margin_hand_values() {
        // d = 7, p = 0.8: margin = (0.64 - 5.25*0.8 + 4) / 1.6 = 0.275 exactly
        assert!((smoothness_margin(7, 0.8) - 0.275).abs() < TOL);
        // d = 7, p = 1.5: margin = -13/24
        assert!((smoothness_margin(7, 1.5) + 13.0 / 24.0).abs() < TOL);
        // d = 3 is so roomy the margin stays positive for all p in (4, 8]
        for k in 1..=40 {
            let p = 4.0 + 0.1 * k as f64;
            assert!(smoothness_margin(3, p) > 0.0, "margin negative at p = {p}");
        }
    }

    #[test]
    fn margin_sign_tracks_window_for_high_d() {
        for d in 7..=12 {
            let (lo, hi) = p_window(d).unwrap();
            let inside = 0.5 * (lo + hi);
            assert!(smoothness_margin(d, inside) > 0.0);
            assert!(smoothness_margin(d, hi + 0.05) < 0.0);
            assert!(smoothness_margin(d, hi).abs() < 1e-12);
        }
    }

    #[test]
    fn admissibility_hand_cases() {
        // Energy pair, every dimension
        for d in 3..=12 {
            assert!(is_admissible(TimeExponent::Infinity, 2.0, d));
        }
        // d = 3: (4, 4) admissible (1/4 + 1/4 = 1/2), (2, 4) not (1/2 + 1/4 > 1/2)
        assert!(is_admissible(TimeExponent::Finite(4.0), 4.0, 3));
        assert!(!is_admissible(TimeExponent::Finite(2.0), 4.0, 3));
        // d = 5: (2, 4) sharp — 1/2 + 4/8 = 1 = (d-1)/4, admissible with equality
        assert!(is_admissible(TimeExponent::Finite(2.0), 4.0, 5));
        // Range violations
        assert!(!is_admissible(TimeExponent::Finite(1.5), 10.0, 5));
        assert!(!is_admissible(TimeExponent::Finite(4.0), 1.0, 5));
        assert!(!is_admissible(TimeExponent::Finite(4.0), f64::INFINITY, 5));
    }

    #[test]
    fn gamma_hand_values() {
        // (q, r) = (inf, 2), d = 7, p = 0.9: 0 + 7/2 - 2/0.9 = 23/18
        let g = scaling_gamma(TimeExponent::Infinity, 2.0, 7, 0.9);
        assert!((g - 23.0 / 18.0).abs() < TOL);
        // (4, 4), d = 3, p = 4: 1/4 + 3/4 - 1/2 = 1/2
        let g = scaling_gamma(TimeExponent::Finite(4.0), 4.0, 3, 4.0);
        assert!((g - 0.5).abs() < TOL);
    }

    #[test]
    fn xy_low_dimension_hand_values() {
        // d = 3, p = 6: deriv = s_c - 1/2 = 2/3, X = (4, 4), Y = (4/3, 4/3)
        let e = xy_exponents(3, 6.0).unwrap();
        assert!((e.deriv_order - 2.0 / 3.0).abs() < TOL);
        assert_eq!(e.time_exp_x, 4.0);
        assert_eq!(e.space_exp_x, 4.0);
        assert!((e.time_exp_y - 4.0 / 3.0).abs() < TOL);
        assert!((e.space_exp_y - 4.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn xy_high_dimension_hand_values() {
        // d = 7, p = 0.9: den_x = 32 + 0.81*8 - 0.9*42 = 0.68,
        // den_y = 32 + 6.48 - 0.9*38 = 4.28
        let e = xy_exponents(7, 0.9).unwrap();
        assert!((e.deriv_order - 0.45).abs() < TOL);
        assert!((e.time_exp_x - 14.4 / 0.68).abs() < 1e-10);
        assert!((e.space_exp_x - 16.0 / 6.0).abs() < TOL);
        assert!((e.time_exp_y - 14.4 / 4.28).abs() < 1e-10);
        assert!((e.space_exp_y - 1.6).abs() < TOL);
    }

    #[test]
    fn xy_degenerates_outside_window() {
        // d = 7, p = 0.93 > p_hi: den_x = 32 + 8*0.8649 - 42*0.93 = -0.1408
        let err = xy_exponents(7, 0.93).unwrap_err();
        match err {
            Error::DegenerateExponent { d, denom, .. } => {
                assert_eq!(d, 7);
                assert!((denom + 0.1408).abs() < 1e-10);
            }
            other => panic!("expected DegenerateExponent, got {other:?}"),
        }
    }

    #[test]
    fn xy_time_x_blows_up_at_window_edge() {
        // As p -> p_hi from below, den_x -> 0+ and time_exp_x -> +inf.
        let (_, hi) = p_window(7).unwrap();
        let mut prev = 0.0;
        for k in 1..=4 {
            let p = hi - 10f64.powi(-k);
            let e = xy_exponents(7, p).unwrap();
            assert!(e.time_exp_x > prev);
            prev = e.time_exp_x;
        }
        assert!(prev > 1e3);
    }

    #[test]
    fn admissible_pair_carries_gamma() {
        let params = ModelParams::new(7, 0.9, Sign::Defocusing).unwrap();
        let pair = AdmissiblePair::new(TimeExponent::Infinity, 2.0, &params).unwrap();
        assert!((pair.gamma - 23.0 / 18.0).abs() < TOL);
        assert!(AdmissiblePair::new(TimeExponent::Finite(2.0), 4.0, &ModelParams::new(3, 6.0, Sign::Defocusing).unwrap()).is_err());
    }

    #[test]
    fn sample_pairs_are_admissible_and_energy_pair_matches_critical_shift() {
        for d in 3..=12 {
            let params = ModelParams::new(d, 1.0, Sign::Defocusing).unwrap();
            let pairs = sample_admissible_pairs(&params);
            assert!(pairs.len() >= 2);
            for pair in &pairs {
                assert!(is_admissible(pair.q, pair.r, d));
            }
            // (inf, 2): gamma = d/2 - 2/p = s_c exactly
            assert!((pairs[0].gamma - params.critical_regularity()).abs() < TOL);
        }
    }

    #[test]
    fn model_params_validation_and_derived_flags() {
        assert!(ModelParams::new(2, 6.0, Sign::Defocusing).is_err());
        assert!(ModelParams::new(3, 0.0, Sign::Defocusing).is_err());
        let m = ModelParams::new(3, 6.0, Sign::Defocusing).unwrap();
        assert!(m.energy_supercritical());
        assert!(m.in_power_window().unwrap());
        // Energy scaling: 4/6 + 2 - 3 = -1/3 < 0
        assert!((m.energy_scale_exponent() + 1.0 / 3.0).abs() < TOL);
        let sub = ModelParams::new(3, 2.0, Sign::Defocusing).unwrap();
        assert!(!sub.energy_supercritical());
        assert!(!sub.in_power_window().unwrap());
    }

    #[test]
    fn nonlinearity_pointwise() {
        let m = ModelParams::new(3, 6.0, Sign::Defocusing).unwrap();
        assert_eq!(m.nonlinearity(0.0), 0.0);
        assert!((m.nonlinearity(2.0) - 128.0).abs() < TOL);
        assert!((m.nonlinearity(-2.0) + 128.0).abs() < TOL);
        let f = ModelParams::new(3, 6.0, Sign::Focusing).unwrap();
        assert!((f.nonlinearity(2.0) + 128.0).abs() < TOL);
        // Fractional power, negative argument: odd extension
        let m = ModelParams::new(7, 0.9, Sign::Defocusing).unwrap();
        let y = m.nonlinearity(-0.5);
        assert!((y + 0.5f64.powf(0.9) * 0.5).abs() < TOL);
    }

    #[test]
    fn time_exponent_tagging() {
        assert_eq!(TimeExponent::from(f64::INFINITY), TimeExponent::Infinity);
        assert_eq!(TimeExponent::from(4.0), TimeExponent::Finite(4.0));
        assert_eq!(TimeExponent::Infinity.recip(), 0.0);
        assert_eq!(TimeExponent::Finite(4.0).recip(), 0.25);
        assert_eq!(TimeExponent::Infinity.to_string(), "inf");
    }

    proptest! {
        /// The upper window endpoint satisfies its defining quadratic with
        /// tiny residual across the whole high-dimensional range.
        #[test]
        fn prop_window_root_residual(d in 7usize..=32) {
            let (_, hi) = p_window(d).unwrap();
            let df = d as f64;
            let residual = (df + 1.0) * hi * hi - df * (df - 1.0) * hi + 4.0 * (df + 1.0);
            // Scale-aware bound: coefficients grow like d^2
            prop_assert!(residual.abs() < 1e-9 * df * df);
        }

        /// Inside the window the margin is positive and xy_exponents succeeds
        /// with a finite, admissible-side X time exponent; the derivative
        /// order is consistent with the dimension regime.
        #[test]
        fn prop_margin_positive_inside_window(d in 3usize..=12, frac in 0.01f64..0.99) {
            let (lo, hi) = p_window(d).unwrap();
            let hi_eff = if hi.is_finite() { hi } else { 16.0 };
            let p = lo + frac * (hi_eff - lo);
            if d >= 7 {
                prop_assert!(smoothness_margin(d, p) > 0.0);
            }
            let e = xy_exponents(d, p).unwrap();
            prop_assert!(e.time_exp_x.is_finite() && e.time_exp_x > 0.0);
            prop_assert!(e.time_exp_y.is_finite() && e.time_exp_y > 0.0);
            if d >= 7 {
                prop_assert!((e.deriv_order - p / 2.0).abs() < TOL);
            }
        }

        /// Admissibility is monotone: growing q or r can only keep a pair
        /// admissible.
        #[test]
        fn prop_admissibility_monotone(
            d in 3usize..=12,
            q in 2.0f64..40.0,
            r in 2.0f64..40.0,
            dq in 0.0f64..40.0,
            dr in 0.0f64..40.0,
        ) {
            if is_admissible(TimeExponent::Finite(q), r, d) {
                prop_assert!(is_admissible(TimeExponent::Finite(q + dq), r + dr, d));
                prop_assert!(is_admissible(TimeExponent::Infinity, r + dr, d));
            }
        }

        /// gamma responds to q and r exactly as the formula says (sanity on
        /// the arithmetic, catching sign slips).
        #[test]
        fn prop_gamma_affine_in_reciprocals(
            d in 3usize..=12,
            p in 0.3f64..8.0,
            q in 2.0f64..40.0,
            r in 2.0f64..40.0,
        ) {
            let g = scaling_gamma(TimeExponent::Finite(q), r, d, p);
            let g_inf = scaling_gamma(TimeExponent::Infinity, r, d, p);
            prop_assert!((g - g_inf - 1.0 / q).abs() < 1e-12);
            let g2 = scaling_gamma(TimeExponent::Finite(q), 2.0 * r, d, p);
            prop_assert!((g - g2 - d as f64 / (2.0 * r)).abs() < 1e-12);
        }

        /// The critical index is strictly increasing in p and crosses 1
        /// exactly at the energy-critical power.
        #[test]
        fn prop_supercritical_iff_sc_above_one(d in 3usize..=12, p in 0.1f64..20.0) {
            let s_c = critical_regularity(d, p).unwrap();
            let m = ModelParams::new(d, p, Sign::Defocusing).unwrap();
            prop_assert_eq!(m.energy_supercritical(), s_c > 1.0);
        }
    }
}
