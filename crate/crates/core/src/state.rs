//! Field states `(u, u_t)` on a radial grid, plus the initial-data families
//! the experiment drivers draw from: Gaussians, compactly supported bumps,
//! and single eigenmodes of the discrete Laplacian.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::spectral::SpectralBasis;

/// A snapshot of the wave pair at one instant: `u` is the displacement,
/// `v = u_t` the velocity, both sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        Ok(FieldState { t, u, v })
    }

    /// The rest state on an `n`-node grid at time zero.
    pub fn zero(n: usize) -> Self {
        FieldState {
            t: 0.0,
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// True when every entry of both components is finite.
    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite()) && self.v.iter().all(|x| x.is_finite())
    }

    /// `max_j |u_j|`, the amplitude the blowup monitor watches.
    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// `max_j (|u_j| + |v_j|)`, the amplitude scale used by support
    /// thresholds.
    pub fn max_abs_pair(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .fold(0.0f64, |m, (&a, &b)| m.max(a.abs() + b.abs()))
    }

    /// True when both components vanish identically.
    pub fn is_zero(&self) -> bool {
        self.u.iter().all(|&x| x == 0.0) && self.v.iter().all(|&x| x == 0.0)
    }

    /// Entrywise difference `(self.u - other.u, self.v - other.v)`, keeping
    /// `self`'s timestamp. Panics on length mismatch (debug builds).
    pub fn difference(&self, other: &FieldState) -> FieldState {
        debug_assert_eq!(self.n(), other.n());
        FieldState {
            t: self.t,
            u: self.u.iter().zip(&other.u).map(|(a, b)| a - b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Initial displacement `A exp(-r^2 / (2 w^2))`, zero velocity. Smooth,
/// effectively localized but with infinite tails.
pub fn gaussian_data(grid: &RadialGrid, amplitude: f64, width: f64) -> FieldState {
    debug_assert!(width > 0.0);
    let u = grid
        .nodes()
        .iter()
        .map(|&r| amplitude * (-r * r / (2.0 * width * width)).exp())
        .collect();
    FieldState {
        t: 0.0,
        u,
        v: vec![0.0; grid.n()],
    }
}

/// Initial displacement `A exp(1 - 1/(1 - (r/w)^2))` for `r < w`, identically
/// zero outside — a smooth bump of *exactly* compact support, normalized so
/// the peak value is `A`. Zero velocity. The sharp support makes this the
/// right probe for finite-speed-of-propagation checks, where a Gaussian's
/// thresholded support creeps for reasons that have nothing to do with the
/// light cone.
pub fn bump_data(grid: &RadialGrid, amplitude: f64, width: f64) -> FieldState {
    debug_assert!(width > 0.0);
    let u = grid
        .nodes()
        .iter()
        .map(|&r| {
            let x = r / width;
            if x < 1.0 {
                amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp()
            } else {
                0.0
            }
        })
        .collect();
    FieldState {
        t: 0.0,
        u,
        v: vec![0.0; grid.n()],
    }
}

/// Initial displacement `A v_k` (the `k`-th Laplacian eigenmode), zero
/// velocity. Under the *linear* flow this evolves as a pure standing wave
/// `A cos(sqrt(mu_k) t) v_k`, which makes it the sharpest test signal for
/// propagator and dispersion checks.
pub fn mode_data(basis: &SpectralBasis, amplitude: f64, k: usize) -> Result<FieldState> {
    if k >= basis.len() {
        return Err(Error::SnapshotIndex {
            index: k,
            len: basis.len(),
        });
    }
    let u = basis.eigenvector(k).iter().map(|&x| amplitude * x).collect();
    Ok(FieldState {
        t: 0.0,
        u,
        v: vec![0.0; basis.len()],
    })
}
