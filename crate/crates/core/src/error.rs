use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the core library.
///
/// Numerical *events* that are legitimate data — a focusing run tripping the
/// blowup threshold, for instance — are not errors and are reported through
/// run flags instead (see `evolve::RunFlags`).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension d = {0} unsupported (need d >= 3)")]
    Dimension(usize),

    #[error("dimension d = {0} unsupported for grids (need 3 <= d <= 9)")]
    GridDimension(usize),

    #[error("power p = {0} out of range (need finite p > 0)")]
    Power(f64),

    #[error("grid rejected: R_max = {r_max}, N = {n} (need finite R_max > 0 and N >= 4)")]
    GridShape { r_max: f64, n: usize },

    #[error("basis size N = {0} exceeds the dense-eigensolve budget (N <= 4096)")]
    BasisTooLarge(usize),

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(
        "eigensolve failed to converge at index {index} after {iterations} QL sweeps \
         (remaining off-diagonal {residual:.3e})"
    )]
    Eigensolve {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("window endpoint undefined for d = {d}: discriminant {disc} < 0")]
    WindowDiscriminant { d: usize, disc: f64 },

    #[error(
        "degenerate space-time exponent for d = {d}, p = {p}: denominator {denom} <= 0 \
         (p lies outside the admissible window)"
    )]
    DegenerateExponent { d: usize, p: f64, denom: f64 },

    #[error("pair (q = {q}, r = {r}) is not wave-admissible in dimension {d}")]
    NotAdmissible { q: String, r: f64, d: usize },

    #[error("CFL factor {0} out of range (need 0 < factor <= 1)")]
    CflFactor(f64),

    #[error("zero state rejected: {0}")]
    ZeroState(&'static str),

    #[error("empty or invalid time interval: {0}")]
    EmptyInterval(String),

    #[error("empty annulus: need t + eps < 1/eps - t, got t = {t}, eps = {eps}")]
    EmptyAnnulus { t: f64, eps: f64 },

    #[error("snapshot spacing {spacing} too coarse for time quadrature (limit {limit})")]
    QuadratureSpacing { spacing: f64, limit: f64 },

    #[error("snapshot index {index} out of range ({len} snapshots recorded)")]
    SnapshotIndex { index: usize, len: usize },

    #[error("wrong nonlinearity sign for this protocol: expected {expected}")]
    WrongSign { expected: &'static str },

    #[error("run touched the Dirichlet wall; the interior solution is contaminated")]
    BoundaryTouched,

    #[error("run halted by the overflow monitor at t = {t}, where this protocol needs a global solution")]
    Halted { t: f64 },

    #[error(
        "horizon T = {t} does not fit: support radius {support} + T must stay below R_max = {r_max}"
    )]
    HorizonTooLong { t: f64, r_max: f64, support: f64 },

    #[error("interval [{t0}, {t1}] shorter than 1/N(t0) = {min_len}")]
    IntervalTooShort { t0: f64, t1: f64, min_len: f64 },

    #[error("mismatched grids: basis was built on a different grid than the argument")]
    GridMismatch,
}
