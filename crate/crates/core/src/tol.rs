//! Named tolerances used by the verification suites.
//!
//! Each constant records where the number comes from, so no check carries an
//! unexplained magic threshold.

/// Partition-of-unity exactness. The translate-sum construction is exact up to
/// a handful of f64 roundings per point.
pub const PARTITION_SUM: f64 = 1e-12;

/// Physical -> spectral -> physical round trip, relative to the field norm.
pub const FIELD_ROUNDTRIP: f64 = 1e-12;

/// Vanishing of conservative quartic symbols on the resonant set.
pub const RESONANT_VANISHING: f64 = 1e-10;

/// Precondition tolerance when validating an input to the division algorithm.
pub const DIVISION_PRECONDITION: f64 = 1e-8;

/// Relative residual of the division representation on sampled quadruples.
pub const DIVISION_RESIDUAL: f64 = 1e-6;

/// Imaginary contamination allowed in real-valued densities, times the scale.
pub const DENSITY_REALNESS: f64 = 1e-10;

/// Mass drift for the constant-symbol (integrable) control run over T = 10.
pub const INTEGRABLE_MASS_DRIFT: f64 = 1e-9;

/// Relative agreement of the sextic interaction term with the L^6 mass in the
/// integrable case.
pub const J6_INTEGRABLE: f64 = 1e-6;

/// Relative flux-identity residual floor at the pinned step size.
pub const FLUX_RESIDUAL: f64 = 1e-6;

/// Invariance of interaction components under shifts of the recentering
/// frequency.
pub const XI0_INVARIANCE: f64 = 1e-9;

/// Signed floor for the quartic interaction term, times the scale.
pub const J4_POSITIVITY: f64 = -1e-12;

/// Deviation of the assembled sextic diagonal trace from `a0^4 c`.
pub const DIAGONAL_TRACE: f64 = 1e-6;

/// Relative match of d/dt of the interaction functional against the quartic
/// term for linear flows, after step refinement.
pub const LINEAR_MORAWETZ: f64 = 1e-3;

/// Phase-rotation equivariance of the flow.
pub const PHASE_ROTATION: f64 = 1e-10;

/// Galilean covariance checks (solver and norms).
pub const GALILEAN: f64 = 1e-8;

/// Observed temporal convergence order window for the RK4 integrator.
pub const ORDER_WINDOW: (f64, f64) = (3.5, 4.5);

/// Scaling-exponent windows for the raw and corrected mass drifts.
pub const MASS_DRIFT_SLOPE: (f64, f64) = (3.5, 4.5);
pub const MODIFIED_DRIFT_SLOPE: (f64, f64) = (5.25, 6.75);

/// Minimum regression quality for the scaling suite.
pub const SLOPE_R2: f64 = 0.98;

/// Allowed max/min spread of separation-normalized bilinear ratios.
pub const BILINEAR_SPREAD: f64 = 8.0;
