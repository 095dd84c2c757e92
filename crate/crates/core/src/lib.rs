//! Steady-state quantum correlations of a three-mode bosonic system with
//! closed-loop coupling.
//!
//! Modes `a` and `b` interact directly through a two-mode-squeezing term of
//! strength `lambda` and phase `phi`, and indirectly through a damped
//! intermediate mode `c` (parametric coupling `g_a` to `a`, beam-splitter
//! coupling `g_b` to `b`). The relative phase `phi` sets whether the two paths
//! interfere constructively or destructively.
//!
//! The pipeline is
//!
//! 1. [`model`]: drift and diffusion matrices, stability verdict;
//! 2. [`lyapunov`]: steady-state covariance from `MV + VMᵀ = -D`;
//! 3. [`measures`]: logarithmic negativity, Gaussian steering in both
//!    directions, moment-based criteria and the steering regime for a mode pair;
//! 4. [`analytic`]: closed-form moments at `phi = π/2 + nπ`, used as an oracle;
//! 5. [`sweep`] / [`figures`]: parallel parameter grids;
//! 6. [`io`]: configuration parsing and CSV/JSON/SVG output.
//!
//! Quadratures are `X = (j + j†)/√2`, `Y = (j - j†)/(√2 i)`, so the vacuum
//! variance is `1/2`.

pub mod analytic;
pub mod error;
pub mod figures;
pub mod io;
pub mod lyapunov;
pub mod measures;
pub mod model;
pub mod selftest;
pub mod sweep;

pub use analytic::{analytic_moments, tmss_only_steering_conditions, AnalyticMoments};
pub use error::{Error, Result};
pub use figures::{reproduce_figure, FigureId, FigureOutput, FigurePanel};
pub use lyapunov::{
    solve_steady_state, solve_steady_state_with, verify_physicality, CovarianceMatrix,
    LyapunovMethod, SymplecticSpectrum,
};
pub use measures::{
    classify_regime, correlation_report, gaussian_steering, hz_criteria, log_negativity,
    moments_from_cm, reduce_pair, CorrelationReport, CriterionFlags, Direction, ModePair,
    PairMoments, ReducedCM, Regime,
};
pub use model::{
    build_diffusion_matrix, build_drift_matrix, check_stability, thermal_occupation,
    DiffusionMatrix, DriftMatrix, StabilityReport, SystemParams,
};
pub use sweep::{run_sweep, Axis, SweepParam, SweepResult, SweepRow, SweepSpec};
