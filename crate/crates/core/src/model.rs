//! System parameters, drift/diffusion matrices and the stability verdict.
//!
//! Quadrature ordering everywhere is `(X_a, Y_a, X_b, Y_b, X_c, Y_c)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use nalgebra::{Complex, DMatrix, Matrix6, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat6 = Matrix6<f64>;

/// Eigenvalue real parts below `-STABILITY_MARGIN` are declared stable.
pub const STABILITY_MARGIN: f64 = 1e-12;

/// Phase tolerance for recognising `phi = π/2 + nπ`.
pub const QUADRATURE_PHASE_TOL: f64 = 1e-9;

const HBAR: f64 = 1.054_571_817e-34;
const K_BOLTZMANN: f64 = 1.380_649e-23;

/// One instance of the closed-loop system. Rates and couplings share a single
/// (arbitrary) unit; occupations are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub gamma_c: f64,
    /// Direct two-mode-squeezing strength between `a` and `b`.
    pub lambda: f64,
    /// Relative phase between the direct and the mediated path, in radians.
    pub phi: f64,
    /// Parametric coupling `a`–`c`.
    pub g_a: f64,
    /// Beam-splitter coupling `b`–`c`.
    pub g_b: f64,
    #[serde(default)]
    pub nbar_a: f64,
    #[serde(default)]
    pub nbar_b: f64,
    #[serde(default)]
    pub nbar_c: f64,
}

impl SystemParams {
    /// Zero-temperature parameters with the given rates and couplings.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kappa_a: f64,
        kappa_b: f64,
        gamma_c: f64,
        lambda: f64,
        phi: f64,
        g_a: f64,
        g_b: f64,
    ) -> Self {
        Self {
            kappa_a,
            kappa_b,
            gamma_c,
            lambda,
            phi,
            g_a,
            g_b,
            nbar_a: 0.0,
            nbar_b: 0.0,
            nbar_c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("gamma_c", self.gamma_c),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::ParameterDomain {
                    name,
                    value,
                    reason: "damping rates must be finite and strictly positive",
                });
            }
        }
        let non_negative = [
            ("lambda", self.lambda),
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("nbar_a", self.nbar_a),
            ("nbar_b", self.nbar_b),
            ("nbar_c", self.nbar_c),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::ParameterDomain {
                    name,
                    value,
                    reason: "couplings and occupations must be finite and non-negative",
                });
            }
        }
        if !self.phi.is_finite() {
            return Err(Error::ParameterDomain {
                name: "phi",
                value: self.phi,
                reason: "phase must be finite",
            });
        }
        Ok(())
    }

    /// `phi` reduced to `[0, 2π)`.
    pub fn phi_reduced(&self) -> f64 {
        self.phi.rem_euclid(TAU)
    }

    /// `Some(±1)` when `phi` is within [`QUADRATURE_PHASE_TOL`] of `π/2 + nπ`.
    pub fn quadrature_phase_sign(&self) -> Option<f64> {
        let offset = (self.phi - FRAC_PI_2).rem_euclid(PI);
        let distance = offset.min(PI - offset);
        if distance > QUADRATURE_PHASE_TOL {
            return None;
        }
        Some(self.phi.sin().signum())
    }

    /// Same system with every rate and coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kappa_a: self.kappa_a * factor,
            kappa_b: self.kappa_b * factor,
            gamma_c: self.gamma_c * factor,
            lambda: self.lambda * factor,
            g_a: self.g_a * factor,
            g_b: self.g_b * factor,
            ..*self
        }
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

/// Drift matrix `M` of the linearised quadrature Langevin equations
/// `du/dt = M u + noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(Mat6);

impl DriftMatrix {
    pub fn from_matrix(m: Mat6) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }

    /// Eigenvalues of `M`. Fails with the matrix echoed if the Schur
    /// iteration does not converge.
    pub fn eigenvalues(&self) -> Result<Vec<Complex<f64>>> {
        let (_, t) =
            real_schur(&DMatrix::from_column_slice(6, 6, self.0.as_slice())).ok_or_else(|| {
                Error::numerical(
                    "drift eigenvalues",
                    format!("Schur iteration did not converge for M = {}", self.0),
                )
            })?;
        Ok(quasi_triangular_eigenvalues(&t))
    }

    pub fn max_real_part(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Real Schur form `m = q t qᵀ`. The Francis iteration can stall on
/// matrices with repeated eigenvalue pairs; it is then retried on fixed
/// Householder similarity transforms of `m`.
pub(crate) fn real_schur(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        return Some(s.unpack());
    }
    let n = m.nrows();
    (1..=4).find_map(|k| {
        let v = DMatrix::from_fn(n, 1, |i, _| {
            (0.7 * (k * (i + 1)) as f64).cos() + 0.1 * k as f64
        });
        let p = DMatrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
        let (q, t) = Schur::try_new(&p * m * &p, f64::EPSILON, 10_000)?.unpack();
        Some((p * q, t))
    })
}

/// Eigenvalues of a real quasi upper triangular matrix.
pub(crate) fn quasi_triangular_eigenvalues(t: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = t.nrows();
    let tol = f64::EPSILON * t.amax();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > tol {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mean = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc < 0.0 {
                let im = (-disc).sqrt();
                out.push(Complex::new(mean, im));
                out.push(Complex::new(mean, -im));
            } else {
                let r = disc.sqrt();
                out.push(Complex::new(mean + r, 0.0));
                out.push(Complex::new(mean - r, 0.0));
            }
            i += 2;
        } else {
            out.push(Complex::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// Diagonal diffusion matrix `D` of the stationary noise correlations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(Mat6);

impl DiffusionMatrix {
    pub fn from_matrix(d: Mat6) -> Self {
        Self(d)
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }
}

pub fn build_drift_matrix(params: &SystemParams) -> Result<DriftMatrix> {
    params.validate()?;
    let SystemParams {
        kappa_a: ka,
        kappa_b: kb,
        gamma_c: gc,
        lambda: l,
        g_a: ga,
        g_b: gb,
        ..
    } = *params;
    let (s, c) = params.phi_reduced().sin_cos();
    #[rustfmt::skip]
    let coefficients = Mat6::new(
        ka,      0.0,     -l * s,  l * c,   0.0, ga,
        0.0,     ka,      l * c,   l * s,   ga,  0.0,
        -l * s,  l * c,   kb,      0.0,     0.0, -gb,
        l * c,   l * s,   0.0,     kb,      gb,  0.0,
        0.0,     ga,      0.0,     -gb,     gc,  0.0,
        ga,      0.0,     gb,      0.0,     0.0, gc,
    );
    Ok(DriftMatrix(-coefficients))
}

/// `D = diag((2n̄_j + 1) κ_j)` with each entry repeated for both quadratures.
pub fn build_diffusion_matrix(params: &SystemParams) -> Result<DiffusionMatrix> {
    params.validate()?;
    let a = (2.0 * params.nbar_a + 1.0) * params.kappa_a;
    let b = (2.0 * params.nbar_b + 1.0) * params.kappa_b;
    let c = (2.0 * params.nbar_c + 1.0) * params.gamma_c;
    Ok(DiffusionMatrix(Mat6::from_diagonal(
        &nalgebra::Vector6::new(a, a, b, b, c, c),
    )))
}

/// The two closed-form conditions valid at `phi = π/2 + nπ`. The system is
/// stable there iff both are positive.
pub fn routh_hurwitz_conditions(params: &SystemParams) -> [f64; 2] {
    let SystemParams {
        kappa_a: ka,
        kappa_b: kb,
        gamma_c: gc,
        lambda: l,
        g_a: ga,
        g_b: gb,
        ..
    } = *params;
    let (l2, ga2, gb2) = (l * l, ga * ga, gb * gb);
    [
        ka * kb * gc - ga2 * kb + gb2 * ka - l2 * gc,
        (ka + kb) * (ka + gc) * (kb + gc) - ga2 * (ka + gc) + gb2 * (kb + gc) - l2 * (ka + kb),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Eigenvalue verdict; authoritative.
    pub stable: bool,
    /// `|max_real_part| <= STABILITY_MARGIN`; such systems are reported unstable.
    pub marginal: bool,
    pub max_real_part: f64,
    pub routh_hurwitz_applicable: bool,
    pub routh_hurwitz_conditions: Option<[f64; 2]>,
    pub routh_hurwitz_stable: Option<bool>,
    /// Closed-form and eigenvalue verdicts differ on a non-marginal system.
    pub routh_hurwitz_disagrees: bool,
}

pub fn check_stability(params: &SystemParams) -> Result<StabilityReport> {
    let max_real_part = build_drift_matrix(params)?.max_real_part()?;
    let stable = max_real_part < -STABILITY_MARGIN;
    let marginal = max_real_part.abs() <= STABILITY_MARGIN;

    let applicable = params.quadrature_phase_sign().is_some();
    let conditions = applicable.then(|| routh_hurwitz_conditions(params));
    let rh_stable = conditions.map(|[c1, c2]| c1 > 0.0 && c2 > 0.0);
    let disagrees = !marginal && rh_stable.is_some_and(|rh| rh != stable);

    Ok(StabilityReport {
        stable,
        marginal,
        max_real_part,
        routh_hurwitz_applicable: applicable,
        routh_hurwitz_conditions: conditions,
        routh_hurwitz_stable: rh_stable,
        routh_hurwitz_disagrees: disagrees,
    })
}

/// Bose–Einstein occupation `1/(exp(x) - 1)` for the energy ratio
/// `x = ħω / k_B T`; `x = ∞` gives 0.
pub fn occupation_from_energy_ratio(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    1.0 / x.exp_m1()
}

/// Mean thermal occupation of a mode at angular frequency `frequency` (rad/s)
/// in a bath at `temperature` (K).
pub fn thermal_occupation(frequency: f64, temperature: f64) -> Result<f64> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::ParameterDomain {
            name: "frequency",
            value: frequency,
            reason: "angular frequency must be strictly positive",
        });
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::ParameterDomain {
            name: "temperature",
            value: temperature,
            reason: "temperature must be non-negative",
        });
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(occupation_from_energy_ratio(
        HBAR * frequency / (K_BOLTZMANN * temperature),
    ))
}

/// Temperature at which a mode of angular frequency `frequency` has energy
/// ratio `x = ħω / k_B T`.
pub fn temperature_for_energy_ratio(frequency: f64, x: f64) -> f64 {
    HBAR * frequency / (K_BOLTZMANN * x)
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kappa_a={} kappa_b={} gamma_c={} lambda={} phi={} g_a={} g_b={} nbar=({}, {}, {})",
            self.kappa_a,
            self.kappa_b,
            self.gamma_c,
            self.lambda,
            self.phi,
            self.g_a,
            self.g_b,
            self.nbar_a,
            self.nbar_b,
            self.nbar_c
        )
    }
}
