//! Two-mode correlation measures on the reduced covariance matrix of a pair.
//!
//! The steering measure is the Rényi-2 Gaussian steerability
//! `G^{1→2} = max{0, S(2 V_1) - S(2 V)}`, `S(σ) = ½ ln det σ`. The factor 2
//! converts the vacuum-variance-1/2 convention used here to the
//! vacuum-variance-1 convention in which the measure is usually stated.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::lyapunov::{CovarianceMatrix, SYMMETRY_TOL};

/// Measures in `[-CLAMP_TOL, 0]` are reported as exactly zero.
pub const CLAMP_TOL: f64 = 1e-9;
/// Strictness margin for the moment inequalities.
pub const CRITERION_TOL: f64 = 1e-9;
/// Steering values at or below this count as absent.
pub const REGIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModePair {
    AB,
    AC,
    BC,
}

impl ModePair {
    pub const ALL: [ModePair; 3] = [ModePair::AB, ModePair::AC, ModePair::BC];

    /// Mode indices `(first, second)` with `a = 0, b = 1, c = 2`.
    pub fn modes(self) -> (usize, usize) {
        match self {
            ModePair::AB => (0, 1),
            ModePair::AC => (0, 2),
            ModePair::BC => (1, 2),
        }
    }

    /// Rows/columns of the full covariance matrix kept by the reduction.
    pub fn indices(self) -> [usize; 4] {
        let (i, j) = self.modes();
        [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    }

    pub fn label(self) -> &'static str {
        match self {
            ModePair::AB => "ab",
            ModePair::AC => "ac",
            ModePair::BC => "bc",
        }
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ab" | "a,b" | "(a,b)" => Ok(ModePair::AB),
            "ac" | "a,c" | "(a,c)" => Ok(ModePair::AC),
            "bc" | "b,c" | "(b,c)" => Ok(ModePair::BC),
            other => Err(Error::Contract(format!(
                "unknown mode pair `{other}` (expected ab, ac or bc)"
            ))),
        }
    }
}

impl TryFrom<String> for ModePair {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModePair> for String {
    fn from(p: ModePair) -> String {
        p.label().to_owned()
    }
}

/// Covariance matrix of two modes, `[[va, vab], [vabᵀ, vb]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCM {
    pub pair: ModePair,
    pub va: Matrix2<f64>,
    pub vb: Matrix2<f64>,
    pub vab: Matrix2<f64>,
}

impl ReducedCM {
    pub fn from_blocks(
        pair: ModePair,
        va: Matrix2<f64>,
        vb: Matrix2<f64>,
        vab: Matrix2<f64>,
    ) -> Result<Self> {
        let asym = (va - va.transpose())
            .amax()
            .max((vb - vb.transpose()).amax());
        if asym > SYMMETRY_TOL {
            return Err(Error::Contract(format!(
                "local blocks of the reduced covariance matrix are not symmetric ({asym:e})"
            )));
        }
        Ok(Self { pair, va, vb, vab })
    }

    pub fn full(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.va);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.vb);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.vab);
        m.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.vab.transpose());
        m
    }

    pub fn det(&self) -> f64 {
        det4(&self.full())
    }
}

pub fn reduce_pair(v: &CovarianceMatrix, pair: ModePair) -> ReducedCM {
    let m = v.matrix();
    let (i, j) = pair.modes();
    ReducedCM {
        pair,
        va: m.fixed_view::<2, 2>(2 * i, 2 * i).into_owned(),
        vb: m.fixed_view::<2, 2>(2 * j, 2 * j).into_owned(),
        vab: m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned(),
    }
}

fn det2(m: &Matrix2<f64>) -> f64 {
    f64::from(det2_dd(m))
}

/// 2×2 determinant carried in double-double; each product is exact.
fn det2_dd(m: &Matrix2<f64>) -> TwoFloat {
    TwoFloat::new_mul(m[(0, 0)], m[(1, 1)]) - TwoFloat::new_mul(m[(0, 1)], m[(1, 0)])
}

/// Laplace expansion in complementary 2×2 minors of the first two rows,
/// evaluated in double-double so the cancellation between terms of size
/// `|V|⁴` does not eat into a much smaller determinant.
fn det4(m: &Matrix4<f64>) -> f64 {
    f64::from(det4_dd(m))
}

fn det4_dd(m: &Matrix4<f64>) -> TwoFloat {
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
        TwoFloat::new_mul(m[(r0, c0)], m[(r1, c1)]) - TwoFloat::new_mul(m[(r0, c1)], m[(r1, c0)])
    };
    minor(0, 1, 0, 1) * minor(2, 3, 2, 3) - minor(0, 1, 0, 2) * minor(2, 3, 1, 3)
        + minor(0, 1, 0, 3) * minor(2, 3, 1, 2)
        + minor(0, 1, 1, 2) * minor(2, 3, 0, 3)
        - minor(0, 1, 1, 3) * minor(2, 3, 0, 2)
        + minor(0, 1, 2, 3) * minor(2, 3, 0, 1)
}

/// Smallest symplectic eigenvalue of the partial transpose. With
/// `Σ = det V_a + det V_b - 2 det V_ab`, `η⁻² = (Σ - sqrt(Σ² - 4 det V)) / 2`,
/// evaluated as `2 det V / (Σ + sqrt(Σ² - 4 det V))`.
pub fn partial_transpose_min_eigenvalue(r: &ReducedCM) -> Result<f64> {
    let sigma = det2_dd(&r.va) + det2_dd(&r.vb) - det2_dd(&r.vab) * 2.0;
    let det = det4_dd(&r.full());
    let disc = f64::from(sigma * sigma - det * 4.0);
    let (sigma, det) = (f64::from(sigma), f64::from(det));
    let scale = sigma.abs().max(1.0);
    if disc < -CLAMP_TOL * scale * scale {
        return Err(Error::Unphysical(format!(
            "negative discriminant {disc:e} in the partially transposed spectrum"
        )));
    }
    let denom = sigma + disc.max(0.0).sqrt();
    if det <= 0.0 || denom <= 0.0 {
        return Err(Error::Unphysical(format!(
            "partially transposed spectrum is not positive (det V = {det:e}, Σ = {sigma:e})"
        )));
    }
    Ok((2.0 * det / denom).sqrt())
}

/// `E_N = max{0, -ln 2η⁻}`.
pub fn log_negativity(r: &ReducedCM) -> Result<f64> {
    let eta = partial_transpose_min_eigenvalue(r)?;
    if eta <= 0.0 {
        return Err(Error::Unphysical(
            "partially transposed symplectic eigenvalue vanishes".into(),
        ));
    }
    Ok(clamp_measure(-(2.0 * eta).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// First mode of the pair steers the second.
    Forward,
    /// Second mode steers the first.
    Backward,
}

pub fn gaussian_steering(r: &ReducedCM, direction: Direction) -> Result<f64> {
    let steering_block = match direction {
        Direction::Forward => &r.va,
        Direction::Backward => &r.vb,
    };
    let det_local = 4.0 * det2(steering_block);
    let det_joint = 16.0 * r.det();
    if det_local <= 0.0 || det_joint <= 0.0 {
        return Err(Error::numerical(
            "Gaussian steering",
            format!(
                "non-positive determinant (det 2V_local = {det_local:e}, det 2V = {det_joint:e})"
            ),
        ));
    }
    Ok(clamp_measure(0.5 * det_local.ln() - 0.5 * det_joint.ln()))
}

fn clamp_measure(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x
    }
}

/// Populations `⟨j†j⟩` of the two modes and the cross-correlation `⟨j k⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    pub n_first: f64,
    pub n_second: f64,
    pub corr: Complex64,
}

impl PairMoments {
    pub fn abs_corr(&self) -> f64 {
        self.corr.norm()
    }
}

pub fn moments_from_cm(r: &ReducedCM) -> Result<PairMoments> {
    let population = |block: &Matrix2<f64>, which: &str| {
        let n = 0.5 * (block[(0, 0)] + block[(1, 1)] - 1.0);
        if n < -CLAMP_TOL {
            return Err(Error::Unphysical(format!(
                "negative population {n:e} for the {which} mode"
            )));
        }
        Ok(n.max(0.0))
    };
    let n_first = population(&r.va, "first")?;
    let n_second = population(&r.vb, "second")?;
    let x = &r.vab;
    let corr = Complex64::new(0.5 * (x[(0, 0)] - x[(1, 1)]), 0.5 * (x[(0, 1)] + x[(1, 0)]));
    Ok(PairMoments {
        n_first,
        n_second,
        corr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionFlags {
    pub entangled: bool,
    pub steer_fwd: bool,
    pub steer_bwd: bool,
}

/// `|⟨jk⟩|` minus each moment threshold: entanglement `sqrt(n₁n₂)`,
/// forward steering `sqrt(n₂(n₁+½))`, backward steering `sqrt(n₁(n₂+½))`.
pub fn criterion_margins(m: &PairMoments) -> [f64; 3] {
    let c = m.abs_corr();
    let (n1, n2) = (m.n_first, m.n_second);
    [
        c - (n1 * n2).sqrt(),
        c - (n2 * (n1 + 0.5)).sqrt(),
        c - (n1 * (n2 + 0.5)).sqrt(),
    ]
}

pub fn hz_criteria(m: &PairMoments) -> CriterionFlags {
    let [e, f, b] = criterion_margins(m);
    CriterionFlags {
        entangled: e > CRITERION_TOL,
        steer_fwd: f > CRITERION_TOL,
        steer_bwd: b > CRITERION_TOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    TwoWay,
    OneWayForward,
    OneWayBackward,
    NoWay,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::TwoWay => "two-way",
            Regime::OneWayForward => "one-way-forward",
            Regime::OneWayBackward => "one-way-backward",
            Regime::NoWay => "no-way",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify_regime(g_fwd: f64, g_bwd: f64) -> Regime {
    match (g_fwd > REGIME_TOL, g_bwd > REGIME_TOL) {
        (true, true) => Regime::TwoWay,
        (true, false) => Regime::OneWayForward,
        (false, true) => Regime::OneWayBackward,
        (false, false) => Regime::NoWay,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pair: ModePair,
    pub e_n: f64,
    pub g_fwd: f64,
    pub g_bwd: f64,
    pub regime: Regime,
    pub criteria: CriterionFlags,
    pub moments: PairMoments,
}

pub fn pair_report(r: &ReducedCM) -> Result<CorrelationReport> {
    let e_n = log_negativity(r)?;
    let g_fwd = gaussian_steering(r, Direction::Forward)?;
    let g_bwd = gaussian_steering(r, Direction::Backward)?;
    let moments = moments_from_cm(r)?;
    Ok(CorrelationReport {
        pair: r.pair,
        e_n,
        g_fwd,
        g_bwd,
        regime: classify_regime(g_fwd, g_bwd),
        criteria: hz_criteria(&moments),
        moments,
    })
}

pub fn correlation_report(v: &CovarianceMatrix, pair: ModePair) -> Result<CorrelationReport> {
    pair_report(&reduce_pair(v, pair))
}
