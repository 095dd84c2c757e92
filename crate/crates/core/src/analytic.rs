//! Closed-form steady-state moments of the `(a, b)` pair.
//!
//! At `phi = π/2 + nπ` the drift matrix splits into two 3×3 blocks and the
//! populations and `⟨ab⟩` have rational closed forms. Without the mediated
//! path (`g_a = g_b = 0`) closed forms exist at every phase. Both are
//! independent of the Lyapunov solver and serve as its oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticMoments {
    pub n_a: f64,
    pub n_b: f64,
    /// `⟨ab⟩`; real at these phases.
    pub corr: Complex64,
    /// Common denominator; positive for every stable system.
    pub de: f64,
    /// `sin phi`, `+1` (destructive) or `-1` (constructive).
    pub sin_phi: f64,
}

/// The two factors whose product is the denominator `De`. A system at
/// `phi = π/2 + nπ` is stable iff both are negative.
pub fn denominator_factors(p: &SystemParams) -> [f64; 2] {
    let SystemParams {
        kappa_a: ka,
        kappa_b: kb,
        gamma_c: gc,
        lambda: l,
        g_a: ga,
        g_b: gb,
        ..
    } = *p;
    let (l2, ga2, gb2) = (l * l, ga * ga, gb * gb);
    [
        kb * ga2 - ka * gb2 - gc * ka * kb + gc * l2,
        (ka + gc) * ga2 - (kb + gc) * gb2 + (l2 - (ka + gc) * (kb + gc)) * (ka + kb),
    ]
}

pub fn denominator(p: &SystemParams) -> f64 {
    let [f1, f2] = denominator_factors(p);
    f1 * f2
}

pub fn analytic_moments(p: &SystemParams) -> Result<AnalyticMoments> {
    p.validate()?;
    let s = p.quadrature_phase_sign().ok_or_else(|| {
        Error::Contract(format!(
            "closed-form moments need phi = π/2 + nπ, got phi = {}",
            p.phi
        ))
    })?;
    if p.nbar_a != 0.0 || p.nbar_b != 0.0 {
        return Err(Error::Contract(
            "closed-form moments assume zero thermal occupation on modes a and b".into(),
        ));
    }
    let [f1, f2] = denominator_factors(p);
    if !(f1 < 0.0 && f2 < 0.0) {
        return Err(Error::Unstable {
            max_real_part: f64::NAN,
        });
    }
    let de = f1 * f2;

    let SystemParams {
        kappa_a: ka,
        kappa_b: kb,
        gamma_c: gc,
        lambda: l,
        g_a: ga,
        g_b: gb,
        nbar_c: n,
        ..
    } = *p;
    let (l2, l3, l4) = (l * l, l * l * l, l * l * l * l);
    let (ga2, gb2) = (ga * ga, gb * gb);
    let sum = ka + kb + gc;
    let cross = ka * gb2 - kb * ga2;

    let n_a = (ga2 * gb2 * sum * kb
        + ga2 * gc * (n + 1.0) * (cross + kb * (kb + gc) * (ka + kb))
        + l2 * (kb * (cross + gc * (ka + gc) * (kb + gc))
            + gc * (n + 1.0) * (sum * gb2 - gc * ga2))
        - l4 * kb * gc
        - 2.0 * l * n * kb * gc * ga * gb * sum * s)
        / de;

    let n_b = (ga2 * gb2 * sum * ka
        + gb2 * gc * n * (cross + ka * (ka + gc) * (ka + kb))
        + l2 * (ka * (cross + gc * (ka + gc) * (kb + gc)) + gc * n * (sum * ga2 - gc * gb2))
        - l4 * ka * gc
        - 2.0 * l * (n + 1.0) * ka * gc * ga * gb * sum * s)
        / de;

    let corr = -(ga * gb * ka * (kb * ga2 + (kb + gc) * (gb2 + kb * gc))
        + ga * gb * gc * n * (cross + ka * kb * (ka + kb + 2.0 * gc))
        + l * s
            * (kb * kb * ka * ga2
                - ka * (gb2 + kb * gc) * (ka + gc) * (kb + gc)
                - gc * n * sum * (ka * gb2 + kb * ga2))
        + l3 * s * ka * kb * gc
        + l2 * ga * gb * gc * (ka * (n + 1.0) + kb * n))
        / de;

    Ok(AnalyticMoments {
        n_a,
        n_b,
        corr: Complex64::new(corr, 0.0),
        de,
        sin_phi: s,
    })
}

fn require_direct_path_only(p: &SystemParams) -> Result<()> {
    p.validate()?;
    if p.g_a != 0.0 || p.g_b != 0.0 {
        return Err(Error::Contract(format!(
            "direct-path-only formulas need g_a = g_b = 0, got g_a = {}, g_b = {}",
            p.g_a, p.g_b
        )));
    }
    if p.lambda * p.lambda >= p.kappa_a * p.kappa_b {
        return Err(Error::Unstable {
            max_real_part: f64::NAN,
        });
    }
    Ok(())
}

/// Populations and `⟨ab⟩` with only the direct squeezing path, at any `phi`.
/// Mode `c` decouples, so its occupation plays no role; modes `a` and `b`
/// must be at zero temperature.
pub fn tmss_only_moments(p: &SystemParams) -> Result<(f64, f64, Complex64)> {
    require_direct_path_only(p)?;
    if p.nbar_a != 0.0 || p.nbar_b != 0.0 {
        return Err(Error::Contract(
            "direct-path-only moments assume zero thermal occupation on modes a and b".into(),
        ));
    }
    let (ka, kb, l) = (p.kappa_a, p.kappa_b, p.lambda);
    let den = (ka + kb) * (ka * kb - l * l);
    let (s, c) = p.phi.sin_cos();
    Ok((
        kb * l * l / den,
        ka * l * l / den,
        Complex64::new(s, -c) * (ka * kb * l / den),
    ))
}

/// Sign conditions for forward (`a → b`) and backward (`b → a`) steering with
/// only the direct path.
pub fn tmss_only_steering_conditions(p: &SystemParams) -> Result<(bool, bool)> {
    require_direct_path_only(p)?;
    let (ka, kb, l) = (p.kappa_a, p.kappa_b, p.lambda);
    let margin = ka * kb - l * l;
    Ok(((kb - ka) * margin > 0.0, (ka - kb) * margin > 0.0))
}
