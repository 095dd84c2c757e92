//! Randomized consistency checks: closed-form moments against the Lyapunov
//! solution, the two Lyapunov solvers against each other, measure-based
//! against moment-based verdicts, and physicality of every solution.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic::analytic_moments;
use crate::error::{Error, Result};
use crate::lyapunov::{
    solve_steady_state_with, verify_physicality, CovarianceMatrix, LyapunovMethod,
};
use crate::measures::{
    correlation_report, criterion_margins, moments_from_cm, reduce_pair, ModePair,
};
use crate::model::{build_diffusion_matrix, build_drift_matrix, SystemParams};

/// Draws whose stability margin is below this are rejected.
pub const DRAW_MARGIN: f64 = 1e-9;
/// Draws with any criterion margin inside this band are excluded from the
/// equivalence check.
pub const BOUNDARY_BAND: f64 = 1e-6;
pub const ORACLE_RTOL: f64 = 1e-8;
/// Covariance entries below this fraction of the largest entry are treated
/// as structural zeros in the solver comparison.
pub const ROUNDING_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSampling {
    /// `phi` uniformly from `{π/2, 3π/2}`.
    Quadrature,
    /// `phi` uniform in `[0, 2π)`.
    Uniform,
}

/// Seeded sampler of stable parameter sets: rates in `[0.1, 20]`, couplings
/// in `[0, 20]`, `nbar_c` in `[0, 50]`, modes `a` and `b` at zero temperature.
pub struct StableSampler {
    rng: ChaCha8Rng,
    phases: PhaseSampling,
    pub rejected: usize,
}

impl StableSampler {
    pub fn new(seed: u64, phases: PhaseSampling) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            phases,
            rejected: 0,
        }
    }

    fn candidate(&mut self) -> SystemParams {
        let r = &mut self.rng;
        let phi = match self.phases {
            PhaseSampling::Quadrature => {
                if r.random_bool(0.5) {
                    FRAC_PI_2
                } else {
                    1.5 * PI
                }
            }
            PhaseSampling::Uniform => r.random_range(0.0..TAU),
        };
        SystemParams {
            nbar_c: r.random_range(0.0..=50.0),
            ..SystemParams::new(
                r.random_range(0.1..=20.0),
                r.random_range(0.1..=20.0),
                r.random_range(0.1..=20.0),
                r.random_range(0.0..=20.0),
                phi,
                r.random_range(0.0..=20.0),
                r.random_range(0.0..=20.0),
            )
        }
    }

    /// Next draw with `max Re(eig) < -DRAW_MARGIN`.
    pub fn draw(&mut self) -> Result<SystemParams> {
        loop {
            let p = self.candidate();
            if build_drift_matrix(&p)?.max_real_part()? < -DRAW_MARGIN {
                return Ok(p);
            }
            self.rejected += 1;
        }
    }
}

fn rel_err(x: f64, reference: f64) -> f64 {
    if x == reference {
        0.0
    } else {
        (x - reference).abs() / reference.abs()
    }
}

/// Relative error, except that entries at rounding level (`|reference| <=
/// floor`) are compared in absolute terms against `floor`.
fn rel_err_floored(x: f64, reference: f64, floor: f64) -> f64 {
    if reference.abs() <= floor {
        (x - reference).abs() / floor * ORACLE_RTOL
    } else {
        rel_err(x, reference)
    }
}

fn solve(p: &SystemParams, method: LyapunovMethod) -> Result<CovarianceMatrix> {
    solve_steady_state_with(&build_drift_matrix(p)?, &build_diffusion_matrix(p)?, method)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub draws: usize,
    pub excluded: usize,
    pub failures: usize,
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl CheckSummary {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            ..Default::default()
        }
    }

    fn fail(&mut self, p: &SystemParams, detail: String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(format!("{detail} at {p}"));
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Closed-form `n_a`, `n_b`, `⟨ab⟩` against the Lyapunov solution at
/// `phi ∈ {π/2, 3π/2}`, by relative error.
pub fn check_analytic_oracle(draws: usize, seed: u64) -> Result<CheckSummary> {
    let mut out = CheckSummary::new("analytic-oracle");
    let mut sampler = StableSampler::new(seed, PhaseSampling::Quadrature);
    for _ in 0..draws {
        let p = sampler.draw()?;
        let exact = analytic_moments(&p)?;
        let v = solve(&p, LyapunovMethod::default())?;
        let m = moments_from_cm(&reduce_pair(&v, ModePair::AB))?;
        let err = rel_err(m.n_first, exact.n_a)
            .max(rel_err(m.n_second, exact.n_b))
            .max((m.corr - exact.corr).norm() / exact.corr.norm());
        out.draws += 1;
        out.worst = out.worst.max(err);
        if err > ORACLE_RTOL {
            out.fail(&p, format!("relative error {err:e}"));
        }
    }
    Ok(out)
}

/// Bartels–Stewart against the vectorized solve, entrywise.
pub fn check_solver_agreement(draws: usize, seed: u64) -> Result<CheckSummary> {
    let mut out = CheckSummary::new("solver-agreement");
    let mut sampler = StableSampler::new(seed, PhaseSampling::Quadrature);
    for _ in 0..draws {
        let p = sampler.draw()?;
        let a = solve(&p, LyapunovMethod::BartelsStewart)?;
        let b = solve(&p, LyapunovMethod::Vectorized)?;
        let floor = ROUNDING_FLOOR * b.matrix().amax();
        let err = a
            .matrix()
            .iter()
            .zip(b.matrix().iter())
            .map(|(&x, &y)| rel_err_floored(x, y, floor))
            .fold(0.0, f64::max);
        out.draws += 1;
        out.worst = out.worst.max(err);
        if err > ORACLE_RTOL {
            out.fail(&p, format!("relative error {err:e}"));
        }
    }
    Ok(out)
}

/// `E_N > 0`, `G_fwd > 0`, `G_bwd > 0` against the moment criteria for the
/// `(a, b)` pair at uniformly sampled phases. Draws within `BOUNDARY_BAND` of
/// any criterion boundary (in either formulation) are excluded.
pub fn check_criterion_equivalence(draws: usize, seed: u64) -> Result<CheckSummary> {
    let mut out = CheckSummary::new("criterion-equivalence");
    let mut sampler = StableSampler::new(seed, PhaseSampling::Uniform);
    while out.draws < draws {
        let p = sampler.draw()?;
        let v = solve(&p, LyapunovMethod::default())?;
        let rep = correlation_report(&v, ModePair::AB)?;
        let margins = criterion_margins(&rep.moments);
        let measures = [rep.e_n, rep.g_fwd, rep.g_bwd];
        let near_boundary = margins.iter().any(|m| m.abs() < BOUNDARY_BAND)
            || measures.iter().any(|&x| x > 0.0 && x < BOUNDARY_BAND);
        if near_boundary {
            out.excluded += 1;
            continue;
        }
        out.draws += 1;
        let flags = [
            rep.criteria.entangled,
            rep.criteria.steer_fwd,
            rep.criteria.steer_bwd,
        ];
        for ((name, &x), flag) in ["E_N", "G_fwd", "G_bwd"].iter().zip(&measures).zip(flags) {
            if (x > 0.0) != flag {
                out.fail(
                    &p,
                    format!("{name} = {x:e} but moment criterion says {flag}"),
                );
            }
        }
    }
    Ok(out)
}

/// Symplectic eigenvalues of every solution `>= 1/2 - 1e-9`; the worst value
/// reported is the smallest symplectic eigenvalue seen.
pub fn check_physicality(draws: usize, seed: u64) -> Result<CheckSummary> {
    let mut out = CheckSummary::new("physicality");
    out.worst = f64::INFINITY;
    let mut sampler = StableSampler::new(seed, PhaseSampling::Uniform);
    for _ in 0..draws {
        let p = sampler.draw()?;
        let spectrum = match solve(&p, LyapunovMethod::default()) {
            Ok(v) => verify_physicality(&v)?,
            Err(Error::Unphysical(msg)) => {
                out.draws += 1;
                out.fail(&p, msg);
                continue;
            }
            Err(e) => return Err(e),
        };
        out.draws += 1;
        out.worst = out.worst.min(spectrum.min());
        if !spectrum.physical {
            out.fail(&p, format!("symplectic eigenvalues {:?}", spectrum.values));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckSummary>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckSummary::passed)
    }
}

pub fn run_selftest(draws: usize, seed: u64) -> Result<SelftestReport> {
    Ok(SelftestReport {
        seed,
        checks: vec![
            check_analytic_oracle(draws, seed)?,
            check_solver_agreement(draws, seed.wrapping_add(1))?,
            check_criterion_equivalence(draws, seed.wrapping_add(2))?,
            check_physicality(draws, seed.wrapping_add(3))?,
        ],
    })
}
