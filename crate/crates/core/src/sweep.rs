//! Parallel evaluation of the full pipeline over one- or two-dimensional
//! parameter grids.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::solve_steady_state;
use crate::measures::{correlation_report, CorrelationReport, ModePair};
use crate::model::{build_diffusion_matrix, build_drift_matrix, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SweepParam {
    KappaA,
    KappaB,
    GammaC,
    Lambda,
    Phi,
    GA,
    GB,
    NbarA,
    NbarB,
    NbarC,
    /// All three occupations at once.
    Nbar,
}

impl SweepParam {
    pub const ALL: [SweepParam; 11] = [
        SweepParam::KappaA,
        SweepParam::KappaB,
        SweepParam::GammaC,
        SweepParam::Lambda,
        SweepParam::Phi,
        SweepParam::GA,
        SweepParam::GB,
        SweepParam::NbarA,
        SweepParam::NbarB,
        SweepParam::NbarC,
        SweepParam::Nbar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::KappaA => "kappa_a",
            SweepParam::KappaB => "kappa_b",
            SweepParam::GammaC => "gamma_c",
            SweepParam::Lambda => "lambda",
            SweepParam::Phi => "phi",
            SweepParam::GA => "g_a",
            SweepParam::GB => "g_b",
            SweepParam::NbarA => "nbar_a",
            SweepParam::NbarB => "nbar_b",
            SweepParam::NbarC => "nbar_c",
            SweepParam::Nbar => "nbar",
        }
    }

    pub fn apply(self, params: &mut SystemParams, value: f64) {
        match self {
            SweepParam::KappaA => params.kappa_a = value,
            SweepParam::KappaB => params.kappa_b = value,
            SweepParam::GammaC => params.gamma_c = value,
            SweepParam::Lambda => params.lambda = value,
            SweepParam::Phi => params.phi = value,
            SweepParam::GA => params.g_a = value,
            SweepParam::GB => params.g_b = value,
            SweepParam::NbarA => params.nbar_a = value,
            SweepParam::NbarB => params.nbar_b = value,
            SweepParam::NbarC => params.nbar_c = value,
            SweepParam::Nbar => {
                params.nbar_a = value;
                params.nbar_b = value;
                params.nbar_c = value;
            }
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Contract(format!("unknown sweep parameter `{s}`")))
    }
}

impl TryFrom<String> for SweepParam {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SweepParam> for String {
    fn from(p: SweepParam) -> String {
        p.name().to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Self {
        Self { param, values }
    }

    /// `points` equally spaced values on `[from, to]`, endpoints included.
    pub fn linspace(param: SweepParam, from: f64, to: f64, points: usize) -> Self {
        let values = match points {
            0 => Vec::new(),
            1 => vec![from],
            n => {
                let step = (to - from) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            to
                        } else {
                            from + step * i as f64
                        }
                    })
                    .collect()
            }
        };
        Self { param, values }
    }

    fn validate(&self, which: &str) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Contract(format!("{which} grid is empty")));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract(format!(
                "{which} grid contains a non-finite value"
            )));
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::Contract(format!(
                "{which} grid for `{}` is not strictly monotone",
                self.param
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SystemParams,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub pairs: Vec<ModePair>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate("axis1")?;
        if let Some(axis2) = &self.axis2 {
            axis2.validate("axis2")?;
            if axis2.param == self.axis1.param {
                return Err(Error::Contract(format!(
                    "axis1 and axis2 both sweep `{}`",
                    axis2.param
                )));
            }
        }
        if self.pairs.is_empty() {
            return Err(Error::Contract("no mode pairs requested".into()));
        }
        for (i, p) in self.pairs.iter().enumerate() {
            if self.pairs[..i].contains(p) {
                return Err(Error::Contract(format!("mode pair `{p}` requested twice")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axis1.values.len() * self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid coordinates of row `index`; axis1 varies fastest.
    pub fn coordinates(&self, index: usize) -> (f64, Option<f64>) {
        let n1 = self.axis1.values.len();
        let x = self.axis1.values[index % n1];
        let y = self.axis2.as_ref().map(|a| a.values[index / n1]);
        (x, y)
    }

    pub fn params_at(&self, index: usize) -> SystemParams {
        let (x, y) = self.coordinates(index);
        let mut p = self.base;
        self.axis1.param.apply(&mut p, x);
        if let (Some(axis2), Some(y)) = (&self.axis2, y) {
            axis2.param.apply(&mut p, y);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    /// `false` marks a point without a steady state; `reports` is then empty.
    pub stable: bool,
    pub reports: Vec<CorrelationReport>,
}

impl SweepRow {
    pub fn report(&self, pair: ModePair) -> Option<&CorrelationReport> {
        self.reports.iter().find(|r| r.pair == pair)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1: SweepParam,
    pub axis2: Option<SweepParam>,
    pub pairs: Vec<ModePair>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows sharing one axis2 value (or all rows for a one-axis sweep).
    pub fn series(&self, axis2: Option<f64>) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.axis2 == axis2)
    }

    /// Distinct axis2 values in row order.
    pub fn axis2_values(&self) -> Vec<Option<f64>> {
        let mut out: Vec<Option<f64>> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.axis2) {
                out.push(r.axis2);
            }
        }
        out
    }
}

/// Full pipeline for one parameter point. `Ok(None)` when the system has no
/// steady state.
pub fn evaluate_point(
    params: &SystemParams,
    pairs: &[ModePair],
) -> Result<Option<Vec<CorrelationReport>>> {
    let m = build_drift_matrix(params)?;
    let d = build_diffusion_matrix(params)?;
    let v = match solve_steady_state(&m, &d) {
        Ok(v) => v,
        Err(Error::Unstable { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    pairs
        .iter()
        .map(|&pair| correlation_report(&v, pair))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn evaluate_row(spec: &SweepSpec, index: usize) -> Result<SweepRow> {
    let (axis1, axis2) = spec.coordinates(index);
    let params = spec.params_at(index);
    let reports = evaluate_point(&params, &spec.pairs)?;
    Ok(SweepRow {
        axis1,
        axis2,
        stable: reports.is_some(),
        reports: reports.unwrap_or_default(),
    })
}

/// Evaluates every grid point on `workers` threads (0 picks the rayon
/// default). Rows come back in grid order whatever the worker count.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        (0..spec.len())
            .into_par_iter()
            .map(|i| evaluate_row(spec, i))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        axis1: spec.axis1.param,
        axis2: spec.axis2.as_ref().map(|a| a.param),
        pairs: spec.pairs.clone(),
        rows,
    })
}
