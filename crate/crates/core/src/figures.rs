//! Preset sweeps for the published figure set.
//!
//! Caption parameters are fixed; the horizontal-axis extents are not given
//! numerically in the captions, so the ranges below are inferred defaults.
//! All rates are in units of `kappa_a = kappa_b = 1`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::ModePair;
use crate::model::SystemParams;
use crate::sweep::{run_sweep, Axis, SweepParam, SweepResult, SweepSpec};

pub const PHASE_POINTS: usize = 629;
pub const FIGURE_POINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Fig6a,
    Fig6b,
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 9] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig6a,
        FigureId::Fig6b,
        FigureId::Fig7,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FigureId::Fig2a => "2a",
            FigureId::Fig2b => "2b",
            FigureId::Fig3 => "3",
            FigureId::Fig4 => "4",
            FigureId::Fig5a => "5a",
            FigureId::Fig5b => "5b",
            FigureId::Fig6a => "6a",
            FigureId::Fig6b => "6b",
            FigureId::Fig7 => "7",
        }
    }

    /// Named sweeps making up the figure.
    pub fn panels(self) -> Vec<(String, SweepSpec)> {
        let ab = vec![ModePair::AB];
        match self {
            FigureId::Fig2a | FigureId::Fig2b => {
                let lambda = if self == FigureId::Fig2a { 0.4 } else { 0.605 };
                vec![(
                    "phase".into(),
                    SweepSpec {
                        base: phase_base(2.0).with_lambda(lambda),
                        axis1: phase_axis(),
                        axis2: None,
                        pairs: ab,
                    },
                )]
            }
            FigureId::Fig3 => [("destructive", FRAC_PI_2), ("constructive", 1.5 * PI)]
                .into_iter()
                .map(|(name, phi)| {
                    (
                        name.to_string(),
                        SweepSpec {
                            base: strong_base(1.0, phi),
                            axis1: Axis::linspace(SweepParam::GammaC, 0.01, 20.0, FIGURE_POINTS),
                            axis2: Some(Axis::new(SweepParam::Lambda, vec![0.0, 0.5, 1.0, 1.5])),
                            pairs: ab.clone(),
                        },
                    )
                })
                .collect(),
            FigureId::Fig4 => vec![(
                "constructive".into(),
                SweepSpec {
                    base: strong_base(1.0, 1.5 * PI),
                    axis1: Axis::linspace(SweepParam::GammaC, 0.001, 0.1, FIGURE_POINTS),
                    axis2: Some(Axis::new(SweepParam::Lambda, vec![0.0, 1.0])),
                    pairs: ab,
                },
            )],
            FigureId::Fig5a | FigureId::Fig5b => {
                let phi = if self == FigureId::Fig5a {
                    FRAC_PI_2
                } else {
                    1.5 * PI
                };
                let interfering = strong_base(5.0, phi);
                let direct = SystemParams {
                    g_a: 0.0,
                    g_b: 0.0,
                    ..interfering
                };
                [("interfering", interfering), ("direct-only", direct)]
                    .into_iter()
                    .map(|(name, base)| {
                        (
                            name.to_string(),
                            SweepSpec {
                                base,
                                axis1: Axis::linspace(SweepParam::Lambda, 0.0, 3.0, FIGURE_POINTS),
                                axis2: None,
                                pairs: ab.clone(),
                            },
                        )
                    })
                    .collect()
            }
            FigureId::Fig6a | FigureId::Fig6b => {
                let axis1 = if self == FigureId::Fig6a {
                    Axis::linspace(SweepParam::NbarC, 0.0, 4.0, FIGURE_POINTS)
                } else {
                    Axis::linspace(SweepParam::Nbar, 0.0, 1.5, FIGURE_POINTS)
                };
                vec![(
                    "thermal".into(),
                    SweepSpec {
                        base: strong_base(5.0, 1.5 * PI),
                        axis1,
                        axis2: Some(Axis::new(SweepParam::Lambda, vec![0.0, 1.5])),
                        pairs: ab,
                    },
                )]
            }
            FigureId::Fig7 => vec![(
                "phase".into(),
                SweepSpec {
                    base: phase_base(15.0),
                    axis1: phase_axis(),
                    axis2: None,
                    pairs: vec![ModePair::AB, ModePair::AC],
                },
            )],
        }
    }
}

fn phase_axis() -> Axis {
    Axis::linspace(SweepParam::Phi, 0.0, TAU, PHASE_POINTS)
}

/// `g_a = 3.2, g_b = 5, lambda = 0.4`, zero temperature.
fn phase_base(gamma_c: f64) -> SystemParams {
    SystemParams::new(1.0, 1.0, gamma_c, 0.4, 0.0, 3.2, 5.0)
}

/// `g_a = 8.3, g_b = 10`, zero temperature, `lambda = 0`.
fn strong_base(gamma_c: f64, phi: f64) -> SystemParams {
    SystemParams::new(1.0, 1.0, gamma_c, 0.0, phi, 8.3, 10.0)
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().trim_start_matches("fig").trim_start_matches("Fig");
        FigureId::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(key))
            .ok_or_else(|| {
                Error::Contract(format!(
                    "unknown figure `{s}` (expected one of 2a, 2b, 3, 4, 5a, 5b, 6a, 6b, 7)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePanel {
    pub name: String,
    pub spec: SweepSpec,
    pub result: SweepResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureOutput {
    pub id: FigureId,
    pub panels: Vec<FigurePanel>,
}

impl FigureOutput {
    pub fn panel(&self, name: &str) -> Option<&FigurePanel> {
        self.panels.iter().find(|p| p.name == name)
    }
}

pub fn reproduce_figure(id: FigureId, workers: usize) -> Result<FigureOutput> {
    let panels = id
        .panels()
        .into_iter()
        .map(|(name, spec)| {
            let result = run_sweep(&spec, workers)?;
            Ok(FigurePanel { name, spec, result })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureOutput { id, panels })
}
