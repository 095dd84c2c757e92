//! Run configuration files.
//!
//! A configuration is a flat TOML document (no tables), UTF-8, with `#`
//! comments:
//!
//! ```toml
//! kappa_a = 1
//! kappa_b = 1
//! gamma_c = 2
//! lambda  = 0.4
//! phi     = "1.5pi"      # radians, or "<number>pi"
//! g_a     = 3.2
//! g_b     = 5
//! nbar_c  = 0            # nbar_a, nbar_b, nbar_c default to 0
//!
//! axis1        = "phi"   # any SystemParams field, or "nbar" for all three occupations
//! axis1_from   = "0pi"
//! axis1_to     = "2pi"
//! axis1_points = 629     # or: axis1_values = [0, "0.5pi", 1.0]
//! axis2        = "lambda"
//! axis2_values = [0, 1.5]
//!
//! pairs   = ["ab", "ac"] # default ["ab"]
//! workers = 4
//! out     = "out/fig2a"
//! format  = "both"       # csv | json | both
//! plot    = true
//! ```
//!
//! System parameters other than the occupations are required unless they are
//! swept. Every problem in the document is reported, not just the first.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use toml::{Table, Value};

use crate::io::output::OutputFormat;
use crate::measures::ModePair;
use crate::model::SystemParams;
use crate::sweep::{Axis, SweepParam, SweepSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} problem(s))", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub axis1: Option<Axis>,
    pub axis2: Option<Axis>,
    pub pairs: Vec<ModePair>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub format: Option<OutputFormat>,
    pub plot: bool,
}

impl RunConfig {
    /// The sweep described by the configuration; `None` without `axis1`.
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        Some(SweepSpec {
            base: self.params,
            axis1: self.axis1.clone()?,
            axis2: self.axis2.clone(),
            pairs: self.pairs.clone(),
        })
    }
}

const PARAM_KEYS: [&str; 10] = [
    "kappa_a", "kappa_b", "gamma_c", "lambda", "phi", "g_a", "g_b", "nbar_a", "nbar_b", "nbar_c",
];
const OTHER_KEYS: [&str; 15] = [
    "axis1",
    "axis1_values",
    "axis1_from",
    "axis1_to",
    "axis1_points",
    "axis2",
    "axis2_values",
    "axis2_from",
    "axis2_to",
    "axis2_points",
    "pairs",
    "workers",
    "out",
    "format",
    "plot",
];

/// Parses `"1.5pi"`, `"-pi"`, `"pi"` or a plain decimal.
pub fn parse_phase_literal(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Some(prefix) = t.strip_suffix("pi").or_else(|| t.strip_suffix("π")) {
        let prefix = prefix.trim().trim_end_matches('*').trim();
        let factor = match prefix {
            "" | "+" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().ok()?,
        };
        return Some(factor * PI);
    }
    t.parse::<f64>().ok()
}

struct Parser<'a> {
    text: &'a str,
    table: Table,
    errors: Vec<ConfigError>,
}

impl<'a> Parser<'a> {
    fn line_of(&self, key: &str) -> Option<usize> {
        self.text
            .lines()
            .position(|l| {
                let l = l.trim_start();
                l.strip_prefix(key)
                    .is_some_and(|rest| rest.trim_start().starts_with('='))
            })
            .map(|i| i + 1)
    }

    fn error(&mut self, key: &str, message: impl Into<String>) {
        let line = self.line_of(key);
        self.errors.push(ConfigError {
            key: Some(key.to_owned()),
            line,
            message: message.into(),
        });
    }

    fn number_value(&mut self, key: &str, value: &Value) -> Option<f64> {
        let parsed = match value {
            Value::Integer(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::String(s) => parse_phase_literal(s),
            _ => None,
        };
        match parsed {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.error(
                    key,
                    format!("expected a number or \"<number>pi\", got {value}"),
                );
                None
            }
        }
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let value = self.table.get(key)?.clone();
        self.number_value(key, &value)
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key)?.clone() {
            Value::String(s) => Some(s),
            other => {
                self.error(key, format!("expected a string, got {other}"));
                None
            }
        }
    }

    fn axis(&mut self, prefix: &str) -> Option<Axis> {
        let name_key = prefix.to_owned();
        let values_key = format!("{prefix}_values");
        let from_key = format!("{prefix}_from");
        let to_key = format!("{prefix}_to");
        let points_key = format!("{prefix}_points");
        let range_keys = [&from_key, &to_key, &points_key];

        let Some(name) = self.string(&name_key) else {
            for k in std::iter::once(&values_key).chain(range_keys) {
                if self.table.contains_key(k.as_str()) {
                    self.error(k, format!("given without `{name_key}`"));
                }
            }
            return None;
        };
        let param = match name.parse::<SweepParam>() {
            Ok(p) => Some(p),
            Err(_) => {
                self.error(&name_key, format!("unknown parameter `{name}`"));
                None
            }
        };

        let has_values = self.table.contains_key(&values_key);
        let has_range = range_keys
            .iter()
            .any(|k| self.table.contains_key(k.as_str()));
        let values = match (has_values, has_range) {
            (true, true) => {
                self.error(
                    &values_key,
                    format!("give either `{values_key}` or a from/to/points range, not both"),
                );
                None
            }
            (false, false) => {
                self.error(
                    &name_key,
                    format!("needs `{values_key}` or `{from_key}`/`{to_key}`/`{points_key}`"),
                );
                None
            }
            (true, false) => self.value_list(&values_key),
            (false, true) => {
                let from = self.required_number(&from_key);
                let to = self.required_number(&to_key);
                let points = self.required_count(&points_key);
                match (from, to, points) {
                    (Some(f), Some(t), Some(n)) => {
                        if n == 0 {
                            self.error(&points_key, "grid is empty");
                            None
                        } else if n > 1 && f == t {
                            self.error(&to_key, "range collapses to a single value");
                            None
                        } else {
                            Some(Axis::linspace(SweepParam::Phi, f, t, n).values)
                        }
                    }
                    _ => None,
                }
            }
        };

        let values = values?;
        let param = param?;
        let axis = Axis::new(param, values);
        let increasing = axis.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = axis.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            self.error(
                &values_key_or_range(&values_key, &from_key, has_values),
                "grid is not strictly monotone",
            );
            return None;
        }
        Some(axis)
    }

    fn value_list(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.table.get(key)?.clone() {
            Value::Array(items) => {
                if items.is_empty() {
                    self.error(key, "grid is empty");
                    return None;
                }
                let parsed: Vec<Option<f64>> =
                    items.iter().map(|v| self.number_value(key, v)).collect();
                parsed.into_iter().collect()
            }
            other => {
                self.error(key, format!("expected an array, got {other}"));
                None
            }
        }
    }

    fn required_number(&mut self, key: &str) -> Option<f64> {
        if !self.table.contains_key(key) {
            self.error(key, "missing");
            return None;
        }
        self.number(key)
    }

    fn required_count(&mut self, key: &str) -> Option<usize> {
        match self.table.get(key) {
            None => {
                self.error(key, "missing");
                None
            }
            Some(Value::Integer(i)) if *i >= 0 => Some(*i as usize),
            Some(other) => {
                let msg = format!("expected a non-negative integer, got {other}");
                self.error(key, msg);
                None
            }
        }
    }
}

fn values_key_or_range(values_key: &str, from_key: &str, has_values: bool) -> String {
    if has_values {
        values_key.to_owned()
    } else {
        from_key.to_owned()
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &std::path::Path) -> crate::error::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| crate::error::Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].lines().count().max(1));
        ConfigErrors(vec![ConfigError {
            key: None,
            line,
            message: e.message().to_owned(),
        }])
    })?;
    let mut p = Parser {
        text,
        table,
        errors: Vec::new(),
    };

    let keys: Vec<String> = p.table.keys().cloned().collect();
    for key in &keys {
        if matches!(p.table[key], Value::Table(_)) {
            p.error(key, "nested tables are not supported");
        } else if !PARAM_KEYS.contains(&key.as_str()) && !OTHER_KEYS.contains(&key.as_str()) {
            p.error(key, "unknown key");
        }
    }

    let axis1 = p.axis("axis1");
    let axis2 = p.axis("axis2");
    if let (Some(a1), Some(a2)) = (&axis1, &axis2) {
        if a1.param == a2.param {
            p.error("axis2", format!("sweeps `{}` like axis1", a2.param));
        }
    }
    let swept = |name: &str| {
        [&axis1, &axis2].into_iter().flatten().any(|a| {
            a.param.name() == name || (a.param == SweepParam::Nbar && name.starts_with("nbar_"))
        })
    };

    let mut values = [0.0f64; 10];
    for (slot, key) in values.iter_mut().zip(PARAM_KEYS) {
        let optional = key.starts_with("nbar_");
        match p.table.contains_key(key) {
            true => {
                if let Some(x) = p.number(key) {
                    *slot = x;
                }
            }
            false if optional => {}
            false => {
                let axis_value = [&axis1, &axis2]
                    .into_iter()
                    .flatten()
                    .find(|a| a.param.name() == key)
                    .map(|a| a.values[0]);
                match axis_value {
                    Some(x) => *slot = x,
                    None if swept(key) => {}
                    None => p.error(key, "missing (required unless swept)"),
                }
            }
        }
    }
    let params = SystemParams {
        kappa_a: values[0],
        kappa_b: values[1],
        gamma_c: values[2],
        lambda: values[3],
        phi: values[4],
        g_a: values[5],
        g_b: values[6],
        nbar_a: values[7],
        nbar_b: values[8],
        nbar_c: values[9],
    };
    if p.errors.is_empty() {
        let mut probe = params;
        for axis in [&axis1, &axis2].into_iter().flatten() {
            axis.param.apply(&mut probe, axis.values[0]);
        }
        if let Err(crate::Error::ParameterDomain { name, reason, .. }) = probe.validate() {
            p.error(name, reason);
        }
    }

    let pairs = match p.table.get("pairs").cloned() {
        None => vec![ModePair::AB],
        Some(Value::Array(items)) if !items.is_empty() => {
            let mut pairs = Vec::new();
            for item in items {
                match item.as_str().map(str::parse::<ModePair>) {
                    Some(Ok(pair)) if !pairs.contains(&pair) => pairs.push(pair),
                    Some(Ok(pair)) => p.error("pairs", format!("`{pair}` listed twice")),
                    _ => p.error(
                        "pairs",
                        format!("invalid mode pair {item} (expected \"ab\", \"ac\" or \"bc\")"),
                    ),
                }
            }
            pairs
        }
        Some(other) => {
            p.error(
                "pairs",
                format!("expected a non-empty array of pair labels, got {other}"),
            );
            Vec::new()
        }
    };

    let workers = match p.table.get("workers").cloned() {
        None => None,
        Some(Value::Integer(n)) if n >= 0 => Some(n as usize),
        Some(other) => {
            p.error(
                "workers",
                format!("expected a non-negative integer, got {other}"),
            );
            None
        }
    };
    let out = p.string("out").map(PathBuf::from);
    let format = match p.string("format") {
        None => None,
        Some(s) => match s.parse::<OutputFormat>() {
            Ok(f) => Some(f),
            Err(_) => {
                p.error("format", format!("expected csv, json or both, got `{s}`"));
                None
            }
        },
    };
    let plot = match p.table.get("plot").cloned() {
        None => false,
        Some(Value::Boolean(b)) => b,
        Some(other) => {
            p.error("plot", format!("expected true or false, got {other}"));
            false
        }
    };

    if !p.errors.is_empty() {
        p.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(p.errors));
    }
    Ok(RunConfig {
        params,
        axis1,
        axis2,
        pairs,
        out,
        workers,
        format,
        plot,
    })
}
