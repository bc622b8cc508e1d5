//! Flag and config-file merging. Flags win over file values, file values
//! win over defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use spinres_core::classify::Measure;
use spinres_core::corr::{Method, DEFAULT_TOL};
use spinres_core::{Axis, Error, ModelParams, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Odd ring length for the finite backend and the oracle.
    #[arg(long, global = true)]
    pub chain_length: Option<usize>,
    /// finite | quadrature | analytic
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// coherence | concurrence | discord
    #[arg(long, global = true)]
    pub resource: Option<String>,
    #[arg(long, global = true)]
    pub r_max: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Scan axis; repeat or comma-separate for a 2D sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub axis: Vec<String>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub steps: Vec<usize>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the options above (snake_case keys).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    gamma: Option<f64>,
    lambda: Option<f64>,
    alpha: Option<f64>,
    delta: Option<f64>,
    chain_length: Option<usize>,
    method: Option<String>,
    resource: Option<String>,
    r_max: Option<usize>,
    tol: Option<f64>,
    axis: Option<OneOrMany<String>>,
    lo: Option<OneOrMany<f64>>,
    hi: Option<OneOrMany<f64>>,
    steps: Option<OneOrMany<usize>>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanAxis {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl ScanAxis {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Fully resolved options. Couplings default to the XXT point `α = 0.7, λ = 1`.
#[derive(Debug, Clone)]
pub struct Settings {
    pub params: ModelParams,
    pub method: Option<Method>,
    pub resource: Measure,
    pub r_max: Option<usize>,
    pub tol: Option<f64>,
    pub axes: Vec<ScanAxis>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn pick_vec<T>(flag: Vec<T>, file: Option<OneOrMany<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.map(OneOrMany::into_vec).unwrap_or_default()
    } else {
        flag
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be finite, got {v}")))
    }
}

impl Settings {
    pub fn resolve(flags: Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let mut params = ModelParams::new(
            finite("gamma", pick(flags.gamma, file.gamma).unwrap_or(0.0))?,
            finite("lambda", pick(flags.lambda, file.lambda).unwrap_or(1.0))?,
            finite("alpha", pick(flags.alpha, file.alpha).unwrap_or(0.7))?,
            finite("delta", pick(flags.delta, file.delta).unwrap_or(0.0))?,
        );
        if let Some(l) = pick(flags.chain_length, file.chain_length) {
            params = params.with_chain_length(l)?;
        }
        let method = pick(flags.method, file.method).map(|m| Method::from_str(&m)).transpose()?;
        let resource = pick(flags.resource, file.resource)
            .map(|m| Measure::from_str(&m))
            .transpose()?
            .unwrap_or(Measure::Coherence);
        let r_max = pick(flags.r_max, file.r_max);
        if r_max == Some(0) {
            return Err(Error::Config("r-max must be at least 1".into()));
        }
        let tol = pick(flags.tol, file.tol);
        if let Some(t) = tol {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Config(format!("tol must be a finite non-negative number, got {t}")));
            }
        }

        let names = pick_vec(flags.axis, file.axis);
        let (lo, hi, steps) = (pick_vec(flags.lo, file.lo), pick_vec(flags.hi, file.hi), pick_vec(flags.steps, file.steps));
        if names.len() > 2 {
            return Err(Error::Config("at most two scan axes".into()));
        }
        let mut axes = Vec::new();
        for (i, name) in names.iter().enumerate() {
            let get = |v: &[f64], what: &str| {
                v.get(i).copied().ok_or_else(|| Error::Config(format!("axis '{name}' needs --{what}")))
            };
            let scan = ScanAxis {
                axis: Axis::from_str(name)?,
                lo: finite("lo", get(&lo, "lo")?)?,
                hi: finite("hi", get(&hi, "hi")?)?,
                steps: steps.get(i).copied().unwrap_or(51),
            };
            if scan.steps < 2 {
                return Err(Error::Config(format!("axis '{name}' needs at least 2 steps, got {}", scan.steps)));
            }
            if !(scan.lo < scan.hi) {
                return Err(Error::Config(format!("axis '{name}' needs lo < hi, got [{}, {}]", scan.lo, scan.hi)));
            }
            axes.push(scan);
        }
        if axes.len() == 2 && axes[0].axis == axes[1].axis {
            return Err(Error::Config("the two scan axes must differ".into()));
        }

        Ok(Self {
            params,
            method,
            resource,
            r_max,
            tol,
            axes,
            output: pick(flags.output, file.output),
            format: pick(flags.format, file.format).unwrap_or(Format::Csv),
        })
    }

    /// Analytic for XXT couplings, quadrature otherwise.
    pub fn method_or_default(&self) -> Method {
        self.method.unwrap_or(if self.params.is_xxt() { Method::AnalyticXXT } else { Method::Quadrature })
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn quad_tol(&self) -> Result<f64> {
        let t = self.tol_or(DEFAULT_TOL);
        if t == 0.0 {
            return Err(Error::Config("quadrature tolerance must be positive".into()));
        }
        Ok(t)
    }
}
