//! The fermionic contraction `G_r` by three independent routes, plus the XXT
//! Fermi points and phase regions.
//!
//! Sign convention: `G_0 = ⟨σz⟩` is `-1` deep in the positive-field phase.
//! This is the global spin flip of the physical magnetization; every resource
//! measure downstream is invariant under it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dispersion, mode_grid, ModelParams};
use crate::quad;

/// Default absolute tolerance for the thermodynamic-limit integral.
pub const DEFAULT_TOL: f64 = 1e-10;

const SCAN_POINTS: usize = 1024;
const MAX_PANELS: usize = 20_000;
const FERMI_ALPHA_EPS: f64 = 1e-8;
const CRITICAL_EPS: f64 = 1e-9;

/// Backend used to evaluate `G_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Mode sum over a finite odd ring.
    #[serde(rename = "finite")]
    FiniteSum,
    /// Thermodynamic-limit integral.
    Quadrature,
    /// Closed forms for the XXT model.
    #[serde(rename = "analytic")]
    AnalyticXXT,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FiniteSum => "finite",
            Method::Quadrature => "quadrature",
            Method::AnalyticXXT => "analytic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "finite" | "finite-sum" => Ok(Method::FiniteSum),
            "quadrature" | "quad" => Ok(Method::Quadrature),
            "analytic" => Ok(Method::AnalyticXXT),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// `G_r` on the finite ring of `params.chain_length` sites.
pub fn g_finite(params: &ModelParams, r: i64) -> Result<f64> {
    let l = params.require_chain_length()?;
    if r.unsigned_abs() as usize >= l {
        return Err(Error::Range { requested: r.unsigned_abs() as usize, available: l - 1 });
    }
    let tol = params.gap_tolerance();
    let mut sum = 0.0;
    for mode in mode_grid(params)? {
        if mode.energy < tol {
            return Err(Error::GapClosure { phi: mode.phi, energy: mode.energy });
        }
        let rp = mode.phi * r as f64;
        sum += (rp.cos() * mode.z + rp.sin() * mode.y) / mode.energy;
    }
    Ok(-sum / l as f64)
}

/// Integrand of the thermodynamic-limit `G_r` with its breakpoints on `[0, π]`.
#[derive(Debug, Clone)]
pub struct Kernel {
    params: ModelParams,
    breakpoints: Vec<f64>,
}

impl Kernel {
    pub fn new(params: &ModelParams) -> Self {
        let p = *params;
        let mut breakpoints = quad::scan_roots(|phi| dispersion(&p, phi).z, 0.0, PI, SCAN_POINTS, 1e-15);
        breakpoints.extend(gap_closings(&p));
        breakpoints.sort_by(f64::total_cmp);
        Self { params: p, breakpoints }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn eval(&self, phi: f64, r: i64) -> f64 {
        let d = dispersion(&self.params, phi);
        if d.energy == 0.0 {
            return 0.0;
        }
        let rp = phi * r as f64;
        (rp.cos() * d.z + rp.sin() * d.y) / d.energy
    }

    pub fn g(&self, r: i64, tol: f64) -> Result<f64> {
        // The integral carries a 1/π prefactor, so the raw tolerance is π·tol.
        match quad::integrate(|phi| self.eval(phi, r), 0.0, PI, &self.breakpoints, PI * tol, MAX_PANELS) {
            Ok(q) => Ok(-q.value / PI),
            Err(Error::NonConvergence { estimate, error }) => {
                Err(Error::NonConvergence { estimate: -estimate / PI, error: error / PI })
            }
            Err(e) => Err(e),
        }
    }
}

/// Interior points of `[0, π]` where the dispersion touches zero.
fn gap_closings(params: &ModelParams) -> Vec<f64> {
    let tol = params.gap_tolerance().max(1e-10);
    let step = PI / SCAN_POINTS as f64;
    let e: Vec<f64> = (0..=SCAN_POINTS).map(|i| dispersion(params, i as f64 * step).energy).collect();
    let mut out = Vec::new();
    for i in 1..SCAN_POINTS {
        if e[i] <= e[i - 1] && e[i] <= e[i + 1] {
            let (phi, gap) = quad::golden_min(
                |phi| dispersion(params, phi).energy,
                (i - 1) as f64 * step,
                (i + 1) as f64 * step,
                1e-13,
            );
            if gap < tol {
                out.push(phi);
            }
        }
    }
    out
}

/// `G_r` in the thermodynamic limit by adaptive quadrature.
pub fn g_quadrature(params: &ModelParams, r: i64, tol: f64) -> Result<f64> {
    Kernel::new(params).g(r, tol)
}

/// Zeros of the XXT dispersion on `[0, π]`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermiPoints {
    pub points: Vec<f64>,
}

impl FermiPoints {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

pub fn fermi_points(alpha: f64, lambda: f64) -> FermiPoints {
    let mut points = Vec::with_capacity(2);
    if alpha.abs() < FERMI_ALPHA_EPS {
        if lambda.abs() <= 1.0 {
            points.push(lambda.acos());
        }
        return FermiPoints { points };
    }
    let disc = 1.0 + 8.0 * alpha * alpha + 8.0 * alpha * lambda;
    if disc < 0.0 {
        return FermiPoints { points };
    }
    let root = disc.sqrt();
    // (-1 + √D)/(4α) rewritten without cancellation.
    let x_plus = 2.0 * (alpha + lambda) / (1.0 + root);
    let x_minus = (-1.0 - root) / (4.0 * alpha);
    for x in [x_plus, x_minus] {
        if (-1.0..=1.0).contains(&x) {
            points.push(x.acos());
        }
    }
    if disc == 0.0 {
        points.truncate(1);
    }
    points.sort_by(f64::total_cmp);
    FermiPoints { points }
}

/// Ground-state region of the XXT model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XxtRegion {
    FerrI,
    FerrII,
    SL1,
    SL2,
    Critical,
}

/// Critical lines `α+1`, `α-1` and, for `|α| ≥ 1/4`, `-(1+8α²)/(8α)`.
pub fn critical_lines(alpha: f64) -> Vec<f64> {
    let mut lines = vec![alpha + 1.0, alpha - 1.0];
    if alpha.abs() >= 0.25 {
        lines.push(-(1.0 + 8.0 * alpha * alpha) / (8.0 * alpha));
    }
    lines
}

pub fn phase_region_xxt(alpha: f64, lambda: f64) -> XxtRegion {
    if critical_lines(alpha).iter().any(|lc| (lambda - lc).abs() <= CRITICAL_EPS) {
        return XxtRegion::Critical;
    }
    match fermi_points(alpha, lambda).count() {
        0 => {
            // No sign change: z(π/2) = λ + α carries the global sign.
            if lambda + alpha > 0.0 {
                XxtRegion::FerrI
            } else {
                XxtRegion::FerrII
            }
        }
        1 => XxtRegion::SL1,
        _ => XxtRegion::SL2,
    }
}

/// Closed-form thermodynamic `G_r` of the XXT model.
pub fn g_analytic_xxt(alpha: f64, lambda: f64, r: i64) -> Result<f64> {
    let kron = if r == 0 { 1.0 } else { 0.0 };
    let sinc = |phi: f64| if r == 0 { phi / PI } else { (r as f64 * phi).sin() / (PI * r as f64) };
    let region = phase_region_xxt(alpha, lambda);
    // The closed forms assume z < 0 next to φ = 0; the opposite orientation
    // (possible for α < 0) flips every term.
    let orient = if lambda - 1.0 - alpha < 0.0 { 1.0 } else { -1.0 };
    let g = match region {
        XxtRegion::Critical => return Err(Error::AmbiguousPhase { alpha, lambda }),
        XxtRegion::FerrI => -kron,
        XxtRegion::FerrII => kron,
        XxtRegion::SL1 => {
            let fp = fermi_points(alpha, lambda).points[0];
            orient * (2.0 * sinc(fp) - kron)
        }
        XxtRegion::SL2 => {
            let pts = fermi_points(alpha, lambda).points;
            orient * (2.0 * (sinc(pts[0]) - sinc(pts[1])) + kron)
        }
    };
    Ok(g)
}

/// Table of `G_r` for `r ∈ [-R, R]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GSeries {
    pub r_max: usize,
    pub values: Vec<f64>,
    pub method: Method,
    pub params: ModelParams,
}

impl GSeries {
    pub fn build(params: &ModelParams, r_max: usize, method: Method, tol: f64) -> Result<Self> {
        params.validate()?;
        let range: Vec<i64> = (-(r_max as i64)..=r_max as i64).collect();
        let values = match method {
            Method::FiniteSum => {
                let l = params.require_chain_length()?;
                if r_max >= l {
                    return Err(Error::Range { requested: r_max, available: l - 1 });
                }
                range.par_iter().map(|&r| g_finite(params, r)).collect::<Result<Vec<_>>>()?
            }
            Method::Quadrature => {
                let kernel = Kernel::new(params);
                range.par_iter().map(|&r| kernel.g(r, tol)).collect::<Result<Vec<_>>>()?
            }
            Method::AnalyticXXT => {
                if !params.is_xxt() {
                    return Err(Error::Config(
                        "analytic backend requires gamma = delta = 0".into(),
                    ));
                }
                range
                    .iter()
                    .map(|&r| g_analytic_xxt(params.alpha, params.lambda, r))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Self { r_max, values, method, params: *params })
    }

    pub fn get(&self, r: i64) -> f64 {
        self.values[(r + self.r_max as i64) as usize]
    }

    pub fn try_get(&self, r: i64) -> Result<f64> {
        if r.unsigned_abs() as usize > self.r_max {
            return Err(Error::Range { requested: r.unsigned_abs() as usize, available: self.r_max });
        }
        Ok(self.get(r))
    }

    /// Builds a series directly from a closure; used by tests and fixtures.
    pub fn from_fn(params: &ModelParams, r_max: usize, method: Method, f: impl Fn(i64) -> f64) -> Self {
        let values = (-(r_max as i64)..=r_max as i64).map(f).collect();
        Self { r_max, values, method, params: *params }
    }
}
