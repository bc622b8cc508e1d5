//! Hamiltonian couplings and the single-particle mode data of the
//! Jordan-Wigner / Bogoliubov solution.
//!
//! The chain is
//!
//! ```text
//! H = -Σ_j [ (1+γ)/2 σx_j σx_{j+1} + (1-γ)/2 σy_j σy_{j+1} + λ σz_j
//!          + α σz_j ( (1+δ)/2 σx_{j-1} σx_{j+1} + (1-δ)/2 σy_{j-1} σy_{j+1} ) ]
//! ```
//!
//! and every mode `φ` carries the pseudo-field `(y(φ), z(φ))` with
//! `z = λ - cos φ - α cos 2φ`, `y = γ sin φ + αδ sin 2φ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings of the extended Ising chain. `gamma = delta = 0` is the XXT model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub delta: f64,
    /// Odd ring length for the finite mode sum; `None` means the thermodynamic limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<usize>,
}

impl ModelParams {
    pub fn new(gamma: f64, lambda: f64, alpha: f64, delta: f64) -> Self {
        Self { gamma, lambda, alpha, delta, chain_length: None }
    }

    /// XX chain with isotropic three-spin interaction.
    pub fn xxt(alpha: f64, lambda: f64) -> Self {
        Self::new(0.0, lambda, alpha, 0.0)
    }

    pub fn with_chain_length(mut self, length: usize) -> Result<Self> {
        validate_chain_length(length)?;
        self.chain_length = Some(length);
        Ok(self)
    }

    pub fn is_xxt(&self) -> bool {
        self.gamma == 0.0 && self.delta == 0.0
    }

    /// Checks the chain-length invariant when a length is present.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("delta", self.delta),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        match self.chain_length {
            Some(l) => validate_chain_length(l),
            None => Ok(()),
        }
    }

    pub fn require_chain_length(&self) -> Result<usize> {
        let l = self
            .chain_length
            .ok_or_else(|| Error::Config("finite chain requires a chain length".into()))?;
        validate_chain_length(l)?;
        Ok(l)
    }

    /// Energy below which a mode counts as gapless.
    pub fn gap_tolerance(&self) -> f64 {
        1e-12 * (self.lambda.abs() + self.alpha.abs() + self.gamma.abs()).max(1.0)
    }

    /// Returns a copy with one coupling replaced.
    pub fn with_axis(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::Gamma => self.gamma = value,
            Axis::Lambda => self.lambda = value,
            Axis::Alpha => self.alpha = value,
            Axis::Delta => self.delta = value,
        }
        self
    }

    pub fn axis(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Gamma => self.gamma,
            Axis::Lambda => self.lambda,
            Axis::Alpha => self.alpha,
            Axis::Delta => self.delta,
        }
    }
}

fn validate_chain_length(l: usize) -> Result<()> {
    if l < 3 || l % 2 == 0 {
        return Err(Error::Config(format!(
            "chain length must be odd and at least 3, got {l}"
        )));
    }
    Ok(())
}

/// A coupling that can be scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Gamma,
    Lambda,
    Alpha,
    Delta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Gamma => "gamma",
            Axis::Lambda => "lambda",
            Axis::Alpha => "alpha",
            Axis::Delta => "delta",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" => Ok(Axis::Gamma),
            "lambda" => Ok(Axis::Lambda),
            "alpha" => Ok(Axis::Alpha),
            "delta" => Ok(Axis::Delta),
            other => Err(Error::Config(format!("unknown axis '{other}'"))),
        }
    }
}

/// Pseudo-field components and quasiparticle energy at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub z: f64,
    pub y: f64,
    pub energy: f64,
}

/// One Bogoliubov mode of the finite ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeData {
    pub phi: f64,
    pub z: f64,
    pub y: f64,
    pub energy: f64,
    /// `None` when the mode is gapless and the angle is undefined.
    pub theta: Option<f64>,
}

pub fn dispersion(params: &ModelParams, phi: f64) -> Dispersion {
    let z = params.lambda - phi.cos() - params.alpha * (2.0 * phi).cos();
    let y = params.gamma * phi.sin() + params.alpha * params.delta * (2.0 * phi).sin();
    Dispersion { z, y, energy: z.hypot(y) }
}

/// Analytic derivatives `(dz/dφ, dy/dφ)`.
pub fn dispersion_derivative(params: &ModelParams, phi: f64) -> (f64, f64) {
    let dz = phi.sin() + 2.0 * params.alpha * (2.0 * phi).sin();
    let dy = params.gamma * phi.cos() + 2.0 * params.alpha * params.delta * (2.0 * phi).cos();
    (dz, dy)
}

/// Full-quadrant Bogoliubov angle with `sin θ = -y/Λ` and `cos θ = z/Λ`.
pub fn bogoliubov_angle(z: f64, y: f64) -> Result<f64> {
    let energy = z.hypot(y);
    if energy < 1e-300 {
        return Err(Error::GapClosure { phi: f64::NAN, energy });
    }
    // `+ 0.0` turns -0.0 into +0.0 so that (z < 0, y = 0) maps to +π.
    Ok((-y + 0.0).atan2(z))
}

/// Modes at `φ_k = 2πk/L`, `k = -M..=M`, `M = (L-1)/2`.
pub fn mode_grid(params: &ModelParams) -> Result<Vec<ModeData>> {
    let l = params.require_chain_length()?;
    let m = ((l - 1) / 2) as i64;
    let tol = params.gap_tolerance();
    Ok((-m..=m)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / l as f64;
            let d = dispersion(params, phi);
            let theta = if d.energy < tol { None } else { bogoliubov_angle(d.z, d.y).ok() };
            ModeData { phi, z: d.z, y: d.y, energy: d.energy, theta }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ising_critical_point_closes_gap() {
        let d = dispersion(&ModelParams::new(1.0, 1.0, 0.0, 0.0), 0.0);
        assert_eq!((d.z, d.y, d.energy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn xxt_fermi_point_zeroes_dispersion() {
        // φ+ for (α = 3, λ = 0.5): arccos((-1 + √85)/12)
        let phi = ((-1.0 + 85f64.sqrt()) / 12.0).acos();
        assert_abs_diff_eq!(phi, 0.8157, epsilon = 5e-3);
        let d = dispersion(&ModelParams::xxt(3.0, 0.5), phi);
        assert!(d.energy < 1e-14);
    }

    #[test]
    fn direct_evaluation() {
        let d = dispersion(&ModelParams::new(1.0, 1.0, 2.0, -1.0), 0.0);
        assert_eq!(d.z, -2.0);
        assert_eq!(d.y, 0.0);
        assert_eq!(d.energy, 2.0);
    }

    #[test]
    fn grid_definition() {
        let p = ModelParams::xxt(0.0, 0.0).with_chain_length(3).unwrap();
        let g = mode_grid(&p).unwrap();
        let phis: Vec<f64> = g.iter().map(|m| m.phi).collect();
        assert_abs_diff_eq!(phis[0], -2.0 * PI / 3.0, epsilon = 1e-15);
        assert_eq!(phis[1], 0.0);
        assert_abs_diff_eq!(phis[2], 2.0 * PI / 3.0, epsilon = 1e-15);

        let p = ModelParams::xxt(0.0, 0.0).with_chain_length(1001).unwrap();
        let g = mode_grid(&p).unwrap();
        assert_eq!(g.len(), 1001);
        let max = g.iter().map(|m| m.phi.abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(max, 2.0 * PI * 500.0 / 1001.0, epsilon = 1e-14);
        assert!(max < PI);

        let p = ModelParams::new(1.0, 0.0, 0.0, 0.0).with_chain_length(5).unwrap();
        let g = mode_grid(&p).unwrap();
        assert_eq!(g[2].phi, 0.0);
        assert_eq!(g[2].z, -1.0);
        assert_eq!(g[2].energy, 1.0);
    }

    #[test]
    fn chain_length_must_be_odd() {
        assert!(ModelParams::xxt(0.0, 0.0).with_chain_length(10).is_err());
        assert!(ModelParams::xxt(0.0, 0.0).with_chain_length(1).is_err());
        assert!(mode_grid(&ModelParams::xxt(0.0, 0.0)).is_err());
    }

    #[test]
    fn angle_quadrants() {
        assert_eq!(bogoliubov_angle(1.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bogoliubov_angle(0.0, 1.0).unwrap(), -PI / 2.0);
        assert_abs_diff_eq!(bogoliubov_angle(-1.0, 0.0).unwrap(), PI);
        assert!(matches!(bogoliubov_angle(0.0, 0.0), Err(Error::GapClosure { .. })));
    }

    #[test]
    fn grid_orthogonality() {
        let p = ModelParams::xxt(0.0, 0.0).with_chain_length(21).unwrap();
        let g = mode_grid(&p).unwrap();
        for r in 1..21 {
            let s: f64 = g.iter().map(|m| (m.phi * r as f64).cos()).sum();
            assert!(s.abs() < 1e-10, "r = {r}: {s}");
        }
    }

    proptest! {
        #[test]
        fn energy_parity_and_angle(
            gamma in -3.0..3.0f64, lambda in -3.0..3.0f64,
            alpha in -3.0..3.0f64, delta in -3.0..3.0f64, phi in -PI..PI,
        ) {
            let p = ModelParams::new(gamma, lambda, alpha, delta);
            let d = dispersion(&p, phi);
            let m = dispersion(&p, -phi);
            prop_assert!(d.energy >= 0.0);
            prop_assert!((d.energy - d.z.hypot(d.y)).abs() <= 1e-15 * d.energy.max(1.0));
            prop_assert!((d.z - m.z).abs() < 1e-12);
            prop_assert!((d.y + m.y).abs() < 1e-12);
            prop_assert!((d.energy - m.energy).abs() < 1e-12);
            if d.energy > 1e-9 {
                let t = bogoliubov_angle(d.z, d.y).unwrap();
                prop_assert!((t.sin() + d.y / d.energy).abs() < 1e-12);
                prop_assert!((t.cos() - d.z / d.energy).abs() < 1e-12);
            }
        }
    }
}
