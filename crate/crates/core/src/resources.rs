//! Quantum-resource measures of the two-site X state: l1-norm coherence,
//! concurrence and quantum discord (measurement on the first site), plus the
//! distance-independent factors that control long-range concurrence in the
//! XXT spin-liquid phases.
//!
//! Entropies are in bits.
//!
//! The discord optimizer works in the Bloch picture. Writing the state as
//! `¼(1 + m σz⊗1 + m 1⊗σz + Σ T_ii σi⊗σi)` with `T = diag(xx, yy, zz)`, the
//! projective measurement `{(1 ± n·σ)/2}` on site A leaves site B with Bloch
//! vector `(m ẑ ± T n)/(1 ± m n_z)` and probability `(1 ± m n_z)/2`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corr::{fermi_points, phase_region_xxt, XxtRegion};
use crate::error::{Error, Result};
use crate::quad::golden_min;
use crate::rdm::TwoSiteState;

pub fn coherence_l1(state: &TwoSiteState) -> f64 {
    2.0 * (state.y_plus.abs() + state.y_minus.abs())
}

/// X-state concurrence, both branches.
pub fn concurrence(state: &TwoSiteState) -> f64 {
    let a = 2.0 * (state.y_plus.abs() - (state.u_plus * state.u_minus).max(0.0).sqrt());
    let b = 2.0 * (state.y_minus.abs() - state.z_diag);
    a.max(b).max(0.0)
}

/// Von Neumann entropy (bits) of a spectrum; `0·log 0 = 0`, noise below zero is clipped.
pub fn entropy(eigs: &[f64]) -> Result<f64> {
    let sum: f64 = eigs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || eigs.iter().any(|&p| p < -1e-12 || p > 1.0 + 1e-12) {
        return Err(Error::Normalization { sum });
    }
    Ok(shannon(eigs))
}

fn shannon(ps: &[f64]) -> f64 {
    ps.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Entropy of a qubit whose Bloch vector has length `q`.
fn qubit_entropy(q: f64) -> f64 {
    let q = q.abs().min(1.0);
    shannon(&[(1.0 + q) / 2.0, (1.0 - q) / 2.0])
}

/// The three closed-form projective measurements on site A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// σy basis, `θ = π/2, φ = π/2`.
    I,
    /// σx basis, `θ = π/2, φ = 0`.
    II,
    /// σz basis, `θ = 0`.
    III,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::I, Family::II, Family::III];

    pub fn angles(self) -> (f64, f64) {
        match self {
            Family::I => (PI / 2.0, PI / 2.0),
            Family::II => (PI / 2.0, 0.0),
            Family::III => (0.0, 0.0),
        }
    }
}

/// Closed-form measurement-induced conditional entropy for one family.
pub fn conditional_entropy(state: &TwoSiteState, family: Family) -> f64 {
    let m = state.mag_z();
    match family {
        Family::I => qubit_entropy(state.yy().hypot(m)),
        Family::II => qubit_entropy(state.xx().hypot(m)),
        Family::III => {
            let zz = state.zz();
            [1.0, -1.0]
                .into_iter()
                .map(|s| {
                    let p = (1.0 + s * m) / 2.0;
                    if p <= 1e-15 {
                        return 0.0;
                    }
                    let xi = (1.0 - zz) / (2.0 * (1.0 + s * m));
                    let eta = (1.0 + 2.0 * s * m + zz) / (2.0 * (1.0 + s * m));
                    p * shannon(&[xi, eta])
                })
                .sum()
        }
    }
}

/// Conditional entropy after measuring site A along `n(θ, φ)`.
pub fn measured_entropy(state: &TwoSiteState, theta: f64, phi: f64) -> f64 {
    let m = state.mag_z();
    let (st, ct) = theta.sin_cos();
    let n = [st * phi.cos(), st * phi.sin(), ct];
    let tn = [state.xx() * n[0], state.yy() * n[1], state.zz() * n[2]];
    let mut total = 0.0;
    for s in [1.0, -1.0] {
        let w = 1.0 + s * m * n[2];
        let p = w / 2.0;
        if p <= 1e-15 {
            continue;
        }
        let b = [s * tn[0] / w, s * tn[1] / w, (m + s * tn[2]) / w];
        total += p * qubit_entropy((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt());
    }
    total
}

/// Which measurement attained the minimum conditional entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Measurement {
    SigmaYBasis,
    SigmaXBasis,
    SigmaZBasis,
    GridAngles { theta: f64, phi: f64 },
}

impl From<Family> for Measurement {
    fn from(f: Family) -> Self {
        match f {
            Family::I => Measurement::SigmaYBasis,
            Family::II => Measurement::SigmaXBasis,
            Family::III => Measurement::SigmaZBasis,
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measurement::SigmaYBasis => f.write_str("I"),
            Measurement::SigmaXBasis => f.write_str("II"),
            Measurement::SigmaZBasis => f.write_str("III"),
            Measurement::GridAngles { theta, phi } => write!(f, "grid({theta:.6};{phi:.6})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub value: f64,
    pub optimal_measurement: Measurement,
    pub conditional_entropy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscordStrategy {
    /// Select σz or σx from the X-state sufficient conditions, grid otherwise.
    XxtConditions,
    /// Minimum over the three closed-form families.
    ThreeFamily,
    Grid { n_theta: usize, n_phi: usize },
}

impl DiscordStrategy {
    pub const DEFAULT_GRID: DiscordStrategy = DiscordStrategy::Grid { n_theta: 181, n_phi: 91 };
}

/// Which closed-form families the X-state sufficient conditions single out.
///
/// With `Y = |y+| + |y-|`: σz is optimal when `Y² ≤ (u+ - z)(u- - z)` and the
/// transverse axis with the larger correlator is optimal when
/// `|√(u+u-) - z| ≤ Y`. For `y- = 0` these are exactly the XXT conditions.
pub fn xxt_condition_families(state: &TwoSiteState) -> Vec<Family> {
    let y = state.y_plus.abs() + state.y_minus.abs();
    let mut out = Vec::new();
    if y * y <= (state.u_plus - state.z_diag) * (state.u_minus - state.z_diag) {
        out.push(Family::III);
    }
    if ((state.u_plus * state.u_minus).max(0.0).sqrt() - state.z_diag).abs() <= y {
        out.push(if state.xx().abs() >= state.yy().abs() { Family::II } else { Family::I });
    }
    out
}

fn best_family(state: &TwoSiteState, families: &[Family]) -> (f64, Measurement) {
    families
        .iter()
        .map(|&f| (conditional_entropy(state, f), Measurement::from(f)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty family list")
}

fn grid_search(state: &TwoSiteState, n_theta: usize, n_phi: usize) -> (f64, Measurement) {
    let n_theta = n_theta.max(2);
    let n_phi = n_phi.max(2);
    let dt = PI / (n_theta - 1) as f64;
    let dp = PI / (n_phi - 1) as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n_theta {
        let theta = i as f64 * dt;
        for j in 0..n_phi {
            let phi = j as f64 * dp;
            let s = measured_entropy(state, theta, phi);
            if s < best.0 {
                best = (s, theta, phi);
            }
        }
    }
    // One refinement pass: alternate golden-section searches within a cell.
    let (mut s, mut theta, mut phi) = best;
    for _ in 0..3 {
        let (t, st) = golden_min(|t| measured_entropy(state, t, phi), theta - dt, theta + dt, 1e-10);
        if st < s {
            s = st;
            theta = t;
        }
        let (p, sp) = golden_min(|p| measured_entropy(state, theta, p), phi - dp, phi + dp, 1e-10);
        if sp < s {
            s = sp;
            phi = p;
        }
    }
    (s, label_angles(theta, phi))
}

fn label_angles(theta: f64, phi: f64) -> Measurement {
    let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    for (axis, f) in [(1, Family::I), (0, Family::II), (2, Family::III)] {
        if n[axis].abs() > 1.0 - 1e-12 {
            return f.into();
        }
    }
    Measurement::GridAngles { theta, phi }
}

pub fn discord(state: &TwoSiteState, strategy: DiscordStrategy) -> DiscordResult {
    let (cond, optimal_measurement) = match strategy {
        DiscordStrategy::ThreeFamily => best_family(state, &Family::ALL),
        DiscordStrategy::Grid { n_theta, n_phi } => grid_search(state, n_theta, n_phi),
        DiscordStrategy::XxtConditions => {
            let fams = xxt_condition_families(state);
            if fams.is_empty() {
                let DiscordStrategy::Grid { n_theta, n_phi } = DiscordStrategy::DEFAULT_GRID else {
                    unreachable!()
                };
                grid_search(state, n_theta, n_phi)
            } else {
                best_family(state, &fams)
            }
        }
    };
    let m = state.mag_z();
    let s_a = shannon(&[(1.0 + m) / 2.0, (1.0 - m) / 2.0]);
    let s_ab = shannon(&state.eigenvalues().map(|p| p.max(0.0)));
    let mut value = s_a - s_ab + cond;
    if value < 0.0 && value > -1e-9 {
        value = 0.0;
    }
    DiscordResult { value, optimal_measurement, conditional_entropy: cond }
}

/// `C₁·D₁ = φ+²(π-φ+)²` in SL-I, `E₂·F₂ = (π+φ+-φ-)²(φ+-φ-)²` in SL-II.
pub fn concurrence_range_factor(alpha: f64, lambda: f64) -> Result<f64> {
    let region = phase_region_xxt(alpha, lambda);
    let pts = fermi_points(alpha, lambda).points;
    match region {
        XxtRegion::SL1 => {
            let p = pts[0];
            Ok((p * (PI - p)).powi(2))
        }
        XxtRegion::SL2 => {
            let (p, m) = (pts[0], pts[1]);
            Ok(((PI + p - m) * (p - m)).powi(2))
        }
        other => Err(Error::Phase(format!(
            "range factor needs a spin-liquid phase, got {other:?} at (alpha = {alpha}, lambda = {lambda})"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::{Method, DEFAULT_TOL};
    use crate::model::ModelParams;
    use crate::rdm::reduced_state;
    use approx::assert_abs_diff_eq;

    fn eq13() -> TwoSiteState {
        TwoSiteState { u_plus: 0.25, u_minus: 0.25, z_diag: 0.25, y_plus: -0.25, y_minus: -0.25, distance: 3 }
    }

    fn product(m: f64) -> TwoSiteState {
        // Both sites polarized with ⟨σz⟩ = m, no correlations.
        let (a, b) = ((1.0 + m) / 2.0, (1.0 - m) / 2.0);
        TwoSiteState { u_plus: a * a, u_minus: b * b, z_diag: a * b, y_plus: 0.0, y_minus: 0.0, distance: 1 }
    }

    fn maximally_mixed() -> TwoSiteState {
        TwoSiteState { u_plus: 0.25, u_minus: 0.25, z_diag: 0.25, y_plus: 0.0, y_minus: 0.0, distance: 1 }
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(coherence_l1(&eq13()), 1.0);
        assert_eq!(coherence_l1(&maximally_mixed()), 0.0);
        let s = reduced_state(&ModelParams::xxt(0.7, 1.0), 1, Method::AnalyticXXT).unwrap();
        let fp = fermi_points(0.7, 1.0).points[0];
        assert_abs_diff_eq!(coherence_l1(&s), 2.0 * fp.sin() / PI, epsilon = 1e-14);
        assert_abs_diff_eq!(coherence_l1(&s), s.xx().abs(), epsilon = 1e-15);
    }

    #[test]
    fn concurrence_examples() {
        assert_eq!(concurrence(&product(-1.0)), 0.0);
        let bell = TwoSiteState { u_plus: 0.5, u_minus: 0.5, z_diag: 0.0, y_plus: 0.0, y_minus: 0.5, distance: 1 };
        assert_abs_diff_eq!(concurrence(&bell), 1.0);
        assert_eq!(concurrence(&eq13()), 0.0);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert_abs_diff_eq!(entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_abs_diff_eq!(entropy(&[0.5, 0.5, -1e-13]).unwrap(), 1.0);
        assert!(matches!(entropy(&[0.5, 0.4]), Err(Error::Normalization { .. })));
    }

    #[test]
    fn conditional_entropy_examples() {
        assert_abs_diff_eq!(conditional_entropy(&eq13(), Family::II), 0.0);
        for f in Family::ALL {
            assert_abs_diff_eq!(conditional_entropy(&maximally_mixed(), f), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_bloch_evaluation() {
        let states = [
            eq13(),
            product(0.3),
            TwoSiteState { u_plus: 0.4, u_minus: 0.2, z_diag: 0.2, y_plus: 0.1, y_minus: -0.15, distance: 1 },
            TwoSiteState { u_plus: 0.05, u_minus: 0.55, z_diag: 0.2, y_plus: -0.18, y_minus: 0.1, distance: 1 },
        ];
        for s in states {
            for f in Family::ALL {
                let (t, p) = f.angles();
                assert_abs_diff_eq!(conditional_entropy(&s, f), measured_entropy(&s, t, p), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn discord_examples() {
        for m in [-1.0, -0.4, 0.0, 0.7] {
            for strat in [DiscordStrategy::ThreeFamily, DiscordStrategy::DEFAULT_GRID, DiscordStrategy::XxtConditions] {
                assert!(discord(&product(m), strat).value.abs() < 1e-9);
            }
        }
        let d = discord(&eq13(), DiscordStrategy::ThreeFamily);
        assert_abs_diff_eq!(d.value, 0.0, epsilon = 1e-12);
        assert_eq!(d.optimal_measurement, Measurement::SigmaXBasis);
    }

    #[test]
    fn reference_states_measurement_families() {
        // Optimal families of three reference states at r = 2. The first two
        // measure along the axis with the dominant transverse correlator.
        let cases = [
            (ModelParams::new(1.0, 1.0, 0.1, -1.0), Measurement::SigmaXBasis),
            (ModelParams::new(1.0, 1.0, -2.5, -1.0), Measurement::SigmaYBasis),
            (ModelParams::new(1.0, -0.3, 1.0, -2.0), Measurement::SigmaZBasis),
        ];
        for (p, expect) in cases {
            let s = reduced_state(&p, 2, Method::Quadrature).unwrap();
            let d = discord(&s, DiscordStrategy::ThreeFamily);
            assert_eq!(d.optimal_measurement, expect, "{p:?}");
            let g = discord(&s, DiscordStrategy::DEFAULT_GRID);
            assert!((g.value - d.value).abs() < 1e-6);
        }
    }

    #[test]
    fn range_factor_examples() {
        let a = 0.7;
        assert!(concurrence_range_factor(a, a + 1.0 - 1e-9).unwrap() < 1e-7);
        let lc3 = -(1.0 + 8.0 * 0.25) / 4.0;
        assert!(concurrence_range_factor(0.5, lc3 + 2e-9).unwrap() < 1e-6);
        let pts = fermi_points(3.0, 0.5).points;
        let expect = (PI + pts[0] - pts[1]).powi(2) * (pts[0] - pts[1]).powi(2);
        assert_abs_diff_eq!(concurrence_range_factor(3.0, 0.5).unwrap(), expect, epsilon = 1e-12);
        assert!(concurrence_range_factor(0.5, 2.0).is_err());
        assert!(concurrence_range_factor(0.5, 1.5).is_err());
    }

    #[test]
    fn discord_is_bounded_on_model_states() {
        let p = ModelParams::new(1.0, 1.0, 1.0, -1.0);
        for r in 1..6 {
            let s = reduced_state(&p, r, Method::Quadrature).unwrap();
            let d = discord(&s, DiscordStrategy::ThreeFamily);
            assert!((0.0..=1.0 + 1e-9).contains(&d.value));
            for f in Family::ALL {
                assert!(d.conditional_entropy <= conditional_entropy(&s, f) + 1e-10);
            }
            let _ = DEFAULT_TOL;
        }
    }
}
