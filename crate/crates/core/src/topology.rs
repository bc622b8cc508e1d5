//! Winding number of the pseudo-field loop `(y(φ), z(φ))`, gap closings along
//! parameter scans, and the coherence-derivative transition detector.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corr::Method;
use crate::error::{Error, Result};
use crate::model::{dispersion, dispersion_derivative, Axis, ModelParams};
use crate::quad::{bisect, golden_min};
use crate::rdm::reduced_state;
use crate::resources::coherence_l1;

pub const DEFAULT_WINDING_STEPS: usize = 4096;
const CRITICAL_XTOL: f64 = 1e-8;
const CRITICAL_DEDUP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub n: i32,
    /// Accumulated angle over 2π before rounding.
    pub raw: f64,
    pub closure_defect: f64,
}

/// Counts the turns of `(y, z)` around the origin as `φ` runs over `[0, 2π)`.
///
/// Positive orientation is the one that gives `N = 1` at `γ = 1, λ = α = 0`.
pub fn winding_number(params: &ModelParams, n_steps: usize) -> Result<WindingResult> {
    if n_steps < 3 {
        return Err(Error::Config(format!("winding needs at least 3 steps, got {n_steps}")));
    }
    let (_, gap) = gap_minimum(params, 1024);
    if gap <= params.gap_tolerance() {
        return Err(Error::OriginCrossing { gap });
    }
    let angle = |phi: f64| {
        let d = dispersion(params, phi);
        d.z.atan2(d.y)
    };
    let mut prev = angle(0.0);
    let mut total = 0.0;
    for i in 1..=n_steps {
        let a = angle(2.0 * PI * i as f64 / n_steps as f64);
        let mut da = a - prev;
        if da > PI {
            da -= 2.0 * PI;
        } else if da <= -PI {
            da += 2.0 * PI;
        }
        total += da;
        prev = a;
    }
    let raw = total / (2.0 * PI);
    let n = raw.round();
    let closure_defect = (raw - n).abs();
    if closure_defect > 1e-3 {
        return Err(Error::Resolution { raw });
    }
    Ok(WindingResult { n: n as i32, raw, closure_defect })
}

/// Trapezoid rule on `(y z' - z y') / (y² + z²)` with analytic derivatives.
pub fn winding_integral(params: &ModelParams, n_steps: usize) -> f64 {
    let h = 2.0 * PI / n_steps as f64;
    // Periodic integrand: the trapezoid rule reduces to a plain sum.
    let sum: f64 = (0..n_steps)
        .map(|i| {
            let phi = i as f64 * h;
            let d = dispersion(params, phi);
            let (dz, dy) = dispersion_derivative(params, phi);
            (d.y * dz - d.z * dy) / (d.y * d.y + d.z * d.z)
        })
        .sum();
    sum * h / (2.0 * PI)
}

/// Global minimum of `Λ_φ` over `[0, π]`: scan, then golden refinement of
/// every local minimum of the scan.
pub fn gap_minimum(params: &ModelParams, n_scan: usize) -> (f64, f64) {
    let n = n_scan.max(4);
    let h = PI / n as f64;
    let e = |phi: f64| dispersion(params, phi).energy;
    let vals: Vec<f64> = (0..=n).map(|i| e(i as f64 * h)).collect();
    let mut best = (0.0, vals[0]);
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == n { f64::INFINITY } else { vals[i + 1] };
        if vals[i] > left || vals[i] > right {
            continue;
        }
        let a = (i as f64 - 1.0).max(0.0) * h;
        let b = ((i + 1) as f64 * h).min(PI);
        let (x, fx) = golden_min(e, a, b, 1e-12);
        let cand = if fx < vals[i] { (x, fx) } else { (i as f64 * h, vals[i]) };
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

/// Signed functions of the couplings whose zeros are exactly the gap closings.
///
/// The gap closes only where `y = z = 0`. `y` vanishes at `φ = 0, π` and, when
/// the three-spin term is anisotropic, at `cos φ = -γ/(2αδ)`. When `y ≡ 0` the
/// closings that change the Fermi-point count are the zeros of `z` at its
/// ends and at its interior extremum `cos φ = -1/(4α)`.
fn closing_witnesses(p: &ModelParams) -> [Option<f64>; 3] {
    let z_at = |c: f64| p.lambda - c - p.alpha * (2.0 * c * c - 1.0);
    let interior = if p.gamma == 0.0 && p.alpha * p.delta == 0.0 {
        (p.alpha != 0.0).then(|| -1.0 / (4.0 * p.alpha))
    } else if p.alpha * p.delta != 0.0 {
        Some(-p.gamma / (2.0 * p.alpha * p.delta))
    } else {
        None
    };
    let interior = interior.filter(|c| c.abs() <= 1.0).map(z_at);
    [Some(z_at(1.0)), Some(z_at(-1.0)), interior]
}

/// Couplings along `axis` in `[lo, hi]` where the gap closes, ascending.
pub fn critical_scan(params: &ModelParams, axis: Axis, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || n < 3 {
        return Err(Error::Config(format!("critical scan needs lo < hi and n >= 3, got [{lo}, {hi}] with n = {n}")));
    }
    let at = |v: f64| closing_witnesses(&params.with_axis(axis, v));
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let w: Vec<[Option<f64>; 3]> = grid.iter().map(|&v| at(v)).collect();
    let mut roots = Vec::new();
    for k in 0..3 {
        for i in 0..n {
            let Some(f0) = w[i][k] else { continue };
            if f0 == 0.0 {
                roots.push(grid[i]);
                continue;
            }
            if i + 1 == n {
                continue;
            }
            let Some(f1) = w[i + 1][k] else { continue };
            if f0 * f1 < 0.0 {
                let f = |v: f64| at(v)[k].unwrap_or(f64::NAN);
                let root = bisect(&f, grid[i], grid[i + 1], f0, CRITICAL_XTOL * 0.1);
                if f(root).is_finite() {
                    roots.push(root);
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < CRITICAL_DEDUP);
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub value: f64,
    pub coherence: f64,
    pub derivative: f64,
    pub flagged: bool,
}

/// Nearest-neighbour coherence along a scan and its central-difference
/// derivative. Rows are flagged where `|dC|` exceeds ten times its median and
/// a gap closing lies within two grid steps.
pub fn coherence_derivative_scan(
    params: &ModelParams,
    axis: Axis,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<DerivativeRow>> {
    if !(lo < hi) || n < 5 {
        return Err(Error::Config(format!("derivative scan needs lo < hi and n >= 5, got [{lo}, {hi}] with n = {n}")));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    let c: Vec<f64> = grid
        .par_iter()
        .map(|&v| reduced_state(&params.with_axis(axis, v), 1, Method::Quadrature).map(|s| coherence_l1(&s)))
        .collect::<Result<_>>()?;
    let d: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => (c[1] - c[0]) / h,
            i if i == n - 1 => (c[i] - c[i - 1]) / h,
            i => (c[i + 1] - c[i - 1]) / (2.0 * h),
        })
        .collect();
    let mut abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let median = abs[n / 2];
    let roots = critical_scan(params, axis, lo, hi, n.max(200))?;
    Ok((0..n)
        .map(|i| {
            let near = roots.iter().any(|r| (r - grid[i]).abs() <= 2.0 * h);
            DerivativeRow {
                value: grid[i],
                coherence: c[i],
                derivative: d[i],
                flagged: near && d[i].abs() > 10.0 * median,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ext(alpha: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, alpha, -1.0)
    }

    #[test]
    fn ising_fixed_points() {
        let w = winding_number(&ModelParams::new(1.0, 0.0, 0.0, 0.0), 4096).unwrap();
        assert_eq!(w.n, 1);
        assert!(w.closure_defect < 1e-12);
        let w = winding_number(&ModelParams::new(-1.0, 0.0, 0.0, 0.0), 4096).unwrap();
        assert_eq!(w.n, -1);
    }

    #[test]
    fn gapless_loop_is_rejected() {
        assert!(matches!(
            winding_number(&ModelParams::new(1.0, 1.0, 0.0, 0.0), 4096),
            Err(Error::OriginCrossing { .. })
        ));
        assert!(matches!(winding_number(&ext(2.0), 4096), Err(Error::OriginCrossing { .. })));
    }

    #[test]
    fn windings_match_integral_form() {
        for alpha in [-2.5, -1.0, 0.3, 1.0, 2.5, 4.0] {
            let w = winding_number(&ext(alpha), 4096).unwrap();
            let i = winding_integral(&ext(alpha), 4096);
            assert!((i - w.n as f64).abs() < 1e-6, "alpha = {alpha}: {i} vs {}", w.n);
        }
    }

    #[test]
    fn gap_examples() {
        let (phi, gap) = gap_minimum(&ModelParams::new(1.0, 1.0, 0.0, 0.0), 1024);
        assert!(gap < 1e-12 && phi.abs() < 1e-9);
        assert!(gap_minimum(&ext(2.0), 1024).1 < 1e-12);
        assert!(gap_minimum(&ext(1.0), 1024).1 > 0.1);
        // Interior closing at cos φ = 1/(2α) on α² + α = 1.
        let a = (5f64.sqrt() - 1.0) / 2.0;
        assert!(gap_minimum(&ext(a), 1024).1 < 1e-9);
    }

    #[test]
    fn critical_examples() {
        let s5 = 5f64.sqrt();
        let got = critical_scan(&ext(0.0), Axis::Alpha, -2.5, 2.5, 501).unwrap();
        let want = [(-s5 - 1.0) / 2.0, 0.0, (s5 - 1.0) / 2.0, 2.0];
        assert_eq!(got.len(), 4, "{got:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-7, "{got:?}");
        }

        let got = critical_scan(&ModelParams::new(1.0, 0.0, 1.5, 1.0), Axis::Lambda, -3.0, 3.0, 301).unwrap();
        assert_eq!(got.len(), 3, "{got:?}");
        for (g, w) in got.iter().zip([-1.5, 0.5, 2.5]) {
            assert!((g - w).abs() < 1e-7);
        }

        let got = critical_scan(&ModelParams::xxt(0.5, 0.0), Axis::Lambda, 0.0, 3.0, 100).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0] - 1.5).abs() < 1e-7);

        // Every reported root closes the gap.
        for r in critical_scan(&ModelParams::new(0.7, 0.2, 0.0, 0.4), Axis::Alpha, -3.0, 3.0, 97).unwrap() {
            let p = ModelParams::new(0.7, 0.2, r, 0.4);
            assert!(gap_minimum(&p, 2048).1 < 1e-6, "{r}");
        }
    }

    #[test]
    fn derivative_peaks_at_transitions() {
        let rows = coherence_derivative_scan(&ModelParams::new(1.0, 0.0, 1.5, 1.0), Axis::Lambda, -3.0, 3.0, 241).unwrap();
        for lc in [-1.5, 0.5, 2.5] {
            let near = rows.iter().filter(|r| (r.value - lc).abs() < 0.2);
            let peak = near.map(|r| r.derivative.abs()).fold(0.0, f64::max);
            let far = rows
                .iter()
                .filter(|r| [-1.5, 0.5, 2.5].iter().all(|c| (r.value - c).abs() > 0.5))
                .map(|r| r.derivative.abs())
                .fold(0.0, f64::max);
            assert!(peak > far, "lambda_c = {lc}: {peak} vs {far}");
        }
        let rows = coherence_derivative_scan(&ext(0.0), Axis::Alpha, 0.8, 1.6, 41).unwrap();
        assert!(rows.iter().all(|r| !r.flagged));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn winding_is_integral_and_stable(
            gamma in -2.0..2.0f64, lambda in -2.0..2.0f64, alpha in -2.0..2.0f64, delta in -2.0..2.0f64,
        ) {
            let p = ModelParams::new(gamma, lambda, alpha, delta);
            prop_assume!(gap_minimum(&p, 2048).1 > 1e-2);
            let w = winding_number(&p, 4096).unwrap();
            prop_assert!(w.closure_defect <= 1e-6);
            prop_assert_eq!(winding_number(&p, 8192).unwrap().n, w.n);
            prop_assert!((-2..=2).contains(&w.n));
        }
    }
}
