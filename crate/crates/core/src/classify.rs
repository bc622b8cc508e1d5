//! Decay-mode classification of resource-versus-distance profiles and the
//! phase diagnoses built on it.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corr::{fermi_points, Method, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rdm::{reduced_states, TwoSiteState};
use crate::resources::{coherence_l1, concurrence, discord, DiscordStrategy};
use crate::topology::{winding_number, WindingResult, DEFAULT_WINDING_STEPS};

pub const DEFAULT_R_MAX: usize = 30;
pub const MIN_PROFILE_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Coherence,
    Concurrence,
    Discord,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Coherence => "coherence",
            Measure::Concurrence => "concurrence",
            Measure::Discord => "discord",
        }
    }

    /// Discord uses the three-family minimum.
    pub fn eval(self, state: &TwoSiteState) -> f64 {
        match self {
            Measure::Coherence => coherence_l1(state),
            Measure::Concurrence => concurrence(state),
            Measure::Discord => discord(state, DiscordStrategy::ThreeFamily).value,
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coherence" => Ok(Measure::Coherence),
            "concurrence" => Ok(Measure::Concurrence),
            "discord" => Ok(Measure::Discord),
            other => Err(Error::Config(format!("unknown resource '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceProfile {
    pub measure: Measure,
    pub entries: Vec<(usize, f64)>,
}

impl ResourceProfile {
    pub fn new(measure: Measure, entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("profile distances must be strictly increasing".into()));
        }
        if let Some(&(r, v)) = entries.iter().find(|e| !(e.1 >= -1e-12)) {
            return Err(Error::Config(format!("profile value at r = {r} is {v}")));
        }
        Ok(Self { measure, entries })
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn from_states(measure: Measure, states: &[TwoSiteState]) -> Result<Self> {
        let entries = states.par_iter().map(|s| (s.distance, measure.eval(s))).collect();
        Self::new(measure, entries)
    }
}

/// `measure` at `r = 1..=r_max`.
pub fn build_profile(params: &ModelParams, measure: Measure, r_max: usize, method: Method) -> Result<ResourceProfile> {
    let states = reduced_states(params, r_max, method, DEFAULT_TOL)?;
    ResourceProfile::from_states(measure, &states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecayMode {
    Zero,
    Asymptotic,
    Oscillating,
    Frozen,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayClass {
    pub mode: DecayMode,
    pub frozen_value: Option<f64>,
    pub extremum_count: usize,
    /// `(max - min) / mean` over the tail half.
    pub tail_spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub zero_floor: f64,
    pub freeze_rel: f64,
    pub min_extrema: usize,
    pub burn_in: usize,
    /// Largest tail-mean / burn-in ratio still counted as a decay.
    pub decay_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { zero_floor: 1e-4, freeze_rel: 1e-2, min_extrema: 4, burn_in: 3, decay_ratio: 0.5 }
    }
}

/// Sign changes of the first differences, skipping differences below `floor`.
fn count_extrema(v: &[f64], floor: f64) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d.abs() < floor {
            continue;
        }
        if last != 0.0 && d.signum() != last.signum() {
            count += 1;
        }
        last = d;
    }
    count
}

pub fn classify_decay(profile: &ResourceProfile, cfg: &Thresholds) -> Result<DecayClass> {
    let v = profile.values();
    let needed = MIN_PROFILE_LEN.max(cfg.burn_in + 2);
    if v.len() < needed {
        return Err(Error::InsufficientData { len: v.len(), needed });
    }
    let tail = &v[v.len() / 2..];
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let tail_spread = if mean > 0.0 { (hi - lo) / mean } else { f64::INFINITY };
    let after = &v[cfg.burn_in..];
    let extremum_count = count_extrema(after, cfg.zero_floor);
    let class = |mode, frozen_value| DecayClass { mode, frozen_value, extremum_count, tail_spread };

    if v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) <= cfg.zero_floor {
        return Ok(class(DecayMode::Zero, None));
    }
    if mean > cfg.zero_floor && tail_spread <= cfg.freeze_rel {
        return Ok(class(DecayMode::Frozen, Some(mean)));
    }
    if extremum_count >= cfg.min_extrema {
        return Ok(class(DecayMode::Oscillating, None));
    }
    // Short-range transients after burn-in are tolerated; the tail must decay.
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] + cfg.zero_floor);
    if monotone && mean < cfg.decay_ratio * after[0] {
        return Ok(class(DecayMode::Asymptotic, None));
    }
    Ok(class(DecayMode::Undetermined, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Ferromagnetic,
    SL1,
    SL2,
    Winding(i32),
    Critical,
    Undetermined,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseLabel::Ferromagnetic => f.write_str("Ferromagnetic"),
            PhaseLabel::SL1 => f.write_str("SL-I"),
            PhaseLabel::SL2 => f.write_str("SL-II"),
            PhaseLabel::Winding(n) => write!(f, "N={n}"),
            PhaseLabel::Critical => f.write_str("Critical"),
            PhaseLabel::Undetermined => f.write_str("Undetermined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XxtDiagnosis {
    pub label: PhaseLabel,
    pub decay: DecayClass,
    pub fermi_points: Vec<f64>,
    pub profile: ResourceProfile,
}

/// Coherence-profile diagnosis; an undetermined decay is reported, not coerced.
pub fn diagnose_xxt_report(alpha: f64, lambda: f64, r_max: usize, cfg: &Thresholds) -> Result<XxtDiagnosis> {
    let profile = build_profile(&ModelParams::xxt(alpha, lambda), Measure::Coherence, r_max, Method::Quadrature)?;
    let decay = classify_decay(&profile, cfg)?;
    let label = match decay.mode {
        DecayMode::Zero => PhaseLabel::Ferromagnetic,
        DecayMode::Asymptotic => PhaseLabel::SL1,
        DecayMode::Oscillating => PhaseLabel::SL2,
        DecayMode::Frozen | DecayMode::Undetermined => PhaseLabel::Undetermined,
    };
    Ok(XxtDiagnosis { label, decay, fermi_points: fermi_points(alpha, lambda).points, profile })
}

pub fn diagnose_xxt(alpha: f64, lambda: f64, r_max: usize) -> Result<PhaseLabel> {
    let d = diagnose_xxt_report(alpha, lambda, r_max, &Thresholds::default())?;
    if d.label == PhaseLabel::Undetermined {
        return Err(Error::Undetermined(format!(
            "coherence decay at (alpha = {alpha}, lambda = {lambda}) classified {:?}",
            d.decay.mode
        )));
    }
    Ok(d.label)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologicalDiagnosis {
    pub label: PhaseLabel,
    pub winding: WindingResult,
    pub decay: DecayClass,
    /// Whether the decay mode is the one expected for the winding sector.
    pub consistent: bool,
    pub profile: ResourceProfile,
}

/// `|N| = 1` sectors freeze; `N = 0` and `|N| = 2` decay.
pub fn expected_modes(n: i32) -> &'static [DecayMode] {
    match n.abs() {
        1 => &[DecayMode::Frozen],
        _ => &[DecayMode::Oscillating, DecayMode::Asymptotic],
    }
}

pub fn diagnose_topological_report(params: &ModelParams, r_max: usize, cfg: &Thresholds) -> Result<TopologicalDiagnosis> {
    let winding = winding_number(params, DEFAULT_WINDING_STEPS)?;
    let profile = build_profile(params, Measure::Coherence, r_max, Method::Quadrature)?;
    let decay = classify_decay(&profile, cfg)?;
    Ok(TopologicalDiagnosis {
        label: PhaseLabel::Winding(winding.n),
        winding,
        decay,
        consistent: expected_modes(winding.n).contains(&decay.mode),
        profile,
    })
}

pub fn diagnose_topological(params: &ModelParams, r_max: usize) -> Result<(PhaseLabel, DecayClass)> {
    let d = diagnose_topological_report(params, r_max, &Thresholds::default())?;
    Ok((d.label, d.decay))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::{critical_lines, phase_region_xxt, XxtRegion};
    use proptest::prelude::*;

    fn profile(values: &[f64]) -> ResourceProfile {
        ResourceProfile::new(Measure::Coherence, values.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect()).unwrap()
    }

    #[test]
    fn synthetic_profiles() {
        let cfg = Thresholds::default();
        assert_eq!(classify_decay(&profile(&[0.0; 12]), &cfg).unwrap().mode, DecayMode::Zero);
        let c = classify_decay(&profile(&[1.0; 30]), &cfg).unwrap();
        assert_eq!((c.mode, c.frozen_value), (DecayMode::Frozen, Some(1.0)));
        let decay: Vec<f64> = (1..=30).map(|r| 1.0 / r as f64).collect();
        assert_eq!(classify_decay(&profile(&decay), &cfg).unwrap().mode, DecayMode::Asymptotic);
        let osc: Vec<f64> = (1..=30).map(|r| (1.0 + (2.0 * r as f64).cos()) / r as f64).collect();
        assert_eq!(classify_decay(&profile(&osc), &cfg).unwrap().mode, DecayMode::Oscillating);
        let mut transient = decay.clone();
        transient[4] = 0.5;
        transient[6] = 0.4;
        assert_eq!(classify_decay(&profile(&transient), &cfg).unwrap().mode, DecayMode::Asymptotic);
        let rising: Vec<f64> = (1..=30).map(|r| r as f64).collect();
        assert_eq!(classify_decay(&profile(&rising), &cfg).unwrap().mode, DecayMode::Undetermined);
        assert!(matches!(classify_decay(&profile(&[1.0; 9]), &cfg), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn profile_invariants() {
        assert!(ResourceProfile::new(Measure::Discord, vec![(1, 0.1), (1, 0.2)]).is_err());
        assert!(ResourceProfile::new(Measure::Discord, vec![(1, -0.1)]).is_err());
    }

    #[test]
    fn xxt_examples() {
        assert_eq!(diagnose_xxt(0.7, 1.0, DEFAULT_R_MAX).unwrap(), PhaseLabel::SL1);
        assert_eq!(diagnose_xxt(3.0, 0.5, DEFAULT_R_MAX).unwrap(), PhaseLabel::SL2);
        assert_eq!(diagnose_xxt(0.5, 2.0, DEFAULT_R_MAX).unwrap(), PhaseLabel::Ferromagnetic);
    }

    #[test]
    fn frozen_fixed_point() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 0.0);
        let c = classify_decay(&build_profile(&p, Measure::Coherence, 30, Method::Quadrature).unwrap(), &Thresholds::default()).unwrap();
        assert_eq!(c.mode, DecayMode::Frozen);
        assert!((c.frozen_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn topological_sectors() {
        for (alpha, n) in [(0.3, 1), (1.0, -1)] {
            let (label, decay) = diagnose_topological(&ModelParams::new(1.0, 1.0, alpha, -1.0), 30).unwrap();
            assert_eq!(label, PhaseLabel::Winding(n));
            assert_eq!(decay.mode, DecayMode::Frozen);
        }
        let (label, decay) = diagnose_topological(&ModelParams::new(1.0, 1.0, -2.5, -1.0), 30).unwrap();
        assert_eq!(label, PhaseLabel::Winding(-2));
        assert_eq!(decay.mode, DecayMode::Oscillating);
        for alpha in [2.5, 4.0] {
            let (label, decay) = diagnose_topological(&ModelParams::new(1.0, 1.0, alpha, -1.0), 30).unwrap();
            assert_eq!(label, PhaseLabel::Winding(-2));
            assert_eq!(decay.mode, DecayMode::Asymptotic, "alpha = {alpha}");
        }
        assert!(diagnose_topological(&ModelParams::new(1.0, 1.0, 2.0, -1.0), 30).is_err());
    }

    fn near_critical(alpha: f64, lambda: f64) -> bool {
        critical_lines(alpha).iter().any(|l| (lambda - l).abs() < 0.05)
    }

    #[test]
    fn grid_agrees_with_fermi_point_census() {
        let n = 20;
        let pts: Vec<(f64, f64)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (0.2 + 2.8 * (i as f64 + 0.5) / n as f64, -2.0 + 4.0 * (j as f64 + 0.5) / n as f64)))
            .filter(|&(a, l)| !near_critical(a, l))
            .collect();
        let agree: usize = pts
            .par_iter()
            .map(|&(a, l)| {
                let want = match phase_region_xxt(a, l) {
                    XxtRegion::FerrI | XxtRegion::FerrII => PhaseLabel::Ferromagnetic,
                    XxtRegion::SL1 => PhaseLabel::SL1,
                    XxtRegion::SL2 => PhaseLabel::SL2,
                    XxtRegion::Critical => PhaseLabel::Critical,
                };
                usize::from(diagnose_xxt(a, l, DEFAULT_R_MAX).ok() == Some(want))
            })
            .sum();
        let frac = agree as f64 / pts.len() as f64;
        assert!(frac >= 0.95, "{agree}/{}", pts.len());
    }

    proptest! {
        #[test]
        fn scale_invariant(values in prop::collection::vec(0.0..1.0f64, 10..40), scale in 1.0..50.0f64) {
            let cfg = Thresholds::default();
            let a = classify_decay(&profile(&values), &cfg).unwrap();
            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let b = classify_decay(&profile(&scaled), &cfg).unwrap();
            // Scaling up can only lift differences above the absolute floor.
            if a.mode != DecayMode::Zero && values.windows(2).all(|w| (w[1] - w[0]).abs() >= 1e-4 || w[1] == w[0]) {
                prop_assert_eq!(a.mode, b.mode);
            }
            prop_assert_eq!(classify_decay(&profile(&values), &cfg).unwrap(), a);
        }
    }
}
