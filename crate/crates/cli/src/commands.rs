use rayon::prelude::*;
use serde_json::json;

use spinres_core::classify::{diagnose_topological_report, diagnose_xxt_report, Measure, PhaseLabel, Thresholds};
use spinres_core::corr::{g_analytic_xxt, g_quadrature, phase_region_xxt, GSeries, Method, XxtRegion, DEFAULT_TOL};
use spinres_core::oracle::{ground_state, oracle_correlators, Boundary};
use spinres_core::rdm::{correlators, reduced_states};
use spinres_core::resources::{discord, DiscordStrategy};
use spinres_core::topology::{critical_scan, winding_integral, winding_number, DEFAULT_WINDING_STEPS};
use spinres_core::{Axis, Error, ModelParams, Result};

use crate::config::{Format, Settings};
use crate::output::{json_text, Cell, Table};

/// Rendered output plus whether a validation check failed.
pub struct Report {
    pub text: String,
    pub failed: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Self { text, failed: false }
    }
}

pub fn gr(s: &Settings) -> Result<Report> {
    let method = s.method_or_default();
    let r_max = s.r_max.unwrap_or(10);
    let g = GSeries::build(&s.params, r_max, method, s.quad_tol()?)?;
    let mut t = Table::new(&["r", "g", "method"]);
    for r in -(r_max as i64)..=r_max as i64 {
        t.push(vec![Cell::Int(r), g.get(r).into(), method.name().into()]);
    }
    Ok(Report::ok(t.render(s.format)))
}

pub fn resource(s: &Settings) -> Result<Report> {
    let r_max = s.r_max.unwrap_or(30);
    let states = reduced_states(&s.params, r_max, s.method_or_default(), s.quad_tol()?)?;
    let is_discord = s.resource == Measure::Discord;
    let mut cols = vec!["r", "value", "measure"];
    if is_discord {
        cols.push("measurement");
    }
    let mut t = Table::new(&cols);
    for st in &states {
        let mut row = vec![Cell::Int(st.distance as i64)];
        if is_discord {
            let d = discord(st, DiscordStrategy::ThreeFamily);
            row.extend([d.value.into(), s.resource.name().into(), Cell::Text(d.optimal_measurement.to_string())]);
        } else {
            row.extend([s.resource.eval(st).into(), s.resource.name().into()]);
        }
        t.push(row);
    }
    Ok(Report::ok(t.render(s.format)))
}

pub fn sweep(s: &Settings) -> Result<Report> {
    if s.axes.is_empty() {
        return Err(Error::Config("sweep needs --axis, --lo, --hi (and optionally --steps)".into()));
    }
    let r_max = s.r_max.unwrap_or(10);
    let tol = s.quad_tol()?;
    let scans_anisotropy = s.axes.iter().any(|a| matches!(a.axis, Axis::Gamma | Axis::Delta));
    let method = s.method.unwrap_or(if s.params.is_xxt() && !scans_anisotropy {
        Method::AnalyticXXT
    } else {
        Method::Quadrature
    });

    let mut points: Vec<Vec<f64>> = s.axes[0].values().into_iter().map(|v| vec![v]).collect();
    if let Some(second) = s.axes.get(1) {
        points = points
            .into_iter()
            .flat_map(|p| second.values().into_iter().map(move |v| [p.clone(), vec![v]].concat()))
            .collect();
    }
    let results: Vec<Result<Vec<f64>>> = points
        .par_iter()
        .map(|coords| {
            let mut p = s.params;
            for (a, &v) in s.axes.iter().zip(coords) {
                p = p.with_axis(a.axis, v);
            }
            let states = reduced_states(&p, r_max, method, tol)?;
            Ok(states.iter().map(|st| s.resource.eval(st)).collect())
        })
        .collect();

    let mut cols: Vec<&str> = s.axes.iter().map(|a| a.axis.name()).collect();
    cols.extend(["r", "value"]);
    let mut t = Table::new(&cols);
    for (coords, res) in points.iter().zip(results) {
        let values = match res {
            Ok(v) => v.into_iter().map(Some).collect(),
            Err(e) if e.is_config() => return Err(e),
            Err(_) => vec![None; r_max],
        };
        for (r, v) in values.into_iter().enumerate() {
            let mut row: Vec<Cell> = coords.iter().map(|&c| Cell::Num(c)).collect();
            row.extend([Cell::Int(r as i64 + 1), v.into()]);
            t.push(row);
        }
    }
    Ok(Report::ok(t.render(s.format)))
}

fn region_name(r: XxtRegion) -> &'static str {
    match r {
        XxtRegion::FerrI => "Ferr-I",
        XxtRegion::FerrII => "Ferr-II",
        XxtRegion::SL1 => "SL-I",
        XxtRegion::SL2 => "SL-II",
        XxtRegion::Critical => "critical",
    }
}

pub fn diagnose(s: &Settings) -> Result<Report> {
    let r_max = s.r_max.unwrap_or(30);
    let cfg = Thresholds::default();
    let p = &s.params;
    let (report, row) = if p.is_xxt() {
        let d = diagnose_xxt_report(p.alpha, p.lambda, r_max, &cfg)?;
        let undetermined = d.label == PhaseLabel::Undetermined;
        let report = json!({
            "regime": "xxt",
            "alpha": p.alpha,
            "lambda": p.lambda,
            "label": d.label.to_string(),
            "decay": d.decay,
            "undetermined": undetermined,
            "fermi_points": d.fermi_points,
            "phase_region": region_name(phase_region_xxt(p.alpha, p.lambda)),
            "profile": d.profile.entries,
        });
        let row = vec![
            "xxt".into(),
            Cell::Text(d.label.to_string()),
            Cell::Text(format!("{:?}", d.decay.mode)),
            d.decay.frozen_value.into(),
            Cell::Null,
            Cell::Null,
            Cell::Bool(undetermined),
        ];
        (report, row)
    } else {
        let d = diagnose_topological_report(p, r_max, &cfg)?;
        let undetermined = d.decay.mode == spinres_core::classify::DecayMode::Undetermined;
        let report = json!({
            "regime": "extended",
            "params": p,
            "label": d.label.to_string(),
            "winding": d.winding,
            "decay": d.decay,
            "consistent": d.consistent,
            "undetermined": undetermined,
            "profile": d.profile.entries,
        });
        let row = vec![
            "extended".into(),
            Cell::Text(d.label.to_string()),
            Cell::Text(format!("{:?}", d.decay.mode)),
            d.decay.frozen_value.into(),
            Cell::Int(d.winding.n as i64),
            Cell::Bool(d.consistent),
            Cell::Bool(undetermined),
        ];
        (report, row)
    };
    let text = match s.format {
        Format::Json => json_text(&report),
        Format::Csv => {
            let mut t = Table::new(&["regime", "label", "mode", "frozen_value", "winding", "consistent", "undetermined"]);
            t.push(row);
            t.to_csv()
        }
    };
    Ok(Report::ok(text))
}

pub fn winding(s: &Settings) -> Result<Report> {
    let Some(scan) = s.axes.first() else {
        let steps = DEFAULT_WINDING_STEPS;
        let w = winding_number(&s.params, steps)?;
        let mut t = Table::new(&["n", "raw", "closure_defect", "integral"]);
        t.push(vec![
            Cell::Int(w.n as i64),
            w.raw.into(),
            w.closure_defect.into(),
            winding_integral(&s.params, steps).into(),
        ]);
        return Ok(Report::ok(t.render(s.format)));
    };
    let values = scan.values();
    let rows: Vec<Result<_>> = values
        .par_iter()
        .map(|&v| winding_number(&s.params.with_axis(scan.axis, v), DEFAULT_WINDING_STEPS))
        .collect();
    let mut t = Table::new(&[scan.axis.name(), "n", "raw", "closure_defect"]);
    for (&v, w) in values.iter().zip(rows) {
        match w {
            Ok(w) => t.push(vec![Cell::Num(v), Cell::Int(w.n as i64), w.raw.into(), w.closure_defect.into()]),
            Err(_) => t.push(vec![Cell::Num(v), Cell::Null, Cell::Null, Cell::Null]),
        }
    }
    let text = match s.format {
        Format::Csv => t.to_csv(),
        Format::Json => {
            let crit = critical_scan(&s.params, scan.axis, scan.lo, scan.hi, scan.steps.max(1001))?;
            json_text(&json!({ "points": t.to_json(), "critical_points": crit }))
        }
    };
    Ok(Report::ok(text))
}

fn oracle_discrepancy(p: &ModelParams, boundary: Boundary) -> Result<f64> {
    let l = p.require_chain_length()?;
    let g = ground_state(p, boundary)?;
    let r_top = 3.min(l - 1);
    let series = GSeries::build(p, r_top, Method::FiniteSum, DEFAULT_TOL)?;
    let mut worst: f64 = 0.0;
    for r in 1..=r_top {
        let ed = oracle_correlators(&g, r)?;
        worst = worst.max(ed.max_abs_diff(&correlators(&series, r)?.spin_flipped()));
    }
    Ok(worst)
}

pub fn validate(s: &Settings) -> Result<Report> {
    let tol = s.tol_or(1e-8);
    let lengths = match s.params.chain_length {
        Some(l) => vec![l],
        None => vec![9, 11, 13],
    };
    let mut t = Table::new(&["check", "chain_length", "discrepancy", "tolerance", "status"]);
    let mut failed = false;
    let mut check = |t: &mut Table, name: &str, l: Option<usize>, value: f64, limit: Option<f64>| {
        let status = match limit {
            Some(lim) if value <= lim => "pass",
            Some(_) => {
                failed = true;
                "fail"
            }
            None => "info",
        };
        t.push(vec![
            name.into(),
            l.map_or(Cell::Null, |l| Cell::Int(l as i64)),
            value.into(),
            limit.into(),
            status.into(),
        ]);
    };

    let mut ring = Vec::new();
    for &l in &lengths {
        let p = s.params.with_chain_length(l)?;
        let cyclic = oracle_discrepancy(&p, Boundary::FermionPeriodic)?;
        check(&mut t, "oracle_fermion_periodic", Some(l), cyclic, Some(tol));
        let periodic = oracle_discrepancy(&p, Boundary::Periodic)?;
        check(&mut t, "oracle_periodic", Some(l), periodic, None);
        ring.push(periodic);
    }
    if ring.len() > 1 {
        let rise = ring.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        check(&mut t, "periodic_finite_size_trend", None, rise, Some(1e-12));
    }
    let p = s.params;
    if p.is_xxt() && phase_region_xxt(p.alpha, p.lambda) != XxtRegion::Critical {
        let mut worst: f64 = 0.0;
        for r in 0..=10 {
            let q = g_quadrature(&ModelParams::xxt(p.alpha, p.lambda), r, DEFAULT_TOL)?;
            worst = worst.max((g_analytic_xxt(p.alpha, p.lambda, r)? - q).abs());
        }
        check(&mut t, "analytic_vs_quadrature", None, worst, Some(tol.max(0.0)));
    }
    Ok(Report { text: t.render(s.format), failed })
}
