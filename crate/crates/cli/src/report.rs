//! JSON records and CSV tables.
//!
//! CSV numbers use Rust's shortest round-trip formatting, so a table is a pure
//! function of the computed doubles and reruns are byte-identical.

use serde_json::{json, Value};

use spinlab::zonoid::{Location, RadiusMinimum, ScanReport};
use spinlab::{Certificate, ZonalProfile};

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn r_header(prefix: &str, ladder: &[f64]) -> String {
    ladder.iter().map(|r| format!(",{prefix}_r{}", num(*r))).collect()
}

/// Columns `t, value, smoothed_r<r>...`; one row per height. The smoothed
/// columns apply P_r to the profile's Legendre expansion.
pub fn profile_csv(profile: &ZonalProfile, t: &[f64], values: &[f64], ladder: &[f64]) -> spinlab::Result<String> {
    let smoothed: Vec<ZonalProfile> = ladder
        .iter()
        .map(|&r| spinlab::transforms::PoissonSmooth::poisson_smooth(profile, r))
        .collect::<spinlab::Result<_>>()?;
    let mut out = format!("t,value{}\n", r_header("smoothed", ladder));
    for (ti, v) in t.iter().zip(values) {
        out.push_str(&num(*ti));
        out.push(',');
        out.push_str(&num(*v));
        for s in &smoothed {
            out.push(',');
            out.push_str(&num(s.eval(*ti)));
        }
        out.push('\n');
    }
    Ok(out)
}

/// One row per direction: `u1,u2,u3,min_r<r>...,verdict,commutation_error`.
/// Directions that failed carry empty numeric cells and the verdict `error`.
pub fn scan_csv(report: &ScanReport, ladder: &[f64]) -> String {
    let mut out = format!("u1,u2,u3{},verdict,commutation_error\n", r_header("min", ladder));
    for d in &report.directions {
        out.push_str(&format!("{},{},{}", num(d.u[0]), num(d.u[1]), num(d.u[2])));
        match &d.certificate {
            Some(c) => {
                for m in &c.minima {
                    out.push(',');
                    out.push_str(&num(m.base.min));
                }
                out.push(',');
                out.push_str(c.verdict.as_str());
            }
            None => {
                out.push_str(&",".repeat(ladder.len()));
                out.push_str(",error");
            }
        }
        out.push(',');
        if let Some(e) = d.commutation_error {
            out.push_str(&num(e));
        }
        out.push('\n');
    }
    out
}

fn location_json(at: &Location) -> Value {
    match at {
        Location::Height(t) => json!({ "t": t }),
        Location::Direction(x) => json!({ "direction": x }),
    }
}

fn radius_json(m: &RadiusMinimum) -> Value {
    let level = |lv: &spinlab::zonoid::LevelMinimum| {
        json!({
            "degree": lv.degree,
            "min": lv.min,
            "at": location_json(&lv.at),
            "scale": lv.scale,
            "allowance": lv.allowance,
            "margin": lv.margin(),
        })
    };
    json!({ "r": m.r, "base": level(&m.base), "doubled": level(&m.doubled) })
}

pub fn certificate_json(c: &Certificate) -> Value {
    json!({
        "verdict": c.verdict.as_str(),
        "label": c.label,
        "zero_body": c.zero_body,
        "minima": c.minima.iter().map(radius_json).collect::<Vec<_>>(),
        "nnls_residual": c.nnls_residual,
        "params": {
            "l": c.params.l_max,
            "r_ladder": c.params.r_ladder,
            "eps_pos": c.params.eps_pos,
            "eps_neg": c.params.eps_neg,
            "t_grid": c.params.t_grid,
            "guard": c.params.guard,
        },
    })
}

pub fn scan_json(report: &ScanReport) -> Value {
    let count = |v: spinlab::Verdict| report.directions.iter().filter(|d| d.verdict() == Some(v)).count();
    let flagged: Vec<Value> = report
        .non_zonoid_directions()
        .map(|d| {
            let worst = d.certificate.as_ref().and_then(|c| c.worst());
            json!({
                "u": d.u,
                "r": worst.map(|m| m.r),
                "min": worst.map(|m| m.base.min),
                "margin": worst.map(|m| m.base.margin()),
            })
        })
        .collect();
    let errors: Vec<Value> = report
        .directions
        .iter()
        .filter_map(|d| d.error.as_ref().map(|e| json!({ "u": d.u, "error": e })))
        .collect();
    json!({
        "label": report.label,
        "aggregate": report.aggregate.as_str(),
        "directions": report.directions.len(),
        "zonoid_consistent": count(spinlab::Verdict::ZonoidConsistent),
        "non_zonoid": count(spinlab::Verdict::NonZonoid),
        "inconclusive": count(spinlab::Verdict::Inconclusive),
        "errors": errors,
        "max_commutation_error": report.max_commutation_error(),
        "non_zonoid_directions": flagged,
    })
}
