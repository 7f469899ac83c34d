//! JSON views of core results. Field names follow `docs/schemas/`.

use khess_core::classify::{Classification, DecayQuantity, DecayVariable, SlopeCheck, SlopeReport};
use khess_core::exponents::{PointLabel, StationaryPoint};
use khess_core::solver::{OrbitEnd, RadialSolution};
use khess_core::weights::{AssumptionEntry, AssumptionReport};
use khess_core::Orbit;
use serde_json::{json, Map, Value};

use crate::output::{num, opt};

pub fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("obj called on a non-object"),
    }
}

pub fn label(l: PointLabel) -> &'static str {
    match l {
        PointLabel::P1 => "P1",
        PointLabel::P2 => "P2",
        PointLabel::P3 => "P3",
        PointLabel::P4 => "P4",
    }
}

pub fn point(sp: &StationaryPoint) -> Value {
    let ev: Vec<Value> = sp.eigenvalues.iter().map(|z| json!([num(z.re), num(z.im)])).collect();
    json!({
        "label": label(sp.label),
        "x": num(sp.x),
        "y": num(sp.y),
        "nu": num(sp.nu),
        "kind": sp.kind.as_str(),
        "eigenvalues": ev,
    })
}

fn entry(e: &AssumptionEntry) -> Value {
    json!({
        "status": e.status.as_str(),
        "witness": e.witness.as_ref().map(|w| json!({ "r": num(w.r), "value": num(w.value) })),
        "note": e.note,
    })
}

pub fn assumptions(r: &AssumptionReport) -> Map<String, Value> {
    obj(json!({
        "rho1": entry(&r.rho1),
        "rho2": entry(&r.rho2),
        "rho3": entry(&r.rho3),
        "rho4": entry(&r.rho4),
        "rho5": entry(&r.rho5),
        "rho6": entry(&r.rho6),
        "cases": {
            "rho2": [r.rho2_case1, r.rho2_case2],
            "rho4": [r.rho4_case1, r.rho4_case2],
            "rho6": [r.rho6_case1, r.rho6_case2],
        },
        "q_boundary": r.q_boundary,
        "l0": num(r.l0),
        "l_inf": num(r.l_inf),
        "vartheta": opt(r.vartheta),
        "q_star_l0": num(r.q_star_l0),
        "delta": num(r.delta),
        "kappa": opt(r.kappa),
        "nu_hat": opt(r.nu_hat),
        "grid": { "r_lo": num(r.grid.0), "r_hi": num(r.grid.1), "points": r.grid.2 },
        "ball_ok": r.ball_ok(),
        "entire_ok": r.entire_ok(),
    }))
}

/// Names of the entries that do not hold.
pub fn failing(r: &AssumptionReport) -> Vec<&'static str> {
    [&r.rho1, &r.rho2, &r.rho3, &r.rho4, &r.rho5, &r.rho6].into_iter().filter(|e| !e.holds()).map(|e| e.name).collect()
}

pub fn classification(c: &Classification) -> Map<String, Value> {
    let decay = c.decay.map(|d| {
        json!({
            "quantity": match d.quantity { DecayQuantity::MinusW => "-w", DecayQuantity::WPrime => "wprime" },
            "variable": match d.variable { DecayVariable::LnR => "ln r", DecayVariable::LnLnR => "ln ln r" },
            "exponent": num(d.exponent),
            "predicted": num(d.predicted),
            "rel_error": num(d.rel_error()),
            "residual": num(d.residual),
            "r_range": [num(d.r_range.0), num(d.r_range.1)],
        })
    });
    let k = &c.constants;
    obj(json!({
        "verdict": c.verdict.as_str(),
        "method": c.method.map(|m| m.as_str()),
        "limit_point": c.limit_point.map(|(x, y)| json!([num(x), num(y)])),
        "terminal_distance": opt(c.terminal_distance),
        "delta": num(c.delta),
        "constants": { "fitted": opt(k.fitted), "c1": opt(k.c1), "c2": opt(k.c2), "c3": opt(k.c3), "c4": opt(k.c4) },
        "decay": decay,
        "regions": {
            "first_g_minus": opt(c.regions.first_g_minus),
            "first_w_minus": opt(c.regions.first_w_minus),
            "g_minus_samples": c.regions.g_minus_samples,
            "min_g": num(c.regions.min_g),
        },
        "q_boundary": c.q_boundary,
        "p4_focus": c.p4_focus,
        "reason": c.reason,
    }))
}

fn slope(s: &SlopeCheck) -> Value {
    json!({
        "label": s.label,
        "predicted": num(s.predicted),
        "fitted": num(s.fitted),
        "deviation": num(s.deviation),
        "samples": s.samples,
    })
}

pub fn slopes(r: &SlopeReport) -> Value {
    json!({ "slope": slope(&r.slope), "refined": r.refined.as_ref().map(slope) })
}

pub fn orbit_summary(o: &Orbit) -> Value {
    let (t0, t1) = o.t_range();
    let end = match o.end {
        OrbitEnd::Completed => json!("completed"),
        OrbitEnd::Truncated => json!("truncated"),
        OrbitEnd::Diverged(t) => json!({ "diverged_at": num(t) }),
    };
    json!({ "provenance": o.provenance.as_str(), "samples": o.samples.len(), "t_range": [num(t0), num(t1)], "end": end })
}

pub fn profile_summary(s: &RadialSolution) -> Value {
    let (r0, r1) = s.r_range();
    json!({
        "w0": num(s.w0),
        "samples": s.samples.len(),
        "r_range": [num(r0), num(r1)],
        "truncated": s.truncated.as_ref().map(|t| json!({ "r": num(t.r), "reason": t.reason })),
        "stats": { "steps": s.stats.steps, "rejected": s.stats.rejected, "evaluations": s.stats.evaluations },
    })
}

pub fn profile_rows(s: &RadialSolution) -> Vec<Vec<f64>> {
    s.samples.iter().map(|p| vec![p.r, p.w, p.wprime]).collect()
}

pub fn orbit_rows(o: &Orbit) -> Vec<Vec<f64>> {
    o.samples.iter().map(|p| vec![p.t, p.x, p.y]).collect()
}
