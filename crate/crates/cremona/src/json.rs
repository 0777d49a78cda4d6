//! JSON views of the core types. Big integers are rendered as decimal
//! strings; polynomial terms are listed in descending lexicographic order
//! of their exponent triples.

use crate::forms::{CubicClassification, CubicKind, RationalTwoForm};
use crate::maps::BirationalMap;
use crate::point::{InfNearPoint, ProjPoint};
use crate::poly::HomPoly;
use crate::words::TraceStep;
use serde_json::{json, Value};

pub fn poly_json(p: &HomPoly) -> Value {
    let mut terms: Vec<Value> = p
        .terms()
        .map(|(e, c)| {
            json!({
                "exponents": [e[0], e[1], e[2]],
                "num": c.numer().to_string(),
                "den": c.denom().to_string(),
            })
        })
        .collect();
    terms.reverse();
    Value::Array(terms)
}

pub fn map_json(f: &BirationalMap) -> Value {
    json!({
        "degree": f.degree(),
        "components": f.components().iter().map(poly_json).collect::<Vec<_>>(),
    })
}

pub fn point_json(p: &ProjPoint) -> Value {
    json!({
        "coords": p.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "tower": Value::Array(vec![]),
    })
}

pub fn inf_near_json(p: &InfNearPoint) -> Value {
    json!({
        "coords": p.base.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "tower": p
            .tower
            .iter()
            .map(|d| vec![d.0[0].to_string(), d.0[1].to_string()])
            .collect::<Vec<_>>(),
    })
}

pub fn form_json(w: &RationalTwoForm) -> Value {
    json!({ "A": poly_json(w.a()), "B": poly_json(w.b()) })
}

pub fn cubic_kind_str(k: &CubicKind) -> &'static str {
    match k {
        CubicKind::Triangle => "triangle",
        CubicKind::ConicPlusLine => "conic-plus-line",
        CubicKind::NodalCubic => "nodal-cubic",
        CubicKind::NotNormal => "not-normal",
    }
}

pub fn classification_json(c: &CubicClassification) -> Value {
    json!({
        "kind": cubic_kind_str(&c.kind),
        "components": c.components.iter().map(poly_json).collect::<Vec<_>>(),
        "nodes": c.nodes.iter().map(point_json).collect::<Vec<_>>(),
    })
}

pub fn trace_json(steps: &[TraceStep]) -> Value {
    Value::Array(
        steps
            .iter()
            .map(|s| {
                json!({
                    "step": s.step,
                    "D": s.d_max,
                    "n": s.n,
                    "r": s.r,
                    "action": s.action,
                    "factors": s.factors,
                })
            })
            .collect(),
    )
}
