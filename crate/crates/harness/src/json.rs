//! JSON schemas for terms, traces, derivations, standard sequences and
//! delta tables.
//!
//! Terms: `{"var": "x"}` | `{"ct": "c"}` | `{"app": [t, u]}` |
//! `{"lm": ["x", t]}`. Tag constants of the encoding calculus serialize
//! with a reserved `%` prefix on the label. Traces carry the start term and
//! `{"path": [...], "kind": "beta"|"delta", "to": t}` steps; derivations
//! mirror the derivation union with a `"label"` field; standard sequences
//! are `{"terms": [...]}`. Delta-table files are arrays of
//! `{"left": c1, "right": c2, "result": t}`.

use lambda_core::cbn::{Dir, ParDerivation, RedexKind, RedexPath, Trace};
use lambda_core::cbv::{DeltaTableV, ParDerivationV, TermV, ValueV};
use lambda_core::hoas::{EConst, TermPrime};
use lambda_core::{ConstName, Constant, DeltaTable, Term, VarName};
use serde_json::{json, Map, Value};

#[derive(Debug, thiserror::Error)]
#[error("malformed JSON value: {0}")]
pub struct JsonError(pub String);

fn err(msg: impl Into<String>) -> JsonError {
    JsonError(msg.into())
}

pub fn term_to_json<C: Constant>(t: &Term<C>) -> Value {
    match t {
        Term::Var(x) => json!({ "var": x.to_string() }),
        Term::Ct(c) => json!({ "ct": c.to_string() }),
        Term::App(f, a) => json!({ "app": [term_to_json(f), term_to_json(a)] }),
        Term::Lm(x, b) => json!({ "lm": [x.to_string(), term_to_json(b)] }),
    }
}

fn ident_var(s: &str) -> Result<VarName, JsonError> {
    if s.is_empty() || !s.chars().next().unwrap().is_ascii_alphabetic() {
        return Err(err(format!("bad variable name {s:?}")));
    }
    Ok(VarName::from_ident(s))
}

fn econst_from_label(s: &str) -> Result<EConst, JsonError> {
    match s.strip_prefix('%') {
        Some("app") => Ok(EConst::CtApp),
        Some("lm") => Ok(EConst::CtLm),
        Some(other) => Err(err(format!("unknown tag constant %{other}"))),
        None => {
            if s.is_empty() {
                Err(err("empty constant label"))
            } else {
                Ok(EConst::Base(ConstName::new(s)))
            }
        }
    }
}

fn term_prime_from_json_inner(v: &Value) -> Result<TermPrime, JsonError> {
    let obj = v
        .as_object()
        .ok_or_else(|| err(format!("term must be an object, got {v}")))?;
    if let Some(x) = obj.get("var") {
        let s = x.as_str().ok_or_else(|| err("var must be a string"))?;
        return Ok(Term::var(ident_var(s)?));
    }
    if let Some(c) = obj.get("ct") {
        let s = c.as_str().ok_or_else(|| err("ct must be a string"))?;
        return Ok(Term::ct(econst_from_label(s)?));
    }
    if let Some(a) = obj.get("app") {
        let arr = a.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
            err("app must be a two-element array")
        })?;
        return Ok(Term::app(
            term_prime_from_json_inner(&arr[0])?,
            term_prime_from_json_inner(&arr[1])?,
        ));
    }
    if let Some(l) = obj.get("lm") {
        let arr = l.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
            err("lm must be a [binder, body] array")
        })?;
        let binder = arr[0]
            .as_str()
            .ok_or_else(|| err("lm binder must be a string"))?;
        return Ok(Term::lm(
            ident_var(binder)?,
            term_prime_from_json_inner(&arr[1])?,
        ));
    }
    Err(err(format!("unknown term constructor in {v}")))
}

pub fn term_prime_from_json(v: &Value) -> Result<TermPrime, JsonError> {
    term_prime_from_json_inner(v)
}

pub fn term_from_json(v: &Value) -> Result<Term, JsonError> {
    let t = term_prime_from_json_inner(v)?;
    let tagged = std::cell::Cell::new(false);
    let stripped = t.map_consts(&|c| match c {
        EConst::Base(b) => b.clone(),
        _ => {
            tagged.set(true);
            ConstName::new("tag")
        }
    });
    if tagged.get() {
        return Err(err("tag constants are not part of the base calculus"));
    }
    Ok(stripped)
}

fn dir_to_json(d: &Dir) -> Value {
    match d {
        Dir::FunSide => json!("fun"),
        Dir::ArgSide => json!("arg"),
        Dir::UnderBinder => json!("under"),
    }
}

fn dir_from_json(v: &Value) -> Result<Dir, JsonError> {
    match v.as_str() {
        Some("fun") => Ok(Dir::FunSide),
        Some("arg") => Ok(Dir::ArgSide),
        Some("under") => Ok(Dir::UnderBinder),
        _ => Err(err(format!("bad path element {v}"))),
    }
}

pub fn path_to_json(p: &RedexPath) -> (Value, Value) {
    let kind = match p.kind {
        RedexKind::Beta => json!("beta"),
        RedexKind::Delta => json!("delta"),
    };
    (json!(p.dirs.iter().map(dir_to_json).collect::<Vec<_>>()), kind)
}

pub fn path_from_json(path: &Value, kind: &Value) -> Result<RedexPath, JsonError> {
    let dirs = path
        .as_array()
        .ok_or_else(|| err("path must be an array"))?
        .iter()
        .map(dir_from_json)
        .collect::<Result<Vec<_>, _>>()?;
    let kind = match kind.as_str() {
        Some("beta") => RedexKind::Beta,
        Some("delta") => RedexKind::Delta,
        _ => return Err(err(format!("bad redex kind {kind}"))),
    };
    Ok(RedexPath { dirs, kind })
}

pub fn trace_to_json(t: &Trace) -> Value {
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|(p, to)| {
            let (path, kind) = path_to_json(p);
            json!({ "path": path, "kind": kind, "to": term_to_json(to) })
        })
        .collect();
    json!({ "start": term_to_json(&t.start), "steps": steps })
}

pub fn trace_from_json(v: &Value) -> Result<Trace, JsonError> {
    let obj = v.as_object().ok_or_else(|| err("trace must be an object"))?;
    let start = term_from_json(obj.get("start").ok_or_else(|| err("missing start"))?)?;
    let steps = obj
        .get("steps")
        .and_then(Value::as_array)
        .ok_or_else(|| err("missing steps array"))?
        .iter()
        .map(|s| {
            let o = s.as_object().ok_or_else(|| err("step must be an object"))?;
            let p = path_from_json(
                o.get("path").ok_or_else(|| err("missing path"))?,
                o.get("kind").ok_or_else(|| err("missing kind"))?,
            )?;
            let to = term_from_json(o.get("to").ok_or_else(|| err("missing to"))?)?;
            Ok((p, to))
        })
        .collect::<Result<Vec<_>, JsonError>>()?;
    Ok(Trace { start, steps })
}

fn with_label(mut node: Map<String, Value>, label: u64) -> Value {
    node.insert("label".into(), json!(label));
    Value::Object(node)
}

pub fn derivation_to_json(d: &ParDerivation) -> Value {
    let label = d.replay().map(|r| r.label).unwrap_or(0);
    let node = match d {
        ParDerivation::ReflLeaf(t) => json!({ "refl": term_to_json(t) }),
        ParDerivation::DeltaLeaf { c1, c2, result } => json!({
            "delta": { "left": c1.to_string(), "right": c2.to_string(),
                        "result": term_to_json(result) }
        }),
        ParDerivation::BetaNode { binder, body, arg } => json!({
            "beta": { "binder": binder.to_string(),
                       "body": derivation_to_json(body),
                       "arg": derivation_to_json(arg) }
        }),
        ParDerivation::AppNode { fun, arg } => json!({
            "app": { "fun": derivation_to_json(fun), "arg": derivation_to_json(arg) }
        }),
        ParDerivation::XiNode { binder, body } => json!({
            "xi": { "binder": binder.to_string(), "body": derivation_to_json(body) }
        }),
    };
    with_label(node.as_object().cloned().unwrap(), label)
}

pub fn derivation_from_json(v: &Value) -> Result<ParDerivation, JsonError> {
    let obj = v
        .as_object()
        .ok_or_else(|| err("derivation must be an object"))?;
    if let Some(t) = obj.get("refl") {
        return Ok(ParDerivation::ReflLeaf(term_from_json(t)?));
    }
    if let Some(d) = obj.get("delta") {
        let o = d.as_object().ok_or_else(|| err("delta node"))?;
        let c1 = o
            .get("left")
            .and_then(Value::as_str)
            .ok_or_else(|| err("delta left"))?;
        let c2 = o
            .get("right")
            .and_then(Value::as_str)
            .ok_or_else(|| err("delta right"))?;
        let result = term_from_json(o.get("result").ok_or_else(|| err("delta result"))?)?;
        return Ok(ParDerivation::DeltaLeaf {
            c1: ConstName::new(c1),
            c2: ConstName::new(c2),
            result,
        });
    }
    if let Some(d) = obj.get("beta") {
        let o = d.as_object().ok_or_else(|| err("beta node"))?;
        let binder = o
            .get("binder")
            .and_then(Value::as_str)
            .ok_or_else(|| err("beta binder"))?;
        return Ok(ParDerivation::beta(
            ident_var(binder)?,
            derivation_from_json(o.get("body").ok_or_else(|| err("beta body"))?)?,
            derivation_from_json(o.get("arg").ok_or_else(|| err("beta arg"))?)?,
        ));
    }
    if let Some(d) = obj.get("app") {
        let o = d.as_object().ok_or_else(|| err("app node"))?;
        return Ok(ParDerivation::app(
            derivation_from_json(o.get("fun").ok_or_else(|| err("app fun"))?)?,
            derivation_from_json(o.get("arg").ok_or_else(|| err("app arg"))?)?,
        ));
    }
    if let Some(d) = obj.get("xi") {
        let o = d.as_object().ok_or_else(|| err("xi node"))?;
        let binder = o
            .get("binder")
            .and_then(Value::as_str)
            .ok_or_else(|| err("xi binder"))?;
        return Ok(ParDerivation::xi(
            ident_var(binder)?,
            derivation_from_json(o.get("body").ok_or_else(|| err("xi body"))?)?,
        ));
    }
    Err(err(format!("unknown derivation node in {v}")))
}

pub fn derivation_v_to_json(d: &ParDerivationV) -> Value {
    let label = d.replay().map(|r| r.label).unwrap_or(0);
    let node = match d {
        ParDerivationV::ReflLeaf(t) => json!({ "refl": term_to_json(&t.to_unsorted()) }),
        ParDerivationV::DeltaLeaf { c1, c2, result } => json!({
            "delta": { "left": c1.to_string(), "right": c2.to_string(),
                        "result": term_to_json(&result.to_unsorted()) }
        }),
        ParDerivationV::BetaNode { binder, body, arg } => json!({
            "beta": { "binder": binder.to_string(),
                       "body": derivation_v_to_json(body),
                       "arg": derivation_v_to_json(arg) }
        }),
        ParDerivationV::AppNode { fun, arg } => json!({
            "app": { "fun": derivation_v_to_json(fun), "arg": derivation_v_to_json(arg) }
        }),
        ParDerivationV::XiNode { binder, body } => json!({
            "xi": { "binder": binder.to_string(), "body": derivation_v_to_json(body) }
        }),
    };
    with_label(node.as_object().cloned().unwrap(), label)
}

pub fn srs_to_json(xs: &[Term]) -> Value {
    json!({ "terms": xs.iter().map(term_to_json).collect::<Vec<_>>() })
}

pub fn srs_v_to_json(xs: &[TermV]) -> Value {
    json!({ "terms": xs.iter().map(|t| term_to_json(&t.to_unsorted())).collect::<Vec<_>>() })
}

pub fn srs_from_json(v: &Value) -> Result<Vec<Term>, JsonError> {
    v.as_object()
        .and_then(|o| o.get("terms"))
        .and_then(Value::as_array)
        .ok_or_else(|| err("standard sequence must be {\"terms\": [...]}"))?
        .iter()
        .map(term_from_json)
        .collect()
}

/// Loads a CBN delta table: a JSON array of rules with term results.
pub fn delta_from_json(v: &Value) -> Result<DeltaTable, JsonError> {
    let mut table = DeltaTable::new();
    for rule in v
        .as_array()
        .ok_or_else(|| err("delta table must be an array"))?
    {
        let o = rule
            .as_object()
            .ok_or_else(|| err("delta rule must be an object"))?;
        let left = o
            .get("left")
            .and_then(Value::as_str)
            .ok_or_else(|| err("missing left constant"))?;
        let right = o
            .get("right")
            .and_then(Value::as_str)
            .ok_or_else(|| err("missing right constant"))?;
        let result = term_from_json(o.get("result").ok_or_else(|| err("missing result"))?)?;
        table
            .insert(ConstName::new(left), ConstName::new(right), result)
            .map_err(|e| err(e.to_string()))?;
    }
    Ok(table)
}

/// Loads a CBV delta table; results must be value-shaped.
pub fn delta_v_from_json(v: &Value) -> Result<DeltaTableV, JsonError> {
    let mut table = DeltaTableV::new();
    for rule in v
        .as_array()
        .ok_or_else(|| err("delta table must be an array"))?
    {
        let o = rule
            .as_object()
            .ok_or_else(|| err("delta rule must be an object"))?;
        let left = o
            .get("left")
            .and_then(Value::as_str)
            .ok_or_else(|| err("missing left constant"))?;
        let right = o
            .get("right")
            .and_then(Value::as_str)
            .ok_or_else(|| err("missing right constant"))?;
        let result = term_from_json(o.get("result").ok_or_else(|| err("missing result"))?)?;
        let sorted = lambda_core::cbv::from_unsorted(&result);
        let value = match sorted {
            TermV::Val(v) => v,
            TermV::App(..) => {
                return Err(err(format!(
                    "CBV delta results must be values, got {result}"
                )))
            }
        };
        table
            .insert(ConstName::new(left), ConstName::new(right), value)
            .map_err(|e| err(e.to_string()))?;
    }
    Ok(table)
}

pub fn delta_to_json(t: &DeltaTable) -> Value {
    let rules: Vec<Value> = t
        .iter()
        .map(|((c1, c2), z)| {
            json!({ "left": c1.to_string(), "right": c2.to_string(),
                     "result": term_to_json(z) })
        })
        .collect();
    Value::Array(rules)
}

#[allow(dead_code)]
fn value_v_to_json(v: &ValueV) -> Value {
    term_to_json(&v.to_unsorted())
}
