//! Labeled parallel reduction for the call-by-value calculus.
//!
//! Mirrors the call-by-name derivations; the differences live in the side
//! conditions. A beta node requires its argument derivation to target a
//! value, left commutation must first left-evaluate non-value arguments to
//! values before a top beta can fire, and the argument side of an
//! application opens up under any value head.

use crate::cbn::par::DerivationError;
use crate::cbn::step::{Dir, RedexKind, RedexPath};
use crate::cbv::step::{step_left_cbv, step_left_cbv_with_path, TraceV};
use crate::cbv::syntax::{DeltaTableV, TermV, ValueV};
use crate::syntax::{AvoidSet, VarName};

use DerivationError as Err;

/// Derivation tree for one labeled parallel CBV step.
#[derive(Clone, Debug)]
pub enum ParDerivationV {
    /// Reflexivity on an injected variable or constant.
    ReflLeaf(TermV),
    DeltaLeaf {
        c1: crate::syntax::ConstName,
        c2: crate::syntax::ConstName,
        result: ValueV,
    },
    /// `App (Val (Lm y B)) A => B'[V'/y]`; the argument derivation must
    /// target a value.
    BetaNode {
        binder: VarName,
        body: Box<ParDerivationV>,
        arg: Box<ParDerivationV>,
    },
    AppNode {
        fun: Box<ParDerivationV>,
        arg: Box<ParDerivationV>,
    },
    /// `Val (Lm y B) => Val (Lm y B')`.
    XiNode {
        binder: VarName,
        body: Box<ParDerivationV>,
    },
}

/// Replay data of a CBV derivation.
#[derive(Clone, Debug)]
pub struct ReplayV {
    pub source: TermV,
    pub target: TermV,
    pub label: u64,
}

impl ParDerivationV {
    pub fn beta(binder: VarName, body: ParDerivationV, arg: ParDerivationV) -> Self {
        ParDerivationV::BetaNode {
            binder,
            body: Box::new(body),
            arg: Box::new(arg),
        }
    }

    pub fn app(fun: ParDerivationV, arg: ParDerivationV) -> Self {
        ParDerivationV::AppNode {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn xi(binder: VarName, body: ParDerivationV) -> Self {
        ParDerivationV::XiNode {
            binder,
            body: Box::new(body),
        }
    }

    pub fn replay(&self) -> Result<ReplayV, DerivationError> {
        match self {
            ParDerivationV::ReflLeaf(t) => match t {
                TermV::Val(ValueV::Var(_)) | TermV::Val(ValueV::Ct(_)) => Ok(ReplayV {
                    source: t.clone(),
                    target: t.clone(),
                    label: 0,
                }),
                other => Err(Err::Malformed(format!(
                    "reflexivity leaf on a non-atomic term: {other}"
                ))),
            },
            ParDerivationV::DeltaLeaf { c1, c2, result } => Ok(ReplayV {
                source: TermV::app(
                    TermV::Val(ValueV::Ct(c1.clone())),
                    TermV::Val(ValueV::Ct(c2.clone())),
                ),
                target: TermV::Val(result.clone()),
                label: 1,
            }),
            ParDerivationV::BetaNode { binder, body, arg } => {
                let b = body.replay()?;
                let a = arg.replay()?;
                let value = match a.target.as_value() {
                    Some(v) => v.clone(),
                    None => {
                        return Err(Err::Malformed(format!(
                            "beta argument derivation targets a non-value: {}",
                            a.target
                        )))
                    }
                };
                let label = 1 + b.label + a.label * b.target.count_occ(binder);
                Ok(ReplayV {
                    source: TermV::app(
                        TermV::Val(ValueV::lm(binder.clone(), b.source)),
                        a.source,
                    ),
                    target: b.target.subst(&value, binder),
                    label,
                })
            }
            ParDerivationV::AppNode { fun, arg } => {
                let f = fun.replay()?;
                let a = arg.replay()?;
                Ok(ReplayV {
                    source: TermV::app(f.source, a.source),
                    target: TermV::app(f.target, a.target),
                    label: f.label + a.label,
                })
            }
            ParDerivationV::XiNode { binder, body } => {
                let b = body.replay()?;
                Ok(ReplayV {
                    source: TermV::Val(ValueV::lm(binder.clone(), b.source)),
                    target: TermV::Val(ValueV::lm(binder.clone(), b.target)),
                    label: b.label,
                })
            }
        }
    }

    pub fn validate(&self, delta: &DeltaTableV) -> Result<ReplayV, DerivationError> {
        self.check_deltas(delta)?;
        self.replay()
    }

    fn check_deltas(&self, delta: &DeltaTableV) -> Result<(), DerivationError> {
        match self {
            ParDerivationV::ReflLeaf(_) => Ok(()),
            ParDerivationV::DeltaLeaf { c1, c2, result } => match delta.lookup(c1, c2) {
                Some(v) if v.alpha_eq(result) => Ok(()),
                Some(v) => Err(Err::DeltaMismatch(format!(
                    "table maps ({c1}, {c2}) to {v}, derivation stores {result}"
                ))),
                None => Err(Err::DeltaMismatch(format!(
                    "table has no rule for ({c1}, {c2})"
                ))),
            },
            ParDerivationV::BetaNode { body, arg, .. } => {
                body.check_deltas(delta)?;
                arg.check_deltas(delta)
            }
            ParDerivationV::AppNode { fun, arg } => {
                fun.check_deltas(delta)?;
                arg.check_deltas(delta)
            }
            ParDerivationV::XiNode { body, .. } => body.check_deltas(delta),
        }
    }
}

/// `(source, target, label)` of a valid CBV derivation.
pub fn replay_derivation_cbv(
    d: &ParDerivationV,
    delta: &DeltaTableV,
) -> Result<(TermV, TermV, u64), DerivationError> {
    let r = d.validate(delta)?;
    Ok((r.source, r.target, r.label))
}

/// The label-0 derivation `t => t`.
pub fn refl_derivation_cbv(t: &TermV) -> ParDerivationV {
    match t {
        TermV::Val(ValueV::Var(_)) | TermV::Val(ValueV::Ct(_)) => {
            ParDerivationV::ReflLeaf(t.clone())
        }
        TermV::Val(ValueV::Lm(x, b)) => ParDerivationV::xi(x.clone(), refl_derivation_cbv(b)),
        TermV::App(f, a) => {
            ParDerivationV::app(refl_derivation_cbv(f), refl_derivation_cbv(a))
        }
    }
}

/// Enumerates the complete set of parallel CBV derivations out of `t`.
pub fn step_par_cbv(t: &TermV, delta: &DeltaTableV) -> Vec<ParDerivationV> {
    match t {
        TermV::Val(ValueV::Var(_)) | TermV::Val(ValueV::Ct(_)) => {
            vec![ParDerivationV::ReflLeaf(t.clone())]
        }
        TermV::Val(ValueV::Lm(x, b)) => step_par_cbv(b, delta)
            .into_iter()
            .map(|d| ParDerivationV::xi(x.clone(), d))
            .collect(),
        TermV::App(f, a) => {
            let dfs = step_par_cbv(f, delta);
            let das = step_par_cbv(a, delta);
            let mut out = Vec::new();
            for df in &dfs {
                for da in &das {
                    out.push(ParDerivationV::app(df.clone(), da.clone()));
                }
            }
            if let TermV::Val(ValueV::Lm(y, body)) = &**f {
                // the beta rule needs the argument to land on a value
                let value_das: Vec<&ParDerivationV> = das
                    .iter()
                    .filter(|da| {
                        da.replay()
                            .map(|r| r.target.as_value().is_some())
                            .unwrap_or(false)
                    })
                    .collect();
                for db in step_par_cbv(body, delta) {
                    for da in &value_das {
                        out.push(ParDerivationV::beta(y.clone(), db.clone(), (*da).clone()));
                    }
                }
            }
            if let (TermV::Val(ValueV::Ct(c1)), TermV::Val(ValueV::Ct(c2))) = (&**f, &**a) {
                if let Some(v) = delta.lookup(c1, c2) {
                    out.push(ParDerivationV::DeltaLeaf {
                        c1: c1.clone(),
                        c2: c2.clone(),
                        result: v.clone(),
                    });
                }
            }
            out
        }
    }
}

/// Transposition of two variables throughout a derivation.
pub fn swap_derivation_cbv(d: &ParDerivationV, y: &VarName, z: &VarName) -> ParDerivationV {
    let sw = |x: &VarName| {
        if x == y {
            z.clone()
        } else if x == z {
            y.clone()
        } else {
            x.clone()
        }
    };
    match d {
        ParDerivationV::ReflLeaf(t) => ParDerivationV::ReflLeaf(t.swap(y, z)),
        ParDerivationV::DeltaLeaf { c1, c2, result } => ParDerivationV::DeltaLeaf {
            c1: c1.clone(),
            c2: c2.clone(),
            result: result.swap(y, z),
        },
        ParDerivationV::BetaNode { binder, body, arg } => ParDerivationV::beta(
            sw(binder),
            swap_derivation_cbv(body, y, z),
            swap_derivation_cbv(arg, y, z),
        ),
        ParDerivationV::AppNode { fun, arg } => ParDerivationV::app(
            swap_derivation_cbv(fun, y, z),
            swap_derivation_cbv(arg, y, z),
        ),
        ParDerivationV::XiNode { binder, body } => {
            ParDerivationV::xi(sw(binder), swap_derivation_cbv(body, y, z))
        }
    }
}

/// CBV substitution of derivations: `dx : X => X'` and a value-to-value
/// `dv : Val W => Val W'` give `X[W/y] => X'[W'/y]`, with the same label
/// bound as on the call-by-name side.
pub fn subst_par_cbv(
    dx: &ParDerivationV,
    dv: &ParDerivationV,
    y: &VarName,
    delta: &DeltaTableV,
) -> Result<ParDerivationV, DerivationError> {
    let rv = dv.validate(delta)?;
    if rv.source.as_value().is_none() || rv.target.as_value().is_none() {
        return Err(Err::Precondition(format!(
            "substituted derivation must run between values: {} => {}",
            rv.source, rv.target
        )));
    }
    let mut fv: AvoidSet = rv.source.free_vars();
    fv.extend(rv.target.free_vars());
    subst_inner(dx, dv, y, &fv, delta)
}

fn subst_inner(
    dx: &ParDerivationV,
    dv: &ParDerivationV,
    y: &VarName,
    fv: &AvoidSet,
    delta: &DeltaTableV,
) -> Result<ParDerivationV, DerivationError> {
    match dx {
        ParDerivationV::ReflLeaf(TermV::Val(ValueV::Var(x))) => {
            if x == y {
                Ok(dv.clone())
            } else {
                Ok(dx.clone())
            }
        }
        ParDerivationV::ReflLeaf(_) => Ok(dx.clone()),
        ParDerivationV::DeltaLeaf { result, .. } => {
            if result.fresh_in(y) {
                Ok(dx.clone())
            } else {
                Err(Err::Precondition(format!(
                    "delta result {result} is not closed (free {y})"
                )))
            }
        }
        ParDerivationV::AppNode { fun, arg } => Ok(ParDerivationV::app(
            subst_inner(fun, dv, y, fv, delta)?,
            subst_inner(arg, dv, y, fv, delta)?,
        )),
        ParDerivationV::XiNode { binder, body } => {
            if binder == y {
                Ok(dx.clone())
            } else if fv.contains(binder) {
                let (z, body2) = rename_binder_cbv(binder, body, fv, y)?;
                Ok(ParDerivationV::xi(z, subst_inner(&body2, dv, y, fv, delta)?))
            } else {
                Ok(ParDerivationV::xi(
                    binder.clone(),
                    subst_inner(body, dv, y, fv, delta)?,
                ))
            }
        }
        ParDerivationV::BetaNode { binder, body, arg } => {
            let arg2 = subst_inner(arg, dv, y, fv, delta)?;
            if binder == y {
                Ok(ParDerivationV::beta(binder.clone(), (**body).clone(), arg2))
            } else if fv.contains(binder) {
                let (z, body2) = rename_binder_cbv(binder, body, fv, y)?;
                Ok(ParDerivationV::beta(
                    z,
                    subst_inner(&body2, dv, y, fv, delta)?,
                    arg2,
                ))
            } else {
                Ok(ParDerivationV::beta(
                    binder.clone(),
                    subst_inner(body, dv, y, fv, delta)?,
                    arg2,
                ))
            }
        }
    }
}

fn rename_binder_cbv(
    binder: &VarName,
    body: &ParDerivationV,
    fv_extra: &AvoidSet,
    also: &VarName,
) -> Result<(VarName, ParDerivationV), DerivationError> {
    let rb = body.replay()?;
    let mut avoid = rb.source.free_vars();
    avoid.extend(rb.target.free_vars());
    avoid.extend(fv_extra.iter().cloned());
    avoid.insert(binder.clone());
    avoid.insert(also.clone());
    let z = crate::syntax::fresh_var(&avoid, binder.base());
    Ok((z.clone(), swap_derivation_cbv(body, binder, &z)))
}

/// Result of inverting a derivation out of an abstraction value.
#[derive(Clone, Debug)]
pub enum LmInversionV {
    Reflexive,
    Xi(ParDerivationV),
}

/// Binder-synchronized inversion for `Val (Lm y Y)` sources.
pub fn invert_lm_cbv(
    d: &ParDerivationV,
    y: &VarName,
) -> Result<LmInversionV, DerivationError> {
    let rep = d.replay()?;
    let ok = match &rep.source {
        TermV::Val(ValueV::Lm(z, body)) => z == y || body.fresh_in(y),
        _ => false,
    };
    if !ok {
        return Err(Err::Precondition(format!(
            "source {} is not an abstraction value binding {y} up to alpha",
            rep.source
        )));
    }
    if rep.label == 0 {
        return Ok(LmInversionV::Reflexive);
    }
    match d {
        ParDerivationV::XiNode { binder, body } => {
            if binder == y {
                Ok(LmInversionV::Xi((**body).clone()))
            } else {
                Ok(LmInversionV::Xi(swap_derivation_cbv(body, y, binder)))
            }
        }
        _ => Err(Err::Malformed(
            "abstraction-value source without a xi derivation".into(),
        )),
    }
}

/// From `d : X => Y1` builds a derivation `Y1 => cdev X` (CBV triangle).
pub fn cdev_join_cbv(
    d: &ParDerivationV,
    delta: &DeltaTableV,
) -> Result<ParDerivationV, DerivationError> {
    d.validate(delta)?;
    cdev_join_inner(d, delta)
}

fn cdev_join_inner(
    d: &ParDerivationV,
    delta: &DeltaTableV,
) -> Result<ParDerivationV, DerivationError> {
    match d {
        ParDerivationV::ReflLeaf(t) => Ok(ParDerivationV::ReflLeaf(t.clone())),
        ParDerivationV::DeltaLeaf { result, .. } => {
            Ok(refl_derivation_cbv(&TermV::Val(result.clone())))
        }
        ParDerivationV::XiNode { binder, body } => Ok(ParDerivationV::xi(
            binder.clone(),
            cdev_join_inner(body, delta)?,
        )),
        ParDerivationV::BetaNode { binder, body, arg } => {
            let jb = cdev_join_inner(body, delta)?;
            let ja = cdev_join_inner(arg, delta)?;
            subst_par_cbv(&jb, &ja, binder, delta)
        }
        ParDerivationV::AppNode { fun, arg } => {
            let rf = fun.replay()?;
            let ra = arg.replay()?;
            if let (TermV::Val(ValueV::Ct(c1)), TermV::Val(ValueV::Ct(c2))) =
                (&rf.source, &ra.source)
            {
                if let Some(v) = delta.lookup(c1, c2) {
                    return Ok(ParDerivationV::DeltaLeaf {
                        c1: c1.clone(),
                        c2: c2.clone(),
                        result: v.clone(),
                    });
                }
            }
            // The development contracts the top application when the
            // function side is an abstraction value and the argument's
            // development lands on a value.
            if matches!(&rf.source, TermV::Val(ValueV::Lm(..))) {
                let ja = cdev_join_inner(arg, delta)?;
                let ja_target_is_value = ja.replay()?.target.as_value().is_some();
                if let ParDerivationV::XiNode { binder, body } = &**fun {
                    let jb = cdev_join_inner(body, delta)?;
                    if ja_target_is_value {
                        return Ok(ParDerivationV::beta(binder.clone(), jb, ja));
                    }
                    return Ok(ParDerivationV::app(
                        ParDerivationV::xi(binder.clone(), jb),
                        ja,
                    ));
                }
                return Err(Err::Malformed(
                    "abstraction-value source without a xi derivation".into(),
                ));
            }
            Ok(ParDerivationV::app(
                cdev_join_inner(fun, delta)?,
                cdev_join_inner(arg, delta)?,
            ))
        }
    }
}

/// Left-evaluates the source of a derivation targeting a value: produces a
/// left trace `A -L->* Val W` and a derivation `Val W => dA.target` with a
/// label bounded by the original.
pub fn left_eval_cbv(
    d: &ParDerivationV,
    delta: &DeltaTableV,
) -> Result<(TraceV, ParDerivationV), DerivationError> {
    let rep = d.replay()?;
    if rep.target.as_value().is_none() {
        return Err(Err::Precondition(format!(
            "left evaluation needs a value target, got {}",
            rep.target
        )));
    }
    if rep.source.as_value().is_some() {
        return Ok((TraceV::empty(rep.source), d.clone()));
    }
    // A non-value source with a value target must contract its top redex.
    let (tr, rest) = contract_top_cbv(d, delta)?;
    let (tr2, dw) = left_eval_cbv(&rest, delta)?;
    let mut out = tr;
    out.append(tr2);
    Ok((out, dw))
}

/// Contracts the top redex of a beta or delta derivation by left steps:
/// the argument is first left-evaluated to a value when needed. Returns the
/// left trace from the source to the contractum and a strictly smaller
/// derivation from there to the target.
pub(crate) fn contract_top_cbv(
    d: &ParDerivationV,
    delta: &DeltaTableV,
) -> Result<(TraceV, ParDerivationV), DerivationError> {
    match d {
        ParDerivationV::DeltaLeaf { result, .. } => {
            let rep = d.replay()?;
            let mut tr = TraceV::empty(rep.source);
            tr.push(
                RedexPath::here(RedexKind::Delta),
                TermV::Val(result.clone()),
            );
            Ok((tr, refl_derivation_cbv(&TermV::Val(result.clone()))))
        }
        ParDerivationV::BetaNode { binder, body, arg } => {
            let rb = body.replay()?;
            let (ta, dw) = left_eval_cbv(arg, delta)?;
            let rw = dw.replay()?;
            let w = rw
                .source
                .as_value()
                .cloned()
                .expect("left evaluation lands on a value");
            let fun_src = ValueV::lm(binder.clone(), rb.source.clone());
            let mut tr = ta.map_into(Dir::ArgSide, |a| {
                TermV::app(TermV::Val(fun_src.clone()), a)
            });
            let contractum = rb.source.subst(&w, binder);
            tr.push(RedexPath::here(RedexKind::Beta), contractum);
            let rest = subst_par_cbv(body, &dw, binder, delta)?;
            Ok((tr, rest))
        }
        _ => Err(Err::Malformed(
            "contract_top_cbv expects a redex node".into(),
        )),
    }
}

/// CBV commutation of a parallel step with a following left step.
pub fn commute_par_left_cbv(
    d: &ParDerivationV,
    z: &TermV,
    delta: &DeltaTableV,
) -> Result<(TraceV, ParDerivationV), DerivationError> {
    let rep = d.validate(delta)?;
    match step_left_cbv(&rep.target, delta) {
        Some(actual) if actual.alpha_eq(z) => {}
        Some(actual) => {
            return Err(Err::Precondition(format!(
                "left step of {} is {actual}, not {z}",
                rep.target
            )))
        }
        None => {
            return Err(Err::Precondition(format!(
                "target {} has no left step",
                rep.target
            )))
        }
    }
    commute_inner_cbv(d, delta)
}

fn commute_inner_cbv(
    d: &ParDerivationV,
    delta: &DeltaTableV,
) -> Result<(TraceV, ParDerivationV), DerivationError> {
    let rep = d.replay()?;
    if rep.label == 0 {
        let (path, z) = step_left_cbv_with_path(&rep.source, delta)
            .ok_or_else(|| Err::Precondition(format!("{} has no left step", rep.source)))?;
        let mut tr = TraceV::empty(rep.source);
        tr.push(path, z.clone());
        return Ok((tr, refl_derivation_cbv(&z)));
    }
    match d {
        ParDerivationV::ReflLeaf(_) | ParDerivationV::XiNode { .. } => Err(Err::Precondition(
            "values have no left step".into(),
        )),
        ParDerivationV::DeltaLeaf { .. } | ParDerivationV::BetaNode { .. } => {
            let (tr0, rest) = contract_top_cbv(d, delta)?;
            let (t2, dd) = commute_inner_cbv(&rest, delta)?;
            let mut tr = tr0;
            tr.append(t2);
            Ok((tr, dd))
        }
        ParDerivationV::AppNode { fun, arg } => {
            let rf = fun.replay()?;
            let ra = arg.replay()?;
            if matches!(
                &**fun,
                ParDerivationV::BetaNode { .. } | ParDerivationV::DeltaLeaf { .. }
            ) {
                let (tf, rest_f) = contract_top_cbv(fun, delta)?;
                let arg_src = ra.source.clone();
                let tr0 = tf.map_into(Dir::FunSide, |f| TermV::app(f, arg_src.clone()));
                let d2 = ParDerivationV::app(rest_f, (**arg).clone());
                let (t2, dd) = commute_inner_cbv(&d2, delta)?;
                let mut tr = tr0;
                tr.append(t2);
                return Ok((tr, dd));
            }
            match &rf.target {
                TermV::Val(fun_value) => {
                    let top_beta = matches!(fun_value, ValueV::Lm(..))
                        && ra.target.as_value().is_some();
                    if top_beta {
                        // fun is a xi node; left-evaluate the argument to a
                        // value, then fire the top beta on the left.
                        if let ParDerivationV::XiNode { binder, body } = &**fun {
                            let rb = body.replay()?;
                            let (ta, dw) = left_eval_cbv(arg, delta)?;
                            let rw = dw.replay()?;
                            let w = rw
                                .source
                                .as_value()
                                .cloned()
                                .expect("left evaluation lands on a value");
                            let fun_src = ValueV::lm(binder.clone(), rb.source.clone());
                            let mut tr = ta.map_into(Dir::ArgSide, |a| {
                                TermV::app(TermV::Val(fun_src.clone()), a)
                            });
                            let contractum = rb.source.subst(&w, binder);
                            tr.push(RedexPath::here(RedexKind::Beta), contractum);
                            let dd = subst_par_cbv(body, &dw, binder, delta)?;
                            Ok((tr, dd))
                        } else {
                            Err(Err::Malformed(
                                "abstraction-value target without a xi derivation".into(),
                            ))
                        }
                    } else if matches!(
                        &**arg,
                        ParDerivationV::BetaNode { .. } | ParDerivationV::DeltaLeaf { .. }
                    ) {
                        // fun's source is a value here, so the argument-side
                        // left steps are admissible.
                        let (ta, rest_a) = contract_top_cbv(arg, delta)?;
                        let fun_src = rf.source.clone();
                        let tr0 =
                            ta.map_into(Dir::ArgSide, |a| TermV::app(fun_src.clone(), a));
                        let d2 = ParDerivationV::app((**fun).clone(), rest_a);
                        let (t2, dd) = commute_inner_cbv(&d2, delta)?;
                        let mut tr = tr0;
                        tr.append(t2);
                        Ok((tr, dd))
                    } else {
                        // left step inside the argument; the fun derivation
                        // tags along unchanged (its source is a value).
                        let (ta, dda) = commute_inner_cbv(arg, delta)?;
                        let fun_src = rf.source.clone();
                        let tr =
                            ta.map_into(Dir::ArgSide, |a| TermV::app(fun_src.clone(), a));
                        Ok((tr, ParDerivationV::app((**fun).clone(), dda)))
                    }
                }
                TermV::App(..) => {
                    let (tf, ddf) = commute_inner_cbv(fun, delta)?;
                    let arg_src = ra.source.clone();
                    let tr = tf.map_into(Dir::FunSide, |f| TermV::app(f, arg_src.clone()));
                    Ok((tr, ParDerivationV::app(ddf, (**arg).clone())))
                }
            }
        }
    }
}

/// Chain validation, CBV side.
pub fn validate_chain_cbv(
    start: &TermV,
    chain: &[ParDerivationV],
    delta: &DeltaTableV,
) -> Result<Vec<ReplayV>, DerivationError> {
    let mut cur = start.clone();
    let mut reps = Vec::with_capacity(chain.len());
    for (i, d) in chain.iter().enumerate() {
        let rep = d.validate(delta)?;
        if !rep.source.alpha_eq(&cur) {
            return Err(Err::InvalidChain(format!(
                "link {i}: expected source {cur}, found {}",
                rep.source
            )));
        }
        cur = rep.target.clone();
        reps.push(rep);
    }
    Ok(reps)
}

/// CBV confluence join by tiling the triangle property.
pub fn join_multi_cbv(
    start: &TermV,
    chain1: &[ParDerivationV],
    chain2: &[ParDerivationV],
    delta: &DeltaTableV,
) -> Result<(TermV, Vec<ParDerivationV>, Vec<ParDerivationV>), DerivationError> {
    let reps1 = validate_chain_cbv(start, chain1, delta)?;
    validate_chain_cbv(start, chain2, delta)?;

    fn strip(
        d: &ParDerivationV,
        chain: &[ParDerivationV],
        delta: &DeltaTableV,
    ) -> Result<(TermV, Vec<ParDerivationV>, ParDerivationV), DerivationError> {
        match chain.split_first() {
            None => {
                let rep = d.replay()?;
                Ok((rep.target, Vec::new(), d.clone()))
            }
            Some((e, rest)) => {
                let dd = cdev_join_cbv(d, delta)?;
                let de = cdev_join_cbv(e, delta)?;
                let (w, mut cw, zw) = strip(&de, rest, delta)?;
                let mut chain_out = vec![dd];
                chain_out.append(&mut cw);
                Ok((w, chain_out, zw))
            }
        }
    }

    match chain1.split_first() {
        None => {
            let end2 = chain2
                .last()
                .map(|d| d.replay().map(|r| r.target))
                .transpose()?
                .unwrap_or_else(|| start.clone());
            Ok((end2, chain2.to_vec(), Vec::new()))
        }
        Some((d1, rest1)) => {
            let (_, chain_a, s2) = strip(d1, chain2, delta)?;
            let x1 = reps1[0].target.clone();
            let (z, ext1, mut ext_a) = join_multi_cbv(&x1, rest1, &chain_a, delta)?;
            let mut ext2 = vec![s2];
            ext2.append(&mut ext_a);
            Ok((z, ext1, ext2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbv::step::{cdev_cbv, step_left_cbv};
    use crate::syntax::ConstName;

    fn v(s: &str) -> VarName {
        VarName::from_ident(s)
    }

    fn vvar(s: &str) -> TermV {
        TermV::Val(ValueV::Var(v(s)))
    }

    fn vct(s: &str) -> TermV {
        TermV::Val(ValueV::Ct(ConstName::new(s)))
    }

    fn vlm(x: &str, b: TermV) -> TermV {
        TermV::Val(ValueV::lm(v(x), b))
    }

    fn vapp(f: TermV, a: TermV) -> TermV {
        TermV::app(f, a)
    }

    fn no_delta() -> DeltaTableV {
        DeltaTableV::new()
    }

    #[test]
    fn reflexive_expansion_exists_for_every_term() {
        let terms = vec![
            vvar("x"),
            vlm("x", vapp(vvar("x"), vvar("x"))),
            vapp(vlm("y", vvar("y")), vapp(vlm("z", vvar("z")), vct("c"))),
        ];
        for t in terms {
            let r = refl_derivation_cbv(&t).validate(&no_delta()).unwrap();
            assert!(r.source.alpha_eq(&t) && r.target.alpha_eq(&t));
            assert_eq!(r.label, 0);
        }
    }

    #[test]
    fn beta_requires_value_target_on_the_argument() {
        // (\y. y) ((\z. z) #c): the argument derivation to #c is a value,
        // so a beta derivation exists with the substituted target.
        let t = vapp(vlm("y", vvar("y")), vapp(vlm("z", vvar("z")), vct("c")));
        let ds = step_par_cbv(&t, &no_delta());
        let has_beta_to_c = ds.iter().any(|d| {
            matches!(d, ParDerivationV::BetaNode { .. })
                && d.replay().unwrap().target.alpha_eq(&vct("c"))
        });
        assert!(has_beta_to_c);
        // no beta derivation keeps the argument as an application
        for d in &ds {
            if let ParDerivationV::BetaNode { arg, .. } = d {
                assert!(arg.replay().unwrap().target.as_value().is_some());
            }
        }
    }

    #[test]
    fn value_sources_have_value_targets() {
        let t = vlm("x", vapp(vlm("y", vvar("y")), vvar("x")));
        for d in step_par_cbv(&t, &no_delta()) {
            let r = d.replay().unwrap();
            assert!(r.target.as_value().is_some());
        }
    }

    #[test]
    fn cbv_diamond_on_samples() {
        let dv = DeltaTableV::sample_succ(2);
        let samples = vec![
            vapp(vlm("y", vapp(vvar("y"), vvar("y"))), vct("c")),
            vapp(vlm("y", vvar("y")), vapp(vlm("z", vvar("z")), vct("c"))),
            vapp(vct("succ"), vct("num0")),
            vapp(
                vapp(vlm("x", vvar("x")), vct("a")),
                vapp(vlm("z", vvar("z")), vct("b")),
            ),
        ];
        for t in samples {
            let want = cdev_cbv(&t, &dv);
            for d in step_par_cbv(&t, &dv) {
                let rd = d.replay().unwrap();
                let j = cdev_join_cbv(&d, &dv).unwrap();
                let rj = j.validate(&dv).unwrap();
                assert!(rj.source.alpha_eq(&rd.target), "term {t}");
                assert!(rj.target.alpha_eq(&want), "term {t}");
            }
        }
    }

    #[test]
    fn subst_par_cbv_label_bound() {
        let d = no_delta();
        let dx_src = vapp(vlm("z", vapp(vvar("y"), vvar("y"))), vct("c"));
        let dv_src = vlm("k", vapp(vlm("q", vvar("q")), vvar("k")));
        for dx in step_par_cbv(&dx_src, &d) {
            for dv in step_par_cbv(&dv_src, &d) {
                let rx = dx.replay().unwrap();
                let rv = dv.replay().unwrap();
                let out = subst_par_cbv(&dx, &dv, &v("y"), &d).unwrap();
                let r = out.validate(&d).unwrap();
                let w_src = rv.source.as_value().unwrap().clone();
                let w_tgt = rv.target.as_value().unwrap().clone();
                assert!(r.source.alpha_eq(&rx.source.subst(&w_src, &v("y"))));
                assert!(r.target.alpha_eq(&rx.target.subst(&w_tgt, &v("y"))));
                assert!(r.label <= rx.label + rx.target.count_occ(&v("y")) * rv.label);
            }
        }
    }

    #[test]
    fn left_eval_reaches_a_value() {
        let d = no_delta();
        // ((\z. z) (\w. w)) evaluates on the left to \w. w
        let a = vapp(vlm("z", vvar("z")), vlm("w", vvar("w")));
        for da in step_par_cbv(&a, &d) {
            let ra = da.replay().unwrap();
            if ra.target.as_value().is_none() {
                continue;
            }
            let (tr, dw) = left_eval_cbv(&da, &d).unwrap();
            tr.validate(&d).unwrap();
            assert!(tr.start.alpha_eq(&a));
            let rw = dw.replay().unwrap();
            assert!(rw.source.as_value().is_some());
            assert!(tr.end().alpha_eq(&rw.source));
            assert!(rw.target.alpha_eq(&ra.target));
            assert!(rw.label <= ra.label);
        }
    }

    #[test]
    fn commute_handles_non_value_arguments() {
        let d = no_delta();
        // X = (\y. y y) ((\z. z) (\w. w)); take the derivation contracting
        // only the inner redex, then left-step its target.
        let inner = vapp(vlm("z", vvar("z")), vlm("w", vvar("w")));
        let x = vapp(vlm("y", vapp(vvar("y"), vvar("y"))), inner);
        for dv in step_par_cbv(&x, &d) {
            let r = dv.replay().unwrap();
            let Some(z) = step_left_cbv(&r.target, &d) else {
                continue;
            };
            let (tr, dd) = commute_par_left_cbv(&dv, &z, &d).unwrap();
            tr.validate(&d).unwrap();
            assert!(tr.start.alpha_eq(&x));
            let rd = dd.validate(&d).unwrap();
            assert!(tr.end().alpha_eq(&rd.source));
            assert!(rd.target.alpha_eq(&z));
        }
    }

    #[test]
    fn join_multi_cbv_on_a_span() {
        let d = no_delta();
        let x = vapp(
            vapp(vlm("x", vvar("x")), vct("a")),
            vapp(vlm("z", vvar("z")), vct("b")),
        );
        let ds = step_par_cbv(&x, &d);
        let d1 = ds[1].clone();
        let d2 = ds[ds.len() - 1].clone();
        let r1 = d1.replay().unwrap();
        let r2 = d2.replay().unwrap();
        let (z, e1, e2) = join_multi_cbv(&x, &[d1.clone()], &[d2.clone()], &d).unwrap();
        let c1 = validate_chain_cbv(&r1.target, &e1, &d).unwrap();
        let c2 = validate_chain_cbv(&r2.target, &e2, &d).unwrap();
        assert!(c1.last().map(|r| r.target.clone()).unwrap_or(r1.target).alpha_eq(&z));
        assert!(c2.last().map(|r| r.target.clone()).unwrap_or(r2.target).alpha_eq(&z));
    }
}
