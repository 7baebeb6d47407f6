//! Standard reduction sequences for the call-by-value calculus.
//!
//! Same rule shapes as on the call-by-name side — base singletons on
//! injected variables and constants, a left-step rule, abstraction mapping
//! and application merging — with CBV left reduction supplying the steps.
//! The absorption recursion differs in its beta case: the argument must be
//! left-evaluated to a value before the top redex can fire.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::cbn::par::DerivationError;
use crate::cbn::step::{Dir, RedexPath};
use crate::cbv::par::{
    commute_par_left_cbv, contract_top_cbv, invert_lm_cbv, LmInversionV, ParDerivationV,
};
use crate::cbv::step::{step_left_cbv, step_left_cbv_with_path, TraceV};
use crate::cbv::syntax::{DeltaTableV, TermV, ValueV};
use crate::syntax::{AvoidSet, LnTerm, VarName};

#[derive(Debug, thiserror::Error)]
pub enum SrsErrorV {
    #[error("not a standard reduction sequence: {0}")]
    NotSrs(String),
    #[error("empty input list")]
    Empty,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
}

/// `zipApp` on the two-sorted terms; same scheduling as the CBN one.
pub fn zip_app_cbv(xs: &[TermV], ys: &[TermV]) -> Result<Vec<TermV>, SrsErrorV> {
    let (last_x, init_x) = xs.split_last().ok_or(SrsErrorV::Empty)?;
    let (first_y, rest_y) = ys.split_first().ok_or(SrsErrorV::Empty)?;
    let mut out = Vec::with_capacity(xs.len() + ys.len() - 1);
    for x in init_x {
        out.push(TermV::app(x.clone(), first_y.clone()));
    }
    out.push(TermV::app(last_x.clone(), first_y.clone()));
    for y in rest_y {
        out.push(TermV::app(last_x.clone(), y.clone()));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum SrsDerivV {
    Base,
    Red(Box<SrsDerivV>),
    Lm {
        bodies: Vec<TermV>,
        inner: Box<SrsDerivV>,
    },
    App {
        funs: Vec<TermV>,
        args: Vec<TermV>,
        fun_deriv: Box<SrsDerivV>,
        arg_deriv: Box<SrsDerivV>,
    },
}

/// Memoizing decision procedure for CBV standard reduction sequences.
pub struct SrsProverV<'a> {
    delta: &'a DeltaTableV,
    memo: RefCell<HashMap<Vec<LnTerm>, bool>>,
}

impl<'a> SrsProverV<'a> {
    pub fn new(delta: &'a DeltaTableV) -> Self {
        SrsProverV {
            delta,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn key(xs: &[TermV]) -> Vec<LnTerm> {
        xs.iter().map(|t| t.to_ln()).collect()
    }

    pub fn is_srs(&self, xs: &[TermV]) -> bool {
        if xs.is_empty() {
            return false;
        }
        let key = Self::key(xs);
        if let Some(&v) = self.memo.borrow().get(&key) {
            return v;
        }
        let v = self.decide(xs);
        self.memo.borrow_mut().insert(key, v);
        v
    }

    fn decide(&self, xs: &[TermV]) -> bool {
        if xs.len() == 1
            && matches!(xs[0], TermV::Val(ValueV::Var(_)) | TermV::Val(ValueV::Ct(_)))
        {
            return true;
        }
        if xs.len() >= 2 {
            if let Some(z) = step_left_cbv(&xs[0], self.delta) {
                if z.alpha_eq(&xs[1]) && self.is_srs(&xs[1..]) {
                    return true;
                }
            }
        }
        if let Some((_, bodies)) = unmap_lm_cbv(xs, &AvoidSet::new()) {
            if self.is_srs(&bodies) {
                return true;
            }
        }
        if xs.iter().all(|t| matches!(t, TermV::App(..))) {
            for split in 1..=xs.len() {
                if let Some((funs, args)) = unmerge_zip_cbv(xs, split) {
                    if self.is_srs(&funs) && self.is_srs(&args) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn derive(&self, xs: &[TermV]) -> Option<SrsDerivV> {
        if xs.is_empty() || !self.is_srs(xs) {
            return None;
        }
        if xs.len() == 1
            && matches!(xs[0], TermV::Val(ValueV::Var(_)) | TermV::Val(ValueV::Ct(_)))
        {
            return Some(SrsDerivV::Base);
        }
        if xs.len() >= 2 {
            if let Some(z) = step_left_cbv(&xs[0], self.delta) {
                if z.alpha_eq(&xs[1]) && self.is_srs(&xs[1..]) {
                    return Some(SrsDerivV::Red(Box::new(self.derive(&xs[1..])?)));
                }
            }
        }
        if let Some((_, bodies)) = unmap_lm_cbv(xs, &AvoidSet::new()) {
            if self.is_srs(&bodies) {
                let inner = Box::new(self.derive(&bodies)?);
                return Some(SrsDerivV::Lm { bodies, inner });
            }
        }
        if xs.iter().all(|t| matches!(t, TermV::App(..))) {
            for split in 1..=xs.len() {
                if let Some((funs, args)) = unmerge_zip_cbv(xs, split) {
                    if self.is_srs(&funs) && self.is_srs(&args) {
                        let fun_deriv = Box::new(self.derive(&funs)?);
                        let arg_deriv = Box::new(self.derive(&args)?);
                        return Some(SrsDerivV::App {
                            funs,
                            args,
                            fun_deriv,
                            arg_deriv,
                        });
                    }
                }
            }
        }
        None
    }
}

fn unmap_lm_cbv(xs: &[TermV], avoid: &AvoidSet) -> Option<(VarName, Vec<TermV>)> {
    let first = match xs.first()? {
        TermV::Val(ValueV::Lm(x, _)) => x.clone(),
        _ => return None,
    };
    if !xs
        .iter()
        .all(|t| matches!(t, TermV::Val(ValueV::Lm(..))))
    {
        return None;
    }
    let admissible = |y: &VarName| !avoid.contains(y) && xs.iter().all(|t| t.fresh_in(y));
    let binder = if admissible(&first) {
        first
    } else {
        let mut all = avoid.clone();
        for t in xs {
            all.extend(t.free_vars());
            if let TermV::Val(ValueV::Lm(x, _)) = t {
                all.insert(x.clone());
            }
        }
        crate::syntax::fresh_var(&all, first.base())
    };
    let bodies = xs
        .iter()
        .map(|t| match t {
            TermV::Val(ValueV::Lm(x, b)) => {
                if *x == binder {
                    (**b).clone()
                } else {
                    b.swap(x, &binder)
                }
            }
            _ => unreachable!(),
        })
        .collect();
    Some((binder, bodies))
}

fn unmerge_zip_cbv(xs: &[TermV], split: usize) -> Option<(Vec<TermV>, Vec<TermV>)> {
    if split == 0 || split > xs.len() {
        return None;
    }
    let parts: Vec<(&TermV, &TermV)> = xs
        .iter()
        .map(|t| match t {
            TermV::App(f, a) => Some((&**f, &**a)),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let first_arg = parts[0].1;
    let last_fun = parts[split - 1].0;
    if !parts[..split].iter().all(|(_, a)| a.alpha_eq(first_arg)) {
        return None;
    }
    if !parts[split - 1..].iter().all(|(f, _)| f.alpha_eq(last_fun)) {
        return None;
    }
    let funs = parts[..split].iter().map(|(f, _)| (*f).clone()).collect();
    let mut args = vec![first_arg.clone()];
    args.extend(parts[split..].iter().map(|(_, a)| (*a).clone()));
    Some((funs, args))
}

/// True iff `xs` is a CBV standard reduction sequence.
pub fn is_srs_cbv(xs: &[TermV], delta: &DeltaTableV) -> bool {
    SrsProverV::new(delta).is_srs(xs)
}

/// Extracts the step-by-step CBV trace visiting every element in order.
pub fn srs_to_trace_cbv(xs: &[TermV], delta: &DeltaTableV) -> Result<TraceV, SrsErrorV> {
    let prover = SrsProverV::new(delta);
    let deriv = prover
        .derive(xs)
        .ok_or_else(|| SrsErrorV::NotSrs(render_list(xs)))?;
    let paths = step_paths(xs, &deriv, delta);
    debug_assert_eq!(paths.len() + 1, xs.len());
    let trace = TraceV {
        start: xs[0].clone(),
        steps: paths.into_iter().zip(xs[1..].iter().cloned()).collect(),
    };
    debug_assert!(trace.validate(delta).is_ok());
    Ok(trace)
}

fn step_paths(xs: &[TermV], deriv: &SrsDerivV, delta: &DeltaTableV) -> Vec<RedexPath> {
    match deriv {
        SrsDerivV::Base => Vec::new(),
        SrsDerivV::Red(rest) => {
            let (p, _) = step_left_cbv_with_path(&xs[0], delta)
                .expect("Red nodes record an existing left step");
            let mut out = vec![p];
            out.extend(step_paths(&xs[1..], rest, delta));
            out
        }
        SrsDerivV::Lm { bodies, inner } => step_paths(bodies, inner, delta)
            .into_iter()
            .map(|mut p| {
                p.dirs.insert(0, Dir::UnderBinder);
                p
            })
            .collect(),
        SrsDerivV::App {
            funs,
            args,
            fun_deriv,
            arg_deriv,
        } => {
            let mut out: Vec<RedexPath> = step_paths(funs, fun_deriv, delta)
                .into_iter()
                .map(|mut p| {
                    p.dirs.insert(0, Dir::FunSide);
                    p
                })
                .collect();
            out.extend(step_paths(args, arg_deriv, delta).into_iter().map(|mut p| {
                p.dirs.insert(0, Dir::ArgSide);
                p
            }));
            out
        }
    }
}

fn render_list(xs: &[TermV]) -> String {
    let items: Vec<String> = xs.iter().map(|t| t.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// CBV absorption of a parallel step into a standard sequence.
pub fn absorb_into_srs_cbv(
    d: &ParDerivationV,
    xs: &[TermV],
    delta: &DeltaTableV,
) -> Result<Vec<TermV>, SrsErrorV> {
    let prover = SrsProverV::new(delta);
    absorb_with(&prover, d, xs, delta)
}

fn absorb_with(
    prover: &SrsProverV<'_>,
    d: &ParDerivationV,
    xs: &[TermV],
    delta: &DeltaTableV,
) -> Result<Vec<TermV>, SrsErrorV> {
    let rep = d.validate(delta)?;
    let head = xs.first().ok_or(SrsErrorV::Empty)?;
    if !head.alpha_eq(&rep.target) {
        return Err(SrsErrorV::Precondition(format!(
            "sequence starts at {head}, derivation targets {}",
            rep.target
        )));
    }
    if !prover.is_srs(xs) {
        return Err(SrsErrorV::NotSrs(render_list(xs)));
    }
    if rep.label == 0 {
        return Ok(xs.to_vec());
    }
    match &rep.source {
        TermV::Val(ValueV::Lm(..)) => {
            let avoid = rep.source.free_vars();
            let (binder, bodies) = unmap_lm_cbv(xs, &avoid).ok_or_else(|| {
                SrsErrorV::NotSrs(format!(
                    "abstraction-value sequence expected: {}",
                    render_list(xs)
                ))
            })?;
            let body_d = match invert_lm_cbv(d, &binder)? {
                LmInversionV::Reflexive => return Ok(xs.to_vec()),
                LmInversionV::Xi(b) => b,
            };
            let inner = absorb_with(prover, &body_d, &bodies, delta)?;
            Ok(inner
                .into_iter()
                .map(|b| TermV::Val(ValueV::lm(binder.clone(), b)))
                .collect())
        }
        TermV::App(..) => match d {
            ParDerivationV::DeltaLeaf { .. } | ParDerivationV::BetaNode { .. } => {
                // Contract the top redex by left steps (the beta case first
                // left-evaluates the argument to a value), then absorb the
                // remaining derivation; every prepended step is a left step.
                let (trace, rest) = contract_top_cbv(d, delta)?;
                let inner = absorb_with(prover, &rest, xs, delta)?;
                let mut out = trace.terms();
                out.pop();
                out.extend(inner);
                Ok(out)
            }
            ParDerivationV::AppNode { fun, arg } => {
                let deriv = prover
                    .derive(xs)
                    .ok_or_else(|| SrsErrorV::NotSrs(render_list(xs)))?;
                match deriv {
                    SrsDerivV::Red(_) => {
                        let z = step_left_cbv(&rep.target, delta).ok_or_else(|| {
                            SrsErrorV::Precondition(format!(
                                "head {head} left-reduces but target {} does not",
                                rep.target
                            ))
                        })?;
                        let (trace, dd) = commute_par_left_cbv(d, &z, delta)?;
                        let rest = absorb_with(prover, &dd, &xs[1..], delta)?;
                        let mut out = trace.terms();
                        out.pop();
                        out.extend(rest);
                        Ok(out)
                    }
                    SrsDerivV::App { funs, args, .. } => {
                        let new_funs = absorb_with(prover, fun, &funs, delta)?;
                        let new_args = absorb_with(prover, arg, &args, delta)?;
                        Ok(zip_app_cbv(&new_funs, &new_args)?)
                    }
                    SrsDerivV::Base | SrsDerivV::Lm { .. } => Err(SrsErrorV::NotSrs(format!(
                        "application sequence derived by a non-application rule: {}",
                        render_list(xs)
                    ))),
                }
            }
            _ => Err(SrsErrorV::Precondition(
                "application source with a non-application derivation".into(),
            )),
        },
        _ => Err(SrsErrorV::Precondition(format!(
            "positive-label derivation out of {}",
            rep.source
        ))),
    }
}

/// CBV standardization: folds absorption right-to-left over a chain.
pub fn standardize_cbv(
    start: &TermV,
    chain: &[ParDerivationV],
    delta: &DeltaTableV,
) -> Result<Vec<TermV>, SrsErrorV> {
    let reps = crate::cbv::par::validate_chain_cbv(start, chain, delta)?;
    let end = reps
        .last()
        .map(|r| r.target.clone())
        .unwrap_or_else(|| start.clone());
    let prover = SrsProverV::new(delta);
    let mut xs = vec![end];
    for d in chain.iter().rev() {
        xs = absorb_with(&prover, d, &xs, delta)?;
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbv::par::step_par_cbv;
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
    fn base_and_left_step_sequences() {
        let d = no_delta();
        assert!(is_srs_cbv(&[vvar("x")], &d));
        assert!(is_srs_cbv(&[vct("c")], &d));
        let t = vapp(vlm("y", vvar("y")), vct("c"));
        let z = step_left_cbv(&t, &d).unwrap();
        assert!(is_srs_cbv(&[t, z], &d));
        assert!(!is_srs_cbv(&[vapp(vct("c"), vct("c")), vvar("x")], &d));
    }

    #[test]
    fn singleton_composites_are_standard() {
        let d = no_delta();
        assert!(is_srs_cbv(&[vlm("x", vapp(vvar("x"), vvar("x")))], &d));
        assert!(is_srs_cbv(
            &[vapp(vlm("y", vvar("y")), vapp(vvar("x"), vct("c")))],
            &d
        ));
    }

    #[test]
    fn standardize_empty_chain() {
        let d = no_delta();
        let x = vapp(vlm("y", vvar("y")), vct("c"));
        let out = standardize_cbv(&x, &[], &d).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].alpha_eq(&x));
    }

    #[test]
    fn standardize_development_with_non_value_argument() {
        let d = no_delta();
        // X = (\y. y y) ((\z. z) (\w. w)); develop everything in one step.
        let inner = vapp(vlm("z", vvar("z")), vlm("w", vvar("w")));
        let x = vapp(vlm("y", vapp(vvar("y"), vvar("y"))), inner);
        let want = crate::cbv::step::cdev_cbv(&x, &d);
        let dev = step_par_cbv(&x, &d)
            .into_iter()
            .find(|dv| dv.replay().unwrap().target.alpha_eq(&want))
            .expect("the full development is a parallel step");
        let out = absorb_into_srs_cbv(&dev, &[want.clone()], &d).unwrap();
        assert!(is_srs_cbv(&out, &d));
        assert!(out[0].alpha_eq(&x));
        assert!(out.last().unwrap().alpha_eq(&want));
        // and the sequence replays as an ordinary trace
        let tr = srs_to_trace_cbv(&out, &d).unwrap();
        tr.validate(&d).unwrap();
    }

    #[test]
    fn standardize_two_step_chain() {
        let dv = DeltaTableV::sample_succ(3);
        let x = vapp(
            vlm("y", vapp(vct("succ"), vvar("y"))),
            vapp(vct("succ"), vct("num0")),
        );
        let ds = step_par_cbv(&x, &dv);
        let d1 = ds
            .iter()
            .find(|d| d.replay().unwrap().label == 1)
            .unwrap()
            .clone();
        let mid = d1.replay().unwrap().target;
        let d2full = step_par_cbv(&mid, &dv)
            .into_iter()
            .max_by_key(|d| d.replay().unwrap().label)
            .unwrap();
        let out = standardize_cbv(&x, &[d1, d2full.clone()], &dv).unwrap();
        assert!(is_srs_cbv(&out, &dv));
        assert!(out[0].alpha_eq(&x));
        assert!(out
            .last()
            .unwrap()
            .alpha_eq(&d2full.replay().unwrap().target));
    }
}
