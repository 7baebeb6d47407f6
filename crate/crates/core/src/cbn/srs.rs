//! Standard reduction sequences: the decision procedure, the extraction of
//! ordinary reduction traces from them, and the constructive direction of
//! standardization (absorbing parallel steps into a standard sequence).

use std::cell::RefCell;
use std::collections::HashMap;

use crate::cbn::par::{
    commute_par_left, invert_lm, DerivationError, LmInversion, ParDerivation,
};
use crate::cbn::step::{step_left, step_left_with_path, Dir, RedexPath, Trace};
use crate::delta::DeltaTable;
use crate::syntax::{AvoidSet, ConstName, Constant, LnTerm, Term, VarName};

#[derive(Debug, thiserror::Error)]
pub enum SrsError {
    #[error("not a standard reduction sequence: {0}")]
    NotSrs(String),
    #[error("empty input list")]
    Empty,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
}

/// `zipApp [X1..Xn] [Y1..Ym]` = `[X1 Y1, .., Xn Y1, Xn Y2, .., Xn Ym]`:
/// first every function is applied to the first argument, then the last
/// function to the remaining arguments. Length `n + m - 1`.
pub fn zip_app<C: Constant>(
    xs: &[Term<C>],
    ys: &[Term<C>],
) -> Result<Vec<Term<C>>, SrsError> {
    let (last_x, init_x) = xs.split_last().ok_or(SrsError::Empty)?;
    let (first_y, rest_y) = ys.split_first().ok_or(SrsError::Empty)?;
    let mut out = Vec::with_capacity(xs.len() + ys.len() - 1);
    for x in init_x {
        out.push(Term::app(x.clone(), first_y.clone()));
    }
    out.push(Term::app(last_x.clone(), first_y.clone()));
    for y in rest_y {
        out.push(Term::app(last_x.clone(), y.clone()));
    }
    Ok(out)
}

/// Derivation tree for the standard-sequence rules, kept so that traces and
/// the absorption recursion can follow the same structure the search found.
#[derive(Clone, Debug)]
enum SrsDeriv<C: Constant> {
    /// Singleton variable or constant.
    Base,
    /// Head left-reduces to the next element.
    Red(Box<SrsDeriv<C>>),
    /// The whole list is `map (Lm _) bodies` for one shared binder.
    Lm {
        bodies: Vec<Term<C>>,
        inner: Box<SrsDeriv<C>>,
    },
    /// The whole list is `zipApp funs args`.
    App {
        funs: Vec<Term<C>>,
        args: Vec<Term<C>>,
        fun_deriv: Box<SrsDeriv<C>>,
        arg_deriv: Box<SrsDeriv<C>>,
    },
}

/// Memoizing decision procedure for standard reduction sequences. The rules
/// overlap (a list may be derivable both by following a left step and by
/// unmerging an application), so derivability is a search; rule order tried
/// is base, Red, Lm, App.
pub struct SrsProver<'a, C: Constant = ConstName> {
    delta: &'a DeltaTable<C>,
    memo: RefCell<HashMap<Vec<LnTerm<C>>, bool>>,
}

impl<'a, C: Constant> SrsProver<'a, C> {
    pub fn new(delta: &'a DeltaTable<C>) -> Self {
        SrsProver {
            delta,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn key(xs: &[Term<C>]) -> Vec<LnTerm<C>> {
        xs.iter().map(|t| t.to_ln()).collect()
    }

    /// True iff `xs` is derivable by the standard-sequence rules.
    pub fn is_srs(&self, xs: &[Term<C>]) -> bool {
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

    fn decide(&self, xs: &[Term<C>]) -> bool {
        if xs.len() == 1 && matches!(xs[0], Term::Var(_) | Term::Ct(_)) {
            return true;
        }
        if xs.len() >= 2 {
            if let Some(z) = step_left(&xs[0], self.delta) {
                if z.alpha_eq(&xs[1]) && self.is_srs(&xs[1..]) {
                    return true;
                }
            }
        }
        if let Some((_, bodies)) = unmap_lm(xs, &AvoidSet::new()) {
            if self.is_srs(&bodies) {
                return true;
            }
        }
        if xs.iter().all(|t| matches!(t, Term::App(..))) {
            for split in 1..=xs.len() {
                if let Some((funs, args)) = unmerge_zip(xs, split) {
                    if self.is_srs(&funs) && self.is_srs(&args) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn derive(&self, xs: &[Term<C>]) -> Option<SrsDeriv<C>> {
        if xs.is_empty() || !self.is_srs(xs) {
            return None;
        }
        if xs.len() == 1 && matches!(xs[0], Term::Var(_) | Term::Ct(_)) {
            return Some(SrsDeriv::Base);
        }
        if xs.len() >= 2 {
            if let Some(z) = step_left(&xs[0], self.delta) {
                if z.alpha_eq(&xs[1]) && self.is_srs(&xs[1..]) {
                    return Some(SrsDeriv::Red(Box::new(self.derive(&xs[1..])?)));
                }
            }
        }
        if let Some((_, bodies)) = unmap_lm(xs, &AvoidSet::new()) {
            if self.is_srs(&bodies) {
                let inner = Box::new(self.derive(&bodies)?);
                return Some(SrsDeriv::Lm { bodies, inner });
            }
        }
        if xs.iter().all(|t| matches!(t, Term::App(..))) {
            for split in 1..=xs.len() {
                if let Some((funs, args)) = unmerge_zip(xs, split) {
                    if self.is_srs(&funs) && self.is_srs(&args) {
                        let fun_deriv = Box::new(self.derive(&funs)?);
                        let arg_deriv = Box::new(self.derive(&args)?);
                        return Some(SrsDeriv::App {
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

/// If every element is an abstraction, opens them all at one common fresh
/// binder (keeping the first element's binder when admissible). Names in
/// `avoid` are not eligible.
fn unmap_lm<C: Constant>(
    xs: &[Term<C>],
    avoid: &AvoidSet,
) -> Option<(VarName, Vec<Term<C>>)> {
    let first = match xs.first()? {
        Term::Lm(x, _) => x.clone(),
        _ => return None,
    };
    if !xs.iter().all(|t| matches!(t, Term::Lm(..))) {
        return None;
    }
    let admissible =
        |y: &VarName| !avoid.contains(y) && xs.iter().all(|t| t.fresh_in(y));
    let binder = if admissible(&first) {
        first
    } else {
        let mut all = avoid.clone();
        for t in xs {
            all.extend(t.free_vars());
            if let Term::Lm(x, _) = t {
                all.insert(x.clone());
            }
        }
        crate::syntax::fresh_var(&all, first.base())
    };
    let bodies = xs
        .iter()
        .map(|t| match t {
            Term::Lm(x, b) => {
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

/// Tries to read `xs` as `zipApp funs args` with `funs` of length `split`.
fn unmerge_zip<C: Constant>(
    xs: &[Term<C>],
    split: usize,
) -> Option<(Vec<Term<C>>, Vec<Term<C>>)> {
    if split == 0 || split > xs.len() {
        return None;
    }
    let parts: Vec<(&Term<C>, &Term<C>)> = xs
        .iter()
        .map(|t| match t {
            Term::App(f, a) => Some((&**f, &**a)),
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

/// True iff `xs` is a standard reduction sequence.
pub fn is_srs<C: Constant>(xs: &[Term<C>], delta: &DeltaTable<C>) -> bool {
    SrsProver::new(delta).is_srs(xs)
}

/// Turns a standard reduction sequence into an ordinary reduction trace
/// that visits every element in order: each consecutive pair is exactly one
/// reduction step, at an address recovered from the sequence's derivation.
pub fn srs_to_trace<C: Constant>(
    xs: &[Term<C>],
    delta: &DeltaTable<C>,
) -> Result<Trace<C>, SrsError> {
    let prover = SrsProver::new(delta);
    let deriv = prover
        .derive(xs)
        .ok_or_else(|| SrsError::NotSrs(render_list(xs)))?;
    let paths = step_paths(xs, &deriv, delta);
    debug_assert_eq!(paths.len() + 1, xs.len());
    let trace = Trace {
        start: xs[0].clone(),
        steps: paths.into_iter().zip(xs[1..].iter().cloned()).collect(),
    };
    debug_assert!(trace.validate(delta).is_ok());
    Ok(trace)
}

fn step_paths<C: Constant>(
    xs: &[Term<C>],
    deriv: &SrsDeriv<C>,
    delta: &DeltaTable<C>,
) -> Vec<RedexPath> {
    match deriv {
        SrsDeriv::Base => Vec::new(),
        SrsDeriv::Red(rest) => {
            let (p, _) = step_left_with_path(&xs[0], delta)
                .expect("Red nodes record an existing left step");
            let mut out = vec![p];
            out.extend(step_paths(&xs[1..], rest, delta));
            out
        }
        SrsDeriv::Lm { bodies, inner, .. } => step_paths(bodies, inner, delta)
            .into_iter()
            .map(|mut p| {
                p.dirs.insert(0, Dir::UnderBinder);
                p
            })
            .collect(),
        SrsDeriv::App {
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

fn render_list<C: Constant>(xs: &[Term<C>]) -> String {
    let items: Vec<String> = xs.iter().map(|t| t.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Absorbs a parallel step into a standard sequence: given `d : X => X'`
/// and a standard sequence `xs` starting at `X'`, returns a standard
/// sequence from `X` to the last element of `xs`. This is the inductive
/// heart of standardization; the recursion is lexicographic on
/// `(length of xs, label, depth of the source)`.
pub fn absorb_into_srs<C: Constant>(
    d: &ParDerivation<C>,
    xs: &[Term<C>],
    delta: &DeltaTable<C>,
) -> Result<Vec<Term<C>>, SrsError> {
    let prover = SrsProver::new(delta);
    absorb_with(&prover, d, xs, delta)
}

fn absorb_with<C: Constant>(
    prover: &SrsProver<'_, C>,
    d: &ParDerivation<C>,
    xs: &[Term<C>],
    delta: &DeltaTable<C>,
) -> Result<Vec<Term<C>>, SrsError> {
    let rep = d.validate(delta)?;
    let head = xs.first().ok_or(SrsError::Empty)?;
    if !head.alpha_eq(&rep.target) {
        return Err(SrsError::Precondition(format!(
            "sequence starts at {head}, derivation targets {}",
            rep.target
        )));
    }
    if !prover.is_srs(xs) {
        return Err(SrsError::NotSrs(render_list(xs)));
    }
    if rep.label == 0 {
        // Reflexive step: target equals source, the sequence already works.
        return Ok(xs.to_vec());
    }
    match &rep.source {
        Term::Lm(..) => {
            // Every element of a sequence out of an abstraction is itself an
            // abstraction; open all of them at a binder fresh for the source
            // and recurse on the bodies.
            let avoid = rep.source.free_vars();
            let (binder, bodies) = unmap_lm(xs, &avoid).ok_or_else(|| {
                SrsError::NotSrs(format!("abstraction sequence expected: {}", render_list(xs)))
            })?;
            let body_d = match invert_lm(d, &binder)? {
                LmInversion::Reflexive => return Ok(xs.to_vec()),
                LmInversion::Xi(b) => b,
            };
            let inner = absorb_with(prover, &body_d, &bodies, delta)?;
            Ok(inner
                .into_iter()
                .map(|b| Term::lm(binder.clone(), b))
                .collect())
        }
        Term::App(..) => match d {
            ParDerivation::DeltaLeaf { .. } => {
                // One left (delta) step from the source reaches the head.
                let mut out = vec![rep.source.clone()];
                out.extend(xs.iter().cloned());
                Ok(out)
            }
            ParDerivation::BetaNode { binder, body, arg } => {
                // Contract the top redex on the left, then absorb the
                // remaining smaller-label derivation.
                let rest = crate::cbn::par::subst_par(body, arg, binder, delta)?;
                let inner = absorb_with(prover, &rest, xs, delta)?;
                let mut out = vec![rep.source.clone()];
                out.extend(inner);
                Ok(out)
            }
            ParDerivation::AppNode { fun, arg } => {
                let deriv = prover
                    .derive(xs)
                    .ok_or_else(|| SrsError::NotSrs(render_list(xs)))?;
                match deriv {
                    SrsDeriv::Red(_) => {
                        // The sequence starts with a left step; commute it
                        // past the parallel step and recurse on the tail.
                        let z = step_left(&rep.target, delta).ok_or_else(|| {
                            SrsError::Precondition(format!(
                                "head {head} left-reduces but target {} does not",
                                rep.target
                            ))
                        })?;
                        let (trace, dd) = commute_par_left(d, &z, delta)?;
                        let rest = absorb_with(prover, &dd, &xs[1..], delta)?;
                        let mut out = trace.terms();
                        out.pop();
                        out.extend(rest);
                        Ok(out)
                    }
                    SrsDeriv::App {
                        funs,
                        args,
                        ..
                    } => {
                        let new_funs = absorb_with(prover, fun, &funs, delta)?;
                        let new_args = absorb_with(prover, arg, &args, delta)?;
                        Ok(zip_app(&new_funs, &new_args)?)
                    }
                    SrsDeriv::Base | SrsDeriv::Lm { .. } => Err(SrsError::NotSrs(format!(
                        "sequence out of an application derived by a non-application rule: {}",
                        render_list(xs)
                    ))),
                }
            }
            _ => Err(SrsError::Precondition(
                "application source with a non-application derivation".into(),
            )),
        },
        // Variables and constants only admit label-0 derivations.
        _ => Err(SrsError::Precondition(format!(
            "positive-label derivation out of {}",
            rep.source
        ))),
    }
}

/// Standardization: folds [`absorb_into_srs`] right-to-left over a chain of
/// parallel steps `start => ... => end`, seeded with the singleton sequence
/// of the chain's end. The result is a standard reduction sequence from
/// `start` to `end`.
pub fn standardize<C: Constant>(
    start: &Term<C>,
    chain: &[ParDerivation<C>],
    delta: &DeltaTable<C>,
) -> Result<Vec<Term<C>>, SrsError> {
    let reps = crate::cbn::par::validate_chain(start, chain, delta)?;
    let end = reps
        .last()
        .map(|r| r.target.clone())
        .unwrap_or_else(|| start.clone());
    let prover = SrsProver::new(delta);
    let mut xs = vec![end];
    for d in chain.iter().rev() {
        xs = absorb_with(&prover, d, &xs, delta)?;
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbn::par::{refl_derivation, step_par};
    use crate::syntax::ConstName;

    fn v(s: &str) -> VarName {
        VarName::from_ident(s)
    }

    fn var(s: &str) -> Term {
        Term::var(v(s))
    }

    fn ct(s: &str) -> Term {
        Term::ct(ConstName::new(s))
    }

    fn app(f: Term, a: Term) -> Term {
        Term::app(f, a)
    }

    fn lm(x: &str, b: Term) -> Term {
        Term::lm(v(x), b)
    }

    fn no_delta() -> DeltaTable {
        DeltaTable::new()
    }

    /// (\x1. x1 x1) ((\x. x) #c)
    fn running_example() -> Term {
        app(
            lm("x1", app(var("x1"), var("x1"))),
            app(lm("x", var("x")), ct("c")),
        )
    }

    #[test]
    fn zip_app_examples() {
        let xs = vec![var("x1"), var("x2")];
        let ys = vec![var("y1"), var("y2")];
        let got = zip_app(&xs, &ys).unwrap();
        assert_eq!(got.len(), 3);
        assert!(got[0].alpha_eq(&app(var("x1"), var("y1"))));
        assert!(got[1].alpha_eq(&app(var("x2"), var("y1"))));
        assert!(got[2].alpha_eq(&app(var("x2"), var("y2"))));

        let one = zip_app(&[var("x")], &[var("y")]).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].alpha_eq(&app(var("x"), var("y"))));

        assert!(zip_app::<ConstName>(&[], &[var("y")]).is_err());
    }

    #[test]
    fn singletons_are_standard() {
        let d = no_delta();
        assert!(is_srs(&[var("x")], &d));
        assert!(is_srs(&[ct("c")], &d));
        // singletons of composite terms hold by unmerging / unmapping
        assert!(is_srs(&[running_example()], &d));
        assert!(is_srs(&[lm("x", app(var("x"), var("x")))], &d));
    }

    #[test]
    fn left_steps_are_standard() {
        let d = no_delta();
        let x = running_example();
        let y = step_left(&x, &d).unwrap();
        assert!(is_srs(&[x, y], &d));
    }

    #[test]
    fn disconnected_lists_are_not_standard() {
        let d = no_delta();
        assert!(!is_srs(&[app(ct("c"), ct("c")), var("x")], &d));
        assert!(!is_srs::<ConstName>(&[], &d));
    }

    #[test]
    fn rightward_sequences_merge_under_app() {
        // x ((\y. y) #c) -> x #c is standard even though the step is on the
        // right of a variable head.
        let d = no_delta();
        let xs = vec![
            app(var("x"), app(lm("y", var("y")), ct("c"))),
            app(var("x"), ct("c")),
        ];
        assert!(is_srs(&xs, &d));
        let trace = srs_to_trace(&xs, &d).unwrap();
        trace.validate(&d).unwrap();
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn non_left_order_is_rejected() {
        // reducing right before left violates standardness:
        // ((\x. x) #a) ((\y. y) #b) -> ((\x. x) #a) #b -> #a #b
        let d = no_delta();
        let redex_a = app(lm("x", var("x")), ct("a"));
        let redex_b = app(lm("y", var("y")), ct("b"));
        let xs = vec![
            app(redex_a.clone(), redex_b.clone()),
            app(redex_a.clone(), ct("b")),
            app(ct("a"), ct("b")),
        ];
        assert!(!is_srs(&xs, &d));
        // the left-first order is standard
        let ys = vec![
            app(redex_a.clone(), redex_b.clone()),
            app(ct("a"), redex_b),
            app(ct("a"), ct("b")),
        ];
        assert!(is_srs(&ys, &d));
    }

    #[test]
    fn lambda_wrapped_sequences_are_standard() {
        let d = no_delta();
        let inner = app(lm("y", var("y")), var("x"));
        let xs = vec![lm("x", inner.clone()), lm("x", var("x"))];
        assert!(is_srs(&xs, &d));
        let trace = srs_to_trace(&xs, &d).unwrap();
        trace.validate(&d).unwrap();
        assert_eq!(trace.steps[0].0.dirs[0], Dir::UnderBinder);
    }

    #[test]
    fn srs_to_trace_of_singleton_is_empty() {
        let d = no_delta();
        let tr = srs_to_trace(&[running_example()], &d).unwrap();
        assert!(tr.is_empty());
    }

    #[test]
    fn srs_to_trace_follows_red_chains() {
        let d = no_delta();
        let x = running_example();
        let y = step_left(&x, &d).unwrap();
        let z = step_left(&y, &d).unwrap();
        let xs = vec![x.clone(), y, z];
        assert!(is_srs(&xs, &d));
        let trace = srs_to_trace(&xs, &d).unwrap();
        trace.validate(&d).unwrap();
        assert_eq!(trace.len(), 2);
        assert!(trace.start.alpha_eq(&x));
    }

    #[test]
    fn absorb_reflexive_returns_sequence() {
        let d = no_delta();
        let x = running_example();
        let seq = vec![x.clone()];
        let out = absorb_into_srs(&refl_derivation(&x), &seq, &d).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].alpha_eq(&x));
    }

    #[test]
    fn absorb_running_example_full_development() {
        let d = no_delta();
        let x = running_example();
        let cc = app(ct("c"), ct("c"));
        let dev = step_par(&x, &d)
            .into_iter()
            .find(|dv| dv.replay().unwrap().target.alpha_eq(&cc))
            .unwrap();
        let out = absorb_into_srs(&dev, &[cc.clone()], &d).unwrap();
        assert!(is_srs(&out, &d));
        assert!(out[0].alpha_eq(&x));
        assert!(out.last().unwrap().alpha_eq(&cc));
    }

    #[test]
    fn standardize_empty_chain_is_singleton() {
        let d = no_delta();
        let x = running_example();
        let out = standardize(&x, &[], &d).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].alpha_eq(&x));
    }

    #[test]
    fn standardize_two_step_chain() {
        let d = no_delta();
        let x = running_example();
        let x1 = app(lm("x", var("x")), ct("c"));
        let y1 = app(x1.clone(), x1);
        let cc = app(ct("c"), ct("c"));
        let d1 = step_par(&x, &d)
            .into_iter()
            .find(|dv| dv.replay().unwrap().target.alpha_eq(&y1))
            .unwrap();
        let d2 = step_par(&y1, &d)
            .into_iter()
            .find(|dv| dv.replay().unwrap().target.alpha_eq(&cc))
            .unwrap();
        let out = standardize(&x, &[d1, d2], &d).unwrap();
        assert!(is_srs(&out, &d));
        assert!(out[0].alpha_eq(&x));
        assert!(out.last().unwrap().alpha_eq(&cc));
        // and back: the sequence replays as an ordinary trace
        let trace = srs_to_trace(&out, &d).unwrap();
        trace.validate(&d).unwrap();
    }
}
