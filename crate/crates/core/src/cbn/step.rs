//! One-step call-by-name reduction, deterministic left reduction, and the
//! complete parallel development operator.

use std::fmt;

use crate::delta::DeltaTable;
use crate::fold::FswModel;
use crate::syntax::{ConstName, Constant, Term, VarName};

/// One navigation step towards a redex.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    FunSide,
    ArgSide,
    UnderBinder,
}

/// Kind of contracted redex.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RedexKind {
    Beta,
    Delta,
}

/// Address of a redex inside a term: navigation steps plus the redex kind.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RedexPath {
    pub dirs: Vec<Dir>,
    pub kind: RedexKind,
}

impl RedexPath {
    pub fn here(kind: RedexKind) -> Self {
        RedexPath { dirs: Vec::new(), kind }
    }

    fn prefixed(mut self, d: Dir) -> Self {
        self.dirs.insert(0, d);
        self
    }
}

impl fmt::Display for RedexPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.dirs {
            match d {
                Dir::FunSide => write!(f, "fun.")?,
                Dir::ArgSide => write!(f, "arg.")?,
                Dir::UnderBinder => write!(f, "under.")?,
            }
        }
        match self.kind {
            RedexKind::Beta => write!(f, "beta"),
            RedexKind::Delta => write!(f, "delta"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("path {path} does not address a {kind:?} redex in {term}")]
    BadPath {
        path: String,
        kind: RedexKind,
        term: String,
    },
    #[error("step {index}: replaying the path gives {expected}, trace stores {stored}")]
    Mismatch {
        index: usize,
        expected: String,
        stored: String,
    },
}

/// A multi-step reduction: the start term and one `(path, target)` entry per
/// step. Validation replays every path and compares the stored target up to
/// alpha-equivalence.
#[derive(Clone, Debug)]
pub struct Trace<C: Constant = ConstName> {
    pub start: Term<C>,
    pub steps: Vec<(RedexPath, Term<C>)>,
}

impl<C: Constant> Trace<C> {
    pub fn empty(start: Term<C>) -> Self {
        Trace { start, steps: Vec::new() }
    }

    pub fn end(&self) -> &Term<C> {
        self.steps.last().map(|(_, t)| t).unwrap_or(&self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// All terms visited, starting term included.
    pub fn terms(&self) -> Vec<Term<C>> {
        let mut out = vec![self.start.clone()];
        out.extend(self.steps.iter().map(|(_, t)| t.clone()));
        out
    }

    pub fn push(&mut self, path: RedexPath, to: Term<C>) {
        self.steps.push((path, to));
    }

    /// Appends `other`, whose start must be alpha-equivalent to our end.
    pub fn append(&mut self, other: Trace<C>) {
        debug_assert!(self.end().alpha_eq(&other.start));
        self.steps.extend(other.steps);
    }

    /// Re-addresses every step one level down into a surrounding context.
    pub fn map_into(self, dir: Dir, wrap: impl Fn(Term<C>) -> Term<C>) -> Trace<C> {
        Trace {
            start: wrap(self.start),
            steps: self
                .steps
                .into_iter()
                .map(|(p, t)| (p.prefixed(dir), wrap(t)))
                .collect(),
        }
    }

    pub fn validate(&self, delta: &DeltaTable<C>) -> Result<(), TraceError> {
        let mut cur = self.start.clone();
        for (i, (path, stored)) in self.steps.iter().enumerate() {
            let reduct = reduce_at(&cur, path, delta).ok_or_else(|| TraceError::BadPath {
                path: path.to_string(),
                kind: path.kind,
                term: cur.to_string(),
            })?;
            if !reduct.alpha_eq(stored) {
                return Err(TraceError::Mismatch {
                    index: i,
                    expected: reduct.to_string(),
                    stored: stored.to_string(),
                });
            }
            cur = stored.clone();
        }
        Ok(())
    }
}

/// Contracts the redex addressed by `path`, if the path indeed lands on one.
pub fn reduce_at<C: Constant>(
    t: &Term<C>,
    path: &RedexPath,
    delta: &DeltaTable<C>,
) -> Option<Term<C>> {
    match path.dirs.split_first() {
        None => match (path.kind, t) {
            (RedexKind::Beta, Term::App(f, a)) => match &**f {
                Term::Lm(y, body) => Some(body.subst(a, y)),
                _ => None,
            },
            (RedexKind::Delta, Term::App(f, a)) => match (&**f, &**a) {
                (Term::Ct(c1), Term::Ct(c2)) => delta.lookup(c1, c2).cloned(),
                _ => None,
            },
            _ => None,
        },
        Some((dir, rest)) => {
            let sub = RedexPath { dirs: rest.to_vec(), kind: path.kind };
            match (dir, t) {
                (Dir::FunSide, Term::App(f, a)) => {
                    Some(Term::app(reduce_at(f, &sub, delta)?, (**a).clone()))
                }
                (Dir::ArgSide, Term::App(f, a)) => {
                    Some(Term::app((**f).clone(), reduce_at(a, &sub, delta)?))
                }
                (Dir::UnderBinder, Term::Lm(x, b)) => {
                    Some(Term::lm(x.clone(), reduce_at(b, &sub, delta)?))
                }
                _ => None,
            }
        }
    }
}

/// Enumerates exactly the one-step reducts of `t`, each with the address of
/// the contracted redex. An empty result means `t` is a normal form.
pub fn step_cbn<C: Constant>(t: &Term<C>, delta: &DeltaTable<C>) -> Vec<(RedexPath, Term<C>)> {
    let mut out = Vec::new();
    match t {
        Term::Var(_) | Term::Ct(_) => {}
        Term::App(f, a) => {
            if let Term::Lm(y, body) = &**f {
                out.push((RedexPath::here(RedexKind::Beta), body.subst(a, y)));
            }
            if let (Term::Ct(c1), Term::Ct(c2)) = (&**f, &**a) {
                if let Some(z) = delta.lookup(c1, c2) {
                    out.push((RedexPath::here(RedexKind::Delta), z.clone()));
                }
            }
            for (p, f2) in step_cbn(f, delta) {
                out.push((p.prefixed(Dir::FunSide), Term::app(f2, (**a).clone())));
            }
            for (p, a2) in step_cbn(a, delta) {
                out.push((p.prefixed(Dir::ArgSide), Term::app((**f).clone(), a2)));
            }
        }
        Term::Lm(x, b) => {
            for (p, b2) in step_cbn(b, delta) {
                out.push((p.prefixed(Dir::UnderBinder), Term::lm(x.clone(), b2)));
            }
        }
    }
    out
}

/// The unique left reduct, if any. Left reduction contracts the leftmost
/// admissible redex, explores the argument side only under a variable or
/// constant head, and never reduces under a binder.
pub fn step_left<C: Constant>(t: &Term<C>, delta: &DeltaTable<C>) -> Option<Term<C>> {
    step_left_with_path(t, delta).map(|(_, t)| t)
}

/// As [`step_left`], with the address of the contracted redex.
pub fn step_left_with_path<C: Constant>(
    t: &Term<C>,
    delta: &DeltaTable<C>,
) -> Option<(RedexPath, Term<C>)> {
    match t {
        Term::App(f, a) => match &**f {
            Term::Lm(y, body) => Some((RedexPath::here(RedexKind::Beta), body.subst(a, y))),
            Term::Ct(c1) => {
                if let Term::Ct(c2) = &**a {
                    if let Some(z) = delta.lookup(c1, c2) {
                        return Some((RedexPath::here(RedexKind::Delta), z.clone()));
                    }
                }
                step_left_with_path(a, delta)
                    .map(|(p, a2)| (p.prefixed(Dir::ArgSide), Term::app((**f).clone(), a2)))
            }
            Term::Var(_) => step_left_with_path(a, delta)
                .map(|(p, a2)| (p.prefixed(Dir::ArgSide), Term::app((**f).clone(), a2))),
            Term::App(..) => step_left_with_path(f, delta)
                .map(|(p, f2)| (p.prefixed(Dir::FunSide), Term::app(f2, (**a).clone()))),
        },
        _ => None,
    }
}

/// The complete parallel development: contracts every redex present in `t`
/// in one pass. Delta results enter unevaluated — the redexes they may
/// contain were not present in `t`.
pub fn cdev<C: Constant>(t: &Term<C>, delta: &DeltaTable<C>) -> Term<C> {
    match t {
        Term::Var(_) | Term::Ct(_) => t.clone(),
        Term::Lm(y, b) => Term::lm(y.clone(), cdev(b, delta)),
        Term::App(f, a) => {
            if let (Term::Ct(c1), Term::Ct(c2)) = (&**f, &**a) {
                if let Some(z) = delta.lookup(c1, c2) {
                    return z.clone();
                }
            }
            if let Term::Lm(y, body) = &**f {
                return cdev(body, delta).subst(&cdev(a, delta), y);
            }
            Term::app(cdev(f, delta), cdev(a, delta))
        }
    }
}

/// The complete development packaged as an FSw model, so that it can be
/// cross-checked against the direct recursion through the generic fold.
pub struct CdevFsw<'a, C: Constant> {
    pub delta: &'a DeltaTable<C>,
}

impl<C: Constant> FswModel<C> for CdevFsw<'_, C> {
    type D = Term<C>;

    fn var(&self, x: &VarName) -> Term<C> {
        Term::var(x.clone())
    }

    fn ct(&self, c: &C) -> Term<C> {
        Term::ct(c.clone())
    }

    fn app(&self, fun_t: &Term<C>, fun: &Term<C>, arg_t: &Term<C>, arg: &Term<C>) -> Term<C> {
        if let (Term::Ct(c1), Term::Ct(c2)) = (fun_t, arg_t) {
            if let Some(z) = self.delta.lookup(c1, c2) {
                return z.clone();
            }
        }
        if matches!(fun_t, Term::Lm(..)) {
            if let Term::Lm(y, dev_body) = fun {
                return dev_body.subst(arg, y);
            }
        }
        Term::app(fun.clone(), arg.clone())
    }

    fn lm(&self, x: &VarName, _: &Term<C>, b: &Term<C>) -> Term<C> {
        Term::lm(x.clone(), b.clone())
    }

    fn fresh(&self, x: &VarName, _: &Term<C>, d: &Term<C>) -> bool {
        d.fresh_in(x)
    }

    fn swap(&self, _: &Term<C>, dt: &Term<C>, z1: &VarName, z2: &VarName) -> Term<C> {
        dt.swap(z1, z2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::fold_fsw;
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

    /// The running example: (\x1. x1 x1) ((\x. x) #c)
    fn running_example() -> Term {
        app(
            lm("x1", app(var("x1"), var("x1"))),
            app(lm("x", var("x")), ct("c")),
        )
    }

    fn no_delta() -> DeltaTable {
        DeltaTable::new()
    }

    #[test]
    fn variables_are_normal_forms() {
        assert!(step_cbn(&var("x"), &no_delta()).is_empty());
        assert!(step_left(&var("x"), &no_delta()).is_none());
    }

    #[test]
    fn running_example_has_top_and_inner_reduct() {
        let x1 = app(lm("x", var("x")), ct("c"));
        let succs = step_cbn(&running_example(), &no_delta());
        assert_eq!(succs.len(), 2);
        let y1 = app(x1.clone(), x1.clone());
        let y2 = app(lm("x1", app(var("x1"), var("x1"))), ct("c"));
        assert!(succs.iter().any(|(p, t)| p.dirs.is_empty() && t.alpha_eq(&y1)));
        assert!(succs
            .iter()
            .any(|(p, t)| p.dirs == vec![Dir::ArgSide] && t.alpha_eq(&y2)));
    }

    #[test]
    fn delta_rule_fires_at_top() {
        let d = DeltaTable::sample_succ(2);
        let t = app(ct("succ"), ct("num0"));
        let succs = step_cbn(&t, &d);
        assert_eq!(succs.len(), 1);
        assert_eq!(succs[0].0.kind, RedexKind::Delta);
        assert!(succs[0].1.alpha_eq(&ct("num1")));
    }

    #[test]
    fn left_step_takes_top_beta_first() {
        let x1 = app(lm("x", var("x")), ct("c"));
        let got = step_left(&running_example(), &no_delta()).unwrap();
        assert!(got.alpha_eq(&app(x1.clone(), x1)));
    }

    #[test]
    fn left_step_descends_right_under_constant_head() {
        let t = app(ct("c"), app(lm("x", var("x")), ct("d")));
        let got = step_left(&t, &no_delta()).unwrap();
        assert!(got.alpha_eq(&app(ct("c"), ct("d"))));
    }

    #[test]
    fn left_step_agrees_with_filtered_enumeration() {
        // On a handful of shapes: the left reduct, when it exists, appears
        // among the one-step reducts at a binder-free admissible path, and
        // when it does not exist no admissible path exists either.
        let d = DeltaTable::sample_succ(2);
        let terms = vec![
            running_example(),
            app(ct("succ"), ct("num0")),
            app(var("x"), app(lm("x", var("x")), ct("c"))),
            lm("x", app(lm("y", var("y")), var("x"))),
            app(app(var("x"), var("y")), app(lm("x", var("x")), ct("c"))),
        ];
        for t in terms {
            let admissible = |p: &RedexPath| -> bool {
                let mut cursor = &t;
                for dir in &p.dirs {
                    match (dir, cursor) {
                        (Dir::FunSide, Term::App(f, _)) => cursor = f,
                        (Dir::ArgSide, Term::App(f, a)) => {
                            if !matches!(&**f, Term::Var(_) | Term::Ct(_)) {
                                return false;
                            }
                            cursor = a;
                        }
                        _ => return false,
                    }
                }
                true
            };
            let admissible_count = step_cbn(&t, &d)
                .iter()
                .filter(|(p, _)| admissible(p))
                .count();
            match step_left_with_path(&t, &d) {
                Some((p, r)) => {
                    assert_eq!(admissible_count, 1, "left reduction is deterministic");
                    assert!(admissible(&p));
                    assert!(step_cbn(&t, &d)
                        .iter()
                        .any(|(q, u)| *q == p && u.alpha_eq(&r)));
                }
                None => assert_eq!(admissible_count, 0),
            }
        }
    }

    #[test]
    fn trace_replay_validates() {
        let t = running_example();
        let mut trace = Trace::empty(t.clone());
        let (p1, t1) = step_left_with_path(&t, &no_delta()).unwrap();
        trace.push(p1, t1.clone());
        let (p2, t2) = step_left_with_path(&t1, &no_delta()).unwrap();
        trace.push(p2, t2);
        assert!(trace.validate(&no_delta()).is_ok());

        let mut bad = trace.clone();
        bad.steps[1].1 = var("x");
        assert!(bad.validate(&no_delta()).is_err());
    }

    #[test]
    fn cdev_examples() {
        assert!(cdev(&var("x"), &no_delta()).alpha_eq(&var("x")));
        let got = cdev(&running_example(), &no_delta());
        assert!(got.alpha_eq(&app(ct("c"), ct("c"))));

        let omega_half = lm("x", app(var("x"), var("x")));
        let omega = app(omega_half.clone(), omega_half);
        assert!(cdev(&omega, &no_delta()).alpha_eq(&omega));
    }

    #[test]
    fn cdev_leaves_delta_results_undeveloped() {
        // the delta result carries a redex of its own; one complete
        // development must not contract it
        let mut d = DeltaTable::new();
        let inner = app(lm("x", var("x")), ct("c"));
        d.insert(ConstName::new("f"), ConstName::new("a"), inner.clone())
            .unwrap();
        let t = app(ct("f"), ct("a"));
        assert!(cdev(&t, &d).alpha_eq(&inner));
    }

    #[test]
    fn cdev_fold_agrees_with_direct() {
        let d = DeltaTable::sample_succ(2);
        let terms = vec![
            running_example(),
            app(ct("succ"), ct("num0")),
            lm("y", app(lm("x", var("x")), var("y"))),
            app(lm("x", app(var("x"), var("x"))), ct("c")),
        ];
        for t in terms {
            let model = CdevFsw { delta: &d };
            assert!(fold_fsw(&model, &t).alpha_eq(&cdev(&t, &d)), "term {t}");
        }
    }
}
