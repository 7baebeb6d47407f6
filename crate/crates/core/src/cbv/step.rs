//! One-step call-by-value reduction, the deterministic CBV left reduction,
//! and the CBV complete development pair.
//!
//! The rules mirror the call-by-name ones with a value restriction: beta
//! fires only on value arguments, delta results are values, and the
//! argument side of a left reduction opens up as soon as the function side
//! is a value (any value, not just a variable or constant — this is where
//! the mirror genuinely differs from the call-by-name side conditions).

use crate::cbn::step::{Dir, RedexKind, RedexPath};
use crate::cbv::syntax::{DeltaTableV, TermV, ValueV};
use crate::syntax::Term;

/// Enumerates the one-step CBV reducts of `t` with their redex addresses.
pub fn step_cbv(t: &TermV, delta: &DeltaTableV) -> Vec<(RedexPath, TermV)> {
    let mut out = Vec::new();
    match t {
        TermV::Val(ValueV::Lm(y, b)) => {
            for (p, b2) in step_cbv(b, delta) {
                out.push((
                    prefixed(p, Dir::UnderBinder),
                    TermV::Val(ValueV::lm(y.clone(), b2)),
                ));
            }
        }
        TermV::Val(_) => {}
        TermV::App(f, a) => {
            if let (TermV::Val(ValueV::Lm(y, body)), TermV::Val(w)) = (&**f, &**a) {
                out.push((RedexPath::here(RedexKind::Beta), body.subst(w, y)));
            }
            if let (TermV::Val(ValueV::Ct(c1)), TermV::Val(ValueV::Ct(c2))) = (&**f, &**a) {
                if let Some(v) = delta.lookup(c1, c2) {
                    out.push((RedexPath::here(RedexKind::Delta), TermV::Val(v.clone())));
                }
            }
            for (p, f2) in step_cbv(f, delta) {
                out.push((prefixed(p, Dir::FunSide), TermV::app(f2, (**a).clone())));
            }
            for (p, a2) in step_cbv(a, delta) {
                out.push((prefixed(p, Dir::ArgSide), TermV::app((**f).clone(), a2)));
            }
        }
    }
    out
}

fn prefixed(mut p: RedexPath, d: Dir) -> RedexPath {
    p.dirs.insert(0, d);
    p
}

/// The unique CBV left reduct, if any. Values never left-reduce; the
/// argument side is explored once the function side is a value.
pub fn step_left_cbv(t: &TermV, delta: &DeltaTableV) -> Option<TermV> {
    step_left_cbv_with_path(t, delta).map(|(_, t)| t)
}

/// As [`step_left_cbv`], with the redex address.
pub fn step_left_cbv_with_path(
    t: &TermV,
    delta: &DeltaTableV,
) -> Option<(RedexPath, TermV)> {
    match t {
        TermV::Val(_) => None,
        TermV::App(f, a) => match &**f {
            TermV::Val(fun_value) => {
                if let TermV::Val(w) = &**a {
                    return match (fun_value, w) {
                        (ValueV::Lm(y, body), _) => {
                            Some((RedexPath::here(RedexKind::Beta), body.subst(w, y)))
                        }
                        (ValueV::Ct(c1), ValueV::Ct(c2)) => delta
                            .lookup(c1, c2)
                            .map(|v| (RedexPath::here(RedexKind::Delta), TermV::Val(v.clone()))),
                        _ => None,
                    };
                }
                step_left_cbv_with_path(a, delta).map(|(p, a2)| {
                    (prefixed(p, Dir::ArgSide), TermV::app((**f).clone(), a2))
                })
            }
            TermV::App(..) => step_left_cbv_with_path(f, delta)
                .map(|(p, f2)| (prefixed(p, Dir::FunSide), TermV::app(f2, (**a).clone()))),
        },
    }
}

/// Contracts the redex addressed by `path` in the two-sorted calculus.
pub fn reduce_at_cbv(t: &TermV, path: &RedexPath, delta: &DeltaTableV) -> Option<TermV> {
    match path.dirs.split_first() {
        None => match (path.kind, t) {
            (RedexKind::Beta, TermV::App(f, a)) => match (&**f, &**a) {
                (TermV::Val(ValueV::Lm(y, body)), TermV::Val(w)) => Some(body.subst(w, y)),
                _ => None,
            },
            (RedexKind::Delta, TermV::App(f, a)) => match (&**f, &**a) {
                (TermV::Val(ValueV::Ct(c1)), TermV::Val(ValueV::Ct(c2))) => {
                    delta.lookup(c1, c2).map(|v| TermV::Val(v.clone()))
                }
                _ => None,
            },
            _ => None,
        },
        Some((dir, rest)) => {
            let sub = RedexPath {
                dirs: rest.to_vec(),
                kind: path.kind,
            };
            match (dir, t) {
                (Dir::FunSide, TermV::App(f, a)) => {
                    Some(TermV::app(reduce_at_cbv(f, &sub, delta)?, (**a).clone()))
                }
                (Dir::ArgSide, TermV::App(f, a)) => {
                    Some(TermV::app((**f).clone(), reduce_at_cbv(a, &sub, delta)?))
                }
                (Dir::UnderBinder, TermV::Val(ValueV::Lm(x, b))) => Some(TermV::Val(
                    ValueV::lm(x.clone(), reduce_at_cbv(b, &sub, delta)?),
                )),
                _ => None,
            }
        }
    }
}

/// A multi-step CBV reduction with replay checking, mirroring the
/// single-sorted trace.
#[derive(Clone, Debug)]
pub struct TraceV {
    pub start: TermV,
    pub steps: Vec<(RedexPath, TermV)>,
}

impl TraceV {
    pub fn empty(start: TermV) -> Self {
        TraceV {
            start,
            steps: Vec::new(),
        }
    }

    pub fn end(&self) -> &TermV {
        self.steps.last().map(|(_, t)| t).unwrap_or(&self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn terms(&self) -> Vec<TermV> {
        let mut out = vec![self.start.clone()];
        out.extend(self.steps.iter().map(|(_, t)| t.clone()));
        out
    }

    pub fn push(&mut self, path: RedexPath, to: TermV) {
        self.steps.push((path, to));
    }

    pub fn append(&mut self, other: TraceV) {
        debug_assert!(self.end().alpha_eq(&other.start));
        self.steps.extend(other.steps);
    }

    pub fn map_into(self, dir: Dir, wrap: impl Fn(TermV) -> TermV) -> TraceV {
        TraceV {
            start: wrap(self.start),
            steps: self
                .steps
                .into_iter()
                .map(|(p, t)| (prefixed(p, dir), wrap(t)))
                .collect(),
        }
    }

    pub fn validate(&self, delta: &DeltaTableV) -> Result<(), String> {
        let mut cur = self.start.clone();
        for (i, (path, stored)) in self.steps.iter().enumerate() {
            let reduct = reduce_at_cbv(&cur, path, delta)
                .ok_or_else(|| format!("step {i}: path {path} invalid in {cur}"))?;
            if !reduct.alpha_eq(stored) {
                return Err(format!("step {i}: expected {reduct}, stored {stored}"));
            }
            cur = stored.clone();
        }
        Ok(())
    }
}

/// CBV complete development, term sort. Delta results enter undeveloped,
/// matching what a single parallel step can produce.
///
/// The beta branch fires when the function side is an abstraction value and
/// the *development* of the argument is a value: the parallel beta rule
/// admits arguments that merely reduce to a value, so the complete step
/// must contract those top redexes too or the diamond property breaks.
pub fn cdev_cbv(t: &TermV, delta: &DeltaTableV) -> TermV {
    match t {
        TermV::Val(v) => TermV::Val(cdev_value_cbv(v, delta)),
        TermV::App(f, a) => {
            if let (TermV::Val(ValueV::Ct(c1)), TermV::Val(ValueV::Ct(c2))) = (&**f, &**a) {
                if let Some(v) = delta.lookup(c1, c2) {
                    return TermV::Val(v.clone());
                }
            }
            let dev_arg = cdev_cbv(a, delta);
            if let TermV::Val(ValueV::Lm(y, body)) = &**f {
                if let TermV::Val(w) = &dev_arg {
                    return cdev_cbv(body, delta).subst(w, y);
                }
                return TermV::app(
                    TermV::Val(ValueV::lm(y.clone(), cdev_cbv(body, delta))),
                    dev_arg,
                );
            }
            TermV::app(cdev_cbv(f, delta), dev_arg)
        }
    }
}

/// CBV complete development, value sort.
pub fn cdev_value_cbv(v: &ValueV, delta: &DeltaTableV) -> ValueV {
    match v {
        ValueV::Var(_) | ValueV::Ct(_) => v.clone(),
        ValueV::Lm(y, b) => ValueV::lm(y.clone(), cdev_cbv(b, delta)),
    }
}

/// Embeds a value table into a term table, for embedding cross-checks.
pub fn delta_to_unsorted(delta: &DeltaTableV) -> crate::delta::DeltaTable {
    let mut out = crate::delta::DeltaTable::new();
    for ((c1, c2), v) in delta.iter() {
        out.insert(c1.clone(), c2.clone(), v.to_unsorted())
            .expect("value tables hold closed results");
    }
    out
}

/// Like [`crate::syntax::Term::alpha_eq`], but for optional sides of the
/// embedding cross-checks.
pub fn embeds_to(t: &TermV, u: &Term) -> bool {
    t.to_unsorted().alpha_eq(u)
}
