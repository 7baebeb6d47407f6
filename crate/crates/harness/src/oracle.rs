//! Independent oracles used by the verification suites.
//!
//! The de Bruijn machinery here is deliberately separate from the engine's
//! named representation: conversion, shifting and substitution are the
//! classic index algorithms, so agreement with the nominal operators is a
//! genuine cross-check rather than a tautology. Likewise the normalizer is
//! a plain normal-order stepper, independent of normalization by
//! evaluation.

use std::collections::{HashSet, VecDeque};

use lambda_core::cbn::{step_cbn, step_left};
use lambda_core::{Constant, DeltaTable, LnTerm, Term, VarName};

/// Plain de Bruijn terms with named free variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DbTerm {
    Bound(u32),
    Free(String),
    Ct(String),
    App(Box<DbTerm>, Box<DbTerm>),
    Lm(Box<DbTerm>),
}

/// Converts a named term by walking it with an explicit binder stack.
pub fn to_db<C: Constant>(t: &Term<C>) -> DbTerm {
    fn go<C: Constant>(t: &Term<C>, stack: &mut Vec<String>) -> DbTerm {
        match t {
            Term::Var(x) => {
                let name = x.to_string();
                match stack.iter().rposition(|s| *s == name) {
                    Some(i) => DbTerm::Bound((stack.len() - 1 - i) as u32),
                    None => DbTerm::Free(name),
                }
            }
            Term::Ct(c) => DbTerm::Ct(c.to_string()),
            Term::App(f, a) => DbTerm::App(
                Box::new(go(f, stack)),
                Box::new(go(a, stack)),
            ),
            Term::Lm(x, b) => {
                stack.push(x.to_string());
                let b = go(b, stack);
                stack.pop();
                DbTerm::Lm(Box::new(b))
            }
        }
    }
    go(t, &mut Vec::new())
}

/// Two named terms are alpha-equivalent exactly when their de Bruijn
/// conversions are structurally equal.
pub fn db_alpha_eq<C: Constant>(a: &Term<C>, b: &Term<C>) -> bool {
    to_db(a) == to_db(b)
}

/// The classic shift of indices >= `cutoff` by `d`.
fn shift(t: &DbTerm, d: i64, cutoff: u32) -> DbTerm {
    match t {
        DbTerm::Bound(i) => {
            if *i >= cutoff {
                DbTerm::Bound((i64::from(*i) + d) as u32)
            } else {
                DbTerm::Bound(*i)
            }
        }
        DbTerm::Free(x) => DbTerm::Free(x.clone()),
        DbTerm::Ct(c) => DbTerm::Ct(c.clone()),
        DbTerm::App(f, a) => DbTerm::App(
            Box::new(shift(f, d, cutoff)),
            Box::new(shift(a, d, cutoff)),
        ),
        DbTerm::Lm(b) => DbTerm::Lm(Box::new(shift(b, d, cutoff + 1))),
    }
}

/// Substitutes a payload for a named free variable, shifting it under each
/// binder crossed.
pub fn db_subst_free(t: &DbTerm, payload: &DbTerm, name: &str) -> DbTerm {
    fn go(t: &DbTerm, payload: &DbTerm, name: &str, depth: u32) -> DbTerm {
        match t {
            DbTerm::Free(x) if x == name => shift(payload, i64::from(depth), 0),
            DbTerm::Free(_) | DbTerm::Ct(_) | DbTerm::Bound(_) => t.clone(),
            DbTerm::App(f, a) => DbTerm::App(
                Box::new(go(f, payload, name, depth)),
                Box::new(go(a, payload, name, depth)),
            ),
            DbTerm::Lm(b) => DbTerm::Lm(Box::new(go(b, payload, name, depth + 1))),
        }
    }
    go(t, payload, name, 0)
}

/// Simultaneous free-variable substitution on de Bruijn terms.
pub fn db_psubst_free(t: &DbTerm, sigma: &[(String, DbTerm)]) -> DbTerm {
    fn go(t: &DbTerm, sigma: &[(String, DbTerm)], depth: u32) -> DbTerm {
        match t {
            DbTerm::Free(x) => match sigma.iter().find(|(n, _)| n == x) {
                Some((_, payload)) => shift(payload, i64::from(depth), 0),
                None => t.clone(),
            },
            DbTerm::Ct(_) | DbTerm::Bound(_) => t.clone(),
            DbTerm::App(f, a) => DbTerm::App(
                Box::new(go(f, sigma, depth)),
                Box::new(go(a, sigma, depth)),
            ),
            DbTerm::Lm(b) => DbTerm::Lm(Box::new(go(b, sigma, depth + 1))),
        }
    }
    go(t, sigma, 0)
}

/// Oracle for unary substitution: converts, substitutes at the index level
/// and returns the image for comparison against the engine's result.
pub fn oracle_subst<C: Constant>(t: &Term<C>, u: &Term<C>, y: &VarName) -> DbTerm {
    db_subst_free(&to_db(t), &to_db(u), &y.to_string())
}

/// One normal-order step: leftmost-outermost redex, including under
/// binders.
pub fn normal_order_step<C: Constant>(
    t: &Term<C>,
    delta: &DeltaTable<C>,
) -> Option<Term<C>> {
    match t {
        Term::Var(_) | Term::Ct(_) => None,
        Term::Lm(x, b) => {
            normal_order_step(b, delta).map(|b2| Term::lm(x.clone(), b2))
        }
        Term::App(f, a) => {
            if let Term::Lm(y, body) = &**f {
                return Some(body.subst(a, y));
            }
            if let (Term::Ct(c1), Term::Ct(c2)) = (&**f, &**a) {
                if let Some(z) = delta.lookup(c1, c2) {
                    return Some(z.clone());
                }
            }
            if let Some(f2) = normal_order_step(f, delta) {
                return Some(Term::app(f2, (**a).clone()));
            }
            normal_order_step(a, delta).map(|a2| Term::app((**f).clone(), a2))
        }
    }
}

/// Bounded normal-order normalization: `Some` exactly when a normal form is
/// reached within `max_steps`.
pub fn normalize_oracle<C: Constant>(
    t: &Term<C>,
    delta: &DeltaTable<C>,
    max_steps: u64,
) -> Option<Term<C>> {
    let mut cur = t.clone();
    for _ in 0..=max_steps {
        match normal_order_step(&cur, delta) {
            Some(next) => cur = next,
            None => return Some(cur),
        }
    }
    None
}

/// Breadth-first reachability under ordinary one-step reduction, with
/// states deduplicated by canonical form. True iff `target` is reachable
/// from `start` in at most `steps` steps.
pub fn reachable_within<C: Constant>(
    start: &Term<C>,
    target: &Term<C>,
    steps: u64,
    delta: &DeltaTable<C>,
) -> bool {
    let goal = target.to_ln();
    let mut seen: HashSet<LnTerm<C>> = HashSet::new();
    let mut frontier = VecDeque::new();
    seen.insert(start.to_ln());
    frontier.push_back((start.clone(), 0u64));
    while let Some((t, d)) = frontier.pop_front() {
        if t.to_ln() == goal {
            return true;
        }
        if d >= steps {
            continue;
        }
        for (_, u) in step_cbn(&t, delta) {
            if seen.insert(u.to_ln()) {
                frontier.push_back((u, d + 1));
            }
        }
    }
    false
}

/// Iterates left reduction up to `max_steps`, returning the visited terms.
pub fn left_trace<C: Constant>(
    t: &Term<C>,
    delta: &DeltaTable<C>,
    max_steps: u64,
) -> Vec<Term<C>> {
    let mut out = vec![t.clone()];
    for _ in 0..max_steps {
        match step_left(out.last().unwrap(), delta) {
            Some(next) => out.push(next),
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use lambda_core::VarName;

    #[test]
    fn oracle_agrees_with_engine_substitution() {
        let cases = [
            ("\\z. z y", "z", "y"),
            ("\\x. x y", "\\q. q x", "y"),
            ("(x y) (\\w. y)", "#c", "y"),
            ("\\y. y", "#c", "y"),
        ];
        for (t, u, y) in cases {
            let t = parse_term(t).unwrap();
            let u = parse_term(u).unwrap();
            let y = VarName::from_ident(y);
            let engine = to_db(&t.subst(&u, &y));
            let oracle = oracle_subst(&t, &u, &y);
            assert_eq!(engine, oracle, "{t} [{u} / {y}]");
        }
    }

    #[test]
    fn capture_is_visible_to_the_oracle() {
        // (\z. z y)[z / y] must not capture: result is \z'. z' z
        let t = parse_term("\\z. z y").unwrap();
        let u = parse_term("z").unwrap();
        let y = VarName::from_ident("y");
        let got = oracle_subst(&t, &u, &y);
        let naive = to_db(&parse_term("\\z. z z").unwrap());
        assert_ne!(got, naive);
    }

    #[test]
    fn normal_order_reaches_discarded_divergence() {
        // (\x. #c) Omega normalizes in normal order
        let omega = "(\\x. x x) (\\x. x x)";
        let t = parse_term(&format!("(\\x. #c) ({omega})")).unwrap();
        let d = DeltaTable::new();
        let got = normalize_oracle(&t, &d, 10).unwrap();
        assert!(got.alpha_eq(&parse_term("#c").unwrap()));
        // Omega itself does not normalize
        let om = parse_term(omega).unwrap();
        assert!(normalize_oracle(&om, &d, 50).is_none());
    }

    #[test]
    fn reachability_counts_steps() {
        let d = DeltaTable::new();
        let t = parse_term("(\\x. x) ((\\y. y) #c)").unwrap();
        let c = parse_term("#c").unwrap();
        assert!(!reachable_within(&t, &c, 1, &d));
        assert!(reachable_within(&t, &c, 2, &d));
    }
}
