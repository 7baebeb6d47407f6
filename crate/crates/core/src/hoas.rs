//! Higher-order abstract syntax: the calculus encoded in itself.
//!
//! The constant alphabet is extended with two tags, one for object-level
//! application and one for object-level abstraction; object binders are
//! represented by host binders. The encoder comes with its adequacy
//! package: it preserves and reflects freshness, commutes with
//! substitution, and is injective — realized both by direct recursion and
//! as a freshness-substitution model with the freshness-reversing and
//! constructor-injective refinements.

use std::collections::VecDeque;
use std::fmt;

use crate::delta::DeltaTable;
use crate::fold::FsbModel;
use crate::syntax::{ConstName, LnTerm, Term, VarName};

/// Constants of the encoding calculus: the base alphabet plus the two tags.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EConst {
    Base(ConstName),
    /// Tag standing for the object-level application constructor.
    CtApp,
    /// Tag standing for the object-level abstraction constructor.
    CtLm,
}

impl fmt::Display for EConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EConst::Base(c) => write!(f, "{c}"),
            // the % prefix is unreachable from the base constant grammar
            EConst::CtApp => write!(f, "%app"),
            EConst::CtLm => write!(f, "%lm"),
        }
    }
}

/// Terms over the extended constant alphabet.
pub type TermPrime = Term<EConst>;

fn ctapp() -> TermPrime {
    Term::ct(EConst::CtApp)
}

fn ctlm() -> TermPrime {
    Term::ct(EConst::CtLm)
}

/// The encoder: variables and constants map to themselves, applications
/// and abstractions to their tagged images.
pub fn enc(t: &Term) -> TermPrime {
    match t {
        Term::Var(x) => Term::var(x.clone()),
        Term::Ct(c) => Term::ct(EConst::Base(c.clone())),
        Term::App(f, a) => Term::app(Term::app(ctapp(), enc(f)), enc(a)),
        Term::Lm(x, b) => Term::app(ctlm(), Term::lm(x.clone(), enc(b))),
    }
}

/// Partial inverse of the encoder: `Some` exactly on terms alpha-equivalent
/// to an image of [`enc`].
pub fn dec(t: &TermPrime) -> Option<Term> {
    match t {
        Term::Var(x) => Some(Term::var(x.clone())),
        Term::Ct(EConst::Base(c)) => Some(Term::ct(c.clone())),
        Term::Ct(_) => None,
        Term::App(f, a) => match &**f {
            Term::App(tag, x) if matches!(&**tag, Term::Ct(EConst::CtApp)) => {
                Some(Term::app(dec(x)?, dec(a)?))
            }
            Term::Ct(EConst::CtLm) => match &**a {
                Term::Lm(x, b) => Some(Term::lm(x.clone(), dec(b)?)),
                _ => None,
            },
            _ => None,
        },
        Term::Lm(..) => None,
    }
}

/// Extends a base delta table to the tagged alphabet: base pairs map to the
/// encodings of their base results, and any lookup involving a tag is
/// undefined, which keeps encoder images normal.
pub fn extend_delta(delta: &DeltaTable<ConstName>) -> DeltaTable<EConst> {
    let mut out = DeltaTable::new();
    for ((c1, c2), z) in delta.iter() {
        out.insert(
            EConst::Base(c1.clone()),
            EConst::Base(c2.clone()),
            enc(z),
        )
        .expect("encodings of closed terms are closed");
    }
    out
}

/// The core-step relation on encoded terms: beta and delta on the tagged
/// application shape, plus left-style navigation. The compatibility rule
/// with beta-equivalence is not part of the core; adequacy checking closes
/// over it by bounded forward reduction instead.
pub fn step_hoas_core(t: &TermPrime, delta_prime: &DeltaTable<EConst>) -> Vec<TermPrime> {
    let mut out = Vec::new();
    // the tagged application shape: App (App ctapp X) Y
    let Term::App(f, y) = t else {
        return out;
    };
    let Term::App(tag, x) = &**f else {
        return out;
    };
    if !matches!(&**tag, Term::Ct(EConst::CtApp)) {
        return out;
    }
    // (beta'): App (App ctapp (App ctlm F)) Y ~> App F Y
    if let Term::App(inner_tag, lam) = &**x {
        if matches!(&**inner_tag, Term::Ct(EConst::CtLm)) {
            out.push(Term::app((**lam).clone(), (**y).clone()));
        }
    }
    // (delta'): App (App ctapp c1) c2 ~> table result
    if let (Term::Ct(c1), Term::Ct(c2)) = (&**x, &**y) {
        if let Some(z) = delta_prime.lookup(c1, c2) {
            out.push(z.clone());
        }
    }
    // (AppL'): step inside the tagged function position
    for x2 in step_hoas_core(x, delta_prime) {
        out.push(Term::app(Term::app(ctapp(), x2), (**y).clone()));
    }
    // (AppR'): the function position must be a variable or constant
    if matches!(&**x, Term::Var(_) | Term::Ct(_)) {
        for y2 in step_hoas_core(y, delta_prime) {
            out.push(Term::app(Term::app(ctapp(), (**x).clone()), y2));
        }
    }
    out
}

/// True iff `t` has no successor under ordinary reduction in the extended
/// calculus. Every encoder image is normal in this sense.
pub fn is_normal_term_prime(t: &TermPrime, delta_prime: &DeltaTable<EConst>) -> bool {
    crate::cbn::step::step_cbn(t, delta_prime).is_empty()
}

/// Verdict of an operational-adequacy check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adequacy {
    Confirmed,
    Refuted,
    Indeterminate,
}

#[derive(Debug, thiserror::Error)]
#[error("precondition violated: {0}")]
pub struct AdequacyPrecondition(pub String);

/// Checks one step of operational adequacy: given `x` with left reduct `y`,
/// confirms that some core step out of `enc x` reaches `enc y` by at most
/// `fuel` ordinary reduction steps in the extended calculus. The forward
/// closure constructively witnesses the compatibility rule: the core beta
/// step produces a host-level redex whose contraction is exactly the
/// encoded substitution.
pub fn check_adequacy_step(
    x: &Term,
    y: &Term,
    delta: &DeltaTable<ConstName>,
    delta_prime: &DeltaTable<EConst>,
    fuel: u64,
) -> Result<Adequacy, AdequacyPrecondition> {
    match crate::cbn::step::step_left(x, delta) {
        Some(actual) if actual.alpha_eq(y) => {}
        Some(actual) => {
            return Err(AdequacyPrecondition(format!(
                "left step of {x} is {actual}, not {y}"
            )))
        }
        None => {
            return Err(AdequacyPrecondition(format!("{x} has no left reduct")));
        }
    }
    let target = enc(y);
    let target_key = target.to_ln();
    let mut seen: std::collections::HashSet<LnTerm<EConst>> = std::collections::HashSet::new();
    let mut frontier: VecDeque<(TermPrime, u64)> = VecDeque::new();
    for z in step_hoas_core(&enc(x), delta_prime) {
        let key = z.to_ln();
        if seen.insert(key) {
            frontier.push_back((z, 0));
        }
    }
    let mut cut_off = false;
    while let Some((t, depth)) = frontier.pop_front() {
        if t.to_ln() == target_key {
            return Ok(Adequacy::Confirmed);
        }
        if depth >= fuel {
            cut_off = true;
            continue;
        }
        for (_, u) in crate::cbn::step::step_cbn(&t, delta_prime) {
            let key = u.to_ln();
            if seen.insert(key) {
                frontier.push_back((u, depth + 1));
            }
        }
    }
    if cut_off {
        Ok(Adequacy::Indeterminate)
    } else {
        Ok(Adequacy::Refuted)
    }
}

/// The encoder as a freshness-substitution model; only iteration is needed,
/// so the term arguments are ignored. Satisfies the freshness-reversing and
/// constructor-injective refinements.
pub struct EncFsb;

impl FsbModel<ConstName> for EncFsb {
    type D = TermPrime;

    fn var(&self, x: &VarName) -> TermPrime {
        Term::var(x.clone())
    }

    fn ct(&self, c: &ConstName) -> TermPrime {
        Term::ct(EConst::Base(c.clone()))
    }

    fn app(&self, _: &Term, f: &TermPrime, _: &Term, a: &TermPrime) -> TermPrime {
        Term::app(Term::app(ctapp(), f.clone()), a.clone())
    }

    fn lm(&self, x: &VarName, _: &Term, b: &TermPrime) -> TermPrime {
        Term::app(ctlm(), Term::lm(x.clone(), b.clone()))
    }

    fn fresh(&self, x: &VarName, _: &Term, d: &TermPrime) -> bool {
        d.fresh_in(x)
    }

    fn subst(&self, _: &Term, dt: &TermPrime, _: &Term, du: &TermPrime, y: &VarName)
        -> TermPrime {
        dt.subst(du, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::{
        check_fsb_clauses, check_fsb_extensions, fold_fsb, ClauseSamples, ModelExtensions,
    };

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

    fn samples() -> Vec<Term> {
        vec![
            var("x"),
            var("y"),
            ct("c"),
            app(var("x"), var("y")),
            lm("x", var("x")),
            lm("x", app(var("x"), var("y"))),
            app(lm("x", var("x")), var("y")),
            app(lm("x", app(var("x"), var("x"))), ct("c")),
            lm("x", lm("y", app(var("x"), var("y")))),
        ]
    }

    #[test]
    fn enc_clause_examples() {
        assert!(enc(&var("x")).alpha_eq(&Term::var(v("x"))));
        assert!(enc(&ct("c")).alpha_eq(&Term::ct(EConst::Base(ConstName::new("c")))));
        let e = enc(&app(var("x"), var("y")));
        let want = Term::app(
            Term::app(ctapp(), Term::var(v("x"))),
            Term::var(v("y")),
        );
        assert!(e.alpha_eq(&want));

        // the worked example: (\x. x) y
        let e = enc(&app(lm("x", var("x")), var("y")));
        let want = Term::app(
            Term::app(
                ctapp(),
                Term::app(ctlm(), Term::lm(v("x"), Term::var(v("x")))),
            ),
            Term::var(v("y")),
        );
        assert!(e.alpha_eq(&want));
    }

    #[test]
    fn dec_round_trips_and_rejects_junk() {
        for t in samples() {
            let back = dec(&enc(&t)).expect("images decode");
            assert!(back.alpha_eq(&t), "round trip of {t}");
        }
        // a bare tagged application missing its outer App is not an image
        let junk = Term::app(ctapp(), Term::var(v("x")));
        assert!(dec(&junk).is_none());
        assert!(dec(&ctlm()).is_none());
    }

    #[test]
    fn enc_is_injective_on_samples() {
        let ss = samples();
        for (i, a) in ss.iter().enumerate() {
            for (j, b) in ss.iter().enumerate() {
                assert_eq!(
                    a.alpha_eq(b),
                    enc(a).alpha_eq(&enc(b)),
                    "{i} vs {j}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn enc_compositionality() {
        let xs = vec![
            (app(var("y"), var("y")), ct("c"), v("y")),
            (lm("z", app(var("z"), var("y"))), var("z"), v("y")),
            (lm("y", var("y")), ct("c"), v("y")),
        ];
        for (x, payload, y) in xs {
            let lhs = enc(&x.subst(&payload, &y));
            let rhs = enc(&x).subst(&enc(&payload), &y);
            assert!(lhs.alpha_eq(&rhs), "{x}");
        }
    }

    #[test]
    fn enc_freshness_iff() {
        for t in samples() {
            for x in [v("x"), v("y"), v("z")] {
                assert_eq!(t.fresh_in(&x), enc(&t).fresh_in(&x), "{t} / {x}");
            }
        }
    }

    #[test]
    fn enc_images_are_normal() {
        let d = DeltaTable::sample_succ(2);
        let dp = extend_delta(&d);
        for t in samples() {
            assert!(is_normal_term_prime(&enc(&t), &dp), "{t}");
        }
        // even for delta-redex sources
        let t = app(ct("succ"), ct("num0"));
        assert!(is_normal_term_prime(&enc(&t), &dp));
        // while a raw beta redex in the extended syntax is not normal
        let raw: TermPrime = Term::app(
            Term::lm(v("x"), Term::var(v("x"))),
            Term::var(v("y")),
        );
        assert!(!is_normal_term_prime(&raw, &dp));
        // and tags themselves are normal
        assert!(is_normal_term_prime(&ctlm(), &dp));
    }

    #[test]
    fn core_step_beta_prime() {
        // App (App ctapp (App ctlm F)) Y ~> App F Y
        let f: TermPrime = Term::lm(v("x"), Term::var(v("x")));
        let t = Term::app(Term::app(ctapp(), Term::app(ctlm(), f.clone())), Term::var(v("y")));
        let dp = DeltaTable::new();
        let succs = step_hoas_core(&t, &dp);
        assert_eq!(succs.len(), 1);
        assert!(succs[0].alpha_eq(&Term::app(f, Term::var(v("y")))));
        // variables have no core step
        assert!(step_hoas_core(&Term::var(v("x")), &dp).is_empty());
    }

    #[test]
    fn adequacy_of_a_beta_step() {
        let d = DeltaTable::new();
        let dp = extend_delta(&d);
        let x = app(lm("x", var("x")), var("y"));
        let y = var("y");
        let verdict = check_adequacy_step(&x, &y, &d, &dp, 64).unwrap();
        assert_eq!(verdict, Adequacy::Confirmed);
    }

    #[test]
    fn adequacy_of_a_delta_step() {
        let d = DeltaTable::sample_succ(2);
        let dp = extend_delta(&d);
        let x = app(ct("succ"), ct("num0"));
        let y = ct("num1");
        let verdict = check_adequacy_step(&x, &y, &d, &dp, 64).unwrap();
        assert_eq!(verdict, Adequacy::Confirmed);
    }

    #[test]
    fn adequacy_requires_a_left_step() {
        let d = DeltaTable::new();
        let dp = extend_delta(&d);
        assert!(check_adequacy_step(&var("x"), &var("x"), &d, &dp, 8).is_err());
    }

    #[test]
    fn adequacy_of_a_duplicating_step() {
        let d = DeltaTable::new();
        let dp = extend_delta(&d);
        let x = app(lm("x", app(var("x"), var("x"))), var("y"));
        let y = app(var("y"), var("y"));
        assert_eq!(
            check_adequacy_step(&x, &y, &d, &dp, 64).unwrap(),
            Adequacy::Confirmed
        );
    }

    #[test]
    fn encoder_fold_matches_direct_and_passes_extensions() {
        for t in samples() {
            assert!(fold_fsb(&EncFsb, &t).alpha_eq(&enc(&t)), "{t}");
        }
        let cs = ClauseSamples {
            terms: samples(),
            vars: vec![v("x"), v("y"), v("z")],
            consts: vec![ConstName::new("c")],
        };
        let r = check_fsb_clauses(&EncFsb, &cs, |a, b| a.alpha_eq(b));
        assert!(r.passed(), "violations: {:?}", r.violations);
        let r = check_fsb_extensions(
            &EncFsb,
            &cs,
            |a, b| a.alpha_eq(b),
            ModelExtensions {
                freshness_reversing: true,
                constructor_injective: true,
            },
        );
        assert!(r.passed(), "violations: {:?}", r.violations);
    }
}
