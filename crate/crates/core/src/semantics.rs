//! Interpretation of terms in semantic domains, and a concrete environment
//! model by normalization by evaluation.
//!
//! A semantic domain interprets constants, application and abstraction; the
//! abstraction case takes a host-language function, so binding inputs
//! become second-order inputs. The NbE model realizes the environment-model
//! axioms with defunctionalized closures: application of an abstraction
//! value is definitionally closure application, and the representable
//! functions are exactly the closures.
//!
//! Evaluation may diverge (beta reduction is not normalizing), so the
//! executable parts run on explicit fuel and answer `OutOfFuel` rather
//! than ever returning a wrong value.

use std::collections::BTreeMap;

use crate::delta::DeltaTable;
use crate::syntax::{AvoidSet, ConstName, Constant, Term, VarName};

/// A semantic domain over carrier `S`, with a test-time equality.
pub trait SemDomain<C: Constant> {
    type S: Clone;

    fn ct(&self, c: &C) -> Self::S;
    fn app(&self, f: &Self::S, a: &Self::S) -> Self::S;
    fn lm(&self, f: &dyn Fn(&Self::S) -> Self::S) -> Self::S;
    fn s_eq(&self, a: &Self::S, b: &Self::S) -> bool;
}

/// A total valuation of variables, represented as finite overrides over a
/// default element.
#[derive(Clone, Debug)]
pub struct Valuation<S: Clone> {
    default: S,
    overrides: BTreeMap<VarName, S>,
}

impl<S: Clone> Valuation<S> {
    pub fn constant(default: S) -> Self {
        Valuation {
            default,
            overrides: BTreeMap::new(),
        }
    }

    pub fn get(&self, x: &VarName) -> &S {
        self.overrides.get(x).unwrap_or(&self.default)
    }

    /// The updated valuation reading `s` at `x` and `self` elsewhere.
    pub fn update(&self, x: &VarName, s: S) -> Self {
        let mut overrides = self.overrides.clone();
        overrides.insert(x.clone(), s);
        Valuation {
            default: self.default.clone(),
            overrides,
        }
    }

    pub fn overridden(&self) -> impl Iterator<Item = &VarName> {
        self.overrides.keys()
    }
}

/// Interpretation of a term in a semantic domain under a valuation,
/// following the constructor clauses: variables read the valuation,
/// constants and applications go through the domain operations, and an
/// abstraction denotes the function interpreting its body under updated
/// valuations. The binder is opened fresh for the term and the valuation's
/// overridden variables, which makes the result stable on alpha-classes.
pub fn sem<C: Constant, D: SemDomain<C>>(
    dom: &D,
    t: &Term<C>,
    rho: &Valuation<D::S>,
) -> D::S {
    match t {
        Term::Var(x) => rho.get(x).clone(),
        Term::Ct(c) => dom.ct(c),
        Term::App(f, a) => {
            let sf = sem(dom, f, rho);
            let sa = sem(dom, a, rho);
            dom.app(&sf, &sa)
        }
        Term::Lm(..) => {
            let mut avoid = t.free_vars();
            avoid.extend(rho.overridden().cloned());
            let (y, body) = t.unbind(&avoid).expect("Lm case");
            dom.lm(&|s: &D::S| sem(dom, &body, &rho.update(&y, s.clone())))
        }
    }
}

/// Explicit fuel for the executable evaluator; every recursive evaluation
/// or readback step consumes one unit.
#[derive(Clone, Copy, Debug)]
pub struct Fuel {
    remaining: u64,
}

impl Fuel {
    pub fn new(remaining: u64) -> Self {
        Fuel { remaining }
    }

    fn tick(&mut self) -> Result<(), OutOfFuel> {
        if self.remaining == 0 {
            return Err(OutOfFuel);
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// Evaluation ran out of fuel: the input may diverge. Never a wrong value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("evaluation fuel exhausted")]
pub struct OutOfFuel;

/// Semantic values of the NbE environment model: neutral terms (stuck on a
/// variable or constant head) and defunctionalized closures.
#[derive(Clone, Debug)]
pub enum NbeValue<C: Constant = ConstName> {
    Neutral(NeutralTerm<C>),
    Closure {
        binder: VarName,
        body: Term<C>,
        env: Box<Valuation<NbeValue<C>>>,
    },
}

/// Stuck applications: the head is always a variable or constant, and
/// constant-headed pairs attempt a delta rule before getting stuck.
#[derive(Clone, Debug)]
pub enum NeutralTerm<C: Constant = ConstName> {
    NVar(VarName),
    NCt(C),
    NApp(Box<NeutralTerm<C>>, Box<NbeValue<C>>),
}

fn value_free_vars<C: Constant>(v: &NbeValue<C>, out: &mut AvoidSet) {
    match v {
        NbeValue::Neutral(n) => neutral_free_vars(n, out),
        NbeValue::Closure { binder, body, env } => {
            for x in body.free_vars() {
                if x != *binder {
                    value_free_vars(env.get(&x), out);
                }
            }
        }
    }
}

fn neutral_free_vars<C: Constant>(n: &NeutralTerm<C>, out: &mut AvoidSet) {
    match n {
        NeutralTerm::NVar(x) => {
            out.insert(x.clone());
        }
        NeutralTerm::NCt(_) => {}
        NeutralTerm::NApp(f, a) => {
            neutral_free_vars(f, out);
            value_free_vars(a, out);
        }
    }
}

/// The valuation sending every free variable of interest to itself as a
/// neutral value.
pub fn identity_valuation<C: Constant>(fv: &AvoidSet) -> Valuation<NbeValue<C>> {
    let mut rho = Valuation::constant(NbeValue::Neutral(NeutralTerm::NVar(VarName::new(
        "undef", 0,
    ))));
    for x in fv {
        rho = rho.update(x, NbeValue::Neutral(NeutralTerm::NVar(x.clone())));
    }
    rho
}

/// Fueled evaluation into the NbE model. Structurally follows the
/// interpretation clauses; application of a closure evaluates its body in
/// the extended environment, and constant-constant spines consult the
/// delta table before going neutral.
pub fn nbe_eval<C: Constant>(
    t: &Term<C>,
    rho: &Valuation<NbeValue<C>>,
    delta: &DeltaTable<C>,
    fuel: &mut Fuel,
) -> Result<NbeValue<C>, OutOfFuel> {
    fuel.tick()?;
    match t {
        Term::Var(x) => Ok(rho.get(x).clone()),
        Term::Ct(c) => Ok(NbeValue::Neutral(NeutralTerm::NCt(c.clone()))),
        Term::Lm(x, b) => Ok(NbeValue::Closure {
            binder: x.clone(),
            body: (**b).clone(),
            env: Box::new(rho.clone()),
        }),
        Term::App(f, a) => {
            let vf = nbe_eval(f, rho, delta, fuel)?;
            let va = nbe_eval(a, rho, delta, fuel)?;
            nbe_apply(&vf, &va, delta, fuel)
        }
    }
}

/// Semantic application in the NbE model.
pub fn nbe_apply<C: Constant>(
    vf: &NbeValue<C>,
    va: &NbeValue<C>,
    delta: &DeltaTable<C>,
    fuel: &mut Fuel,
) -> Result<NbeValue<C>, OutOfFuel> {
    fuel.tick()?;
    match vf {
        NbeValue::Closure { binder, body, env } => {
            nbe_eval(body, &env.update(binder, va.clone()), delta, fuel)
        }
        NbeValue::Neutral(n) => {
            if let (NeutralTerm::NCt(c1), NbeValue::Neutral(NeutralTerm::NCt(c2))) = (n, va) {
                if let Some(z) = delta.lookup(c1, c2) {
                    // delta results are closed, so the empty identity
                    // valuation covers them
                    let rho = identity_valuation(&z.free_vars());
                    return nbe_eval(z, &rho, delta, fuel);
                }
            }
            Ok(NbeValue::Neutral(NeutralTerm::NApp(
                Box::new(n.clone()),
                Box::new(va.clone()),
            )))
        }
    }
}

/// Readback of a semantic value into syntax: neutrals read back
/// structurally, closures read back as abstractions over a fresh variable
/// applied underneath.
pub fn reify<C: Constant>(
    v: &NbeValue<C>,
    avoid: &AvoidSet,
    delta: &DeltaTable<C>,
    fuel: &mut Fuel,
) -> Result<Term<C>, OutOfFuel> {
    fuel.tick()?;
    match v {
        NbeValue::Neutral(n) => reify_neutral(n, avoid, delta, fuel),
        NbeValue::Closure { binder, .. } => {
            let mut all = avoid.clone();
            value_free_vars(v, &mut all);
            let y = crate::syntax::fresh_var(&all, binder.base());
            let fresh = NbeValue::Neutral(NeutralTerm::NVar(y.clone()));
            let inner = nbe_apply(v, &fresh, delta, fuel)?;
            let mut avoid2 = avoid.clone();
            avoid2.insert(y.clone());
            Ok(Term::lm(y, reify(&inner, &avoid2, delta, fuel)?))
        }
    }
}

fn reify_neutral<C: Constant>(
    n: &NeutralTerm<C>,
    avoid: &AvoidSet,
    delta: &DeltaTable<C>,
    fuel: &mut Fuel,
) -> Result<Term<C>, OutOfFuel> {
    match n {
        NeutralTerm::NVar(x) => Ok(Term::var(x.clone())),
        NeutralTerm::NCt(c) => Ok(Term::ct(c.clone())),
        NeutralTerm::NApp(f, a) => Ok(Term::app(
            reify_neutral(f, avoid, delta, fuel)?,
            reify(a, avoid, delta, fuel)?,
        )),
    }
}

/// Full normalization: evaluate under the identity valuation of neutral
/// variables, then read back. On success the result is a beta/delta-normal
/// form of the input.
pub fn normalize_nbe<C: Constant>(
    t: &Term<C>,
    delta: &DeltaTable<C>,
    fuel: &mut Fuel,
) -> Result<Term<C>, OutOfFuel> {
    let fv = t.free_vars();
    let rho = identity_valuation(&fv);
    let v = nbe_eval(t, &rho, delta, fuel)?;
    reify(&v, &fv, delta, fuel)
}

/// Three-valued check that two terms have the same interpretation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Soundness {
    Confirmed,
    Refuted,
    Indeterminate,
}

/// Checks semantic agreement of two terms by normalizing both: `Confirmed`
/// when both normalize to alpha-equivalent normal forms, `Refuted` when
/// both normalize and differ, `Indeterminate` whenever fuel runs out.
pub fn check_soundness<C: Constant>(
    x: &Term<C>,
    y: &Term<C>,
    delta: &DeltaTable<C>,
    fuel_budget: u64,
) -> Soundness {
    let mut fa = Fuel::new(fuel_budget);
    let mut fb = Fuel::new(fuel_budget);
    match (
        normalize_nbe(x, delta, &mut fa),
        normalize_nbe(y, delta, &mut fb),
    ) {
        (Ok(a), Ok(b)) => {
            if a.alpha_eq(&b) {
                Soundness::Confirmed
            } else {
                Soundness::Refuted
            }
        }
        _ => Soundness::Indeterminate,
    }
}

/// A semantic domain for the two-sorted syntax: a term carrier `S`, a value
/// carrier `Sv`, and operations mirroring the value/term constructors.
pub trait SemDomainV {
    type S: Clone;
    type Sv: Clone;

    fn val(&self, v: &Self::Sv) -> Self::S;
    fn app(&self, f: &Self::S, a: &Self::S) -> Self::S;
    fn ct(&self, c: &ConstName) -> Self::Sv;
    fn lm(&self, f: &dyn Fn(&Self::Sv) -> Self::S) -> Self::Sv;
    fn s_eq(&self, a: &Self::S, b: &Self::S) -> bool;
    fn sv_eq(&self, a: &Self::Sv, b: &Self::Sv) -> bool;
}

/// Term-sort interpretation of the two-sorted syntax.
pub fn sem_term_v<D: SemDomainV>(
    dom: &D,
    t: &crate::cbv::TermV,
    rho: &Valuation<D::Sv>,
) -> D::S {
    match t {
        crate::cbv::TermV::Val(v) => {
            let sv = sem_value_v(dom, v, rho);
            dom.val(&sv)
        }
        crate::cbv::TermV::App(f, a) => {
            let sf = sem_term_v(dom, f, rho);
            let sa = sem_term_v(dom, a, rho);
            dom.app(&sf, &sa)
        }
    }
}

/// Value-sort interpretation of the two-sorted syntax.
pub fn sem_value_v<D: SemDomainV>(
    dom: &D,
    v: &crate::cbv::ValueV,
    rho: &Valuation<D::Sv>,
) -> D::Sv {
    match v {
        crate::cbv::ValueV::Var(x) => rho.get(x).clone(),
        crate::cbv::ValueV::Ct(c) => dom.ct(c),
        crate::cbv::ValueV::Lm(..) => {
            let mut avoid = v.free_vars();
            avoid.extend(rho.overridden().cloned());
            let (y, body) = v.unbind(&avoid).expect("Lm case");
            dom.lm(&|s: &D::Sv| sem_term_v(dom, &body, &rho.update(&y, s.clone())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbv::{TermV, ValueV};

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

    fn omega() -> Term {
        let half = lm("x", app(var("x"), var("x")));
        app(half.clone(), half)
    }

    /// The one-point domain: every term means the same thing.
    struct OnePoint;

    impl SemDomain<ConstName> for OnePoint {
        type S = ();
        fn ct(&self, _: &ConstName) {}
        fn app(&self, _: &(), _: &()) {}
        fn lm(&self, _: &dyn Fn(&()) -> ()) {}
        fn s_eq(&self, _: &(), _: &()) -> bool {
            true
        }
    }

    #[test]
    fn sem_clauses_on_the_one_point_domain() {
        let rho = Valuation::constant(());
        for t in [var("x"), ct("c"), lm("x", app(var("x"), var("y"))), omega()] {
            sem(&OnePoint, &t, &rho);
        }
    }

    /// A domain counting constant occurrences reached by evaluation, used
    /// to observe the variable and update clauses.
    struct CountCt;

    impl SemDomain<ConstName> for CountCt {
        type S = u64;
        fn ct(&self, _: &ConstName) -> u64 {
            1
        }
        fn app(&self, f: &u64, a: &u64) -> u64 {
            f + a
        }
        fn lm(&self, f: &dyn Fn(&u64) -> u64) -> u64 {
            f(&0)
        }
        fn s_eq(&self, a: &u64, b: &u64) -> bool {
            a == b
        }
    }

    #[test]
    fn sem_reads_variables_from_the_valuation() {
        let rho = Valuation::constant(0u64).update(&v("x"), 7);
        assert_eq!(sem(&CountCt, &var("x"), &rho), 7);
        assert_eq!(sem(&CountCt, &ct("c"), &rho), 1);
        assert_eq!(sem(&CountCt, &app(var("x"), ct("c")), &rho), 8);
        // the Lm clause interprets the body under the updated valuation
        assert_eq!(sem(&CountCt, &lm("x", var("x")), &rho), 0);
    }

    #[test]
    fn sem_irrelevance_of_fresh_variables() {
        let t = lm("x", app(var("x"), var("y")));
        let rho1 = Valuation::constant(0u64).update(&v("y"), 3).update(&v("z"), 10);
        let rho2 = Valuation::constant(0u64).update(&v("y"), 3).update(&v("z"), 42);
        assert!(t.fresh_in(&v("z")));
        assert_eq!(sem(&CountCt, &t, &rho1), sem(&CountCt, &t, &rho2));
    }

    #[test]
    fn nbe_eval_examples() {
        let d = no_delta();
        let mut fuel = Fuel::new(256);
        let t = app(lm("x", var("x")), ct("c"));
        let rho = identity_valuation(&t.free_vars());
        let got = nbe_eval(&t, &rho, &d, &mut fuel).unwrap();
        assert!(matches!(
            got,
            NbeValue::Neutral(NeutralTerm::NCt(ref c)) if c.label() == "c"
        ));
    }

    #[test]
    fn omega_runs_out_of_fuel() {
        let d = no_delta();
        let mut fuel = Fuel::new(10_000);
        assert!(matches!(
            normalize_nbe(&omega(), &d, &mut fuel),
            Err(OutOfFuel)
        ));
    }

    #[test]
    fn delta_spines_fire() {
        let d = DeltaTable::sample_succ(2);
        let t = app(ct("succ"), ct("num0"));
        let mut fuel = Fuel::new(256);
        let got = normalize_nbe(&t, &d, &mut fuel).unwrap();
        assert!(got.alpha_eq(&ct("num1")));
    }

    #[test]
    fn reify_examples() {
        let d = no_delta();
        let mut fuel = Fuel::new(256);
        let neutral: NbeValue = NbeValue::Neutral(NeutralTerm::NVar(v("x")));
        assert!(reify(&neutral, &AvoidSet::new(), &d, &mut fuel)
            .unwrap()
            .alpha_eq(&var("x")));

        let t = lm("x", var("x"));
        let rho = identity_valuation(&AvoidSet::new());
        let clo = nbe_eval(&t, &rho, &d, &mut fuel).unwrap();
        let back = reify(&clo, &AvoidSet::new(), &d, &mut fuel).unwrap();
        assert!(back.alpha_eq(&t));
    }

    #[test]
    fn normalize_examples() {
        let d = no_delta();
        let mut fuel = Fuel::new(256);
        let t = app(lm("x", var("x")), ct("c"));
        assert!(normalize_nbe(&t, &d, &mut fuel).unwrap().alpha_eq(&ct("c")));

        let mut fuel = Fuel::new(256);
        let t = lm("x", app(lm("y", var("y")), var("x")));
        assert!(normalize_nbe(&t, &d, &mut fuel)
            .unwrap()
            .alpha_eq(&lm("x", var("x"))));
    }

    #[test]
    fn normalization_avoids_capture() {
        // \y. (\x. \y1. x) y must not capture the free y under the inner
        // binder
        let d = no_delta();
        let mut fuel = Fuel::new(256);
        let t = lm(
            "y",
            app(lm("x", lm("w", var("x"))), var("y")),
        );
        let got = normalize_nbe(&t, &d, &mut fuel).unwrap();
        assert!(got.alpha_eq(&lm("y", lm("w", var("y")))));
    }

    #[test]
    fn soundness_examples() {
        let d = no_delta();
        let x = app(lm("x", var("x")), ct("c"));
        assert_eq!(check_soundness(&x, &ct("c"), &d, 256), Soundness::Confirmed);
        assert_eq!(check_soundness(&x, &x, &d, 256), Soundness::Confirmed);
        assert_eq!(
            check_soundness(&omega(), &omega(), &d, 256),
            Soundness::Indeterminate
        );
        assert_eq!(
            check_soundness(&ct("a"), &ct("b"), &d, 256),
            Soundness::Refuted
        );
    }

    #[test]
    fn substitution_lemma_on_nbe_samples() {
        let d = no_delta();
        let samples = vec![
            (app(var("y"), ct("c")), lm("x", var("x")), v("y")),
            (lm("z", app(var("z"), var("y"))), ct("c"), v("y")),
            (app(lm("w", var("w")), var("y")), lm("q", var("q")), v("y")),
        ];
        for (x, payload, y) in samples {
            let mut f1 = Fuel::new(512);
            let lhs = normalize_nbe(&x.subst(&payload, &y), &d, &mut f1);
            // interpret x under rho[y <- sem payload]
            let mut fv = x.free_vars();
            fv.extend(payload.free_vars());
            let rho = identity_valuation(&fv);
            let mut f2 = Fuel::new(512);
            let vp = nbe_eval(&payload, &rho, &d, &mut f2).unwrap();
            let v2 = nbe_eval(&x, &rho.update(&y, vp), &d, &mut f2).unwrap();
            let rhs = reify(&v2, &fv, &d, &mut f2);
            match (lhs, rhs) {
                (Ok(a), Ok(b)) => assert!(a.alpha_eq(&b), "{a} vs {b}"),
                _ => panic!("samples are normalizing"),
            }
        }
    }

    struct OnePointV;

    impl SemDomainV for OnePointV {
        type S = ();
        type Sv = ();
        fn val(&self, _: &()) {}
        fn app(&self, _: &(), _: &()) {}
        fn ct(&self, _: &ConstName) {}
        fn lm(&self, _: &dyn Fn(&()) -> ()) {}
        fn s_eq(&self, _: &(), _: &()) -> bool {
            true
        }
        fn sv_eq(&self, _: &(), _: &()) -> bool {
            true
        }
    }

    /// Two-sorted domain distinguishing the syntactic class of what was
    /// interpreted; value-sort carrier tracks constants.
    struct TagV;

    impl SemDomainV for TagV {
        type S = u64;
        type Sv = u64;
        fn val(&self, v: &u64) -> u64 {
            *v
        }
        fn app(&self, f: &u64, a: &u64) -> u64 {
            f + a
        }
        fn ct(&self, _: &ConstName) -> u64 {
            1
        }
        fn lm(&self, f: &dyn Fn(&u64) -> u64) -> u64 {
            f(&0)
        }
        fn s_eq(&self, a: &u64, b: &u64) -> bool {
            a == b
        }
        fn sv_eq(&self, a: &u64, b: &u64) -> bool {
            a == b
        }
    }

    #[test]
    fn two_sorted_interpretation_clauses() {
        let rho = Valuation::constant(0u64).update(&v("x"), 5);
        // sem_value (Var x) rho = rho x
        assert_eq!(sem_value_v(&TagV, &ValueV::Var(v("x")), &rho), 5);
        // sem_term (Val V) rho = val (sem_value V rho)
        assert_eq!(sem_term_v(&TagV, &TermV::Val(ValueV::Var(v("x"))), &rho), 5);
        assert_eq!(
            sem_value_v(&TagV, &ValueV::Ct(ConstName::new("c")), &rho),
            1
        );
        // one-point carriers collapse everything
        let rho1 = Valuation::constant(());
        sem_term_v(
            &OnePointV,
            &TermV::app(
                TermV::Val(ValueV::lm(v("x"), TermV::Val(ValueV::Var(v("x"))))),
                TermV::Val(ValueV::Ct(ConstName::new("c"))),
            ),
            &rho1,
        );
    }

    #[test]
    fn two_sorted_substitution_lemma_samples() {
        let samples = vec![
            (
                TermV::app(
                    TermV::Val(ValueV::Var(v("y"))),
                    TermV::Val(ValueV::Ct(ConstName::new("c"))),
                ),
                ValueV::Ct(ConstName::new("d")),
                v("y"),
            ),
            (
                TermV::Val(ValueV::lm(
                    v("z"),
                    TermV::app(
                        TermV::Val(ValueV::Var(v("z"))),
                        TermV::Val(ValueV::Var(v("y"))),
                    ),
                )),
                ValueV::Ct(ConstName::new("c")),
                v("y"),
            ),
        ];
        for (x, payload, y) in samples {
            let rho = Valuation::constant(0u64).update(&v("y"), 3);
            let lhs = sem_term_v(&TagV, &x.subst(&payload, &y), &rho);
            let sp = sem_value_v(&TagV, &payload, &rho);
            let rhs = sem_term_v(&TagV, &x, &rho.update(&y, sp));
            assert_eq!(lhs, rhs);
            // and the value-sort bullet on the payload itself
            let w = ValueV::lm(v("k"), TermV::Val(ValueV::Var(v("y"))));
            let lhs_v = sem_value_v(&TagV, &w.subst(&payload, &y), &rho);
            let rhs_v = sem_value_v(&TagV, &w, &rho.update(&y, sp));
            assert_eq!(lhs_v, rhs_v);
        }
    }
}
