//! Binding-aware structural recursion.
//!
//! A fold target is a "model": a carrier `D` together with constructor-like
//! operations and a freshness-like predicate, plus either a substitution-like
//! operation ([`FsbModel`]) or a swapping-like one ([`FswModel`]). When the
//! model satisfies its clause set, the induced fold is the unique function
//! commuting with the constructors and the operators, and in particular it is
//! well defined on alpha-classes.
//!
//! The clause sets are not proved here; they are checked by sampling
//! ([`check_fsb_clauses`], [`check_fsw_clauses`]), which is what an engine
//! (as opposed to a prover) can offer as evidence.
//!
//! The constructor operations receive both the original subterms and their
//! fold values (primitive recursion rather than iteration), which is why
//! `app` and `lm` below take `Term` arguments alongside `D` ones.

use std::fmt::Write as _;

use crate::syntax::{AvoidSet, Constant, Term, VarName};

/// Freshness-substitution model.
pub trait FsbModel<C: Constant> {
    type D: Clone;

    fn var(&self, x: &VarName) -> Self::D;
    fn ct(&self, c: &C) -> Self::D;
    fn app(&self, fun_t: &Term<C>, fun: &Self::D, arg_t: &Term<C>, arg: &Self::D) -> Self::D;
    fn lm(&self, binder: &VarName, body_t: &Term<C>, body: &Self::D) -> Self::D;
    fn fresh(&self, x: &VarName, t: &Term<C>, d: &Self::D) -> bool;
    fn subst(&self, t: &Term<C>, dt: &Self::D, u: &Term<C>, du: &Self::D, y: &VarName)
        -> Self::D;

    /// Finite set of variables the model's parameters depend on; the fold
    /// renames binders away from it.
    fn support(&self) -> AvoidSet {
        AvoidSet::new()
    }
}

/// Freshness-swapping model: as [`FsbModel`] with swapping instead of
/// substitution.
pub trait FswModel<C: Constant> {
    type D: Clone;

    fn var(&self, x: &VarName) -> Self::D;
    fn ct(&self, c: &C) -> Self::D;
    fn app(&self, fun_t: &Term<C>, fun: &Self::D, arg_t: &Term<C>, arg: &Self::D) -> Self::D;
    fn lm(&self, binder: &VarName, body_t: &Term<C>, body: &Self::D) -> Self::D;
    fn fresh(&self, x: &VarName, t: &Term<C>, d: &Self::D) -> bool;
    fn swap(&self, t: &Term<C>, dt: &Self::D, z1: &VarName, z2: &VarName) -> Self::D;

    fn support(&self) -> AvoidSet {
        AvoidSet::new()
    }
}

/// Optional extra obligations a model may claim; see [`check_extensions`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ModelExtensions {
    /// The converses of the freshness clauses hold, so the fold reflects
    /// freshness.
    pub freshness_reversing: bool,
    /// The constructor-like operations are injective and mutually exclusive,
    /// so the fold is injective.
    pub constructor_injective: bool,
}

fn fold_lm_case<C: Constant>(t: &Term<C>, support: &AvoidSet) -> (VarName, Term<C>) {
    let mut avoid = t.free_vars();
    avoid.extend(support.iter().cloned());
    t.unbind(&avoid).expect("fold_lm_case is only called on Lm")
}

/// The fold induced by an FSb model. For law-abiding models the result is
/// stable under alpha-equivalent inputs: the `Lm` case renames the binder
/// fresh for the term and the model's support before recursing.
pub fn fold_fsb<C: Constant, M: FsbModel<C>>(model: &M, t: &Term<C>) -> M::D {
    match t {
        Term::Var(x) => model.var(x),
        Term::Ct(c) => model.ct(c),
        Term::App(f, a) => {
            let df = fold_fsb(model, f);
            let da = fold_fsb(model, a);
            model.app(f, &df, a, &da)
        }
        Term::Lm(..) => {
            let (y, body) = fold_lm_case(t, &model.support());
            let db = fold_fsb(model, &body);
            model.lm(&y, &body, &db)
        }
    }
}

/// The fold induced by an FSw model.
pub fn fold_fsw<C: Constant, M: FswModel<C>>(model: &M, t: &Term<C>) -> M::D {
    match t {
        Term::Var(x) => model.var(x),
        Term::Ct(c) => model.ct(c),
        Term::App(f, a) => {
            let df = fold_fsw(model, f);
            let da = fold_fsw(model, a);
            model.app(f, &df, a, &da)
        }
        Term::Lm(..) => {
            let (y, body) = fold_lm_case(t, &model.support());
            let db = fold_fsw(model, &body);
            model.lm(&y, &body, &db)
        }
    }
}

/// Sample material for the clause checkers. The `D` arguments of each clause
/// instance are always fold values of sample terms, paired with those terms.
#[derive(Clone, Debug)]
pub struct ClauseSamples<C: Constant> {
    pub terms: Vec<Term<C>>,
    pub vars: Vec<VarName>,
    pub consts: Vec<C>,
}

/// One failed clause instance.
#[derive(Clone, Debug)]
pub struct ClauseViolation {
    pub clause: &'static str,
    pub witness: String,
}

/// Outcome of a clause check: every instantiated clause, with witnesses for
/// the failures. Empty sample lists give a vacuous pass.
#[derive(Clone, Debug, Default)]
pub struct ClauseReport {
    pub checked: u64,
    pub violations: Vec<ClauseViolation>,
}

impl ClauseReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, clause: &'static str, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(ClauseViolation {
                clause,
                witness: witness(),
            });
        }
    }
}

/// Instantiates the FSb clauses `F1`-`F5`, `Sb1`-`Sb4` and `SbRn` on every
/// combination drawn from `samples` and reports each failure.
pub fn check_fsb_clauses<C: Constant, M: FsbModel<C>>(
    model: &M,
    samples: &ClauseSamples<C>,
    d_eq: impl Fn(&M::D, &M::D) -> bool,
) -> ClauseReport {
    let mut report = ClauseReport::default();
    let folded: Vec<(&Term<C>, M::D)> = samples
        .terms
        .iter()
        .map(|t| (t, fold_fsb(model, t)))
        .collect();

    for z in &samples.vars {
        for c in &samples.consts {
            report.record(
                model.fresh(z, &Term::ct(c.clone()), &model.ct(c)),
                "F1",
                || format!("z={z}, c={c}"),
            );
        }
        for x in &samples.vars {
            if x != z {
                report.record(
                    model.fresh(z, &Term::var(x.clone()), &model.var(x)),
                    "F2",
                    || format!("z={z}, x={x}"),
                );
            }
        }
        for (xt, xd) in &folded {
            for (yt, yd) in &folded {
                if model.fresh(z, xt, xd) && model.fresh(z, yt, yd) {
                    let app_t = Term::app((*xt).clone(), (*yt).clone());
                    let app_d = model.app(xt, xd, yt, yd);
                    report.record(model.fresh(z, &app_t, &app_d), "F3", || {
                        format!("z={z}, X'={xt}, Y'={yt}")
                    });
                }
            }
            let lm_t = Term::lm(z.clone(), (*xt).clone());
            let lm_d = model.lm(z, xt, xd);
            report.record(model.fresh(z, &lm_t, &lm_d), "F4", || {
                format!("z={z}, X'={xt}")
            });
            for x in &samples.vars {
                if model.fresh(z, xt, xd) {
                    let lm_t = Term::lm(x.clone(), (*xt).clone());
                    let lm_d = model.lm(x, xt, xd);
                    report.record(model.fresh(z, &lm_t, &lm_d), "F5", || {
                        format!("z={z}, x={x}, X'={xt}")
                    });
                }
            }
        }
    }

    for z in &samples.vars {
        for (zt, zd) in &folded {
            let got = model.subst(
                &Term::var(z.clone()),
                &model.var(z),
                zt,
                zd,
                z,
            );
            report.record(d_eq(&got, zd), "Sb1", || format!("z={z}, Z'={zt}"));

            for x in &samples.vars {
                if x != z {
                    let got = model.subst(
                        &Term::var(x.clone()),
                        &model.var(x),
                        zt,
                        zd,
                        z,
                    );
                    report.record(d_eq(&got, &model.var(x)), "Sb2", || {
                        format!("x={x}, z={z}, Z'={zt}")
                    });
                }
            }

            for (xt, xd) in &folded {
                for (yt, yd) in &folded {
                    let app_t = Term::app((*xt).clone(), (*yt).clone());
                    let app_d = model.app(xt, xd, yt, yd);
                    let lhs = model.subst(&app_t, &app_d, zt, zd, z);
                    let xs = xt.subst(zt, z);
                    let ys = yt.subst(zt, z);
                    let xsub = model.subst(xt, xd, zt, zd, z);
                    let ysub = model.subst(yt, yd, zt, zd, z);
                    let rhs = model.app(&xs, &xsub, &ys, &ysub);
                    report.record(d_eq(&lhs, &rhs), "Sb3", || {
                        format!("z={z}, X'={xt}, Y'={yt}, Z'={zt}")
                    });
                }

                for x in &samples.vars {
                    if x != z && model.fresh(x, zt, zd) {
                        let lm_t = Term::lm(x.clone(), (*xt).clone());
                        let lm_d = model.lm(x, xt, xd);
                        let lhs = model.subst(&lm_t, &lm_d, zt, zd, z);
                        let body = xt.subst(zt, z);
                        let rhs = model.lm(x, &body, &model.subst(xt, xd, zt, zd, z));
                        report.record(d_eq(&lhs, &rhs), "Sb4", || {
                            format!("x={x}, z={z}, X'={xt}, Z'={zt}")
                        });
                    }
                }
            }
        }
    }

    for x in &samples.vars {
        for y in &samples.vars {
            if x == y {
                continue;
            }
            for (xt, xd) in &folded {
                if model.fresh(y, xt, xd) {
                    let renamed_t = xt.subst(&Term::var(y.clone()), x);
                    let renamed_d = model.subst(
                        xt,
                        xd,
                        &Term::var(y.clone()),
                        &model.var(y),
                        x,
                    );
                    let lhs = model.lm(y, &renamed_t, &renamed_d);
                    let rhs = model.lm(x, xt, xd);
                    report.record(d_eq(&lhs, &rhs), "SbRn", || {
                        format!("x={x}, y={y}, X'={xt}")
                    });
                }
            }
        }
    }

    report
}

/// Instantiates the FSw clauses `F1`-`F5`, `Sw1`-`Sw4` and `SwCg`.
pub fn check_fsw_clauses<C: Constant, M: FswModel<C>>(
    model: &M,
    samples: &ClauseSamples<C>,
    d_eq: impl Fn(&M::D, &M::D) -> bool,
) -> ClauseReport {
    let mut report = ClauseReport::default();
    let folded: Vec<(&Term<C>, M::D)> = samples
        .terms
        .iter()
        .map(|t| (t, fold_fsw(model, t)))
        .collect();

    // The freshness clauses coincide with the FSb ones.
    for z in &samples.vars {
        for c in &samples.consts {
            report.record(
                model.fresh(z, &Term::ct(c.clone()), &model.ct(c)),
                "F1",
                || format!("z={z}, c={c}"),
            );
        }
        for x in &samples.vars {
            if x != z {
                report.record(
                    model.fresh(z, &Term::var(x.clone()), &model.var(x)),
                    "F2",
                    || format!("z={z}, x={x}"),
                );
            }
        }
        for (xt, xd) in &folded {
            for (yt, yd) in &folded {
                if model.fresh(z, xt, xd) && model.fresh(z, yt, yd) {
                    let app_t = Term::app((*xt).clone(), (*yt).clone());
                    let app_d = model.app(xt, xd, yt, yd);
                    report.record(model.fresh(z, &app_t, &app_d), "F3", || {
                        format!("z={z}, X'={xt}, Y'={yt}")
                    });
                }
            }
            let lm_t = Term::lm(z.clone(), (*xt).clone());
            report.record(model.fresh(z, &lm_t, &model.lm(z, xt, xd)), "F4", || {
                format!("z={z}, X'={xt}")
            });
            for x in &samples.vars {
                if model.fresh(z, xt, xd) {
                    let lm_t = Term::lm(x.clone(), (*xt).clone());
                    report.record(model.fresh(z, &lm_t, &model.lm(x, xt, xd)), "F5", || {
                        format!("z={z}, x={x}, X'={xt}")
                    });
                }
            }
        }
    }

    let swap_var = |x: &VarName, z1: &VarName, z2: &VarName| -> VarName {
        if x == z1 {
            z2.clone()
        } else if x == z2 {
            z1.clone()
        } else {
            x.clone()
        }
    };

    for z1 in &samples.vars {
        for z2 in &samples.vars {
            for c in &samples.consts {
                let got = model.swap(&Term::ct(c.clone()), &model.ct(c), z1, z2);
                report.record(d_eq(&got, &model.ct(c)), "Sw1", || {
                    format!("c={c}, z1={z1}, z2={z2}")
                });
            }
            for x in &samples.vars {
                let got = model.swap(&Term::var(x.clone()), &model.var(x), z1, z2);
                let want = model.var(&swap_var(x, z1, z2));
                report.record(d_eq(&got, &want), "Sw2", || {
                    format!("x={x}, z1={z1}, z2={z2}")
                });
            }
            for (xt, xd) in &folded {
                for (yt, yd) in &folded {
                    let app_t = Term::app((*xt).clone(), (*yt).clone());
                    let app_d = model.app(xt, xd, yt, yd);
                    let lhs = model.swap(&app_t, &app_d, z1, z2);
                    let xs = xt.swap(z1, z2);
                    let ys = yt.swap(z1, z2);
                    let rhs = model.app(
                        &xs,
                        &model.swap(xt, xd, z1, z2),
                        &ys,
                        &model.swap(yt, yd, z1, z2),
                    );
                    report.record(d_eq(&lhs, &rhs), "Sw3", || {
                        format!("X'={xt}, Y'={yt}, z1={z1}, z2={z2}")
                    });
                }
                for x in &samples.vars {
                    let lm_t = Term::lm(x.clone(), (*xt).clone());
                    let lm_d = model.lm(x, xt, xd);
                    let lhs = model.swap(&lm_t, &lm_d, z1, z2);
                    let body = xt.swap(z1, z2);
                    let rhs = model.lm(&swap_var(x, z1, z2), &body, &model.swap(xt, xd, z1, z2));
                    report.record(d_eq(&lhs, &rhs), "Sw4", || {
                        format!("x={x}, X'={xt}, z1={z1}, z2={z2}")
                    });
                }
            }
        }
    }

    for z in &samples.vars {
        for x in &samples.vars {
            for y in &samples.vars {
                if z == x || z == y {
                    continue;
                }
                for (xt, xd) in &folded {
                    for (yt, yd) in &folded {
                        if model.fresh(z, xt, xd)
                            && model.fresh(z, yt, yd)
                            && d_eq(&model.swap(xt, xd, z, x), &model.swap(yt, yd, z, y))
                        {
                            let lhs = model.lm(x, xt, xd);
                            let rhs = model.lm(y, yt, yd);
                            report.record(d_eq(&lhs, &rhs), "SwCg", || {
                                format!("x={x}, y={y}, z={z}, X'={xt}, Y'={yt}")
                            });
                        }
                    }
                }
            }
        }
    }

    report
}

/// Checks the optional obligations of [`ModelExtensions`] for an FSb model:
/// the freshness-clause converses `F2c`, `F3c`, `F4_5c` and the constructor
/// injectivity / mutual-exclusivity conditions.
pub fn check_fsb_extensions<C: Constant, M: FsbModel<C>>(
    model: &M,
    samples: &ClauseSamples<C>,
    d_eq: impl Fn(&M::D, &M::D) -> bool,
    exts: ModelExtensions,
) -> ClauseReport {
    let mut report = ClauseReport::default();
    let folded: Vec<(&Term<C>, M::D)> = samples
        .terms
        .iter()
        .map(|t| (t, fold_fsb(model, t)))
        .collect();

    if exts.freshness_reversing {
        for z in &samples.vars {
            for x in &samples.vars {
                let ok = !model.fresh(z, &Term::var(x.clone()), &model.var(x)) || x != z;
                report.record(ok, "F2c", || format!("z={z}, x={x}"));
            }
            for (xt, xd) in &folded {
                for (yt, yd) in &folded {
                    let app_t = Term::app((*xt).clone(), (*yt).clone());
                    let app_d = model.app(xt, xd, yt, yd);
                    if model.fresh(z, &app_t, &app_d) {
                        report.record(
                            model.fresh(z, xt, xd) && model.fresh(z, yt, yd),
                            "F3c",
                            || format!("z={z}, X'={xt}, Y'={yt}"),
                        );
                    }
                }
                for x in &samples.vars {
                    let lm_t = Term::lm(x.clone(), (*xt).clone());
                    let lm_d = model.lm(x, xt, xd);
                    if model.fresh(z, &lm_t, &lm_d) {
                        report.record(x == z || model.fresh(z, xt, xd), "F4_5c", || {
                            format!("z={z}, x={x}, X'={xt}")
                        });
                    }
                }
            }
        }
    }

    if exts.constructor_injective {
        // Build every sampled construction, tagged with enough of its
        // arguments to decide "same arguments" up to the library equalities.
        enum Built<'a, C: Constant> {
            Var(&'a VarName),
            Ct(&'a C),
            App(usize, usize),
            Lm(&'a VarName, usize),
        }
        let mut built: Vec<(Built<'_, C>, M::D)> = Vec::new();
        for x in &samples.vars {
            built.push((Built::Var(x), model.var(x)));
        }
        for c in &samples.consts {
            built.push((Built::Ct(c), model.ct(c)));
        }
        for (i, (xt, xd)) in folded.iter().enumerate() {
            for (j, (yt, yd)) in folded.iter().enumerate() {
                built.push((Built::App(i, j), model.app(xt, xd, yt, yd)));
            }
            for x in &samples.vars {
                built.push((Built::Lm(x, i), model.lm(x, xt, xd)));
            }
        }
        // Injectivity is judged against the term model's own
        // identifications: abstractions compare as abstractions, so
        // LM x (Var x) and LM y (Var y) count as the same construction.
        let same_term = |i: usize, j: usize| folded[i].0.alpha_eq(folded[j].0);
        for (i, (ta, da)) in built.iter().enumerate() {
            for (tb, db) in built.iter().skip(i + 1) {
                let same_args = match (ta, tb) {
                    (Built::Var(a), Built::Var(b)) => a == b,
                    (Built::Ct(a), Built::Ct(b)) => a == b,
                    (Built::App(f1, a1), Built::App(f2, a2)) => {
                        same_term(*f1, *f2) && same_term(*a1, *a2)
                    }
                    (Built::Lm(x1, b1), Built::Lm(x2, b2)) => {
                        Term::lm((*x1).clone(), folded[*b1].0.clone())
                            .alpha_eq(&Term::lm((*x2).clone(), folded[*b2].0.clone()))
                    }
                    _ => false, // different constructor families
                };
                if !same_args {
                    report.record(!d_eq(da, db), "constructor-injective", || {
                        let mut w = String::new();
                        let _ = write!(w, "two distinct constructions collide");
                        w
                    });
                }
            }
        }
    }

    report
}

/// Ready-made models used by the tests and the coherence suite.
pub mod models {
    use std::collections::BTreeMap;

    use super::{FsbModel, FswModel};
    use crate::syntax::{Constant, Term, VarName};

    /// FSb model whose fold rebuilds the term.
    pub struct IdentityFsb;

    impl<C: Constant> FsbModel<C> for IdentityFsb {
        type D = Term<C>;

        fn var(&self, x: &VarName) -> Term<C> {
            Term::var(x.clone())
        }
        fn ct(&self, c: &C) -> Term<C> {
            Term::ct(c.clone())
        }
        fn app(&self, _: &Term<C>, f: &Term<C>, _: &Term<C>, a: &Term<C>) -> Term<C> {
            Term::app(f.clone(), a.clone())
        }
        fn lm(&self, x: &VarName, _: &Term<C>, b: &Term<C>) -> Term<C> {
            Term::lm(x.clone(), b.clone())
        }
        fn fresh(&self, x: &VarName, _: &Term<C>, d: &Term<C>) -> bool {
            d.fresh_in(x)
        }
        fn subst(&self, _: &Term<C>, dt: &Term<C>, _: &Term<C>, du: &Term<C>, y: &VarName)
            -> Term<C> {
            dt.subst(du, y)
        }
    }

    /// FSw model whose fold rebuilds the term.
    pub struct IdentityFsw;

    impl<C: Constant> FswModel<C> for IdentityFsw {
        type D = Term<C>;

        fn var(&self, x: &VarName) -> Term<C> {
            Term::var(x.clone())
        }
        fn ct(&self, c: &C) -> Term<C> {
            Term::ct(c.clone())
        }
        fn app(&self, _: &Term<C>, f: &Term<C>, _: &Term<C>, a: &Term<C>) -> Term<C> {
            Term::app(f.clone(), a.clone())
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

    /// Occurrence counts as a finite map; absent variables count zero.
    pub type OccMap = BTreeMap<VarName, u64>;

    /// Drops explicit zeros so maps compare by the function they denote.
    pub fn occ_eq(a: &OccMap, b: &OccMap) -> bool {
        let norm = |m: &OccMap| -> OccMap {
            m.iter()
                .filter(|(_, n)| **n > 0)
                .map(|(k, v)| (k.clone(), *v))
                .collect()
        };
        norm(a) == norm(b)
    }

    fn occ_get(m: &OccMap, x: &VarName) -> u64 {
        m.get(x).copied().unwrap_or(0)
    }

    /// FSb model whose fold counts free occurrences of each variable,
    /// following the clause set of the occurrence counter: the substitution
    /// operation realizes `no (X[Y/y]) x = no X x + no X y * no Y x` (and the
    /// `x = y` branch `no X y * no Y y`).
    pub struct OccCountFsb;

    impl<C: Constant> FsbModel<C> for OccCountFsb {
        type D = OccMap;

        fn var(&self, x: &VarName) -> OccMap {
            [(x.clone(), 1)].into_iter().collect()
        }
        fn ct(&self, _: &C) -> OccMap {
            OccMap::new()
        }
        fn app(&self, _: &Term<C>, f: &OccMap, _: &Term<C>, a: &OccMap) -> OccMap {
            let mut out = f.clone();
            for (k, v) in a {
                *out.entry(k.clone()).or_insert(0) += v;
            }
            out
        }
        fn lm(&self, x: &VarName, _: &Term<C>, b: &OccMap) -> OccMap {
            let mut out = b.clone();
            out.remove(x);
            out
        }
        fn fresh(&self, x: &VarName, _: &Term<C>, d: &OccMap) -> bool {
            occ_get(d, x) == 0
        }
        fn subst(&self, _: &Term<C>, u: &OccMap, _: &Term<C>, v: &OccMap, y: &VarName) -> OccMap {
            let uy = occ_get(u, y);
            let keys: std::collections::BTreeSet<VarName> =
                u.keys().chain(v.keys()).cloned().collect();
            let mut out = OccMap::new();
            for x in keys {
                let n = if &x == y {
                    uy * occ_get(v, y)
                } else {
                    occ_get(u, &x) + uy * occ_get(v, &x)
                };
                if n > 0 {
                    out.insert(x, n);
                }
            }
            out
        }
    }

    /// FSw model computing the depth of a term. Swapping leaves the depth
    /// unchanged; the freshness predicate carries no information.
    pub struct DepthFsw;

    impl<C: Constant> FswModel<C> for DepthFsw {
        type D = u64;

        fn var(&self, _: &VarName) -> u64 {
            1
        }
        fn ct(&self, _: &C) -> u64 {
            1
        }
        fn app(&self, _: &Term<C>, f: &u64, _: &Term<C>, a: &u64) -> u64 {
            1 + *f.max(a)
        }
        fn lm(&self, _: &VarName, _: &Term<C>, b: &u64) -> u64 {
            1 + b
        }
        fn fresh(&self, _: &VarName, _: &Term<C>, _: &u64) -> bool {
            true
        }
        fn swap(&self, _: &Term<C>, d: &u64, _: &VarName, _: &VarName) -> u64 {
            *d
        }
    }
}
