//! Operator-law and fold-coherence suites.

use std::collections::BTreeMap;

use lambda_core::cbn::{cdev, CdevFsw};
use lambda_core::fold::models::{occ_eq, DepthFsw, IdentityFsb, IdentityFsw, OccCountFsb};
use lambda_core::fold::{
    check_fsb_clauses, check_fsb_extensions, check_fsw_clauses, fold_fsb, fold_fsw,
    ClauseSamples, ModelExtensions,
};
use lambda_core::hoas::{enc, EncFsb};
use lambda_core::{ConstName, DeltaTable, Term, VarName};

use super::util::{corpus, with_sample_consts};
use super::{Check, SuiteReport};
use crate::gen::CorpusSpec;
use crate::oracle::{db_psubst_free, oracle_subst, to_db};

fn pool() -> [VarName; 2] {
    [VarName::new("x", 0), VarName::new("x", 1)]
}

/// A renamed alpha-variant: every binder opened at a name far from the
/// originals.
fn alpha_variant(t: &Term) -> Term {
    fn go(t: &Term, depth: u32) -> Term {
        match t {
            Term::Var(_) | Term::Ct(_) => t.clone(),
            Term::App(f, a) => Term::app(go(f, depth), go(a, depth)),
            Term::Lm(..) => {
                let mut avoid = t.free_vars();
                for d in 0..=depth {
                    avoid.insert(VarName::new("r", d));
                }
                avoid.remove(&VarName::new("r", depth));
                let fresh = VarName::new("r", depth);
                avoid.insert(fresh.clone());
                let (y, body) = t.unbind(&avoid).expect("Lm");
                let body = body.swap(&y, &fresh);
                Term::lm(fresh, go(&body, depth + 1))
            }
        }
    }
    go(t, 0)
}

/// Operator laws on the exhaustive 6-node corpus, cross-checked against the
/// independent de Bruijn oracle.
pub fn operators(_spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("operators");
    let c6 = corpus(6, 2, 1);
    let c5 = corpus(5, 2, 1);
    let c3 = corpus(3, 2, 1);
    let vars = pool();

    // alpha-equivalence agrees with de Bruijn image equality, including on
    // renamed variants
    let images: Vec<_> = c6.iter().map(to_db).collect();
    for (i, t) in c6.iter().enumerate() {
        let variant = alpha_variant(t);
        ck.case(
            t.alpha_eq(&variant) && to_db(&variant) == images[i],
            "alpha-variants are identified",
            || format!("{t}"),
            || format!("variant {variant}"),
        );
        for (j, u) in c6.iter().enumerate() {
            let engine = t.alpha_eq(u);
            let oracle = images[i] == images[j];
            if engine != oracle {
                ck.case(
                    false,
                    "alpha-equivalence matches the de Bruijn oracle",
                    || format!("{t} vs {u}"),
                    || format!("engine {engine}, oracle {oracle}"),
                );
            }
        }
    }
    ck.case(
        true,
        "alpha-equivalence matches the de Bruijn oracle",
        || "all corpus pairs".into(),
        || String::new(),
    );

    // substitution against the oracle
    for t in &c6 {
        for u in &c3 {
            for y in &vars {
                let engine = to_db(&t.subst(u, y));
                let oracle = oracle_subst(t, u, y);
                ck.case(
                    engine == oracle,
                    "substitution matches the de Bruijn oracle",
                    || format!("{t} [{u} / {y}]"),
                    || "images differ".to_string(),
                );
            }
        }
    }

    // parallel substitution: simultaneity against the oracle, and the
    // singleton/empty laws
    let swap_sigma: BTreeMap<VarName, Term> = [
        (vars[0].clone(), Term::var(vars[1].clone())),
        (vars[1].clone(), Term::var(vars[0].clone())),
    ]
    .into_iter()
    .collect();
    let oracle_sigma = [
        (vars[0].to_string(), to_db::<ConstName>(&Term::var(vars[1].clone()))),
        (vars[1].to_string(), to_db::<ConstName>(&Term::var(vars[0].clone()))),
    ];
    for t in &c6 {
        let engine = to_db(&t.psubst(&swap_sigma));
        let oracle = db_psubst_free(&to_db(t), &oracle_sigma);
        ck.case(
            engine == oracle,
            "parallel substitution is simultaneous",
            || format!("{t}"),
            || "cascade detected".to_string(),
        );
        ck.case(
            t.psubst(&BTreeMap::new()).alpha_eq(t),
            "empty parallel substitution is the identity",
            || format!("{t}"),
            || String::new(),
        );
    }
    for t in &c5 {
        for u in &c3 {
            let single: BTreeMap<VarName, Term> =
                [(vars[0].clone(), u.clone())].into_iter().collect();
            ck.case(
                t.psubst(&single).alpha_eq(&t.subst(u, &vars[0])),
                "singleton parallel substitution is unary substitution",
                || format!("{t} [{u} / {}]", vars[0]),
                || String::new(),
            );
        }
    }

    // swapping: involution, depth preservation, equivariance of freshness
    let swap_pairs = [
        (vars[0].clone(), vars[1].clone()),
        (vars[0].clone(), VarName::new("b", 0)),
    ];
    for t in &c6 {
        for (a, b) in &swap_pairs {
            let sw = t.swap(a, b);
            ck.case(
                sw.swap(a, b).alpha_eq(t) && sw.depth() == t.depth(),
                "swapping is involutive and depth-preserving",
                || format!("{t} under ({a} {b})"),
                || String::new(),
            );
        }
    }

    // abstraction equality: bodies agreeing at a mutually fresh name force
    // equal abstractions
    let lms: Vec<&Term> = c6.iter().filter(|t| matches!(t, Term::Lm(..))).collect();
    for t in &lms {
        for u in &lms {
            let (Term::Lm(x1, b1), Term::Lm(x2, b2)) = (t, u) else {
                unreachable!()
            };
            let mut avoid = t.free_vars();
            avoid.extend(u.free_vars());
            avoid.insert(x1.clone());
            avoid.insert(x2.clone());
            let y = lambda_core::fresh_var(&avoid, "w");
            let lhs = b1.subst(&Term::var(y.clone()), x1);
            let rhs = b2.subst(&Term::var(y.clone()), x2);
            ck.case(
                lhs.alpha_eq(&rhs) == t.alpha_eq(u),
                "abstraction equality via fresh opening",
                || format!("{t} vs {u}"),
                || String::new(),
            );
        }
    }

    // substitution composition, same variable
    for t in &c5 {
        for u1 in &c3 {
            for u2 in &c3 {
                let y = &vars[0];
                let lhs = t.subst(u1, y).subst(u2, y);
                let rhs = t.subst(&u1.subst(u2, y), y);
                ck.case(
                    lhs.alpha_eq(&rhs),
                    "substitution composes at one variable",
                    || format!("{t} [{u1}/{y}] [{u2}/{y}]"),
                    || format!("{lhs} vs {rhs}"),
                );
            }
        }
    }

    // substitution composition, distinct variables
    for t in &c5 {
        for u in &c3 {
            for w in &c3 {
                let (y, z) = (&vars[0], &vars[1]);
                if !w.fresh_in(y) {
                    continue;
                }
                let lhs = t.subst(u, y).subst(w, z);
                let rhs = t.subst(w, z).subst(&u.subst(w, z), y);
                ck.case(
                    lhs.alpha_eq(&rhs),
                    "substitutions at distinct variables commute",
                    || format!("{t} [{u}/{y}] [{w}/{z}]"),
                    || format!("{lhs} vs {rhs}"),
                );
            }
        }
    }

    // fresh substitution is the identity
    let q = VarName::new("q", 0);
    for t in &c6 {
        ck.case(
            t.subst(&Term::ct(ConstName::new("c0")), &q).alpha_eq(t),
            "substitution at a fresh variable is the identity",
            || format!("{t}"),
            || String::new(),
        );
    }

    // the occurrence-counter substitution law, both branches, on all pairs
    for t in &c6 {
        for u in &c6 {
            for y in &vars {
                let substituted = t.subst(u, y);
                let mut ok = true;
                for x in &vars {
                    let got = substituted.count_occ(x);
                    let want = if x == y {
                        t.count_occ(y) * u.count_occ(y)
                    } else {
                        t.count_occ(x) + t.count_occ(y) * u.count_occ(x)
                    };
                    ok &= got == want;
                }
                if !ok {
                    ck.case(
                        false,
                        "occurrence counter substitution law",
                        || format!("{t} [{u} / {y}]"),
                        || "count mismatch".to_string(),
                    );
                }
            }
        }
    }
    ck.case(
        true,
        "occurrence counter substitution law",
        || "all corpus pairs".into(),
        || String::new(),
    );

    // freshness is a zero count
    for t in &c6 {
        for x in &vars {
            ck.case(
                t.fresh_in(x) == (t.count_occ(x) == 0),
                "freshness is a zero occurrence count",
                || format!("{t} / {x}"),
                || String::new(),
            );
        }
    }

    ck.finish()
}

/// Fold coherence: the stock models pass their clause checkers, folds match
/// the direct implementations, and folds are alpha-invariant.
pub fn fold_coherence(_spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("fold-coherence");
    let delta = DeltaTable::new();
    let c6 = corpus(6, 2, 1);
    let c7 = corpus(7, 2, 1);
    let vars = [pool()[0].clone(), pool()[1].clone(), VarName::new("z", 0)];

    let samples = ClauseSamples {
        terms: corpus(4, 2, 1),
        vars: vars.to_vec(),
        consts: vec![ConstName::new("c0")],
    };

    // clause checkers on every stock model
    let r = check_fsb_clauses(&IdentityFsb, &samples, |a, b| a.alpha_eq(b));
    ck.case(
        r.passed(),
        "identity FSb model satisfies its clauses",
        || format!("{} instances", r.checked),
        || format!("{:?}", r.violations.first()),
    );
    let r = check_fsw_clauses(&IdentityFsw, &samples, |a, b| a.alpha_eq(b));
    ck.case(
        r.passed(),
        "identity FSw model satisfies its clauses",
        || format!("{} instances", r.checked),
        || format!("{:?}", r.violations.first()),
    );
    let r = check_fsb_clauses(&OccCountFsb, &samples, occ_eq);
    ck.case(
        r.passed(),
        "occurrence-counter model satisfies its clauses",
        || format!("{} instances", r.checked),
        || format!("{:?}", r.violations.first()),
    );
    let r = check_fsw_clauses(&DepthFsw, &samples, |a, b| a == b);
    ck.case(
        r.passed(),
        "depth model satisfies its clauses",
        || format!("{} instances", r.checked),
        || format!("{:?}", r.violations.first()),
    );
    let cdev_model = CdevFsw { delta: &delta };
    let r = check_fsw_clauses(&cdev_model, &samples, |a, b| a.alpha_eq(b));
    ck.case(
        r.passed(),
        "development model satisfies its clauses",
        || format!("{} instances", r.checked),
        || format!("{:?}", r.violations.first()),
    );
    let r = check_fsb_clauses(&EncFsb, &samples, |a, b| a.alpha_eq(b));
    ck.case(
        r.passed(),
        "encoder model satisfies its clauses",
        || format!("{} instances", r.checked),
        || format!("{:?}", r.violations.first()),
    );
    let r = check_fsb_extensions(
        &EncFsb,
        &samples,
        |a, b| a.alpha_eq(b),
        ModelExtensions {
            freshness_reversing: true,
            constructor_injective: true,
        },
    );
    ck.case(
        r.passed(),
        "encoder model satisfies the reversing and injectivity refinements",
        || format!("{} instances", r.checked),
        || format!("{:?}", r.violations.first()),
    );

    // folds match the direct implementations
    for t in &c6 {
        ck.case(
            fold_fsb(&IdentityFsb, t).alpha_eq(t) && fold_fsw(&IdentityFsw, t).alpha_eq(t),
            "identity folds reproduce the term",
            || format!("{t}"),
            || String::new(),
        );
        let occ = fold_fsb(&OccCountFsb, t);
        ck.case(
            vars.iter()
                .all(|x| occ.get(x).copied().unwrap_or(0) == t.count_occ(x)),
            "occurrence-counter fold matches the direct counter",
            || format!("{t}"),
            || String::new(),
        );
        ck.case(
            fold_fsw(&CdevFsw { delta: &delta }, t).alpha_eq(&cdev(t, &delta)),
            "development fold matches the direct development",
            || format!("{t}"),
            || String::new(),
        );
        ck.case(
            fold_fsb(&EncFsb, t).alpha_eq(&enc(t)),
            "encoder fold matches the direct encoder",
            || format!("{t}"),
            || String::new(),
        );
    }
    for t in &c7 {
        ck.case(
            fold_fsw(&DepthFsw, t) == t.depth(),
            "depth fold matches the direct depth",
            || format!("{t}"),
            || String::new(),
        );
    }

    // development fold with a live delta table
    let sample_delta = DeltaTable::sample_succ(2);
    for t in corpus(6, 2, 2).iter().map(with_sample_consts) {
        ck.case(
            fold_fsw(&CdevFsw { delta: &sample_delta }, &t)
                .alpha_eq(&cdev(&t, &sample_delta)),
            "development fold matches under delta rules",
            || format!("{t}"),
            || String::new(),
        );
    }

    // alpha-invariance of folds
    for t in &c6 {
        let variant = alpha_variant(t);
        let ok = occ_eq(&fold_fsb(&OccCountFsb, t), &fold_fsb(&OccCountFsb, &variant))
            && fold_fsw(&DepthFsw, t) == fold_fsw(&DepthFsw, &variant)
            && fold_fsb(&EncFsb, t).alpha_eq(&fold_fsb(&EncFsb, &variant))
            && fold_fsw(&CdevFsw { delta: &delta }, t)
                .alpha_eq(&fold_fsw(&CdevFsw { delta: &delta }, &variant));
        ck.case(
            ok,
            "folds are stable on alpha-variants",
            || format!("{t} vs {variant}"),
            || String::new(),
        );
    }

    // the fold commutes with substitution the way the counter model says
    let c4 = corpus(4, 2, 1);
    let c3 = corpus(3, 2, 1);
    for t in &c4 {
        for u in &c3 {
            let y = &vars[0];
            let direct = fold_fsb(&OccCountFsb, &t.subst(u, y));
            let composed = lambda_core::fold::FsbModel::<ConstName>::subst(
                &OccCountFsb,
                t,
                &fold_fsb(&OccCountFsb, t),
                u,
                &fold_fsb(&OccCountFsb, u),
                y,
            );
            ck.case(
                occ_eq(&direct, &composed),
                "fold commutes with substitution on the counter model",
                || format!("{t} [{u} / {y}]"),
                || String::new(),
            );
        }
    }

    // the encoder fold reflects freshness and is injective up to alpha
    let c5 = corpus(5, 2, 1);
    for t in &c5 {
        for x in &vars {
            let d = fold_fsb(&EncFsb, t);
            let model_fresh =
                lambda_core::fold::FsbModel::<ConstName>::fresh(&EncFsb, x, t, &d);
            ck.case(
                model_fresh == t.fresh_in(x),
                "encoder fold reflects freshness",
                || format!("{t} / {x}"),
                || String::new(),
            );
        }
    }
    let encs: Vec<_> = c5.iter().map(|t| fold_fsb(&EncFsb, t)).collect();
    for (i, t) in c5.iter().enumerate() {
        for (j, u) in c5.iter().enumerate() {
            if encs[i].alpha_eq(&encs[j]) != t.alpha_eq(u) {
                ck.case(
                    false,
                    "encoder fold is injective up to alpha",
                    || format!("{t} vs {u}"),
                    || String::new(),
                );
            }
        }
    }
    ck.case(
        true,
        "encoder fold is injective up to alpha",
        || "all corpus pairs".into(),
        || String::new(),
    );

    ck.finish()
}
