//! Property tests for the operator laws on random terms: substitution
//! composition, equivariance, involution, and the occurrence-counter laws.

use std::collections::BTreeMap;

use lambda_core::{ConstName, Term, VarName};
use proptest::prelude::*;

fn vn(i: u8) -> VarName {
    VarName::new(["x", "y", "z"][usize::from(i % 3)], u32::from(i / 3))
}

fn arb_var() -> impl Strategy<Value = VarName> {
    (0u8..6).prop_map(vn)
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        arb_var().prop_map(Term::var),
        (0u8..2).prop_map(|i| Term::ct(ConstName::new(["c", "d"][usize::from(i)]))),
    ];
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (arb_var(), inner).prop_map(|(x, b)| Term::lm(x, b)),
        ]
    })
}

proptest! {
    /// Substituting twice at the same variable collapses to substituting
    /// the composed payload.
    #[test]
    fn subst_composition_same_variable(
        t in arb_term(), u1 in arb_term(), u2 in arb_term(), y in arb_var()
    ) {
        let lhs = t.subst(&u1, &y).subst(&u2, &y);
        let rhs = t.subst(&u1.subst(&u2, &y), &y);
        prop_assert!(lhs.alpha_eq(&rhs), "{lhs} vs {rhs}");
    }

    /// Substitutions at distinct variables commute when the later payload
    /// is fresh for the earlier variable.
    #[test]
    fn subst_composition_distinct_variables(
        t in arb_term(), u in arb_term(), w in arb_term(), y in arb_var(), z in arb_var()
    ) {
        prop_assume!(y != z);
        prop_assume!(w.fresh_in(&y));
        let lhs = t.subst(&u, &y).subst(&w, &z);
        let rhs = t.subst(&w, &z).subst(&u.subst(&w, &z), &y);
        prop_assert!(lhs.alpha_eq(&rhs), "{lhs} vs {rhs}");
    }

    /// Abstractions are equal whenever their bodies agree at a mutually
    /// fresh name.
    #[test]
    fn abstraction_equality(t in arb_term(), x in arb_var(), x2 in arb_var()) {
        let mut avoid = t.free_vars();
        avoid.insert(x.clone());
        avoid.insert(x2.clone());
        let y = lambda_core::fresh_var(&avoid, "w");
        let body1 = t.subst(&Term::var(y.clone()), &x);
        // build the second abstraction by renaming through a different binder
        let lm1 = Term::lm(x.clone(), t.clone());
        let lm2 = Term::lm(y.clone(), body1.clone());
        prop_assert!(lm1.alpha_eq(&lm2));
        let body2 = lm2.unbind(&avoid).unwrap();
        let lm3 = Term::lm(body2.0, body2.1);
        prop_assert!(lm1.alpha_eq(&lm3));
        let _ = x2;
    }

    /// Substitution at a fresh variable is the identity.
    #[test]
    fn subst_fresh_identity(t in arb_term(), u in arb_term(), y in arb_var()) {
        prop_assume!(t.fresh_in(&y));
        prop_assert!(t.subst(&u, &y).alpha_eq(&t));
    }

    /// Swapping is involutive and preserves depth.
    #[test]
    fn swap_involution_and_depth(t in arb_term(), a in arb_var(), b in arb_var()) {
        let sw = t.swap(&a, &b);
        prop_assert_eq!(sw.depth(), t.depth());
        prop_assert!(sw.swap(&a, &b).alpha_eq(&t));
    }

    /// Alpha-equivalence and freshness are equivariant.
    #[test]
    fn equivariance(t in arb_term(), u in arb_term(), a in arb_var(), b in arb_var(), x in arb_var()) {
        let sw = |v: &VarName| {
            if v == &a { b.clone() } else if v == &b { a.clone() } else { v.clone() }
        };
        prop_assert_eq!(
            t.alpha_eq(&u),
            t.swap(&a, &b).alpha_eq(&u.swap(&a, &b))
        );
        prop_assert_eq!(t.fresh_in(&x), t.swap(&a, &b).fresh_in(&sw(&x)));
    }

    /// Alpha-equal terms have equal depth and locally-nameless images.
    #[test]
    fn alpha_eq_matches_canonical_form(t in arb_term(), u in arb_term()) {
        prop_assert_eq!(t.alpha_eq(&u), t.to_ln() == u.to_ln());
        if t.alpha_eq(&u) {
            prop_assert_eq!(t.depth(), u.depth());
        }
    }

    /// The occurrence counter satisfies its substitution law.
    #[test]
    fn count_occ_substitution_law(
        t in arb_term(), u in arb_term(), x in arb_var(), y in arb_var()
    ) {
        let substituted = t.subst(&u, &y);
        let got = substituted.count_occ(&x);
        let want = if x == y {
            t.count_occ(&y) * u.count_occ(&y)
        } else {
            t.count_occ(&x) + t.count_occ(&y) * u.count_occ(&x)
        };
        prop_assert_eq!(got, want, "{} [{} / {}]", t, u, y);
    }

    /// Freshness means a zero occurrence count.
    #[test]
    fn fresh_means_zero_occurrences(t in arb_term(), x in arb_var()) {
        prop_assert_eq!(t.fresh_in(&x), t.count_occ(&x) == 0);
    }

    /// A singleton parallel substitution agrees with unary substitution,
    /// and the empty map is the identity.
    #[test]
    fn psubst_laws(t in arb_term(), u in arb_term(), y in arb_var()) {
        let single: BTreeMap<VarName, Term> = [(y.clone(), u.clone())].into_iter().collect();
        prop_assert!(t.psubst(&single).alpha_eq(&t.subst(&u, &y)));
        prop_assert!(t.psubst(&BTreeMap::new()).alpha_eq(&t));
    }

    /// Parallel substitution is simultaneous: swapping two variables via a
    /// map never cascades.
    #[test]
    fn psubst_simultaneous(t in arb_term()) {
        let x = vn(0);
        let y = vn(1);
        let m: BTreeMap<VarName, Term> = [
            (x.clone(), Term::var(y.clone())),
            (y.clone(), Term::var(x.clone())),
        ]
        .into_iter()
        .collect();
        let got = t.psubst(&m);
        let want = t.swap(&x, &y);
        prop_assert!(got.alpha_eq(&want), "{} vs {}", got, want);
    }

    /// Unbind produces an alpha-equal abstraction avoiding the given set.
    #[test]
    fn unbind_contract(b in arb_term(), x in arb_var(), a1 in arb_var(), a2 in arb_var()) {
        let t = Term::lm(x, b);
        let avoid = [a1, a2].into_iter().collect();
        let (y, body) = t.unbind(&avoid).unwrap();
        prop_assert!(!avoid.contains(&y));
        prop_assert!(t.fresh_in(&y));
        prop_assert!(Term::lm(y, body).alpha_eq(&t));
    }
}
