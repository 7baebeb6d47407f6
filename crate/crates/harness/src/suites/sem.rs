//! Semantics and encoding suites: soundness of the NbE environment model,
//! the substitution lemma, and the adequacy package of the self-encoding.

use lambda_core::cbn::{step_cbn, step_left};
use lambda_core::hoas::{
    check_adequacy_step, dec, enc, extend_delta, is_normal_term_prime, Adequacy,
};
use lambda_core::semantics::{
    check_soundness, identity_valuation, nbe_eval, normalize_nbe, reify, Fuel, Soundness,
};
use lambda_core::{DeltaTable, Term, VarName};
use rand::Rng;

use super::util::{corpus, random_sample_term, with_sample_consts};
use super::{Check, SuiteReport};
use crate::gen::{corpus_rng, CorpusSpec};
use crate::oracle::normalize_oracle;

/// Soundness at desk scale: 200 random normalizing pairs (the second term
/// obtained by up to 4 reduction steps) are never refuted, and at least 90%
/// are confirmed at fuel 256.
pub fn soundness_nbe(spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("soundness-nbe");
    let delta = DeltaTable::sample_succ(4);
    let mut rng = corpus_rng(spec);

    let mut confirmed = 0u64;
    let mut indeterminate = 0u64;
    let mut produced = 0;
    let mut attempts = 0u64;
    while produced < 200 && attempts < 200_000 {
        attempts += 1;
        let x = random_sample_term(12, &mut rng);
        if normalize_oracle(&x, &delta, 150).is_none() {
            continue;
        }
        produced += 1;
        let mut y = x.clone();
        for _ in 0..rng.gen_range(0..=4u32) {
            let succs = step_cbn(&y, &delta);
            if succs.is_empty() {
                break;
            }
            y = succs[rng.gen_range(0..succs.len())].1.clone();
        }
        match check_soundness(&x, &y, &delta, 256) {
            Soundness::Confirmed => {
                confirmed += 1;
                ck.case(true, "soundness", || String::new(), || String::new());
            }
            Soundness::Indeterminate => {
                indeterminate += 1;
                ck.case(true, "soundness", || String::new(), || String::new());
            }
            Soundness::Refuted => {
                ck.case(
                    false,
                    "reduction-related terms are never refuted",
                    || format!("{x}  vs  {y}"),
                    || "normal forms differ".to_string(),
                );
            }
        }
    }
    let threshold_ok = confirmed * 10 >= 9 * produced as u64;
    ck.case(
        threshold_ok,
        "at least 90% of pairs confirmed at fuel 256",
        || format!("{confirmed}/{produced} confirmed"),
        || format!("{indeterminate} indeterminate"),
    );
    ck.note(format!(
        "confirmed {confirmed}, indeterminate {indeterminate}, of {produced} pairs"
    ));

    ck.finish()
}

/// The substitution lemma under the NbE model: on exhaustive small triples,
/// whenever both routes normalize they agree. The first route substitutes
/// then normalizes; the second evaluates under the updated valuation.
pub fn subst_lemma_nbe(_spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("subst-lemma-nbe");
    let delta = DeltaTable::new();
    let xs = corpus(5, 2, 1);
    let ys = corpus(3, 2, 1);
    let vars = [VarName::new("x", 0), VarName::new("x", 1)];

    for x in &xs {
        for payload in &ys {
            for y in &vars {
                let mut f1 = Fuel::new(256);
                let lhs = normalize_nbe(&x.subst(payload, y), &delta, &mut f1);
                let rhs = (|| {
                    let mut fv = x.free_vars();
                    fv.extend(payload.free_vars());
                    let rho = identity_valuation(&fv);
                    let mut f2 = Fuel::new(256);
                    let vp = nbe_eval(payload, &rho, &delta, &mut f2)?;
                    let vx = nbe_eval(x, &rho.update(y, vp), &delta, &mut f2)?;
                    reify(&vx, &fv, &delta, &mut f2)
                })();
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) => ck.case(
                        a.alpha_eq(&b),
                        "substitution lemma",
                        || format!("{x} [{payload} / {y}]"),
                        || format!("{a} vs {b}"),
                    ),
                    // indeterminate sides are outside the exact check
                    _ => ck.case(true, "substitution lemma", || String::new(), || String::new()),
                }
            }
        }
    }

    ck.finish()
}

/// The adequacy package of the self-encoding on the exhaustive 8-node
/// corpus: decode round trip (hence injectivity), compositionality on
/// substitution triples, the freshness equivalence, normality of images,
/// and confirmation of every left step through the encoded relation.
pub fn hoas_adequacy(_spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("hoas-adequacy");
    let delta = DeltaTable::sample_succ(2);
    let delta_prime = extend_delta(&delta);
    let terms: Vec<Term> = corpus(8, 2, 2)
        .iter()
        .map(with_sample_consts)
        .collect();
    let vars = [VarName::new("x", 0), VarName::new("x", 1), VarName::new("b", 0)];

    for t in &terms {
        let image = enc(t);
        let back = dec(&image);
        ck.case(
            back.as_ref().map(|b| b.alpha_eq(t)).unwrap_or(false),
            "decode inverts encode",
            || format!("{t}"),
            || format!("decoded {:?}", back.map(|b| b.to_string())),
        );
        for x in &vars {
            ck.case(
                t.fresh_in(x) == image.fresh_in(x),
                "freshness is preserved and reflected",
                || format!("{t} / {x}"),
                || "freshness mismatch".to_string(),
            );
        }
        ck.case(
            is_normal_term_prime(&image, &delta_prime),
            "encoder images are normal",
            || format!("{t}"),
            || "image has a reduct".to_string(),
        );
        if let Some(y) = step_left(t, &delta) {
            let verdict = check_adequacy_step(t, &y, &delta, &delta_prime, 64);
            ck.case(
                matches!(verdict, Ok(Adequacy::Confirmed)),
                "left steps are confirmed through the encoding",
                || format!("{t} -L-> {y}"),
                || format!("verdict {verdict:?}"),
            );
        }
    }

    // compositionality on small substitution triples
    let xs = corpus(4, 2, 1);
    let ys = corpus(3, 2, 1);
    for x in &xs {
        for payload in &ys {
            for y in &vars[..2] {
                let lhs = enc(&x.subst(payload, y));
                let rhs = enc(x).subst(&enc(payload), y);
                ck.case(
                    lhs.alpha_eq(&rhs),
                    "encoding commutes with substitution",
                    || format!("{x} [{payload} / {y}]"),
                    || format!("{lhs} vs {rhs}"),
                );
            }
        }
    }

    ck.finish()
}
