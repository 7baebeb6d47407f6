//! The call-by-value mirror suite: CBV diamond, CBV standardization, the
//! CBV label bound, and coherence of the sort-forgetting embedding.

use lambda_core::cbv::{
    cdev_cbv, cdev_join_cbv, delta_to_unsorted, from_unsorted, is_srs_cbv, srs_to_trace_cbv,
    standardize_cbv, step_cbv, step_par_cbv, subst_par_cbv, DeltaTableV, ParDerivationV, TermV,
    ValueV,
};
use lambda_core::{Term, VarName};
use rand::Rng;

use super::util::{corpus, random_sample_term};
use super::{Check, SuiteReport};
use crate::gen::{corpus_rng, CorpusSpec};

/// Everything the mirror must satisfy, on the two-sorted image of the
/// unsorted corpus.
pub fn cbv_mirror(spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("cbv-mirror");
    let delta = DeltaTableV::new();
    let delta_n = delta_to_unsorted(&delta);

    let corpus7: Vec<TermV> = corpus(7, 2, 1).iter().map(from_unsorted).collect();

    // CBV diamond, exhaustive
    for x in &corpus7 {
        let want = cdev_cbv(x, &delta);
        for d in step_par_cbv(x, &delta) {
            let rd = d.replay().expect("replay");
            let ok = (|| {
                let j = cdev_join_cbv(&d, &delta).ok()?;
                let rj = j.validate(&delta).ok()?;
                Some(rj.source.alpha_eq(&rd.target) && rj.target.alpha_eq(&want))
            })()
            .unwrap_or(false);
            ck.case(
                ok,
                "CBV derivations join at the CBV development",
                || format!("{x} => {}", rd.target),
                || format!("expected join at {want}"),
            );
        }
    }

    // embedding coherence: every CBV step embeds into a CBN step, and the
    // sort-reading map inverts the embedding
    for x in &corpus7 {
        let unsorted = x.to_unsorted();
        ck.case(
            from_unsorted(&unsorted).alpha_eq(x),
            "sort reading inverts the embedding",
            || format!("{x}"),
            || "round trip failed".to_string(),
        );
        let cbn_targets: Vec<Term> = lambda_core::cbn::step_cbn(&unsorted, &delta_n)
            .into_iter()
            .map(|(_, u)| u)
            .collect();
        for (_, u) in step_cbv(x, &delta) {
            let ok = cbn_targets.iter().any(|w| u.to_unsorted().alpha_eq(w));
            ck.case(
                ok,
                "CBV steps embed into CBN steps",
                || format!("{x} -> {u}"),
                || "missing on the CBN side".to_string(),
            );
        }
        // value preservation under parallel steps
        if x.as_value().is_some() {
            for d in step_par_cbv(x, &delta) {
                let r = d.replay().expect("replay");
                ck.case(
                    r.target.as_value().is_some(),
                    "values parallel-reduce to values",
                    || format!("{x} => {}", r.target),
                    || "non-value target".to_string(),
                );
            }
        }
    }

    // CBV standardization: all reduction traces of length up to 2 out of
    // the 6-node corpus
    let corpus6: Vec<TermV> = corpus(6, 2, 1).iter().map(from_unsorted).collect();
    for x in &corpus6 {
        let mut stack = vec![vec![x.clone()]];
        while let Some(trace) = stack.pop() {
            check_trace_cbv(&mut ck, &trace, &delta);
            if trace.len() <= 2 {
                let last = trace.last().unwrap();
                for (_, y) in step_cbv(last, &delta) {
                    let mut next = trace.clone();
                    next.push(y);
                    stack.push(next);
                }
            }
        }
    }

    // CBV label bound on 500 random derivation pairs
    let deltas = DeltaTableV::sample_succ(4);
    let mut rng = corpus_rng(spec);
    let pool = [VarName::new("x", 0), VarName::new("x", 1)];
    for _ in 0..500 {
        let dx = random_derivation_cbv(10, &deltas, &mut rng);
        let dv = random_value_derivation(8, &deltas, &mut rng);
        let y = pool[rng.gen_range(0..pool.len())].clone();
        let rx = dx.replay().expect("replay");
        let rv = dv.replay().expect("replay");
        let w_src = rv.source.as_value().expect("value derivation").clone();
        let w_tgt = rv.target.as_value().expect("value derivation").clone();
        let ok = (|| {
            let out = subst_par_cbv(&dx, &dv, &y, &deltas).ok()?;
            let r = out.validate(&deltas).ok()?;
            let src_ok = r.source.alpha_eq(&rx.source.subst(&w_src, &y));
            let tgt_ok = r.target.alpha_eq(&rx.target.subst(&w_tgt, &y));
            let bound = r.label <= rx.label + rx.target.count_occ(&y) * rv.label;
            Some(src_ok && tgt_ok && bound)
        })()
        .unwrap_or(false);
        ck.case(
            ok,
            "CBV subst_par replays within the label bound",
            || format!("{} [{} / {y}]", rx.source, w_src),
            || "bound or endpoint violated".to_string(),
        );
    }

    ck.finish()
}

fn check_trace_cbv(ck: &mut Check, trace: &[TermV], delta: &DeltaTableV) {
    let x = &trace[0];
    let mut chain = Vec::new();
    let mut cur = x.clone();
    for y in &trace[1..] {
        let d = step_par_cbv(&cur, delta)
            .into_iter()
            .find(|d| d.replay().map(|r| r.target.alpha_eq(y)).unwrap_or(false));
        match d {
            Some(d) => {
                chain.push(d);
                cur = y.clone();
            }
            None => {
                ck.case(
                    false,
                    "one-step inclusion into CBV parallel reduction",
                    || format!("{cur} -> {y}"),
                    || "no derivation found".to_string(),
                );
                return;
            }
        }
    }
    let ok = (|| {
        let xs = standardize_cbv(x, &chain, delta).ok()?;
        if !is_srs_cbv(&xs, delta) {
            return Some(false);
        }
        if !xs[0].alpha_eq(x) || !xs.last().unwrap().alpha_eq(trace.last().unwrap()) {
            return Some(false);
        }
        let tr = srs_to_trace_cbv(&xs, delta).ok()?;
        Some(tr.validate(delta).is_ok())
    })()
    .unwrap_or(false);
    ck.case(
        ok,
        "CBV standardization round trip",
        || {
            trace
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join("  ->  ")
        },
        || "standardization or extraction failed".to_string(),
    );
}

fn random_derivation_cbv(
    max_nodes: usize,
    delta: &DeltaTableV,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> ParDerivationV {
    loop {
        let t = from_unsorted(&random_sample_term(max_nodes, rng));
        let ds = step_par_cbv(&t, delta);
        if !ds.is_empty() {
            let i = rng.gen_range(0..ds.len());
            return ds[i].clone();
        }
    }
}

/// Draws a derivation running between values by wrapping a random term in
/// an abstraction value when needed.
fn random_value_derivation(
    max_nodes: usize,
    delta: &DeltaTableV,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> ParDerivationV {
    loop {
        let raw = from_unsorted(&random_sample_term(max_nodes, rng));
        let t = match raw {
            TermV::Val(_) => raw,
            body @ TermV::App(..) => {
                TermV::Val(ValueV::lm(VarName::new("k", 0), body))
            }
        };
        let ds: Vec<ParDerivationV> = step_par_cbv(&t, delta)
            .into_iter()
            .filter(|d| {
                d.replay()
                    .map(|r| r.target.as_value().is_some())
                    .unwrap_or(false)
            })
            .collect();
        if !ds.is_empty() {
            let i = rng.gen_range(0..ds.len());
            return ds[i].clone();
        }
    }
}
