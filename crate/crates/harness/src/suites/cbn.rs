//! Call-by-name suites: the diamond property, parallel-versus-sequential
//! agreement, standardization, and the lemma-level random checks.

use lambda_core::cbn::{
    cdev, cdev_join, commute_par_left, join_multi, srs_to_trace, standardize, step_cbn,
    step_left, step_par, subst_par, swap_derivation, validate_chain, ParDerivation, SrsProver,
};
use lambda_core::{DeltaTable, Term, VarName};
use rand::Rng;

use super::util::{corpus, random_derivation, random_sample_term};
use super::{Check, SuiteReport};
use crate::gen::{corpus_rng, CorpusSpec};
use crate::oracle::reachable_within;

/// Diamond: on the exhaustive corpus (7 nodes, 2 vars, 1 constant, empty
/// table), every parallel derivation joins at the complete development; on
/// 500 random spans (12 nodes, chains of up to 4), the multi-join replays.
pub fn diamond_cbn(spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("diamond-cbn");
    let delta = DeltaTable::new();

    for x in corpus(7, 2, 1) {
        let want = cdev(&x, &delta);
        for d in step_par(&x, &delta) {
            let rd = d.replay().expect("enumerated derivations replay");
            let joined = cdev_join(&d, &delta);
            let ok = match joined {
                Ok(j) => match j.validate(&delta) {
                    Ok(rj) => rj.source.alpha_eq(&rd.target) && rj.target.alpha_eq(&want),
                    Err(_) => false,
                },
                Err(_) => false,
            };
            ck.case(
                ok,
                "cdev_join closes the triangle at cdev",
                || format!("{x} => {}", rd.target),
                || format!("expected join at {want}"),
            );
        }
    }

    let mut rng = corpus_rng(spec);
    for _ in 0..500 {
        let x = random_sample_term(12, &mut rng);
        let chain1 = random_chain(&x, 4, &delta, &mut rng);
        let chain2 = random_chain(&x, 4, &delta, &mut rng);
        let ok = (|| {
            let (z, e1, e2) = join_multi(&x, &chain1, &chain2, &delta).ok()?;
            let end1 = chain_end(&x, &chain1);
            let end2 = chain_end(&x, &chain2);
            let r1 = validate_chain(&end1, &e1, &delta).ok()?;
            let r2 = validate_chain(&end2, &e2, &delta).ok()?;
            let z1 = r1.last().map(|r| r.target.clone()).unwrap_or(end1);
            let z2 = r2.last().map(|r| r.target.clone()).unwrap_or(end2);
            Some(z1.alpha_eq(&z) && z2.alpha_eq(&z))
        })()
        .unwrap_or(false);
        ck.case(
            ok,
            "join_multi returns replay-valid joining chains",
            || format!("{x}"),
            || "span failed to join".to_string(),
        );
    }

    ck.finish()
}

fn random_chain(
    x: &Term,
    max_len: usize,
    delta: &DeltaTable,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Vec<ParDerivation> {
    let len = rng.gen_range(0..=max_len);
    let mut cur = x.clone();
    let mut out = Vec::new();
    for _ in 0..len {
        let ds = step_par(&cur, delta);
        if ds.is_empty() {
            break;
        }
        let d = ds[rng.gen_range(0..ds.len())].clone();
        cur = d.replay().expect("enumerated derivations replay").target;
        out.push(d);
    }
    out
}

fn chain_end(x: &Term, chain: &[ParDerivation]) -> Term {
    chain
        .last()
        .and_then(|d| d.replay().ok())
        .map(|r| r.target)
        .unwrap_or_else(|| x.clone())
}

/// Parallel versus sequential: every one-step reduct has a matching
/// parallel derivation, and every parallel target is reachable by at most
/// label-many ordinary steps (breadth-first oracle).
pub fn par_vs_seq(_spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("par-vs-seq");
    let delta = DeltaTable::new();

    for x in corpus(7, 2, 1) {
        let derivations = step_par(&x, &delta);
        let targets: Vec<Term> = derivations
            .iter()
            .map(|d| d.replay().expect("replay").target)
            .collect();
        for (_, y) in step_cbn(&x, &delta) {
            let ok = targets.iter().any(|t| t.alpha_eq(&y));
            ck.case(
                ok,
                "every sequential step is a parallel step",
                || format!("{x} -> {y}"),
                || "no matching parallel derivation".to_string(),
            );
        }
        for d in &derivations {
            let r = d.replay().expect("replay");
            let ok = reachable_within(&x, &r.target, r.label, &delta);
            ck.case(
                ok,
                "parallel target reachable within label-many steps",
                || format!("{x} => {} (label {})", r.target, r.label),
                || "bounded search found no path".to_string(),
            );
        }
    }

    ck.finish()
}

/// Standardization, both directions: every reduction trace of length up to
/// 3 out of the 6-node corpus standardizes into an accepted standard
/// sequence with the right endpoints, and the sequence extracts back into a
/// replayable trace.
pub fn standardization_cbn(_spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("standardization-cbn");
    let delta = DeltaTable::new();
    let prover = SrsProver::new(&delta);

    for x in corpus(6, 2, 1) {
        let mut stack = vec![vec![x.clone()]];
        while let Some(trace) = stack.pop() {
            check_trace(&mut ck, &trace, &delta, &prover);
            if trace.len() <= 3 {
                let last = trace.last().unwrap();
                for (_, y) in step_cbn(last, &delta) {
                    let mut next = trace.clone();
                    next.push(y);
                    if next.len() <= 4 {
                        stack.push(next);
                    }
                }
            }
        }
    }

    ck.finish()
}

fn check_trace(
    ck: &mut Check,
    trace: &[Term],
    delta: &DeltaTable,
    prover: &SrsProver<'_>,
) {
    let x = &trace[0];
    // lift the sequential trace to a parallel chain via one-step inclusion
    let mut chain = Vec::new();
    let mut cur = x.clone();
    for y in &trace[1..] {
        let d = step_par(&cur, delta)
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
                    "one-step inclusion into parallel reduction",
                    || format!("{cur} -> {y}"),
                    || "no derivation found".to_string(),
                );
                return;
            }
        }
    }
    let ok = (|| {
        let xs = standardize(x, &chain, delta).ok()?;
        if !prover.is_srs(&xs) {
            return Some(false);
        }
        if !xs[0].alpha_eq(x) || !xs.last().unwrap().alpha_eq(trace.last().unwrap()) {
            return Some(false);
        }
        // the reverse direction: the sequence replays as a trace
        let tr = srs_to_trace(&xs, delta).ok()?;
        if tr.validate(delta).is_err() {
            return Some(false);
        }
        Some(tr.start.alpha_eq(x) && tr.end().alpha_eq(trace.last().unwrap()))
    })()
    .unwrap_or(false);
    ck.case(
        ok,
        "standardize yields an accepted standard sequence with the trace endpoints",
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

/// Label bound: on 1000 random derivation pairs, derivation substitution
/// replays with the bound `k <= m + occ(y, X') * n`.
pub fn label_bound(spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("label-bound");
    let delta = DeltaTable::sample_succ(4);
    let mut rng = corpus_rng(spec);
    let pool = [VarName::new("x", 0), VarName::new("x", 1)];

    for _ in 0..1000 {
        let dx = random_derivation(10, &delta, &mut rng);
        let dy = random_derivation(8, &delta, &mut rng);
        let y = pool[rng.gen_range(0..pool.len())].clone();
        let rx = dx.replay().expect("replay");
        let ry = dy.replay().expect("replay");
        let ok = (|| {
            let out = subst_par(&dx, &dy, &y, &delta).ok()?;
            let r = out.validate(&delta).ok()?;
            let src_ok = r.source.alpha_eq(&rx.source.subst(&ry.source, &y));
            let tgt_ok = r.target.alpha_eq(&rx.target.subst(&ry.target, &y));
            let bound = r.label <= rx.label + rx.target.count_occ(&y) * ry.label;
            Some(src_ok && tgt_ok && bound)
        })()
        .unwrap_or(false);
        ck.case(
            ok,
            "subst_par replays within the label bound",
            || format!("{} [{} / {y}]", rx.source, ry.source),
            || "bound or endpoint violated".to_string(),
        );
    }

    ck.finish()
}

/// Commutation: on 500 random (derivation, left step) pairs, the commuted
/// left trace and residual derivation replay with matching endpoints.
pub fn commute(spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("commute");
    let delta = DeltaTable::sample_succ(4);
    let mut rng = corpus_rng(spec);

    let mut produced = 0;
    let mut attempts = 0u64;
    while produced < 500 && attempts < 500_000 {
        attempts += 1;
        let d = random_derivation(10, &delta, &mut rng);
        let r = d.replay().expect("replay");
        let Some(z) = step_left(&r.target, &delta) else {
            continue;
        };
        produced += 1;
        let ok = (|| {
            let (trace, dd) = commute_par_left(&d, &z, &delta).ok()?;
            trace.validate(&delta).ok()?;
            if !trace.start.alpha_eq(&r.source) {
                return Some(false);
            }
            let rd = dd.validate(&delta).ok()?;
            if !trace.end().alpha_eq(&rd.source) || !rd.target.alpha_eq(&z) {
                return Some(false);
            }
            // the trace is genuinely a left trace
            let terms = trace.terms();
            for w in terms.windows(2) {
                match step_left(&w[0], &delta) {
                    Some(next) if next.alpha_eq(&w[1]) => {}
                    _ => return Some(false),
                }
            }
            Some(true)
        })()
        .unwrap_or(false);
        ck.case(
            ok,
            "commute_par_left replays with matching endpoints",
            || format!("{} => {} -L-> {z}", r.source, r.target),
            || "commutation failed".to_string(),
        );
    }

    ck.finish()
}

/// Equivariance and freshness: swapping preserves validity and labels on
/// 1000 random derivation/variable-pair cases, and valid derivations
/// preserve freshness of their targets.
pub fn equivariance_freshness(spec: &CorpusSpec) -> SuiteReport {
    let mut ck = Check::new("equivariance-freshness");
    let delta = DeltaTable::sample_succ(4);
    let mut rng = corpus_rng(spec);
    let pool = [
        VarName::new("x", 0),
        VarName::new("x", 1),
        VarName::new("b", 0),
        VarName::new("z", 0),
    ];

    for _ in 0..1000 {
        let d = random_derivation(10, &delta, &mut rng);
        let y = pool[rng.gen_range(0..pool.len())].clone();
        let z = pool[rng.gen_range(0..pool.len())].clone();
        let r = d.replay().expect("replay");
        let ok = (|| {
            let sw = swap_derivation(&d, &y, &z);
            let rs = sw.validate(&delta).ok()?;
            let endpoints = rs.source.alpha_eq(&r.source.swap(&y, &z))
                && rs.target.alpha_eq(&r.target.swap(&y, &z));
            Some(endpoints && rs.label == r.label)
        })()
        .unwrap_or(false);
        ck.case(
            ok,
            "swap_derivation preserves validity and label",
            || format!("{} => {} under ({y} {z})", r.source, r.target),
            || "swap broke the derivation".to_string(),
        );

        let fresh_ok = pool.iter().all(|v| {
            !r.source.fresh_in(v) || r.target.fresh_in(v)
        });
        ck.case(
            fresh_ok,
            "parallel steps preserve freshness",
            || format!("{} => {}", r.source, r.target),
            || "a fresh variable appeared".to_string(),
        );
    }

    ck.finish()
}
