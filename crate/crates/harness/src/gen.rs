//! Term corpora: exhaustive enumeration (one representative per
//! alpha-class) and seeded random generation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use lambda_core::cbv::{from_unsorted, TermV};
use lambda_core::{ConstName, DeltaTable, Term, VarName};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Calculus {
    Cbn,
    Cbv,
}

/// Shape of a test corpus: size bound, variable and constant pools, the
/// calculus flavor, the delta table in force, and the random seed.
#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub max_nodes: usize,
    pub n_vars: u32,
    pub n_consts: u32,
    pub calculus: Calculus,
    pub delta: DeltaTable,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            max_nodes: 7,
            n_vars: 2,
            n_consts: 1,
            calculus: Calculus::Cbn,
            delta: DeltaTable::new(),
            seed: 0xace_0f_5eed,
        }
    }
}

impl CorpusSpec {
    pub fn free_var(i: u32) -> VarName {
        VarName::new("x", i)
    }

    fn bound_var(depth: u32) -> VarName {
        VarName::new("b", depth)
    }

    pub fn const_name(k: u32) -> ConstName {
        ConstName::new(format!("c{k}"))
    }
}

/// Exhaustive, duplicate-free enumeration of alpha-classes within the
/// bounds, in a deterministic order. Free variables are named `x0, x1, ..`
/// and binders canonically by nesting depth, so two enumerated terms are
/// never alpha-equivalent.
pub fn enum_terms(spec: &CorpusSpec) -> Vec<Term> {
    let mut out = Vec::new();
    for n in 1..=spec.max_nodes {
        sized_terms(n, 0, spec, &mut out);
    }
    out
}

fn sized_terms(n: usize, depth: u32, spec: &CorpusSpec, out: &mut Vec<Term>) {
    out.extend(gen_sized(n, depth, spec));
}

fn gen_sized(n: usize, depth: u32, spec: &CorpusSpec) -> Vec<Term> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    if n == 1 {
        for i in 0..spec.n_vars {
            out.push(Term::var(CorpusSpec::free_var(i)));
        }
        for d in 0..depth {
            out.push(Term::var(CorpusSpec::bound_var(d)));
        }
        for k in 0..spec.n_consts {
            out.push(Term::ct(CorpusSpec::const_name(k)));
        }
        return out;
    }
    for body in gen_sized(n - 1, depth + 1, spec) {
        out.push(Term::lm(CorpusSpec::bound_var(depth), body));
    }
    for i in 1..n - 1 {
        for f in gen_sized(i, depth, spec) {
            for a in gen_sized(n - 1 - i, depth, spec) {
                out.push(Term::app(f.clone(), a));
            }
        }
    }
    out
}

/// Closed-form recurrence for the number of de Bruijn skeletons of the
/// given size: the independent count the enumerator is checked against.
pub fn skeleton_count(n: usize, depth: u32, n_vars: u32, n_consts: u32) -> u64 {
    if n == 0 {
        return 0;
    }
    if n == 1 {
        return u64::from(n_vars) + u64::from(depth) + u64::from(n_consts);
    }
    let mut total = skeleton_count(n - 1, depth + 1, n_vars, n_consts);
    for i in 1..n - 1 {
        total += skeleton_count(i, depth, n_vars, n_consts)
            * skeleton_count(n - 1 - i, depth, n_vars, n_consts);
    }
    total
}

/// The two-sorted corpus: the image of the unsorted one under the total
/// sort-reading map.
pub fn enum_terms_cbv(spec: &CorpusSpec) -> Vec<TermV> {
    enum_terms(spec).iter().map(from_unsorted).collect()
}

/// A deterministic seeded generator.
pub fn corpus_rng(spec: &CorpusSpec) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(spec.seed)
}

/// Draws one random term within the size bound; deterministic per RNG
/// state.
pub fn random_term(spec: &CorpusSpec, rng: &mut ChaCha12Rng) -> Term {
    let budget = rng.gen_range(1..=spec.max_nodes);
    random_sized(budget, &mut Vec::new(), spec, rng)
}

fn random_sized(
    budget: usize,
    binders: &mut Vec<VarName>,
    spec: &CorpusSpec,
    rng: &mut ChaCha12Rng,
) -> Term {
    if budget <= 1 {
        let consts = spec.n_consts;
        let pool = spec.n_vars + binders.len() as u32 + consts;
        let pick = rng.gen_range(0..pool.max(1));
        if pick < spec.n_vars {
            return Term::var(CorpusSpec::free_var(pick));
        }
        let pick = pick - spec.n_vars;
        if (pick as usize) < binders.len() {
            return Term::var(binders[pick as usize].clone());
        }
        return Term::ct(CorpusSpec::const_name(pick - binders.len() as u32));
    }
    match rng.gen_range(0..3) {
        0 => {
            let binder = VarName::new("b", binders.len() as u32);
            binders.push(binder.clone());
            let body = random_sized(budget - 1, binders, spec, rng);
            binders.pop();
            Term::lm(binder, body)
        }
        1 if budget >= 3 => {
            let left = rng.gen_range(1..=budget - 2);
            let f = random_sized(left, binders, spec, rng);
            let a = random_sized(budget - 1 - left, binders, spec, rng);
            Term::app(f, a)
        }
        _ => {
            if budget >= 3 && rng.gen_bool(0.5) {
                let left = rng.gen_range(1..=budget - 2);
                let f = random_sized(left, binders, spec, rng);
                let a = random_sized(budget - 1 - left, binders, spec, rng);
                Term::app(f, a)
            } else {
                random_sized(1, binders, spec, rng)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn smallest_corpus_is_a_single_variable() {
        let spec = CorpusSpec {
            max_nodes: 1,
            n_vars: 1,
            n_consts: 0,
            ..CorpusSpec::default()
        };
        let ts = enum_terms(&spec);
        assert_eq!(ts.len(), 1);
        assert!(ts[0].alpha_eq(&Term::var(VarName::new("x", 0))));
    }

    #[test]
    fn counts_match_the_recurrence() {
        for (nv, nc, max) in [(1, 0, 6), (2, 1, 7), (1, 2, 5)] {
            let spec = CorpusSpec {
                max_nodes: max,
                n_vars: nv,
                n_consts: nc,
                ..CorpusSpec::default()
            };
            let got = enum_terms(&spec).len() as u64;
            let want: u64 = (1..=max).map(|n| skeleton_count(n, 0, nv, nc)).sum();
            assert_eq!(got, want, "vars {nv} consts {nc} max {max}");
        }
    }

    #[test]
    fn no_two_outputs_are_alpha_equivalent() {
        let spec = CorpusSpec {
            max_nodes: 5,
            ..CorpusSpec::default()
        };
        let ts = enum_terms(&spec);
        let mut seen = HashSet::new();
        for t in &ts {
            assert!(seen.insert(t.to_ln()), "duplicate class: {t}");
            assert!(t.size() <= 5);
        }
    }

    #[test]
    fn random_terms_are_reproducible_and_bounded() {
        let spec = CorpusSpec {
            max_nodes: 9,
            n_vars: 2,
            n_consts: 1,
            ..CorpusSpec::default()
        };
        let mut r1 = corpus_rng(&spec);
        let mut r2 = corpus_rng(&spec);
        for _ in 0..50 {
            let a = random_term(&spec, &mut r1);
            let b = random_term(&spec, &mut r2);
            assert_eq!(format!("{a}"), format!("{b}"));
            assert!(a.size() <= 9);
        }
    }

    #[test]
    fn all_constructors_appear_across_draws() {
        let spec = CorpusSpec {
            max_nodes: 9,
            n_vars: 2,
            n_consts: 1,
            ..CorpusSpec::default()
        };
        let mut rng = corpus_rng(&spec);
        let (mut vars, mut cts, mut apps, mut lms) = (0u32, 0u32, 0u32, 0u32);
        fn walk(t: &Term, vars: &mut u32, cts: &mut u32, apps: &mut u32, lms: &mut u32) {
            match t {
                Term::Var(_) => *vars += 1,
                Term::Ct(_) => *cts += 1,
                Term::App(f, a) => {
                    *apps += 1;
                    walk(f, vars, cts, apps, lms);
                    walk(a, vars, cts, apps, lms);
                }
                Term::Lm(_, b) => {
                    *lms += 1;
                    walk(b, vars, cts, apps, lms);
                }
            }
        }
        for _ in 0..1000 {
            let t = random_term(&spec, &mut rng);
            walk(&t, &mut vars, &mut cts, &mut apps, &mut lms);
        }
        assert!(vars > 0 && cts > 0 && apps > 0 && lms > 0);
    }

    #[test]
    fn cbv_corpus_mirrors_the_unsorted_one() {
        let spec = CorpusSpec {
            max_nodes: 4,
            ..CorpusSpec::default()
        };
        let n = enum_terms(&spec).len();
        let v = enum_terms_cbv(&spec);
        assert_eq!(v.len(), n);
        for (t, u) in enum_terms(&spec).iter().zip(v.iter()) {
            assert!(u.to_unsorted().alpha_eq(t));
        }
    }
}
