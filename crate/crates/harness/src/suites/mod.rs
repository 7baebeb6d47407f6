//! The property-suite runner: every suite realizes one acceptance
//! criterion at its pinned scale and tolerance, and reports a typed result.
//!
//! Suites are deterministic given `(seed, spec)`. Corpus sizes, fuels and
//! thresholds are pinned here, in code; the spec passed in contributes the
//! seed (and is otherwise documentation of the run).

mod cbn;
mod cbv;
mod ops;
mod sem;

use std::time::{Duration, Instant};

use crate::gen::CorpusSpec;

/// One failed law instance.
#[derive(Clone, Debug)]
pub struct Failure {
    pub input: String,
    pub law: String,
    pub witness: String,
}

/// Result of one suite run; zero failures means the suite passed.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
    pub wall: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let notes = if self.notes.is_empty() {
            String::new()
        } else {
            format!(" [{}]", self.notes.join("; "))
        };
        format!(
            "{status} {:<22} {:>8} cases, {:>3} failures, {:.2}s{}",
            self.suite,
            self.cases,
            self.failures.len(),
            self.wall.as_secs_f64(),
            notes
        )
    }
}

/// Accumulates cases and failures while a suite runs.
pub(crate) struct Check {
    suite: String,
    cases: u64,
    failures: Vec<Failure>,
    notes: Vec<String>,
    started: Instant,
}

impl Check {
    pub(crate) fn new(suite: &str) -> Self {
        Check {
            suite: suite.to_string(),
            cases: 0,
            failures: Vec::new(),
            notes: Vec::new(),
            started: Instant::now(),
        }
    }

    pub(crate) fn case(
        &mut self,
        ok: bool,
        law: &str,
        input: impl FnOnce() -> String,
        witness: impl FnOnce() -> String,
    ) {
        self.cases += 1;
        if !ok {
            self.failures.push(Failure {
                input: input(),
                law: law.to_string(),
                witness: witness(),
            });
        }
    }

    pub(crate) fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    pub(crate) fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            cases: self.cases,
            failures: self.failures,
            notes: self.notes,
            wall: self.started.elapsed(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown suite {0:?}; known suites: {}", SUITE_NAMES.join(", "))]
pub struct UnknownSuite(pub String);

/// Names of all registered suites, in acceptance order.
pub const SUITE_NAMES: [&str; 12] = [
    "diamond-cbn",
    "par-vs-seq",
    "standardization-cbn",
    "label-bound",
    "commute",
    "equivariance-freshness",
    "soundness-nbe",
    "subst-lemma-nbe",
    "hoas-adequacy",
    "cbv-mirror",
    "operators",
    "fold-coherence",
];

/// Runs one registered suite.
pub fn run_suite(name: &str, spec: &CorpusSpec) -> Result<SuiteReport, UnknownSuite> {
    match name {
        "diamond-cbn" => Ok(cbn::diamond_cbn(spec)),
        "par-vs-seq" => Ok(cbn::par_vs_seq(spec)),
        "standardization-cbn" => Ok(cbn::standardization_cbn(spec)),
        "label-bound" => Ok(cbn::label_bound(spec)),
        "commute" => Ok(cbn::commute(spec)),
        "equivariance-freshness" => Ok(cbn::equivariance_freshness(spec)),
        "soundness-nbe" => Ok(sem::soundness_nbe(spec)),
        "subst-lemma-nbe" => Ok(sem::subst_lemma_nbe(spec)),
        "hoas-adequacy" => Ok(sem::hoas_adequacy(spec)),
        "cbv-mirror" => Ok(cbv::cbv_mirror(spec)),
        "operators" => Ok(ops::operators(spec)),
        "fold-coherence" => Ok(ops::fold_coherence(spec)),
        other => Err(UnknownSuite(other.to_string())),
    }
}

/// Runs every suite in order.
pub fn run_all(spec: &CorpusSpec) -> Vec<SuiteReport> {
    SUITE_NAMES
        .iter()
        .map(|n| run_suite(n, spec).expect("registered name"))
        .collect()
}

pub(crate) mod util {
    use lambda_core::cbn::{step_par, ParDerivation};
    use lambda_core::{ConstName, DeltaTable, Term};
    use rand::Rng;
    use rand_chacha::ChaCha12Rng;

    use crate::gen::{random_term, CorpusSpec};

    /// The exhaustive corpus at pinned bounds.
    pub fn corpus(max_nodes: usize, n_vars: u32, n_consts: u32) -> Vec<Term> {
        crate::gen::enum_terms(&CorpusSpec {
            max_nodes,
            n_vars,
            n_consts,
            ..CorpusSpec::default()
        })
    }

    /// Renames the enumerator's constant pool to the sample table's
    /// alphabet, so delta rules fire on corpus terms.
    pub fn with_sample_consts(t: &Term) -> Term {
        t.map_consts(&|c| {
            if c.label() == "c0" {
                ConstName::new("succ")
            } else if c.label() == "c1" {
                ConstName::new("num0")
            } else {
                c.clone()
            }
        })
    }

    /// Draws a random term over the sample-table alphabet.
    pub fn random_sample_term(
        max_nodes: usize,
        rng: &mut ChaCha12Rng,
    ) -> Term {
        let spec = CorpusSpec {
            max_nodes,
            n_vars: 2,
            n_consts: 2,
            ..CorpusSpec::default()
        };
        with_sample_consts(&random_term(&spec, rng))
    }

    /// Picks a random parallel derivation out of a random term.
    pub fn random_derivation(
        max_nodes: usize,
        delta: &DeltaTable,
        rng: &mut ChaCha12Rng,
    ) -> ParDerivation {
        loop {
            let t = random_sample_term(max_nodes, rng);
            let ds = step_par(&t, delta);
            if !ds.is_empty() {
                let i = rng.gen_range(0..ds.len());
                return ds[i].clone();
            }
        }
    }
}
